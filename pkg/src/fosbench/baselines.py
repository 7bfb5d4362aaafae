"""Scorers for the evaluation harness.

Two built-ins exercise the pluggable scorer interface: EdgeBank, the
parameter-free memorization baseline (infinite and time-window variants),
and a compact trainable scorer that projects [own feature, neighbor-mean
feature, elapsed-time encoding] per node and feeds the concatenated pair
through a two-layer ReLU MLP ending in a sigmoid. The neural scorer is a
deliberately minimal reference; richer temporal encoders plug in through
the same observe/score_batch protocol.

A scorer object must provide:
    observe(events)                incorporate events (chronological order)
    score_batch(pairs, t, rng)     probabilities for [(u, v), ...] at year t
"""

import copy
import csv
from dataclasses import dataclass

import numpy as np

from .features import NodeFeatureTable, sinusoidal_encoding
from .sampling import NeighborIndex, SamplerConfig, batch_rng, sample_neighbors

__all__ = [
    "BaselineError",
    "TrainingDiverged",
    "EdgeBankMemory",
    "edgebank_score",
    "ScorerParams",
    "TrainConfig",
    "NeuralScorer",
    "encode_node",
    "score_pair",
    "train",
    "gradient_check",
    "init_params",
    "save_checkpoint",
    "load_checkpoint",
]


class BaselineError(Exception):
    pass


class TrainingDiverged(BaselineError):
    pass


# ---------------------------------------------------------------------------
# EdgeBank


class EdgeBankMemory:
    """Pair memory scoring 1 for remembered pairs, 0 otherwise.

    infinite mode remembers every pair ever observed; time_window mode
    honors only pairs whose last appearance falls within the trailing
    ``window_years`` before the query year.
    """

    def __init__(self, mode: str = "infinite", window_years: int | None = None):
        if mode not in ("infinite", "time_window"):
            raise BaselineError(f"unknown EdgeBank mode {mode!r}")
        if mode == "time_window" and (window_years is None or window_years < 1):
            raise BaselineError("time_window mode needs window_years >= 1")
        self.mode = mode
        self.window_years = window_years
        self.last_seen: dict[tuple[str, str], int] = {}

    def observe(self, events) -> None:
        for e in events:
            self.last_seen[e.pair] = e.year

    def score(self, u: str, v: str, t: int) -> int:
        key = (u, v) if u < v else (v, u)
        year = self.last_seen.get(key)
        if year is None:
            return 0
        if self.mode == "infinite":
            return 1
        return 1 if year >= t - self.window_years else 0

    def score_batch(self, pairs, t: int, rng=None) -> np.ndarray:
        return np.array([self.score(u, v, t) for u, v in pairs], dtype=np.float64)


def edgebank_score(mem: EdgeBankMemory, pair, t: int) -> int:
    u, v = pair
    return mem.score(u, v, t)


# ---------------------------------------------------------------------------
# Reference neural scorer


@dataclass
class ScorerParams:
    """Encoder projection + two-layer scoring head.

    activation "identity" disables the rectifier (used by the exact-gradient
    regime of the numeric checks).
    """

    w_enc: np.ndarray   # (z_dim, in_dim)
    b_enc: np.ndarray   # (z_dim,)
    w1: np.ndarray      # (hidden, 2*z_dim)
    b1: np.ndarray      # (hidden,)
    w2: np.ndarray      # (hidden,)
    b2: float
    time_dim: int
    activation: str = "relu"

    def arrays(self) -> dict[str, np.ndarray]:
        return {"w_enc": self.w_enc, "b_enc": self.b_enc,
                "w1": self.w1, "b1": self.b1, "w2": self.w2}

    def check_finite(self) -> None:
        for name, arr in self.arrays().items():
            if not np.all(np.isfinite(arr)):
                raise BaselineError(f"non-finite parameter {name}")
        if not np.isfinite(self.b2):
            raise BaselineError("non-finite parameter b2")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    dropout: float = 0.1
    max_epochs: int = 30
    patience: int = 20
    batch_size: int = 300
    seed: int = 0
    hidden_dim: int = 32
    encode_dim: int = 32
    time_dim: int = 16

    def __post_init__(self):
        if min(self.learning_rate, self.max_epochs, self.batch_size,
               self.hidden_dim, self.encode_dim, self.time_dim) <= 0:
            raise BaselineError("train config values must be positive")
        if not (0 <= self.dropout < 1):
            raise BaselineError(f"dropout must be in [0,1), got {self.dropout}")
        if self.patience < 0:
            raise BaselineError("patience must be >= 0")


def init_params(feature_dim: int, cfg: TrainConfig, rng: np.random.Generator) -> ScorerParams:
    in_dim = 2 * feature_dim + cfg.time_dim
    z = cfg.encode_dim
    h = cfg.hidden_dim
    def glorot(shape):
        fan = sum(shape) if len(shape) > 1 else shape[0] + 1
        return rng.normal(0.0, np.sqrt(2.0 / fan), size=shape)
    return ScorerParams(
        w_enc=glorot((z, in_dim)),
        b_enc=np.zeros(z),
        w1=glorot((h, 2 * z)),
        b1=np.zeros(h),
        w2=glorot((h,)),
        b2=0.0,
        time_dim=cfg.time_dim,
    )


def _node_input(node, t, features: NodeFeatureTable, neighbors, pad_count, time_dim):
    """Raw encoder input: [own feature, neighbor mean with zero pads, time encoding]."""
    own = features.reduced[node]
    k = own.shape[0]
    if neighbors:
        nbr_sum = np.zeros(k)
        for n_i, _ in neighbors:
            nbr_sum += features.reduced[n_i]
        nbr_mean = nbr_sum / (len(neighbors) + pad_count)   # pads are null embeddings
        mean_gap = float(np.mean([t - t_i for _, t_i in neighbors]))
    else:
        nbr_mean = np.zeros(k)
        mean_gap = 0.0
    tvec = sinusoidal_encoding(mean_gap, time_dim)
    return np.concatenate([own, nbr_mean, tvec])


def encode_node(node, t: int, features: NodeFeatureTable, neighbors, pad_count: int,
                params: ScorerParams) -> np.ndarray:
    """Deterministic node embedding from the sampled neighborhood."""
    x = _node_input(node, t, features, neighbors, pad_count, params.time_dim)
    if x.shape[0] != params.w_enc.shape[1]:
        raise BaselineError(
            f"encoder input dim {x.shape[0]} != expected {params.w_enc.shape[1]}")
    return params.w_enc @ x + params.b_enc


def _sigmoid(a):
    out = np.empty_like(a, dtype=np.float64)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


def _forward(params: ScorerParams, Xu, Xv, dropout_mask=None, keep_prob=1.0):
    """Batch forward pass; returns probabilities and the backprop cache."""
    Zu = Xu @ params.w_enc.T + params.b_enc
    Zv = Xv @ params.w_enc.T + params.b_enc
    H_in = np.concatenate([Zu, Zv], axis=1)
    A1 = H_in @ params.w1.T + params.b1
    R = np.maximum(A1, 0.0) if params.activation == "relu" else A1
    if dropout_mask is not None:
        Rd = R * dropout_mask / keep_prob
    else:
        Rd = R
    A2 = Rd @ params.w2 + params.b2
    P = _sigmoid(A2)
    cache = (Xu, Xv, H_in, A1, R, Rd, A2)
    return P, cache


def score_pair(params: ScorerParams, z_u: np.ndarray, z_v: np.ndarray) -> float:
    """Head probability for a pre-encoded (source, destination) pair."""
    params.check_finite()
    h_in = np.concatenate([z_u, z_v])
    a1 = params.w1 @ h_in + params.b1
    r = np.maximum(a1, 0.0) if params.activation == "relu" else a1
    a2 = float(params.w2 @ r + params.b2)
    if not np.isfinite(a2):
        raise BaselineError("non-finite head activation")
    return float(_sigmoid(np.array([a2]))[0])


def _bce_loss_and_grads(params: ScorerParams, Xu, Xv, y, dropout_mask=None, keep_prob=1.0):
    """Mean binary cross-entropy and analytic gradients for every parameter."""
    B = Xu.shape[0]
    P, (Xu, Xv, H_in, A1, R, Rd, A2) = _forward(params, Xu, Xv, dropout_mask, keep_prob)
    # log-loss via logits: softplus(a) - y*a is stable for both signs
    loss = float(np.mean(np.logaddexp(0.0, A2) - y * A2))
    dA2 = (P - y) / B
    g_w2 = Rd.T @ dA2
    g_b2 = float(dA2.sum())
    dRd = np.outer(dA2, params.w2)
    dR = dRd * dropout_mask / keep_prob if dropout_mask is not None else dRd
    dA1 = dR * (A1 > 0) if params.activation == "relu" else dR
    g_w1 = dA1.T @ H_in
    g_b1 = dA1.sum(axis=0)
    dH = dA1 @ params.w1
    z = params.w_enc.shape[0]
    dZu, dZv = dH[:, :z], dH[:, z:]
    g_w_enc = dZu.T @ Xu + dZv.T @ Xv
    g_b_enc = dZu.sum(axis=0) + dZv.sum(axis=0)
    grads = {"w_enc": g_w_enc, "b_enc": g_b_enc, "w1": g_w1, "b1": g_b1, "w2": g_w2}
    return loss, grads, g_b2


class NeuralScorer:
    """Frozen-parameter scorer implementing the harness protocol."""

    def __init__(self, params: ScorerParams, features: NodeFeatureTable,
                 sampler_cfg: SamplerConfig):
        self.params = params
        self.features = features
        self.sampler_cfg = sampler_cfg
        self.index = NeighborIndex()

    def observe(self, events) -> None:
        self.index.add_events(events)

    def node_input(self, node, t: int, rng: np.random.Generator) -> np.ndarray:
        history = self.index.history_before(node, t)
        neighbors, pad = sample_neighbors(node, t, history, self.sampler_cfg, rng)
        return _node_input(node, t, self.features, neighbors, pad, self.params.time_dim)

    def score_batch(self, pairs, t: int, rng: np.random.Generator) -> np.ndarray:
        if not pairs:
            return np.zeros(0)
        Xu = np.vstack([self.node_input(u, t, rng) for u, _ in pairs])
        Xv = np.vstack([self.node_input(v, t, rng) for _, v in pairs])
        P, _ = _forward(self.params, Xu, Xv)
        if not np.all(np.isfinite(P)):
            raise BaselineError("non-finite scores")
        return P


# ---------------------------------------------------------------------------
# Training


class _Adam:
    """Standard adaptive-moment optimizer (decay 0.9/0.999, eps 1e-8)."""

    def __init__(self, lr: float):
        self.lr = lr
        self.beta1, self.beta2, self.eps = 0.9, 0.999, 1e-8
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: ScorerParams, grads: dict[str, np.ndarray], g_b2: float) -> None:
        self.t += 1
        grads = dict(grads)
        grads["b2"] = np.array([g_b2])
        arrays = params.arrays()
        arrays["b2"] = np.array([params.b2])
        for name, g in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g * g
            m_hat = self.m[name] / (1 - self.beta1 ** self.t)
            v_hat = self.v[name] / (1 - self.beta2 ** self.t)
            arrays[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        params.b2 = float(arrays["b2"][0])


@dataclass
class TrainResult:
    params: ScorerParams
    log: list[dict]
    best_epoch: int
    best_val_ap: float


def _epoch_batches(events, batch_size):
    for i in range(0, len(events), batch_size):
        yield i // batch_size, events[i:i + batch_size]


def train(graph, manifest, features: NodeFeatureTable, cfg: TrainConfig,
          sampler_cfg: SamplerConfig, pools=None) -> TrainResult:
    """Fit the scoring head on the train split, selecting on validation AP.

    Chronological batches, one sampled negative per positive, binary
    cross-entropy, adaptive-moment updates. Early stopping: training halts
    once the epochs since the best validation AP reach ``patience``.
    Deterministic given (cfg.seed, sampler_cfg): per-batch generators are
    keyed by (seed, epoch, batch) for training and (seed, batch) for the
    fixed validation negatives.
    """
    from .evaluation import average_precision  # local import, avoids cycle
    from .graph import split as split_events
    from .sampling import build_pools, sample_negatives

    train_ev, val_ev, test_ev = split_events(graph, manifest)
    if not train_ev or not val_ev:
        raise BaselineError("train and val streams must be nonempty")
    if pools is None:
        pools = build_pools(graph.vertices, train_ev, val_ev, test_ev)

    feature_dim = features.reduced_dim
    rng_init = batch_rng(cfg.seed, 0xA110C)
    params = init_params(feature_dim, cfg, rng_init)
    optimizer = _Adam(cfg.learning_rate)
    keep_prob = 1.0 - cfg.dropout

    scorer = NeuralScorer(params, features, sampler_cfg)
    scorer.observe(graph.events_before(train_ev[0].year))
    # Pre-build per-event histories once: the index grows year by year.
    train_years = sorted({e.year for e in train_ev})
    events_by_year = {y: [e for e in train_ev if e.year == y] for y in train_years}

    def training_inputs(epoch: int):
        """Encode one epoch's batches; histories advance with the years."""
        scorer.index = NeighborIndex()
        scorer.observe(graph.events_before(train_ev[0].year))
        batch_no = 0
        for y in train_years:
            for _, batch in _epoch_batches(events_by_year[y], cfg.batch_size):
                rng = batch_rng(cfg.seed, 1, epoch, batch_no)
                pos_pairs = [(e.u, e.v) for e in batch]
                negs = []
                for e in batch:
                    negs.extend(sample_negatives((e.u, e.v, e.year), pools, sampler_cfg, rng))
                all_pairs = pos_pairs + [(u, v) for u, v, _ in negs]
                Xu = np.vstack([scorer.node_input(u, y, rng) for u, _ in all_pairs])
                Xv = np.vstack([scorer.node_input(v, y, rng) for _, v in all_pairs])
                yvec = np.concatenate([np.ones(len(pos_pairs)), np.zeros(len(negs))])
                mask = (rng.random((len(all_pairs), cfg.hidden_dim)) < keep_prob).astype(
                    np.float64) if cfg.dropout > 0 else None
                yield Xu, Xv, yvec, mask
                batch_no += 1
            scorer.observe(events_by_year[y])

    def val_ap() -> float:
        vs = NeuralScorer(params, features, sampler_cfg)
        vs.observe(graph.events_before(val_ev[0].year))
        aps = []
        batch_no = 0
        val_years = sorted({e.year for e in val_ev})
        by_year = {y: [e for e in val_ev if e.year == y] for y in val_years}
        for y in val_years:
            for _, batch in _epoch_batches(by_year[y], cfg.batch_size):
                rng = batch_rng(cfg.seed, 2, batch_no)
                pos = [(e.u, e.v) for e in batch]
                negs = []
                for e in batch:
                    negs.extend(sample_negatives((e.u, e.v, e.year), pools, sampler_cfg, rng))
                pairs = pos + [(u, v) for u, v, _ in negs]
                scores = vs.score_batch(pairs, y, rng)
                labels = np.concatenate([np.ones(len(pos)), np.zeros(len(negs))])
                aps.append(average_precision(scores, labels))
                batch_no += 1
            vs.observe(by_year[y])
        return float(np.mean(aps))

    log: list[dict] = []
    best = {"ap": -np.inf, "epoch": 0, "params": copy.deepcopy(params)}
    stale = 0
    for epoch in range(1, cfg.max_epochs + 1):
        losses = []
        for Xu, Xv, yvec, mask in training_inputs(epoch):
            loss, grads, g_b2 = _bce_loss_and_grads(params, Xu, Xv, yvec, mask, keep_prob)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch} (lr={cfg.learning_rate}); "
                    "lower the learning rate or check the feature table")
            optimizer.step(params, grads, g_b2)
            losses.append(loss)
        ap = val_ap()
        log.append({"epoch": epoch, "loss": float(np.mean(losses)), "val_ap": ap})
        if ap > best["ap"]:
            best = {"ap": ap, "epoch": epoch, "params": copy.deepcopy(params)}
            stale = 0
        else:
            stale += 1
        if stale >= cfg.patience:
            break
    return TrainResult(params=best["params"], log=log,
                       best_epoch=best["epoch"], best_val_ap=best["ap"])


def write_training_log(log, path, meta: dict | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if meta:
            for k, v in meta.items():
                fh.write(f"# {k}={v}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss", "val_ap"])
        for row in log:
            writer.writerow([row["epoch"], f"{row['loss']:.17g}", f"{row['val_ap']:.17g}"])


# ---------------------------------------------------------------------------
# Numerical verification


def gradient_check(params: ScorerParams, minibatch, n_coords: int = 50,
                   step: float = 1e-5, rng: np.random.Generator | None = None) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``minibatch`` is (Xu, Xv, y) in encoder-input space. A random subset of
    coordinates across every parameter array is probed; near-zero pairs are
    guarded by a 1e-8 absolute floor so dead units report as passing.
    """
    Xu, Xv, y = minibatch
    if Xu.shape[0] == 0:
        raise BaselineError("gradient check needs a nonempty minibatch")
    if rng is None:
        rng = np.random.default_rng(0)
    _, grads, g_b2 = _bce_loss_and_grads(params, Xu, Xv, y)
    flat: list[tuple[str, int, float]] = []
    for name, g in grads.items():
        for i in range(g.size):
            flat.append((name, i, float(g.flat[i])))
    flat.append(("b2", 0, g_b2))
    probe_idx = rng.permutation(len(flat))[:n_coords]
    arrays = params.arrays()

    def loss_at() -> float:
        loss, _, _ = _bce_loss_and_grads(params, Xu, Xv, y)
        return loss

    max_rel = 0.0
    for pi in probe_idx:
        name, i, analytic = flat[pi]
        if name == "b2":
            orig = params.b2
            params.b2 = orig + step
            lp = loss_at()
            params.b2 = orig - step
            lm = loss_at()
            params.b2 = orig
        else:
            arr = arrays[name]
            orig = arr.flat[i]
            arr.flat[i] = orig + step
            lp = loss_at()
            arr.flat[i] = orig - step
            lm = loss_at()
            arr.flat[i] = orig
        numeric = (lp - lm) / (2 * step)
        denom = max(abs(analytic), abs(numeric), 1e-8)
        max_rel = max(max_rel, abs(analytic - numeric) / denom)
    return max_rel


# ---------------------------------------------------------------------------
# Checkpoints

CHECKPOINT_VERSION = 1


def save_checkpoint(path, params: ScorerParams, train_cfg: TrainConfig,
                    sampler_cfg: SamplerConfig, meta: dict | None = None) -> None:
    import json
    from dataclasses import asdict

    blob = {
        "format_version": CHECKPOINT_VERSION,
        "params": {
            "w_enc": params.w_enc.tolist(),
            "b_enc": params.b_enc.tolist(),
            "w1": params.w1.tolist(),
            "b1": params.b1.tolist(),
            "w2": params.w2.tolist(),
            "b2": params.b2,
            "time_dim": params.time_dim,
            "activation": params.activation,
        },
        "train_config": asdict(train_cfg),
        "sampler_config": asdict(sampler_cfg),
        "meta": meta or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path):
    import json

    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("format_version") != CHECKPOINT_VERSION:
        raise BaselineError(f"unsupported checkpoint version {blob.get('format_version')}")
    p = blob["params"]
    params = ScorerParams(
        w_enc=np.asarray(p["w_enc"], dtype=np.float64),
        b_enc=np.asarray(p["b_enc"], dtype=np.float64),
        w1=np.asarray(p["w1"], dtype=np.float64),
        b1=np.asarray(p["b1"], dtype=np.float64),
        w2=np.asarray(p["w2"], dtype=np.float64),
        b2=float(p["b2"]),
        time_dim=int(p["time_dim"]),
        activation=p.get("activation", "relu"),
    )
    params.check_finite()
    train_cfg = TrainConfig(**blob["train_config"])
    sampler_cfg = SamplerConfig(**blob["sampler_config"])
    return params, train_cfg, sampler_cfg, blob.get("meta", {})
