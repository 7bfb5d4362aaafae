"""Negative sampling regimes and temporal neighbor samplers.

Negatives corrupt the destination only, keeping the positive's source and
timestamp. Three regimes of increasing difficulty:

  random      v' uniform over V \\ {v}
  historical  (u,v') drawn from train-split pairs that are inactive at t
  inductive   (u,v') drawn from test-only pairs that are inactive at t

When a regime pool cannot supply enough candidates for a positive, the
remainder is filled from the random pool, so metric computation always
sees a full negative set. All draws are deterministic given a seeded
generator; parallel evaluation derives one generator per batch from
(seed, batch index).
"""

import bisect
from dataclasses import dataclass, field

import numpy as np

from .graph import canonical_pair

__all__ = [
    "SamplingError",
    "SamplerConfig",
    "NegativePools",
    "build_pools",
    "sample_negatives",
    "sample_neighbors",
    "NeighborIndex",
    "batch_rng",
]

REGIMES = ("random", "historical", "inductive")
NEIGHBOR_STRATEGIES = ("uniform", "recent", "time_aware")


class SamplingError(Exception):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    regime: str = "random"
    negatives_per_positive: int = 1
    seed: int = 0
    neighbor_strategy: str = "recent"
    S: int = 20
    alpha: float = 1e-6

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise SamplingError(f"unknown regime {self.regime!r}")
        if self.neighbor_strategy not in NEIGHBOR_STRATEGIES:
            raise SamplingError(f"unknown neighbor strategy {self.neighbor_strategy!r}")
        if self.S < 1:
            raise SamplingError(f"S must be >= 1, got {self.S}")
        if self.negatives_per_positive < 1:
            raise SamplingError("negatives_per_positive must be >= 1")
        if self.neighbor_strategy == "time_aware" and self.alpha < 0:
            raise SamplingError(f"alpha must be >= 0 for time_aware, got {self.alpha}")


@dataclass
class NegativePools:
    """Candidate pools derived from the split streams.

    train_edges / test_only_edges are sets of canonical pairs;
    active_by_year holds E_t for every year covered by the splits.
    Per-source partner lists are precomputed for O(deg) regime draws.
    """

    vertices: tuple[str, ...]
    train_edges: frozenset[tuple[str, str]]
    test_only_edges: frozenset[tuple[str, str]]
    active_by_year: dict[int, frozenset[tuple[str, str]]]
    train_partners: dict[str, tuple[str, ...]] = field(default_factory=dict)
    test_only_partners: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.train_partners:
            self.train_partners = _partner_lists(self.train_edges)
        if not self.test_only_partners:
            self.test_only_partners = _partner_lists(self.test_only_edges)


def _partner_lists(pairs) -> dict[str, tuple[str, ...]]:
    acc: dict[str, set[str]] = {}
    for u, v in pairs:
        acc.setdefault(u, set()).add(v)
        acc.setdefault(v, set()).add(u)
    return {node: tuple(sorted(ps)) for node, ps in acc.items()}


def build_pools(vertices, train_events, val_events, test_events) -> NegativePools:
    train_pairs = frozenset(e.pair for e in train_events)
    test_pairs = frozenset(e.pair for e in test_events)
    active: dict[int, set[tuple[str, str]]] = {}
    for e in list(train_events) + list(val_events) + list(test_events):
        active.setdefault(e.year, set()).add(e.pair)
    return NegativePools(
        vertices=tuple(sorted(vertices)),
        train_edges=train_pairs,
        test_only_edges=test_pairs - train_pairs,
        active_by_year={y: frozenset(p) for y, p in active.items()},
    )


def _draw_uniform_index(rng: np.random.Generator, n: int) -> int:
    return int(rng.integers(n))


def _random_destination(u, v, t, pools, rng, taken) -> str:
    """Uniform draw from V \\ {v}, rejecting already-taken destinations."""
    verts = pools.vertices
    if len(verts) < 2:
        raise SamplingError("vertex set too small to sample a negative")
    v_idx = bisect.bisect_left(verts, v)
    has_v = v_idx < len(verts) and verts[v_idx] == v
    n = len(verts) - (1 if has_v else 0)
    if n <= len(taken):
        raise SamplingError("exhausted random pool for one positive")
    while True:
        i = _draw_uniform_index(rng, n)
        if has_v and i >= v_idx:
            i += 1
        cand = verts[i]
        if cand not in taken:
            return cand


def sample_negatives(positive, pools: NegativePools, cfg: SamplerConfig,
                     rng: np.random.Generator, with_sources: bool = False):
    """Corrupted destinations for one positive (u, v, t).

    Returns ``negatives_per_positive`` triples (u, v', t), distinct within
    this positive's slot and never equal to the positive pair. With
    ``with_sources`` each item is (u, v', t, origin) where origin is the
    regime name or "fallback".
    """
    u, v, t = positive
    need = cfg.negatives_per_positive
    out = []
    taken: set[str] = set()
    active = pools.active_by_year.get(t, frozenset())

    if cfg.regime in ("historical", "inductive"):
        partners = (pools.train_partners if cfg.regime == "historical"
                    else pools.test_only_partners).get(u, ())
        candidates = [p for p in partners
                      if p != v and canonical_pair(u, p) not in active]
        take = min(need, len(candidates))
        for _ in range(take):
            remaining = [c for c in candidates if c not in taken]
            pick = remaining[_draw_uniform_index(rng, len(remaining))]
            taken.add(pick)
            out.append((u, pick, t, cfg.regime))

    while len(out) < need:
        origin = "fallback" if cfg.regime != "random" else "random"
        pick = _random_destination(u, v, t, pools, rng, taken)
        taken.add(pick)
        out.append((u, pick, t, origin))

    if with_sources:
        return out
    return [(a, b, c) for a, b, c, _ in out]


def _stable_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    w = np.exp(shifted)
    return w / w.sum()


def sample_neighbors(node, t: int, history, cfg: SamplerConfig, rng: np.random.Generator):
    """Select up to S past interactions of ``node`` strictly before ``t``.

    history is an iterable of (neighbor, t_i); any t_i >= t is temporal
    leakage and raises. Returns (selected, pad_count) where selected is a
    list of (neighbor, t_i) and pad_count = S - len(selected) slots that
    the caller must fill with the null embedding.

      uniform     S draws without replacement, equal probability
      recent      the S largest t_i, deterministic (ties by neighbor id)
      time_aware  without replacement, P(i) ~ exp(-alpha * (t - t_i))
    """
    events = sorted(history, key=lambda e: (e[1], e[0]))
    for n_i, t_i in events:
        if t_i >= t:
            raise SamplingError(f"temporal leakage: interaction ({n_i},{t_i}) not before t={t}")
    S = cfg.S
    M = len(events)
    if M <= S:
        return list(events), S - M

    if cfg.neighbor_strategy == "recent":
        ordered = sorted(events, key=lambda e: (-e[1], e[0]))
        return ordered[:S], 0

    if cfg.neighbor_strategy == "uniform":
        idx = rng.permutation(M)[:S]
        return [events[i] for i in sorted(idx)], 0

    # time_aware: sequential draws with renormalization, stable exponents.
    gaps = np.array([t - t_i for _, t_i in events], dtype=np.float64)
    probs = _stable_softmax(-cfg.alpha * gaps)
    chosen: list[int] = []
    alive = list(range(M))
    p_alive = probs.copy()
    for _ in range(S):
        total = p_alive[alive].sum()
        r = rng.random() * total
        acc = 0.0
        pick_pos = len(alive) - 1
        for pos, i in enumerate(alive):
            acc += p_alive[i]
            if r < acc:
                pick_pos = pos
                break
        chosen.append(alive.pop(pick_pos))
    return [events[i] for i in sorted(chosen)], 0


class NeighborIndex:
    """Per-node interaction history ((neighbor, year) pairs, sorted by year).

    Feed events in chronological order via add_events; history_before(node, t)
    returns only interactions strictly before t.
    """

    def __init__(self):
        self._years: dict[str, list[int]] = {}
        self._neighbors: dict[str, list[str]] = {}
        self._max_year: int | None = None

    def add_events(self, events) -> None:
        for e in events:
            if self._max_year is not None and e.year < self._max_year:
                raise SamplingError("events must be added in nondecreasing year order")
            self._max_year = e.year
            for a, b in ((e.u, e.v), (e.v, e.u)):
                self._years.setdefault(a, []).append(e.year)
                self._neighbors.setdefault(a, []).append(b)

    def history_before(self, node, t: int) -> list[tuple[str, int]]:
        years = self._years.get(node)
        if not years:
            return []
        hi = bisect.bisect_left(years, t)
        nbrs = self._neighbors[node]
        return [(nbrs[i], years[i]) for i in range(hi)]


def batch_rng(seed: int, *stream) -> np.random.Generator:
    """Independent generator for one (seed, stream...) coordinate."""
    mask = 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng([int(seed) & mask, *(int(s) & mask for s in stream)])
