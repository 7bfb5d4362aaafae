"""Ranking metrics and the chronological evaluation harness.

AP follows the threshold-sum definition (precision weighted by recall
increments over distinct score thresholds, ties grouped at one threshold);
AUC-ROC is the rank statistic counting concordant positive/negative pairs
with ties worth one half. Both are invariant under strictly monotone score
transformations.

evaluate() walks the split stream year by year, forms batches of positives
within each year, samples one corrupted destination per positive (per the
configured regime), and lets the scorer see an event only after the year
it belongs to has been fully scored, so scorer inputs never leak.
"""

import json
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, TemporalGraph
from .sampling import NegativePools, SamplerConfig, batch_rng, sample_negatives

__all__ = [
    "EvaluationError",
    "ScoredBatch",
    "EvalReport",
    "average_precision",
    "auc_roc",
    "evaluate",
    "merge_reports",
    "rank_emerging",
    "emerging_candidates",
    "write_ranked_pairs",
]


class EvaluationError(Exception):
    pass


@dataclass
class ScoredBatch:
    year: int
    scores: np.ndarray
    labels: np.ndarray
    regime: str


def _coerce(batch_or_scores, labels):
    if labels is None:
        b = batch_or_scores
        return np.asarray(b.scores, dtype=np.float64), np.asarray(b.labels)
    return (np.asarray(batch_or_scores, dtype=np.float64), np.asarray(labels))


def average_precision(batch_or_scores, labels=None) -> float:
    """Threshold-sum AP: sum over distinct thresholds of P_n * (R_n - R_{n-1})."""
    scores, y = _coerce(batch_or_scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise EvaluationError("average precision undefined without positives")
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    y_sorted = y[order]
    # indices where a threshold group ends (last occurrence of each score)
    boundary = np.nonzero(np.diff(s_sorted))[0]
    ends = np.append(boundary, len(s_sorted) - 1)
    tp = np.cumsum(y_sorted)[ends]
    pred = ends + 1.0
    precision = tp / pred
    recall = tp / n_pos
    r_prev = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - r_prev) * precision))


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, ties receiving the mean of their rank span."""
    order = np.argsort(scores, kind="stable")
    sorted_scores = scores[order]
    ranks = np.empty(len(scores), dtype=np.float64)
    i = 0
    while i < len(sorted_scores):
        j = i
        while j + 1 < len(sorted_scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc_roc(batch_or_scores, labels=None) -> float:
    """Probability a random positive outranks a random negative (ties half)."""
    scores, y = _coerce(batch_or_scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("AUC-ROC undefined for a single-class batch")
    ranks = _average_ranks(scores)
    pos_rank_sum = float(ranks[y == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass
class RegimeReport:
    regime: str
    ap_mean_over_years: float
    auc_mean_over_years: float
    ap_mean_over_batches: float
    auc_mean_over_batches: float
    per_year: dict[int, dict]
    batch_count: int

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            # hierarchical: mean over batches within a year, then over years
            "ap_mean_over_years": self.ap_mean_over_years,
            "auc_mean_over_years": self.auc_mean_over_years,
            # flat: unweighted mean over all batches
            "ap_mean_over_batches": self.ap_mean_over_batches,
            "auc_mean_over_batches": self.auc_mean_over_batches,
            "per_year": {str(y): d for y, d in sorted(self.per_year.items())},
            "batch_count": self.batch_count,
        }


@dataclass
class EvalReport:
    regimes: dict[str, RegimeReport]

    def to_dict(self) -> dict:
        return {"regimes": {r: rep.to_dict() for r, rep in sorted(self.regimes.items())}}

    def to_json(self, meta: dict | None = None) -> str:
        blob = self.to_dict()
        if meta:
            blob["meta"] = meta
        return json.dumps(blob, indent=1, sort_keys=True) + "\n"

    def table(self) -> str:
        lines = [f"{'regime':<12} {'AP(year)':>9} {'AUC(year)':>9} "
                 f"{'AP(batch)':>9} {'AUC(batch)':>10} {'batches':>8}"]
        for name, rep in sorted(self.regimes.items()):
            lines.append(
                f"{name:<12} {rep.ap_mean_over_years:>9.4f} {rep.auc_mean_over_years:>9.4f} "
                f"{rep.ap_mean_over_batches:>9.4f} {rep.auc_mean_over_batches:>10.4f} "
                f"{rep.batch_count:>8d}")
        return "\n".join(lines) + "\n"


def evaluate(scorer, graph: TemporalGraph, events, pools: NegativePools,
             cfg: SamplerConfig, batch_size: int = 300, audit=None) -> EvalReport:
    """Score a split stream under one sampling regime.

    The scorer is warmed with every graph event strictly before the first
    evaluated year, then observes each year only after its batches are
    scored. Batches are chronological within a year (never straddling), one
    negative set per positive per the regime, per-batch generators keyed by
    (cfg.seed, global batch index). ``audit``, if given, is a callable
    receiving (u, v', t, origin) for every sampled negative.
    """
    events = list(events)
    if not events:
        raise EvaluationError("empty evaluation stream")
    years = sorted({e.year for e in events})
    scorer.observe(graph.events_before(years[0]))

    per_year: dict[int, dict] = {}
    all_ap: list[float] = []
    all_auc: list[float] = []
    global_batch = 0
    for t in years:
        positives = [e for e in events if e.year == t]
        year_ap: list[float] = []
        year_auc: list[float] = []
        for i in range(0, len(positives), batch_size):
            batch = positives[i:i + batch_size]
            rng = batch_rng(cfg.seed, global_batch)
            negs = []
            for e in batch:
                for u, v, tt, origin in sample_negatives(
                        (e.u, e.v, t), pools, cfg, rng, with_sources=True):
                    negs.append((u, v))
                    if audit is not None:
                        audit(u, v, tt, origin)
            pairs = [(e.u, e.v) for e in batch] + negs
            scores = np.asarray(scorer.score_batch(pairs, t, rng), dtype=np.float64)
            labels = np.concatenate([np.ones(len(batch)), np.zeros(len(negs))])
            sb = ScoredBatch(year=t, scores=scores, labels=labels, regime=cfg.regime)
            year_ap.append(average_precision(sb))
            year_auc.append(auc_roc(sb))
            global_batch += 1
        per_year[t] = {
            "ap": float(np.mean(year_ap)),
            "auc": float(np.mean(year_auc)),
            "batches": len(year_ap),
        }
        all_ap.extend(year_ap)
        all_auc.extend(year_auc)
        scorer.observe(graph.events_for_year(t))

    rep = RegimeReport(
        regime=cfg.regime,
        ap_mean_over_years=float(np.mean([d["ap"] for d in per_year.values()])),
        auc_mean_over_years=float(np.mean([d["auc"] for d in per_year.values()])),
        ap_mean_over_batches=float(np.mean(all_ap)),
        auc_mean_over_batches=float(np.mean(all_auc)),
        per_year=per_year,
        batch_count=global_batch,
    )
    return EvalReport(regimes={cfg.regime: rep})


def merge_reports(reports) -> EvalReport:
    merged: dict[str, RegimeReport] = {}
    for r in reports:
        merged.update(r.regimes)
    return EvalReport(regimes=merged)


def emerging_candidates(graph: TemporalGraph, t: int, budget: int | None = None):
    """Unordered pairs never observed by year ``t``, in (u, v) order.

    ``budget`` caps the enumeration (deterministic prefix) so the O(|V|^2)
    scan stays bounded on large vertex sets.
    """
    pair_years = graph.pair_years()
    seen_lt = {p for p, ys in pair_years.items() if ys[0] <= t}
    out = []
    verts = graph.vertices
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            pair = (verts[i], verts[j])
            if pair not in seen_lt:
                out.append(pair)
                if budget is not None and len(out) >= budget:
                    return out
    return out


def rank_emerging(scorer, graph: TemporalGraph, t: int, top_k: int,
                  budget: int | None = None, seed: int = 0):
    """Top-k never-linked pairs by score, descending, ties broken by (u, v).

    The scorer sees all events up to and including ``t`` and scores at
    t + 1, the first unobserved step.
    """
    if top_k <= 0:
        raise EvaluationError(f"top_k must be positive, got {top_k}")
    if not (graph.horizon[0] <= t <= graph.horizon[1]):
        raise GraphError(f"year {t} outside horizon {graph.horizon}")
    candidates = emerging_candidates(graph, t, budget)
    if not candidates:
        return []
    scorer.observe(graph.events_before(t + 1))
    rng = batch_rng(seed, 0xEE)
    scores = np.asarray(scorer.score_batch(candidates, t + 1, rng), dtype=np.float64)
    order = sorted(range(len(candidates)), key=lambda i: (-scores[i], candidates[i]))
    return [(candidates[i][0], candidates[i][1], float(scores[i])) for i in order[:top_k]]


def write_ranked_pairs(rows, path, meta: dict | None = None) -> None:
    """CSV ``rank,u,v,score`` for rank_emerging output."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        if meta:
            for k, v in meta.items():
                fh.write(f"# {k}={v}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "u", "v", "score"])
        for rank, (u, v, score) in enumerate(rows, start=1):
            writer.writerow([rank, u, v, f"{score:.17g}"])
