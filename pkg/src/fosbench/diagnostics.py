"""Dataset-characterization statistics for a temporal co-occurrence graph.

Three scalar edge-dynamics ratios summarize the stream:

  novelty     mean fraction of each year's edges appearing for the first time
  recurrence  |train pairs seen again in test| / |train pairs|
  surprise    |test pairs never seen in train| / |test pairs|

recurrence and surprise use different denominators, so they need not sum
to 1. The prose-style alternative (test-denominator recurrence) is also
reported. TEA tables count new vs repeated edges per year; TET tables
order every edge by (first, last) appearance with per-year presence flags
and a train-seen / test-only / other tag.

All statistics are pure functions of the event stream; ratios are always
in [0, 1] and degenerate cases serialize as null or the string "inf",
never NaN.
"""

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .graph import SplitManifest, TemporalGraph, split

__all__ = [
    "DiagnosticsError",
    "novelty",
    "recurrence_surprise",
    "tea_table",
    "tet_table",
    "node_stats",
    "edge_stats",
    "graph_stats",
    "temporal_stats",
    "DiagnosticsReport",
    "compute_report",
]


class DiagnosticsError(Exception):
    pass


def _pairs_by_year(g: TemporalGraph) -> dict[int, set]:
    out: dict[int, set] = {}
    for e in g.events:
        out.setdefault(e.year, set()).add(e.pair)
    return out


def _first_year(g: TemporalGraph) -> dict[tuple[str, str], int]:
    return {p: ys[0] for p, ys in g.pair_years().items()}


def novelty(g: TemporalGraph, manifest: SplitManifest | None = None) -> float:
    """Mean over years (beyond the first active year) of the new-edge fraction.

    First appearance is always judged against the full stream; ``manifest``
    restricts the averaged years to the manifest-covered span. Years with
    no edges are skipped.
    """
    by_year = _pairs_by_year(g)
    if len(by_year) < 2:
        raise DiagnosticsError("novelty needs at least two active years")
    first = _first_year(g)
    t0 = min(by_year)
    years = sorted(by_year)
    if manifest is not None:
        covered = set(manifest.train.years()) | set(manifest.val.years()) | set(manifest.test.years())
        years = [t for t in years if t in covered]
    ratios = []
    for t in years:
        if t == t0:
            continue
        pairs = by_year[t]
        new = sum(1 for p in pairs if first[p] == t)
        ratios.append(new / len(pairs))
    if not ratios:
        raise DiagnosticsError("no years beyond the first to average over")
    return float(np.mean(ratios))


def recurrence_surprise(train_events, test_events) -> tuple[float, float]:
    """(recurrence, surprise) over unordered pair sets of the two streams."""
    train_pairs = {e.pair for e in train_events}
    test_pairs = {e.pair for e in test_events}
    if not train_pairs or not test_pairs:
        raise DiagnosticsError("recurrence/surprise need nonempty train and test streams")
    recurrence = len(train_pairs & test_pairs) / len(train_pairs)
    surprise = len(test_pairs - train_pairs) / len(test_pairs)
    return recurrence, surprise


def recurrence_test_denominator(train_events, test_events) -> float:
    """Alternative reading: fraction of test pairs that reappear from train."""
    train_pairs = {e.pair for e in train_events}
    test_pairs = {e.pair for e in test_events}
    if not test_pairs:
        raise DiagnosticsError("empty test stream")
    return len(train_pairs & test_pairs) / len(test_pairs)


def tea_table(g: TemporalGraph) -> list[dict]:
    """Per-year counts of first-time vs repeated edges; new+repeated = |E_t|."""
    by_year = _pairs_by_year(g)
    first = _first_year(g)
    rows = []
    for t in sorted(by_year):
        pairs = by_year[t]
        new = sum(1 for p in pairs if first[p] == t)
        rows.append({"year": t, "new_edges": new, "repeated_edges": len(pairs) - new})
    return rows


def tet_table(g: TemporalGraph, manifest: SplitManifest) -> list[dict]:
    """One row per distinct edge, ordered by (first, last, u, v).

    Each row carries the pair, first/last appearance, the sorted presence
    years, and a category: train_seen, test_only, or other (val-only).
    """
    train_ev, _, test_ev = split(g, manifest)
    train_pairs = {e.pair for e in train_ev}
    test_pairs = {e.pair for e in test_ev}
    rows = []
    for pair, years in g.pair_years().items():
        if pair in train_pairs:
            category = "train_seen"
        elif pair in test_pairs:
            category = "test_only"
        else:
            category = "other"
        rows.append({
            "u": pair[0], "v": pair[1],
            "first_year": years[0], "last_year": years[-1],
            "years_present": list(years),
            "category": category,
        })
    rows.sort(key=lambda r: (r["first_year"], r["last_year"], r["u"], r["v"]))
    return rows


# ---------------------------------------------------------------------------
# Yearly snapshot helpers


def _snapshot_adjacency(pairs) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {}
    for u, v in pairs:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def _local_clustering(adj: dict[str, set[str]], node: str) -> float:
    nbrs = adj[node]
    k = len(nbrs)
    if k < 2:
        return 0.0
    links = 0
    nbr_list = sorted(nbrs)
    for i, a in enumerate(nbr_list):
        for b in nbr_list[i + 1:]:
            if b in adj[a]:
                links += 1
    return 2.0 * links / (k * (k - 1))


def node_stats(g: TemporalGraph) -> dict:
    """Per-year activity series plus persistence/recency distributions."""
    by_year = _pairs_by_year(g)
    years = sorted(by_year)
    series = []
    prev_deg: dict[str, int] = {}
    first_active: dict[str, int] = {}
    last_active: dict[str, int] = {}
    for t in years:
        adj = _snapshot_adjacency(by_year[t])
        active = sorted(adj)
        for v in active:
            first_active.setdefault(v, t)
            last_active[v] = t
        degs = {v: len(adj[v]) for v in active}
        mean_degree = float(np.mean([degs[v] for v in active]))
        union = set(degs) | set(prev_deg)
        growth = (float(np.mean([degs.get(v, 0) - prev_deg.get(v, 0) for v in sorted(union)]))
                  if prev_deg else None)
        clustering = [_local_clustering(adj, v) for v in active]
        deg2 = [c for v, c in zip(active, clustering) if degs[v] >= 2]
        series.append({
            "year": t,
            "active_nodes": len(active),
            "mean_degree": mean_degree,
            "mean_degree_growth": growth,
            "mean_clustering": float(np.mean(clustering)),
            "mean_clustering_deg2_only": float(np.mean(deg2)) if deg2 else None,
        })
        prev_deg = degs
    persistence = Counter(last_active[v] - first_active[v] + 1 for v in first_active)
    recency = Counter(last_active.values())
    return {
        "series": series,
        "persistence_hist": sorted(persistence.items()),
        "last_active_hist": sorted(recency.items()),
    }


def edge_stats(g: TemporalGraph) -> dict:
    """Per-year edge count/density/repetition plus distribution tables."""
    by_year = _pairs_by_year(g)
    first = _first_year(g)
    n = len(g.vertices)
    max_pairs = n * (n - 1) / 2.0
    series = []
    for t in sorted(by_year):
        pairs = by_year[t]
        repeated = sum(1 for p in pairs if first[p] < t)
        series.append({
            "year": t,
            "edge_count": len(pairs),
            "density": len(pairs) / max_pairs if max_pairs else 0.0,
            "repetition_rate": repeated / len(pairs),
        })
    freq = Counter()
    lifetime_incl = Counter()
    lifetime_span = Counter()
    last_seen = Counter()
    interevent: Counter = Counter()
    for pair, ys in g.pair_years().items():
        freq[len(ys)] += 1
        lifetime_incl[ys[-1] - ys[0] + 1] += 1
        lifetime_span[ys[-1] - ys[0]] += 1
        last_seen[ys[-1]] += 1
        if len(ys) >= 2:
            gaps = [b - a for a, b in zip(ys, ys[1:])]
            interevent[float(np.mean(gaps))] += 1
    return {
        "series": series,
        "frequency_hist": sorted(freq.items()),
        "lifetime_hist": sorted(lifetime_incl.items()),       # headline: last-first+1
        "lifetime_span_hist": sorted(lifetime_span.items()),  # alternative: last-first
        "interevent_hist": sorted(interevent.items()),
        "last_appearance_hist": sorted(last_seen.items()),
    }


def _components(adj: dict[str, set[str]]) -> list[set[str]]:
    seen: set[str] = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in adj[node]:
                if nxt not in comp:
                    comp.add(nxt)
                    frontier.append(nxt)
        seen |= comp
        comps.append(comp)
    return comps


def _bfs_eccentricity(adj: dict[str, set[str]], source: str) -> tuple[int, str]:
    """(eccentricity, one farthest node) for a BFS from ``source``."""
    dist = {source: 0}
    frontier = [source]
    ecc, far = 0, source
    while frontier:
        nxt_frontier = []
        for node in frontier:
            for nxt in sorted(adj[node]):
                if nxt not in dist:
                    dist[nxt] = dist[node] + 1
                    if dist[nxt] > ecc:
                        ecc, far = dist[nxt], nxt
                    nxt_frontier.append(nxt)
        frontier = nxt_frontier
    return ecc, far


def graph_stats(g: TemporalGraph, exact_diameter_limit: int = 5000) -> list[dict]:
    """Per-year component structure and largest-component diameter.

    Above ``exact_diameter_limit`` active nodes the diameter is a
    double-sweep + strided-sample lower bound, flagged as an estimate.
    """
    by_year = _pairs_by_year(g)
    rows = []
    for t in sorted(by_year):
        adj = _snapshot_adjacency(by_year[t])
        if not adj:
            rows.append({"year": t, "components": 0, "largest_component": 0,
                         "diameter": None, "diameter_is_estimate": False})
            continue
        comps = _components(adj)
        largest = max(comps, key=len)
        sub = {v: adj[v] & largest for v in sorted(largest)}
        if len(largest) <= exact_diameter_limit:
            diameter = max(_bfs_eccentricity(sub, v)[0] for v in sub)
            estimate = False
        else:
            # double-sweep lower bound plus strided sample eccentricities
            nodes = sorted(largest)
            start = max(nodes, key=lambda v: len(sub[v]))
            ecc1, far = _bfs_eccentricity(sub, start)
            ecc2, _ = _bfs_eccentricity(sub, far)
            stride = max(1, len(nodes) // 64)
            diameter = max(ecc1, ecc2,
                           *(_bfs_eccentricity(sub, v)[0] for v in nodes[::stride]))
            estimate = True
        rows.append({"year": t, "components": len(comps),
                     "largest_component": len(largest),
                     "diameter": diameter, "diameter_is_estimate": estimate})
    return rows


def _assortativity(pairs, adj) -> float | None:
    """Pearson correlation of endpoint degrees over both edge orientations."""
    xs, ys = [], []
    for u, v in pairs:
        du, dv = len(adj[u]), len(adj[v])
        xs.extend((du, dv))
        ys.extend((dv, du))
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    sx, sy = x.std(), y.std()
    if sx == 0 or sy == 0:
        return None
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))


def temporal_stats(g: TemporalGraph) -> list[dict]:
    """Per-year degree assortativity and new-over-lost churn ratio.

    Churn with zero lost edges is the infinity sentinel (math.inf); 0/0 is
    null. Constant-degree snapshots have undefined assortativity (null).
    """
    by_year = _pairs_by_year(g)
    years = sorted(by_year)
    rows = []
    prev: set | None = None
    for t in years:
        pairs = by_year[t]
        adj = _snapshot_adjacency(pairs)
        assort = _assortativity(pairs, adj)
        churn: float | None
        if prev is None:
            churn = None
        else:
            new = len(pairs - prev)
            lost = len(prev - pairs)
            if lost == 0 and new == 0:
                churn = None
            elif lost == 0:
                churn = math.inf
            else:
                churn = new / lost
        rows.append({"year": t, "assortativity": assort, "churn_ratio": churn})
        prev = pairs
    return rows


# ---------------------------------------------------------------------------
# Report assembly and serialization


@dataclass
class DiagnosticsReport:
    novelty: float
    recurrence: float
    surprise: float
    recurrence_test_denominator: float
    tea: list[dict]
    tet: list[dict]
    node: dict
    edge: dict
    graph: list[dict]
    temporal: list[dict]
    meta: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "novelty": self.novelty,
            "recurrence": self.recurrence,
            "surprise": self.surprise,
            "recurrence_test_denominator": self.recurrence_test_denominator,
        }


def compute_report(g: TemporalGraph, manifest: SplitManifest,
                   meta: dict | None = None) -> DiagnosticsReport:
    if not g.events:
        raise DiagnosticsError("diagnostics need a nonempty graph")
    train_ev, _, test_ev = split(g, manifest)
    rec, sur = recurrence_surprise(train_ev, test_ev)
    return DiagnosticsReport(
        novelty=novelty(g, manifest),
        recurrence=rec,
        surprise=sur,
        recurrence_test_denominator=recurrence_test_denominator(train_ev, test_ev),
        tea=tea_table(g),
        tet=tet_table(g, manifest),
        node=node_stats(g),
        edge=edge_stats(g),
        graph=graph_stats(g),
        temporal=temporal_stats(g),
        meta=meta or {},
    )


def _cell(value) -> str:
    """CSV cell: None -> empty, inf -> 'inf', floats round-trip."""
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        if math.isnan(value):
            raise DiagnosticsError("refusing to serialize NaN")
        return f"{value:.17g}"
    return str(value)


def _write_csv(path, header, rows, meta=None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if meta:
            for k, v in meta.items():
                fh.write(f"# {k}={v}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(c) for c in row])


def write_report(report: DiagnosticsReport, out_dir) -> list[str]:
    """One CSV per statistic family plus a JSON summary; returns the paths."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = report.meta
    written = []

    def emit(name, header, rows):
        path = out / name
        _write_csv(path, header, rows, meta)
        written.append(str(path))

    emit("tea.csv", ["year", "new_edges", "repeated_edges"],
         [(r["year"], r["new_edges"], r["repeated_edges"]) for r in report.tea])
    tet_rows = []
    for rank, r in enumerate(report.tet):
        for y in r["years_present"]:
            tet_rows.append((rank, r["u"], r["v"], y, r["first_year"],
                             r["last_year"], r["category"]))
    emit("tet.csv", ["edge_rank", "u", "v", "year", "first_year", "last_year", "category"],
         tet_rows)
    emit("node_series.csv",
         ["year", "active_nodes", "mean_degree", "mean_degree_growth",
          "mean_clustering", "mean_clustering_deg2_only"],
         [(r["year"], r["active_nodes"], r["mean_degree"], r["mean_degree_growth"],
           r["mean_clustering"], r["mean_clustering_deg2_only"]) for r in report.node["series"]])
    emit("node_persistence_hist.csv", ["span_years", "node_count"],
         report.node["persistence_hist"])
    emit("node_last_active_hist.csv", ["year", "node_count"],
         report.node["last_active_hist"])
    emit("edge_series.csv", ["year", "edge_count", "density", "repetition_rate"],
         [(r["year"], r["edge_count"], r["density"], r["repetition_rate"])
          for r in report.edge["series"]])
    emit("edge_frequency_hist.csv", ["years_present", "edge_count"],
         report.edge["frequency_hist"])
    emit("edge_lifetime_hist.csv", ["lifetime_years", "edge_count"],
         report.edge["lifetime_hist"])
    emit("edge_lifetime_span_hist.csv", ["span_years", "edge_count"],
         report.edge["lifetime_span_hist"])
    emit("edge_interevent_hist.csv", ["mean_gap_years", "edge_count"],
         report.edge["interevent_hist"])
    emit("edge_last_appearance_hist.csv", ["year", "edge_count"],
         report.edge["last_appearance_hist"])
    emit("graph_series.csv",
         ["year", "components", "largest_component", "diameter", "diameter_is_estimate"],
         [(r["year"], r["components"], r["largest_component"], r["diameter"],
           r["diameter_is_estimate"]) for r in report.graph])
    emit("temporal_series.csv", ["year", "assortativity", "churn_ratio"],
         [(r["year"], r["assortativity"], r["churn_ratio"]) for r in report.temporal])

    summary_path = out / "summary.json"
    blob = {"meta": meta, **report.summary()}
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, indent=1, sort_keys=True)
        fh.write("\n")
    written.append(str(summary_path))
    return written
