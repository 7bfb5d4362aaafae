"""Yearly co-occurrence graph over a fixed vertex set.

Every publication contributes +1 to the weight of each unordered pair of
its fields for its publication year. Edges are canonically oriented
(u < v lexicographically) and the event list is sorted by (year, u, v),
which is also the on-disk CSV order. Adjacency views are computed on
demand from the event list rather than materialized.
"""

import bisect
import csv
import math
from dataclasses import dataclass

from .corpus import ConceptCatalog

__all__ = [
    "INFINITY",
    "GraphError",
    "EdgeEvent",
    "YearRange",
    "SplitManifest",
    "TemporalGraph",
    "Adjacency",
    "build",
    "binary_adjacency",
    "cumulative_adjacency",
    "first_observation",
    "split",
    "canonical_pair",
    "write_edge_stream",
    "read_edge_stream",
]

INFINITY = math.inf


class GraphError(Exception):
    pass


def canonical_pair(u: str, v: str) -> tuple[str, str]:
    if u == v:
        raise GraphError(f"self-pair {u!r}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class EdgeEvent:
    u: str
    v: str
    year: int
    weight: int

    def __post_init__(self):
        if self.u >= self.v:
            raise GraphError(f"event ({self.u},{self.v}) not canonically oriented")
        if self.weight < 1:
            raise GraphError(f"event ({self.u},{self.v},{self.year}) weight {self.weight} < 1")

    @property
    def pair(self) -> tuple[str, str]:
        return (self.u, self.v)


@dataclass(frozen=True)
class YearRange:
    """Inclusive contiguous year range."""

    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise GraphError(f"empty year range {self.start}..{self.end}")

    def __contains__(self, year: int) -> bool:
        return self.start <= year <= self.end

    def years(self) -> range:
        return range(self.start, self.end + 1)

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class SplitManifest:
    train: YearRange
    val: YearRange
    test: YearRange

    def __post_init__(self):
        if not (self.train.end < self.val.start and self.val.end < self.test.start):
            raise GraphError(
                "split ranges must be ordered and disjoint "
                f"(train ends {self.train.end}, val {self.val.start}..{self.val.end}, "
                f"test starts {self.test.start})"
            )

    @classmethod
    def from_dict(cls, d: dict) -> "SplitManifest":
        return cls(
            train=YearRange(*d["train"]),
            val=YearRange(*d["val"]),
            test=YearRange(*d["test"]),
        )

    def to_dict(self) -> dict:
        return {
            "train": [self.train.start, self.train.end],
            "val": [self.val.start, self.val.end],
            "test": [self.test.start, self.test.end],
        }


# Canonical split used by the reference benchmark configuration.
DEFAULT_MANIFEST = SplitManifest(
    train=YearRange(2002, 2017),
    val=YearRange(2018, 2021),
    test=YearRange(2022, 2024),
)


class Adjacency:
    """Symmetric 0/1 relation over a vertex tuple; zero diagonal by construction."""

    def __init__(self, vertices: tuple[str, ...], pairs: frozenset[tuple[str, str]]):
        self.vertices = vertices
        self.pairs = pairs

    def __call__(self, u: str, v: str) -> int:
        if u == v:
            return 0
        return 1 if canonical_pair(u, v) in self.pairs else 0

    def __len__(self) -> int:
        return len(self.pairs)

    def dense(self):
        """|V| x |V| uint8 matrix in vertex order. Intended for small V."""
        import numpy as np

        idx = {v: i for i, v in enumerate(self.vertices)}
        m = np.zeros((len(self.vertices), len(self.vertices)), dtype=np.uint8)
        for u, v in self.pairs:
            m[idx[u], idx[v]] = 1
            m[idx[v], idx[u]] = 1
        return m


class TemporalGraph:
    """Fixed vertex set + chronologically sorted co-occurrence events."""

    def __init__(self, vertices, horizon: tuple[int, int], events):
        self.vertices: tuple[str, ...] = tuple(sorted(set(vertices)))
        self.vertex_set: frozenset[str] = frozenset(self.vertices)
        self.horizon = (int(horizon[0]), int(horizon[1]))
        if self.horizon[0] > self.horizon[1]:
            raise GraphError(f"bad horizon {self.horizon}")
        vset = self.vertex_set
        events = sorted(events, key=lambda e: (e.year, e.u, e.v))
        seen: set[tuple[str, str, int]] = set()
        for e in events:
            if e.u not in vset or e.v not in vset:
                raise GraphError(f"event endpoint outside vertex set: ({e.u},{e.v})")
            if not (self.horizon[0] <= e.year <= self.horizon[1]):
                raise GraphError(f"event year {e.year} outside horizon {self.horizon}")
            key = (e.u, e.v, e.year)
            if key in seen:
                raise GraphError(f"duplicate event {key}")
            seen.add(key)
        self.events: tuple[EdgeEvent, ...] = tuple(events)
        self._event_years = [e.year for e in self.events]
        self._pair_years: dict[tuple[str, str], tuple[int, ...]] | None = None

    def __len__(self) -> int:
        return len(self.events)

    def events_for_year(self, t: int):
        lo = bisect.bisect_left(self._event_years, t)
        hi = bisect.bisect_right(self._event_years, t)
        return self.events[lo:hi]

    def events_before(self, t: int):
        hi = bisect.bisect_left(self._event_years, t)
        return self.events[:hi]

    def active_years(self) -> list[int]:
        return sorted({e.year for e in self.events})

    def pair_years(self) -> dict[tuple[str, str], tuple[int, ...]]:
        if self._pair_years is None:
            acc: dict[tuple[str, str], list[int]] = {}
            for e in self.events:
                acc.setdefault(e.pair, []).append(e.year)
            self._pair_years = {p: tuple(ys) for p, ys in acc.items()}
        return self._pair_years

    def _check_year(self, t: int) -> None:
        if not (self.horizon[0] <= t <= self.horizon[1]):
            raise GraphError(f"year {t} outside horizon {self.horizon}")


def build(works, catalog: ConceptCatalog, horizon: tuple[int, int]) -> TemporalGraph:
    """Aggregate per-paper field pairs into weighted yearly edge events.

    Every unordered pair of distinct fields on one paper adds 1 to that
    pair's weight for the paper's year. An empty corpus yields a valid
    graph with no events.
    """
    counts: dict[tuple[str, str, int], int] = {}
    for work in works:
        fields = sorted(work.field_ids)
        for i in range(len(fields)):
            for j in range(i + 1, len(fields)):
                key = (fields[i], fields[j], work.year)
                counts[key] = counts.get(key, 0) + 1
    events = [EdgeEvent(u=u, v=v, year=year, weight=w) for (u, v, year), w in counts.items()]
    return TemporalGraph(vertices=catalog.records.keys(), horizon=horizon, events=events)


def binary_adjacency(g: TemporalGraph, t: int) -> Adjacency:
    """Pairs with positive co-occurrence weight in year ``t``."""
    g._check_year(t)
    return Adjacency(g.vertices, frozenset(e.pair for e in g.events_for_year(t)))


def cumulative_adjacency(g: TemporalGraph, t: int) -> Adjacency:
    """Pairs observed in any year <= ``t``."""
    g._check_year(t)
    hi = bisect.bisect_right(g._event_years, t)
    return Adjacency(g.vertices, frozenset(e.pair for e in g.events[:hi]))


def first_observation(g: TemporalGraph, u: str, v: str):
    """Earliest year the pair co-occurs, or INFINITY if it never does."""
    if u == v:
        raise GraphError(f"self-pair {u!r}")
    if u not in g.vertex_set or v not in g.vertex_set:
        raise GraphError(f"unknown vertex in pair ({u},{v})")
    years = g.pair_years().get(canonical_pair(u, v))
    return years[0] if years else INFINITY


def split(g: TemporalGraph, manifest: SplitManifest):
    """Partition the event stream into (train, val, test) lists, order preserved."""
    for r in (manifest.train, manifest.val, manifest.test):
        if r.start < g.horizon[0] or r.end > g.horizon[1]:
            raise GraphError(f"split range {r.start}..{r.end} outside horizon {g.horizon}")
    train = [e for e in g.events if e.year in manifest.train]
    val = [e for e in g.events if e.year in manifest.val]
    test = [e for e in g.events if e.year in manifest.test]
    return train, val, test


def write_edge_stream(g: TemporalGraph, path, meta: dict | None = None) -> None:
    """CSV ``u,v,year,weight`` sorted by (year,u,v); '#'-prefixed metadata lines first."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if meta:
            for k, v in meta.items():
                fh.write(f"# {k}={v}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["u", "v", "year", "weight"])
        for e in g.events:
            writer.writerow([e.u, e.v, e.year, e.weight])


def read_edge_stream(path, vertices=None, horizon: tuple[int, int] | None = None) -> TemporalGraph:
    """Read an edge-stream CSV back into a TemporalGraph.

    ``vertices`` restores the fixed vertex set (isolated vertices are not
    recoverable from the CSV alone); defaults to the vertices observed on
    edges. ``horizon`` defaults to the observed year span.
    """
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = (line for line in fh if not line.startswith("#"))
        reader = csv.reader(rows)
        header = next(reader, None)
        if header != ["u", "v", "year", "weight"]:
            raise GraphError(f"{path}: unexpected edge-stream header {header}")
        for row in reader:
            u, v, year, weight = row
            events.append(EdgeEvent(u=u, v=v, year=int(year), weight=int(weight)))
    if vertices is None:
        vertices = {e.u for e in events} | {e.v for e in events}
    if horizon is None:
        if not events:
            raise GraphError(f"{path}: empty stream needs an explicit horizon")
        years = [e.year for e in events]
        horizon = (min(years), max(years))
    return TemporalGraph(vertices=vertices, horizon=horizon, events=events)
