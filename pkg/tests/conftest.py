import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from fosbench.corpus import ConceptCatalog, ConceptRecord, WorkRecord
from fosbench.graph import EdgeEvent, TemporalGraph


def make_catalog(spec):
    """spec: iterable of (field_id, level, ancestor_ids[, description[, related]])."""
    records = {}
    for entry in spec:
        fid, level, ancestors = entry[0], entry[1], entry[2]
        desc = entry[3] if len(entry) > 3 else None
        related = tuple(entry[4]) if len(entry) > 4 else ()
        records[fid] = ConceptRecord(
            field_id=fid,
            display_name=f"name of {fid}",
            level=level,
            ancestor_ids=tuple(ancestors),
            related_texts=related,
            description=desc,
        )
    return ConceptCatalog(records)


def concept_line(fid, level, ancestors=(), related=(), description=None, name=None):
    obj = {
        "id": fid,
        "display_name": name or f"name of {fid}",
        "level": level,
        "ancestors": [{"id": a} for a in ancestors],
        "related_concepts": [{"display_name": r} for r in related],
    }
    if description is not None:
        obj["description"] = description
    return json.dumps(obj)


def work_line(wid, year, concept_ids):
    return json.dumps({"id": wid, "publication_year": year,
                       "concepts": [{"id": c} for c in concept_ids]})


def random_works(rng, node_ids, n_works, years):
    """Synthetic corpus: each work tags 2..5 random distinct fields."""
    works = []
    node_ids = list(node_ids)
    for i in range(n_works):
        k = int(rng.integers(2, min(6, len(node_ids) + 1)))
        tags = rng.choice(len(node_ids), size=k, replace=False)
        works.append(WorkRecord(
            work_id=f"W{i}",
            year=int(rng.choice(years)),
            field_ids=frozenset(node_ids[t] for t in tags),
        ))
    return works


def flat_catalog(node_ids):
    """All-roots catalog (level 0, no hierarchy) over the given ids."""
    return make_catalog([(fid, 0, ()) for fid in node_ids])


def random_graph(rng, n_nodes, years, density=0.15, max_weight=3):
    """Random event stream over n_nodes named n00..; one event per (pair, year)
    with the given independent probability."""
    node_ids = [f"n{i:02d}" for i in range(n_nodes)]
    events = []
    for year in years:
        for i in range(n_nodes):
            for j in range(i + 1, n_nodes):
                if rng.random() < density:
                    events.append(EdgeEvent(
                        u=node_ids[i], v=node_ids[j], year=int(year),
                        weight=int(rng.integers(1, max_weight + 1))))
    return TemporalGraph(vertices=node_ids, horizon=(min(years), max(years)), events=events)


def stream_triples(g):
    """(u, v, year) triples of a graph's events, for the naive oracles."""
    return [(e.u, e.v, e.year) for e in g.events]


def planted_cluster_problem(rng, n_background=150, n_cluster=5, years=range(2000, 2019),
                            pairs_per_year=30, feature_dim=8):
    """Synthetic graph whose links form only between two small feature clusters.

    Nodes a** and b** carry distinct one-hot-ish features; background c**
    nodes never link. Returns (graph, features, manifest, cluster_a,
    cluster_b). A feature-based scorer can separate positives from random
    negatives up to the irreducible ties (corrupted destinations that land
    inside cluster b).
    """
    from fosbench.features import NodeFeatureTable
    from fosbench.graph import SplitManifest, YearRange

    a_nodes = [f"a{i:02d}" for i in range(n_cluster)]
    b_nodes = [f"b{i:02d}" for i in range(n_cluster)]
    c_nodes = [f"c{i:02d}" for i in range(n_background)]
    vertices = a_nodes + b_nodes + c_nodes

    feats = {}
    for group, axis in ((a_nodes, 0), (b_nodes, 1), (c_nodes, 2)):
        for node in group:
            v = rng.normal(scale=0.05, size=feature_dim)
            v[axis] += 2.0
            feats[node] = v
    features = NodeFeatureTable(raw={}, reduced=feats)

    events = []
    for year in years:
        seen = set()
        for _ in range(pairs_per_year):
            u = a_nodes[int(rng.integers(len(a_nodes)))]
            v = b_nodes[int(rng.integers(len(b_nodes)))]
            if (u, v) not in seen:
                seen.add((u, v))
                events.append(EdgeEvent(u=u, v=v, year=int(year), weight=1))
    g = TemporalGraph(vertices=vertices, horizon=(min(years), max(years)), events=events)
    manifest = SplitManifest(train=YearRange(2000, 2014), val=YearRange(2015, 2016),
                             test=YearRange(2017, 2018))
    return g, features, manifest, set(a_nodes), set(b_nodes)


class BayesClusterScorer:
    """Closed-form reference: probability 1 for cross-cluster pairs, else 0."""

    def __init__(self, cluster_a, cluster_b):
        self.a = cluster_a
        self.b = cluster_b

    def observe(self, events):
        pass

    def score_batch(self, pairs, t, rng=None):
        return np.array([
            1.0 if (u in self.a and v in self.b) or (u in self.b and v in self.a) else 0.0
            for u, v in pairs])


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


@pytest.fixture
def toy_catalog():
    # two roots; r0 -> a -> (b, c); r1 -> d; c also under r1
    return make_catalog([
        ("r0", 0, ()),
        ("r1", 0, ()),
        ("a", 1, ("r0",), "field a studies things"),
        ("b", 2, ("a", "r0")),
        ("c", 2, ("a", "r0", "r1"), None, ("kindred topic",)),
        ("d", 1, ("r1",)),
    ])
