import numpy as np
import pytest

from fosbench.graph import EdgeEvent, SplitManifest, YearRange, split
from fosbench.sampling import (
    NeighborIndex,
    SamplerConfig,
    SamplingError,
    batch_rng,
    build_pools,
    sample_negatives,
    sample_neighbors,
)

from conftest import random_graph
from oracles import softmax_bruteforce


def ev(u, v, year):
    a, b = sorted((u, v))
    return EdgeEvent(a, b, year, 1)


def toy_pools():
    """12 nodes; train pairs around n00..n05; test introduces new pairs."""
    train = [ev("n00", "n01", 2000), ev("n00", "n02", 2000), ev("n01", "n02", 2001),
             ev("n03", "n04", 2001), ev("n00", "n03", 2002)]
    val = [ev("n00", "n01", 2003)]
    test = [ev("n00", "n05", 2004), ev("n06", "n07", 2004), ev("n00", "n01", 2005)]
    vertices = [f"n{i:02d}" for i in range(12)]
    return build_pools(vertices, train, val, test), train, val, test


def test_pool_construction():
    pools, train, val, test = toy_pools()
    assert ("n00", "n01") in pools.train_edges
    assert ("n00", "n05") in pools.test_only_edges
    assert ("n00", "n01") not in pools.test_only_edges  # seen in train
    assert pools.test_only_edges & pools.train_edges == frozenset()
    assert pools.active_by_year[2004] == frozenset({("n00", "n05"), ("n06", "n07")})


def test_random_regime_destination_support():
    pools, *_ = toy_pools()
    cfg = SamplerConfig(regime="random", seed=1)
    rng = batch_rng(1, 0)
    seen = set()
    for _ in range(2000):
        (u, v2, t), = sample_negatives(("n00", "n01", 2004), pools, cfg, rng)
        assert u == "n00" and t == 2004
        assert v2 != "n01"          # never the positive destination
        seen.add(v2)
    assert seen == set(pools.vertices) - {"n01"}


def test_historical_empty_pool_falls_back_to_random():
    pools, *_ = toy_pools()
    # n06 has no train partners at all
    cfg = SamplerConfig(regime="historical", seed=2)
    rng = batch_rng(2, 0)
    out = sample_negatives(("n06", "n07", 2004), pools, cfg, rng, with_sources=True)
    assert [o[3] for o in out] == ["fallback"]


def test_inductive_pool_empty_when_test_equals_train():
    train = [ev("a", "b", 2000)]
    test = [ev("a", "b", 2005)]
    pools = build_pools(["a", "b", "c", "d"], train, [], test)
    assert pools.test_only_edges == frozenset()
    cfg = SamplerConfig(regime="inductive", seed=3)
    out = sample_negatives(("a", "b", 2005), pools, cfg, batch_rng(3, 0), with_sources=True)
    assert [o[3] for o in out] == ["fallback"]


def test_historical_negatives_come_from_train_and_inactive():
    pools, *_ = toy_pools()
    cfg = SamplerConfig(regime="historical", seed=4)
    rng = batch_rng(4, 0)
    for _ in range(500):
        out = sample_negatives(("n00", "n05", 2004), pools, cfg, rng, with_sources=True)
        for u, v2, t, origin in out:
            if origin == "historical":
                pair = tuple(sorted((u, v2)))
                assert pair in pools.train_edges
                assert pair not in pools.active_by_year[2004]
                assert (u, v2) != ("n00", "n05")


def test_never_returns_positive_pair():
    pools, *_ = toy_pools()
    for regime in ("random", "historical", "inductive"):
        cfg = SamplerConfig(regime=regime, seed=5)
        rng = batch_rng(5, 0)
        for _ in range(300):
            for u, v2, _t in sample_negatives(("n00", "n01", 2005), pools, cfg, rng):
                assert tuple(sorted((u, v2))) != ("n00", "n01")


def test_multiple_negatives_distinct_within_slot():
    pools, *_ = toy_pools()
    cfg = SamplerConfig(regime="random", negatives_per_positive=5, seed=6)
    rng = batch_rng(6, 0)
    for _ in range(100):
        vs = [v2 for _, v2, _ in sample_negatives(("n00", "n01", 2004), pools, cfg, rng)]
        assert len(vs) == len(set(vs)) == 5


def test_degenerate_vertex_set_errors():
    pools = build_pools(["a", "b"], [ev("a", "b", 2000)], [], [ev("a", "b", 2001)])
    pools_tiny = build_pools(["a"], [], [], [])
    cfg = SamplerConfig(regime="random", seed=7)
    with pytest.raises(SamplingError):
        sample_negatives(("a", "a2", 2001), pools_tiny, cfg, batch_rng(7, 0))


def test_determinism_across_runs():
    pools, *_ = toy_pools()
    for regime in ("random", "historical", "inductive"):
        cfg = SamplerConfig(regime=regime, seed=11)
        a = [sample_negatives(("n00", "n01", 2004), pools, cfg, batch_rng(11, i))
             for i in range(20)]
        b = [sample_negatives(("n00", "n01", 2004), pools, cfg, batch_rng(11, i))
             for i in range(20)]
        assert a == b


def test_random_frequencies_uniform(rng):
    pools, *_ = toy_pools()
    cfg = SamplerConfig(regime="random", seed=13)
    gen = batch_rng(13, 99)
    n = 20000
    counts = {}
    for _ in range(n):
        (_, v2, _), = sample_negatives(("n00", "n01", 2004), pools, cfg, gen)
        counts[v2] = counts.get(v2, 0) + 1
    support = set(pools.vertices) - {"n01"}
    p = 1.0 / len(support)
    sigma = np.sqrt(n * p * (1 - p))
    for v2 in support:
        assert abs(counts.get(v2, 0) - n * p) <= 3 * sigma


# --- neighbor sampling -------------------------------------------------------


def hist(*pairs):
    return [(f"m{i:02d}", t) for i, t in enumerate(pairs)]


def test_empty_history_pads_fully():
    cfg = SamplerConfig(neighbor_strategy="uniform", S=20)
    out, pad = sample_neighbors("x", 2010, [], cfg, batch_rng(0, 0))
    assert out == [] and pad == 20


def test_temporal_leakage_raises():
    cfg = SamplerConfig(neighbor_strategy="uniform", S=4)
    with pytest.raises(SamplingError, match="leakage"):
        sample_neighbors("x", 2010, [("a", 2010)], cfg, batch_rng(0, 0))
    with pytest.raises(SamplingError, match="leakage"):
        sample_neighbors("x", 2010, [("a", 2011)], cfg, batch_rng(0, 0))


def test_recent_takes_top_s_years():
    history = hist(*range(1980, 2005))  # 25 interactions
    cfg = SamplerConfig(neighbor_strategy="recent", S=20)
    out, pad = sample_neighbors("x", 2010, history, cfg, batch_rng(0, 0))
    assert pad == 0
    assert sorted(t for _, t in out) == list(range(1985, 2005))


def test_recent_permutation_invariant(rng):
    history = [(f"m{i}", 1990 + (i % 7)) for i in range(30)]
    cfg = SamplerConfig(neighbor_strategy="recent", S=5)
    base, _ = sample_neighbors("x", 2010, history, cfg, batch_rng(0, 0))
    for _ in range(5):
        perm = list(history)
        rng.shuffle(perm)
        out, _ = sample_neighbors("x", 2010, perm, cfg, batch_rng(0, 0))
        assert out == base


def test_uniform_returns_all_when_short():
    history = hist(2000, 2001, 2002)
    cfg = SamplerConfig(neighbor_strategy="uniform", S=20)
    out, pad = sample_neighbors("x", 2010, history, cfg, batch_rng(0, 0))
    assert len(out) == 3 and pad == 17
    assert set(out) == set(history)


def test_time_aware_equal_timestamps_is_exactly_uniform():
    history = [(f"m{i}", 2000) for i in range(8)]
    cfg = SamplerConfig(neighbor_strategy="time_aware", S=1, alpha=5.0)
    counts = {}
    gen = batch_rng(21, 0)
    n = 40000
    for _ in range(n):
        out, _ = sample_neighbors("x", 2010, history, cfg, gen)
        counts[out[0][0]] = counts.get(out[0][0], 0) + 1
    p = 1 / 8
    sigma = np.sqrt(n * p * (1 - p))
    for c in counts.values():
        assert abs(c - n * p) <= 4 * sigma


def test_time_aware_matches_analytic_softmax():
    # history at t-1 and t-5; exp-recency ratio computed independently:
    # alpha=0.5 -> p(t-1) = 0.8807970779778824; alpha=10 -> 1.0 (to double precision)
    t = 2010
    history = [("near", t - 1), ("far", t - 5)]
    for alpha, want in ((0.5, 0.8807970779778824), (10.0, 1.0)):
        cfg = SamplerConfig(neighbor_strategy="time_aware", S=1, alpha=alpha)
        gen = batch_rng(31, int(alpha * 10))
        n = 100_000
        near = 0
        for _ in range(n):
            out, _ = sample_neighbors("x", t, history, cfg, gen)
            near += out[0][0] == "near"
        assert abs(near / n - want) <= 0.01
        gaps = [t - ti for _, ti in history]
        oracle = softmax_bruteforce([-alpha * g for g in gaps])
        assert abs(near / n - oracle[0]) <= 0.01


def test_time_aware_alpha_zero_is_uniform():
    history = [("a", 2000), ("b", 2005)]
    cfg = SamplerConfig(neighbor_strategy="time_aware", S=1, alpha=0.0)
    gen = batch_rng(41, 0)
    n = 20000
    a = sum(sample_neighbors("x", 2010, history, cfg, gen)[0][0][0] == "a"
            for _ in range(n))
    assert abs(a / n - 0.5) <= 0.02


def test_equal_logits_softmax_is_exactly_uniform():
    from fosbench.sampling import _stable_softmax

    for m in (1, 3, 8, 64):
        p = _stable_softmax(np.full(m, -123.456))
        assert np.all(p == 1.0 / m)  # bitwise: shifted exponents are all exp(0)


def test_config_validation():
    with pytest.raises(SamplingError):
        SamplerConfig(regime="nope")
    with pytest.raises(SamplingError):
        SamplerConfig(S=0)
    with pytest.raises(SamplingError):
        SamplerConfig(neighbor_strategy="time_aware", alpha=-1.0)
    with pytest.raises(SamplingError):
        SamplerConfig(negatives_per_positive=0)


def test_neighbor_index_histories(rng):
    g = random_graph(rng, 8, range(2000, 2005))
    idx = NeighborIndex()
    idx.add_events(g.events)
    for node in g.vertices:
        for t in (2000, 2002, 2005):
            hist_got = idx.history_before(node, t)
            want = sorted(
                [(e.v if e.u == node else e.u, e.year)
                 for e in g.events if node in (e.u, e.v) and e.year < t],
                key=lambda x: x[1])
            assert sorted(hist_got, key=lambda x: (x[1], x[0])) == \
                sorted(want, key=lambda x: (x[1], x[0]))
            assert all(ti < t for _, ti in hist_got)


def test_neighbor_index_rejects_out_of_order():
    idx = NeighborIndex()
    idx.add_events([ev("a", "b", 2005)])
    with pytest.raises(SamplingError):
        idx.add_events([ev("a", "c", 2004)])


def test_pools_from_graph_splits(rng):
    g = random_graph(rng, 10, range(2000, 2008), density=0.2)
    manifest = SplitManifest(train=YearRange(2000, 2004), val=YearRange(2005, 2005),
                             test=YearRange(2006, 2007))
    train, val, test = split(g, manifest)
    pools = build_pools(g.vertices, train, val, test)
    train_pairs = {e.pair for e in train}
    test_pairs = {e.pair for e in test}
    assert pools.train_edges == train_pairs
    assert pools.test_only_edges == test_pairs - train_pairs
    for y in {e.year for e in g.events}:
        assert pools.active_by_year[y] == {e.pair for e in g.events if e.year == y}
