"""Negative-sampling regimes and temporal neighbor samplers."""

from collections import Counter

from fosbench import SamplerConfig, build_pools, sample_negatives, sample_neighbors
from fosbench.graph import EdgeEvent
from fosbench.sampling import batch_rng


def ev(u, v, year):
    a, b = sorted((u, v))
    return EdgeEvent(a, b, year, 1)


vertices = [f"n{i:02d}" for i in range(10)]
train = [ev("n00", "n01", 2000), ev("n00", "n02", 2001), ev("n01", "n03", 2002),
         ev("n02", "n03", 2003)]
val = [ev("n00", "n01", 2005)]
test = [ev("n00", "n04", 2008), ev("n05", "n06", 2008)]

pools = build_pools(vertices, train, val, test)
print(f"train pairs: {sorted(pools.train_edges)}")
print(f"test-only pairs: {sorted(pools.test_only_edges)}")

positive = ("n00", "n04", 2008)
for regime in ("random", "historical", "inductive"):
    cfg = SamplerConfig(regime=regime, seed=13)
    rng = batch_rng(13, 0)
    tally = Counter()
    for _ in range(2000):
        for u, v2, t, origin in sample_negatives(positive, pools, cfg, rng,
                                                 with_sources=True):
            tally[(v2, origin)] += 1
    print(f"\n{regime}: destination (origin) counts over 2000 draws")
    for (v2, origin), c in tally.most_common(6):
        print(f"  {v2} ({origin}): {c}")

# neighbor samplers: the recent strategy is deterministic, the time-aware one
# prefers small gaps with strength alpha
history = [("p", 1995), ("q", 2005), ("r", 2009), ("s", 1980)]
for strategy, alpha in (("recent", 0.0), ("uniform", 0.0), ("time_aware", 0.5)):
    cfg = SamplerConfig(neighbor_strategy=strategy, S=2, alpha=max(alpha, 1e-6))
    picked, pad = sample_neighbors("x", 2010, history, cfg, batch_rng(1, 0))
    print(f"\n{strategy:>10}: picked {picked} (pad={pad})")

cfg = SamplerConfig(neighbor_strategy="time_aware", S=1, alpha=0.5)
rng = batch_rng(2, 0)
freq = Counter(sample_neighbors("x", 2010, history, cfg, rng)[0][0][0]
               for _ in range(20000))
print("\ntime-aware draw frequencies (alpha=0.5):")
total = sum(freq.values())
for node, c in freq.most_common():
    gap = 2010 - dict((n, t) for n, t in history)[node]
    print(f"  {node} (gap {gap:>2}): {c / total:.3f}")
