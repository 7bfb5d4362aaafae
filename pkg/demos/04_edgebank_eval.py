"""Evaluate the EdgeBank memorization baseline under all three regimes."""

import numpy as np

from fosbench import EdgeBankMemory, SamplerConfig, build_pools, evaluate, split
from fosbench.graph import SplitManifest, TemporalGraph, YearRange
from fosbench.evaluation import merge_reports
from fosbench.graph import EdgeEvent

rng = np.random.default_rng(3)
nodes = [f"n{i:02d}" for i in range(30)]

# a recurring core of pairs plus per-year noise: memorization helps under
# random negatives but not when negatives are themselves remembered pairs
core = [(nodes[i], nodes[i + 1]) for i in range(0, 20, 2)]
events = []
for year in range(2000, 2015):
    pairs = set(core)
    while len(pairs) < 14:
        i, j = rng.choice(len(nodes), size=2, replace=False)
        pairs.add(tuple(sorted((nodes[i], nodes[j]))))
    for u, v in sorted(pairs):
        events.append(EdgeEvent(u, v, year, 1))

g = TemporalGraph(vertices=nodes, horizon=(2000, 2014), events=events)
manifest = SplitManifest(train=YearRange(2000, 2009), val=YearRange(2010, 2011),
                         test=YearRange(2012, 2014))
train_ev, val_ev, test_ev = split(g, manifest)
pools = build_pools(g.vertices, train_ev, val_ev, test_ev)
print(f"{len(train_ev)} train / {len(val_ev)} val / {len(test_ev)} test events")

reports = []
for regime in ("random", "historical", "inductive"):
    scorer = EdgeBankMemory(mode="infinite")
    cfg = SamplerConfig(regime=regime, seed=5)
    reports.append(evaluate(scorer, g, test_ev, pools, cfg, batch_size=10))
print("\nEdgeBank (infinite memory):")
print(merge_reports(reports).table())

# the trailing-window variant forgets stale pairs
tw = EdgeBankMemory(mode="time_window", window_years=len(manifest.test))
report = evaluate(tw, g, test_ev, pools, SamplerConfig(regime="random", seed=5),
                  batch_size=10)
print("EdgeBank (time window = test span):")
print(report.table())
