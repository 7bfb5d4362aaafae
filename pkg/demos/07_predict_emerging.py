"""Rank never-linked field pairs by a trained scorer: emerging-pair prediction."""

import numpy as np

from fosbench import (
    NeuralScorer,
    NodeFeatureTable,
    SamplerConfig,
    TrainConfig,
    rank_emerging,
    train,
)
from fosbench.evaluation import write_ranked_pairs
from fosbench.graph import EdgeEvent, SplitManifest, TemporalGraph, YearRange

rng = np.random.default_rng(17)
a_nodes = [f"a{i}" for i in range(6)]
b_nodes = [f"b{i}" for i in range(6)]
c_nodes = [f"c{i:02d}" for i in range(40)]
vertices = a_nodes + b_nodes + c_nodes

feats = {}
for group, axis in ((a_nodes, 0), (b_nodes, 1), (c_nodes, 2)):
    for node in group:
        v = rng.normal(scale=0.05, size=8)
        v[axis] += 2.0
        feats[node] = v
features = NodeFeatureTable(raw={}, reduced=feats)

# cross-cluster pairs appear gradually; by 2014 a few are still unseen, and a
# good scorer should put exactly those at the top of the emerging ranking
all_cross = [(u, v) for u in a_nodes for v in b_nodes]
rng.shuffle(all_cross)
events = []
for k, (u, v) in enumerate(all_cross[:30]):
    year = 2000 + k % 15
    events.append(EdgeEvent(*sorted((u, v)), year=year, weight=1))
events.sort(key=lambda e: (e.year, e.u, e.v))
g = TemporalGraph(vertices=vertices, horizon=(2000, 2016), events=events)

manifest = SplitManifest(train=YearRange(2000, 2010), val=YearRange(2011, 2012),
                         test=YearRange(2013, 2014))
scfg = SamplerConfig(seed=23, neighbor_strategy="recent")
tcfg = TrainConfig(learning_rate=0.02, max_epochs=15, patience=15, batch_size=300,
                   seed=23, hidden_dim=16, encode_dim=16, time_dim=8)
result = train(g, manifest, features, tcfg, scfg)
print(f"trained to val AP {result.best_val_ap:.3f}")

scorer = NeuralScorer(result.params, features, scfg)
ranked = rank_emerging(scorer, g, t=2014, top_k=15)
held_out = {tuple(sorted(p)) for p in all_cross[30:]}

print("\ntop emerging candidates at t=2014 (* = a true never-yet-seen cross pair):")
for rank, (u, v, score) in enumerate(ranked, start=1):
    mark = "*" if (u, v) in held_out else " "
    print(f" {rank:>2} {mark} {u}--{v}  {score:.4f}")

hits = sum((u, v) in held_out for u, v, _ in ranked[:10])
print(f"\ncross-cluster pairs in the top 10: {hits}/10 "
      f"(random over all candidates would find far fewer)")

write_ranked_pairs(ranked, "emerging_demo.csv", meta={"seed": 23})
print("wrote emerging_demo.csv (rank,u,v,score)")
