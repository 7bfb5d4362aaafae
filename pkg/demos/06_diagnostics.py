"""Dataset diagnostics: novelty/recurrence/surprise, TEA/TET, yearly stats."""

import numpy as np

from fosbench.diagnostics import compute_report, write_report
from fosbench.graph import EdgeEvent, SplitManifest, TemporalGraph, YearRange

rng = np.random.default_rng(9)
nodes = [f"n{i:02d}" for i in range(20)]

# half the edges recur every year, the rest are fresh draws
stable = [tuple(sorted((nodes[i], nodes[i + 1]))) for i in range(0, 12, 2)]
events = []
for year in range(2000, 2013):
    pairs = set(stable)
    while len(pairs) < 12:
        i, j = rng.choice(len(nodes), size=2, replace=False)
        pairs.add(tuple(sorted((nodes[i], nodes[j]))))
    for u, v in sorted(pairs):
        events.append(EdgeEvent(u, v, year, 1))

g = TemporalGraph(vertices=nodes, horizon=(2000, 2012), events=events)
manifest = SplitManifest(train=YearRange(2000, 2008), val=YearRange(2009, 2010),
                         test=YearRange(2011, 2012))

report = compute_report(g, manifest)
s = report.summary()
print(f"novelty    {s['novelty']:.3f}   (new-edge fraction per year)")
print(f"recurrence {s['recurrence']:.3f}   (train pairs seen again in test)")
print(f"surprise   {s['surprise']:.3f}   (test pairs never seen in train)")
print(f"(the two use different denominators; they need not sum to 1)")

print("\nTEA rows (year, new, repeated):")
for row in report.tea[:6]:
    print(f"  {row['year']}  {row['new_edges']:>3}  {row['repeated_edges']:>3}")

print("\nfirst TET rows (edges sorted by first/last appearance):")
for row in report.tet[:5]:
    print(f"  {row['u']}--{row['v']}  {row['first_year']}..{row['last_year']} "
          f"[{row['category']}]")

print("\nyearly graph structure:")
for row in report.graph[:5]:
    print(f"  {row['year']}: {row['components']} components, "
          f"largest {row['largest_component']}, diameter {row['diameter']}")

paths = write_report(report, "diagnostics_out")
print(f"\nwrote {len(paths)} plot-ready files under diagnostics_out/")
