"""Build a yearly co-occurrence graph from raw JSONL records and query it."""

import json

from fosbench import (
    INFINITY,
    binary_adjacency,
    build,
    cumulative_adjacency,
    first_observation,
    parse_concepts,
    parse_works,
)

# A six-field taxonomy: two roots, two children each.
concepts = [
    {"id": "ART", "display_name": "Art", "level": 0},
    {"id": "BIZ", "display_name": "Business", "level": 0},
    {"id": "PAINT", "display_name": "Painting", "level": 1, "ancestors": [{"id": "ART"}]},
    {"id": "DESIGN", "display_name": "Design", "level": 1, "ancestors": [{"id": "ART"}]},
    {"id": "MKT", "display_name": "Marketing", "level": 1, "ancestors": [{"id": "BIZ"}]},
    {"id": "FIN", "display_name": "Finance", "level": 1, "ancestors": [{"id": "BIZ"}]},
]
catalog = parse_concepts(json.dumps(c) for c in concepts)
print(f"catalog: {len(catalog)} fields, roots = {catalog.root_ids}")

# Tagging a child implicitly tags its ancestors, so a single PAINT+MKT paper
# creates edges among PAINT, MKT, ART, and BIZ.
works_jsonl = [
    {"id": "W1", "publication_year": 2010, "concepts": [{"id": "PAINT"}, {"id": "MKT"}]},
    {"id": "W2", "publication_year": 2010, "concepts": [{"id": "PAINT"}, {"id": "MKT"}]},
    {"id": "W3", "publication_year": 2012, "concepts": [{"id": "DESIGN"}, {"id": "FIN"}]},
    {"id": "W4", "publication_year": 2014, "concepts": [{"id": "PAINT"}]},
]
works = parse_works((json.dumps(w) for w in works_jsonl), catalog, horizon=(2000, 2020))
g = build(works, catalog, horizon=(2000, 2020))

print(f"events: {len(g.events)} (u, v, year, weight):")
for e in g.events:
    print(f"  {e.u:>6} -- {e.v:<6} {e.year}  w={e.weight}")

adj_2010 = binary_adjacency(g, 2010)
print(f"\n2010 snapshot has {len(adj_2010)} edges; PAINT--MKT present: "
      f"{bool(adj_2010('PAINT', 'MKT'))}")

cum = cumulative_adjacency(g, 2013)
print(f"cumulative through 2013: {len(cum)} edges")

tau = first_observation(g, "DESIGN", "FIN")
print(f"first DESIGN--FIN co-occurrence: {tau}")
never = first_observation(g, "PAINT", "FIN")
print(f"first PAINT--FIN co-occurrence: {never} (never = {never == INFINITY})")
