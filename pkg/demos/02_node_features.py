"""Compose semantic node features and reduce them with PCA."""

import numpy as np

from fosbench import EmbeddingTable, NodeFeatureTable, compose, level_encoding
from fosbench.corpus import ConceptCatalog, ConceptRecord

rng = np.random.default_rng(7)

records = {
    "ART": ConceptRecord("ART", "Art", 0, (), ("aesthetics",), "creative practice"),
    "PAINT": ConceptRecord("PAINT", "Painting", 1, ("ART",), (), "pigment on surfaces"),
    "MKT": ConceptRecord("MKT", "Marketing", 1, ("BIZ",), ("advertising",), None),
    "BIZ": ConceptRecord("BIZ", "Business", 0, (), (), None),
}
catalog = ConceptCatalog(records)

# In production the table comes from the embedding exporter; here random
# 16-d stand-ins keyed by the exact texts the composer looks up.
texts = {"Art", "Painting", "Marketing", "Business", "creative practice",
         "pigment on surfaces", "aesthetics", "advertising"}
table = EmbeddingTable(16, {t: rng.normal(size=16) for t in texts})

print("positional encoding of level 1 (first 6 of 16 dims):")
print(" ", np.round(level_encoding(1, 16)[:6], 4))

raw = compose(catalog, table)
print(f"\ncomposed {len(raw)} raw vectors of dim 16")
print("  ART  :", np.round(raw["ART"][:5], 3))
print("  PAINT:", np.round(raw["PAINT"][:5], 3))

# ablations drop one term; the without-description variant differs only
# where a description existed
no_desc = compose(catalog, table, drop=["desc"])
moved = [fid for fid in raw if not np.allclose(raw[fid], no_desc[fid])]
print(f"nodes changed by dropping descriptions: {moved}")

nft = NodeFeatureTable.from_raw(raw, k=3)
print(f"\nPCA reduced to k={nft.reduced_dim}; explained variance: "
      f"{np.round(nft.basis.explained_variance, 3)}")
for fid, vec in nft.reduced.items():
    print(f"  {fid:>5}: {np.round(vec, 3)}")
