"""Semantic node features: five-part composition and PCA reduction.

A node's raw vector is the elementwise sum of five same-dimension terms:
a sinusoidal encoding of its hierarchy level, the embeddings of its display
name and description, and the means of its ancestor-label and
related-concept-text embeddings. Absent descriptions and empty
ancestor/related sets contribute zero vectors. The positional term (range
[-1, 1]) is summed verbatim with the unnormalized text embeddings; no
rescaling is applied, and the scale mismatch is intentional, not corrected.

Text embeddings come from an external table file keyed by exact text:

    # optional comment lines
    dim=<d>
    <key>\\t<d space-separated decimal floats>

Keys may contain spaces but not tabs or newlines. Floats are written with
enough digits to round-trip doubles.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FeatureError",
    "FEATURE_NAMES",
    "EmbeddingTable",
    "NodeFeatureTable",
    "PcaBasis",
    "sinusoidal_encoding",
    "level_encoding",
    "mean_aggregate",
    "compose",
    "compose_terms",
    "pca_fit",
    "pca_transform",
    "load_embedding_table",
    "write_embedding_table",
]

FEATURE_NAMES = ("level", "name", "desc", "ancestor", "related")


class FeatureError(Exception):
    pass


class EmbeddingTable:
    """Map from text key (or field id) to a fixed-dimension float vector."""

    def __init__(self, dim: int, vectors: dict[str, np.ndarray]):
        self.dim = int(dim)
        self.vectors: dict[str, np.ndarray] = {}
        for key, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise FeatureError(f"vector for {key!r} has shape {arr.shape}, want ({self.dim},)")
            if not np.all(np.isfinite(arr)):
                raise FeatureError(f"non-finite entries in vector for {key!r}")
            self.vectors[key] = arr

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, key: str) -> bool:
        return key in self.vectors

    def get(self, key: str) -> np.ndarray:
        try:
            return self.vectors[key]
        except KeyError:
            raise FeatureError(f"embedding table has no entry for key {key!r}") from None


def sinusoidal_encoding(value: float, d: int) -> np.ndarray:
    """Interleaved sin/cos encoding: slot 2j = sin(value / 10000^(2j/d)),
    slot 2j+1 the matching cos, for j = 0 .. d/2 - 1."""
    if d < 2 or d % 2 != 0:
        raise FeatureError(f"encoding dimension must be even and >= 2, got {d}")
    j = np.arange(d // 2, dtype=np.float64)
    angle = value / np.power(10000.0, 2.0 * j / d)
    out = np.empty(d, dtype=np.float64)
    out[0::2] = np.sin(angle)
    out[1::2] = np.cos(angle)
    return out


def level_encoding(level: int, d: int) -> np.ndarray:
    """Sinusoidal encoding of a hierarchy depth (nonnegative integer)."""
    if not isinstance(level, (int, np.integer)) or isinstance(level, bool) or level < 0:
        raise FeatureError(f"level must be a nonnegative integer, got {level!r}")
    return sinusoidal_encoding(float(level), d)


def mean_aggregate(keys, table: EmbeddingTable) -> np.ndarray:
    """Arithmetic mean of the keys' vectors; the empty set maps to the zero vector."""
    keys = list(keys)
    if not keys:
        return np.zeros(table.dim, dtype=np.float64)
    return np.mean([table.get(k) for k in keys], axis=0)


def compose_terms(catalog, table: EmbeddingTable) -> dict[str, dict[str, np.ndarray]]:
    """The five per-node feature terms, keyed by FEATURE_NAMES.

    Ancestor labels and related texts are treated as sets (deduplicated,
    first-seen order); a missing description and empty label sets are zero
    vectors.
    """
    d = table.dim
    terms: dict[str, dict[str, np.ndarray]] = {name: {} for name in FEATURE_NAMES}
    for fid in sorted(catalog.records):
        rec = catalog.records[fid]
        terms["level"][fid] = level_encoding(rec.level, d)
        terms["name"][fid] = table.get(rec.display_name)
        terms["desc"][fid] = (table.get(rec.description) if rec.description
                              else np.zeros(d, dtype=np.float64))
        labels = dict.fromkeys(
            catalog.records[a].display_name for a in rec.ancestor_ids if a in catalog.records
        )
        terms["ancestor"][fid] = mean_aggregate(labels, table)
        terms["related"][fid] = mean_aggregate(dict.fromkeys(rec.related_texts), table)
    return terms


def compose(catalog, table: EmbeddingTable, drop=()) -> dict[str, np.ndarray]:
    """Raw feature vectors: the elementwise sum of the five terms per node.

    ``drop`` is an ablation mask over FEATURE_NAMES ("desc" reproduces the
    without-description configuration). Masking is implemented as literal
    subtraction of the dropped terms from the full sum, so mask-equals-
    subtract holds exactly, not just to rounding.
    """
    drop = frozenset(drop)
    unknown = drop - set(FEATURE_NAMES)
    if unknown:
        raise FeatureError(f"unknown feature names in mask: {sorted(unknown)}")
    terms = compose_terms(catalog, table)
    out: dict[str, np.ndarray] = {}
    for fid in sorted(catalog.records):
        vec = np.zeros(table.dim, dtype=np.float64)
        for name in FEATURE_NAMES:
            vec = vec + terms[name][fid]
        for name in FEATURE_NAMES:
            if name in drop:
                vec = vec - terms[name][fid]
        out[fid] = vec
    return out


@dataclass
class PcaBasis:
    """Mean-centered orthonormal projection: rows of ``components`` are the
    top-k principal directions (sign-fixed: largest-magnitude entry positive)."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.components.shape[1]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "k": self.k,
            "mean": self.mean.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "components": self.components.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaBasis":
        basis = cls(
            mean=np.asarray(d["mean"], dtype=np.float64),
            components=np.asarray(d["components"], dtype=np.float64),
            explained_variance=np.asarray(d["explained_variance"], dtype=np.float64),
        )
        if basis.components.shape != (d["k"], d["dim"]):
            raise FeatureError("basis file inconsistent with its own dims")
        return basis


def _as_matrix(raw) -> tuple[list[str], np.ndarray]:
    if isinstance(raw, dict):
        keys = sorted(raw)
        return keys, np.vstack([raw[k] for k in keys])
    m = np.asarray(raw, dtype=np.float64)
    return [], m


def pca_fit(raw, k: int) -> PcaBasis:
    """Fit the top-k principal directions of the raw table (dict or matrix).

    Deterministic: components ordered by explained variance (ties keep
    decomposition order) and sign-fixed so each direction's
    largest-magnitude entry is positive.
    """
    _, X = _as_matrix(raw)
    if X.ndim != 2 or X.shape[0] < 2:
        raise FeatureError("PCA needs at least 2 rows")
    n, d = X.shape
    if not (1 <= k <= min(n, d)):
        raise FeatureError(f"k={k} invalid for {n} rows of dim {d}")
    mean = X.mean(axis=0)
    Xc = X - mean
    # SVD of the centered matrix; right singular vectors are the directions.
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    components = vt[:k].copy()
    for row in components:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0
    explained = (s[:k] ** 2) / (n - 1)
    return PcaBasis(mean=mean, components=components, explained_variance=explained)


def pca_transform(x, basis: PcaBasis) -> np.ndarray:
    """Project vectors (shape (d,) or (n,d)) onto the fitted basis."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1] != basis.dim:
        raise FeatureError(f"input dim {arr.shape[-1]} != basis dim {basis.dim}")
    return (arr - basis.mean) @ basis.components.T


class NodeFeatureTable:
    """Raw 768-d style composition plus its PCA-reduced form."""

    def __init__(self, raw: dict[str, np.ndarray], reduced: dict[str, np.ndarray] | None = None,
                 basis: PcaBasis | None = None):
        self.raw = raw
        self.reduced = reduced
        self.basis = basis

    @classmethod
    def from_raw(cls, raw: dict[str, np.ndarray], k: int) -> "NodeFeatureTable":
        basis = pca_fit(raw, k)
        reduced = {fid: pca_transform(vec, basis) for fid, vec in sorted(raw.items())}
        return cls(raw=raw, reduced=reduced, basis=basis)

    @property
    def reduced_dim(self) -> int:
        if self.basis is not None:
            return self.basis.k
        if self.reduced:
            return next(iter(self.reduced.values())).shape[0]
        raise FeatureError("feature table has no reduced form")


def write_embedding_table(table_or_vectors, path, meta: dict | None = None) -> None:
    if isinstance(table_or_vectors, EmbeddingTable):
        dim, vectors = table_or_vectors.dim, table_or_vectors.vectors
    else:
        vectors = {k: np.asarray(v, dtype=np.float64) for k, v in table_or_vectors.items()}
        if not vectors:
            raise FeatureError("refusing to write an empty table")
        dim = next(iter(vectors.values())).shape[0]
    with open(path, "w", encoding="utf-8") as fh:
        if meta:
            for k, v in meta.items():
                fh.write(f"# {k}={v}\n")
        fh.write(f"dim={dim}\n")
        for key in vectors:
            if "\t" in key or "\n" in key:
                raise FeatureError(f"key {key!r} contains tab/newline")
            nums = " ".join(f"{x:.17g}" for x in vectors[key])
            fh.write(f"{key}\t{nums}\n")


def load_embedding_table(path) -> EmbeddingTable:
    dim = None
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if dim is None:
                if not line.startswith("dim="):
                    raise FeatureError(f"{path}:{lineno}: expected dim= header, got {line!r}")
                dim = int(line[4:])
                continue
            try:
                key, payload = line.split("\t", 1)
            except ValueError:
                raise FeatureError(f"{path}:{lineno}: missing tab separator") from None
            vec = np.array(payload.split(), dtype=np.float64)
            if vec.shape != (dim,):
                raise FeatureError(f"{path}:{lineno}: vector length {vec.shape[0]} != dim {dim}")
            if key in vectors:
                raise FeatureError(f"{path}:{lineno}: duplicate key {key!r}")
            vectors[key] = vec
    if dim is None:
        raise FeatureError(f"{path}: no dim= header found")
    return EmbeddingTable(dim=dim, vectors=vectors)
