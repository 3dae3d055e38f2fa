"""Pre-trained word vectors in the plain-text ``token v1 ... vd`` format."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyFile, NonFiniteValue, ZeroNormVector


@dataclass(frozen=True, eq=False)
class EmbeddingStore:
    """Token -> float32 vector map backed by a single matrix."""

    tokens: tuple[str, ...]
    matrix: np.ndarray
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate tokens in embedding store")

    @classmethod
    def from_dict(cls, vectors: dict[str, Sequence[float]]) -> "EmbeddingStore":
        tokens = tuple(vectors)
        matrix = np.asarray([vectors[t] for t in tokens], dtype=np.float32)
        if matrix.ndim != 2 or matrix.shape[1] == 0:
            raise ValueError("vectors must be non-empty and of equal length")
        return cls(tokens, matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __getitem__(self, token: str) -> np.ndarray:
        return self.matrix[self.index[token]]


def load_vectors(path: str | os.PathLike, limit: int | None = None) -> EmbeddingStore:
    """Parse a whitespace-separated vector file.

    The dimension comes from the first vector line. A leading ``count dim``
    header line (two integers) is detected and skipped.
    """
    tokens: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if limit is not None and len(tokens) >= limit:
                break
            parts = raw.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                if not values:
                    raise DimensionMismatch(lineno, 1, 0)
                dim = len(values)
            elif len(values) != dim:
                raise DimensionMismatch(lineno, dim, len(values))
            try:
                vec = [float(v) for v in values]
            except ValueError:
                raise NonFiniteValue(lineno, token) from None
            if not all(math.isfinite(v) for v in vec):
                raise NonFiniteValue(lineno, token)
            if token in seen:
                continue  # first occurrence wins
            seen.add(token)
            tokens.append(token)
            rows.append(vec)
    if not tokens:
        raise EmptyFile(f"{path}: no vectors")
    return EmbeddingStore(tuple(tokens), np.asarray(rows, dtype=np.float32))


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    a64 = np.asarray(a, dtype=np.float64)
    b64 = np.asarray(b, dtype=np.float64)
    if a64.shape != b64.shape:
        raise ValueError("vectors differ in dimension")
    na = math.sqrt(float(np.dot(a64, a64)))
    nb = math.sqrt(float(np.dot(b64, b64)))
    if na == 0.0 or nb == 0.0:
        raise ZeroNormVector("cosine undefined for a zero vector")
    sim = float(np.dot(a64, b64)) / (na * nb)
    return min(1.0, max(-1.0, sim))


@dataclass(frozen=True, eq=False)
class SimilarityPairs:
    """All unordered pairs over ``tokens`` (sorted), stored as parallel arrays."""

    tokens: tuple[str, ...]
    left: np.ndarray
    right: np.ndarray
    sims: np.ndarray
    oov: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.sims)

    def __iter__(self) -> Iterator[tuple[str, str, float]]:
        toks = self.tokens
        for i, j, s in zip(self.left.tolist(), self.right.tolist(), self.sims.tolist()):
            yield toks[i], toks[j], s


def similarity_matrix(vocab: Iterable[str], store: EmbeddingStore) -> SimilarityPairs:
    words = sorted(set(vocab))
    present = [w for w in words if w in store]
    oov = tuple(w for w in words if w not in store)
    n = len(present)
    if n:
        m = store.matrix[[store.index[w] for w in present]].astype(np.float64)
        norms = np.sqrt(np.einsum("ij,ij->i", m, m))
        zero = [present[i] for i in np.flatnonzero(norms == 0.0)]
        if zero:
            raise ZeroNormVector(f"zero vectors for {zero[:5]}")
        unit = m / norms[:, None]
        sim = np.clip(unit @ unit.T, -1.0, 1.0)
        left, right = np.triu_indices(n, k=1)
        sims = sim[left, right]
    else:
        left = right = np.zeros(0, dtype=np.intp)
        sims = np.zeros(0)
    return SimilarityPairs(tuple(present), left, right, sims, oov)
