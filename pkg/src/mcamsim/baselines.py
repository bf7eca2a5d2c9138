"""Software and TCAM+LSH nearest-neighbour baselines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError

METRICS = ("cosine", "euclidean", "linf", "hamming")


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError(f"vectors must be 1-D with equal length, got {a.shape} and {b.shape}")
    return a, b


def distance(metric: str, a, b) -> float:
    """Distance between two vectors; smaller is nearer for every metric.

    ``hamming`` takes either two 0/1 sequences or two non-negative ints.
    Cosine distance is ``1 - cos(a, b)``.
    """
    if metric == "hamming":
        if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
            return float(bin(int(a) ^ int(b)).count("1"))
        a, b = _pair(a, b)
        return float(np.count_nonzero(a != b))
    a, b = _pair(a, b)
    if metric == "euclidean":
        return float(np.sqrt(np.sum((a - b) ** 2)))
    if metric == "linf":
        return float(np.max(np.abs(a - b))) if a.size else 0.0
    if metric == "cosine":
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0 or nb == 0:
            raise DomainError("cosine distance is undefined for a zero vector")
        return float(max(0.0, 1.0 - np.dot(a, b) / (na * nb)))
    raise DomainError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")


def pairwise(metric: str, queries, memory) -> np.ndarray:
    """Distance matrix ``(n_queries, n_memory)`` for the real-valued metrics."""
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    m = np.atleast_2d(np.asarray(memory, dtype=float))
    if q.shape[1] != m.shape[1]:
        raise DomainError(f"query dim {q.shape[1]} != memory dim {m.shape[1]}")
    if metric == "euclidean":
        return np.sqrt(((q[:, None, :] - m[None, :, :]) ** 2).sum(-1))
    if metric == "linf":
        return np.abs(q[:, None, :] - m[None, :, :]).max(-1)
    if metric == "cosine":
        nq = np.linalg.norm(q, axis=1)
        nm = np.linalg.norm(m, axis=1)
        if np.any(nq == 0) or np.any(nm == 0):
            raise DomainError("cosine distance is undefined for a zero vector")
        return 1.0 - (q @ m.T) / np.outer(nq, nm)
    raise DomainError(f"pairwise supports cosine/euclidean/linf, not {metric!r}")


@dataclass(frozen=True)
class LshEncoder:
    """Signed random projections; ``hyperplanes`` is ``(n_bits, n_features)``."""

    n_features: int
    n_bits: int
    seed: int = 0
    hyperplanes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_features < 1 or self.n_bits < 1:
            raise DomainError("n_features and n_bits must be >= 1")
        h = np.random.default_rng(self.seed).standard_normal((self.n_bits, self.n_features))
        h.flags.writeable = False
        object.__setattr__(self, "hyperplanes", h)

    def to_dict(self) -> dict:
        return {"n_features": self.n_features, "n_bits": self.n_bits, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "LshEncoder":
        return cls(int(d["n_features"]), int(d["n_bits"]), int(d["seed"]))

    def encode(self, x) -> np.ndarray:
        """Signatures for one vector ``(n_features,)`` or a batch ``(n, n_features)``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got {x.shape[-1]}")
        return (x @ self.hyperplanes.T >= 0).astype(np.uint8)


def lsh_encode(x, enc: LshEncoder) -> np.ndarray:
    return enc.encode(x)


def hamming_matrix(query_bits, memory_bits) -> np.ndarray:
    q = kernels.pack_bits(np.atleast_2d(query_bits))
    m = kernels.pack_bits(np.atleast_2d(memory_bits))
    return kernels.hamming_scores(q, m)


def nearest(backend, memory, queries) -> np.ndarray:
    """Index of the nearest memory entry for each query (lowest index on ties).

    ``backend`` is a metric name or an :class:`LshEncoder` (TCAM+LSH path).
    """
    memory = np.atleast_2d(np.asarray(memory, dtype=float))
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if memory.shape[0] == 0:
        raise DomainError("memory is empty")
    if isinstance(backend, LshEncoder):
        d = hamming_matrix(backend.encode(queries), backend.encode(memory)).astype(float)
    elif backend == "hamming":
        d = hamming_matrix(queries.astype(np.uint8), memory.astype(np.uint8)).astype(float)
    else:
        d = pairwise(backend, queries, memory)
    return kernels.first_argmin(d)


def nn_search_baseline(backend, memory, query) -> int:
    memory = np.asarray(memory, dtype=float)
    if memory.size == 0:
        raise DomainError("memory is empty")
    return int(nearest(backend, memory, np.asarray(query, dtype=float)[None, :])[0])
