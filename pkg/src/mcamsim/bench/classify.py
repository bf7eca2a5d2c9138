"""1-NN classification with pluggable distance backends."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..array import CamArray
from ..baselines import LshEncoder, nearest
from ..cell import CamConfig
from ..device import VariationParams
from ..errors import DomainError
from .data import Dataset, quantize

FP_METRICS = ("cosine", "euclidean", "linf")
BACKEND_NAMES = ("mcam<B>", "tcam_lsh", *FP_METRICS)
DEFAULT_BACKENDS = ("mcam3", "mcam2", "tcam_lsh", "cosine", "euclidean")


@dataclass(frozen=True)
class Backend:
    kind: str  # "mcam" | "tcam_lsh" | one of FP_METRICS
    bits: int = 0
    n_bits: int | None = None  # LSH signature length; None = feature count

    @property
    def name(self) -> str:
        if self.kind == "mcam":
            return f"mcam{self.bits}"
        if self.kind == "tcam_lsh" and self.n_bits is not None:
            return f"tcam_lsh{self.n_bits}"
        return self.kind


def parse_backend(name: str | Backend) -> Backend:
    """``mcam3``, ``mcam2``, ``tcam_lsh``, ``tcam_lsh256``, ``cosine``, ``euclidean``, ``linf``."""
    if isinstance(name, Backend):
        return name
    key = name.strip().lower()
    m = re.fullmatch(r"mcam\(?(\d+)\)?", key)
    if m:
        bits = int(m.group(1))
        if not 1 <= bits <= 8:
            raise DomainError(f"mcam bits must be 1..8, got {bits}")
        return Backend("mcam", bits=bits)
    m = re.fullmatch(r"tcam_lsh\(?(\d*)\)?", key)
    if m:
        return Backend("tcam_lsh", n_bits=int(m.group(1)) if m.group(1) else None)
    if key in FP_METRICS:
        return Backend(key)
    raise DomainError(f"unknown backend {name!r}; valid: {', '.join(BACKEND_NAMES)}")


def cam_config(bits: int, base: CamConfig | None = None) -> CamConfig:
    """Cell config for ``bits``: ``base`` if it matches, else the default ladder."""
    if base is not None and base.bits == bits:
        return base
    if bits <= 3:
        return CamConfig.default(bits)
    from ..device import DeviceParams

    spacing = 640.0 / (2**bits - 1)
    return CamConfig(bits=bits, device=DeviceParams.uniform(bits, 560.0, spacing))


class MemorySearch:
    """A memory of labelled vectors searched by one backend.

    Everything is fitted on the stored vectors only: the MCAM quantizer and
    the FP metrics share the same per-feature min-max ranges, while LSH gets
    z-scored (zero-centred) inputs because sign projections measure angles
    about the origin.
    """

    def __init__(self, memory: np.ndarray, backend, *, cfg: CamConfig | None = None,
                 lsh_seed: int = 0, ranges: np.ndarray | None = None):
        self.backend = parse_backend(backend)
        self.memory = np.asarray(memory, dtype=float)
        b = self.backend
        lo_hi = ranges if ranges is not None else np.stack(
            [self.memory.min(axis=0), self.memory.max(axis=0)], axis=1)
        self.ranges = np.asarray(lo_hi, dtype=float)
        if b.kind == "mcam":
            self.cfg = cam_config(b.bits, cfg)
            self.array = CamArray.from_config(quantize(self.memory, self.ranges, b.bits), self.cfg)
        else:
            if b.kind == "tcam_lsh":
                sd = self.memory.std(axis=0)
                self._scale = (self.memory.mean(axis=0), np.where(sd > 0, sd, 1.0))
            else:
                width = self.ranges[:, 1] - self.ranges[:, 0]
                self._scale = (self.ranges[:, 0], np.where(width > 0, width, 1.0))
            self._stored = self._scaled(self.memory)
            if b.kind == "tcam_lsh":
                n_bits = b.n_bits or self.memory.shape[1]
                self.encoder = LshEncoder(self.memory.shape[1], n_bits, lsh_seed)

    def _scaled(self, x):
        mu, sd = self._scale
        return (np.asarray(x, dtype=float) - mu) / sd

    def query_states(self, queries) -> np.ndarray:
        return quantize(queries, self.ranges, self.backend.bits)

    def nearest(self, queries, var: VariationParams | None = None,
                rng: np.random.Generator | None = None, cell_tables=None) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        b = self.backend
        if b.kind == "mcam":
            if var is not None and cell_tables is None:
                cell_tables = self.array.sample_cell_tables(var, rng if rng is not None else var.rng())
            return self.array.nearest(self.query_states(queries), cell_tables)
        if var is not None or cell_tables is not None:
            raise DomainError(f"device variation applies to mcam backends, not {b.name}")
        q = self._scaled(queries)
        if b.kind == "tcam_lsh":
            return nearest(self.encoder, self._stored, q)
        return nearest(b.kind, self._stored, q)


def predict(train: Dataset, queries: np.ndarray, backend, **kw) -> np.ndarray:
    var = kw.pop("var", None)
    rng = kw.pop("rng", None)
    ms = MemorySearch(train.features, backend, **kw)
    return train.labels[ms.nearest(queries, var=var, rng=rng)]


def accuracy(pred, truth) -> float:
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.size == 0:
        raise DomainError("no predictions to score")
    return 100.0 * float(np.mean(pred == truth))


def nn_classify(train: Dataset, test: Dataset, backend, *, cfg: CamConfig | None = None,
                lsh_seed: int = 0, var: VariationParams | None = None,
                rng: np.random.Generator | None = None) -> float:
    """Percentage of test samples whose nearest training sample has the right label."""
    if train.n_features != test.n_features:
        raise DomainError(f"train has {train.n_features} features, test has {test.n_features}")
    pred = predict(train, test.features, backend, cfg=cfg, lsh_seed=lsh_seed, var=var, rng=rng)
    return accuracy(pred, test.labels)
