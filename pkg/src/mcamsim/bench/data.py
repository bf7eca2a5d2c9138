"""Dataset loading, train/test splitting and uniform quantization."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import DatasetError, DomainError

BUILTIN = {
    "iris": "iris.csv",
    "wine": "wine.csv",
    "breast_cancer": "breast_cancer.csv",
    "wine_quality": "winequality_red.csv",
}
DATA_DIR_ENV = "MCAMSIM_DATA_DIR"


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    name: str = "dataset"
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels)
        if x.ndim != 2 or x.shape[1] < 1:
            raise DatasetError(f"{self.name}: features must be a (samples, features) matrix")
        if y.shape != (x.shape[0],):
            raise DatasetError(f"{self.name}: {y.shape[0]} labels for {x.shape[0]} samples")
        if not np.all(np.isfinite(x)):
            raise DatasetError(f"{self.name}: features contain missing or non-finite values")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    def subset(self, idx, suffix: str = "") -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx], self.name + suffix, self.feature_names)

    def feature_ranges(self) -> np.ndarray:
        """Per-feature ``(min, max)`` as an ``(N, 2)`` array."""
        return np.stack([self.features.min(axis=0), self.features.max(axis=0)], axis=1)


def _parse_label(v: str):
    try:
        f = float(v)
    except ValueError:
        return v
    return int(f) if f.is_integer() else f


def load_csv(path, label_column: str | int = "label", name: str | None = None,
             delimiter: str | None = None) -> Dataset:
    """Read a headed CSV with numeric features and one label column.

    ``label_column`` is a header name or a column index (negative counts from
    the end).  The delimiter is sniffed between ``,`` and ``;`` unless given.
    """
    path = Path(path)
    name = name or path.stem
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise DatasetError(f"{path}: file is empty")
    if delimiter is None:
        delimiter = ";" if lines[0].count(";") > lines[0].count(",") else ","
    rows = list(csv.reader(lines, delimiter=delimiter))
    header = [h.strip().strip('"') for h in rows[0]]
    if len(rows) < 2:
        raise DatasetError(f"{path}: no data rows after the header")
    if isinstance(label_column, int):
        lc = label_column % len(header)
    else:
        if label_column not in header:
            raise DatasetError(f"{path}: label column {label_column!r} not in header {header}")
        lc = header.index(label_column)
    feat_cols = [k for k in range(len(header)) if k != lc]
    if not feat_cols:
        raise DatasetError(f"{path}: no feature columns")
    x = np.empty((len(rows) - 1, len(feat_cols)))
    labels = []
    for r, rec in enumerate(rows[1:], start=2):
        if len(rec) != len(header):
            raise DatasetError(f"{path}: line {r} has {len(rec)} fields, header has {len(header)}")
        lab = rec[lc].strip()
        if lab == "":
            raise DatasetError(f"{path}: line {r} is missing its label")
        labels.append(_parse_label(lab))
        for k, c in enumerate(feat_cols):
            cell = rec[c].strip()
            try:
                val = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}: line {r}, column {header[c]!r}: {cell!r} is not numeric"
                ) from None
            if not math.isfinite(val):
                raise DatasetError(f"{path}: line {r}, column {header[c]!r}: missing value")
            x[r - 2, k] = val
    return Dataset(x, np.asarray(labels), name, tuple(header[c] for c in feat_cols))


def builtin_path(name: str) -> Path:
    """Location of a named dataset: ``$MCAMSIM_DATA_DIR`` first, then the package data."""
    if name not in BUILTIN:
        raise DatasetError(f"unknown dataset {name!r}; known: {', '.join(BUILTIN)}")
    fname = BUILTIN[name]
    env = os.environ.get(DATA_DIR_ENV)
    if env and (Path(env) / fname).exists():
        return Path(env) / fname
    p = Path(str(resources.files("mcamsim") / "data" / fname))
    if not p.exists():
        raise DatasetError(
            f"dataset {name!r} not found; place {fname} in ${DATA_DIR_ENV} or src/mcamsim/data"
        )
    return p


def load_builtin(name: str) -> Dataset:
    label = "quality" if name == "wine_quality" else "label"
    return load_csv(builtin_path(name), label_column=label, name=name)


def split(ds: Dataset, train_frac: float = 0.8, seed: int = 0, stratify: bool = False
          ) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split; both halves come out in shuffled order."""
    if not 0 < train_frac < 1:
        raise DomainError("train_frac must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    if stratify:
        train_idx = []
        for c in ds.classes:
            idx = np.flatnonzero(ds.labels == c)
            rng.shuffle(idx)
            train_idx.extend(idx[: int(round(train_frac * idx.size))])
        train_idx = rng.permutation(np.asarray(train_idx, dtype=int))
        rest = np.setdiff1d(np.arange(ds.n_samples), train_idx)
        test_idx = rng.permutation(rest)
    else:
        perm = rng.permutation(ds.n_samples)
        n_train = int(round(train_frac * ds.n_samples))
        train_idx, test_idx = perm[:n_train], perm[n_train:]
    return ds.subset(train_idx, "[train]"), ds.subset(test_idx, "[test]")


def quantize(x, ranges, bits: int) -> np.ndarray:
    """Uniform per-feature quantization to ``2**bits`` states.

    ``ranges`` is ``(N, 2)`` of (min, max); values outside clamp to the end
    bins and the maximum itself lands in the top bin.  Works on a single
    vector or a batch.
    """
    if bits < 1:
        raise DomainError("bits must be >= 1")
    x = np.asarray(x, dtype=float)
    r = np.asarray(ranges, dtype=float)
    lo, hi = r[:, 0], r[:, 1]
    n = 2**bits
    width = hi - lo
    safe = np.where(width > 0, width, 1.0)
    scaled = np.where(width > 0, (x - lo) / safe, np.where(x > lo, 1.0, 0.0))
    return np.clip(np.floor(scaled * n), 0, n - 1).astype(np.int64)
