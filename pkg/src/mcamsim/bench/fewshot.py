"""N-way K-shot episodes on precomputed or synthetic feature vectors."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..cell import CamConfig
from ..device import VariationParams
from ..errors import DatasetError, DomainError
from .classify import MemorySearch, parse_backend

AGGREGATIONS = ("rows", "prototype")


@dataclass(frozen=True)
class EpisodeSpec:
    """``n_way`` classes per episode, ``k_shot`` support vectors per class.

    ``aggregation="rows"`` stores every support vector as its own row;
    ``"prototype"`` stores one class-mean row per class.
    """

    n_way: int = 5
    k_shot: int = 1
    n_query: int = 5
    episodes: int = 100
    feature_dim: int = 64
    aggregation: str = "rows"

    def __post_init__(self):
        if self.n_way < 2:
            raise DomainError("n_way must be >= 2")
        if self.k_shot < 1:
            raise DomainError("k_shot must be >= 1")
        if self.n_query < 1 or self.episodes < 1 or self.feature_dim < 1:
            raise DomainError("n_query, episodes and feature_dim must be >= 1")
        if self.aggregation not in AGGREGATIONS:
            raise DomainError(f"aggregation must be one of {AGGREGATIONS}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian clusters: class centres ~ N(0, I), samples ~ centre + N(0, spread^2 I)."""

    n_classes: int = 100
    per_class: int = 20
    feature_dim: int = 64
    spread: float = 0.8
    seed: int = 1234


def synthetic_features(spec: SyntheticSpec = SyntheticSpec()) -> dict[int, np.ndarray]:
    """Class id -> ``(per_class, feature_dim)`` array, fully determined by ``spec.seed``.

    ``spread`` is the within-class std relative to the unit spread of the
    class centres, so it sets the overlap between classes.
    """
    if spec.n_classes < 2 or spec.per_class < 1 or spec.feature_dim < 1 or spec.spread < 0:
        raise DomainError("invalid synthetic feature spec")
    rng = np.random.default_rng(spec.seed)
    centres = rng.standard_normal((spec.n_classes, spec.feature_dim))
    noise = rng.standard_normal((spec.n_classes, spec.per_class, spec.feature_dim))
    x = centres[:, None, :] + spec.spread * noise
    return {c: x[c] for c in range(spec.n_classes)}


def load_features(path, class_column: str | int = 0) -> dict:
    """Read a feature file: one class-id column plus feature columns, with a header."""
    path = Path(path)
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2:
        raise DatasetError(f"{path}: need a header and at least one feature row")
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    header = [h.strip() for h in rows[0]]
    if isinstance(class_column, int):
        cc = class_column % len(header)
    elif class_column in header:
        cc = header.index(class_column)
    else:
        raise DatasetError(f"{path}: class column {class_column!r} not in header")
    groups: dict = {}
    for r, rec in enumerate(rows[1:], start=2):
        if len(rec) != len(header):
            raise DatasetError(f"{path}: line {r} has {len(rec)} fields, header has {len(header)}")
        label = rec[cc].strip()
        try:
            vec = [float(v) for k, v in enumerate(rec) if k != cc]
        except ValueError:
            raise DatasetError(f"{path}: line {r} has a non-numeric feature") from None
        if not np.all(np.isfinite(vec)):
            raise DatasetError(f"{path}: line {r} has a missing value")
        key = int(label) if label.lstrip("-").isdigit() else label
        groups.setdefault(key, []).append(vec)
    return {k: np.asarray(v) for k, v in groups.items()}


def _check_pool(features_by_class: dict, spec: EpisodeSpec) -> list:
    classes = sorted(features_by_class)
    if len(classes) < spec.n_way:
        raise DatasetError(f"{len(classes)} classes available, episode needs {spec.n_way}")
    need = spec.k_shot + spec.n_query
    for c in classes:
        x = np.asarray(features_by_class[c])
        if x.ndim != 2 or x.shape[0] < need:
            raise DatasetError(f"class {c!r} has {x.shape[0] if x.ndim == 2 else 0} samples, "
                               f"needs k_shot + n_query = {need}")
        if x.shape[1] != spec.feature_dim:
            raise DatasetError(f"class {c!r} has {x.shape[1]} features, spec says {spec.feature_dim}")
    return classes


@dataclass(frozen=True)
class Episode:
    support: np.ndarray
    support_labels: np.ndarray
    queries: np.ndarray
    query_labels: np.ndarray


def sample_episodes(features_by_class: dict, spec: EpisodeSpec, rng: np.random.Generator) -> list[Episode]:
    """Draw ``spec.episodes`` episodes; sampling depends only on ``rng``, not the backend."""
    classes = _check_pool(features_by_class, spec)
    out = []
    for _ in range(spec.episodes):
        picked = rng.choice(len(classes), size=spec.n_way, replace=False)
        sup, sup_y, qry, qry_y = [], [], [], []
        for way, ci in enumerate(picked):
            x = np.asarray(features_by_class[classes[ci]], dtype=float)
            idx = rng.choice(x.shape[0], size=spec.k_shot + spec.n_query, replace=False)
            s, q = x[idx[: spec.k_shot]], x[idx[spec.k_shot:]]
            if spec.aggregation == "prototype":
                s = s.mean(axis=0, keepdims=True)
            sup.append(s)
            sup_y += [way] * s.shape[0]
            qry.append(q)
            qry_y += [way] * q.shape[0]
        out.append(Episode(np.vstack(sup), np.asarray(sup_y), np.vstack(qry), np.asarray(qry_y)))
    return out


def episode_accuracy(ep: Episode, backend, *, cfg: CamConfig | None = None, lsh_seed: int = 0,
                     var: VariationParams | None = None, rng: np.random.Generator | None = None) -> float:
    """Fraction (%) of the episode's queries labelled correctly.

    The support set plays the training split: MCAM quantization ranges and
    any input scaling are fitted on it alone.
    """
    ms = MemorySearch(ep.support, backend, cfg=cfg, lsh_seed=lsh_seed)
    pred = ep.support_labels[ms.nearest(ep.queries, var=var, rng=rng)]
    return 100.0 * float(np.mean(pred == ep.query_labels))


def run_episode(features_by_class: dict, spec: EpisodeSpec, backend, rng: np.random.Generator | int = 0,
                *, cfg: CamConfig | None = None, lsh_seed: int = 0,
                var: VariationParams | None = None, var_rng: np.random.Generator | None = None) -> float:
    """Mean accuracy (%) over all queries of ``spec.episodes`` episodes.

    Episodes are drawn from ``rng`` (a Generator or seed), so two backends
    given the same seed see exactly the same episodes.
    """
    parse_backend(backend)
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    eps = sample_episodes(features_by_class, spec, rng)
    return float(np.mean([episode_accuracy(e, backend, cfg=cfg, lsh_seed=lsh_seed, var=var, rng=var_rng)
                          for e in eps]))
