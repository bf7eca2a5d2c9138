"""Accuracy versus device Vth variation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cell import CamConfig
from ..device import VariationParams
from ..errors import DomainError
from .classify import MemorySearch, cam_config
from .data import Dataset
from .fewshot import EpisodeSpec, sample_episodes


class ClassifyWorkload:
    """1-NN classification over one or more (train, test) pairs; accuracy is their mean."""

    def __init__(self, pairs: list[tuple[Dataset, Dataset]], bits: int = 3, cfg: CamConfig | None = None):
        if not pairs:
            raise DomainError("workload needs at least one dataset")
        self.names = [tr.name.removesuffix("[train]") for tr, _ in pairs]
        self._jobs = [(MemorySearch(tr.features, f"mcam{bits}", cfg=cfg), tr.labels, te)
                      for tr, te in pairs]

    def accuracy(self, var: VariationParams | None = None, rng: np.random.Generator | None = None) -> float:
        accs = []
        for ms, labels, te in self._jobs:
            pred = labels[ms.nearest(te.features, var=var, rng=rng)]
            accs.append(100.0 * float(np.mean(pred == te.labels)))
        return float(np.mean(accs))


class FewShotWorkload:
    """A fixed set of episodes (drawn once from ``episode_seed``) searched by an MCAM."""

    def __init__(self, features_by_class: dict, spec: EpisodeSpec, episode_seed: int = 0,
                 bits: int = 3, cfg: CamConfig | None = None):
        eps = sample_episodes(features_by_class, spec, np.random.default_rng(episode_seed))
        cfg = cam_config(bits, cfg)
        self._jobs = [(MemorySearch(e.support, f"mcam{bits}", cfg=cfg), e) for e in eps]

    def accuracy(self, var: VariationParams | None = None, rng: np.random.Generator | None = None) -> float:
        accs = []
        for ms, e in self._jobs:
            pred = e.support_labels[ms.nearest(e.queries, var=var, rng=rng)]
            accs.append(100.0 * float(np.mean(pred == e.query_labels)))
        return float(np.mean(accs))


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    mean: float
    std: float
    trials: int
    nominal: float


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Per-trial generator; the same trial index gets the same stream at every sigma."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def variation_sweep(workload, sigmas, trials: int = 50, seed: int = 0,
                    truncation: float | None = None) -> list[SweepRow]:
    """Mean and std of workload accuracy over ``trials`` device samples per sigma (mV).

    Trials share random streams across sigmas (common random numbers), so
    the curve is smooth in sigma.  ``sigma == 0`` returns the nominal
    accuracy without sampling.
    """
    sigmas = [float(s) for s in sigmas]
    if not sigmas:
        raise DomainError("need at least one sigma")
    if any(not s >= 0 for s in sigmas):
        raise DomainError("sigmas must be >= 0")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    nominal = workload.accuracy()
    rows = []
    for s in sigmas:
        if s == 0:
            rows.append(SweepRow(s, nominal, 0.0, trials, nominal))
            continue
        var = VariationParams(s, truncation=truncation)
        accs = [workload.accuracy(var, trial_rng(seed, t)) for t in range(trials)]
        rows.append(SweepRow(s, float(np.mean(accs)), float(np.std(accs)), trials, nominal))
    return rows
