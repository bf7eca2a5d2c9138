"""MCAM array: stored words, row conductance, match-line timing and NN search."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .cell import CamConfig, ConductanceLut, build_lut, nominal_pairs, pair_conductances
from .device import VariationParams, perturb
from .errors import DomainError


@dataclass(frozen=True)
class Timing:
    """Match-line RC parameters: capacitance in fF, voltages in V."""

    c_ml: float = 10.0
    v_precharge: float = 0.8
    v_sense: float = 0.4

    def __post_init__(self):
        if not self.c_ml > 0:
            raise DomainError("c_ml must be positive")
        if not 0 < self.v_sense <= self.v_precharge:
            raise DomainError("need 0 < v_sense <= v_precharge")


def discharge_time(g_total, timing: Timing = Timing()):
    """Time (ns) for the match line to fall from precharge to the sense level.

    fF / uS is ns, so ``t = c_ml / G * ln(v_precharge / v_sense)`` needs no
    unit factor.
    """
    g = np.asarray(g_total, dtype=float)
    if np.any(~(g > 0)):
        raise DomainError("row conductance must be positive")
    t = timing.c_ml / g * math.log(timing.v_precharge / timing.v_sense)
    return float(t) if t.ndim == 0 else t


def _word(x, name="word") -> np.ndarray:
    a = np.asarray(x)
    if a.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if a.size and not np.issubdtype(a.dtype, np.integer):
        if not np.all(np.mod(a, 1) == 0):
            raise DomainError(f"{name} must hold integer states")
    return a.astype(np.int64)


def row_conductance(query, row, lut: ConductanceLut) -> float:
    """Sum of cell conductances ``lut[query_j, row_j]`` along one row."""
    q, r = _word(query, "query"), _word(row, "row")
    if q.shape != r.shape:
        raise DomainError(f"query length {q.size} != row length {r.size}")
    n = lut.num_states
    if np.any((q < 0) | (q >= n)) or np.any((r < 0) | (r >= n)):
        raise DomainError(f"states must lie in 0..{n - 1}")
    return float(kernels.lut_scores(lut.table, q[None, :], r[None, :])[0, 0])


@dataclass(frozen=True)
class SearchResult:
    winner: int
    row_conductances: np.ndarray = field(repr=False)
    discharge_times: np.ndarray = field(repr=False)

    def to_csv(self, path=None, comments: tuple[str, ...] = ()) -> str:
        buf = io.StringIO()
        for c in comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "G_T_uS", "t_ns", "winner"])
        for k, (g, t) in enumerate(zip(self.row_conductances, self.discharge_times)):
            w.writerow([k, f"{g:.9g}", f"{t:.9g}", int(k == self.winner)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


@dataclass(frozen=True)
class CamArray:
    """Stored words plus the cell model used to score them.

    ``cfg`` may be omitted when the array is driven by an imported LUT; it is
    needed for variation runs, which resample every stored device.
    """

    rows: np.ndarray
    lut: ConductanceLut
    timing: Timing = Timing()
    cfg: CamConfig | None = None

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.int64, ndmin=2)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise DomainError("array needs at least one row of equal length")
        if np.any((rows < 0) | (rows >= self.lut.num_states)):
            raise DomainError(f"stored states must lie in 0..{self.lut.num_states - 1}")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        if self.cfg is not None and self.cfg.bits != self.lut.bits:
            raise DomainError("LUT and cell config disagree on bits")

    @classmethod
    def from_config(cls, rows, cfg: CamConfig, timing: Timing = Timing()) -> "CamArray":
        return cls(rows=rows, lut=build_lut(cfg), timing=timing, cfg=cfg)

    @property
    def word_length(self) -> int:
        return self.rows.shape[1]

    def _queries(self, queries) -> np.ndarray:
        q = np.array(queries, dtype=np.int64, ndmin=2)
        if q.shape[1] != self.word_length:
            raise DomainError(f"query length {q.shape[1]} != word length {self.word_length}")
        if np.any((q < 0) | (q >= self.lut.num_states)):
            raise DomainError(f"query states must lie in 0..{self.lut.num_states - 1}")
        return q

    def scores(self, queries, cell_tables=None) -> np.ndarray:
        """Row conductances ``(n_queries, n_rows)``; ``cell_tables`` overrides the shared LUT."""
        q = self._queries(queries)
        if cell_tables is None:
            return kernels.lut_scores(self.lut.table, q, self.rows)
        return kernels.table_scores(cell_tables, q)

    def nearest(self, queries, cell_tables=None) -> np.ndarray:
        return kernels.first_argmin(self.scores(queries, cell_tables))

    def sample_cell_tables(self, var: VariationParams, rng: np.random.Generator) -> np.ndarray:
        """Per-cell conductance tables ``(rows, W, 2**B)`` with resampled device Vth."""
        if self.cfg is None:
            raise DomainError("variation runs need the cell config, not just a LUT")
        return sample_cell_tables(self.cfg, self.rows, var, rng)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"c{j}" for j in range(self.word_length)])
        w.writerows(self.rows.tolist())
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def sample_cell_tables(cfg: CamConfig, rows, var: VariationParams, rng: np.random.Generator) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    pairs = nominal_pairs(cfg)[rows]  # (R, W, 2)
    sig = np.asarray(var.sigma_for(rows), dtype=float)
    sig = np.broadcast_to(sig, rows.shape)[..., None]
    pairs = perturb(pairs, sig, rng, var.truncation)
    return pair_conductances(cfg, pairs[..., 0], pairs[..., 1])


def read_rows_csv(source) -> np.ndarray:
    """Stored words from CSV: one row per line, optional ``c0,c1,...`` header."""
    text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
    rows = []
    for lineno, rec in enumerate(csv.reader(io.StringIO(text)), 1):
        if not rec or rec[0].startswith("#"):
            continue
        if lineno == 1 and not rec[0].strip().lstrip("-").isdigit():
            continue
        try:
            rows.append([int(x) for x in rec])
        except ValueError:
            raise DomainError(f"line {lineno}: non-integer state in {rec!r}") from None
    if not rows:
        raise DomainError("no rows found")
    if len({len(r) for r in rows}) != 1:
        raise DomainError("rows have different lengths")
    return np.asarray(rows, dtype=np.int64)


def _result(g: np.ndarray, timing: Timing) -> SearchResult:
    g = np.asarray(g, dtype=float)
    winner = int(kernels.first_argmin(g[None, :])[0])
    return SearchResult(winner=winner, row_conductances=g, discharge_times=discharge_time(g, timing))


def search(array: CamArray, query) -> SearchResult:
    """Single-step NN search: the row with the least conductance (slowest match line) wins."""
    q = _word(query, "query")
    return _result(array.scores(q[None, :])[0], array.timing)


def search_with_variation(array: CamArray, query, var: VariationParams, trials: int,
                          rng: np.random.Generator | None = None) -> list[SearchResult]:
    """Repeat the search with freshly sampled device thresholds per trial."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    rng = var.rng() if rng is None else rng
    q = _word(query, "query")
    out = []
    for _ in range(trials):
        tables = array.sample_cell_tables(var, rng)
        out.append(_result(array.scores(q[None, :], tables)[0], array.timing))
    return out
