"""Two-FeFET MCAM cell: state encoding, input placement and the conductance LUT.

State ``s`` matches inputs inside the window ``(L[s-1], L[s])`` of the Vth
ladder ``L`` (state 0 has no lower bound).  The right FeFET sees the data line
and is programmed to the upper bound; the left FeFET sees the analog inverse
of the data line and is programmed to the inverse of the lower bound.  Inside
the window both devices stay off; outside it exactly one turns on.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .device import DeviceParams, VariationParams, conductance, perturb
from .errors import DomainError

# Puts the left device of the 720 mV-bounded state at 1080 mV.
DEFAULT_CENTER = 860.0

LUT_FORMAT = "mcamsim.lut/1"


def analog_inverse(v, center):
    """Reflect ``v`` about ``center``: ``2*center - v``."""
    if isinstance(v, (int, float)) and isinstance(center, (int, float)):
        return 2.0 * center - v
    return 2.0 * np.asarray(center, dtype=float) - np.asarray(v, dtype=float)


def midpoint_inputs(levels) -> tuple[float, ...]:
    """One search voltage per state, centred in the state's window.

    The open-ended bottom state sits half a spacing below the first level.
    """
    levels = [float(v) for v in levels]
    out = [levels[0] - (levels[1] - levels[0]) / 2.0]
    out += [(a + b) / 2.0 for a, b in zip(levels, levels[1:])]
    return tuple(out)


@dataclass(frozen=True)
class CamConfig:
    bits: int
    device: DeviceParams
    center: float = DEFAULT_CENTER
    dl_inputs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.bits < 1:
            raise DomainError(f"bits must be >= 1, got {self.bits}")
        if 2**self.bits != self.device.num_levels:
            raise DomainError(
                f"{self.bits}-bit cell needs {2 ** self.bits} Vth levels, device has {self.device.num_levels}"
            )
        if not self.dl_inputs:
            object.__setattr__(self, "dl_inputs", midpoint_inputs(self.device.vth_levels))
        else:
            object.__setattr__(self, "dl_inputs", tuple(float(v) for v in self.dl_inputs))
        if len(self.dl_inputs) != self.num_states:
            raise DomainError(f"need {self.num_states} data-line inputs, got {len(self.dl_inputs)}")
        lower = (-math.inf,) + self.device.vth_levels[:-1]
        for k, (v, lo, hi) in enumerate(zip(self.dl_inputs, lower, self.device.vth_levels)):
            if not lo < v < hi:
                raise DomainError(f"input {k} at {v} mV is outside its state window ({lo}, {hi})")

    @property
    def num_states(self) -> int:
        return 2**self.bits

    @classmethod
    def default(cls, bits: int = 3, **kw) -> "CamConfig":
        return cls(bits=bits, device=DeviceParams.default(bits), **kw)


def _check_state(s: int, cfg: CamConfig) -> int:
    if int(s) != s or not 0 <= s < cfg.num_states:
        raise DomainError(f"state {s!r} outside 0..{cfg.num_states - 1}")
    return int(s)


def nominal_pairs(cfg: CamConfig) -> np.ndarray:
    """Nominal (left, right) thresholds for every state, shape ``(2**B, 2)``."""
    levels = np.asarray(cfg.device.vth_levels)
    left = np.empty(cfg.num_states)
    left[0] = math.inf
    left[1:] = analog_inverse(levels[:-1], cfg.center)
    return np.stack([left, levels], axis=1)


def encode_state(s: int, cfg: CamConfig) -> tuple[float, float]:
    """Program targets ``(vth_left, vth_right)`` in mV for state ``s``.

    The lowest state has no lower bound, so its left device gets ``+inf``
    (never conducts).
    """
    s = _check_state(s, cfg)
    left, right = nominal_pairs(cfg)[s]
    return float(left), float(right)


def pair_conductances(cfg: CamConfig, vth_left, vth_right) -> np.ndarray:
    """Cell conductance for every input, for arrays of programmed pairs.

    ``vth_left``/``vth_right`` share a shape ``S``; the result has shape
    ``S + (2**B,)`` with the input state on the last axis.
    """
    v = np.asarray(cfg.dl_inputs)
    vl = np.asarray(vth_left, dtype=float)[..., None]
    vr = np.asarray(vth_right, dtype=float)[..., None]
    right = conductance(v, vr, cfg.device)
    left = conductance(analog_inverse(v, cfg.center), vl, cfg.device)
    return np.asarray(right + left)


def branch_conductances(i: int, s: int, cfg: CamConfig, vth_override=None) -> tuple[float, float]:
    """(left, right) branch conductances for input ``i`` against stored ``s``."""
    i, s = _check_state(i, cfg), _check_state(s, cfg)
    left, right = encode_state(s, cfg) if vth_override is None else vth_override
    v = cfg.dl_inputs[i]
    return (
        conductance(analog_inverse(v, cfg.center), left, cfg.device),
        conductance(v, right, cfg.device),
    )


def cell_conductance(i: int, s: int, cfg: CamConfig, vth_override=None) -> float:
    """Conductance (uS) of a cell storing ``s`` under input ``i``.

    ``vth_override`` replaces the nominal ``(left, right)`` pair, e.g. with
    sampled thresholds.
    """
    gl, gr = branch_conductances(i, s, cfg, vth_override)
    return gr + gl


@dataclass(frozen=True)
class ConductanceLut:
    """``table[input_state, stored_state]`` in uS."""

    bits: int
    table: np.ndarray = field(repr=False)
    provenance: str = "nominal"

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        n = 2**self.bits
        if t.shape != (n, n):
            raise DomainError(f"{self.bits}-bit LUT must be {n}x{n}, got {t.shape}")
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise DomainError("LUT entries must be finite and positive")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def num_states(self) -> int:
        return 2**self.bits

    def __getitem__(self, idx):
        return self.table[idx]

    def __eq__(self, other):
        if not isinstance(other, ConductanceLut):
            return NotImplemented
        return (
            self.bits == other.bits
            and self.provenance == other.provenance
            and np.array_equal(self.table, other.table)
        )

    __hash__ = None

    # -- CSV: header = stored states, one line per input state, 6 significant digits
    def to_csv(self, path=None, comments: tuple[str, ...] = ()) -> str:
        buf = io.StringIO()
        for c in (f"provenance={self.provenance}",) + tuple(comments):
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["input"] + [str(s) for s in range(self.num_states)])
        for i, row in enumerate(self.table):
            w.writerow([str(i)] + [f"{g:.6g}" for g in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "ConductanceLut":
        text = _read_source(source)
        provenance = "nominal"
        body = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key == "provenance":
                    provenance = val
                continue
            if line.strip():
                body.append(line)
        rows = list(csv.reader(body))
        if not rows or rows[0][0] != "input":
            raise DomainError("LUT CSV must start with an 'input,<stored states>' header")
        n = len(rows[0]) - 1
        bits = n.bit_length() - 1
        if n < 2 or 2**bits != n or len(rows) - 1 != n:
            raise DomainError(f"LUT CSV is not square with a power-of-two size ({len(rows) - 1}x{n})")
        if [int(c) for c in rows[0][1:]] != list(range(n)):
            raise DomainError("LUT CSV header must list stored states 0..n-1 in order")
        table = np.empty((n, n))
        for k, r in enumerate(rows[1:]):
            if int(r[0]) != k:
                raise DomainError(f"LUT CSV row {k + 1} is labelled {r[0]!r}, expected {k}")
            table[k] = [float(x) for x in r[1:]]
        return cls(bits=bits, table=table, provenance=provenance)

    def to_json(self, path=None, extra: dict | None = None) -> str:
        doc = {
            "format": LUT_FORMAT,
            "bits": self.bits,
            "units": "uS",
            "index": "table[input_state][stored_state]",
            "provenance": self.provenance,
            "table": [[float(g) for g in row] for row in self.table],
        }
        if extra:
            doc["meta"] = extra
        text = json.dumps(doc, indent=1) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source) -> "ConductanceLut":
        doc = json.loads(_read_source(source))
        if doc.get("format") != LUT_FORMAT:
            raise DomainError(f"unsupported LUT format {doc.get('format')!r}")
        return cls(bits=int(doc["bits"]), table=np.asarray(doc["table"]), provenance=doc["provenance"])


def _read_source(source) -> str:
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        return Path(source).read_text()
    return source


def build_lut(cfg: CamConfig, var: VariationParams | None = None, rng: np.random.Generator | None = None
              ) -> ConductanceLut:
    """Cell conductance for every (input, stored) pair.

    With ``var`` each stored state gets one sampled device pair, so column
    ``s`` reflects a single physical cell.
    """
    pairs = nominal_pairs(cfg)
    provenance = "nominal"
    if var is not None:
        rng = var.rng() if rng is None else rng
        sig = np.asarray(var.sigma_for(np.arange(cfg.num_states)), dtype=float)
        sig = np.broadcast_to(sig, (cfg.num_states,))[:, None]
        pairs = perturb(pairs, sig, rng, var.truncation)
        provenance = f"sampled(seed={var.seed},sigma={var.sigma})"
    per_stored = pair_conductances(cfg, pairs[:, 0], pairs[:, 1])  # [stored, input]
    return ConductanceLut(bits=cfg.bits, table=per_stored.T, provenance=provenance)


def distance_curve(lut: ConductanceLut, stored_state: int) -> np.ndarray:
    """Mean conductance at each distance ``|i - s|`` from ``stored_state``; index = distance."""
    n = lut.num_states
    if int(stored_state) != stored_state or not 0 <= stored_state < n:
        raise DomainError(f"state {stored_state!r} outside 0..{n - 1}")
    col = lut.table[:, stored_state]
    d = np.abs(np.arange(n) - stored_state)
    return np.array([col[d == k].mean() for k in range(d.max() + 1)])


def lut_derivative_profile(lut: ConductanceLut, stored_state: int) -> np.ndarray:
    """Finite differences of :func:`distance_curve`; entry ``d`` is ``G(d) - G(d-1)``, entry 0 is 0."""
    g = distance_curve(lut, stored_state)
    return np.concatenate([[0.0], np.diff(g)])


def presaturation_distances(cfg: CamConfig, stored_state: int) -> np.ndarray:
    """Distances whose conducting device is in its exponential region (0 < overdrive <= knee)."""
    s = _check_state(stored_state, cfg)
    left, right = nominal_pairs(cfg)[s]
    v = np.asarray(cfg.dl_inputs)
    over = np.maximum(v - right, analog_inverse(v, cfg.center) - left)
    d = np.abs(np.arange(cfg.num_states) - s)
    keep = (over > 0) & (over <= cfg.device.knee)
    return np.unique(d[keep])


def log_affine_fit(distances, conductances) -> tuple[float, float, float]:
    """Least-squares line through ``log10(G)`` vs distance: (slope, intercept, R^2)."""
    x = np.asarray(distances, dtype=float)
    y = np.log10(np.asarray(conductances, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)
