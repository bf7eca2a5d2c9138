"""Phenomenological FeFET model: multi-level Vth ladder, transfer curve, D2D variation.

With overdrive ``x = v_gate - vth`` the transfer curve is::

    g = g_off                                   x <= 0
      = g_off * 10 ** (x / S)                   0 < x <= x_knee      (subthreshold)
      = g_on - (g_on - g_knee) * (1 - u) ** 2   x_knee < x < x_sat   (above threshold)
      = g_on                                    x >= x_sat

where ``x_sat = overdrive_sat`` and ``u = (x - x_knee) / (x_sat - x_knee)``.
The knee is placed so value and slope are continuous there; the quadratic
arrives at g_on with zero slope.  ``overdrive_sat == S * log10(g_on/g_off)``
collapses the quadratic and leaves a plain clipped exponential.

Voltages are in mV, conductances in uS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError

# 3-bit ladder: 80 mV steps, S3's upper bound sits at 720 mV and the next level at 800 mV.
DEFAULT_VTH_LEVELS_3BIT = (560.0, 640.0, 720.0, 800.0, 880.0, 960.0, 1040.0, 1120.0)
DEFAULT_SUBTHRESHOLD_SLOPE = 90.0  # mV/dec
DEFAULT_G_ON = 3.0  # uS, on/off = 1e5
DEFAULT_G_OFF = 3e-5  # uS
DEFAULT_OVERDRIVE_SAT = 6000.0  # mV; puts the knee just past 3.5 level spacings


@dataclass(frozen=True)
class DeviceParams:
    """Immutable FeFET parameters.

    ``vth_levels`` holds one programmable threshold per level, strictly
    increasing.  ``num_levels`` must be a power of two.
    """

    vth_levels: tuple[float, ...] = DEFAULT_VTH_LEVELS_3BIT
    subthreshold_slope: float = DEFAULT_SUBTHRESHOLD_SLOPE
    g_on: float = DEFAULT_G_ON
    g_off: float = DEFAULT_G_OFF
    overdrive_sat: float = DEFAULT_OVERDRIVE_SAT

    def __post_init__(self):
        levels = tuple(float(v) for v in self.vth_levels)
        object.__setattr__(self, "vth_levels", levels)
        n = len(levels)
        if n < 2 or n & (n - 1):
            raise DomainError(f"number of Vth levels must be a power of two >= 2, got {n}")
        if not all(math.isfinite(v) for v in levels):
            raise DomainError("Vth levels must be finite")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise DomainError("Vth levels must be strictly increasing")
        if not self.subthreshold_slope > 0:
            raise DomainError("subthreshold_slope must be positive")
        if not 0 < self.g_off < self.g_on:
            raise DomainError("need 0 < g_off < g_on")
        lo, hi = self.exponential_span, 2 * self._decade * (self.g_on / self.g_off - 1)
        if not lo - 1e-9 <= self.overdrive_sat <= hi:
            raise DomainError(
                f"overdrive_sat must lie in [{lo:.6g}, {hi:.6g}] mV for these slope/on-off values"
            )

    @property
    def num_levels(self) -> int:
        return len(self.vth_levels)

    @property
    def bits(self) -> int:
        return self.num_levels.bit_length() - 1

    @property
    def _decade(self) -> float:
        return self.subthreshold_slope / math.log(10.0)

    @property
    def exponential_span(self) -> float:
        """Overdrive (mV) at which an unbroken exponential would reach g_on."""
        return self.subthreshold_slope * math.log10(self.g_on / self.g_off)

    @cached_property
    def knee(self) -> float:
        """Overdrive (mV) where the subthreshold exponential hands over to the quadratic."""
        span = self.exponential_span
        if self.overdrive_sat <= span:
            return span
        ratio = self.g_on / self.g_off

        def gap(x):
            return x + 2 * self._decade * (ratio * 10 ** (-x / self.subthreshold_slope) - 1) - self.overdrive_sat

        if gap(0.0) <= 0:
            return 0.0
        return brentq(gap, 0.0, span, xtol=1e-12, rtol=4 * np.finfo(float).eps)

    @cached_property
    def g_knee(self) -> float:
        return min(self.g_off * 10 ** (self.knee / self.subthreshold_slope), self.g_on)

    @classmethod
    def default(cls, bits: int = 3) -> "DeviceParams":
        """Default ladder for 1..3 bit cells.

        Fewer bits merge neighbouring 3-bit states, i.e. keep every
        ``2**(3-bits)``-th level counted down from the top.
        """
        if bits not in (1, 2, 3):
            raise DomainError(f"default ladder exists for 1..3 bits, got {bits}")
        step = 2 ** (3 - bits)
        levels = DEFAULT_VTH_LEVELS_3BIT[step - 1 :: step]
        return cls(vth_levels=levels)

    @classmethod
    def uniform(cls, bits: int, first: float, spacing: float, **kw) -> "DeviceParams":
        if bits < 1:
            raise DomainError("bits must be >= 1")
        levels = tuple(first + spacing * k for k in range(2**bits))
        return cls(vth_levels=levels, **kw)


@dataclass(frozen=True)
class VariationParams:
    """Gaussian device-to-device Vth variation.

    ``sigma`` is either one value (mV) for all levels or one value per level.
    ``truncation`` (in sigmas) redraws samples beyond +-truncation*sigma.
    """

    sigma: float | tuple[float, ...] = 0.0
    truncation: float | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.sigma, (list, tuple, np.ndarray)):
            object.__setattr__(self, "sigma", tuple(float(s) for s in self.sigma))
            sig = self.sigma
        else:
            sig = (float(self.sigma),)
        if any(not s >= 0 for s in sig):
            raise DomainError("sigma must be >= 0")
        if self.truncation is not None and not self.truncation > 0:
            raise DomainError("truncation must be positive")

    def sigma_for(self, state_index):
        if isinstance(self.sigma, tuple):
            return np.asarray(self.sigma)[state_index]
        return self.sigma

    @property
    def max_sigma(self) -> float:
        return max(self.sigma) if isinstance(self.sigma, tuple) else float(self.sigma)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _check_state(state_index, params: DeviceParams):
    s = np.asarray(state_index)
    if not np.issubdtype(s.dtype, np.integer):
        if not np.all(np.equal(np.mod(s, 1), 0)):
            raise DomainError(f"state index must be an integer, got {state_index!r}")
        s = s.astype(np.int64)
    if np.any(s < 0) or np.any(s >= params.num_levels):
        raise DomainError(f"state index {state_index!r} outside 0..{params.num_levels - 1}")
    return s


def nominal_vth(state_index, params: DeviceParams):
    """Nominal threshold (mV) of ``state_index``; accepts scalars or arrays."""
    s = _check_state(state_index, params)
    out = np.asarray(params.vth_levels)[s]
    return float(out) if out.ndim == 0 else out


def conductance(v_gate, vth, params: DeviceParams):
    """Channel conductance (uS) at gate voltage ``v_gate`` for threshold ``vth``.

    Broadcasts over array inputs.  ``vth = +inf`` models a device that never
    turns on.
    """
    v = np.asarray(v_gate, dtype=float)
    t = np.asarray(vth, dtype=float)
    with np.errstate(invalid="ignore"):
        over = v - t
    over = np.where(np.isnan(over), -np.inf, over)
    g = transfer(over, params)
    return float(g) if g.ndim == 0 else g


def transfer(overdrive, params: DeviceParams) -> np.ndarray:
    """Conductance as a function of overdrive ``v_gate - vth`` (mV)."""
    x = np.asarray(overdrive, dtype=float)
    knee, sat = params.knee, params.overdrive_sat
    sub = params.g_off * np.power(10.0, np.clip(x, 0.0, knee) / params.subthreshold_slope)
    if sat <= knee:
        return np.where(x >= sat, params.g_on, sub)
    u = np.clip((x - knee) / (sat - knee), 0.0, 1.0)
    above = params.g_on - (params.g_on - params.g_knee) * (1.0 - u) ** 2
    return np.where(x > knee, above, sub)


def sample_vth(state_index, params: DeviceParams, var: VariationParams, rng: np.random.Generator,
               size=None):
    """Nominal Vth plus one Gaussian draw per device.

    With ``sigma == 0`` the nominal value is returned unchanged (no draw is
    consumed).  ``size`` follows numpy conventions and broadcasts with
    ``state_index``.
    """
    s = _check_state(state_index, params)
    nominal = np.asarray(params.vth_levels)[s]
    if size is not None:
        size = (size,) if np.isscalar(size) else tuple(size)
        shape = np.broadcast_shapes(size, nominal.shape)
    else:
        shape = nominal.shape
    nominal = np.broadcast_to(nominal, shape)
    sigma = np.broadcast_to(np.asarray(var.sigma_for(s), dtype=float), shape)
    out = _gaussian_offsets(sigma, var.truncation, rng) + nominal
    return float(out) if out.ndim == 0 else out


def _gaussian_offsets(sigma: np.ndarray, truncation: float | None, rng: np.random.Generator):
    sigma = np.asarray(sigma, dtype=float)
    if not np.any(sigma > 0):
        return np.zeros(sigma.shape)
    z = rng.standard_normal(sigma.shape)
    if truncation is not None:
        bad = np.abs(z) > truncation
        while np.any(bad):
            z[bad] = rng.standard_normal(int(bad.sum()))
            bad = np.abs(z) > truncation
    return z * sigma


def perturb(vth, sigma, rng: np.random.Generator, truncation: float | None = None):
    """Add Gaussian variation to an array of thresholds; infinite entries stay put."""
    vth = np.asarray(vth, dtype=float)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), vth.shape)
    if not np.any(sigma > 0):
        return vth.copy()
    off = _gaussian_offsets(sigma, truncation, rng)
    return np.where(np.isfinite(vth), vth + off, vth)


# -- flat key=value configuration -------------------------------------------------

DEVICE_KEYS = {
    "vth_levels_mv": "comma separated thresholds, strictly increasing",
    "vth_first_mv": "lowest threshold (with vth_spacing_mv and bits)",
    "vth_spacing_mv": "uniform ladder spacing",
    "bits": "bits per cell (ladder length 2**bits)",
    "subthreshold_slope_mv_per_dec": "exponential-region slope",
    "g_on_us": "saturated conductance",
    "g_off_us": "floor conductance",
    "overdrive_sat_mv": "overdrive at which g_on is reached",
}


def read_kv_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = value
    return out


def device_from_mapping(cfg: Mapping[str, str], base: DeviceParams | None = None) -> DeviceParams:
    bits = int(cfg["bits"]) if "bits" in cfg else None
    if base is None:
        base = DeviceParams.default(bits if bits in (1, 2, 3) else 3)
    kw = {}
    if "vth_levels_mv" in cfg:
        kw["vth_levels"] = tuple(float(v) for v in cfg["vth_levels_mv"].split(","))
    elif "vth_first_mv" in cfg or "vth_spacing_mv" in cfg:
        n = 2 ** (bits if bits is not None else base.bits)
        first = float(cfg.get("vth_first_mv", base.vth_levels[0]))
        spacing = float(cfg.get("vth_spacing_mv", base.vth_levels[1] - base.vth_levels[0]))
        kw["vth_levels"] = tuple(first + spacing * k for k in range(n))
    elif bits is not None and bits != base.bits:
        raise DomainError(f"bits={bits} has no default ladder; give vth_levels_mv or vth_first_mv")
    if "subthreshold_slope_mv_per_dec" in cfg:
        kw["subthreshold_slope"] = float(cfg["subthreshold_slope_mv_per_dec"])
    if "g_on_us" in cfg:
        kw["g_on"] = float(cfg["g_on_us"])
    if "g_off_us" in cfg:
        kw["g_off"] = float(cfg["g_off_us"])
    if "overdrive_sat_mv" in cfg:
        kw["overdrive_sat"] = float(cfg["overdrive_sat_mv"])
    return replace(base, **kw)


def load_device_config(path: str | Path, base: DeviceParams | None = None) -> DeviceParams:
    cfg = read_kv_file(path)
    return device_from_mapping({k: v for k, v in cfg.items() if k in DEVICE_KEYS}, base)
