"""Spectral gain rules and their application to half spectra."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _accel, _kernels
from .dsp import mirror_half
from .errors import ConfigError, UsageError

__all__ = [
    "GainVariant",
    "AlphaSchedule",
    "DeltaTable",
    "alpha_of_snr",
    "delta_of_bin",
    "delta_per_bin",
    "frame_snr_db",
    "compute_gain",
    "apply_gain",
]

_TINY = 1e-300


class GainVariant(str, Enum):
    """Gain formulas. ``X`` is the frame magnitude, ``P`` its smoothed value,
    ``N`` the noise estimate, ``a`` the oversubtraction factor and ``l`` the floor.

    =========  =============================================
    basic      max(0, 1 - aN/X)
    floored    max(l, 1 - aN/X)
    v441       max(l N/X, 1 - aN/X)
    v442       max(l P/X, 1 - aN/X)
    v443       max(l N/P, 1 - aN/P)
    v444       max(l, 1 - aN/P)
    power      max(l, sqrt(1 - (aN/X)^2))
    full       floored, with a = delta(F) * alpha(SNR)
    =========  =============================================
    """

    BASIC = "basic"
    FLOORED = "floored"
    V441 = "v441"
    V442 = "v442"
    V443 = "v443"
    V444 = "v444"
    POWER = "power"
    FULL = "full"

    @property
    def code(self):
        return list(GainVariant).index(self)

    @property
    def floored(self):
        """True when ``l`` is a hard lower bound on the gain."""
        return self in (GainVariant.FLOORED, GainVariant.V444, GainVariant.POWER, GainVariant.FULL)


@dataclass(frozen=True)
class AlphaSchedule:
    """Oversubtraction factor, either fixed or piecewise linear in SNR (dB).

    The adaptive form is ``clip(intercept - slope * snr, alpha_min, alpha_max)``,
    i.e. 5 at or below -5 dB, 1 at or above 20 dB, linear in between.
    """

    mode: str = "fixed"
    alpha: float = 20.0
    intercept: float = 5.0
    slope: float = 4.0 / 20.0
    alpha_min: float = 1.0
    alpha_max: float = 5.0

    def __post_init__(self):
        if self.mode not in ("fixed", "snr"):
            raise ConfigError(f"alpha schedule mode must be 'fixed' or 'snr', got {self.mode!r}")
        if not self.alpha >= 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 <= self.alpha_min <= self.alpha_max:
            raise ConfigError("alpha_min must satisfy 0 <= alpha_min <= alpha_max")
        if self.slope < 0:
            raise ConfigError("slope must be non-negative so alpha never rises with SNR")

    @property
    def snr_lo(self):
        return (self.intercept - self.alpha_max) / self.slope

    @property
    def snr_hi(self):
        return (self.intercept - self.alpha_min) / self.slope


def alpha_of_snr(schedule, snr_db):
    """Adaptive oversubtraction factor; accepts scalars or arrays."""
    a = np.clip(schedule.intercept - schedule.slope * np.asarray(snr_db, dtype=float), schedule.alpha_min, schedule.alpha_max)
    return float(a) if a.ndim == 0 else a


@dataclass(frozen=True)
class DeltaTable:
    """Band-wise multipliers on the subtraction term.

    ``edges`` are increasing band start frequencies in Hz, the first being 0;
    band ``i`` covers ``[edges[i], edges[i+1])`` and the last band runs to
    Nyquist. DC falls in the first band.
    """

    edges: tuple = (0.0, 1000.0, 2000.0)
    factors: tuple = (1.0, 2.5, 1.5)

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        factors = tuple(float(f) for f in self.factors)
        if len(edges) != len(factors) or not edges:
            raise ConfigError("delta table needs one factor per band edge")
        if edges[0] != 0.0:
            raise ConfigError("the first delta band must start at 0 Hz")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ConfigError("delta band edges must be strictly increasing")
        if any(not f > 0 for f in factors):
            raise ConfigError("delta factors must be positive")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "factors", factors)

    @classmethod
    def parse(cls, text):
        """Parse ``"f1:d1,f2:d2,..."`` (band start Hz : factor)."""
        try:
            pairs = [item.split(":") for item in text.split(",") if item.strip()]
            edges, factors = zip(*((float(f), float(d)) for f, d in pairs))
        except ValueError as exc:
            raise ConfigError(f"cannot parse delta table {text!r}: expected 'f1:d1,f2:d2,...'") from exc
        return cls(edges, factors)


def delta_of_bin(table, bin, sample_rate, frame_len):
    if not 0 <= bin <= frame_len // 2:
        raise UsageError(f"bin {bin} outside 0..{frame_len // 2}")
    freq = bin * sample_rate / frame_len
    band = int(np.searchsorted(table.edges, freq, side="right")) - 1
    return table.factors[band]


def delta_per_bin(table, sample_rate, frame_len):
    freqs = np.arange(frame_len // 2 + 1) * sample_rate / frame_len
    idx = np.searchsorted(table.edges, freqs, side="right") - 1
    return np.asarray(table.factors)[idx]


def frame_snr_db(signal_mag, noise_mag, granularity="bin"):
    """SNR of the frame against the noise estimate, one value per bin.

    ``bin`` gives ``20 log10(X/N)`` per bin; ``frame`` gives
    ``10 log10(sum X^2 / sum N^2)`` repeated over all bins. Zeros are
    floored at 1e-300 so the result stays finite.
    """
    x = np.asarray(signal_mag, dtype=float)
    n = np.asarray(noise_mag, dtype=float)
    if granularity == "bin":
        return 20.0 * np.log10(np.maximum(x, _TINY) / np.maximum(n, _TINY))
    if granularity == "frame":
        ratio = max(float(np.sum(x * x)), _TINY) / max(float(np.sum(n * n)), _TINY)
        return np.full(x.shape, 10.0 * np.log10(ratio))
    raise ConfigError(f"SNR granularity must be 'bin' or 'frame', got {granularity!r}")


def compute_gain(variant, x_mag, p_mag, n_mag, floor=0.05, alpha=20.0):
    """Per-bin gain in [0, 1].

    ``alpha`` is a scalar or a per-bin array, and already contains any
    SNR adaptation and band factor. A bin whose denominator is zero gets
    gain ``floor``.
    """
    variant = GainVariant(variant)
    if not 0.0 <= floor <= 1.0:
        raise ConfigError(f"spectral floor must lie in [0, 1], got {floor}")
    x = np.ascontiguousarray(x_mag, dtype=float)
    p = np.ascontiguousarray(p_mag, dtype=float)
    n = np.ascontiguousarray(n_mag, dtype=float)
    if not x.shape == p.shape == n.shape or x.ndim != 1:
        raise UsageError("magnitude arrays must be 1-D and of equal length")
    a = np.ascontiguousarray(np.broadcast_to(np.asarray(alpha, dtype=float), x.shape))
    kernel = _kernels.gain_numba if _accel.USE_NUMBA else _kernels.gain_numpy
    return kernel(variant.code, x, p, n, float(floor), a)


def apply_gain(spectrum, gains):
    """Scale bins 0..N/2 by real gains and rebuild the upper half by symmetry.

    Returns a full length-N spectrum. Phases are untouched wherever the gain
    is positive.
    """
    X = np.asarray(spectrum, dtype=np.complex128)
    g = np.asarray(gains, dtype=float)
    n = X.shape[-1]
    if g.shape != (n // 2 + 1,):
        raise UsageError(f"expected {n // 2 + 1} gains for an {n}-point spectrum, got shape {g.shape}")
    return mirror_half(X[: n // 2 + 1] * g, n)
