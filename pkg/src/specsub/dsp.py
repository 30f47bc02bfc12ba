"""FFT, analysis/synthesis windows and conjugate-symmetry helpers.

Spectra are plain ``complex128`` numpy arrays. The forward transform is
unscaled and the inverse carries the ``1/N`` factor.
"""
import numpy as np

from . import _accel, _kernels
from .errors import ColaError, ConfigError

__all__ = [
    "WINDOW_KINDS",
    "is_power_of_two",
    "fft_forward",
    "fft_inverse",
    "dft_oracle",
    "make_window",
    "overlap_sums",
    "cola_constant",
    "mirror_half",
    "is_conjugate_symmetric",
]

WINDOW_KINDS = ("sqrt-hamming-paper", "sqrt-hanning", "sqrt-gaussian", "sqrt-blackman-harris-3")
_WINDOW_ALIASES = {"sqrt-bh3": "sqrt-blackman-harris-3", "sqrt-hann": "sqrt-hanning"}

# 3-term Blackman-Harris (-67 dB) coefficients
_BH3 = (0.42323, 0.49755, 0.07922)
_GAUSS_STD = 0.4  # fraction of the half-length


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def _check_length(n):
    if not is_power_of_two(n):
        raise ConfigError(f"FFT length must be a power of two, got {n}")


def _transform(x):
    n = x.shape[-1]
    _check_length(n)
    rev, tw = _kernels.fft_tables(n)
    rows = np.ascontiguousarray(x.reshape(-1, n), dtype=np.complex128).copy()
    if _accel.USE_NUMBA:
        _kernels.fft_rows_numba(rows, rev, tw)
    else:
        _kernels.fft_rows_numpy(rows, rev, tw)
    return rows.reshape(x.shape)


def fft_forward(frame):
    """N-point DFT of ``frame`` (last axis), N a power of two.

    A 2-D input is transformed row by row.
    """
    x = np.asarray(frame)
    if x.ndim == 0:
        raise ConfigError("FFT input must be at least one-dimensional")
    return _transform(x)


def fft_inverse(spectrum):
    """Inverse of :func:`fft_forward`, including the 1/N normalisation."""
    X = np.asarray(spectrum, dtype=np.complex128)
    if X.ndim == 0:
        raise ConfigError("IFFT input must be at least one-dimensional")
    n = X.shape[-1]
    return np.conj(_transform(np.conj(X))) / n


def dft_oracle(frame):
    """Direct O(N^2) DFT for any length >= 1; the reference for FFT tests."""
    x = np.asarray(frame, dtype=np.complex128)
    n = x.shape[-1]
    k = np.arange(n)
    # reduce the phase index modulo n before scaling to keep the angle exact
    phase = np.outer(k, k) % n
    basis = np.exp(-2j * np.pi * phase / n)
    return x @ basis.T


def _canonical_kind(kind):
    kind = _WINDOW_ALIASES.get(kind, kind)
    if kind not in WINDOW_KINDS:
        raise ConfigError(f"unknown window kind {kind!r}; expected one of {', '.join(WINDOW_KINDS)}")
    return kind


def make_window(kind, length):
    """Square-root window of ``length`` samples for analysis and synthesis.

    ``sqrt-hamming-paper`` is ``sqrt(1 - 0.85185 cos((2t+1) pi / N))``. It is
    not the textbook Hamming window, and its values peak near 1.36; no
    normalisation is applied because synthesis divides by the overlap sum.
    The other kinds use the same half-sample-offset phase so every window
    is symmetric, ``w[t] == w[N-1-t]``.
    """
    kind = _canonical_kind(kind)
    if not isinstance(length, (int, np.integer)) or length < 8:
        raise ConfigError(f"window length must be an integer >= 8, got {length!r}")
    n = int(length)
    t = np.arange(n)
    theta = (2 * t + 1) * np.pi / n
    if kind == "sqrt-hamming-paper":
        sq = 1.0 - 0.85185 * np.cos(theta)
    elif kind == "sqrt-hanning":
        sq = 0.5 * (1.0 - np.cos(theta))
    elif kind == "sqrt-blackman-harris-3":
        a0, a1, a2 = _BH3
        sq = a0 - a1 * np.cos(theta) + a2 * np.cos(2 * theta)
    else:
        centre = (n - 1) / 2
        sq = np.exp(-0.5 * ((t - centre) / (_GAUSS_STD * centre)) ** 2)
    return np.sqrt(np.maximum(sq, 0.0))


def overlap_sums(window, oversampling):
    """Sum of overlapped squared windows for each offset within one hop."""
    w = np.asarray(window, dtype=float)
    n = w.shape[0]
    if oversampling < 1 or n % oversampling:
        raise ConfigError(f"oversampling {oversampling} must divide window length {n}")
    hop = n // oversampling
    return (w**2).reshape(oversampling, hop).sum(axis=0)


def cola_constant(window, oversampling, length=None, rtol=1e-6):
    """Constant value of the overlapped squared-window sum.

    ``window`` is either an array of window values or a kind name, in which
    case ``length`` is required. Raises :class:`ColaError` when the sum varies
    by more than ``rtol`` relative across offsets.
    """
    if isinstance(window, str):
        if length is None:
            raise ConfigError("a window length is required when passing a window kind")
        window = make_window(window, length)
    s = overlap_sums(window, oversampling)
    c = float(s.mean())
    spread = float(s.max() - s.min())
    if c <= 0 or spread > rtol * c:
        raise ColaError(
            f"squared window does not overlap-add to a constant at oversampling {oversampling} "
            f"(relative spread {spread / c if c > 0 else np.inf:.3g})"
        )
    return c


def mirror_half(half, n):
    """Rebuild a full length-``n`` conjugate-symmetric spectrum from bins 0..n/2."""
    half = np.asarray(half, dtype=np.complex128)
    m = n // 2 + 1
    if half.shape[-1] != m:
        raise ConfigError(f"expected {m} half-spectrum bins for N={n}, got {half.shape[-1]}")
    full = np.empty(half.shape[:-1] + (n,), dtype=np.complex128)
    full[..., :m] = half
    full[..., m:] = np.conj(half[..., 1 : n - m + 1][..., ::-1])
    return full


def is_conjugate_symmetric(spectrum, atol=1e-9):
    """True when ``X[N-k] == conj(X[k])`` for k = 1..N-1 within ``atol``."""
    X = np.asarray(spectrum)
    n = X.shape[-1]
    mirrored = np.conj(X[..., (-np.arange(n)) % n])
    return bool(np.all(np.abs(X - mirrored) <= atol))
