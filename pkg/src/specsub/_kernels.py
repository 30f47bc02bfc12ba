"""Hot inner loops, each in a numba flavour and a pure-numpy flavour.

The two flavours are kept numerically interchangeable (tests compare them
directly); :mod:`specsub.dsp` and :mod:`specsub.gain` pick one through
:data:`specsub._accel.USE_NUMBA`.
"""
from functools import lru_cache

import numpy as np

from ._accel import njit

# Integer codes shared by both gain kernels; order matches GainVariant.
GAIN_BASIC = 0
GAIN_FLOORED = 1
GAIN_V441 = 2
GAIN_V442 = 3
GAIN_V443 = 4
GAIN_V444 = 5
GAIN_POWER = 6
GAIN_FULL = 7


@lru_cache(maxsize=None)
def fft_tables(n):
    """Bit-reversal permutation and forward twiddles ``exp(-2j*pi*k/n)``, k < n/2."""
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    # direct evaluation per entry keeps twiddle error at ~1 ulp for every k
    tw = np.exp(-2j * np.pi * np.arange(max(n // 2, 1)) / n)
    rev.setflags(write=False)
    tw.setflags(write=False)
    return rev, tw


# ---------------------------------------------------------------------------
# FFT
# ---------------------------------------------------------------------------


@njit
def fft_rows_numba(x, rev, tw):
    """In-place iterative radix-2 DIT FFT over each row of a 2-D complex array."""
    rows, n = x.shape
    for r in range(rows):
        for i in range(n):
            j = rev[i]
            if j > i:
                tmp = x[r, i]
                x[r, i] = x[r, j]
                x[r, j] = tmp
        size = 2
        while size <= n:
            half = size // 2
            step = n // size
            for start in range(0, n, size):
                for k in range(half):
                    w = tw[k * step]
                    a = x[r, start + k]
                    b = x[r, start + k + half] * w
                    x[r, start + k] = a + b
                    x[r, start + k + half] = a - b
            size *= 2
    return x


def fft_rows_numpy(x, rev, tw):
    """Same transform as :func:`fft_rows_numba`, vectorised per butterfly stage."""
    rows, n = x.shape
    y = x[:, rev]
    size = 2
    while size <= n:
        half = size // 2
        w = tw[:: n // size][:half]
        y = y.reshape(rows, n // size, size)
        even = y[:, :, :half]
        odd = y[:, :, half:] * w
        y = np.concatenate((even + odd, even - odd), axis=2)
        size *= 2
    x[:] = y.reshape(rows, n)
    return x


# ---------------------------------------------------------------------------
# Gain
# ---------------------------------------------------------------------------


@njit
def gain_numba(code, x_mag, p_mag, n_mag, lam, alpha):
    nbins = x_mag.shape[0]
    g = np.empty(nbins)
    for k in range(nbins):
        x = x_mag[k]
        p = p_mag[k]
        nh = n_mag[k]
        a = alpha[k]
        if code == GAIN_V443 or code == GAIN_V444:
            den = p
        else:
            den = x
        if den <= 0.0:
            g[k] = min(lam, 1.0)
            continue
        r = nh / den
        sub = 1.0 - a * r
        if code == GAIN_BASIC:
            v = max(0.0, sub)
        elif code == GAIN_FLOORED or code == GAIN_FULL or code == GAIN_V444:
            v = max(lam, sub)
        elif code == GAIN_V441 or code == GAIN_V443:
            v = max(lam * r, sub)
        elif code == GAIN_V442:
            v = max(lam * (p / x), sub)
        else:
            ar = a * r
            v = max(lam, np.sqrt(max(0.0, 1.0 - ar * ar)))
        g[k] = min(max(v, 0.0), 1.0)
    return g


def gain_numpy(code, x_mag, p_mag, n_mag, lam, alpha):
    den = p_mag if code in (GAIN_V443, GAIN_V444) else x_mag
    ok = den > 0.0
    safe = np.where(ok, den, 1.0)
    r = n_mag / safe
    sub = 1.0 - alpha * r
    if code == GAIN_BASIC:
        v = np.maximum(0.0, sub)
    elif code in (GAIN_FLOORED, GAIN_FULL, GAIN_V444):
        v = np.maximum(lam, sub)
    elif code in (GAIN_V441, GAIN_V443):
        v = np.maximum(lam * r, sub)
    elif code == GAIN_V442:
        v = np.maximum(lam * (p_mag / safe), sub)
    else:
        ar = alpha * r
        v = np.maximum(lam, np.sqrt(np.maximum(0.0, 1.0 - ar * ar)))
    v = np.clip(v, 0.0, 1.0)
    return np.where(ok, v, min(lam, 1.0))
