"""Objective evaluation: global SNR, latency, spectrograms and musical-noise statistics."""
import math
from dataclasses import dataclass

import numpy as np

from .dsp import fft_forward, make_window
from .errors import DomainError, UsageError
from .gain import compute_gain

__all__ = [
    "DB_EPS",
    "global_snr_db",
    "estimate_latency",
    "SpectrogramMatrix",
    "spectrogram",
    "write_spectrogram_csv",
    "write_spectrogram_pgm",
    "MusicalNoiseStats",
    "musical_noise_stats",
    "simulate_musical_noise",
    "rayleigh_kurtosis",
]

DB_EPS = 1e-10


def global_snr_db(clean, test, latency=0):
    """``10 log10(sum clean^2 / sum (test - clean)^2)`` over the whole signal.

    ``test`` is advanced by ``latency`` samples before differencing and both
    signals are cut to their common length. Returns ``inf`` when the
    residual is exactly zero.
    """
    c = np.asarray(clean, dtype=float)
    t = np.asarray(test, dtype=float)[int(latency) :]
    n = min(len(c), len(t))
    c, t = c[:n], t[:n]
    p_clean = float(np.dot(c, c))
    if p_clean == 0.0:
        raise DomainError("clean signal has zero power")
    r = t - c
    p_res = float(np.dot(r, r))
    if p_res == 0.0:
        return math.inf
    return 10.0 * math.log10(p_clean / p_res)


def estimate_latency(reference, delayed, max_lag=4096):
    """Lag in ``0..max_lag`` maximising the cross-correlation of ``delayed`` with ``reference``."""
    x = np.asarray(reference, dtype=float)
    y = np.asarray(delayed, dtype=float)
    max_lag = min(int(max_lag), len(y) - 1)
    if max_lag < 0 or len(x) == 0:
        raise UsageError("signals are too short to estimate a latency")
    scores = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        n = min(len(x), len(y) - lag)
        scores[lag] = np.dot(x[:n], y[lag : lag + n])
    return int(np.argmax(scores))


@dataclass
class SpectrogramMatrix:
    """Magnitude STFT in dB; one row per frame, one column per bin 0..N/2."""

    db: np.ndarray
    frame_len: int
    hop: int
    sample_rate: float

    @property
    def times(self):
        return np.arange(self.db.shape[0]) * self.hop / self.sample_rate

    @property
    def freqs(self):
        return np.arange(self.db.shape[1]) * self.sample_rate / self.frame_len


def spectrogram(samples, frame_len=256, hop=64, window="sqrt-hanning", sample_rate=8000.0):
    """``20 log10(|X| + 1e-10)`` for every full frame of ``samples``.

    ``window`` is a window kind or an explicit array of length ``frame_len``.
    There are ``floor((len - frame_len) / hop) + 1`` rows.
    """
    x = np.asarray(samples, dtype=float)
    if hop < 1:
        raise UsageError(f"hop must be positive, got {hop}")
    if len(x) < frame_len:
        raise UsageError(f"need at least {frame_len} samples for one frame, got {len(x)}")
    w = make_window(window, frame_len) if isinstance(window, str) else np.asarray(window, dtype=float)
    if w.shape != (frame_len,):
        raise UsageError(f"window length {w.shape} does not match frame length {frame_len}")
    rows = (len(x) - frame_len) // hop + 1
    idx = np.arange(rows)[:, None] * hop + np.arange(frame_len)
    mags = np.abs(fft_forward(x[idx] * w)[:, : frame_len // 2 + 1])
    return SpectrogramMatrix(20.0 * np.log10(mags + DB_EPS), frame_len, hop, float(sample_rate))


def write_spectrogram_csv(spec, path):
    """Header ``time_s,<f0>,<f1>,...`` then one row per frame, 6 decimals."""
    with open(path, "w", newline="\n") as fh:
        fh.write("time_s," + ",".join(f"{f:.6f}" for f in spec.freqs) + "\n")
        for t, row in zip(spec.times, spec.db):
            fh.write(f"{t:.6f}," + ",".join(f"{v:.6f}" for v in row) + "\n")


def write_spectrogram_pgm(spec, path):
    """Binary P5 greyscale; width = bins, height = frames, [min, max] dB -> [0, 255]."""
    db = spec.db
    lo, hi = float(db.min()), float(db.max())
    scaled = (db - lo) / (hi - lo) * 255.0 if hi > lo else np.zeros_like(db)
    pix = np.clip(np.round(scaled), 0, 255).astype(np.uint8)
    height, width = pix.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pix.tobytes())


@dataclass
class MusicalNoiseStats:
    """Per-frame statistics of a processed noise-only magnitude stream."""

    kurtosis: np.ndarray
    peak_count: np.ndarray
    median: np.ndarray

    @property
    def mean_peak_count(self):
        return float(np.mean(self.peak_count))

    def rows(self):
        return zip(range(len(self.kurtosis)), self.kurtosis, self.peak_count, self.median)


def rayleigh_kurtosis():
    """Kurtosis (not excess) of a Rayleigh variable, about 3.245."""
    return (32 - 3 * math.pi**2) / (4 - math.pi) ** 2


def musical_noise_stats(magnitudes, peak_factor=3.0):
    """Kurtosis, count of bins above ``peak_factor`` x the frame median, and the median.

    ``magnitudes`` is a (frames, bins) array of processed noise magnitudes.
    Kurtosis is ``m4 / m2^2`` about the frame mean and is NaN for a
    constant frame.
    """
    m = np.atleast_2d(np.asarray(magnitudes, dtype=float))
    dev = m - m.mean(axis=1, keepdims=True)
    m2 = np.mean(dev**2, axis=1)
    m4 = np.mean(dev**4, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        kurt = np.where(m2 > 0, m4 / np.where(m2 > 0, m2, 1.0) ** 2, np.nan)
    med = np.median(m, axis=1)
    peaks = np.sum(m > peak_factor * med[:, None], axis=1)
    return MusicalNoiseStats(kurt, peaks, med)


def simulate_musical_noise(frames=1000, frame_len=256, alpha=20.0, lam=0.0, seed=0):
    """Subtract from pure Gaussian noise and return the processed magnitudes.

    ``frames`` unwindowed frames of standard normal noise are transformed,
    the noise estimate is the per-bin minimum over all of them, and every
    frame is passed through the floored gain with ``alpha`` and ``lam``.
    Returns a (frames, frame_len // 2 + 1) array.
    """
    if frames < 1:
        raise UsageError(f"need at least one frame, got {frames}")
    rng = np.random.default_rng(seed)
    x = np.abs(fft_forward(rng.standard_normal((frames, frame_len)))[:, : frame_len // 2 + 1])
    noise = x.min(axis=0)
    out = np.empty_like(x)
    for i, row in enumerate(x):
        out[i] = compute_gain("floored", row, row, noise, floor=lam, alpha=alpha) * row
    return out
