"""Minimum-statistics noise magnitude tracking with optional one-pole smoothing."""
import math

import numpy as np

from .errors import ConfigError, UsageError

__all__ = ["SMOOTHING_MODES", "pole_for", "OnePoleSmoother", "MinBufferBank", "NoiseEstimator", "segment_frames"]

SMOOTHING_MODES = ("off", "magnitude", "power")
NUM_BUFFERS = 4


def pole_for(tau, frame_period):
    """Pole ``exp(-T/tau)`` of the frame-rate low-pass; always in [0, 1)."""
    if not tau > 0:
        raise ConfigError(f"time constant must be positive, got {tau}")
    if not frame_period > 0:
        raise ConfigError(f"frame period must be positive, got {frame_period}")
    return math.exp(-frame_period / tau)


def segment_frames(segment_seconds, frame_period):
    """Whole frames per minimum-buffer segment (2.5 s at 8 ms hops -> 312)."""
    if not segment_seconds > 0:
        raise ConfigError(f"MMSE segment length must be positive, got {segment_seconds}")
    # tolerate float noise such as 2.5 / 0.008 == 312.49999...
    n = int(math.floor(segment_seconds / frame_period + 1e-9))
    if n < 1:
        raise ConfigError(f"MMSE segment of {segment_seconds} s is shorter than one frame")
    return n


class OnePoleSmoother:
    """Per-bin recursion ``P <- (1-k) v + k P`` across frames.

    In ``power`` mode the recursion runs on squared magnitudes and the square
    root is returned. The state is seeded with the first frame, so a constant
    input is a fixed point from the start.
    """

    def __init__(self, mode="magnitude", tau=0.03, frame_period=0.008):
        if mode not in SMOOTHING_MODES:
            raise ConfigError(f"unknown smoothing mode {mode!r}; expected one of {SMOOTHING_MODES}")
        self.mode = mode
        self.tau = tau
        self.k = 0.0 if mode == "off" else pole_for(tau, frame_period)
        self.state = None

    def reset(self):
        self.state = None

    def __call__(self, magnitudes):
        mags = np.asarray(magnitudes, dtype=float)
        if self.mode == "off":
            return mags.copy()
        v = mags * mags if self.mode == "power" else mags
        if self.state is None:
            self.state = v.copy()
        else:
            if self.state.shape != v.shape:
                raise UsageError(f"bin count changed from {self.state.shape[0]} to {v.shape[0]}")
            self.state = (1.0 - self.k) * v + self.k * self.state
        return np.sqrt(self.state) if self.mode == "power" else self.state.copy()


class MinBufferBank:
    """Four rotating per-bin minimum buffers.

    ``buffers[0]`` is the running minimum of the segment in progress; older
    segments move down one slot at every rotation. Segments are disjoint:
    once ``segment_len`` frames have gone into ``buffers[0]``, the next
    frame rotates the bank and seeds the new segment. Right after a
    rotation the estimate therefore spans three whole segments plus the
    current frame.
    """

    def __init__(self, bins, segment_len=312):
        if bins < 1:
            raise ConfigError(f"bin count must be positive, got {bins}")
        if segment_len < 1:
            raise ConfigError(f"segment length must be positive, got {segment_len}")
        self.bins = int(bins)
        self.segment_len = int(segment_len)
        self.reset()

    def reset(self):
        self.buffers = np.full((NUM_BUFFERS, self.bins), np.inf)
        # frames summarised by each buffer; zero means the +inf sentinel
        self.coverage = np.zeros(NUM_BUFFERS, dtype=np.int64)
        self.frames_in_segment = 0
        self.frames_seen = 0
        self.rotations = 0

    def _check(self, magnitudes):
        m = np.asarray(magnitudes, dtype=float)
        if m.shape != (self.bins,):
            raise UsageError(f"expected {self.bins} bins, got shape {m.shape}")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise UsageError("frame magnitudes must be finite and non-negative")
        return m

    def update(self, frame_magnitudes):
        m = self._check(frame_magnitudes)
        if self.frames_in_segment >= self.segment_len:
            self.rotate(m)
        else:
            np.minimum(self.buffers[0], m, out=self.buffers[0])
            self.frames_in_segment += 1
            self.coverage[0] += 1
        self.frames_seen += 1

    def rotate(self, current_frame_magnitudes):
        m = self._check(current_frame_magnitudes)
        self.buffers[1:] = self.buffers[:-1].copy()
        self.buffers[0] = m
        self.coverage[1:] = self.coverage[:-1].copy()
        self.coverage[0] = 1
        self.frames_in_segment = 1
        self.rotations += 1

    def noise_estimate(self):
        if self.frames_seen == 0:
            raise UsageError("noise estimate requested before any frame was observed")
        return self.buffers.min(axis=0)

    @property
    def effective_memory_frames(self):
        """How many past frames the current estimate looks back over."""
        return int(self.coverage.sum())


class NoiseEstimator:
    """Frame smoothing, minimum tracking and optional noise smoothing, in that order.

    The smoothed magnitude feeds the minimum tracker, and it is also what
    the gain stage uses as ``P``.
    """

    def __init__(
        self,
        bins,
        frame_period=0.008,
        segment_seconds=2.5,
        smoothing="off",
        tau=0.03,
        smooth_noise=False,
        noise_tau=0.05,
    ):
        self.frame_smoother = OnePoleSmoother(smoothing, tau, frame_period)
        self.bank = MinBufferBank(bins, segment_frames(segment_seconds, frame_period))
        self.noise_smoother = OnePoleSmoother("magnitude", noise_tau, frame_period) if smooth_noise else None

    def reset(self):
        self.frame_smoother.reset()
        self.bank.reset()
        if self.noise_smoother is not None:
            self.noise_smoother.reset()

    def step(self, magnitudes):
        """Consume one frame; return ``(smoothed_magnitude, noise_estimate)``."""
        p = self.frame_smoother(magnitudes)
        self.bank.update(p)
        n = self.bank.noise_estimate()
        if self.noise_smoother is not None:
            n = self.noise_smoother(n)
        return p, n
