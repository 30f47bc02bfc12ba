"""Overlapping-frame analysis and overlap-add synthesis."""
from dataclasses import dataclass

import numpy as np

from .dsp import cola_constant, is_power_of_two, make_window, overlap_sums
from .errors import ColaError, ConfigError, UsageError

__all__ = ["FrameConfig", "OverlapAdd", "pipeline_latency", "warmup_increments", "synthesis_normaliser"]


@dataclass(frozen=True)
class FrameConfig:
    """Frame geometry. Defaults give 32 ms frames with 8 ms hops at 8 kHz."""

    frame_len: int = 256
    oversampling: int = 4
    sample_rate: float = 8000.0

    def __post_init__(self):
        if not is_power_of_two(self.frame_len) or self.frame_len < 8:
            raise ConfigError(f"frame_len must be a power of two >= 8, got {self.frame_len}")
        if not isinstance(self.oversampling, (int, np.integer)) or self.oversampling < 2:
            raise ConfigError(f"oversampling must be an integer >= 2, got {self.oversampling}")
        if self.frame_len % self.oversampling:
            raise ConfigError(f"oversampling {self.oversampling} must divide frame_len {self.frame_len}")
        if not self.sample_rate > 0:
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def hop(self):
        return self.frame_len // self.oversampling

    @property
    def hop_seconds(self):
        return self.hop / self.sample_rate

    @property
    def bins(self):
        return self.frame_len // 2 + 1


def pipeline_latency(config, residual_reduction=False):
    """Input-to-output delay in samples: ``N - I``, plus ``I`` with lookahead."""
    return config.frame_len - config.hop + (config.hop if residual_reduction else 0)


def warmup_increments(config, residual_reduction=False):
    """Number of leading hops whose output precedes the first input sample."""
    return pipeline_latency(config, residual_reduction) // config.hop


def synthesis_normaliser(window, oversampling):
    """Divisor applied to overlap-added output.

    For COLA windows this is the scalar constant. Otherwise it is the
    per-offset overlap sum (length ``hop``), which still reconstructs
    exactly because that sum is periodic in the hop.
    """
    try:
        return cola_constant(window, oversampling)
    except ColaError:
        return overlap_sums(window, oversampling)


class OverlapAdd:
    """Analysis ring buffer plus synthesis accumulator for one stream.

    Parameters
    ----------
    config : FrameConfig
    window : str or ndarray
        Window kind or explicit values, applied at analysis and synthesis.
    """

    def __init__(self, config, window="sqrt-hamming-paper"):
        self.config = config
        if isinstance(window, str):
            window = make_window(window, config.frame_len)
        self.window = np.asarray(window, dtype=float)
        if self.window.shape != (config.frame_len,):
            raise ConfigError(f"window length {self.window.shape} does not match frame_len {config.frame_len}")
        self.normaliser = synthesis_normaliser(self.window, config.oversampling)
        self.reset()

    def reset(self):
        n = self.config.frame_len
        self._input = np.zeros(n)
        self._accum = np.zeros(n)
        self.frames_analysed = 0
        self.frames_emitted = 0

    def analysis_next(self, new_samples):
        """Push ``hop`` samples and return the windowed most recent frame (oldest first)."""
        hop = self.config.hop
        new = np.asarray(new_samples, dtype=float)
        if new.shape != (hop,):
            raise UsageError(f"expected exactly {hop} new samples, got shape {new.shape}")
        self._input[:-hop] = self._input[hop:]
        self._input[-hop:] = new
        self.frames_analysed += 1
        return self._input * self.window

    def synthesis_add(self, processed_frame):
        """Window ``processed_frame`` again, overlap-add it and emit the oldest hop."""
        n, hop = self.config.frame_len, self.config.hop
        frame = np.asarray(processed_frame, dtype=float)
        if frame.shape != (n,):
            raise UsageError(f"expected a processed frame of {n} samples, got shape {frame.shape}")
        self._accum += frame * self.window
        out = self._accum[:hop] / self.normaliser
        self._accum[:-hop] = self._accum[hop:]
        self._accum[-hop:] = 0.0
        self.frames_emitted += 1
        return out
