"""End-to-end streaming enhancer.

Per hop: window -> FFT -> smoothing -> minimum tracking -> noise smoothing
-> per-bin SNR -> alpha, delta -> gain -> residual reduction -> IFFT ->
overlap-add.
"""
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .dsp import fft_forward, fft_inverse, mirror_half
from .errors import ConfigError, UsageError
from .framing import FrameConfig, OverlapAdd, pipeline_latency, warmup_increments
from .gain import AlphaSchedule, DeltaTable, GainVariant, alpha_of_snr, compute_gain, delta_per_bin, frame_snr_db
from .noise import SMOOTHING_MODES, NoiseEstimator

__all__ = ["EnhancerConfig", "PRESETS", "Enhancer", "ResidualReducer", "residual_reduce", "enhance"]

DEFAULT_TAU = {"off": 0.03, "magnitude": 0.03, "power": 0.025}
WARMUP_POLICIES = ("suppress", "emit")


@dataclass(frozen=True)
class EnhancerConfig:
    """Every tunable of the enhancer.

    ``alpha`` and ``tau`` default to ``None``, which resolves to the
    mode-dependent values: alpha 20 without frame smoothing and 2 with it,
    tau 30 ms for magnitude and 25 ms for power smoothing. ``gain="full"``
    implies both ``snr_alpha`` and a delta table.
    """

    frame_len: int = 256
    oversampling: int = 4
    sample_rate: float = 8000.0
    window: str = "sqrt-hamming-paper"
    gain: str = "floored"
    floor: float = 0.05
    alpha: float = None
    snr_alpha: bool = False
    snr_granularity: str = "bin"
    delta: DeltaTable = None
    smoothing: str = "off"
    tau: float = None
    smooth_noise: bool = False
    noise_tau: float = 0.05
    mmse_segment_seconds: float = 2.5
    residual_reduction: bool = False
    warmup: str = "suppress"
    alpha_schedule: AlphaSchedule = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            gain = GainVariant(self.gain)
        except ValueError:
            raise ConfigError(f"unknown gain variant {self.gain!r}") from None
        object.__setattr__(self, "gain", gain.value)
        if self.smoothing not in SMOOTHING_MODES:
            raise ConfigError(f"smoothing must be one of {SMOOTHING_MODES}, got {self.smoothing!r}")
        if self.warmup not in WARMUP_POLICIES:
            raise ConfigError(f"warmup must be one of {WARMUP_POLICIES}, got {self.warmup!r}")
        if self.snr_granularity not in ("bin", "frame"):
            raise ConfigError(f"snr_granularity must be 'bin' or 'frame', got {self.snr_granularity!r}")
        if not 0.0 <= self.floor <= 1.0:
            raise ConfigError(f"floor (lambda) must lie in [0, 1], got {self.floor}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 20.0 if self.smoothing == "off" else 2.0)
        if self.tau is None:
            object.__setattr__(self, "tau", DEFAULT_TAU[self.smoothing])
        if not self.tau > 0 or not self.noise_tau > 0:
            raise ConfigError("time constants must be positive")
        if not self.mmse_segment_seconds > 0:
            raise ConfigError(f"mmse_segment_seconds must be positive, got {self.mmse_segment_seconds}")
        if gain is GainVariant.FULL:
            object.__setattr__(self, "snr_alpha", True)
            if self.delta is None:
                object.__setattr__(self, "delta", DeltaTable())
        schedule = AlphaSchedule(mode="snr" if self.snr_alpha else "fixed", alpha=float(self.alpha))
        object.__setattr__(self, "alpha_schedule", schedule)
        # validates frame_len / oversampling / sample_rate
        object.__setattr__(self, "_frames", FrameConfig(self.frame_len, self.oversampling, self.sample_rate))

    @property
    def frames(self):
        return self._frames

    @property
    def latency(self):
        return pipeline_latency(self._frames, self.residual_reduction)

    @classmethod
    def preset(cls, name, **overrides):
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
        kwargs = dict(PRESETS[name])
        kwargs.update(overrides)
        return cls(**kwargs)

    def with_(self, **changes):
        """Copy with ``changes``; alpha and tau keep their already-resolved values."""
        return replace(self, **changes)


PRESETS = {
    "basic": dict(window="sqrt-hamming-paper", gain="floored", floor=0.05, alpha=20.0),
    "paper-final": dict(
        window="sqrt-hanning",
        gain="v443",
        floor=0.05,
        smoothing="power",
        tau=0.025,
        smooth_noise=True,
        snr_alpha=True,
        delta=DeltaTable(),
    ),
}
PRESETS["all-on"] = dict(PRESETS["paper-final"], residual_reduction=True)


def residual_reduce(magnitudes):
    """Bin-wise minimum over three consecutive frames' magnitudes."""
    m = np.asarray(magnitudes, dtype=float)
    if m.ndim != 2 or m.shape[0] != 3:
        raise UsageError(f"expected a (3, bins) stack of magnitudes, got shape {m.shape}")
    return m.min(axis=0)


class ResidualReducer:
    """One-frame-lookahead residual noise reduction on half spectra.

    :meth:`push` returns the spectrum of the previous frame with each bin's
    magnitude replaced by its minimum over (previous, that, next) frames and
    the phase kept. The first push returns ``None`` and the second passes
    the first frame through unchanged, since it has no predecessor.
    """

    def __init__(self):
        self.ring = deque(maxlen=3)

    def reset(self):
        self.ring.clear()

    def push(self, half_spectrum):
        self.ring.append(np.asarray(half_spectrum, dtype=np.complex128))
        if len(self.ring) == 1:
            return None
        if len(self.ring) == 2:
            return self.ring[0]
        mid = self.ring[1]
        mag = np.abs(mid)
        low = residual_reduce(np.abs(np.stack(self.ring)))
        scale = np.divide(low, mag, out=np.zeros_like(mag), where=mag > 0)
        return mid * scale


class Enhancer:
    """Stateful single-stream enhancer.

    With ``warmup="suppress"`` (the default) the first hops, whose output
    would precede the first input sample, are dropped. Samples are then
    aligned with the input and, after :meth:`flush`, there are exactly as
    many of them as were fed in. ``warmup="emit"`` returns those hops as
    zeros instead, so the output is the input delayed by :attr:`latency`.
    """

    def __init__(self, config=None):
        self.config = config if config is not None else EnhancerConfig()
        cfg = self.config
        self.frames = cfg.frames
        self.hop = self.frames.hop
        self.latency = cfg.latency
        self._ola = OverlapAdd(self.frames, cfg.window)
        self._noise = NoiseEstimator(
            self.frames.bins,
            frame_period=self.frames.hop_seconds,
            segment_seconds=cfg.mmse_segment_seconds,
            smoothing=cfg.smoothing,
            tau=cfg.tau,
            smooth_noise=cfg.smooth_noise,
            noise_tau=cfg.noise_tau,
        )
        self._variant = GainVariant(cfg.gain)
        self._delta = delta_per_bin(cfg.delta, cfg.sample_rate, cfg.frame_len) if cfg.delta is not None else None
        self._residual = ResidualReducer() if cfg.residual_reduction else None
        self._warmup_hops = warmup_increments(self.frames, cfg.residual_reduction)
        self.reset()

    def reset(self):
        self._ola.reset()
        self._noise.reset()
        if self._residual is not None:
            self._residual.reset()
        self._pending = np.zeros(0)
        self.increments = 0
        self.samples_in = 0
        self.samples_out = 0
        self.max_imag_residue = 0.0
        self._flushed = False

    @property
    def noise_bank(self):
        return self._noise.bank

    def _oversubtraction(self, mag, noise):
        if self.config.snr_alpha:
            snr = frame_snr_db(mag, noise, self.config.snr_granularity)
            alpha = alpha_of_snr(self.config.alpha_schedule, snr)
        else:
            alpha = self.config.alpha_schedule.alpha
        if self._delta is not None:
            alpha = alpha * self._delta
        return alpha

    def _process_frame(self, frame):
        n = self.frames.frame_len
        X = fft_forward(frame)
        half = X[: n // 2 + 1]
        mag = np.abs(half)
        p, noise = self._noise.step(mag)
        g = compute_gain(self._variant, mag, p, noise, self.config.floor, self._oversubtraction(mag, noise))
        Y = half * g
        if self._residual is not None:
            Y = self._residual.push(Y)
            if Y is None:
                return np.zeros(n)
        y = fft_inverse(mirror_half(Y, n))
        self.max_imag_residue = max(self.max_imag_residue, float(np.max(np.abs(y.imag))))
        return y.real

    def _check_open(self):
        if self._flushed:
            raise UsageError("stream already flushed; call reset() to start a new one")

    def process_increment(self, new_samples):
        """Run one hop. Returns ``hop`` output samples, or ``None`` during suppressed warm-up."""
        self._check_open()
        frame = self._ola.analysis_next(new_samples)
        out = self._ola.synthesis_add(self._process_frame(frame))
        self.increments += 1
        self.samples_in += self.hop
        if self.config.warmup == "suppress" and self.increments <= self._warmup_hops:
            return None
        self.samples_out += self.hop
        return out

    def _run(self, samples):
        hop = self.hop
        outs = []
        for j in range(len(samples) // hop):
            out = self.process_increment(samples[j * hop : (j + 1) * hop])
            if out is not None:
                outs.append(out)
        return outs

    def process(self, samples):
        """Feed any number of samples; returns whatever output became available."""
        self._check_open()
        x = np.asarray(samples, dtype=float).ravel()
        buf = np.concatenate([self._pending, x])
        usable = len(buf) - len(buf) % self.hop
        outs = self._run(buf[:usable])
        self._pending = buf[usable:]
        return np.concatenate(outs) if outs else np.zeros(0)

    def flush(self):
        """Drain every input sample still held in the pipeline.

        A second call returns an empty array.
        """
        if self._flushed:
            return np.zeros(0)
        real_in = self.samples_in + len(self._pending)
        target = real_in if self.config.warmup == "suppress" else real_in + self.latency
        outs = []
        if len(self._pending):
            pad = np.zeros(self.hop)
            pad[: len(self._pending)] = self._pending
            self._pending = np.zeros(0)
            out = self.process_increment(pad)
            if out is not None:
                outs.append(out)
        produced = self.samples_out
        while produced < target:
            out = self.process_increment(np.zeros(self.hop))
            if out is not None:
                outs.append(out)
                produced = self.samples_out
        self._flushed = True
        tail = np.concatenate(outs) if outs else np.zeros(0)
        excess = self.samples_out - target
        if excess > 0:
            tail = tail[: len(tail) - excess]
            self.samples_out = target
        return tail


def enhance(samples, config=None):
    """Enhance a whole signal; the result has the same length as the input (suppressed warm-up)."""
    cfg = config if config is not None else EnhancerConfig()
    if cfg.warmup != "suppress":
        cfg = cfg.with_(warmup="suppress")
    e = Enhancer(cfg)
    head = e.process(samples)
    return np.concatenate([head, e.flush()])
