"""16-bit mono PCM WAV reading/writing and SNR-controlled mixing.

The RIFF container is handled by the stdlib :mod:`wave` module, which
skips unknown chunks on read and writes the canonical 44-byte header.
"""
import math
import wave
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedFormatError, UsageError, WavFormatError

__all__ = ["WavAudio", "PCM_SCALE", "read_wav", "write_wav", "to_pcm16", "from_pcm16", "mix_at_snr", "noise_scale", "fit_length", "signal_power"]

# one scale both ways so that read(write(read(f))) reproduces every PCM code
PCM_SCALE = 32768.0


@dataclass
class WavAudio:
    """Mono audio with samples nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = 8000
    bits: int = 16

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1:
            raise UsageError(f"audio must be mono (1-D samples), got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise UsageError("audio samples must be finite")
        if not self.sample_rate > 0:
            raise UsageError(f"sample rate must be positive, got {self.sample_rate}")
        self.samples = s

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate


def from_pcm16(codes):
    return np.asarray(codes, dtype=np.int16).astype(float) / PCM_SCALE


def to_pcm16(samples):
    """Clamp to [-1, 1] and quantise; +1.0 saturates at 32767."""
    s = np.clip(np.asarray(samples, dtype=float), -1.0, 1.0)
    return np.clip(np.round(s * PCM_SCALE), -32768, 32767).astype("<i2")


def read_wav(path):
    """Read a 16-bit PCM mono WAV file.

    Raises :class:`UnsupportedFormatError` for stereo, other bit depths or
    non-PCM encodings and :class:`WavFormatError` for anything that is not
    a well-formed RIFF/WAVE file.
    """
    try:
        with wave.open(str(path), "rb") as w:
            channels, width, rate, frames = w.getnchannels(), w.getsampwidth(), w.getframerate(), w.getnframes()
            if channels != 1:
                raise UnsupportedFormatError(f"{path}: {channels} channels, only mono is supported")
            if width != 2:
                raise UnsupportedFormatError(f"{path}: {8 * width}-bit samples, only 16-bit PCM is supported")
            raw = w.readframes(frames)
    except wave.Error as exc:
        if "unknown format" in str(exc):
            raise UnsupportedFormatError(f"{path}: {exc}; only 16-bit PCM is supported") from exc
        raise WavFormatError(f"{path}: malformed WAV file ({exc})") from exc
    except EOFError as exc:
        raise WavFormatError(f"{path}: truncated WAV header") from exc
    if len(raw) % 2:
        raw = raw[:-1]
    if rate <= 0:
        raise WavFormatError(f"{path}: invalid sample rate {rate}")
    return WavAudio(from_pcm16(np.frombuffer(raw, dtype="<i2")), rate)


def write_wav(audio, path):
    """Write ``audio`` as 16-bit mono PCM with a canonical 44-byte header."""
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(round(audio.sample_rate)))
        w.writeframes(to_pcm16(audio.samples).tobytes())


def signal_power(x):
    x = np.asarray(x, dtype=float)
    return float(np.mean(x * x)) if len(x) else 0.0


def mix_at_snr(clean, noise, target_snr_db):
    """Add ``noise`` to ``clean`` at ``target_snr_db``.

    The noise is looped or truncated to the clean length and scaled so that
    ``10 log10(P_clean / P_noise) == target_snr_db`` exactly. A target of
    ``+inf`` returns the clean signal. The result is not clipped.
    """
    if clean.sample_rate != noise.sample_rate:
        raise UsageError(f"sample rates differ: {clean.sample_rate} vs {noise.sample_rate}")
    if math.isinf(target_snr_db) and target_snr_db > 0:
        return WavAudio(clean.samples.copy(), clean.sample_rate)
    n = fit_length(noise.samples, len(clean))
    return WavAudio(clean.samples + noise_scale(clean.samples, n, target_snr_db) * n, clean.sample_rate)


def fit_length(x, length):
    """Loop or truncate ``x`` to ``length`` samples."""
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise DomainError("noise is empty")
    return np.tile(x, -(-length // len(x)))[:length]


def noise_scale(clean, noise, target_snr_db):
    """Factor that puts ``noise`` ``target_snr_db`` below ``clean`` in power."""
    if math.isnan(target_snr_db) or math.isinf(target_snr_db):
        raise DomainError(f"target SNR must be finite, got {target_snr_db}")
    p_noise = signal_power(noise)
    if p_noise == 0.0:
        raise DomainError("noise has zero power; cannot scale it to a target SNR")
    return math.sqrt(signal_power(clean) / (p_noise * 10.0 ** (target_snr_db / 10.0)))
