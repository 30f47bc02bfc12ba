"""Real-time spectral subtraction with minimum-statistics noise estimation."""
from ._accel import USE_NUMBA
from .dsp import cola_constant, dft_oracle, fft_forward, fft_inverse, make_window
from .errors import (
    ColaError,
    ConfigError,
    DomainError,
    SpecSubError,
    UnsupportedFormatError,
    UsageError,
    WavFormatError,
)
from .eval import global_snr_db, spectrogram
from .pipeline import PRESETS, Enhancer, EnhancerConfig, enhance
from .wav import WavAudio, mix_at_snr, read_wav, write_wav

__version__ = "0.1.0"
