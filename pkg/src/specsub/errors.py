"""Exception hierarchy. CLI exit codes are derived from these classes."""


class SpecSubError(Exception):
    """Base class for every error raised by specsub."""


class ConfigError(SpecSubError, ValueError):
    """An invalid parameter or parameter combination."""


class ColaError(ConfigError):
    """Window and oversampling factor do not overlap-add to a constant."""


class UsageError(SpecSubError, ValueError):
    """A call that violates an operation's preconditions (wrong sizes, order)."""


class DomainError(SpecSubError, ValueError):
    """Input data outside the domain of a computation (e.g. zero power)."""


class WavFormatError(SpecSubError):
    """Malformed RIFF/WAVE data."""


class UnsupportedFormatError(WavFormatError):
    """Well-formed WAV data in a format we refuse to convert silently."""
