"""Exception hierarchy for wavecast.

Everything raised on purpose by the package derives from :class:`WavecastError`
so callers (and the CLI) can tell data problems from programming errors.
"""


class WavecastError(Exception):
    """Base class for all package errors."""


class DataError(WavecastError, ValueError):
    """Input data is malformed, inconsistent or unusable."""


class ParseError(DataError):
    """A CSV row could not be parsed.

    Attributes
    ----------
    line : int
        1-based line number in the source file.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderingError(ParseError):
    """Timestamps are not strictly increasing."""


class ConfigurationError(WavecastError, ValueError):
    """Invalid parameters or configuration values."""


class DegenerateRangeError(DataError):
    """A variable is constant, so min-max scaling is undefined."""


class UnsupportedWaveletError(ConfigurationError):
    pass


class ShapeError(WavecastError, ValueError):
    """Array lengths or widths are inconsistent."""


class InputTooShortError(ShapeError):
    pass


class ExcessLevelError(ConfigurationError):
    pass


class InvalidRateError(ConfigurationError):
    pass


class FormatError(WavecastError, ValueError):
    """A binary container is malformed.

    Attributes
    ----------
    offset : int
        Byte offset at which decoding failed.
    """

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class CorruptionError(FormatError):
    pass


class InsufficientSamplesError(DataError):
    pass


class EmptyEvaluationError(DataError):
    pass


class ContractError(WavecastError, ValueError):
    """A caller-side precondition does not hold."""
