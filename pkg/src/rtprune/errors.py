"""Exception hierarchy shared by the engine and its CLI.

Every error carries a ``code`` that doubles as the process exit status
when the error escapes the command-line front end.
"""


class RTPruneError(Exception):
    """Base class for all engine errors."""

    code = 1


class NumericalFailure(RTPruneError):
    """A numeric routine produced a non-finite intermediate value."""

    code = 1


class InvalidInput(RTPruneError):
    """Input data violates a documented precondition."""

    code = 2


class FileFormatError(InvalidInput):
    """A tensor or image file on disk is malformed."""

    code = 2


class EmptyPruneSet(InvalidInput):
    """Selection kept every token, leaving nothing to merge."""

    code = 2


class ConfigConflict(RTPruneError):
    """Mutually inconsistent or incomplete configuration."""

    code = 3


class InfeasibleCalibration(ConfigConflict):
    """A FLOPs budget too small to be met by any intermediate size."""

    code = 3


class DegenerateTokenWarning(UserWarning):
    """An all-zero token row was encountered where a direction was needed."""
