"""Exception hierarchy shared by every module."""


class ResoscanError(Exception):
    """Base class for all package errors."""


class InvalidInputError(ResoscanError, ValueError):
    pass


class UndefinedMeanError(InvalidInputError):
    """Mean direction requested for angles whose resultant vector vanishes."""


class ValidationError(InvalidInputError):
    """A record violates its invariants. ``field`` and ``index`` locate the offence."""

    def __init__(self, message, field=None, index=None):
        super().__init__(message)
        self.field = field
        self.index = index


class ParseError(ResoscanError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DetectorDegenerateError(ResoscanError, RuntimeError):
    """The libration detector accepted a series whose center is undefined."""


class SearchError(ResoscanError, RuntimeError):
    """A tuple evaluation failed; ``tuple`` names the offending candidate."""

    def __init__(self, message, tuple=None):
        super().__init__(message)
        self.tuple = tuple


class GenerationError(ResoscanError, RuntimeError):
    pass
