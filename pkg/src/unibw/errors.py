"""Exception hierarchy. Every error raised on bad input derives from ``UnibwError``."""


class UnibwError(ValueError):
    pass


class NonPositiveRatio(UnibwError):
    pass


class BadRange(UnibwError):
    pass


class DegenerateRegion(UnibwError):
    pass


class NonPositiveAlpha(UnibwError):
    pass


class BadBandwidth(UnibwError):
    pass


class QuadratureFailure(UnibwError):
    pass


class NonPositiveDensity(UnibwError):
    pass


class DimensionUnsupported(UnibwError):
    pass


class GridTooCoarse(UnibwError):
    pass


class NullDirection(UnibwError):
    pass


class EmptySample(UnibwError):
    pass


class DegenerateSample(UnibwError):
    pass


class NoRoot(UnibwError):
    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class ConfigInvalid(UnibwError):
    pass


class TargetOutsideBall(UnibwError):
    pass


class ParseError(UnibwError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FileMissing(UnibwError, FileNotFoundError):
    pass


class IoFailure(UnibwError, OSError):
    pass
