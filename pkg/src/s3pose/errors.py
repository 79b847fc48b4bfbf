"""Exception types raised by the library."""


class S3PoseError(Exception):
    """Base class for all library errors."""


class NumericalError(S3PoseError, ArithmeticError):
    """A geometric quantity degenerated (zero norm, collapsed mean, ...)."""


class NearZeroNorm(NumericalError):
    pass


class DegenerateMean(NumericalError):
    pass


class DegenerateAxis(NumericalError):
    pass


class ParallelInput(NumericalError):
    pass


class DegenerateCovariance(NumericalError):
    pass


class NonFiniteObjective(NumericalError):
    pass


class NoPlaneRetained(NumericalError):
    pass


class EmptyPlaneSet(S3PoseError, ValueError):
    pass


class ConfigError(S3PoseError, ValueError):
    """Invalid benchmark configuration.

    ``line`` and ``field`` are filled in when the offending location is known.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
