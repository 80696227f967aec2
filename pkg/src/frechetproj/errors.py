class DimensionError(ValueError):
    """Unsupported dimension, or operands of different dimension."""


class ContractError(ValueError):
    """A documented precondition does not hold for the given input."""


class DegenerateDistanceError(ValueError):
    """The base distance is zero, so a distortion ratio is undefined."""


class CurveFormatError(ValueError):
    """A curve or matrix text file could not be parsed."""

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
