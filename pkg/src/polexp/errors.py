"""Exception hierarchy shared by all modules."""


class PolexpError(Exception):
    """Base class for every error raised by this package."""


class IndexOutOfRange(PolexpError):
    pass


class InconsistentPath(PolexpError):
    """Edges or group elements of a graph path do not fit together."""


class SpecMismatch(PolexpError):
    pass


class InvalidAutomorphism(PolexpError):
    pass


class LengthBudgetExceeded(PolexpError):
    """An iterated word or path grew past the configured length cap."""

    def __init__(self, message, reached=None):
        super().__init__(message)
        # number of completed iterations before the cap was hit, when known
        self.reached = reached


class ExponentMismatch(PolexpError):
    pass


class NotUnimodular(PolexpError):
    pass


class DimensionMismatch(PolexpError):
    pass


class StrataInvalid(PolexpError):
    pass


class PeriodNotFound(PolexpError):
    pass


class NotCompletelySplit(PolexpError):
    pass


class TooShort(PolexpError):
    pass


class ParseError(PolexpError):
    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            if source:
                where = f"{source}: {where}"
            where += ": "
        super().__init__(where + message)
        self.bare_message = message
