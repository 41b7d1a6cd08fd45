"""Exception hierarchy shared by all icsfds modules."""


class IcsError(Exception):
    """Base class for every error raised by icsfds."""


class NotPositiveDefinite(IcsError, ValueError):
    """A matrix expected to be symmetric positive definite is not."""


class Singular(NotPositiveDefinite):
    """A scatter estimate or population matrix is singular (degenerate data or centers)."""


class NoConvergence(IcsError, ArithmeticError):
    """An iterative kernel exhausted its iteration budget."""


class DimensionMismatch(IcsError, ValueError):
    pass


class ZeroDistance(IcsError, ValueError):
    """An observation sits on the estimated center, so an inverse-distance weight is undefined."""


class SubsetTooSmall(IcsError, ValueError):
    pass


class BadCount(IcsError, ValueError):
    pass


class InvalidSpec(IcsError, ValueError):
    """A mixture specification violates its invariants."""


class InvalidCenters(IcsError, ValueError):
    pass


class DegeneratePolynomial(IcsError, ValueError):
    pass


class InvalidSetup(IcsError, ValueError):
    pass


class NoCrossing(IcsError, LookupError):
    """The threshold criterion was never met on the scanned grid."""


class NonMonotoneCrossing(IcsError, ArithmeticError):
    """An eigenvalue fell back below one after crossing it while scanning a grid."""


class EmptyInput(IcsError, ValueError):
    pass


class UnknownConfig(IcsError, KeyError):
    pass


class UnknownPreset(IcsError, KeyError):
    pass


class ConfigParse(IcsError, ValueError):
    pass


class ParseError(IcsError, ValueError):
    """Malformed CSV input. Carries the 1-based row and column when known."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
