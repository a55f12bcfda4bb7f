"""Exception types shared across the package."""


class WbergmanError(Exception):
    """Base class for all package errors."""


class DomainError(WbergmanError, ValueError):
    """An evaluation point lies outside the function's domain."""


class InvalidWeightError(WbergmanError, ValueError):
    """A weight specification violates positivity or ordering constraints."""


class PreconditionError(WbergmanError, ValueError):
    """An operation's stated precondition does not hold."""


class StandoffError(WbergmanError, ValueError):
    """A kernel evaluation point is too close to (or inside) the forbidden set."""


class OutsideDomainError(WbergmanError, ValueError):
    """Newton inversion failed to locate a preimage inside the closed disk."""


class TruncationError(WbergmanError, ValueError):
    """A series operation overflowed the configured maximum degree.

    Carries ``tail_bound``, an estimate of the discarded coefficient mass.
    """

    def __init__(self, message, tail_bound=None):
        super().__init__(message)
        self.tail_bound = tail_bound


class AccuracyError(WbergmanError, ArithmeticError):
    """Quadrature could not meet the requested tolerance within budget.

    Carries the last bracket as ``value`` and ``error`` attributes.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class DivergentIntegralError(WbergmanError, ArithmeticError):
    """An improper integral was classified as divergent.

    Raised by the quadrature layer; callers that model divergence as a
    value (e.g. inverse moments) catch this and return ``math.inf``.
    """
