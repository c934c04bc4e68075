"""Exception hierarchy; the CLI maps each family onto an exit code."""


class SphereExcursionError(Exception):
    """Base class for package errors."""


class InvalidModelError(SphereExcursionError, ValueError):
    """A covariance model, domain or parameter violates its stated constraints."""


class MethodMismatchError(SphereExcursionError):
    """The requested method does not apply to the model or domain.

    Examples are the Euler-characteristic route on a non-smooth model, or a
    domain whose curvatures are not available.
    """


class NumericalFailure(SphereExcursionError, ArithmeticError):
    """A factorization or quadrature could not be completed."""
