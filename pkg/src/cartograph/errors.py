"""Exception hierarchy shared by all cartograph modules."""


class CartographError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CartographError):
    """Invalid input data: broken invariant, bad parameter, malformed file."""


class DomainError(CartographError):
    """A query outside the mathematical domain of an operation."""


class ConvergenceError(CartographError):
    """A numerical routine failed to reach its requested tolerance."""
