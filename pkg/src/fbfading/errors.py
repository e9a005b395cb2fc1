"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity.

    ``field`` names the offending parameter when there is one.
    """

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"invalid value for {field!r}")


class NumericalError(ArithmeticError):
    """A numerical routine produced a non-finite or inconsistent result."""


class ConvergenceError(NumericalError):
    """An iterative routine exhausted its term or node budget."""
