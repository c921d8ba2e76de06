"""Exception hierarchy shared by all modules."""


class UHFError(Exception):
    """Base class for every error raised by this package."""


class DomainError(UHFError, ValueError):
    """Argument outside the region where the quantity is defined."""


class ConvergenceError(UHFError, ArithmeticError):
    """A quadrature or series did not reach the requested tolerance."""


class SingularityError(UHFError, ArithmeticError):
    """Evaluation point too close to a pole of the closed form."""


class SizeMismatchError(UHFError, ValueError):
    pass


class BudgetError(UHFError, ValueError):
    """Brute-force enumeration would exceed its leg budget."""


class MissingChannelError(UHFError, ValueError):
    pass


class EmptyWindowError(UHFError, ValueError):
    pass


class BranchError(UHFError, ArithmeticError):
    """Determinant vanishes on the continuation path from the identity."""

    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class MarginError(UHFError, ValueError):
    """Holomorphy margin is not positive on the requested contour."""


class AlgebraError(UHFError, AssertionError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class PreconditionError(UHFError, ValueError):
    pass


class RadiusError(UHFError, ValueError):
    pass


class MarginWarning(UserWarning):
    """Series evaluated outside its certified convergence margin."""
