"""Exception hierarchy shared by every module of the package."""


class PmcVerifyError(Exception):
    """Base class for all errors raised by pmc_verify."""


class DivisionBySingularJet(PmcVerifyError, ZeroDivisionError):
    pass


class DomainError(PmcVerifyError, ValueError):
    pass


class OrderOutOfRange(PmcVerifyError, ValueError):
    pass


class DimensionMismatch(PmcVerifyError, ValueError):
    pass


class NotTangent(PmcVerifyError, ValueError):
    pass


class OffManifold(PmcVerifyError, ValueError):
    pass


class DegenerateMetric(PmcVerifyError, ArithmeticError):
    pass


class InsufficientJetDegree(PmcVerifyError, ValueError):
    pass


class MinimalPoint(PmcVerifyError, ValueError):
    """Raised when a quantity needs |H| > 0 but the surface is minimal at the point."""


class BadParameters(PmcVerifyError, ValueError):
    pass


class NotApplicable(PmcVerifyError):
    """An identity or theorem was requested outside its hypotheses.

    This is not a verification failure; ``reason`` says which hypothesis failed.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class UsageError(PmcVerifyError):
    """Invalid command-line usage; the message names the offending flag."""
