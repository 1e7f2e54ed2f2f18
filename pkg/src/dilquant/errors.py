"""Exception hierarchy shared by every module of the package."""


class QuantizationError(Exception):
    """Base class for all package errors."""


class ValidationError(QuantizationError, ValueError):
    """A precondition on the inputs is violated."""


class DimensionMismatch(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class MomentDivergence(ValidationError):
    """The requested moment of the distribution is infinite."""


class NoKnownThetaStar(ValidationError):
    pass


class InvalidRegime(ValidationError):
    pass


class MomentRestriction(ValidationError):
    pass


class RegimeViolation(ValidationError):
    pass


class NumericalError(QuantizationError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


class QuadratureFailure(NumericalError):
    pass


class NonConvergence(NumericalError):
    def __init__(self, message, residual=None, level=None):
        super().__init__(message)
        self.residual = residual
        self.level = level


class SingularJacobian(NumericalError):
    pass


class DivergentIntegral(NumericalError):
    pass


class ConsistencyError(NumericalError):
    pass
