"""Exception hierarchy shared by all maglab modules."""


class MaglabError(Exception):
    """Base class; ``name`` is what the CLI reports in error payloads."""

    @property
    def name(self):
        return type(self).__name__


class PoleArgument(MaglabError, ValueError):
    pass


class NonPositiveBase(MaglabError, ValueError):
    pass


class ToleranceNotMet(MaglabError, ArithmeticError):
    def __init__(self, msg, estimate=None, error=None):
        super().__init__(msg)
        self.estimate = estimate
        self.error = error


class SlowDecay(MaglabError, ValueError):
    pass


class EvaluationFailure(MaglabError, ArithmeticError):
    pass


class NotPrime(MaglabError, ValueError):
    pass


class DimensionMismatch(MaglabError, ValueError):
    pass


class NotNormalized(MaglabError, ValueError):
    pass


class SingularKernel(MaglabError, ArithmeticError):
    def __init__(self, msg, condition=None):
        super().__init__(msg)
        self.condition = condition


class NotPositiveDefinite(MaglabError, ValueError):
    def __init__(self, msg, min_eigenvalue=None):
        super().__init__(msg)
        self.min_eigenvalue = min_eigenvalue


class OrderExceeded(MaglabError, IndexError):
    pass


class ZeroLeadingCoefficient(MaglabError, ZeroDivisionError):
    pass


class OffLattice(MaglabError, ValueError):
    pass


class OutsideStrip(MaglabError, ValueError):
    pass


class InsufficientDepth(MaglabError, ValueError):
    pass


class BoundaryPole(MaglabError, ArithmeticError):
    pass


class NonPowerLaw(MaglabError, ArithmeticError):
    """Raised when sampled data has no power-law leading behaviour.

    ``kind`` is ``"oscillatory"`` (log-periodic drift, e.g. p-adic integers)
    or ``"superpolynomial"`` (decay faster than any power).
    """

    def __init__(self, msg, kind="oscillatory", drift=None):
        super().__init__(msg)
        self.kind = kind
        self.drift = drift


class IllConditioned(MaglabError, ArithmeticError):
    pass


class DisagreeingMethods(MaglabError, ArithmeticError):
    pass


class SchemaError(MaglabError, ValueError):
    pass


class MetricViolation(MaglabError, ValueError):
    pass


class ParseError(MaglabError, ValueError):
    pass
