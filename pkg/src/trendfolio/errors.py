"""Exception hierarchy for trendfolio."""


class TrendfolioError(Exception):
    """Base class for all library errors."""


class SpecError(TrendfolioError, ValueError):
    """Invalid market specification."""


class NotSymmetric(SpecError):
    pass


class NotPositiveSemidefinite(SpecError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class BadRange(SpecError):
    pass


class DegenerateRate(TrendfolioError, ValueError):
    """A rate complement of 1 makes a stationary limit diverge."""


class HorizonTooSmall(TrendfolioError, ValueError):
    pass


class DimensionMismatch(TrendfolioError, ValueError):
    pass


class ZeroVariance(TrendfolioError, ArithmeticError):
    pass


class SingularCovariance(TrendfolioError, ArithmeticError):
    """Covariance of the virtual assets is not positive definite."""

    def __init__(self, message, eigenvalue=None, eigenvector=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.eigenvector = eigenvector


class DegenerateQuadratic(TrendfolioError, ArithmeticError):
    pass


class DegenerateDenominator(TrendfolioError, ArithmeticError):
    pass


class RegimeUndefined(TrendfolioError, ValueError):
    pass


class FactorizationFailure(TrendfolioError, ArithmeticError):
    pass


class InsufficientSamples(TrendfolioError, ValueError):
    pass


class UnknownFigure(TrendfolioError, KeyError):
    pass
