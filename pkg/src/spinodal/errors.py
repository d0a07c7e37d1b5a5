"""Exception types shared across the package."""


class RegimeError(ValueError):
    """Parameters admit no spinodal point (requires b*beta > 1)."""


class DomainError(ValueError):
    """An input lies outside a function's domain of validity."""


class DegenerateCuspError(ValueError):
    """The cusp coefficient vanishes and the normal form degenerates."""


class NondegeneracyError(RuntimeError):
    """A quantity the theory requires to be nonzero is numerically zero."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge."""


class IntegrationError(RuntimeError):
    """Time integration cannot proceed (step floor hit or step budget spent)."""


class BandNotEnteredError(RuntimeError):
    """A trajectory never produced enough samples inside the fitting band."""


class NonExponentialDecayError(RuntimeError):
    """Decay inside the fitting band is not exponential (fit r^2 too low)."""

    def __init__(self, message, rate=None, r_squared=None):
        super().__init__(message)
        self.rate = rate
        self.r_squared = r_squared
