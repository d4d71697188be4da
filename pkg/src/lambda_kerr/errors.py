"""Exception types raised across the package."""


class DegenerateRootsError(ArithmeticError):
    """Two roots of a photon sector's characteristic cubic collide.

    ``pair`` holds the (0-based) indices of the colliding roots and ``n`` the
    photon sector, when known.
    """

    def __init__(self, message, pair=None, n=None):
        super().__init__(message)
        self.pair = pair
        self.n = n


class NumericalBranchError(ArithmeticError):
    """The trigonometric root formula was asked for a branch it cannot represent."""


class NumericalConsistencyError(ArithmeticError):
    """A computed quantity fell outside its physical range by more than roundoff."""


class UndefinedStatisticsError(ValueError):
    """A normalised statistic was requested for a state with zero mean photon number."""


class NormDriftError(RuntimeError):
    """Numerical integration lost norm beyond the configured limit; use a smaller dt."""
