"""Exception types raised across the package."""


class LandscapeError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(LandscapeError, ValueError):
    pass


class IndexOutOfRange(LandscapeError, IndexError):
    pass


class NotHermitian(LandscapeError, ValueError):
    pass


class NotSymmetric(LandscapeError, ValueError):
    pass


class NotReal(LandscapeError, ValueError):
    pass


class NoConvergence(LandscapeError, RuntimeError):
    pass


class NonFiniteValue(LandscapeError, ArithmeticError):
    pass


class FullRank(LandscapeError):
    """The point has rank(diag(v) W) = d, so no null-space saddle direction exists."""


class AlreadyOptimal(LandscapeError):
    """The optimality residual vanishes; the point is a global minimum."""


class Divergence(LandscapeError, RuntimeError):
    pass


class RangeError(LandscapeError, ValueError):
    pass


class LinearlyFittable(LandscapeError):
    """An affine model fits the data exactly, so the CReLU construction degenerates."""


class RadiusTooLarge(LandscapeError, ValueError):
    pass


class DomainError(LandscapeError, ValueError):
    pass


class FormatError(LandscapeError, ValueError):
    """A JSON file does not match the dataset or weights layout."""
