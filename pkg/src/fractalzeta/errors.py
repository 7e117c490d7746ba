"""Exception types shared across the package."""


class FractalZetaError(Exception):
    pass


class PoleHit(FractalZetaError):
    """A denominator vanished (numerically) at the evaluation point."""


class NotAZero(FractalZetaError):
    pass


class HigherOrder(FractalZetaError):
    pass


class NonIntegerWinding(FractalZetaError):
    pass


class BadParameter(FractalZetaError, ValueError):
    pass


class Divergent(FractalZetaError):
    pass


class NoRealRoot(FractalZetaError):
    pass


class CountMismatch(FractalZetaError):
    pass


class IllConditioned(FractalZetaError):
    """Boundary winding could not be resolved (a root sits on the contour)."""


class Ambiguous(FractalZetaError):
    pass


class NotLattice(FractalZetaError):
    pass


class UnsupportedParams(FractalZetaError, ValueError):
    pass


class NotAPole(FractalZetaError):
    pass


class OutOfValidity(FractalZetaError, ValueError):
    pass


class InsufficientWindow(FractalZetaError):
    pass


class ResourceLimit(FractalZetaError):
    pass


class EpsilonTooSmall(FractalZetaError, ValueError):
    pass


class InsufficientRange(FractalZetaError, ValueError):
    pass


class NotConverged(FractalZetaError):
    pass
