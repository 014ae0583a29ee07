"""Exception hierarchy shared by all ccball modules."""


class CCBallError(Exception):
    """Base class for every error raised by ccball."""


class DomainError(CCBallError, ValueError):
    """An argument lies outside the region where the computation is defined."""


class TurningPointError(DomainError):
    """The requested abscissa is at or beyond the geodesic's turning point."""

    def __init__(self, message, x_star=None):
        super().__init__(message)
        self.x_star = x_star


class NoBracketError(CCBallError, ValueError):
    """Root finder called on an interval without a sign change."""


class UnreachableTargetError(CCBallError):
    """No x-monotone geodesic from the origin ends at the target."""


class ConvergenceError(CCBallError):
    """An iterative solver ran out of iterations."""
