class CgDaeError(Exception):
    """Base class for solver failures."""


class EvaluationError(CgDaeError):
    """A problem callback returned non-finite values or could not be evaluated."""


class SingularNewtonMatrix(CgDaeError):
    """The saddle-point Newton matrix is numerically singular.

    Usually a rank-deficient constraint Jacobian or a step size that is too
    large for the local solvability argument.
    """


class NoConvergence(CgDaeError):
    """Newton's method did not reach the residual tolerance."""


class IntegrationError(CgDaeError):
    """Failure on a specific interval; carries the partial trajectory."""

    def __init__(self, message, interval, partial, cause):
        super().__init__(message)
        self.interval = interval
        self.partial = partial
        self.cause = cause
