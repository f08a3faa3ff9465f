"""Exception hierarchy.

The CLI maps the three categories (config, numeric, io) onto exit codes.
"""


class AnnealError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(AnnealError, ValueError):
    exit_code = 2


class NumericError(AnnealError, ArithmeticError):
    exit_code = 3


class OutputError(AnnealError, OSError):
    exit_code = 4


class IntegratorError(NumericError):
    """Norm drift of an RK4 evolution exceeded its tolerance."""

    def __init__(self, message, drift=None, steps=None):
        super().__init__(message)
        self.drift = drift
        self.steps = steps


class QuadratureError(NumericError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate=None, bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.bound = bound


class LambertConvergenceError(NumericError):
    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class RootNotFoundError(NumericError):
    """A bracketing root search found no sign change."""

    def __init__(self, message, bracket=None, values=None):
        super().__init__(message)
        self.bracket = bracket
        self.values = values
