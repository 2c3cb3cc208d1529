"""Exception hierarchy.

Input problems derive from :class:`ValueError` (the CLI maps them to exit
status 2); numerical failures derive from :class:`NumericError` (exit 3).
"""


class CslHeatError(Exception):
    pass


class NotFoundError(CslHeatError, KeyError):
    """Unknown material or scenario name."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DomainError(CslHeatError, ValueError):
    """Argument outside the domain of an operation."""


class InvalidGridError(CslHeatError, ValueError):
    pass


class UnsupportedError(CslHeatError, ValueError):
    """The requested operation is not defined for this input kind."""


class ConfigError(CslHeatError, ValueError):
    """Malformed or unknown configuration key."""


class NumericError(CslHeatError, ArithmeticError):
    pass


class AccuracyError(NumericError):
    """Quadrature did not reach the requested tolerance.

    ``best_estimate`` and ``error_estimate`` carry what was obtained.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class ConvergenceError(NumericError):
    """Newton iteration failed; ``diagnostics`` holds the residual history."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class IntegratorError(NumericError):
    """Trace or norm drift beyond the integrator's guarantee."""
