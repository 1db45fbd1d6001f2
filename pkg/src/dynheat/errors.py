"""Exception types shared across the package.

Every error raised by the library derives from DynHeatError so callers can
catch one base class.  The subclasses separate misuse (bad arguments), bad
run configuration, numerical breakdown, and failed fits, because the CLI
maps them to different exit messages.
"""


class DynHeatError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(DynHeatError):
    """A run configuration value is missing, unknown, or out of range."""


class InvalidDomainError(ConfigurationError):
    """Domain geometry is inconsistent (e.g. anchor point on the boundary)."""


class UsageError(DynHeatError):
    """An operation was called with arguments outside its contract."""


class ParameterError(DynHeatError):
    """Analysis parameters produce unrepresentable quantities (overflow)."""


class NumericalError(DynHeatError):
    """A linear solver or iteration failed to converge."""


class DegenerateDataError(DynHeatError):
    """Input data carries no information (zero state, identical ensemble)."""


class CalibrationError(DynHeatError):
    """Penalization calibration exhausted its doubling budget."""


class FitFailureError(DynHeatError):
    """An empirical fit left its admissible range; diagnostics attached."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
