"""Exception types shared across the package."""


class GasvolError(Exception):
    """Base class for all errors raised by gasvol."""


class ConfigError(GasvolError):
    """Invalid configuration value or unsupported option."""


class DataError(GasvolError):
    """Malformed or inconsistent input data."""


class EstimationError(GasvolError):
    """A numerical estimation step failed or is degenerate."""


class PilotFitError(EstimationError):
    """Pilot regression failed to converge on every attempt.

    Carries the best-effort network and its report so callers can inspect
    or reuse them despite the failure.
    """

    def __init__(self, message, network=None, report=None):
        super().__init__(message)
        self.network = network
        self.report = report


class ExperimentError(GasvolError):
    """A Monte Carlo experiment could not be completed reliably."""
