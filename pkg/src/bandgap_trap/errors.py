"""Exception types raised across the package."""


class BandgapTrapError(Exception):
    """Base class for all package errors."""


class ParameterError(BandgapTrapError, ValueError):
    """Unphysical or out-of-range model parameters."""


class IntegrationError(BandgapTrapError, RuntimeError):
    """The adaptive integrator could not advance (step underflow, non-finite state)."""

    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (at t={t:.12g})")
        self.t = t


class DegenerateMeasurementError(BandgapTrapError, ValueError):
    """A measurement branch annihilates the state (zero success probability)."""


class PositivityError(BandgapTrapError, ValueError):
    """A density matrix or X-state violates positivity beyond tolerance."""


class NonMonotoneError(BandgapTrapError, RuntimeError):
    """ESD predicate is not monotone in the measurement strength."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class ConfigError(BandgapTrapError, ValueError):
    """Invalid run configuration."""

    def __init__(self, message, line=None, key=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
        self.key = key
        self.bare = message
