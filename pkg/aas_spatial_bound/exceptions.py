# -*- coding: utf-8 -*-

"""Exceptions raised across the package."""


class SpatialBoundError(Exception):
    """base class for all errors raised by this package"""


class DomainError(SpatialBoundError, ValueError):
    """input outside the domain of a model (angles, parameters)"""


class WaveformError(SpatialBoundError, ValueError):
    """invalid waveform request or incompatible sample streams"""


class SpectralError(SpatialBoundError, ValueError):
    """invalid spectral estimation or integration request"""


class GridMismatchError(SpatialBoundError, ValueError):
    """angle or frequency grids that should be identical are not"""


class BudgetExceededError(SpatialBoundError, RuntimeError):
    """simulation would process more samples than allowed"""


class CalibrationError(SpatialBoundError, RuntimeError):
    """calibration target cannot be reached"""


class ConfigError(SpatialBoundError, ValueError):
    """invalid scenario configuration"""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = f"line {line}: " if line else ""
        suffix = f" [{path}]" if path else ""
        super().__init__(f"{prefix}{message}{suffix}")
