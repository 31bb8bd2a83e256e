"""Exception hierarchy for simulation, analysis, and run orchestration."""

from __future__ import annotations


class QSpeckleError(Exception):
    """Base class for all package errors."""


class ParameterError(QSpeckleError, ValueError):
    """A physical or numerical parameter is out of range."""


class DimensionError(QSpeckleError, ValueError):
    """Array shapes or grids do not match."""


class ConfigError(QSpeckleError, ValueError):
    """A run configuration or environment setting is invalid."""


class DegenerateScreenError(ParameterError):
    """A phase screen has no measurable correlation length."""


class DegenerateDistributionError(ParameterError):
    """A coincidence map cannot be normalized to a probability distribution."""


class EstimatorError(ParameterError):
    """A frame stack cannot feed the coincidence estimator."""


class CalibrationError(QSpeckleError, RuntimeError):
    """Screen calibration did not converge."""


class SaturatedWidthError(QSpeckleError, RuntimeError):
    """A thresholded blob touches the window edge, so its width is not measurable."""


class FitQualityError(QSpeckleError, RuntimeError):
    """A Gaussian fit left a residual above the accepted level."""


class ResolutionError(QSpeckleError, RuntimeError):
    """Numeric quadrature did not converge on doubling the sample count."""


class AliasingError(QSpeckleError):
    """A propagation distance exceeds the grid's aliasing bound."""
