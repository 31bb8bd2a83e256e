"""Seeded 1D random phase screens with a calibrated correlation length."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy import ndimage
from scipy.optimize import curve_fit

from qspeckle.errors import CalibrationError, DegenerateScreenError, DimensionError, ParameterError
from qspeckle.models import Grid1D

logger = logging.getLogger(__name__)

FIT_FLOOR = 0.05
CALIBRATION_TOLERANCE = 0.02
CALIBRATION_MAX_ITER = 60


@dataclass(frozen=True, eq=False)
class ScatterScreen:
    """Thin phase screen sampled on a grid.

    Parameters
    ----------
    grid : Grid1D
        Lattice the phase is sampled on.
    phase : np.ndarray
        Phase in radians, unwrapped as generated.
    sigma0_um : float
        Measured correlation length of ``exp(i phase)``.
    seed : int
        Seed of the uniform draw.
    kernel_width_um : float
        Standard deviation of the Gaussian smoothing kernel.
    phase_gain : float
        Factor applied to the smoothed phase.
    stretched : bool
        Whether the smoothed phase was stretched to the full ``[0, 2 pi]`` range.
    """

    grid: Grid1D
    phase: np.ndarray
    sigma0_um: float
    seed: int
    kernel_width_um: float
    phase_gain: float = 1.0
    stretched: bool = False

    def __post_init__(self) -> None:
        """Validate the phase array."""
        if self.phase.shape != (self.grid.count,):
            msg = f"phase must have shape ({self.grid.count},), got {self.phase.shape}"
            raise DimensionError(msg)
        if not np.all(np.isfinite(self.phase)):
            raise ParameterError("phase must be finite")


@dataclass(frozen=True, eq=False)
class CorrelationProfile:
    """Normalized ``|<exp(i phi(x)) exp(-i phi(x + d))>|`` and its Gaussian fit.

    Parameters
    ----------
    lags_um : np.ndarray
        Lags from ``-n/2`` to ``n/2 - 1`` samples, in micrometres.
    magnitude : np.ndarray
        Correlation magnitude, exactly 1 at zero lag.
    fitted_sigma_um : float
        1/e half-width of the fit ``A exp(-(d/sigma)^2)``.
    fit_residual : float
        RMS deviation of the fit over the fitted lags.
    """

    lags_um: np.ndarray
    magnitude: np.ndarray
    fitted_sigma_um: float
    fit_residual: float

    @property
    def zero_index(self) -> int:
        """Index of the zero lag."""
        return len(self.lags_um) // 2


def _gaussian(d: np.ndarray, amplitude: float, sigma: float) -> np.ndarray:
    return amplitude * np.exp(-((d / sigma) ** 2))


def correlation_profile(phase: np.ndarray, pitch_um: float) -> CorrelationProfile:
    """Measure the correlation length of ``exp(i phase)``.

    The mean of ``exp(i phase)`` is removed before correlating, so an unscattered
    component does not leave a floor. Only the contiguous run of lags around zero with
    magnitude above 0.05 enters the fit.

    Raises
    ------
    DegenerateScreenError
        If the phase is constant, or the correlation never falls below the fit floor.
    """
    phase = np.asarray(phase, dtype=np.float64)
    if np.ptp(phase) == 0:
        raise DegenerateScreenError("Constant phase screen: correlation length exceeds the grid")

    n = phase.size
    phasor = np.exp(1j * phase)
    fluctuation = phasor - phasor.mean()
    spectrum = scipy.fft.fft(fluctuation)
    autocorr = scipy.fft.ifft(np.abs(spectrum) ** 2)
    zero = autocorr[0].real
    if not zero > 1e-20 * n:
        raise DegenerateScreenError("Phase screen has no fluctuating component")

    magnitude = np.abs(autocorr) / zero
    magnitude[0] = 1.0
    magnitude = scipy.fft.fftshift(magnitude)
    lags = (np.arange(n) - n // 2) * pitch_um
    center = n // 2

    right = center
    while right + 1 < n and magnitude[right + 1] > FIT_FLOOR:
        right += 1
    left = center
    while left - 1 >= 0 and magnitude[left - 1] > FIT_FLOOR:
        left -= 1
    if left == 0 or right == n - 1:
        raise DegenerateScreenError("Correlation length exceeds the grid")
    left = min(left, center - 1)
    right = max(right, center + 1)

    x = lags[left : right + 1]
    y = magnitude[left : right + 1]
    guess = max(pitch_um, float(np.max(np.abs(x))) / math.sqrt(math.log(1.0 / FIT_FLOOR)))
    try:
        (amplitude, sigma), _ = curve_fit(
            _gaussian,
            x,
            y,
            p0=(1.0, guess),
            bounds=([0.0, 1e-6 * pitch_um], [np.inf, np.inf]),
        )
    except (RuntimeError, ValueError) as exc:
        msg = f"Gaussian fit of the screen correlation failed: {exc}"
        raise DegenerateScreenError(msg) from exc

    fitted = _gaussian(x, amplitude, sigma)
    return CorrelationProfile(
        lags_um=lags,
        magnitude=magnitude,
        fitted_sigma_um=float(sigma),
        fit_residual=float(np.sqrt(np.mean((y - fitted) ** 2))),
    )


def measure_sigma0(screen: ScatterScreen) -> CorrelationProfile:
    """Measure the correlation length of a screen.

    Parameters
    ----------
    screen : ScatterScreen
        Screen to measure.

    Returns
    -------
    CorrelationProfile

    Raises
    ------
    DegenerateScreenError
        If the screen is constant.
    """
    return correlation_profile(screen.phase, screen.grid.pitch_um)


def _shape_phase(
    raw: np.ndarray, kernel_width_um: float, pitch_um: float, phase_gain: float, stretch: bool
) -> np.ndarray:
    """Smooth with a circular Gaussian kernel, optionally stretch, then apply the gain."""
    if kernel_width_um > 0:
        phase = ndimage.gaussian_filter1d(raw, sigma=kernel_width_um / pitch_um, mode="wrap")
    else:
        phase = raw.copy()
    if stretch:
        spread = np.ptp(phase)
        if spread > 0:
            phase = (phase - phase.min()) * (2.0 * math.pi / spread)
    return phase * phase_gain


def generate_screen(
    grid: Grid1D,
    target_sigma0_um: float,
    seed: int,
    *,
    phase_gain: float = 1.0,
    stretch: bool = False,
    kernel_width_um: float | None = None,
) -> ScatterScreen:
    """Draw a phase screen whose ``exp(i phi)`` correlation length matches a target.

    Phases are drawn i.i.d. uniform on ``(0, 1)``, scaled to ``[0, 2 pi]`` and smoothed by
    circular convolution with a Gaussian kernel. The kernel width is found by bisection
    until the measured correlation length is within 2% of the target.

    Parameters
    ----------
    grid : Grid1D
        Lattice to sample on.
    target_sigma0_um : float
        Requested correlation length; between ``3 * pitch`` and ``span / 20``.
    seed : int
        Non-negative seed; the same ``(grid, target, seed)`` gives the same screen.
    phase_gain : float
        Factor applied to the smoothed phase. Values above 1 push the screen towards the
        strong-scattering regime.
    stretch : bool
        Stretch the smoothed phase back to the full ``[0, 2 pi]`` range before the gain.
    kernel_width_um : float | None
        Known kernel width. When given, calibration is skipped.

    Returns
    -------
    ScatterScreen

    Raises
    ------
    ParameterError
        If the target is not resolvable on the grid or the seed is negative.
    CalibrationError
        If bisection does not converge in 60 iterations.
    """
    if target_sigma0_um < 3 * grid.pitch_um:
        msg = f"target_sigma0_um={target_sigma0_um} is below 3 * pitch = {3 * grid.pitch_um}"
        raise ParameterError(msg)
    if target_sigma0_um > grid.span_um / 20:
        msg = f"target_sigma0_um={target_sigma0_um} exceeds span / 20 = {grid.span_um / 20}"
        raise ParameterError(msg)
    if seed < 0:
        msg = f"seed must be >= 0, got {seed}"
        raise ParameterError(msg)
    if not phase_gain > 0:
        msg = f"phase_gain must be > 0, got {phase_gain}"
        raise ParameterError(msg)

    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.0, 1.0, grid.count) * (2.0 * math.pi)

    if kernel_width_um is not None:
        phase = _shape_phase(raw, kernel_width_um, grid.pitch_um, phase_gain, stretch)
        profile = correlation_profile(phase, grid.pitch_um)
        return ScatterScreen(grid, phase, profile.fitted_sigma_um, seed, kernel_width_um, phase_gain, stretch)

    lo, hi = 0.0, grid.span_um / 8
    for iteration in range(CALIBRATION_MAX_ITER):
        width = 0.5 * (lo + hi)
        phase = _shape_phase(raw, width, grid.pitch_um, phase_gain, stretch)
        try:
            measured = correlation_profile(phase, grid.pitch_um).fitted_sigma_um
        except DegenerateScreenError:
            hi = width
            continue
        if abs(measured - target_sigma0_um) <= CALIBRATION_TOLERANCE * target_sigma0_um:
            logger.debug(
                "Calibrated screen seed=%d kernel=%.3f um sigma0=%.3f um after %d iterations",
                seed,
                width,
                measured,
                iteration + 1,
            )
            return ScatterScreen(grid, phase, measured, seed, width, phase_gain, stretch)
        if measured < target_sigma0_um:
            lo = width
        else:
            hi = width

    msg = f"Screen calibration to {target_sigma0_um} um did not converge in {CALIBRATION_MAX_ITER} iterations"
    raise CalibrationError(msg)


def quantize_screen(screen: ScatterScreen, levels: int = 256) -> ScatterScreen:
    """Stretch a screen to the full grey range of a phase modulator and quantize it.

    The phase is mapped linearly onto ``0 .. levels - 1`` and back to ``[0, 2 pi)``.

    Parameters
    ----------
    screen : ScatterScreen
        Screen to quantize.
    levels : int
        Number of grey levels, 256 for an 8-bit modulator.

    Returns
    -------
    ScatterScreen
        Quantized screen with a re-measured correlation length.
    """
    if levels < 2:
        msg = f"levels must be >= 2, got {levels}"
        raise ParameterError(msg)
    spread = np.ptp(screen.phase)
    if spread == 0:
        raise DegenerateScreenError("Cannot quantize a constant screen")
    grey = np.round((screen.phase - screen.phase.min()) / spread * (levels - 1))
    phase = grey * (2.0 * math.pi / levels)
    profile = correlation_profile(phase, screen.grid.pitch_um)
    return ScatterScreen(
        grid=screen.grid,
        phase=phase,
        sigma0_um=profile.fitted_sigma_um,
        seed=screen.seed,
        kernel_width_um=screen.kernel_width_um,
        phase_gain=screen.phase_gain,
        stretched=True,
    )
