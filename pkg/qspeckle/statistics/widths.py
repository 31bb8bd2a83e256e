"""Speckle and field-of-view width extraction from coincidence maps."""

from __future__ import annotations

import logging
import math

import numpy as np
import scipy.fft
from scipy import ndimage
from scipy.optimize import curve_fit

from qspeckle.core import rotate_sum_diff
from qspeckle.errors import DimensionError, FitQualityError, ParameterError, SaturatedWidthError
from qspeckle.statistics.ensemble import CoincidenceMap

logger = logging.getLogger(__name__)

DEFAULT_BLUR_UM = 200.0
DEFAULT_THRESHOLD = 0.7
MAX_FIT_RESIDUAL = 0.2
ENVELOPE_FLOOR = 1e-3
CONTRAST_FLOOR = 1e-9
SUBPIXEL_FACTOR = 8


def flatten_envelope(values: np.ndarray, pitch_um: float, blur_um: float) -> np.ndarray:
    """Divide by a Gaussian-blurred copy to remove the slowly varying envelope.

    Works on 1D and 2D arrays; the blur is circular. The divisor is floored at 1e-3 of its
    maximum so dark regions do not blow up.
    """
    if not blur_um > 0:
        msg = f"blur_um must be > 0, got {blur_um}"
        raise ParameterError(msg)
    values = np.asarray(values, dtype=np.float64)
    envelope = ndimage.gaussian_filter(values, sigma=blur_um / pitch_um, mode="wrap")
    peak = float(envelope.max())
    if not peak > 0:
        raise ParameterError("Cannot flatten a map without positive values")
    return values / np.maximum(envelope, ENVELOPE_FLOOR * peak)


def _autocorrelation(values: np.ndarray) -> np.ndarray:
    spectrum = scipy.fft.fft2(values)
    return scipy.fft.ifft2(np.abs(spectrum) ** 2).real


def _ensemble_normalized(cmap: CoincidenceMap, envelope: CoincidenceMap) -> np.ndarray:
    if envelope.values.shape != cmap.values.shape:
        msg = f"Envelope map shape {envelope.values.shape} does not match {cmap.values.shape}"
        raise DimensionError(msg)
    single_total = float(cmap.values.sum())
    envelope_total = float(envelope.values.sum())
    if not (single_total > 0 and envelope_total > 0):
        raise SaturatedWidthError("Map or envelope has no coincidences")
    numerator = _autocorrelation(cmap.values / single_total)
    denominator = _autocorrelation(envelope.values / envelope_total)
    support = denominator > ENVELOPE_FLOOR * denominator[0, 0]
    ratio = np.zeros_like(numerator)
    ratio[support] = numerator[support] / denominator[support] - 1.0
    return ratio


def rotated_autocorrelation(
    cmap: CoincidenceMap,
    blur_um: float = DEFAULT_BLUR_UM,
    *,
    envelope: CoincidenceMap | None = None,
) -> np.ndarray:
    """Envelope-flattened, peak-normalized autocorrelation on sum/difference axes.

    Without *envelope*: flatten by the Gaussian blur, circular 2D autocorrelation, subtract
    the mean. With an ensemble-mean *envelope*: divide the autocorrelation of the normalized
    map by that of the normalized envelope and subtract 1, which leaves the squared
    correlation coefficient of the speckle; lags the envelope does not cover are set to 0.
    In both cases the zero-lag peak is scaled to 1, the zero lag is centered and the array
    is rotated by 45 degrees. The zero lag sits at pixel ``(n/2, n/2)``; rows are difference
    lags, columns sum lags.

    Raises
    ------
    SaturatedWidthError
        If the map has no fluctuations around its envelope.
    DimensionError
        If *envelope* does not match the map shape.
    """
    if envelope is None:
        autocorr = _autocorrelation(flatten_envelope(cmap.values, cmap.pitch_um, blur_um))
        level = float(autocorr.mean())
        autocorr -= level
        floor = CONTRAST_FLOOR * abs(level)
    else:
        autocorr = _ensemble_normalized(cmap, envelope)
        floor = CONTRAST_FLOOR
    peak = autocorr[0, 0]
    if not peak > floor:
        raise SaturatedWidthError("Map has no speckle contrast after flattening")
    autocorr /= peak
    return rotate_sum_diff(scipy.fft.fftshift(autocorr))


def _blob_extents(rotated: np.ndarray, threshold: float) -> tuple[float, float]:
    """Column and row extents, in pixels, of the above-threshold blob at the zero lag.

    The blob is first found on the pixel grid, then re-measured on a bilinear resampling
    ``SUBPIXEL_FACTOR`` times finer over its bounding box plus one pixel.
    """
    labels, _ = ndimage.label(rotated >= threshold)
    n = rotated.shape[0]
    center = n // 2
    rows, cols = np.nonzero(labels == labels[center, center])
    if rows.min() == 0 or cols.min() == 0 or rows.max() == n - 1 or cols.max() == n - 1:
        msg = f"Central correlation blob touches the {n}x{n} window edge; widths are saturated"
        raise SaturatedWidthError(msg)

    factor = SUBPIXEL_FACTOR
    r0, r1 = rows.min() - 1, rows.max() + 1
    c0, c1 = cols.min() - 1, cols.max() + 1
    fine_rows = np.arange((r1 - r0) * factor + 1) / factor + r0
    fine_cols = np.arange((c1 - c0) * factor + 1) / factor + c0
    mesh = np.meshgrid(fine_rows, fine_cols, indexing="ij")
    fine = ndimage.map_coordinates(rotated, mesh, order=1)
    fine_labels, _ = ndimage.label(fine >= threshold)
    seed = fine_labels[(center - r0) * factor, (center - c0) * factor]
    fine_r, fine_c = np.nonzero(fine_labels == seed)
    col_extent = (fine_c.max() - fine_c.min() + 1) / factor
    row_extent = (fine_r.max() - fine_r.min() + 1) / factor
    return float(col_extent), float(row_extent)


def speckle_widths(
    cmap: CoincidenceMap,
    blur_um: float = DEFAULT_BLUR_UM,
    threshold: float = DEFAULT_THRESHOLD,
    *,
    envelope: CoincidenceMap | None = None,
) -> tuple[float, float]:
    """Measure speckle widths along the sum and difference coordinates.

    The rotated autocorrelation is binarized at *threshold* and the 4-connected blob
    containing the zero lag is measured with sub-pixel resolution. Widths are full extents
    in pixels times ``pitch * sqrt(2)``.

    Parameters
    ----------
    cmap : CoincidenceMap
        Single-realization (speckled) map.
    blur_um : float
        Width of the Gaussian envelope blur, used when *envelope* is not given.
    threshold : float
        Binarization level in ``(0, 1)``.
    envelope : CoincidenceMap, optional
        Ensemble-mean map at the same distance; flattens by the ensemble instead of a blur.

    Returns
    -------
    tuple[float, float]
        ``(w_plus_um, w_minus_um)``.

    Raises
    ------
    SaturatedWidthError
        If the central blob touches the window edge.
    """
    if not 0 < threshold < 1:
        msg = f"threshold must be in (0, 1), got {threshold}"
        raise ParameterError(msg)
    rotated = rotated_autocorrelation(cmap, blur_um, envelope=envelope)
    col_extent, row_extent = _blob_extents(rotated, threshold)
    scale = cmap.pitch_um * math.sqrt(2.0)
    w_plus = col_extent * scale
    w_minus = row_extent * scale
    logger.debug("Speckle widths at z=%.3g cm: w+=%.1f um w-=%.1f um", cmap.z_cm, w_plus, w_minus)
    return w_plus, w_minus


def _gaussian(x: np.ndarray, amplitude: float, x0: float, half_width: float) -> np.ndarray:
    return amplitude * np.exp(-(((x - x0) / half_width) ** 2))


def _fit_profile(x: np.ndarray, y: np.ndarray, axis: str) -> float:
    peak = float(y.max())
    if not peak > 0:
        msg = f"Empty {axis} profile"
        raise FitQualityError(msg)
    weights = y / y.sum()
    mean = float(np.sum(weights * x))
    spread = math.sqrt(max(float(np.sum(weights * (x - mean) ** 2)), (x[1] - x[0]) ** 2))
    try:
        (amplitude, x0, half_width), _ = curve_fit(
            _gaussian, x, y, p0=(peak, mean, math.sqrt(2.0) * spread), maxfev=5000
        )
    except RuntimeError as exc:
        msg = f"Gaussian fit of the {axis} profile failed: {exc}"
        raise FitQualityError(msg) from exc
    residual = float(np.sqrt(np.mean((y - _gaussian(x, amplitude, x0, half_width)) ** 2))) / peak
    if residual > MAX_FIT_RESIDUAL:
        msg = f"{axis} profile is not Gaussian: residual {residual:.3f} > {MAX_FIT_RESIDUAL}"
        raise FitQualityError(msg)
    return 2.0 * abs(float(half_width))


def fov_widths(mean_map: CoincidenceMap) -> tuple[float, float]:
    """Field-of-view widths from an ensemble-mean map.

    The map is rotated onto sum/difference axes, and Gaussians ``A exp(-((x - x0)/h)^2)`` are
    fitted to the two axial profiles through the centroid.

    Returns
    -------
    tuple[float, float]
        ``(l_plus_um, l_minus_um)``, 1/e full widths ``2h``.

    Raises
    ------
    FitQualityError
        If a fit fails or its peak-normalized RMS residual exceeds 0.2.
    """
    rotated = rotate_sum_diff(mean_map.values)
    total = float(rotated.sum())
    if not total > 0:
        raise FitQualityError("Mean map has no intensity inside the rotated window")
    row_c, col_c = ndimage.center_of_mass(rotated)
    n = rotated.shape[0]
    x = (np.arange(n) - n // 2) * mean_map.pitch_um
    l_plus = _fit_profile(x, rotated[int(round(row_c)), :], "sum")
    l_minus = _fit_profile(x, rotated[:, int(round(col_c))], "difference")
    return l_plus, l_minus


def speckle_contrast(intensity: np.ndarray, pitch_um: float, blur_um: float) -> float:
    """Standard deviation over mean of the flattened intensity in the illuminated region.

    The illuminated region is where the blurred envelope exceeds half its maximum.
    Fully developed speckle gives 1.
    """
    intensity = np.asarray(intensity, dtype=np.float64)
    envelope = ndimage.gaussian_filter(intensity, sigma=blur_um / pitch_um, mode="wrap")
    region = envelope > 0.5 * envelope.max()
    flat = intensity[region] / envelope[region]
    mean = float(flat.mean())
    if not mean > 0:
        raise ParameterError("Illuminated region has no intensity")
    return float(flat.std() / mean)
