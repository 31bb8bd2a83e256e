"""Input state, scatterer application, sum/difference rotation, regime and aliasing bounds."""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

import numpy as np
from scipy import ndimage

from qspeckle.errors import DimensionError, ParameterError
from qspeckle.models import UM_PER_CM, UM_PER_MM, UM_PER_NM, BiphotonField, Grid1D, Regime, RegimeReport, SourceParams

if TYPE_CHECKING:
    from qspeckle.scatterer import ScatterScreen

logger = logging.getLogger(__name__)


def build_input_state(grid: Grid1D, src: SourceParams) -> BiphotonField:
    """Sample the Gaussian two-photon amplitude at the scatterer plane.

    ``psi(r1, r2) = exp(-(r1 - r2)^2 / sigma_-^2) * exp(-(r1 + r2)^2 / sigma_+^2)``,
    unnormalized, so ``psi(0, 0) = 1``.

    Parameters
    ----------
    grid : Grid1D
        Transverse lattice.
    src : SourceParams
        Source widths and wavelength.

    Returns
    -------
    BiphotonField
        Field at ``z = 0``.
    """
    widest = max(src.sigma_minus_um, src.sigma_plus_um)
    if grid.span_um < 2.0 * widest:
        logger.warning(
            "Grid span %.1f um is below 2 * max(sigma) = %.1f um; the input state is truncated",
            grid.span_um,
            2.0 * widest,
        )

    r = grid.coords()
    r1 = r[:, None]
    r2 = r[None, :]
    amplitudes = np.exp(-((r1 - r2) ** 2) / src.sigma_minus_um**2) * np.exp(-((r1 + r2) ** 2) / src.sigma_plus_um**2)
    return BiphotonField(grid=grid, amplitudes=amplitudes.astype(np.complex128), lambda_nm=src.lambda_nm, z_cm=0.0)


def apply_scatterer(field: BiphotonField, screen: ScatterScreen) -> BiphotonField:
    """Imprint the thin-screen phase on both photons.

    Parameters
    ----------
    field : BiphotonField
        Field just before the screen.
    screen : ScatterScreen
        Phase screen sampled on the same grid.

    Returns
    -------
    BiphotonField
        ``psi(r1, r2) * exp(i phi(r1)) * exp(i phi(r2))``.

    Raises
    ------
    DimensionError
        If the screen grid differs from the field grid.
    """
    if screen.grid != field.grid:
        msg = f"Screen grid {screen.grid} does not match field grid {field.grid}"
        raise DimensionError(msg)
    phasor = np.exp(1j * screen.phase)
    return field.replace(field.amplitudes * (phasor[:, None] * phasor[None, :]))


def rotate_sum_diff(image: np.ndarray) -> np.ndarray:
    """Rotate a ``(x1, x2)`` map by 45 degrees onto sum/difference axes.

    The rotation is about the grid center ``(n/2, n/2)`` and uses bilinear interpolation.
    Output columns run along the sum coordinate ``(x1 + x2)/sqrt(2)`` and rows along the
    difference coordinate ``(x1 - x2)/sqrt(2)``; one output pixel spans one input pitch.
    The output has the input's shape, and samples falling outside the input are zero.

    Parameters
    ----------
    image : np.ndarray
        Real square matrix indexed ``[x1, x2]``.

    Returns
    -------
    np.ndarray
        Rotated matrix indexed ``[difference, sum]``.

    Raises
    ------
    DimensionError
        If *image* is not a square 2D array.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        msg = f"rotate_sum_diff requires a square matrix, got shape {image.shape}"
        raise DimensionError(msg)

    n = image.shape[0]
    c = n // 2
    rows, cols = np.indices((n, n), dtype=np.float64)
    diff = rows - c
    total = cols - c
    src_rows = c + (total + diff) / math.sqrt(2.0)
    src_cols = c + (total - diff) / math.sqrt(2.0)
    return ndimage.map_coordinates(image, [src_rows, src_cols], order=1, mode="constant", cval=0.0)


def regime_boundaries(src: SourceParams, sigma0_um: float, z_cm: float = 0.0) -> RegimeReport:
    """Compute the near/far-field boundaries and predicted widths at *z_cm*.

    Parameters
    ----------
    src : SourceParams
        Source widths and wavelength.
    sigma0_um : float
        Scatterer correlation length.
    z_cm : float
        Query distance from the scatterer.

    Returns
    -------
    RegimeReport

    Notes
    -----
    Speckle widths are ``w = max(sigma0, z*lambda/sigma)`` per axis and field-of-view widths
    ``l = max(sigma, z*lambda/sigma0)``. Inside the near field these are ``sigma0`` and
    ``sigma``; inside the far field ``z*lambda/sigma`` and ``z*lambda/sigma0``.
    """
    if not sigma0_um > 0:
        msg = f"sigma0_um must be > 0, got {sigma0_um}"
        raise ParameterError(msg)
    if z_cm < 0:
        msg = f"z_cm must be >= 0, got {z_cm}"
        raise ParameterError(msg)

    lam = src.wavelength_um
    narrow = min(src.sigma_minus_um, src.sigma_plus_um)
    wide = max(src.sigma_minus_um, src.sigma_plus_um)
    z_nf_cm = sigma0_um * narrow / lam / UM_PER_CM
    z_ff_cm = sigma0_um * wide / lam / UM_PER_CM

    if z_cm < z_nf_cm:
        regime = Regime.NEAR_FIELD
    elif z_cm > z_ff_cm:
        regime = Regime.FAR_FIELD
    else:
        regime = Regime.INTERMEDIATE

    z_um = z_cm * UM_PER_CM
    return RegimeReport(
        z_nf_cm=z_nf_cm,
        z_ff_cm=z_ff_cm,
        z_cm=z_cm,
        regime=regime,
        w_plus_um=max(sigma0_um, z_um * lam / src.sigma_plus_um),
        w_minus_um=max(sigma0_um, z_um * lam / src.sigma_minus_um),
        l_plus_mm=max(src.sigma_plus_um, z_um * lam / sigma0_um) / UM_PER_MM,
        l_minus_mm=max(src.sigma_minus_um, z_um * lam / sigma0_um) / UM_PER_MM,
    )


def aliasing_limit_cm(grid: Grid1D, lambda_nm: float) -> float:
    """Largest distance the grid can propagate to without the diffracted field wrapping around.

    ``z_max = pitch * span / lambda``.
    """
    return grid.pitch_um * grid.span_um / (lambda_nm * UM_PER_NM) / UM_PER_CM
