"""Separable free-space propagation of biphoton and classical fields."""

from __future__ import annotations

import logging

import numpy as np
import scipy.fft
from scipy import special

from qspeckle.errors import DimensionError, ParameterError
from qspeckle.models import UM_PER_CM, UM_PER_NM, BiphotonField, Grid1D
from qspeckle.propagation.methods import PropagationMethod, PropagationMethodRegistry

logger = logging.getLogger(__name__)

DIRECT_QUADRATURE_MAX_COUNT = 128


def _resolve(method: str | PropagationMethod) -> PropagationMethod:
    if isinstance(method, PropagationMethod):
        return method
    return PropagationMethodRegistry.create(method)


def _transfer(
    method: PropagationMethod, count: int, pitch_um: float, lambda_nm: float, z_cm: float, backward: bool
) -> np.ndarray:
    if z_cm < 0:
        msg = f"z_cm must be >= 0, got {z_cm}; use backward=True to back-propagate"
        raise ParameterError(msg)
    k = 2.0 * np.pi * scipy.fft.fftfreq(count, d=pitch_um)
    k0 = 2.0 * np.pi / (lambda_nm * UM_PER_NM)
    h = method.transfer(k, k0, z_cm * UM_PER_CM)
    return np.conj(h) if backward else h


def _embed(values: np.ndarray, count: int) -> np.ndarray:
    """Place *values* at the center of a zero array twice as large along every axis."""
    offset = count // 2
    padded = np.zeros(tuple(2 * s for s in values.shape), dtype=np.complex128)
    index = tuple(slice(offset, offset + count) for _ in values.shape)
    padded[index] = values
    return padded


def _crop(values: np.ndarray, count: int) -> np.ndarray:
    offset = count // 2
    index = tuple(slice(offset, offset + count) for _ in values.shape)
    return values[index]


def propagate(
    field: BiphotonField,
    z_cm: float,
    method: str | PropagationMethod = "angular_spectrum",
    *,
    backward: bool = False,
    pad: bool = False,
    workers: int | None = None,
) -> BiphotonField:
    """Propagate a biphoton field over *z_cm* with a separable transfer function.

    The field is transformed with a 2D FFT, multiplied by ``H(k1) * H(k2)`` and
    transformed back. Boundaries are periodic unless *pad* is set.

    Parameters
    ----------
    field : BiphotonField
        Input field.
    z_cm : float
        Non-negative distance in centimetres.
    method : str | PropagationMethod
        Registered method name or instance.
    backward : bool
        Apply the conjugate transfer; the returned ``z_cm`` decreases.
    pad : bool
        Zero-pad to twice the grid before propagating and crop afterwards.
    workers : int | None
        FFT worker threads. Results do not depend on this value.

    Returns
    -------
    BiphotonField

    Raises
    ------
    ParameterError
        If *z_cm* is negative.
    """
    solver = _resolve(method)
    n = field.grid.count
    amplitudes = _embed(field.amplitudes, n) if pad else field.amplitudes
    h = _transfer(solver, amplitudes.shape[0], field.grid.pitch_um, field.lambda_nm, z_cm, backward)

    spectrum = scipy.fft.fft2(amplitudes, workers=workers)
    spectrum *= h[:, None]
    spectrum *= h[None, :]
    out = scipy.fft.ifft2(spectrum, workers=workers, overwrite_x=True)
    if pad:
        out = _crop(out, n)

    z_new = field.z_cm - z_cm if backward else field.z_cm + z_cm
    logger.debug("Propagated %dx%d field by %.4g cm with %s", n, n, z_cm, solver.name)
    return field.replace(np.ascontiguousarray(out), z_cm=z_new)


def propagate_classical(
    values: np.ndarray,
    grid: Grid1D,
    z_cm: float,
    lambda_nm: float,
    method: str | PropagationMethod = "angular_spectrum",
    *,
    backward: bool = False,
    pad: bool = False,
) -> np.ndarray:
    """Propagate a single-photon (classical) 1D field with the same transfer function.

    Parameters
    ----------
    values : np.ndarray
        Complex field samples on *grid*.
    grid : Grid1D
        Lattice of *values*.
    z_cm : float
        Non-negative distance in centimetres.
    lambda_nm : float
        Wavelength in nanometres.
    method : str | PropagationMethod
        Registered method name or instance.
    backward : bool
        Apply the conjugate transfer.
    pad : bool
        Zero-pad to twice the grid before propagating.

    Returns
    -------
    np.ndarray
        Propagated complex samples.
    """
    values = np.asarray(values, dtype=np.complex128)
    if values.shape != (grid.count,):
        msg = f"values must have shape ({grid.count},), got {values.shape}"
        raise DimensionError(msg)
    solver = _resolve(method)
    work = _embed(values, grid.count) if pad else values
    h = _transfer(solver, work.shape[0], grid.pitch_um, lambda_nm, z_cm, backward)
    out = scipy.fft.ifft(scipy.fft.fft(work) * h)
    return _crop(out, grid.count) if pad else out


def fresnel_quadrature_kernel(grid: Grid1D, lambda_nm: float, z_cm: float) -> np.ndarray:
    """Pixel-integrated Fresnel impulse response ``K[x, r]``.

    Each input sample is treated as constant over its pixel and the chirp
    ``exp(i k0 u^2 / 2z) / sqrt(i lambda z)`` is integrated over that pixel with Fresnel
    integrals, so the kernel tends to the identity as ``z -> 0``.
    """
    if not z_cm > 0:
        msg = f"z_cm must be > 0, got {z_cm}"
        raise ParameterError(msg)
    lam_z = lambda_nm * UM_PER_NM * z_cm * UM_PER_CM
    scale = np.sqrt(2.0 / lam_z)
    x = grid.coords()
    u = x[:, None] - x[None, :]
    half = 0.5 * grid.pitch_um
    s_hi, c_hi = special.fresnel((u + half) * scale)
    s_lo, c_lo = special.fresnel((u - half) * scale)
    return ((c_hi - c_lo) + 1j * (s_hi - s_lo)) / (1.0 + 1.0j)


def propagate_direct_quadrature(field: BiphotonField, z_cm: float) -> BiphotonField:
    """Evaluate the Fresnel diffraction integral by direct summation (small-grid oracle).

    ``psi_z = K psi_0 K^T`` with the pixel-integrated kernel of
    :func:`fresnel_quadrature_kernel`. The integral runs over the grid window only
    (no periodic wrap-around). Phases follow the Fresnel transfer convention, without
    ``exp(i k0 z)``.

    Raises
    ------
    ParameterError
        If the grid has more than 128 samples or *z_cm* is not positive.
    """
    if field.grid.count > DIRECT_QUADRATURE_MAX_COUNT:
        msg = f"Direct quadrature is limited to {DIRECT_QUADRATURE_MAX_COUNT} samples, got {field.grid.count}"
        raise ParameterError(msg)
    kernel = fresnel_quadrature_kernel(field.grid, field.lambda_nm, z_cm)
    out = kernel @ field.amplitudes @ kernel.T
    return field.replace(out, z_cm=field.z_cm + z_cm)
