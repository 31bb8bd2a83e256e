"""Shared data models: sampling grids, source parameters, biphoton fields, regime reports."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from qspeckle.errors import DimensionError, ParameterError

UM_PER_MM = 1e3
UM_PER_CM = 1e4
UM_PER_NM = 1e-3


@dataclass(frozen=True)
class Grid1D:
    """Uniform, centered 1D transverse sampling lattice.

    Parameters
    ----------
    count : int
        Number of samples. Must be even and at least 64.
    pitch_um : float
        Sample spacing in micrometres.

    Notes
    -----
    Coordinates are ``r_i = (i - count/2) * pitch_um`` so that ``r = 0`` sits at
    index ``count // 2``, the zero-frequency bin after ``fftshift``.
    """

    count: int
    pitch_um: float

    def __post_init__(self) -> None:
        """Validate grid dimensions."""
        if self.count < 64 or self.count % 2:
            msg = f"count must be even and >= 64, got {self.count}"
            raise ParameterError(msg)
        if not self.pitch_um > 0:
            msg = f"pitch_um must be > 0, got {self.pitch_um}"
            raise ParameterError(msg)

    @property
    def span_um(self) -> float:
        """Physical window width."""
        return self.count * self.pitch_um

    @property
    def center(self) -> int:
        """Index of the ``r = 0`` sample."""
        return self.count // 2

    def coords(self) -> np.ndarray:
        """Sample positions in micrometres."""
        return (np.arange(self.count) - self.center) * self.pitch_um

    def wavenumbers(self) -> np.ndarray:
        """Angular spatial frequencies in rad/um, in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.count, d=self.pitch_um)


@dataclass(frozen=True)
class SourceParams:
    """Gaussian biphoton source.

    Parameters
    ----------
    lambda_nm : float
        Photon wavelength in nanometres.
    sigma_minus_mm : float
        Width along the difference coordinate, in millimetres.
    sigma_plus_mm : float
        Width along the sum coordinate, in millimetres.

    Either width may be the larger one; swapping them models the crystal's far field.
    """

    lambda_nm: float
    sigma_minus_mm: float
    sigma_plus_mm: float

    def __post_init__(self) -> None:
        """Validate that all lengths are positive."""
        for name in ("lambda_nm", "sigma_minus_mm", "sigma_plus_mm"):
            value = getattr(self, name)
            if not value > 0:
                msg = f"{name} must be > 0, got {value}"
                raise ParameterError(msg)

    @property
    def wavelength_um(self) -> float:
        """Wavelength in micrometres."""
        return self.lambda_nm * UM_PER_NM

    @property
    def k0(self) -> float:
        """Free-space wavenumber in rad/um."""
        return 2.0 * math.pi / self.wavelength_um

    @property
    def sigma_minus_um(self) -> float:
        """Difference-coordinate width in micrometres."""
        return self.sigma_minus_mm * UM_PER_MM

    @property
    def sigma_plus_um(self) -> float:
        """Sum-coordinate width in micrometres."""
        return self.sigma_plus_mm * UM_PER_MM

    def swapped(self) -> SourceParams:
        """Return the source with the two widths exchanged."""
        return SourceParams(self.lambda_nm, sigma_minus_mm=self.sigma_plus_mm, sigma_plus_mm=self.sigma_minus_mm)


@dataclass(frozen=True, eq=False)
class BiphotonField:
    """Complex two-photon amplitude on ``grid x grid``.

    Parameters
    ----------
    grid : Grid1D
        Transverse lattice shared by both photons.
    amplitudes : np.ndarray
        Complex matrix indexed ``[r1, r2]``.
    lambda_nm : float
        Photon wavelength in nanometres.
    z_cm : float
        Distance from the scatterer plane in centimetres.
    """

    grid: Grid1D
    amplitudes: np.ndarray
    lambda_nm: float
    z_cm: float = 0.0

    def __post_init__(self) -> None:
        """Validate the amplitude matrix against the grid."""
        expected = (self.grid.count, self.grid.count)
        if self.amplitudes.shape != expected:
            msg = f"amplitudes must have shape {expected}, got {self.amplitudes.shape}"
            raise DimensionError(msg)
        power = self.power()
        if not (np.isfinite(power) and power > 0):
            msg = f"field power must be finite and > 0, got {power}"
            raise ParameterError(msg)

    def power(self) -> float:
        """Total power ``sum |psi|^2 * pitch^2``."""
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.pitch_um**2)

    def replace(self, amplitudes: np.ndarray, z_cm: float | None = None) -> BiphotonField:
        """Return a field on the same grid with new amplitudes."""
        return BiphotonField(
            grid=self.grid,
            amplitudes=amplitudes,
            lambda_nm=self.lambda_nm,
            z_cm=self.z_cm if z_cm is None else z_cm,
        )


class Regime(str, Enum):
    """Propagation zone of a biphoton behind a thin scatterer."""

    NEAR_FIELD = "near_field"
    INTERMEDIATE = "intermediate"
    FAR_FIELD = "far_field"


@dataclass(frozen=True)
class RegimeReport:
    """Zone boundaries and predicted speckle and field-of-view widths at one distance.

    Parameters
    ----------
    z_nf_cm : float
        Near-field boundary, ``sigma0 * min(sigma-, sigma+) / lambda``.
    z_ff_cm : float
        Far-field boundary, ``sigma0 * max(sigma-, sigma+) / lambda``.
    z_cm : float
        Query distance.
    regime : Regime
        Zone containing ``z_cm``.
    w_plus_um, w_minus_um : float
        Predicted speckle widths along the sum and difference coordinates.
    l_plus_mm, l_minus_mm : float
        Predicted field-of-view widths along the sum and difference coordinates.
    """

    z_nf_cm: float
    z_ff_cm: float
    z_cm: float
    regime: Regime
    w_plus_um: float
    w_minus_um: float
    l_plus_mm: float
    l_minus_mm: float
