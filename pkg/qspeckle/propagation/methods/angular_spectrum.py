"""Exact scalar angular-spectrum transfer function."""

from __future__ import annotations

import numpy as np

from qspeckle.propagation.methods.base import PropagationMethod, PropagationMethodRegistry


@PropagationMethodRegistry.register("angular_spectrum")
class AngularSpectrum(PropagationMethod):
    """``H(k) = exp(i z sqrt(k0^2 - k^2))`` with evanescent modes set to zero.

    Parameters
    ----------
    zero_evanescent : bool
        Zero components with ``k^2 > k0^2``. When ``False`` they are damped by the
        imaginary square root instead, which is not unitary.
    """

    name = "angular_spectrum"
    description = "Angular spectrum of plane waves, evanescent modes zeroed."

    def __init__(self, zero_evanescent: bool = True) -> None:
        self.zero_evanescent = zero_evanescent

    def propagating(self, k: np.ndarray, k0: float) -> np.ndarray:
        """Modes with ``k^2 <= k0^2``."""
        return k**2 <= k0**2

    def transfer(self, k: np.ndarray, k0: float, z_um: float) -> np.ndarray:
        """Return the angular-spectrum factor for each frequency."""
        kz = np.sqrt((k0**2 - k**2).astype(np.complex128))
        h = np.exp(1j * z_um * kz)
        if self.zero_evanescent:
            h = np.where(self.propagating(k, k0), h, 0.0)
        return h
