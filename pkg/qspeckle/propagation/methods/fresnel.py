"""Paraxial Fresnel transfer function."""

from __future__ import annotations

import numpy as np

from qspeckle.propagation.methods.base import PropagationMethod, PropagationMethodRegistry


@PropagationMethodRegistry.register("fresnel")
class Fresnel(PropagationMethod):
    """``H(k) = exp(-i z k^2 / (2 k0))``.

    The global phase ``exp(i k0 z)`` is omitted, so fields agree with the angular-spectrum
    result only up to that phase.
    """

    name = "fresnel"
    description = "Paraxial Fresnel transfer function without the global phase."

    def transfer(self, k: np.ndarray, k0: float, z_um: float) -> np.ndarray:
        """Return the Fresnel factor for each frequency."""
        return np.exp(-1j * z_um * k**2 / (2.0 * k0))
