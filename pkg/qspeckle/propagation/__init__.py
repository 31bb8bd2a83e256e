"""Free-space propagation engine and transfer-function registry."""

from qspeckle.propagation.engine import (
    fresnel_quadrature_kernel,
    propagate,
    propagate_classical,
    propagate_direct_quadrature,
)
from qspeckle.propagation.methods import PropagationMethod, PropagationMethodRegistry

__all__ = [
    "PropagationMethod",
    "PropagationMethodRegistry",
    "fresnel_quadrature_kernel",
    "propagate",
    "propagate_classical",
    "propagate_direct_quadrature",
]
