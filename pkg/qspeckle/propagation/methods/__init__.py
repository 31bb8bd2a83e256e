"""Propagation method registry and built-in transfer functions."""

from qspeckle.propagation.methods.base import PropagationMethod, PropagationMethodRegistry

__all__ = ["PropagationMethod", "PropagationMethodRegistry"]

# Auto-register built-in methods on import.


def _auto_register() -> None:
    """Import built-in methods, triggering their registration decorators."""
    import importlib

    for mod in ("angular_spectrum", "fresnel"):
        importlib.import_module(f"qspeckle.propagation.methods.{mod}")


_auto_register()
