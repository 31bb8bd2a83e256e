"""Abstract free-space transfer function and registry."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any

import numpy as np


class PropagationMethod(ABC):
    """Base class for diagonal free-space transfer functions.

    A method maps angular spatial frequencies to the complex factor applied to one
    photon's spectrum over a distance ``z``. Biphoton propagation applies it along both
    axes, ``H(k1) * H(k2)``.

    Attributes
    ----------
    name : str
        Registry key (e.g. ``"angular_spectrum"``).
    description : str
        Human-readable description of the transfer function.
    """

    name: str = ""
    description: str = ""

    @abstractmethod
    def transfer(self, k: np.ndarray, k0: float, z_um: float) -> np.ndarray:
        """Return ``H(k)`` for forward propagation over *z_um*.

        Parameters
        ----------
        k : np.ndarray
            Angular spatial frequencies in rad/um.
        k0 : float
            Free-space wavenumber in rad/um.
        z_um : float
            Propagation distance in micrometres, non-negative.

        Returns
        -------
        np.ndarray
            Complex transfer factors with the shape of *k*.
        """

    def propagating(self, k: np.ndarray, k0: float) -> np.ndarray:
        """Boolean mask of the modes this method carries; all modes by default."""
        return np.ones(k.shape, dtype=bool)


class PropagationMethodRegistry:
    """Discover and instantiate registered propagation methods."""

    _methods: dict[str, type[PropagationMethod]] = {}

    @classmethod
    def register(cls, name: str):
        """Class decorator that registers a propagation method under *name*.

        Parameters
        ----------
        name : str
            Lookup key used by run configurations.

        Returns
        -------
        Callable
            The original class, unmodified.
        """

        def decorator(klass: type[PropagationMethod]) -> type[PropagationMethod]:
            cls._methods[name] = klass
            return klass

        return decorator

    @classmethod
    def create(cls, name: str, **kwargs: Any) -> PropagationMethod:
        """Instantiate a registered propagation method.

        Parameters
        ----------
        name : str
            Registered method name.
        **kwargs
            Forwarded to the method constructor.

        Returns
        -------
        PropagationMethod

        Raises
        ------
        KeyError
            If *name* is not registered.
        """
        if name not in cls._methods:
            available = ", ".join(sorted(cls._methods)) or "(none)"
            msg = f"Unknown method {name!r}. Available: {available}"
            raise KeyError(msg)
        return cls._methods[name](**kwargs)

    @classmethod
    def available(cls) -> list[str]:
        """Return sorted list of registered method names."""
        return sorted(cls._methods)
