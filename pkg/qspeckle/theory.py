"""Predicted biphoton correlations behind a strong Gaussian scatterer.

All windows live on the orthonormal sum/difference axes ``s = (x1 + x2)/sqrt(2)`` and
``u = (x1 - x2)/sqrt(2)``, the pixel geometry of :func:`qspeckle.core.rotate_sum_diff`.
Offsets ``delta`` are separations between the two evaluation points and ``xbar`` their
midpoint. Matrices are indexed ``[u, s]``.

Each predictor factorizes per axis. With ``F[g](q) = int g(r) exp(-i q r) dr``, the
correlation along one axis is

    I(xbar, delta) = (1 / lambda z) int R0(r) F[mu](k0 (xbar - r) / z) exp(-i k0 delta r / z) dr

up to a unit-modulus phase. This tends to ``R0(xbar) mu(delta)`` as ``z -> 0`` and to
``F[R0](k0 delta / z) F[mu](k0 xbar / z) / (lambda z)`` as ``z -> inf``, so all three
predictors share one absolute scale.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from qspeckle.errors import ParameterError, ResolutionError
from qspeckle.models import UM_PER_CM, UM_PER_NM, SourceParams

logger = logging.getLogger(__name__)

MAX_QUADRATURE_N = 256
QUADRATURE_TOLERANCE = 0.01
QUADRATURE_SPAN = 3.0


@dataclass(frozen=True)
class FactorizedGamma0:
    """Correlation just behind a strong scatterer, ``R0(xbar) * mu(delta) * C``.

    Parameters
    ----------
    sigma0_um : float
        Scatterer correlation length.
    sigma_minus_um, sigma_plus_um : float
        Source widths along the difference and sum coordinates.
    lambda_nm : float
        Wavelength.

    Notes
    -----
    ``R0(s, u) = exp(-4 s^2 / sigma+^2) exp(-4 u^2 / sigma-^2)`` is the input intensity and
    ``mu(d1, d2) = exp(-(d1^2 + d2^2) / sigma0^2)`` the screen correlation, isotropic and so
    identical on the rotated axes. The phase factor
    ``C = exp(-i (k0 / z) (delta_s xbar_s + delta_u xbar_u))`` has unit modulus and is
    dropped by every magnitude comparison; :meth:`phase_factor` evaluates it.
    """

    sigma0_um: float
    sigma_minus_um: float
    sigma_plus_um: float
    lambda_nm: float

    def __post_init__(self) -> None:
        """Validate that all lengths are positive."""
        for name in ("sigma0_um", "sigma_minus_um", "sigma_plus_um", "lambda_nm"):
            if not getattr(self, name) > 0:
                msg = f"{name} must be > 0, got {getattr(self, name)}"
                raise ParameterError(msg)

    @classmethod
    def from_source(cls, src: SourceParams, sigma0_um: float) -> FactorizedGamma0:
        """Build from source parameters and a screen correlation length."""
        return cls(sigma0_um, src.sigma_minus_um, src.sigma_plus_um, src.lambda_nm)

    @property
    def k0(self) -> float:
        """Wavenumber in rad/um."""
        return 2.0 * math.pi / (self.lambda_nm * UM_PER_NM)

    def r0(self, s: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Input intensity envelope."""
        return np.exp(-4.0 * s**2 / self.sigma_plus_um**2) * np.exp(-4.0 * u**2 / self.sigma_minus_um**2)

    def mu(self, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
        """Screen correlation; ``mu(0, 0) = 1``."""
        return np.exp(-(d1**2 + d2**2) / self.sigma0_um**2)

    def phase_factor(self, xbar_s, xbar_u, delta_s, delta_u, z_cm: float) -> np.ndarray:
        """The unit-modulus factor ``C`` at distance *z_cm*."""
        z_um = z_cm * UM_PER_CM
        return np.exp(-1j * (self.k0 / z_um) * (delta_s * xbar_s + delta_u * xbar_u))


@dataclass(frozen=True)
class GammaWindow:
    """Sampling of a prediction.

    Offsets run over ``(-delta_half .. delta_half) * delta_step_um`` and midpoints over
    ``(-xbar_half .. xbar_half) * xbar_step_um``; the correlation is reported at the anchor
    midpoint ``(anchor_s_um, anchor_u_um)``.
    """

    delta_half: int = 16
    delta_step_um: float = 10.0
    xbar_half: int = 32
    xbar_step_um: float = 100.0
    anchor_s_um: float = 0.0
    anchor_u_um: float = 0.0

    def __post_init__(self) -> None:
        """Validate sizes."""
        if self.delta_half < 1 or self.xbar_half < 1:
            raise ParameterError("Window half-widths must be >= 1")
        if not (self.delta_step_um > 0 and self.xbar_step_um > 0):
            raise ParameterError("Window steps must be > 0")

    def deltas(self) -> np.ndarray:
        """Offset axis in micrometres."""
        return np.arange(-self.delta_half, self.delta_half + 1) * self.delta_step_um

    def xbars(self) -> np.ndarray:
        """Midpoint axis in micrometres."""
        return np.arange(-self.xbar_half, self.xbar_half + 1) * self.xbar_step_um


@dataclass(frozen=True, eq=False)
class GammaPrediction:
    """Predicted correlation at one distance.

    Parameters
    ----------
    correlation : np.ndarray
        Values over ``(delta_u, delta_s)`` at the anchor midpoint.
    envelope : np.ndarray
        Values over ``(xbar_u, xbar_s)`` at zero offset.
    delta_um, xbar_um : np.ndarray
        Axes of the two matrices, shared by both rotated coordinates.
    anchor_um : tuple[float, float]
        Anchor ``(s, u)``.
    z_cm : float
        Distance; 0 for the near-field form.
    separable : bool
        Whether ``Gamma(xbar, delta) = A(xbar) B(delta)`` holds exactly.
    """

    correlation: np.ndarray
    envelope: np.ndarray
    delta_um: np.ndarray
    xbar_um: np.ndarray
    anchor_um: tuple[float, float]
    z_cm: float
    separable: bool

    def full(self) -> np.ndarray:
        """Four-dimensional ``Gamma[xbar_u, xbar_s, delta_u, delta_s]`` for separable forms."""
        if not self.separable:
            raise ParameterError("Only separable predictions expand to the full correlation")
        center = len(self.delta_um) // 2
        at_anchor = self.correlation[center, center]
        if at_anchor == 0:
            raise ParameterError("Correlation vanishes at the anchor; cannot factorize")
        return self.envelope[:, :, None, None] * (self.correlation / at_anchor)[None, None, :, :]


def _gaussian_transform(width: float, q: np.ndarray) -> np.ndarray:
    """``F[exp(-(r/width)^2)](q)``."""
    return math.sqrt(math.pi) * width * np.exp(-((width * q) ** 2) / 4.0)


def gamma_near_field(f: FactorizedGamma0, window: GammaWindow) -> GammaPrediction:
    """Near-field correlation ``R0(xbar) * mu(delta)``, independent of distance."""
    d = window.deltas()
    x = window.xbars()
    correlation = f.r0(window.anchor_s_um, window.anchor_u_um) * f.mu(d[None, :], d[:, None])
    envelope = f.r0(x[None, :], x[:, None])
    return GammaPrediction(
        correlation=correlation.astype(np.complex128),
        envelope=envelope.astype(np.complex128),
        delta_um=d,
        xbar_um=x,
        anchor_um=(window.anchor_s_um, window.anchor_u_um),
        z_cm=0.0,
        separable=True,
    )


def gamma_far_field(f: FactorizedGamma0, z_cm: float, window: GammaWindow) -> GammaPrediction:
    """Far-field correlation magnitude ``F[R0](k0 delta / z) F[mu](k0 xbar / z) / (lambda z)^2``.

    Raises
    ------
    ParameterError
        If *z_cm* is not positive.
    """
    if not z_cm > 0:
        msg = f"z_cm must be > 0, got {z_cm}"
        raise ParameterError(msg)
    z_um = z_cm * UM_PER_CM
    scale = f.k0 / z_um
    lam_z = f.lambda_nm * UM_PER_NM * z_um
    d = window.deltas()
    x = window.xbars()

    def envelope_axis(xbar: np.ndarray) -> np.ndarray:
        return _gaussian_transform(f.sigma0_um, scale * xbar)

    corr_s = _gaussian_transform(f.sigma_plus_um / 2.0, scale * d) * envelope_axis(np.float64(window.anchor_s_um))
    corr_u = _gaussian_transform(f.sigma_minus_um / 2.0, scale * d) * envelope_axis(np.float64(window.anchor_u_um))
    r0_zero_s = _gaussian_transform(f.sigma_plus_um / 2.0, np.float64(0.0))
    r0_zero_u = _gaussian_transform(f.sigma_minus_um / 2.0, np.float64(0.0))
    env_s = r0_zero_s * envelope_axis(x)
    env_u = r0_zero_u * envelope_axis(x)
    return GammaPrediction(
        correlation=(np.outer(corr_u, corr_s) / lam_z**2).astype(np.complex128),
        envelope=(np.outer(env_u, env_s) / lam_z**2).astype(np.complex128),
        delta_um=d,
        xbar_um=x,
        anchor_um=(window.anchor_s_um, window.anchor_u_um),
        z_cm=z_cm,
        separable=True,
    )


def _axis_integral(
    r0_width: float, f: FactorizedGamma0, z_um: float, xbar: np.ndarray, delta: np.ndarray, n: int, half_span: float
) -> np.ndarray:
    """Midpoint-rule ``I(xbar, delta)`` for one axis, shape ``(len(xbar), len(delta))``."""
    step = 2.0 * half_span / n
    r = -half_span + (np.arange(n) + 0.5) * step
    r0 = np.exp(-((r / r0_width) ** 2))
    scale = f.k0 / z_um
    weights = r0[None, :] * _gaussian_transform(f.sigma0_um, scale * (xbar[:, None] - r[None, :]))
    phases = np.exp(-1j * scale * r[:, None] * delta[None, :])
    lam_z = f.lambda_nm * UM_PER_NM * z_um
    return (weights @ phases) * step / lam_z


def _converged_axis(r0_width, f, z_um, xbar, delta, n, half_span, axis: str) -> np.ndarray:
    coarse = _axis_integral(r0_width, f, z_um, xbar, delta, n, half_span)
    fine = _axis_integral(r0_width, f, z_um, xbar, delta, 2 * n, half_span)
    peak = float(np.max(np.abs(fine)))
    change = float(np.max(np.abs(coarse - fine))) / peak if peak > 0 else 0.0
    if change > QUADRATURE_TOLERANCE:
        msg = f"Quadrature along {axis} changed by {change:.2%} on doubling n={n}; increase quadrature_n"
        raise ResolutionError(msg)
    logger.debug("Quadrature along %s converged: change %.2e at n=%d", axis, change, n)
    return fine


def gamma_intermediate_numeric(
    f: FactorizedGamma0, z_cm: float, window: GammaWindow, quadrature_n: int = 256
) -> GammaPrediction:
    """Evaluate the remaining midpoint integral numerically at any distance.

    The integration domain is ``+-3 max(sigma-, sigma+)``. The result is accepted only if
    doubling the node count changes it by at most 1% of its peak.

    Raises
    ------
    ParameterError
        If *z_cm* is not positive or *quadrature_n* exceeds 256.
    ResolutionError
        If the quadrature has not converged.
    """
    if not z_cm > 0:
        msg = f"z_cm must be > 0, got {z_cm}"
        raise ParameterError(msg)
    if not 1 <= quadrature_n <= MAX_QUADRATURE_N:
        msg = f"quadrature_n must be in [1, {MAX_QUADRATURE_N}], got {quadrature_n}"
        raise ParameterError(msg)

    z_um = z_cm * UM_PER_CM
    half_span = QUADRATURE_SPAN * max(f.sigma_minus_um, f.sigma_plus_um)
    d = window.deltas()
    x = window.xbars()
    zero = np.zeros(1)
    axes = {
        "s": (f.sigma_plus_um / 2.0, window.anchor_s_um),
        "u": (f.sigma_minus_um / 2.0, window.anchor_u_um),
    }
    corr, env = {}, {}
    for name, (width, anchor) in axes.items():
        corr[name] = _converged_axis(width, f, z_um, np.array([anchor]), d, quadrature_n, half_span, name)[0]
        env[name] = _converged_axis(width, f, z_um, x, zero, quadrature_n, half_span, name)[:, 0]

    return GammaPrediction(
        correlation=np.outer(corr["u"], corr["s"]),
        envelope=np.outer(env["u"], env["s"]),
        delta_um=d,
        xbar_um=x,
        anchor_um=(window.anchor_s_um, window.anchor_u_um),
        z_cm=z_cm,
        separable=False,
    )


def _one_over_e_width(axis_um: np.ndarray, profile: np.ndarray) -> float:
    """Full width at ``1/e`` of a peak-centred profile, by linear interpolation."""
    center = len(profile) // 2
    level = profile[center] / math.e
    half = []
    for direction in (1, -1):
        i = center
        while 0 <= i + direction < len(profile) and profile[i + direction] > level:
            i += direction
        j = i + direction
        if not 0 <= j < len(profile):
            raise ParameterError("Profile does not fall to 1/e inside the window")
        frac = (profile[i] - level) / (profile[i] - profile[j])
        half.append(abs(axis_um[i] + frac * (axis_um[j] - axis_um[i]) - axis_um[center]))
    return float(half[0] + half[1])


def correlation_widths(prediction: GammaPrediction) -> tuple[float, float]:
    """``1/e`` full widths of ``|correlation|`` along ``delta_s`` and ``delta_u``."""
    magnitude = np.abs(prediction.correlation)
    c = magnitude.shape[0] // 2
    return (
        _one_over_e_width(prediction.delta_um, magnitude[c, :]),
        _one_over_e_width(prediction.delta_um, magnitude[:, c]),
    )


def envelope_widths(prediction: GammaPrediction) -> tuple[float, float]:
    """``1/e`` full widths of ``|envelope|`` along ``xbar_s`` and ``xbar_u``."""
    magnitude = np.abs(prediction.envelope)
    c = magnitude.shape[0] // 2
    return (
        _one_over_e_width(prediction.xbar_um, magnitude[c, :]),
        _one_over_e_width(prediction.xbar_um, magnitude[:, c]),
    )
