"""Width-versus-distance curves for biphoton and classical speckle, and their fits."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy import ndimage, stats

from qspeckle.core import aliasing_limit_cm
from qspeckle.errors import AliasingError, ParameterError
from qspeckle.models import UM_PER_CM, UM_PER_MM, UM_PER_NM, Grid1D
from qspeckle.propagation import PropagationMethod, propagate_classical
from qspeckle.scatterer import generate_screen
from qspeckle.statistics.ensemble import (
    CoincidenceMap,
    EnsembleSpec,
    ensemble_screens,
    realization_map,
    run_ensemble,
)
from qspeckle.statistics.widths import (
    DEFAULT_BLUR_UM,
    DEFAULT_THRESHOLD,
    fov_widths,
    speckle_contrast,
    speckle_widths,
)

logger = logging.getLogger(__name__)

ALIASING_WARN_FRACTION = 0.8
CLASSICAL_BLUR_FACTOR = 8.0
FLATTEN_MODES = ("ensemble", "blur")


@dataclass(frozen=True, eq=False)
class WidthCurve:
    """Measured speckle and field-of-view widths against distance.

    Speckle widths are averaged over the first ``width_screens`` realizations and
    field-of-view widths come from ensemble means.
    """

    z_cm: np.ndarray
    w_plus_um: np.ndarray
    w_minus_um: np.ndarray
    l_plus_mm: np.ndarray
    l_minus_mm: np.ndarray
    threshold: float
    blur_um: float
    seed: int
    flatten: str = "ensemble"
    width_screens: int = 1

    def __post_init__(self) -> None:
        """Check that all widths are positive."""
        for name in ("w_plus_um", "w_minus_um", "l_plus_mm", "l_minus_mm"):
            values = getattr(self, name)
            if values.shape != self.z_cm.shape:
                msg = f"{name} must have shape {self.z_cm.shape}, got {values.shape}"
                raise ParameterError(msg)
            if np.any(values <= 0):
                msg = f"{name} must be positive"
                raise ParameterError(msg)

    def rows(self) -> list[tuple[float, float, float, float, float]]:
        """``(z_cm, w_plus_um, w_minus_um, l_plus_mm, l_minus_mm)`` per distance."""
        return [
            (float(z), float(wp), float(wm), float(lp), float(lm))
            for z, wp, wm, lp, lm in zip(self.z_cm, self.w_plus_um, self.w_minus_um, self.l_plus_mm, self.l_minus_mm)
        ]


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line ``w = slope * z + intercept``."""

    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class KneeFit:
    """Flat-then-linear hinge ``w = plateau + slope * max(0, z - knee)``."""

    knee_cm: float
    plateau: float
    slope: float
    rms_residual: float


@dataclass(frozen=True, eq=False)
class ClassicalCurve:
    """Single-photon speckle width and contrast against distance."""

    z_cm: np.ndarray
    width_um: np.ndarray
    contrast: np.ndarray
    aperture_um: float
    sigma0_um: float
    lambda_nm: float

    @property
    def crossover_cm(self) -> float:
        """Distance where near- and far-field widths meet, ``sigma0 * aperture / lambda``."""
        return self.sigma0_um * self.aperture_um / (self.lambda_nm * UM_PER_NM) / UM_PER_CM


def check_aliasing(z_list_cm: tuple[float, ...] | list[float], grid: Grid1D, lambda_nm: float) -> float:
    """Raise if any distance exceeds the aliasing bound; warn when close to it.

    Returns
    -------
    float
        The bound ``pitch * span / lambda`` in centimetres.

    Raises
    ------
    AliasingError
        If a distance exceeds the bound.
    """
    z_max = aliasing_limit_cm(grid, lambda_nm)
    for z in z_list_cm:
        if z > z_max:
            msg = f"z={z} cm exceeds the aliasing bound {z_max:.2f} cm for pitch {grid.pitch_um} um"
            raise AliasingError(msg)
        if z > ALIASING_WARN_FRACTION * z_max:
            logger.warning("z=%.3g cm is close to the aliasing bound %.2f cm", z, z_max)
    return z_max


def width_curve(
    spec: EnsembleSpec,
    *,
    blur_um: float = DEFAULT_BLUR_UM,
    threshold: float = DEFAULT_THRESHOLD,
    flatten: str = "ensemble",
    width_screens: int = 1,
    workers: int | None = None,
) -> WidthCurve:
    """Measure ``w+, w-, l+, l-`` at every distance of an ensemble.

    Speckle widths are averaged over the first *width_screens* realizations; each is
    flattened by the ensemble mean or by a Gaussian blur, as *flatten* selects.

    Raises
    ------
    AliasingError
        If a distance exceeds ``pitch * span / lambda``.
    SaturatedWidthError
        If a speckle blob fills the window.
    FitQualityError
        If a field-of-view profile is not Gaussian.
    """
    if not 1 <= width_screens <= spec.realizations:
        msg = f"width_screens must be in [1, {spec.realizations}], got {width_screens}"
        raise ParameterError(msg)
    check_aliasing(spec.z_list_cm, spec.grid, spec.source.lambda_nm)
    screens = ensemble_screens(spec)
    results = run_ensemble(spec, half_window=0, workers=workers, screens=screens)
    maps = []
    for result in results:
        extra = [realization_map(spec, screen, result.z_cm) for screen in screens[1:width_screens]]
        maps.append(([result.single_map, *extra], result.mean_map))
    return curve_from_maps(maps, blur_um=blur_um, threshold=threshold, seed=spec.master_seed, flatten=flatten)


def curve_from_maps(
    maps: Sequence[tuple[CoincidenceMap | Sequence[CoincidenceMap], CoincidenceMap]],
    *,
    blur_um: float,
    threshold: float,
    seed: int,
    flatten: str = "ensemble",
) -> WidthCurve:
    """Collate a :class:`WidthCurve` from ``(single_maps, mean_map)`` pairs ordered by distance.

    The first element of a pair is one single-realization map or several, whose speckle
    widths are averaged.
    """
    if flatten not in FLATTEN_MODES:
        msg = f"flatten must be one of {FLATTEN_MODES}, got {flatten!r}"
        raise ParameterError(msg)
    w_plus, w_minus, l_plus, l_minus, z_cm = [], [], [], [], []
    screens = 1
    for singles, mean in maps:
        singles = [singles] if isinstance(singles, CoincidenceMap) else list(singles)
        screens = len(singles)
        envelope = mean if flatten == "ensemble" else None
        widths = np.array([speckle_widths(s, blur_um, threshold, envelope=envelope) for s in singles])
        wp, wm = (float(v) for v in widths.mean(axis=0))
        lp, lm = fov_widths(mean)
        z_cm.append(singles[0].z_cm)
        w_plus.append(wp)
        w_minus.append(wm)
        l_plus.append(lp / UM_PER_MM)
        l_minus.append(lm / UM_PER_MM)
        logger.info(
            "z=%.3g cm: w+=%.1f um w-=%.1f um l+=%.3f mm l-=%.3f mm", z_cm[-1], wp, wm, l_plus[-1], l_minus[-1]
        )
    return WidthCurve(
        z_cm=np.array(z_cm),
        w_plus_um=np.array(w_plus),
        w_minus_um=np.array(w_minus),
        l_plus_mm=np.array(l_plus),
        l_minus_mm=np.array(l_minus),
        threshold=threshold,
        blur_um=blur_um,
        seed=seed,
        flatten=flatten,
        width_screens=screens,
    )


def linear_fit(z_cm: np.ndarray, widths: np.ndarray) -> LinearFit:
    """Fit a straight line to a width curve."""
    z = np.asarray(z_cm, dtype=np.float64)
    w = np.asarray(widths, dtype=np.float64)
    if z.size < 2 or np.ptp(z) == 0:
        raise ParameterError("linear_fit needs at least two distinct distances")
    result = stats.linregress(z, w)
    return LinearFit(slope=float(result.slope), intercept=float(result.intercept), r_squared=float(result.rvalue**2))


def fit_knee(z_cm: np.ndarray, widths: np.ndarray, candidates: int = 200) -> KneeFit:
    """Locate the transition from a flat to a linearly growing width.

    Each candidate knee between the first and last distance is fitted by linear least
    squares; the knee with the smallest residual wins.
    """
    z = np.asarray(z_cm, dtype=np.float64)
    w = np.asarray(widths, dtype=np.float64)
    if z.size < 3:
        msg = f"fit_knee needs at least three points, got {z.size}"
        raise ParameterError(msg)

    best: KneeFit | None = None
    for knee in np.linspace(z.min(), z.max(), candidates):
        design = np.column_stack([np.ones_like(z), np.maximum(0.0, z - knee)])
        coef, *_ = np.linalg.lstsq(design, w, rcond=None)
        rms = float(np.sqrt(np.mean((design @ coef - w) ** 2)))
        if best is None or rms < best.rms_residual:
            best = KneeFit(knee_cm=float(knee), plateau=float(coef[0]), slope=float(coef[1]), rms_residual=rms)
    return best


def _autocovariance_fwhm(curves: list[np.ndarray], pitch_um: float) -> float:
    length = min(c.size for c in curves)
    mean_curve = np.mean([c[:length] for c in curves], axis=0)
    below = np.nonzero(mean_curve < 0.5)[0]
    if below.size == 0:
        raise ParameterError("Speckle autocovariance never drops below half maximum")
    i = int(below[0])
    hi, lo = mean_curve[i - 1], mean_curve[i]
    lag = (i - 1) + (hi - 0.5) / (hi - lo)
    return 2.0 * lag * pitch_um


def _normalized_autocovariance(flat: np.ndarray) -> np.ndarray:
    d = flat - flat.mean()
    n = d.size
    power = np.abs(scipy.fft.rfft(d, 2 * n)) ** 2
    autocov = scipy.fft.irfft(power, 2 * n)[: n // 4]
    return autocov / autocov[0]


def classical_speckle_curve(
    grid: Grid1D,
    sigma0_um: float,
    aperture_um: float,
    z_list_cm: list[float] | tuple[float, ...],
    seed: int,
    *,
    lambda_nm: float = 810.0,
    phase_gain: float = 6.0,
    realizations: int = 1,
    method: str | PropagationMethod = "angular_spectrum",
) -> ClassicalCurve:
    """Single-photon speckle width against distance behind the same kind of screen.

    A uniform beam of width *aperture_um* passes the screen and is propagated. The
    intensity is flattened by its blurred envelope over the illuminated region and the
    speckle width is the full width at half maximum of the normalized intensity
    autocovariance, averaged over *realizations* screens.

    Notes
    -----
    The width is about ``sigma0`` below ``sigma0 * aperture / lambda`` and grows as
    ``0.89 * z * lambda / aperture`` beyond it. The default gain gives a strong screen, needed
    for fully developed speckle.
    """
    if not aperture_um > 0:
        msg = f"aperture_um must be > 0, got {aperture_um}"
        raise ParameterError(msg)
    if realizations < 1:
        msg = f"realizations must be >= 1, got {realizations}"
        raise ParameterError(msg)
    check_aliasing(list(z_list_cm), grid, lambda_nm)

    x = grid.coords()
    beam = (np.abs(x) <= aperture_um / 2).astype(np.complex128)
    lam = lambda_nm * UM_PER_NM
    first = generate_screen(grid, sigma0_um, seed, phase_gain=phase_gain)

    autocovs: list[list[np.ndarray]] = [[] for _ in z_list_cm]
    contrasts: list[list[float]] = [[] for _ in z_list_cm]
    for r in range(realizations):
        screen = first if r == 0 else generate_screen(
            grid, sigma0_um, seed + r, phase_gain=phase_gain, kernel_width_um=first.kernel_width_um
        )
        scattered = beam * np.exp(1j * screen.phase)
        for k, z in enumerate(z_list_cm):
            intensity = np.abs(propagate_classical(scattered, grid, z, lambda_nm, method)) ** 2
            blur = CLASSICAL_BLUR_FACTOR * max(sigma0_um, z * UM_PER_CM * lam / aperture_um)
            envelope = ndimage.gaussian_filter1d(intensity, sigma=blur / grid.pitch_um, mode="wrap")
            lit = np.nonzero(envelope > 0.5 * envelope.max())[0]
            segment = slice(lit[0], lit[-1] + 1)
            flat = intensity[segment] / envelope[segment]
            autocovs[k].append(_normalized_autocovariance(flat))
            contrasts[k].append(speckle_contrast(intensity, grid.pitch_um, blur))

    widths = np.array([_autocovariance_fwhm(curves, grid.pitch_um) for curves in autocovs])
    contrast = np.array([float(np.mean(c)) for c in contrasts])
    logger.info("Classical speckle widths %s um at z=%s cm", np.round(widths, 1).tolist(), list(z_list_cm))
    return ClassicalCurve(
        z_cm=np.asarray(z_list_cm, dtype=np.float64),
        width_um=widths,
        contrast=contrast,
        aperture_um=aperture_um,
        sigma0_um=sigma0_um,
        lambda_nm=lambda_nm,
    )
