"""Ensembles over scatterer realizations: coincidence maps and local correlation slices."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from qspeckle.core import apply_scatterer, build_input_state
from qspeckle.errors import DimensionError, ParameterError
from qspeckle.models import BiphotonField, Grid1D, SourceParams
from qspeckle.propagation import propagate
from qspeckle.scatterer import ScatterScreen, generate_screen

logger = logging.getLogger(__name__)

MIN_GAMMA_REALIZATIONS = 30


class MapMode(str, Enum):
    """How a coincidence map was obtained."""

    SINGLE_REALIZATION = "single_realization"
    ENSEMBLE_MEAN = "ensemble_mean"
    FRAME_ESTIMATE = "frame_estimate"


@dataclass(frozen=True, eq=False)
class CoincidenceMap:
    """Joint detection probability over ``(x1, x2)``.

    Parameters
    ----------
    values : np.ndarray
        Real square matrix indexed ``[x1, x2]``.
    pitch_um : float
        Pixel pitch along both axes.
    z_cm : float
        Distance from the scatterer.
    n_realizations : int
        Number of realizations averaged into ``values``.
    mode : MapMode
        Provenance. Only frame estimates may hold negative values.
    """

    values: np.ndarray
    pitch_um: float
    z_cm: float = 0.0
    n_realizations: int = 1
    mode: MapMode = MapMode.SINGLE_REALIZATION

    def __post_init__(self) -> None:
        """Validate shape and value range."""
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            msg = f"values must be a square matrix, got shape {self.values.shape}"
            raise DimensionError(msg)
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("values must be finite")
        if self.mode is not MapMode.FRAME_ESTIMATE and np.any(self.values < 0):
            msg = f"{self.mode.value} maps must be non-negative"
            raise ParameterError(msg)
        if not self.pitch_um > 0:
            msg = f"pitch_um must be > 0, got {self.pitch_um}"
            raise ParameterError(msg)
        if self.n_realizations < 1:
            msg = f"n_realizations must be >= 1, got {self.n_realizations}"
            raise ParameterError(msg)

    @property
    def count(self) -> int:
        """Pixels per axis."""
        return self.values.shape[0]

    def normalized(self) -> np.ndarray:
        """Values divided by their maximum."""
        peak = float(np.max(self.values))
        if peak <= 0:
            raise ParameterError("Cannot peak-normalize a map without positive values")
        return self.values / peak


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of an ensemble of scatterer realizations.

    Realization ``i`` uses the screen seeded with ``master_seed + i``. The kernel width is
    calibrated once on realization 0 and reused.
    """

    realizations: int
    master_seed: int
    z_list_cm: tuple[float, ...]
    source: SourceParams
    sigma0_um: float
    grid: Grid1D
    method: str = "angular_spectrum"
    phase_gain: float = 1.0
    pad: bool = False

    def __post_init__(self) -> None:
        """Validate counts and ordering."""
        if self.realizations < 1:
            msg = f"realizations must be >= 1, got {self.realizations}"
            raise ParameterError(msg)
        if self.master_seed < 0:
            msg = f"master_seed must be >= 0, got {self.master_seed}"
            raise ParameterError(msg)
        z = tuple(float(v) for v in self.z_list_cm)
        if not z:
            raise ParameterError("z_list_cm must not be empty")
        if any(v < 0 for v in z):
            msg = f"z_list_cm must be non-negative, got {z}"
            raise ParameterError(msg)
        if list(z) != sorted(z):
            msg = f"z_list_cm must be sorted ascending, got {z}"
            raise ParameterError(msg)
        object.__setattr__(self, "z_list_cm", z)


@dataclass(frozen=True, eq=False)
class GammaSlice:
    """Locally estimated ``<psi(a + d) psi*(a - d)>`` around an anchor pixel.

    ``values[i, j]`` holds the offset ``(i - W, j - W)`` pixels; the separation between the
    two evaluation points is ``lags_um``, twice the offset.
    """

    values: np.ndarray
    lags_um: np.ndarray
    anchor: tuple[int, int]
    n_realizations: int

    @property
    def half_window(self) -> int:
        """Largest offset in pixels."""
        return (self.values.shape[0] - 1) // 2


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Ensemble statistics at one distance."""

    z_cm: float
    single_map: CoincidenceMap
    mean_map: CoincidenceMap
    gamma: GammaSlice
    kernel_width_um: float
    screen_seeds: tuple[int, ...] = ()


def coincidence_map(
    field: BiphotonField, mode: MapMode = MapMode.SINGLE_REALIZATION, n_realizations: int = 1
) -> CoincidenceMap:
    """Return ``|psi|^2`` of a field as a coincidence map."""
    values = np.abs(field.amplitudes) ** 2
    return CoincidenceMap(values, field.grid.pitch_um, field.z_cm, n_realizations, mode)


def _check_window(grid: Grid1D, anchor: tuple[int, int], half_window: int) -> None:
    if half_window < 0:
        msg = f"half_window must be >= 0, got {half_window}"
        raise ParameterError(msg)
    for index in anchor:
        if index - half_window < 0 or index + half_window >= grid.count:
            msg = f"Window of half-width {half_window} around anchor {anchor} exceeds the {grid.count}-sample grid"
            raise ParameterError(msg)


def gamma_block(amplitudes: np.ndarray, anchor: tuple[int, int], half_window: int) -> np.ndarray:
    """Single-realization products ``psi(a + d) psi*(a - d)`` over the window."""
    i0, j0 = anchor
    w = half_window
    block = amplitudes[i0 - w : i0 + w + 1, j0 - w : j0 + w + 1]
    return block * np.conj(block[::-1, ::-1])


def ensemble_screens(spec: EnsembleSpec) -> list[ScatterScreen]:
    """Screens of every realization; realization 0 calibrates the kernel the rest reuse."""
    first = generate_screen(spec.grid, spec.sigma0_um, spec.master_seed, phase_gain=spec.phase_gain)
    screens = [first]
    for index in range(1, spec.realizations):
        screens.append(
            generate_screen(
                spec.grid,
                spec.sigma0_um,
                spec.master_seed + index,
                phase_gain=spec.phase_gain,
                kernel_width_um=first.kernel_width_um,
            )
        )
    return screens


def _realize(
    spec: EnsembleSpec,
    state: BiphotonField,
    screen: ScatterScreen,
    z_cm: float,
    anchor: tuple[int, int],
    half_window: int,
) -> tuple[np.ndarray, np.ndarray]:
    field_z = propagate(apply_scatterer(state, screen), z_cm, spec.method, pad=spec.pad, workers=1)
    return np.abs(field_z.amplitudes) ** 2, gamma_block(field_z.amplitudes, anchor, half_window)


def realization_map(spec: EnsembleSpec, screen: ScatterScreen, z_cm: float) -> CoincidenceMap:
    """Coincidence map of the realization behind *screen* at *z_cm*."""
    state = build_input_state(spec.grid, spec.source)
    field_z = propagate(apply_scatterer(state, screen), z_cm, spec.method, pad=spec.pad, workers=1)
    return CoincidenceMap(np.abs(field_z.amplitudes) ** 2, spec.grid.pitch_um, z_cm)


def run_ensemble(
    spec: EnsembleSpec,
    *,
    anchor: tuple[int, int] | None = None,
    half_window: int = 16,
    workers: int | None = None,
    screens: list[ScatterScreen] | None = None,
) -> list[EnsembleResult]:
    """Propagate every realization to every distance and accumulate statistics.

    For each distance, realizations run on a thread pool in chunks of ``workers`` and are
    added in realization order, so results are bit-identical for any worker count.

    Parameters
    ----------
    spec : EnsembleSpec
        Ensemble parameters.
    anchor : tuple[int, int] | None
        Pixel ``(i1, i2)`` of the correlation slice; defaults to the grid center.
    half_window : int
        Half-width of the correlation window in pixels.
    workers : int | None
        Thread count; ``None`` runs serially.
    screens : list[ScatterScreen] | None
        Precomputed :func:`ensemble_screens`.

    Returns
    -------
    list[EnsembleResult]
        One result per entry of ``spec.z_list_cm``.

    Raises
    ------
    ParameterError
        If the correlation window leaves the grid.
    """
    grid = spec.grid
    anchor = (grid.center, grid.center) if anchor is None else (int(anchor[0]), int(anchor[1]))
    _check_window(grid, anchor, half_window)
    if spec.realizations < MIN_GAMMA_REALIZATIONS:
        logger.warning(
            "Correlation estimates from %d realizations are noisy; use at least %d",
            spec.realizations,
            MIN_GAMMA_REALIZATIONS,
        )

    screens = ensemble_screens(spec) if screens is None else screens
    if len(screens) != spec.realizations:
        msg = f"Expected {spec.realizations} screens, got {len(screens)}"
        raise ParameterError(msg)
    kernel = screens[0].kernel_width_um
    logger.info(
        "Running %d realizations at %d distances (kernel %.2f um, sigma0 %.2f um)",
        spec.realizations,
        len(spec.z_list_cm),
        kernel,
        screens[0].sigma0_um,
    )

    state = build_input_state(grid, spec.source)
    n = spec.realizations
    side = 2 * half_window + 1
    lags = 2.0 * np.arange(-half_window, half_window + 1) * grid.pitch_um
    seeds = tuple(screen.seed for screen in screens)
    pool_size = max(1, workers or 1)
    results = []
    with ThreadPoolExecutor(max_workers=pool_size) as pool:
        for z in spec.z_list_cm:
            total = np.zeros((grid.count, grid.count))
            gamma = np.zeros((side, side), dtype=np.complex128)
            single = None
            for start in range(0, n, pool_size):
                chunk = screens[start : start + pool_size]
                outputs = pool.map(lambda s, z=z: _realize(spec, state, s, z, anchor, half_window), chunk)
                for intensity, products in outputs:
                    total += intensity
                    gamma += products
                    if single is None:
                        single = intensity
            results.append(
                EnsembleResult(
                    z_cm=z,
                    single_map=CoincidenceMap(single, grid.pitch_um, z, 1, MapMode.SINGLE_REALIZATION),
                    mean_map=CoincidenceMap(total / n, grid.pitch_um, z, n, MapMode.ENSEMBLE_MEAN),
                    gamma=GammaSlice(gamma / n, lags, anchor, n),
                    kernel_width_um=kernel,
                    screen_seeds=seeds,
                )
            )
            logger.debug("Accumulated %d realizations at z=%.3g cm", n, z)
    return results


def ensemble_correlation(
    spec: EnsembleSpec,
    z_cm: float,
    *,
    anchor: tuple[int, int] | None = None,
    half_window: int = 16,
    workers: int | None = None,
) -> EnsembleResult:
    """Ensemble-mean coincidence map and correlation slice at a single distance."""
    single = EnsembleSpec(
        realizations=spec.realizations,
        master_seed=spec.master_seed,
        z_list_cm=(z_cm,),
        source=spec.source,
        sigma0_um=spec.sigma0_um,
        grid=spec.grid,
        method=spec.method,
        phase_gain=spec.phase_gain,
        pad=spec.pad,
    )
    return run_ensemble(single, anchor=anchor, half_window=half_window, workers=workers)[0]
