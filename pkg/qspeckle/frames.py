"""Camera-frame forward model and the accidental-subtracted coincidence estimator."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, stats

from qspeckle.errors import DegenerateDistributionError, DimensionError, EstimatorError, ParameterError
from qspeckle.statistics.ensemble import CoincidenceMap, MapMode

logger = logging.getLogger(__name__)

DEFAULT_BAND = 15
DEFAULT_CHUNK_FRAMES = 4096


@dataclass(frozen=True)
class NoiseParams:
    """Detector noise per frame.

    Parameters
    ----------
    dark_rate : float
        Mean dark counts per pixel per frame, uniform over the detector.
    background_rate : float
        Mean uncorrelated single photons per frame, placed by the single-photon marginal.
    """

    dark_rate: float = 0.0
    background_rate: float = 0.0

    def __post_init__(self) -> None:
        """Validate rates."""
        if self.dark_rate < 0 or self.background_rate < 0:
            msg = f"Noise rates must be >= 0, got {self}"
            raise ParameterError(msg)


@dataclass(frozen=True, eq=False)
class FrameStack:
    """Sequence of 1D detector frames.

    Parameters
    ----------
    intensities : np.ndarray
        Non-negative counts indexed ``[frame, pixel]``.
    pitch_um : float
        Pixel pitch after binning.
    pairs_per_frame : float
        Mean photon pairs per frame used to synthesize the stack, or 0 if unknown.
    noise : NoiseParams
        Noise used to synthesize the stack.
    seed : int | None
        Synthesis seed, ``None`` for imported data.
    binning : int
        Horizontal binning factor applied so far.
    z_cm : float
        Distance of the imaged plane from the scatterer.
    """

    intensities: np.ndarray
    pitch_um: float = 1.0
    pairs_per_frame: float = 0.0
    noise: NoiseParams = NoiseParams()
    seed: int | None = None
    binning: int = 1
    z_cm: float = 0.0

    def __post_init__(self) -> None:
        """Validate shape, frame count and sign."""
        if self.intensities.ndim != 2:
            msg = f"intensities must be [frame, pixel], got shape {self.intensities.shape}"
            raise DimensionError(msg)
        if self.intensities.shape[0] < 2:
            msg = f"A frame stack needs at least 2 frames, got {self.intensities.shape[0]}"
            raise EstimatorError(msg)
        if np.any(self.intensities < 0):
            raise ParameterError("Frame intensities must be non-negative")

    @property
    def n_frames(self) -> int:
        """Number of frames."""
        return self.intensities.shape[0]

    @property
    def pixels(self) -> int:
        """Pixels per frame."""
        return self.intensities.shape[1]


@dataclass(frozen=True)
class EstimatorConfig:
    """Cleanup applied after accidental subtraction.

    Parameters
    ----------
    blur_px : float
        Gaussian blur width in pixels; 0 disables the blur.
    band : int
        Half-width of the zeroed band around the main diagonal.
    clip_negatives : bool
        Clip negative values to zero after the blur.
    symmetrize : bool
        Average the forward and backward shifted sums.
    chunk_frames : int
        Frames per partial sum.
    """

    blur_px: float = 2.5
    band: int = DEFAULT_BAND
    clip_negatives: bool = True
    symmetrize: bool = False
    chunk_frames: int = DEFAULT_CHUNK_FRAMES

    def __post_init__(self) -> None:
        """Validate settings."""
        if self.band < 0:
            msg = f"band must be >= 0, got {self.band}"
            raise ParameterError(msg)
        if self.blur_px < 0:
            msg = f"blur_px must be >= 0, got {self.blur_px}"
            raise ParameterError(msg)
        if self.chunk_frames < 1:
            msg = f"chunk_frames must be >= 1, got {self.chunk_frames}"
            raise ParameterError(msg)


@dataclass(frozen=True)
class MapComparison:
    """Agreement between an estimate and a reference map outside the diagonal band."""

    pearson: float
    rms: float
    band: int


def _distribution(cmap: CoincidenceMap) -> np.ndarray:
    values = np.asarray(cmap.values, dtype=np.float64)
    if np.any(values < 0):
        raise DegenerateDistributionError("Coincidence map has negative values")
    total = float(values.sum())
    if not total > 0:
        raise DegenerateDistributionError("Coincidence map is all zero; nothing to sample")
    return values / total


def synthesize_frames(
    cmap: CoincidenceMap,
    n_frames: int,
    pairs_per_frame: float,
    noise: NoiseParams | None = None,
    seed: int = 0,
    *,
    poisson_pairs: bool = True,
) -> FrameStack:
    """Draw detector frames whose pair events follow a coincidence map.

    Each frame receives ``Poisson(pairs_per_frame)`` pairs (exactly
    ``round(pairs_per_frame)`` with ``poisson_pairs=False``). A pair picks ``(x1, x2)`` from
    the normalized map and adds one count to each pixel. Dark counts and background singles
    are added on top.

    Raises
    ------
    DegenerateDistributionError
        If the map cannot be normalized.
    """
    if n_frames < 2:
        msg = f"n_frames must be >= 2, got {n_frames}"
        raise ParameterError(msg)
    if pairs_per_frame < 0:
        msg = f"pairs_per_frame must be >= 0, got {pairs_per_frame}"
        raise ParameterError(msg)
    noise = noise or NoiseParams()
    p = _distribution(cmap)
    n = p.shape[0]
    rng = np.random.default_rng(seed)

    if poisson_pairs:
        counts = rng.poisson(pairs_per_frame, n_frames)
    else:
        counts = np.full(n_frames, int(round(pairs_per_frame)))
    frame_of = np.repeat(np.arange(n_frames), counts)
    events = rng.choice(n * n, size=frame_of.size, p=p.ravel())
    frames = np.zeros((n_frames, n), dtype=np.int64)
    np.add.at(frames, (frame_of, events // n), 1)
    np.add.at(frames, (frame_of, events % n), 1)

    if noise.dark_rate > 0:
        frames += rng.poisson(noise.dark_rate, frames.shape)
    if noise.background_rate > 0:
        marginal = 0.5 * (p.sum(axis=0) + p.sum(axis=1))
        singles = rng.poisson(noise.background_rate, n_frames)
        where = rng.choice(n, size=int(singles.sum()), p=marginal / marginal.sum())
        np.add.at(frames, (np.repeat(np.arange(n_frames), singles), where), 1)

    logger.info("Synthesized %d frames of %d pixels with %d pairs", n_frames, n, int(counts.sum()))
    return FrameStack(frames, cmap.pitch_um, float(pairs_per_frame), noise, seed, 1, cmap.z_cm)


def raw_coincidences(
    stack: FrameStack, *, symmetrize: bool = False, chunk_frames: int = DEFAULT_CHUNK_FRAMES
) -> np.ndarray:
    """Accidental-subtracted coincidences before any cleanup.

    ``sum_k I_k(x1) I_k(x2) - N/(N-1) sum_k I_k(x1) I_{k+1}(x2)``. The factor ``N/(N-1)`` puts
    both sums on the same number of frame products. Partial sums over chunks of frames are
    added in frame order.
    """
    n = stack.n_frames
    frames = np.asarray(stack.intensities, dtype=np.float64)
    pixels = stack.pixels
    same = np.zeros((pixels, pixels))
    shifted = np.zeros((pixels, pixels))
    for start in range(0, n, chunk_frames):
        block = frames[start : start + chunk_frames]
        same += block.T @ block
    for start in range(0, n - 1, chunk_frames):
        stop = min(start + chunk_frames, n - 1)
        shifted += frames[start:stop].T @ frames[start + 1 : stop + 1]
    shifted *= n / (n - 1)
    if symmetrize:
        shifted = 0.5 * (shifted + shifted.T)
    return same - shifted


def band_mask(pixels: int, band: int) -> np.ndarray:
    """``True`` where ``|i - j| > band``."""
    i = np.arange(pixels)
    return np.abs(i[:, None] - i[None, :]) > band


def estimate_coincidences(stack: FrameStack, cfg: EstimatorConfig | None = None) -> CoincidenceMap:
    """Recover a coincidence map from a frame stack.

    Accidental subtraction, then Gaussian blur, clipping of negatives and zeroing of the
    diagonal band, in that order. The result is unnormalized.
    """
    cfg = cfg or EstimatorConfig()
    values = raw_coincidences(stack, symmetrize=cfg.symmetrize, chunk_frames=cfg.chunk_frames)
    if cfg.blur_px > 0:
        values = ndimage.gaussian_filter(values, sigma=cfg.blur_px)
    if cfg.clip_negatives:
        values = np.maximum(values, 0.0)
    values[~band_mask(stack.pixels, cfg.band)] = 0.0
    return CoincidenceMap(values, stack.pitch_um, stack.z_cm, stack.n_frames, MapMode.FRAME_ESTIMATE)


def bin_horizontal(stack: FrameStack, factor: int) -> FrameStack:
    """Sum each group of *factor* adjacent pixels.

    Raises
    ------
    ParameterError
        If the pixel count is not divisible by *factor*.
    """
    if factor < 1 or stack.pixels % factor:
        msg = f"Cannot bin {stack.pixels} pixels by {factor}"
        raise ParameterError(msg)
    if factor == 1:
        return stack
    binned = stack.intensities.reshape(stack.n_frames, stack.pixels // factor, factor).sum(axis=2)
    return FrameStack(
        intensities=binned,
        pitch_um=stack.pitch_um * factor,
        pairs_per_frame=stack.pairs_per_frame,
        noise=stack.noise,
        seed=stack.seed,
        binning=stack.binning * factor,
        z_cm=stack.z_cm,
    )


def bin_map(cmap: CoincidenceMap, factor: int) -> CoincidenceMap:
    """Sum ``factor x factor`` pixel blocks of a coincidence map."""
    n = cmap.count
    if factor < 1 or n % factor:
        msg = f"Cannot bin a {n}-pixel map by {factor}"
        raise ParameterError(msg)
    m = n // factor
    values = cmap.values.reshape(m, factor, m, factor).sum(axis=(1, 3))
    return CoincidenceMap(values, cmap.pitch_um * factor, cmap.z_cm, cmap.n_realizations, cmap.mode)


def compare_maps(estimate: CoincidenceMap, truth: CoincidenceMap, band: int = DEFAULT_BAND) -> MapComparison:
    """Pearson correlation and peak-normalized RMS difference outside the diagonal band."""
    if estimate.values.shape != truth.values.shape:
        msg = f"Cannot compare maps of shape {estimate.values.shape} and {truth.values.shape}"
        raise DimensionError(msg)
    mask = band_mask(estimate.count, band)
    a = estimate.values[mask]
    b = truth.values[mask]
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise ParameterError("Cannot correlate a constant map")
    pearson = float(stats.pearsonr(a, b)[0])
    rms = float(np.sqrt(np.mean((a / np.max(np.abs(a)) - b / np.max(np.abs(b))) ** 2)))
    return MapComparison(pearson=pearson, rms=rms, band=band)
