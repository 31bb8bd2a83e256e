"""Ensemble statistics, speckle and field-of-view widths, and width curves."""

from qspeckle.statistics.curves import (
    ClassicalCurve,
    KneeFit,
    LinearFit,
    WidthCurve,
    check_aliasing,
    classical_speckle_curve,
    curve_from_maps,
    fit_knee,
    linear_fit,
    width_curve,
)
from qspeckle.statistics.ensemble import (
    CoincidenceMap,
    EnsembleResult,
    EnsembleSpec,
    GammaSlice,
    MapMode,
    coincidence_map,
    ensemble_correlation,
    ensemble_screens,
    gamma_block,
    realization_map,
    run_ensemble,
)
from qspeckle.statistics.widths import (
    flatten_envelope,
    fov_widths,
    rotated_autocorrelation,
    speckle_contrast,
    speckle_widths,
)

__all__ = [
    "ClassicalCurve",
    "CoincidenceMap",
    "EnsembleResult",
    "EnsembleSpec",
    "GammaSlice",
    "KneeFit",
    "LinearFit",
    "MapMode",
    "WidthCurve",
    "check_aliasing",
    "classical_speckle_curve",
    "coincidence_map",
    "curve_from_maps",
    "ensemble_correlation",
    "ensemble_screens",
    "fit_knee",
    "flatten_envelope",
    "fov_widths",
    "gamma_block",
    "linear_fit",
    "realization_map",
    "rotated_autocorrelation",
    "run_ensemble",
    "speckle_contrast",
    "speckle_widths",
    "width_curve",
]
