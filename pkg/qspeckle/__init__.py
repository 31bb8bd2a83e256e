"""Biphoton speckle propagation through thin random scatterers."""

from qspeckle.api import cmd_analyze, cmd_frames, cmd_simulate, cmd_theory
from qspeckle.config import RunConfig, load_config, resolve_workers
from qspeckle.core import (
    aliasing_limit_cm,
    apply_scatterer,
    build_input_state,
    regime_boundaries,
    rotate_sum_diff,
)
from qspeckle.errors import (
    AliasingError,
    CalibrationError,
    ConfigError,
    DegenerateDistributionError,
    DegenerateScreenError,
    DimensionError,
    EstimatorError,
    FitQualityError,
    ParameterError,
    QSpeckleError,
    ResolutionError,
    SaturatedWidthError,
)
from qspeckle.frames import (
    EstimatorConfig,
    FrameStack,
    NoiseParams,
    bin_horizontal,
    compare_maps,
    estimate_coincidences,
    raw_coincidences,
    synthesize_frames,
)
from qspeckle.models import BiphotonField, Grid1D, Regime, RegimeReport, SourceParams
from qspeckle.propagation import (
    PropagationMethod,
    PropagationMethodRegistry,
    propagate,
    propagate_classical,
    propagate_direct_quadrature,
)
from qspeckle.scatterer import ScatterScreen, generate_screen, measure_sigma0, quantize_screen
from qspeckle.statistics import (
    CoincidenceMap,
    EnsembleSpec,
    MapMode,
    WidthCurve,
    classical_speckle_curve,
    coincidence_map,
    ensemble_correlation,
    fov_widths,
    run_ensemble,
    speckle_widths,
    width_curve,
)
from qspeckle.theory import (
    FactorizedGamma0,
    GammaPrediction,
    GammaWindow,
    gamma_far_field,
    gamma_intermediate_numeric,
    gamma_near_field,
)

__all__ = [
    "AliasingError",
    "BiphotonField",
    "CalibrationError",
    "CoincidenceMap",
    "ConfigError",
    "DegenerateDistributionError",
    "DegenerateScreenError",
    "DimensionError",
    "EnsembleSpec",
    "EstimatorConfig",
    "EstimatorError",
    "FactorizedGamma0",
    "FitQualityError",
    "FrameStack",
    "GammaPrediction",
    "GammaWindow",
    "Grid1D",
    "MapMode",
    "NoiseParams",
    "ParameterError",
    "PropagationMethod",
    "PropagationMethodRegistry",
    "QSpeckleError",
    "Regime",
    "RegimeReport",
    "ResolutionError",
    "RunConfig",
    "SaturatedWidthError",
    "ScatterScreen",
    "SourceParams",
    "WidthCurve",
    "aliasing_limit_cm",
    "apply_scatterer",
    "bin_horizontal",
    "build_input_state",
    "classical_speckle_curve",
    "cmd_analyze",
    "cmd_frames",
    "cmd_simulate",
    "cmd_theory",
    "coincidence_map",
    "compare_maps",
    "ensemble_correlation",
    "estimate_coincidences",
    "fov_widths",
    "gamma_far_field",
    "gamma_intermediate_numeric",
    "gamma_near_field",
    "generate_screen",
    "load_config",
    "measure_sigma0",
    "propagate",
    "propagate_classical",
    "propagate_direct_quadrature",
    "quantize_screen",
    "raw_coincidences",
    "regime_boundaries",
    "resolve_workers",
    "rotate_sum_diff",
    "run_ensemble",
    "speckle_widths",
    "synthesize_frames",
    "width_curve",
]
