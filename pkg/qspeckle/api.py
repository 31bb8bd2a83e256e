"""Package-level entry points: simulate, analyze, theory and frames runs."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

import numpy as np

from qspeckle import artifacts
from qspeckle.config import RunConfig, load_config, resolve_workers
from qspeckle.core import aliasing_limit_cm, apply_scatterer, build_input_state, regime_boundaries
from qspeckle.errors import ParameterError, ResolutionError
from qspeckle.frames import (
    EstimatorConfig,
    NoiseParams,
    bin_horizontal,
    bin_map,
    compare_maps,
    estimate_coincidences,
    synthesize_frames,
)
from qspeckle.manifest import RunManifest, load_manifest, write_manifest
from qspeckle.models import Grid1D, SourceParams
from qspeckle.propagation import propagate
from qspeckle.scatterer import generate_screen
from qspeckle.statistics import (
    CoincidenceMap,
    EnsembleSpec,
    WidthCurve,
    check_aliasing,
    coincidence_map,
    curve_from_maps,
    ensemble_screens,
    fit_knee,
    linear_fit,
    realization_map,
    rotated_autocorrelation,
    run_ensemble,
)
from qspeckle.theory import FactorizedGamma0, GammaWindow, correlation_widths, gamma_intermediate_numeric

logger = logging.getLogger(__name__)

MAPS_DIR = "maps"
SCREENS_DIR = "screens"
HEATMAPS_DIR = "heatmaps"
WIDTH_CURVE_FILENAME = "width_curve.csv"
REGIME_REPORT_FILENAME = "regime_report.json"
THEORY_CURVE_FILENAME = "theory_curves.csv"
THEORY_BOUNDARIES_FILENAME = "theory_boundaries.csv"
THEORY_CORRELATION_FILENAME = "theory_correlation_widths.csv"
FRAMES_REPORT_FILENAME = "frames_report.json"
THEORY_SAMPLES = 101
THEORY_DELTA_HALF = 64

ConfigSource = RunConfig | str | Path | dict | None


def package_version() -> str:
    """Installed package version, or ``"0+unknown"`` from a source tree."""
    try:
        return version("qspeckle")
    except PackageNotFoundError:
        return "0+unknown"


def _config(config: ConfigSource) -> RunConfig:
    return config if isinstance(config, RunConfig) else load_config(config)


def source_params(config: RunConfig) -> SourceParams:
    """Source described by a run configuration."""
    return SourceParams(config.lambda_nm, config.sigma_minus_mm, config.sigma_plus_mm)


def ensemble_spec(config: RunConfig) -> EnsembleSpec:
    """Ensemble described by a run configuration."""
    return EnsembleSpec(
        realizations=config.realizations,
        master_seed=config.seed,
        z_list_cm=config.z_list_cm,
        source=source_params(config),
        sigma0_um=config.sigma0_um,
        grid=Grid1D(config.grid_n, config.pitch_um),
        method=config.method,
        phase_gain=config.phase_gain,
        pad=config.pad,
    )


def _map_name(index: int, kind: str) -> str:
    return f"z{index:02d}_{kind}"


def _write_map(run_dir: Path, manifest: RunManifest, name: str, cmap: CoincidenceMap, pgm: bool) -> None:
    relative = Path(MAPS_DIR) / f"{name}.f64"
    artifacts.save_map(run_dir / relative, cmap)
    manifest.add_file(name, relative, "raw")
    if pgm:
        relative = Path(MAPS_DIR) / f"{name}.pgm"
        artifacts.write_pgm(run_dir / relative, cmap.values)
        manifest.add_file(f"{name}_pgm", relative, "pgm")


def cmd_simulate(config: ConfigSource, out_dir: str | Path) -> Path:
    """Simulate every distance of a configuration and write maps, screens and a manifest.

    Parameters
    ----------
    config : RunConfig | str | Path | dict | None
        Run configuration or a source for :func:`~qspeckle.config.load_config`.
    out_dir : str | Path
        Run directory; created if missing.

    Returns
    -------
    Path
        The run directory.

    Raises
    ------
    AliasingError
        If a distance exceeds the aliasing bound.
    """
    config = _config(config)
    spec = ensemble_spec(config)
    check_aliasing(spec.z_list_cm, spec.grid, config.lambda_nm)

    run_dir = Path(out_dir)
    (run_dir / MAPS_DIR).mkdir(parents=True, exist_ok=True)
    (run_dir / SCREENS_DIR).mkdir(parents=True, exist_ok=True)

    screens = ensemble_screens(spec)
    results = run_ensemble(spec, half_window=config.gamma_half_window, workers=resolve_workers(), screens=screens)

    manifest = RunManifest(
        config=config.model_dump(mode="json"),
        version=package_version(),
        created_at=datetime.now(timezone.utc).isoformat(),
        seeds=[screen.seed for screen in screens],
        kernel_width_um=screens[0].kernel_width_um,
        sigma0_measured_um=screens[0].sigma0_um,
    )
    for screen in screens:
        relative = Path(SCREENS_DIR) / f"screen_{screen.seed}.f64"
        artifacts.save_screen(run_dir / relative, screen)
        manifest.add_file(f"screen_{screen.seed}", relative, "raw")
    for index, result in enumerate(results):
        _write_map(run_dir, manifest, _map_name(index, "single"), result.single_map, "pgm" in config.formats)
        _write_map(run_dir, manifest, _map_name(index, "mean"), result.mean_map, "pgm" in config.formats)
        for k, screen in enumerate(screens[1 : config.width_screens], start=1):
            extra = realization_map(spec, screen, result.z_cm)
            _write_map(run_dir, manifest, _map_name(index, f"single{k}"), extra, "pgm" in config.formats)
        gamma = result.gamma
        relative = Path(MAPS_DIR) / f"{_map_name(index, 'gamma')}.json"
        artifacts.write_json_payload(
            run_dir / relative,
            {
                "anchor": list(gamma.anchor),
                "lags_um": gamma.lags_um.tolist(),
                "real": gamma.values.real.tolist(),
                "imag": gamma.values.imag.tolist(),
                "n_realizations": gamma.n_realizations,
                "z_cm": result.z_cm,
            },
        )
        manifest.add_file(_map_name(index, "gamma"), relative, "json")

    write_manifest(run_dir, manifest)
    logger.info("Simulated %d distances into %s", len(results), run_dir)
    return run_dir


def cmd_analyze(run_dir: str | Path) -> Path:
    """Measure width curves, autocorrelation heatmaps and a regime report for a run.

    Returns
    -------
    Path
        The width-curve CSV.

    Raises
    ------
    FileNotFoundError
        If the run has no manifest or a map is missing.
    """
    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    config = RunConfig(**manifest.config)
    (run_dir / HEATMAPS_DIR).mkdir(parents=True, exist_ok=True)

    pairs = []
    for index in range(len(config.z_list_cm)):
        kinds = ["single"] + [f"single{k}" for k in range(1, config.width_screens)]
        singles = [artifacts.load_map(run_dir / manifest.files[_map_name(index, kind)].path) for kind in kinds]
        mean = artifacts.load_map(run_dir / manifest.files[_map_name(index, "mean")].path)
        pairs.append((singles, mean))
        envelope = mean if config.flatten == "ensemble" else None
        heatmap = rotated_autocorrelation(singles[0], config.blur_um, envelope=envelope)
        artifacts.write_pgm(run_dir / HEATMAPS_DIR / f"{_map_name(index, 'autocorr')}.pgm", heatmap)

    curve = curve_from_maps(
        pairs, blur_um=config.blur_um, threshold=config.threshold, seed=config.seed, flatten=config.flatten
    )
    csv_path = artifacts.write_width_curve(run_dir / WIDTH_CURVE_FILENAME, curve)
    artifacts.write_json_payload(run_dir / REGIME_REPORT_FILENAME, regime_report(config, curve))
    logger.info("Analyzed %d distances in %s", len(pairs), run_dir)
    return csv_path


def regime_report(config: RunConfig, curve: WidthCurve) -> dict[str, Any]:
    """Formula boundaries next to the fitted knees and slopes of a measured curve."""
    src = source_params(config)
    grid = Grid1D(config.grid_n, config.pitch_um)
    boundaries = regime_boundaries(src, config.sigma0_um)
    report: dict[str, Any] = {
        "z_nf_cm": boundaries.z_nf_cm,
        "z_ff_cm": boundaries.z_ff_cm,
        "z_max_cm": aliasing_limit_cm(grid, config.lambda_nm),
        "distances": [_regime_entry(src, config.sigma0_um, float(z)) for z in curve.z_cm],
    }
    for name in ("w_plus_um", "w_minus_um"):
        widths = getattr(curve, name)
        if curve.z_cm.size >= 3:
            report[f"knee_{name}"] = asdict(fit_knee(curve.z_cm, widths))
        if curve.z_cm.size >= 2:
            report[f"linear_{name}"] = asdict(linear_fit(curve.z_cm, widths))
    return report


def _regime_entry(src: SourceParams, sigma0_um: float, z_cm: float) -> dict[str, Any]:
    entry = asdict(regime_boundaries(src, sigma0_um, z_cm))
    entry["regime"] = entry["regime"].value
    return entry


def cmd_theory(config: ConfigSource, out_dir: str | Path) -> Path:
    """Write predicted width curves, zone boundaries and numeric correlation widths.

    Returns
    -------
    Path
        The predicted width-curve CSV.
    """
    config = _config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    src = source_params(config)
    grid = Grid1D(config.grid_n, config.pitch_um)

    z_values = np.linspace(0.0, max(config.z_list_cm), THEORY_SAMPLES)
    rows = []
    for z in z_values:
        report = regime_boundaries(src, config.sigma0_um, float(z))
        rows.append((float(z), report.w_plus_um, report.w_minus_um, report.l_plus_mm, report.l_minus_mm))
    curve_path = artifacts.write_csv(out / THEORY_CURVE_FILENAME, artifacts.WIDTH_CURVE_COLUMNS, rows)

    boundaries = regime_boundaries(src, config.sigma0_um)
    artifacts.write_csv(
        out / THEORY_BOUNDARIES_FILENAME,
        ("name", "z_cm"),
        [
            ("z_nf", boundaries.z_nf_cm),
            ("z_ff", boundaries.z_ff_cm),
            ("z_max", aliasing_limit_cm(grid, config.lambda_nm)),
        ],
    )

    f = FactorizedGamma0.from_source(src, config.sigma0_um)
    numeric = []
    for z in config.z_list_cm:
        if z <= 0:
            continue
        report = regime_boundaries(src, config.sigma0_um, z)
        step = 3.0 * max(report.w_plus_um, report.w_minus_um) / THEORY_DELTA_HALF
        window = GammaWindow(delta_half=THEORY_DELTA_HALF, delta_step_um=step, xbar_half=1)
        try:
            width_s, width_u = correlation_widths(gamma_intermediate_numeric(f, z, window))
        except (ResolutionError, ParameterError) as exc:
            logger.warning("No numeric prediction at z=%.3g cm: %s", z, exc)
            width_s = width_u = math.nan
        numeric.append((float(z), width_s, width_u))
    artifacts.write_csv(out / THEORY_CORRELATION_FILENAME, ("z_cm", "delta_s_um", "delta_u_um"), numeric)
    logger.info("Wrote theory curves to %s", out)
    return curve_path


def cmd_frames(config: ConfigSource, out_dir: str | Path) -> Path:
    """Synthesize a frame stack from a simulated map, estimate it back and report the agreement.

    Returns
    -------
    Path
        The report JSON.
    """
    config = _config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = Grid1D(config.grid_n, config.pitch_um)
    z = config.frames_distance_cm
    check_aliasing([z], grid, config.lambda_nm)

    screen = generate_screen(grid, config.sigma0_um, config.seed, phase_gain=config.phase_gain)
    field = apply_scatterer(build_input_state(grid, source_params(config)), screen)
    field = propagate(field, z, config.method, pad=config.pad, workers=resolve_workers())
    truth = bin_map(coincidence_map(field), config.grid_n // config.frames_pixels)

    noise = NoiseParams(config.frames_dark_rate, config.frames_background_rate)
    stack = synthesize_frames(truth, config.frames_n, config.frames_pairs, noise, config.seed)
    stack = bin_horizontal(stack, config.frames_binning)
    truth = bin_map(truth, config.frames_binning)
    band = max(0, config.frames_band // config.frames_binning)
    estimator = EstimatorConfig(blur_px=config.frames_blur_px, band=band, symmetrize=config.frames_symmetrize)
    estimate = estimate_coincidences(stack, estimator)
    comparison = compare_maps(estimate, truth, band)

    artifacts.save_map(out / "frames_truth.f64", truth)
    artifacts.save_map(out / "frames_estimate.f64", estimate)
    if "pgm" in config.formats:
        artifacts.write_pgm(out / "frames_truth.pgm", truth.values)
        artifacts.write_pgm(out / "frames_estimate.pgm", estimate.values)

    report = {
        "pearson": comparison.pearson,
        "rms": comparison.rms,
        "band": band,
        "n_frames": stack.n_frames,
        "pixels": stack.pixels,
        "binning": stack.binning,
        "pairs_per_frame": config.frames_pairs,
        "dark_rate": noise.dark_rate,
        "background_rate": noise.background_rate,
        "seed": config.seed,
        "z_cm": z,
        "version": package_version(),
    }
    path = out / FRAMES_REPORT_FILENAME
    artifacts.write_json_payload(path, report)
    logger.info("Estimator recovered the map with Pearson %.3f (rms %.3f)", comparison.pearson, comparison.rms)
    return path
