"""Shared fixtures for qspeckle tests."""

import numpy as np
import pytest

from qspeckle.models import Grid1D, SourceParams
from qspeckle.statistics import CoincidenceMap, MapMode


@pytest.fixture()
def small_grid():
    """256 samples at 10 um, large enough for a resolvable 44 um screen."""
    return Grid1D(256, 10.0)


@pytest.fixture()
def tiny_grid():
    return Grid1D(64, 10.0)


@pytest.fixture()
def source():
    return SourceParams(lambda_nm=810.0, sigma_minus_mm=0.1, sigma_plus_mm=0.3)


@pytest.fixture()
def anticorrelated_map():
    """Ground-truth map concentrated near the anti-diagonal of a 64-pixel detector."""
    grid = Grid1D(64, 20.0)
    r = grid.coords()
    r1, r2 = r[:, None], r[None, :]
    values = np.exp(-2 * (r1 - r2) ** 2 / 500.0**2) * np.exp(-2 * (r1 + r2) ** 2 / 100.0**2)
    return CoincidenceMap(values, grid.pitch_um, 0.0, 1, MapMode.ENSEMBLE_MEAN)


@pytest.fixture()
def tiny_config():
    """Run configuration small enough for end-to-end CLI tests."""
    return {
        "grid_n": 128,
        "pitch_um": 20.0,
        "sigma0_um": 60.0,
        "sigma_minus_mm": 0.8,
        "sigma_plus_mm": 1.0,
        "z_list_cm": [0.2, 0.5],
        "realizations": 100,
        "seed": 7,
        "phase_gain": 6.0,
        "blur_um": 200.0,
        "gamma_half_window": 4,
        "frames_n": 2000,
        "frames_pairs": 5.0,
        "frames_pixels": 64,
        "frames_band": 2,
        "frames_blur_px": 1.0,
    }


@pytest.fixture()
def config_file(tmp_path, tiny_config):
    """YAML file holding :func:`tiny_config`."""
    import yaml

    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(tiny_config))
    return path
