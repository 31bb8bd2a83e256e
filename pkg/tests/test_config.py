"""Tests for run configuration loading and validation."""

import json

import pytest
from pydantic import ValidationError

from qspeckle.config import MAX_DEFAULT_WORKERS, SMALL_PRESET, RunConfig, load_config, resolve_workers
from qspeckle.core import aliasing_limit_cm
from qspeckle.errors import ConfigError
from qspeckle.models import Grid1D


def test_defaults():
    config = load_config()
    assert config.grid_n == 2048
    assert config.pitch_um == 10.0
    assert config.sigma0_um == 44.0
    assert config.method == "angular_spectrum"
    assert config.formats == ("raw", "pgm")
    assert config.phase_gain == 6.0
    assert config.flatten == "ensemble"
    assert config.width_screens == 1
    assert config.frames_distance_cm == config.z_list_cm[-1]


def test_load_from_dict(tiny_config):
    config = load_config(tiny_config)
    assert config.grid_n == 128
    assert config.z_list_cm == (0.2, 0.5)


def test_load_from_yaml(config_file):
    config = load_config(config_file)
    assert config.realizations == 100
    assert config.seed == 7


def test_load_from_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"realizations": 3, "z_list_cm": [2.0]}))
    config = load_config(path)
    assert config.realizations == 3
    assert config.z_list_cm == (2.0,)


def test_missing_file():
    with pytest.raises(ConfigError, match="Config file not found"):
        load_config("/nonexistent/run.yaml")


def test_non_mapping_file(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(path)


def test_small_preset_and_seed_override(tiny_config):
    config = load_config(tiny_config, small=True, seed=99)
    assert config.grid_n == SMALL_PRESET["grid_n"]
    assert config.pitch_um == SMALL_PRESET["pitch_um"]
    assert config.realizations == SMALL_PRESET["realizations"]
    assert config.seed == 99


def test_small_preset_is_self_consistent(caplog):
    with caplog.at_level("WARNING"):
        config = load_config(small=True)
    assert config.sigma0_um >= 3 * config.pitch_um
    assert "raises sigma0_um" in caplog.text
    assert max(config.z_list_cm) <= aliasing_limit_cm(Grid1D(config.grid_n, config.pitch_um), config.lambda_nm)


def test_small_preset_keeps_wide_sigma0():
    assert load_config({"sigma0_um": 80.0}, small=True).sigma0_um == 80.0


def test_small_preset_drops_distances_beyond_bound(caplog):
    with caplog.at_level("WARNING"):
        config = load_config({"z_list_cm": [5.0, 30.0]}, small=True)
    assert config.z_list_cm == (5.0,)
    assert "drops distances" in caplog.text


def test_small_preset_without_valid_distance():
    with pytest.raises(ConfigError, match="aliasing bound"):
        load_config({"z_list_cm": [40.0]}, small=True)


def test_distances_are_sorted():
    assert RunConfig(z_list_cm=(5.0, 1.0, 3.0)).z_list_cm == (1.0, 3.0, 5.0)


def test_frames_distance_override():
    assert RunConfig(frames_z_cm=7.5).frames_distance_cm == 7.5


def test_config_is_frozen():
    config = RunConfig()
    with pytest.raises(ValidationError):
        config.seed = 3


@pytest.mark.parametrize(
    ("overrides", "message"),
    [
        ({"unknown_key": 1}, "Extra inputs are not permitted"),
        ({"grid_n": 130}, "even"),
        ({"grid_n": 32}, "greater than or equal"),
        ({"z_list_cm": []}, "must not be empty"),
        ({"z_list_cm": [-1.0]}, "non-negative"),
        ({"method": "ray_tracing"}, "Unknown method"),
        ({"formats": ["tiff"]}, "Unknown output formats"),
        ({"frames_pixels": 100}, "not divisible by frames_pixels"),
        ({"frames_pixels": 128, "frames_binning": 3}, "not divisible by frames_binning"),
        ({"threshold": 1.0}, "less than"),
        ({"sigma0_um": 0.0}, "greater than"),
        ({"flatten": "median"}, "ensemble"),
        ({"realizations": 2, "width_screens": 3}, "exceeds realizations"),
    ],
)
def test_invalid_values(overrides, message):
    with pytest.raises(ValidationError, match=message):
        RunConfig(**overrides)


class TestWorkers:
    def test_default_is_capped(self, monkeypatch):
        monkeypatch.delenv("QSPECKLE_THREADS", raising=False)
        monkeypatch.setattr("os.cpu_count", lambda: 64)
        assert resolve_workers() == MAX_DEFAULT_WORKERS

    def test_environment_lifts_default_cap(self, monkeypatch):
        monkeypatch.setenv("QSPECKLE_THREADS", "8")
        monkeypatch.setattr("os.cpu_count", lambda: 64)
        assert resolve_workers() == 8

    def test_without_cap(self, monkeypatch):
        monkeypatch.delenv("QSPECKLE_THREADS", raising=False)
        assert resolve_workers(6) == 6

    def test_cap_applies(self, monkeypatch):
        monkeypatch.setenv("QSPECKLE_THREADS", "2")
        assert resolve_workers(6) == 2

    def test_cap_above_cpu_count(self, monkeypatch):
        monkeypatch.setenv("QSPECKLE_THREADS", "64")
        assert resolve_workers(4) == 4

    @pytest.mark.parametrize("value", ["zero", "0", "-3"])
    def test_invalid_cap(self, monkeypatch, value):
        monkeypatch.setenv("QSPECKLE_THREADS", value)
        with pytest.raises(ConfigError, match="positive integer"):
            resolve_workers(4)
