"""End-to-end tests of the command line."""

import json

import pytest
import yaml

from qspeckle.artifacts import load_map, read_csv
from qspeckle.cli import EXIT_ALIASING, EXIT_CONFIG, EXIT_IO, EXIT_OK, build_parser, main
from qspeckle.manifest import MANIFEST_FILENAME, load_manifest


@pytest.fixture()
def simulated(tmp_path, config_file):
    run_dir = tmp_path / "run"
    assert main(["simulate", "--config", str(config_file), "--out", str(run_dir)]) == EXIT_OK
    return run_dir


def test_simulate_writes_run(simulated):
    manifest = load_manifest(simulated)
    assert manifest.config["grid_n"] == 128
    assert manifest.seeds == list(range(7, 107))
    for name in ("z00_single", "z00_mean", "z01_single", "z01_mean", "z00_gamma", "z01_gamma"):
        assert (simulated / manifest.files[name].path).exists()
    assert (simulated / "maps" / "z00_mean.pgm").exists()
    assert (simulated / "screens" / "screen_7.f64.json").exists()

    mean = load_map(simulated / "maps" / "z01_mean.f64")
    assert mean.n_realizations == 100
    assert mean.z_cm == 0.5

    gamma = json.loads((simulated / "maps" / "z00_gamma.json").read_text())
    assert len(gamma["lags_um"]) == 9


def test_analyze_writes_curve(simulated):
    assert main(["analyze", "--out", str(simulated)]) == EXIT_OK
    columns, rows = read_csv(simulated / "width_curve.csv")
    assert columns == ["z_cm", "w_plus_um", "w_minus_um", "l_plus_mm", "l_minus_mm"]
    assert rows.shape == (2, 5)
    assert (rows[:, 1:] > 0).all()
    assert (simulated / "heatmaps" / "z00_autocorr.pgm").exists()
    report = json.loads((simulated / "regime_report.json").read_text())
    assert [d["regime"] for d in report["distances"]] == ["near_field", "near_field"]
    assert "linear_w_plus_um" in report


def test_small_preset_runs_end_to_end(tmp_path):
    run_dir = tmp_path / "small"
    assert main(["simulate", "--small", "--out", str(run_dir)]) == EXIT_OK
    manifest = load_manifest(run_dir)
    assert manifest.config["sigma0_um"] >= 3 * manifest.config["pitch_um"]
    assert main(["analyze", "--out", str(run_dir)]) == EXIT_OK
    _, rows = read_csv(run_dir / "width_curve.csv")
    assert rows.shape == (len(manifest.config["z_list_cm"]), 5)


def test_thread_count_does_not_change_outputs(tmp_path, config_file, monkeypatch):
    runs = {}
    for threads in ("1", "3"):
        monkeypatch.setenv("QSPECKLE_THREADS", threads)
        run_dir = tmp_path / f"threads{threads}"
        assert main(["simulate", "--config", str(config_file), "--out", str(run_dir)]) == EXIT_OK
        assert main(["analyze", "--out", str(run_dir)]) == EXIT_OK
        manifest = json.loads((run_dir / MANIFEST_FILENAME).read_text())
        manifest.pop("created_at")
        runs[threads] = ((run_dir / "width_curve.csv").read_bytes(), manifest)
    assert runs["1"] == runs["3"]


def test_theory_writes_curves(tmp_path, config_file):
    out = tmp_path / "theory"
    assert main(["theory", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
    columns, rows = read_csv(out / "theory_curves.csv")
    assert columns[0] == "z_cm"
    assert rows.shape == (101, 5)
    assert rows[-1, 0] == pytest.approx(0.5)
    assert (out / "theory_boundaries.csv").exists()
    assert (out / "theory_correlation_widths.csv").exists()


def test_frames_closed_loop(tmp_path, config_file):
    out = tmp_path / "frames"
    assert main(["frames", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "frames_report.json").read_text())
    assert report["n_frames"] == 2000
    assert report["pixels"] == 64
    assert report["z_cm"] == 0.5
    assert -1.0 <= report["pearson"] <= 1.0
    assert load_map(out / "frames_estimate.f64").count == 64


def test_unknown_key_is_config_error(tmp_path, tiny_config):
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({**tiny_config, "colour": "blue"}))
    assert main(["theory", "--config", str(path), "--out", str(tmp_path / "x")]) == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "none.yaml"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_aliasing_exit_code(tmp_path, tiny_config):
    path = tmp_path / "far.yaml"
    path.write_text(yaml.safe_dump({**tiny_config, "z_list_cm": [100.0]}))
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "run")]) == EXIT_ALIASING


def test_analyze_without_run_is_io_error(tmp_path):
    assert main(["analyze", "--out", str(tmp_path)]) == EXIT_IO


def test_out_is_required():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["simulate"])
