"""Tests for grids, sources, fields and the input state."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qspeckle.core import apply_scatterer, build_input_state
from qspeckle.errors import DimensionError, ParameterError
from qspeckle.models import BiphotonField, Grid1D, SourceParams
from qspeckle.scatterer import ScatterScreen


class TestGridValidation:
    def test_odd_count_raises(self):
        with pytest.raises(ParameterError, match="even"):
            Grid1D(65, 10.0)

    def test_small_count_raises(self):
        with pytest.raises(ParameterError, match=">= 64"):
            Grid1D(32, 10.0)

    def test_non_positive_pitch_raises(self):
        with pytest.raises(ParameterError, match="pitch_um"):
            Grid1D(64, 0.0)


def test_grid_is_centered(tiny_grid):
    coords = tiny_grid.coords()
    assert coords[tiny_grid.center] == 0.0
    assert coords[0] == -320.0
    assert coords[-1] == 310.0
    assert tiny_grid.span_um == 640.0


def test_grid_wavenumbers_fft_order(tiny_grid):
    k = tiny_grid.wavenumbers()
    assert k[0] == 0.0
    assert k[1] == pytest.approx(2 * np.pi / 640.0)


class TestSourceValidation:
    @pytest.mark.parametrize("field", ["lambda_nm", "sigma_minus_mm", "sigma_plus_mm"])
    def test_non_positive_raises(self, field):
        kwargs = {"lambda_nm": 810.0, "sigma_minus_mm": 1.0, "sigma_plus_mm": 5.0, field: 0.0}
        with pytest.raises(ParameterError, match=field):
            SourceParams(**kwargs)


def test_source_units():
    src = SourceParams(810.0, 1.0, 5.0)
    assert src.wavelength_um == pytest.approx(0.81)
    assert src.sigma_minus_um == 1000.0
    assert src.sigma_plus_um == 5000.0
    assert src.k0 == pytest.approx(2 * np.pi / 0.81)


def test_swapped_exchanges_widths():
    src = SourceParams(810.0, 1.0, 5.0).swapped()
    assert (src.sigma_minus_mm, src.sigma_plus_mm) == (5.0, 1.0)


class TestFieldValidation:
    def test_wrong_shape_raises(self, tiny_grid):
        with pytest.raises(DimensionError, match="shape"):
            BiphotonField(tiny_grid, np.ones((64, 32), dtype=complex), 810.0)

    def test_zero_power_raises(self, tiny_grid):
        with pytest.raises(ParameterError, match="power"):
            BiphotonField(tiny_grid, np.zeros((64, 64), dtype=complex), 810.0)

    def test_nan_raises(self, tiny_grid):
        values = np.ones((64, 64), dtype=complex)
        values[3, 4] = np.nan
        with pytest.raises(ParameterError, match="power"):
            BiphotonField(tiny_grid, values, 810.0)


def test_input_state_peak_and_shape(tiny_grid, source):
    field = build_input_state(tiny_grid, source)
    c = tiny_grid.center
    assert field.amplitudes.shape == (64, 64)
    assert field.amplitudes[c, c] == pytest.approx(1.0)
    assert field.z_cm == 0.0


def test_input_state_widths(tiny_grid, source):
    field = build_input_state(tiny_grid, source)
    c = tiny_grid.center
    # Along the anti-diagonal r1 = -r2 = r only the sum term vanishes: exp(-4 r^2 / sigma_-^2).
    r = 2 * tiny_grid.pitch_um
    assert field.amplitudes[c + 2, c - 2].real == pytest.approx(np.exp(-4 * r**2 / source.sigma_minus_um**2))
    assert field.amplitudes[c + 2, c + 2].real == pytest.approx(np.exp(-4 * r**2 / source.sigma_plus_um**2))


def test_input_state_warns_on_truncation(caplog, tiny_grid):
    wide = SourceParams(810.0, sigma_minus_mm=1.0, sigma_plus_mm=1.0)
    with caplog.at_level("WARNING"):
        build_input_state(tiny_grid, wide)
    assert "truncated" in caplog.text


def test_replace_keeps_grid(tiny_grid, source):
    field = build_input_state(tiny_grid, source)
    moved = field.replace(field.amplitudes * 2, z_cm=3.0)
    assert moved.grid == field.grid
    assert moved.z_cm == 3.0
    assert moved.power() == pytest.approx(4 * field.power())


@settings(max_examples=25, deadline=None)
@given(
    count=st.sampled_from([64, 128]),
    sigma_minus=st.floats(0.05, 1.0),
    sigma_plus=st.floats(0.05, 1.0),
)
def test_input_state_swap_symmetric(count, sigma_minus, sigma_plus):
    field = build_input_state(Grid1D(count, 10.0), SourceParams(810.0, sigma_minus, sigma_plus))
    np.testing.assert_array_equal(field.amplitudes, field.amplitudes.T)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), gain=st.floats(0.1, 20.0))
def test_pure_phase_screen_preserves_magnitude(seed, gain):
    grid = Grid1D(64, 10.0)
    field = build_input_state(grid, SourceParams(810.0, 0.2, 0.3))
    phase = np.random.default_rng(seed).uniform(0, 2 * np.pi, grid.count) * gain
    screen = ScatterScreen(grid, phase, sigma0_um=30.0, seed=0, kernel_width_um=0.0)
    scattered = apply_scatterer(field, screen)
    np.testing.assert_allclose(np.abs(scattered.amplitudes), np.abs(field.amplitudes), rtol=1e-12, atol=1e-300)


def test_apply_scatterer_grid_mismatch(tiny_grid, source):
    field = build_input_state(tiny_grid, source)
    other = Grid1D(128, 10.0)
    screen = ScatterScreen(other, np.zeros(128), sigma0_um=30.0, seed=0, kernel_width_um=0.0)
    with pytest.raises(DimensionError, match="does not match"):
        apply_scatterer(field, screen)


def test_apply_scatterer_imprints_both_photons(tiny_grid, source):
    field = build_input_state(tiny_grid, source)
    phase = np.zeros(tiny_grid.count)
    phase[10] = 0.5
    screen = ScatterScreen(tiny_grid, phase, sigma0_um=30.0, seed=0, kernel_width_um=0.0)
    out = apply_scatterer(field, screen).amplitudes
    assert out[10, 10] == pytest.approx(field.amplitudes[10, 10] * np.exp(1j))
    assert out[10, 20] == pytest.approx(field.amplitudes[10, 20] * np.exp(0.5j))
    assert out[20, 20] == field.amplitudes[20, 20]
