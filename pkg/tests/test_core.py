"""Tests for the sum/difference rotation, regime boundaries and the aliasing bound."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qspeckle.core import aliasing_limit_cm, regime_boundaries, rotate_sum_diff
from qspeckle.errors import DimensionError, ParameterError
from qspeckle.models import Grid1D, Regime, SourceParams


def _blob(n, x0, y0, wx, wy):
    i, j = np.indices((n, n), dtype=float)
    c = n // 2
    return np.exp(-(((i - c - x0) / wx) ** 2) - ((j - c - y0) / wy) ** 2)


def _relative_rms(actual, expected):
    return float(np.sqrt(np.mean((actual - expected) ** 2)) / np.sqrt(np.mean(expected**2)))


def test_rotation_keeps_symmetric_blob():
    image = _blob(128, 0, 0, 10, 10)
    assert _relative_rms(rotate_sum_diff(image), image) < 0.01


def test_rotation_twice_is_quarter_turn():
    n, c = 128, 64
    image = _blob(n, 6, -4, 15, 9)
    twice = rotate_sum_diff(rotate_sum_diff(image))
    i, j = np.indices((n, n))
    quarter = image[j, (2 * c - i) % n]
    interior = (slice(c - 32, c + 32), slice(c - 32, c + 32))
    assert _relative_rms(twice[interior], quarter[interior]) < 0.02


def test_rotation_axes():
    n, c = 128, 64
    image = np.zeros((n, n))
    # A ridge along x1 = x2 lies on the sum axis: row c of the rotated map.
    for k in range(-20, 21):
        image[c + k, c + k] = 1.0
    rotated = rotate_sum_diff(image)
    assert rotated[c, c] == pytest.approx(1.0)
    assert rotated[c, :].sum() > 5 * rotated[:, c].sum()
    assert rotated[c + 10, c] < 0.1


def test_rotation_rejects_non_square():
    with pytest.raises(DimensionError, match="square"):
        rotate_sum_diff(np.zeros((4, 6)))


@pytest.mark.parametrize(
    ("sigma_minus", "sigma_plus", "z_nf", "z_ff"),
    [
        (1.0, 1.8, 5.4, 9.8),
        (1.0, 5.0, 5.4, 27.2),
        (5.0, 8.8, 27.2, 47.8),
    ],
)
def test_regime_boundaries_match_quoted_crossovers(sigma_minus, sigma_plus, z_nf, z_ff):
    report = regime_boundaries(SourceParams(810.0, sigma_minus, sigma_plus), 44.0)
    assert report.z_nf_cm == pytest.approx(z_nf, abs=0.1)
    assert report.z_ff_cm == pytest.approx(z_ff, abs=0.1)


def test_regime_classification():
    src = SourceParams(810.0, 1.0, 5.0)
    assert regime_boundaries(src, 44.0, 1.0).regime is Regime.NEAR_FIELD
    assert regime_boundaries(src, 44.0, 15.0).regime is Regime.INTERMEDIATE
    assert regime_boundaries(src, 44.0, 40.0).regime is Regime.FAR_FIELD


def test_regime_widths_in_each_zone():
    src = SourceParams(810.0, 1.0, 5.0)
    near = regime_boundaries(src, 44.0, 1.0)
    assert near.w_plus_um == near.w_minus_um == 44.0
    assert (near.l_plus_mm, near.l_minus_mm) == (5.0, 1.0)

    middle = regime_boundaries(src, 44.0, 15.0)
    assert middle.w_plus_um == 44.0
    assert middle.w_minus_um == pytest.approx(15e4 * 0.81 / 1000.0)

    far = regime_boundaries(src, 44.0, 100.0)
    assert far.w_plus_um == pytest.approx(100e4 * 0.81 / 5000.0)
    assert far.w_minus_um == pytest.approx(100e4 * 0.81 / 1000.0)
    assert far.l_plus_mm == far.l_minus_mm == pytest.approx(100e4 * 0.81 / 44.0 / 1000.0)


def test_regime_swapped_source_same_boundaries():
    src = SourceParams(810.0, 1.0, 5.0)
    a = regime_boundaries(src, 44.0)
    b = regime_boundaries(src.swapped(), 44.0)
    assert (a.z_nf_cm, a.z_ff_cm) == (b.z_nf_cm, b.z_ff_cm)


@settings(max_examples=50, deadline=None)
@given(
    sigma_minus=st.floats(0.1, 10.0),
    sigma_plus=st.floats(0.1, 10.0),
    sigma0=st.floats(5.0, 200.0),
)
def test_boundary_ratio_is_width_ratio(sigma_minus, sigma_plus, sigma0):
    report = regime_boundaries(SourceParams(810.0, sigma_minus, sigma_plus), sigma0)
    assert report.z_nf_cm <= report.z_ff_cm
    ratio = max(sigma_minus, sigma_plus) / min(sigma_minus, sigma_plus)
    assert report.z_ff_cm / report.z_nf_cm == pytest.approx(ratio, rel=1e-9)


class TestRegimeValidation:
    def test_negative_distance_raises(self):
        with pytest.raises(ParameterError, match="z_cm"):
            regime_boundaries(SourceParams(810.0, 1.0, 5.0), 44.0, -1.0)

    def test_non_positive_sigma0_raises(self):
        with pytest.raises(ParameterError, match="sigma0_um"):
            regime_boundaries(SourceParams(810.0, 1.0, 5.0), 0.0)


def test_aliasing_limit():
    # 10 um * 20480 um / 0.81 um = 25.28 cm
    assert aliasing_limit_cm(Grid1D(2048, 10.0), 810.0) == pytest.approx(25.284, abs=0.001)
