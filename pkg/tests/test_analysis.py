import math

import numpy as np
import pytest

from subplanck.analysis import (
    FEATURES,
    TARGETS,
    ExtentError,
    FitError,
    cat_fringe_halfwidth,
    cat_p_profile,
    compass_tile_halfwidth,
    exact_axis_zeros,
    feature_extent,
    find_axis_zeros,
    fit_scaling,
    fringe_phase_gap,
    fringe_samples,
    lobe_halfwidth,
    predicted_axis_zeros,
    scaling_study,
)
from subplanck.wigner import interference_cat_h


def test_lobe_halfwidth_closed_form():
    # ((1 - r^2)/(1 + r^2))^(2k) = 1/e at r^2 = tanh(1/(4k))
    for k in (6, 10, 40):
        assert lobe_halfwidth(k) == pytest.approx(math.sqrt(math.tanh(1 / (4 * k))), abs=1e-10)


def test_printed_zeros_match_prediction():
    k, z0 = 14, 0.8
    prof = cat_p_profile(k, z0, "printed")
    zeros = find_axis_zeros(prof, 0.0, 0.6, fringe_samples(k, z0, 0, 0.6), tol=1e-13)
    for m, r in enumerate(zeros):
        assert r == pytest.approx(predicted_axis_zeros(k, z0, m), abs=1e-9)
    assert zeros[0] == pytest.approx(6.317864e-3, abs=1e-8)


def test_exact_zeros_of_interference_term():
    k, z0 = 10, 0.8
    prof = lambda p: interference_cat_h(k, z0, 1j * np.asarray(p))
    zeros = find_axis_zeros(prof, 0.0, 0.9, fringe_samples(k, z0, 0, 0.9), tol=1e-13)
    expected = [exact_axis_zeros(k, z0, m) for m in range(len(zeros))]
    assert np.allclose(zeros, expected, atol=1e-9)
    assert math.isnan(exact_axis_zeros(k, z0, 50))
    assert math.isnan(predicted_axis_zeros(k, z0, 50))


def test_fringe_phase_gap():
    p = np.linspace(0, 0.1, 11)
    g = fringe_phase_gap(14, 0.8, p)
    assert g[0] == 0 and abs(g[1]) < 1e-3
    assert np.all(np.diff(np.abs(g)) > 0)


def test_feature_extent_errors():
    flat = lambda r: np.ones_like(np.asarray(r, dtype=float))
    with pytest.raises(ExtentError):
        feature_extent(flat, "lobe_halfwidth")
    with pytest.raises(ExtentError):
        feature_extent(flat, "central_fringe_halfwidth")
    with pytest.raises(ValueError):
        feature_extent(flat, "width")


def test_tile_measurements():
    axis = compass_tile_halfwidth(10, "axis")
    diag = compass_tile_halfwidth(10, "diagonal")
    assert axis.how == "vertex" and diag.how == "zero"
    assert 0 < diag.value < axis.value < 0.05
    assert cat_fringe_halfwidth(10) == pytest.approx(8.853942e-3, rel=2e-2)


def test_fit_scaling():
    k = np.array([6, 10, 14, 20, 28, 40.0])
    fit = fit_scaling(k, 3.0 * k**-1.5)
    assert fit.exponent == pytest.approx(-1.5) and fit.r_squared == pytest.approx(1)
    assert fit.to_dict()["k_values"] == k.tolist()
    with pytest.raises(FitError):
        fit_scaling([1, 2, 3], [1, 2, 3])
    with pytest.raises(FitError):
        fit_scaling(k, -k)


@pytest.mark.parametrize("feature", ["lobe", "fringe", "tile_axis", "tile_diagonal", "tile_area_diagonal", "compass_detectable"])
def test_scaling_targets(feature):
    fit = scaling_study(feature)
    target, tol = TARGETS[feature]
    assert abs(fit.exponent - target) <= tol
    assert fit.r_squared > 0.995


def test_unknown_feature():
    assert set(TARGETS) == set(FEATURES)
    with pytest.raises(ValueError):
        scaling_study("nothing")
