import math

import numpy as np
import pytest

from subplanck.analysis import fit_scaling
from subplanck.hw_baseline import (
    HwCompassParams,
    chessboard,
    chessboard_tile_halfwidth,
    hw_cutoff,
    hw_detection_radius,
    hw_fidelity_coherent,
    hw_fidelity_compass,
    hw_fidelity_exact,
    hw_threshold_ratio,
    hw_wigner_compass,
    hw_wigner_expm,
    hw_wigner_oracle,
    hw_wigner_terms,
    hw_zero_lines,
)

P4 = HwCompassParams(4.0)


def test_closed_form_against_expm_oracle():
    # independent reference computed with scipy.linalg.expm
    assert hw_wigner_compass(P4, 0.3, -1.2) == pytest.approx(-0.19286154399157263, abs=1e-13)
    assert hw_wigner_expm(P4, 0.3, -1.2) == pytest.approx(-0.19286154399157263, abs=1e-13)


@pytest.mark.parametrize("x0", [2.0, 4.0, 8.0])
def test_closed_form_against_eigen_oracle(x0):
    p = HwCompassParams(x0)
    g = np.linspace(-x0 - 2, x0 + 2, 15)
    x, q = np.meshgrid(g, g)
    assert np.abs(hw_wigner_compass(p, x, q) - hw_wigner_oracle(p, x.ravel(), q.ravel()).reshape(x.shape)).max() < 1e-10


def test_terms_and_chessboard():
    coh, osc, box = hw_wigner_terms(P4, 0.0, 0.0)
    assert box == pytest.approx(1.0)
    assert chessboard(P4, 0.0, 0.0) == pytest.approx(1.0)
    assert hw_cutoff(16.0) > 16
    with pytest.raises(ValueError):
        HwCompassParams(0.0)


def test_fidelity_zero_lines():
    t = np.linspace(-2, 2, 101)
    for m in (0, 1, 2):
        c = hw_zero_lines(P4, m)
        assert np.abs(hw_fidelity_compass(P4, (c + t) - 1j * t)).max() < 1e-25
        assert np.abs(hw_fidelity_compass(P4, (c + t) + 1j * t)).max() < 1e-25
    assert hw_zero_lines(P4, 0) == pytest.approx(math.pi / 4)


def test_fidelity_limits():
    assert float(hw_fidelity_exact(P4, 0.0)) == pytest.approx(1.0)
    assert float(hw_fidelity_coherent(0.0)) == 1.0
    # the large-x0 form agrees with the full expression once the centres separate
    p = HwCompassParams(8.0)
    d = np.array([0.1 + 0.05j, 0.2j, -0.3 + 0.1j])
    assert np.allclose(hw_fidelity_compass(p, d), hw_fidelity_exact(p, d), atol=1e-10)


def test_threshold_ratio_scales_with_x0():
    ratios = [hw_threshold_ratio(HwCompassParams(x0)) / x0 for x0 in (4.0, 8.0, 16.0)]
    assert max(ratios) / min(ratios) < 1.1
    exact = [hw_threshold_ratio(HwCompassParams(x0), exact=True) / x0 for x0 in (4.0, 8.0, 16.0)]
    assert np.allclose(exact, ratios, rtol=0.02)
    assert hw_detection_radius(hw_fidelity_coherent, 0.0) == pytest.approx(math.sqrt(2 * math.log(1e3)), abs=1e-8)
    assert hw_detection_radius(lambda d: np.ones(np.shape(d)), 0.0) is None


def test_chessboard_tile_scales_inverse_x0():
    x0 = np.array([2.0, 4.0, 8.0, 16.0, 32.0])
    w = [chessboard_tile_halfwidth(HwCompassParams(v)) for v in x0]
    assert fit_scaling(np.r_[x0, 64.0], w + [chessboard_tile_halfwidth(HwCompassParams(64.0))]).exponent == pytest.approx(-1, abs=0.01)
