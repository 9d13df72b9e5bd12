import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from subplanck import fock_oracle as fo
from subplanck.sensitivity import (
    DisplacementOffset,
    approximation_gap,
    direction_sweep,
    fidelity_exact,
    fidelity_map,
    fidelity_large_k,
    fidelity_roots_cat,
    in_regime,
    isotropy_ratio,
    predicted_zero_cat,
    smallest_detectable_displacement,
)
from subplanck.states import build, purity

# spectral-oracle fidelities
FROZEN = [
    ("compass", 14, 0.03 + 0.01j, 0.02898357725196501),
    ("mixture", 6, 0.05, 0.3453456519665052),
]

kinds = st.sampled_from(["coherent", "cat_h", "cat_v", "compass", "mixture"])
offsets = st.builds(lambda r, t: r * complex(math.cos(t), math.sin(t)), st.floats(0, 0.9), st.floats(0, 2 * math.pi))


@pytest.mark.parametrize("kind,k,dz,expected", FROZEN)
def test_frozen_oracle_fidelity(kind, k, dz, expected):
    assert fidelity_exact(build(kind, k, 0.8), dz) == pytest.approx(expected, abs=1e-12)


@given(kinds, st.sampled_from([0.5, 1.0, 6.0, 14.0]), offsets)
def test_fidelity_bounds(kind, k, dz):
    f = float(fidelity_exact(build(kind, k, 0.8), dz))
    assert -1e-15 <= f <= 1 + 1e-10


@given(kinds, st.sampled_from([1.0, 6.0, 14.0]))
def test_unit_fidelity_at_zero(kind, k):
    # tr(rho^2): one for pure states, the purity for the mixture
    s = build(kind, k, 0.8)
    assert float(fidelity_exact(s, 0.0)) == pytest.approx(purity(s), abs=1e-12)
    if kind != "mixture":
        assert purity(s) == pytest.approx(1)


@given(st.sampled_from([0.5, 2.0, 6.0]), offsets)
def test_reference_fidelity_closed_form(k, dz):
    f = float(fidelity_exact(build("reference", k), dz))
    assert f == pytest.approx((1 - abs(dz) ** 2) ** (2 * k), rel=1e-10, abs=1e-300)
    assert float(fidelity_large_k("coherent", k, 0.8, dz)) == pytest.approx((1 - abs(dz) ** 2) ** (2 * k))


def test_offset_type():
    off = DisplacementOffset(0.01, 0.02)
    s = build("cat_h", 6, 0.8)
    assert float(fidelity_exact(s, off)) == pytest.approx(float(fidelity_exact(s, 0.01 + 0.02j)))
    with pytest.raises(ValueError):
        DisplacementOffset(0.9, 0.9)


def test_cat_roots_match_prediction():
    assert abs(predicted_zero_cat(10, 0.8, 0)[0]) == pytest.approx(1.7708e-2, abs=1e-6)
    for k in (6, 10, 14):
        roots = fidelity_roots_cat(build("cat_h", k, 0.8))
        for m, r in enumerate(roots[:3]):
            exact, linear = predicted_zero_cat(k, 0.8, m)
            assert r == pytest.approx(abs(exact), abs=1e-9 if m == 0 else 1e-7)
            assert abs(abs(linear) - r) < 0.2 * r
        assert float(fidelity_exact(build("cat_h", k, 0.8), 1j * roots[0])) < 1e-15


def test_printed_and_normalized_readings():
    dz = np.array([0.0, 0.01j, 0.02 + 0.01j])
    # at zero offset the printed horizontal cat carries the extra 1/2
    assert fidelity_large_k("cat_h", 14, 0.8, 0.0, "printed") == pytest.approx(0.5)
    assert fidelity_large_k("cat_h", 14, 0.8, 0.0, "normalized") == pytest.approx(1.0)
    assert fidelity_large_k("compass", 14, 0.8, 0.0, "normalized") == pytest.approx(1.0)
    assert fidelity_large_k("mixture", 14, 0.8, 0.0, "normalized") == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fidelity_large_k("reference", 14, 0.8, dz)
    with pytest.raises(ValueError):
        fidelity_large_k("cat_h", 14, 0.8, dz, "other")


@pytest.mark.parametrize("kind", ["cat_h", "compass", "mixture"])
def test_approximation_gap(kind):
    dz = np.array([0.01 + 0.02j, 0.03j, 0.05 - 0.02j])
    s = build(kind, 6, 0.8)
    direct = fidelity_exact(s, dz) - fidelity_large_k(kind, 6, 0.8, dz, "normalized")
    assert np.allclose(approximation_gap(kind, 6, 0.8, dz), direct, atol=1e-13)
    # the normalized reading converges as k grows
    gaps = [np.abs(approximation_gap(kind, k, 0.8, dz)).max() for k in (6, 10, 14, 20)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-15


def test_in_regime():
    assert in_regime(14, 0.05) and not in_regime(6, 0.05) and not in_regime(14, 0.3)


def test_detection():
    coh14 = smallest_detectable_displacement(build("coherent", 14, 0.8), 0.0)
    assert coh14.detected and coh14.radius == pytest.approx(0.4676, abs=1e-3)
    assert not smallest_detectable_displacement(build("coherent", 6, 0.8), 0.0).detected
    sweep = direction_sweep(build("cat_h", 14, 0.8), 4)
    assert sweep[1].radius < sweep[0].radius / 3
    assert isotropy_ratio([sweep[0], type(sweep[0])(0.0, None)]) == math.inf


def test_fidelity_map_routes():
    s = build("compass", 6, 0.8)
    a = fidelity_map(s, 16, 0.2)
    b = fidelity_map(s, 16, 0.2, route="oracle_trace")
    assert np.nanmax(np.abs(a.values - b.values)) < 1e-10
    assert np.isnan(a.values).sum() == 0 and a.route == "exact_gram"
    c = fidelity_map(build("compass", 14, 0.8), 16, 0.05, route="paper_approx")
    assert c.metadata["reading"] == "normalized"
    with pytest.raises(ValueError):
        fidelity_map(s, 4, 0.2, route="guess")
    # the map covers offsets outside the unit disk only through the mask
    d = fidelity_map(s, 8, 1.0)
    assert np.isnan(d.values[0, 0])


def test_oracle_cross_check_point():
    s = build("cat_v", 10, 0.8)
    o = fo.oracle_for(s, [0.02 - 0.01j])
    assert float(o.fidelity([0.02 - 0.01j])[0]) == pytest.approx(float(fidelity_exact(s, 0.02 - 0.01j)), abs=1e-12)
