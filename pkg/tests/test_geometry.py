import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from subplanck.geometry import (
    BoundaryError,
    DiskPoint,
    HyperboloidPoint,
    bloch_vector,
    check_disk,
    compose_displacements,
    compose_via_matrix,
    disk_to_hyperboloid,
    hyperbolic_distance,
    hyperboloid_to_disk,
    mobius_shift,
    su11_matrix,
)


@st.composite
def disk(draw, r_max=0.97):
    r = draw(st.floats(0.0, r_max))
    t = draw(st.floats(0.0, 2 * math.pi))
    return complex(r * math.cos(t), r * math.sin(t))


def test_disk_point_validation():
    assert DiskPoint(0.3, 0.4).z == 0.3 + 0.4j
    assert abs(DiskPoint.from_complex(0.6j)) == pytest.approx(0.6)
    with pytest.raises(BoundaryError):
        DiskPoint(1.0, 0.0)
    with pytest.raises(BoundaryError):
        check_disk(np.array([0.1, 1.2]))


def test_origin_maps_to_apex():
    h = disk_to_hyperboloid(0.0)
    assert h.tau == 0 and h.phi == 0
    assert bloch_vector(h) == pytest.approx((1.0, 0.0, 0.0))


@given(disk())
def test_hyperboloid_round_trip(z):
    h = disk_to_hyperboloid(z)
    assert 0 <= h.phi < 2 * math.pi
    assert abs(hyperboloid_to_disk(h).z - z) < 1e-13
    n0, n1, n2 = bloch_vector(h)
    assert abs(n0 * n0 - n1 * n1 - n2 * n2 - 1) / n0**2 < 1e-12


def test_composition_check_value():
    r = compose_displacements(0.5, 0.5j, "right_phase")
    assert r.zeta3.z == pytest.approx(0.588235294117647 + 0.352941176470588j, abs=1e-12)
    assert r.phase == pytest.approx(-2 * math.atan(0.25), abs=1e-12)
    # the other ordering conjugates the roles: same modulus, mirrored point, opposite phase
    l = compose_displacements(0.5, 0.5j, "left_phase")
    assert l.zeta3.z == pytest.approx(0.352941176470588 + 0.588235294117647j, abs=1e-12)
    assert l.phase == pytest.approx(2 * math.atan(0.25), abs=1e-12)


@given(disk(), disk(), st.sampled_from(["right_phase", "left_phase"]))
def test_composition_matches_matrices(z1, z2, order):
    r = compose_displacements(z1, z2, order)
    z3, phi = compose_via_matrix(z1, z2, order)
    assert abs(r.zeta3.z - z3) < 1e-12
    assert abs(math.remainder(r.phase - phi, 2 * math.pi)) < 1e-11


@given(disk())
def test_su11_matrix_group(z):
    m = su11_matrix(z)
    eta = np.diag([1.0, -1.0])
    assert np.allclose(m.conj().T @ eta @ m, eta, atol=1e-9 * np.abs(m).max() ** 2)
    assert abs(np.linalg.det(m) - 1) < 1e-9 * np.abs(m).max() ** 2


@given(disk(), disk())
def test_distance_symmetric_and_isometric(a, b):
    d = hyperbolic_distance(a, b)
    assert d >= 0
    assert d == pytest.approx(hyperbolic_distance(b, a), rel=1e-9, abs=1e-12)
    # a Mobius shift is an isometry
    c = 0.3 - 0.2j
    assert hyperbolic_distance(mobius_shift(a, c), mobius_shift(b, c)) == pytest.approx(d, rel=1e-7, abs=1e-9)


def test_unknown_order():
    with pytest.raises(ValueError):
        compose_displacements(0.1, 0.2, "sideways")
