"""Displacement sensitivity: overlap of a state with its displaced copy.

Exact evaluation goes through the composition law,

    D(dz)|z_j> = exp(i phi k) |z3>,  z3 = (dz + z_j)/(1 + dz* z_j),
    phi = -2 arg(1 + dz* z_j),

so <psi|D(dz)|psi> is a finite sum of coherent overlaps with every cross
term kept.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import EPS_BOUNDARY, check_disk
from .states import MixtureState, SuperpositionState, build, check_k, pure_components, state_overlap

THRESHOLD = 1e-3
N_DIRECTIONS = 16


@dataclass(frozen=True)
class DisplacementOffset:
    dx: float
    dp: float

    def __post_init__(self):
        if not math.hypot(self.dx, self.dp) < 1 - EPS_BOUNDARY:
            raise ValueError("displacement offset must lie inside the disk")

    @property
    def dz(self) -> complex:
        return complex(self.dx, self.dp)


def _as_offsets(dz):
    if isinstance(dz, DisplacementOffset):
        return np.asarray(dz.dz)
    return check_disk(dz)


def displaced_overlap(k, zi, zj, dz):
    """<zi| D(dz) |zj>, elementwise."""
    k = check_k(k)
    dz = np.asarray(dz, dtype=complex)
    den = 1 + np.conj(dz) * zj
    z3 = (dz + zj) / den
    # 1 - |z3|^2 without cancellation
    m3 = (1 - np.abs(dz) ** 2) * (1 - abs(zj) ** 2) / np.abs(den) ** 2
    logov = k * (np.log1p(-abs(zi) ** 2) + np.log(m3)) - 2 * k * np.log(1 - np.conj(zi) * z3)
    return np.exp(logov - 2j * k * np.angle(den))


def displaced_amplitude(a: SuperpositionState, b: SuperpositionState, dz):
    """<a| D(dz) |b> by coherent-state algebra."""
    dz = np.asarray(dz, dtype=complex)
    out = np.zeros(dz.shape, dtype=complex)
    for wi, zi in zip(a.weights, a.centers):
        for wj, zj in zip(b.weights, b.centers):
            out += np.conj(wi) * wj * displaced_overlap(a.k, zi, zj, dz)
    return out


def fidelity_exact(state, dz):
    """tr[rho D rho D^+]; |<psi|D|psi>|^2 for pure states."""
    dz = _as_offsets(dz)
    comps = pure_components(state)
    out = np.zeros(dz.shape)
    for wa, a in comps:
        for wb, b in comps:
            out += wa * wb * np.abs(displaced_amplitude(a, b, dz)) ** 2
    return out


# --- large-k closed forms ---------------------------------------------------


def _cat_bracket(k, zeta0, dz, along):
    """[(z0^2-1)^2 (1-|dz|^2) / ((z0^2-1)^2 + 4 z0^2 d^2)]^k and theta for d = dp or dx."""
    dz = np.asarray(dz, dtype=complex)
    d = dz.imag if along == "p" else dz.real
    a = (zeta0**2 - 1) ** 2
    base = a * (1 - np.abs(dz) ** 2) / (1 - 2 * zeta0**2 + 4 * zeta0**2 * d**2 + zeta0**4)
    theta = np.arctan(2 * zeta0 * d / (zeta0**2 - 1))
    return base, theta


def cat_signed_amplitude(k, zeta0, dz, along: str = "p"):
    """Diagonal-term amplitude base^k cos(2k theta) of the horizontal (p) or vertical (x) cat."""
    base, theta = _cat_bracket(k, zeta0, dz, along)
    return base**k * np.cos(2 * k * theta)


def fidelity_large_k(kind: str, k, zeta0, dz, reading: str = "printed"):
    """Large-k overlap formulas.

    ``printed``: the horizontal cat carries the 1/2 prefactor, the compass is
    (1/2)(sqrt F_H + sqrt F_V)^2 and the mixture F_H + F_V.
    ``normalized``: the expressions that follow from normalized states with
    cross terms dropped; cat F = a^2, compass (a_H + a_V)^2/4 with signed
    amplitudes, mixture (a_H^2 + a_V^2)/4.
    The vertical cat is the horizontal one with dx and dp swapped.
    """
    k = check_k(k)
    dz = _as_offsets(dz)
    a_h = cat_signed_amplitude(k, zeta0, dz, "p")
    a_v = cat_signed_amplitude(k, zeta0, dz, "x")
    if reading == "printed":
        f_h, f_v = 0.5 * a_h**2, 0.5 * a_v**2
        table = {
            "cat_h": f_h,
            "cat_v": f_v,
            "compass": 0.5 * (np.sqrt(f_h) + np.sqrt(f_v)) ** 2,
            "mixture": f_h + f_v,
        }
    elif reading == "normalized":
        table = {
            "cat_h": a_h**2,
            "cat_v": a_v**2,
            "compass": 0.25 * (a_h + a_v) ** 2,
            "mixture": 0.25 * (a_h**2 + a_v**2),
        }
    else:
        raise ValueError(f"unknown reading {reading!r}")
    if kind == "coherent":
        return (1 - np.abs(dz) ** 2) ** (2 * k)
    if kind not in table:
        raise ValueError(f"no large-k formula for kind {kind!r}")
    return table[kind]


def in_regime(k, dz, k_min: float = 10.0, d_max: float = 0.1) -> np.ndarray:
    """Flag where the large-k, small-displacement assumptions plausibly hold."""
    return (k >= k_min) & (np.abs(np.asarray(dz)) <= d_max)


def _diagonal_split(s: SuperpositionState, dz):
    """(A - B, A + B) for A = <s|D|s> and B its diagonal large-k part.

    B = (1/n) sum_i <z_i|D|z_i>. The difference is assembled from the
    off-diagonal terms directly so it keeps full relative precision.
    """
    n = len(s.centers)
    c = np.asarray(s.coefficients, dtype=complex)
    g = s.gram()
    total = float(np.real(np.conj(c) @ g @ c))
    off_g = total - float(np.sum(np.abs(c) ** 2 * np.real(np.diag(g))))
    norm2 = s.norm_constant**2
    diag = np.zeros(np.shape(dz), dtype=complex)
    off = np.zeros(np.shape(dz), dtype=complex)
    for i, (ci, zi) in enumerate(zip(c, s.centers)):
        for j, (cj, zj) in enumerate(zip(c, s.centers)):
            term = np.conj(ci) * cj * displaced_overlap(s.k, zi, zj, dz)
            if i == j:
                diag += term
            else:
                off += term
    # norm2 - 1/n = -(off_g)/(n * total) when |c_i| = 1 and <z|z> = 1
    diff = -(off_g / (n * total)) * diag + norm2 * off
    approx = diag / n
    return diff, 2 * approx + diff


def approximation_gap(kind: str, k, zeta0, dz):
    """fidelity_exact - fidelity_large_k(normalized), free of cancellation."""
    dz = _as_offsets(dz)
    if kind in ("cat_h", "cat_v", "compass", "coherent"):
        s = build(kind, k, zeta0)
        d, sm = _diagonal_split(s, dz)
        return np.real(d * np.conj(sm))
    if kind == "mixture":
        m = build(kind, k, zeta0)
        (wa, h), (wb, v) = m.components
        dh, sh = _diagonal_split(h, dz)
        dv, sv = _diagonal_split(v, dz)
        cross = np.abs(displaced_amplitude(h, v, dz)) ** 2 + np.abs(displaced_amplitude(v, h, dz)) ** 2
        return wa * wa * np.real(dh * np.conj(sh)) + wb * wb * np.real(dv * np.conj(sv)) + wa * wb * cross
    raise ValueError(f"unknown kind {kind!r}")


# --- roots and detectability -----------------------------------------------


def predicted_zero_cat(k, zeta0, m: int = 0) -> tuple[float, float]:
    """(exact, large-k) displacement dp where the cat overlap vanishes."""
    k = check_k(k)
    arg = (2 * m + 1) * math.pi / (4 * k)
    if abs(math.cos(arg)) < 1e-12:
        raise ValueError(f"tan argument {arg!r} sits on a pole")
    exact = (zeta0**2 - 1) / (2 * zeta0) * math.tan(arg)
    linear = (zeta0**2 - 1) * (2 * m + 1) * math.pi / (8 * zeta0 * k)
    return exact, linear


def bisect(f, a: float, b: float, tol: float = 1e-10, maxiter: int = 200) -> float:
    """Plain bisection on a bracketing interval [a, b]."""
    fa = f(a)
    fb = f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ValueError("interval does not bracket a sign change")
    for _ in range(maxiter):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0 or 0.5 * (b - a) < tol:
            return mid
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return 0.5 * (a + b)


def fidelity_roots_cat(state: SuperpositionState, d_max: float = 0.3, samples: int = 6001, tol: float = 1e-12):
    """Zeros of the real amplitude <psi_H| D(i dp) |psi_H> for dp in (0, d_max).

    The amplitude is real along the p direction for the horizontal cat (its
    parity and reality symmetries), so its sign changes give the roots.
    """
    f = lambda p: float(np.real(displaced_amplitude(state, state, 1j * p)))
    grid = np.linspace(0.0, d_max, samples)
    vals = np.real(displaced_amplitude(state, state, 1j * grid))
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    return [bisect(f, grid[i], grid[i + 1], tol) for i in idx]


@dataclass(frozen=True)
class Detection:
    direction: float
    radius: float | None  # None: overlap never fell below threshold up to r_max

    @property
    def detected(self) -> bool:
        return self.radius is not None


def smallest_detectable_displacement(
    state, direction: float, threshold: float = THRESHOLD, r_max: float = 0.5, step: float = 2.5e-4, tol: float = 1e-10
) -> Detection:
    """Smallest r with F(r e^{i direction}) < threshold, by scan and bisection."""
    u = complex(math.cos(direction), math.sin(direction))
    r = np.arange(1, int(round(r_max / step)) + 1) * step
    f = fidelity_exact(state, r * u)
    below = np.nonzero(f < threshold)[0]
    if below.size == 0:
        return Detection(direction, None)
    i = below[0]
    lo = r[i - 1] if i > 0 else 0.0
    g = lambda x: float(fidelity_exact(state, x * u)) - threshold
    return Detection(direction, bisect(g, lo, r[i], tol))


def direction_sweep(state, n: int = N_DIRECTIONS, **kw) -> list[Detection]:
    return [smallest_detectable_displacement(state, 2 * math.pi * j / n, **kw) for j in range(n)]


def isotropy_ratio(detections) -> float:
    """max/min detectable radius over directions (inf if any direction is undetected)."""
    r = [d.radius for d in detections]
    if any(x is None for x in r):
        return math.inf
    return max(r) / min(r)


@dataclass
class FidelityMap:
    coords: np.ndarray
    values: np.ndarray  # NaN outside the disk
    mask: np.ndarray
    route: str
    metadata: dict = field(default_factory=dict)

    def offsets(self) -> np.ndarray:
        x, p = np.meshgrid(self.coords, self.coords)
        return x + 1j * p


def fidelity_map(state, resolution: int = 64, extent: float = 0.2, route: str = "exact_gram", reading: str = "normalized") -> FidelityMap:
    """Sample F(dz) on a cell-centred (dx, dp) grid."""
    from .wigner import evaluate_rows, grid_points

    coords, dz, mask = grid_points(resolution, extent)
    if route == "exact_gram":
        func = lambda d: fidelity_exact(state, d)
    elif route == "paper_approx":
        func = lambda d: fidelity_large_k(state.kind, state.k, state.zeta0, d, reading)
    elif route == "oracle_trace":
        from .fock_oracle import oracle_for

        oracle = oracle_for(state, dz[mask])
        func = oracle.fidelity
    else:
        raise ValueError(f"unknown route {route!r}")
    vals = evaluate_rows(func, dz, mask).real
    meta = {"state": state.to_dict(), "k": state.k, "zeta0": state.zeta0, "extent": extent}
    if route == "paper_approx":
        meta["reading"] = reading
    return FidelityMap(coords, vals, mask, route, meta)
