"""Heisenberg-Weyl compass state: the flat phase-space baseline.

Coordinates: alpha = (x + i p)/sqrt(2). The compass is the unnormalized
sum of |+-x0/sqrt2> and |+-i x0/sqrt2>; its closed-form Wigner function here
equals one eighth of tr[|psi><psi| 2 D(alpha) P D(alpha)^+]. Displacements
da = dx + i dp are measured in (x, p) units, i.e. D(da/sqrt2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln
from scipy.stats import poisson

from .sensitivity import THRESHOLD, bisect


@dataclass(frozen=True)
class HwCompassParams:
    x0: float

    def __post_init__(self):
        if not self.x0 > 0:
            raise ValueError("x0 must be positive")

    @property
    def alpha(self) -> float:
        return self.x0 / math.sqrt(2)

    def centers(self) -> np.ndarray:
        a = self.alpha
        return np.array([a, -a, 1j * a, -1j * a])


def _g(x, x0):
    return np.exp(-((x - x0) ** 2)) + np.exp(-((x + x0) ** 2))


def _v(x, p, x0):
    return np.exp(-((x - x0 / 2) ** 2 + (p - x0 / 2) ** 2)) * np.cos(x0 * (x + p - x0 / 2))


def hw_wigner_terms(params: HwCompassParams, x, p):
    """(coherent lobes, corner interferences, central chessboard)."""
    x0 = params.x0
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    w_coh = 0.25 * (np.exp(-(p**2)) * _g(x, x0) + np.exp(-(x**2)) * _g(p, x0))
    i_osc = 0.5 * sum(_v(m1 * x, m2 * p, x0) for m1 in (1, -1) for m2 in (1, -1))
    i_box = chessboard(params, x, p)
    return w_coh, i_osc, i_box


def chessboard(params: HwCompassParams, x, p):
    x0 = params.x0
    return 0.5 * np.exp(-(np.asarray(x) ** 2 + np.asarray(p) ** 2)) * (np.cos(2 * x0 * np.asarray(x)) + np.cos(2 * x0 * np.asarray(p)))


def hw_wigner_compass(params: HwCompassParams, x, p):
    return sum(hw_wigner_terms(params, x, p))


def coherent_fock(alpha: complex, N: int) -> np.ndarray:
    n = np.arange(N + 1)
    if alpha == 0:
        return (n == 0).astype(complex)
    logmag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag + 1j * n * np.angle(alpha))


def hw_cutoff(mean: float, tail: float = 1e-12) -> int:
    """Smallest N with Poisson(mean) mass beyond N below ``tail``."""
    n = int(mean)
    while poisson.sf(n, mean) >= tail:
        n += 1
    return n


def hw_wigner_oracle(params: HwCompassParams, x, p, N: int | None = None) -> np.ndarray:
    """(1/8) tr[|psi><psi| 2 D P D^+] in a truncated number basis.

    D(alpha) = R exp(|alpha| (a^+ - a)) R^+ with R = exp(i arg(alpha) a^+ a);
    the exponential of the truncated real antisymmetric generator is taken
    through one Hermitian eigendecomposition, reused for every point.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    reach = params.alpha + float(np.max(np.hypot(x, p))) / math.sqrt(2)
    if N is None:
        N = max(64, 2 * hw_cutoff(reach**2))
    n = np.arange(N + 1)
    psi = sum(coherent_fock(c, N) for c in params.centers())
    gen = np.diag(np.sqrt(np.arange(1.0, N + 1)), -1)
    gen = gen - gen.T  # a^+ - a
    lam, vec = np.linalg.eigh(1j * gen)
    par = (-1.0) ** n
    out = np.empty(x.shape)
    for i, (xi, pi) in enumerate(zip(x.ravel(), p.ravel())):
        al = complex(xi, pi) / math.sqrt(2)
        rot = np.exp(1j * np.angle(al) * n)
        # D^+ psi = R exp(-|al| gen) R^+ psi, exp(-r gen) = V exp(-i r lam) V^+
        w = vec.conj().T @ (np.conj(rot) * psi)
        v = rot * (vec @ (np.exp(-1j * abs(al) * lam) * w))
        out.flat[i] = 0.25 * float(np.real(np.vdot(v, par * v)))
    return out


def hw_wigner_expm(params: HwCompassParams, x: float, p: float, N: int = 96) -> float:
    """Single-point reference using scipy's expm on a padded space."""
    psi = sum(coherent_fock(c, N) for c in params.centers())
    big = N + 40
    a = np.diag(np.sqrt(np.arange(1, big + 1)), 1).astype(complex)
    al = complex(x, p) / math.sqrt(2)
    d = expm(al * a.conj().T - np.conj(al) * a)[: N + 1, : N + 1]
    v = d.conj().T @ psi
    return 0.25 * float(np.real(np.vdot(v, ((-1.0) ** np.arange(N + 1)) * v)))


def hw_fidelity_compass(params: HwCompassParams, da):
    """Large-x0 closed form (1/4) exp(-|da|^2/2) [cos(x0 dx) + cos(x0 dp)]^2."""
    da = np.asarray(da, dtype=complex)
    x0 = params.x0
    return 0.25 * np.exp(-0.5 * np.abs(da) ** 2) * (np.cos(x0 * da.real) + np.cos(x0 * da.imag)) ** 2


def hw_fidelity_coherent(da):
    return np.exp(-0.5 * np.abs(np.asarray(da)) ** 2)


def hw_fidelity_exact(params: HwCompassParams, da):
    """|<psi|D(da/sqrt2)|psi>|^2 for the normalized compass, every cross term kept."""
    da = np.asarray(da, dtype=complex)
    g = da / math.sqrt(2)
    c = params.centers()

    def ov(a, b):
        return np.exp(-0.5 * abs(a) ** 2 - 0.5 * np.abs(b) ** 2 + np.conj(a) * b)

    norm = sum(ov(a, b) for a in c for b in c).real
    amp = sum(np.exp(0.5 * (g * np.conj(b) - np.conj(g) * b)) * ov(a, b + g) for a in c for b in c)
    return np.abs(amp / norm) ** 2


def hw_zero_lines(params: HwCompassParams, m: int) -> float:
    """Value of dx +- dp on the m-th zero line: (2m+1) pi / x0."""
    return (2 * m + 1) * math.pi / params.x0


def hw_detection_radius(fidelity, direction: float, threshold: float = THRESHOLD, r_max: float = 10.0, step: float = 1e-4):
    """Smallest r with fidelity(r e^{i direction}) < threshold, or None."""
    u = complex(math.cos(direction), math.sin(direction))
    r = np.arange(1, int(round(r_max / step)) + 1) * step
    below = np.nonzero(fidelity(r * u) < threshold)[0]
    if not below.size:
        return None
    i = below[0]
    lo = r[i - 1] if i else 0.0
    return bisect(lambda t: float(fidelity(t * u)) - threshold, lo, r[i], 1e-10)


def hw_threshold_ratio(params: HwCompassParams, threshold: float = THRESHOLD, directions: int = 16, exact: bool = False) -> float:
    """Coherent detection radius over the best compass detection radius."""
    fid = (lambda d: hw_fidelity_exact(params, d)) if exact else (lambda d: hw_fidelity_compass(params, d))
    r_coh = math.sqrt(2 * math.log(1 / threshold))
    r_c = [hw_detection_radius(fid, 2 * math.pi * j / directions, threshold) for j in range(directions)]
    return r_coh / min(r for r in r_c if r is not None)


def chessboard_tile_halfwidth(params: HwCompassParams) -> float:
    """First zero of the central chessboard along the diagonal."""
    u = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
    f = lambda r: float(chessboard(params, r * u.real, r * u.imag))
    r = np.linspace(0, 4.0 / params.x0, 4001)
    v = np.array([f(t) for t in r])
    i = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0][0]
    return bisect(f, r[i], r[i + 1], 1e-12)
