"""Truncated |k,n> matrix engine used to arbitrate the closed forms.

Two routes are provided:

* dense matrices (generators, disentangled or exponentiated displacement,
  parity) for moderate |zeta| and explicit trace evaluation;
* ``SpectralOracle``, which evaluates the same traces for points arbitrarily
  close to the boundary. D(zeta) is a rotated exp(-i tau K1), and K1 in the
  |k,n> basis is the Jacobi matrix of the Meixner-Pollaczek polynomials, so
  exp(-i tau K1) is diagonal in the spectral variable of K1. Inner products
  become quadratures over that variable with an explicit, self-checked
  normalization. Only Fock amplitudes of the state enter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln, loggamma

from .geometry import as_complex, check_disk
from .states import TAIL_MASS, check_k, pure_components, tail_cutoff


class CutoffError(ValueError):
    """The Fock cutoff is too small for the requested accuracy."""


class OracleAccuracyError(RuntimeError):
    """A spectral quadrature failed its own completeness check."""


@dataclass(frozen=True)
class FockOperator:
    k: float
    cutoff: int
    entries: np.ndarray

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.k, self.cutoff, self.entries @ other.entries)
        return self.entries @ other

    @property
    def H(self) -> "FockOperator":
        return FockOperator(self.k, self.cutoff, self.entries.conj().T)


@dataclass(frozen=True)
class FockVector:
    k: float
    cutoff: int
    amplitudes: np.ndarray


def oracle_cutoff(k, r: float) -> int:
    """Tail-rule cutoff for 1e-12 mass, doubled to leave room for operator products."""
    return max(8, 2 * tail_cutoff(k, r, TAIL_MASS))


def state_vector(state, cutoff: int | None = None) -> FockVector:
    """Fock amplitudes of a pure superposition."""
    if cutoff is None:
        cutoff = oracle_cutoff(state.k, state.max_modulus())
    return FockVector(state.k, cutoff, state.amplitudes(cutoff))


def density_matrix(state, cutoff: int | None = None) -> FockOperator:
    """rho in the truncated basis for a pure state or a mixture."""
    comps = pure_components(state)
    if cutoff is None:
        cutoff = oracle_cutoff(state.k, max(s.max_modulus() for _, s in comps))
    rho = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    for w, s in comps:
        v = s.amplitudes(cutoff)
        rho += w * np.outer(v, v.conj())
    return FockOperator(state.k, cutoff, rho)


def build_generators(k, N: int):
    """K0, K+, K- on |k,0>..|k,N>."""
    k = check_k(k)
    if N < 1:
        raise ValueError("cutoff must be at least 1")
    n = np.arange(N + 1)
    k0 = np.diag(k + n).astype(complex)
    s = np.sqrt((n[:-1] + 1) * (2 * k + n[:-1]))
    kp = np.diag(s, -1).astype(complex)
    km = kp.T.copy()
    return FockOperator(k, N, k0), FockOperator(k, N, kp), FockOperator(k, N, km)


def casimir(k0: FockOperator, kp: FockOperator, km: FockOperator) -> np.ndarray:
    """K0^2 - (K+K- + K-K+)/2, which equals K0^2 - K1^2 - K2^2."""
    a, p, m = k0.entries, kp.entries, km.entries
    return a @ a - 0.5 * (p @ m + m @ p)


def casimir_residual(k, N: int) -> float:
    """Max deviation of the Casimir from k(k-1) on the interior block."""
    c = casimir(*build_generators(k, N))
    inner = c[: N - 1, : N - 1]
    return float(np.abs(inner - k * (k - 1) * np.eye(N - 1)).max())


def _ladder_exponential(k, c: complex, N: int) -> np.ndarray:
    """exp(c K+) on the truncated space, entries in closed form.

    K+ is strictly lower triangular there, so the series terminates and
    [exp(c K+)]_{mn} = c^(m-n)/(m-n)! * sqrt(m! G(m+2k) / (n! G(n+2k))).
    """
    n = np.arange(N + 1)
    m_, n_ = np.meshgrid(n, n, indexing="ij")
    d = m_ - n_
    low = d >= 0
    dd = np.where(low, d, 0)
    out = np.zeros((N + 1, N + 1), dtype=complex)
    if c == 0:
        return np.eye(N + 1, dtype=complex)
    logmag = (
        dd * math.log(abs(c))
        - gammaln(dd + 1)
        + 0.5 * (gammaln(m_ + 1) + gammaln(m_ + 2 * k) - gammaln(n_ + 1) - gammaln(n_ + 2 * k))
    )
    vals = np.exp(logmag + 1j * dd * math.atan2(c.imag, c.real))
    out[low] = vals[low]
    return out


def displacement_matrix(k, z, N: int, method: str = "disentangled", check_tail: bool = True) -> FockOperator:
    """D(zeta) on |k,0>..|k,N>.

    ``disentangled`` multiplies exp(z K+) exp(ln(1-|z|^2) K0) exp(-z* K-). The
    two triangular factors are exact finite sums and every intermediate index
    of the product is bounded by min(m, n), so the block is exact up to
    rounding. The alternating sum loses relative precision as |z| grows; use
    it for |z| up to about 0.5. ``expm`` exponentiates xi K+ - xi* K- on a
    doubled space and crops.
    """
    k = check_k(k)
    z = as_complex(z)
    if check_tail:
        need = tail_cutoff(k, abs(z))
        if N < need:
            raise CutoffError(f"cutoff {N} below the tail rule; need N >= {need} at |zeta| = {abs(z):.6g}")
    if method == "disentangled":
        lower = _ladder_exponential(k, z, N)
        n = np.arange(N + 1)
        mid = np.exp((k + n) * math.log1p(-abs(z) ** 2))
        upper = _ladder_exponential(k, -z, N).conj().T  # exp(-z* K-) = [exp(-z K+)]^+
        return FockOperator(k, N, (lower * mid[None, :]) @ upper)
    if method == "expm":
        big = 2 * N + 2
        _, kp, km = build_generators(k, big)
        r = abs(z)
        xi = math.atanh(r) * (z / r if r > 0 else 0)
        full = expm(xi * kp.entries - np.conj(xi) * km.entries)
        return FockOperator(k, N, full[: N + 1, : N + 1])
    raise ValueError(f"unknown method {method!r}")


def parity_matrix(k, N: int) -> FockOperator:
    """exp[i pi (K0 - k)] = diag((-1)^n)."""
    return FockOperator(check_k(k), N, np.diag((-1.0) ** np.arange(N + 1)).astype(complex))


def phase_operator(k, phi: float, N: int) -> FockOperator:
    """exp(i phi K0)."""
    n = np.arange(N + 1)
    return FockOperator(k, N, np.diag(np.exp(1j * phi * (k + n))))


def _check_trace(rho: np.ndarray):
    tr = np.trace(rho)
    if abs(tr - 1) > 1e-10:
        raise ValueError(f"density operator trace {tr!r} differs from 1")


def wigner_trace(rho: FockOperator, z, method: str = "disentangled") -> complex:
    """tr[rho D(z) P D(z)^+] by dense matrices."""
    _check_trace(rho.entries)
    d = displacement_matrix(rho.k, z, rho.cutoff, method, check_tail=False).entries
    par = (-1.0) ** np.arange(rho.cutoff + 1)
    kernel = (d * par[None, :]) @ d.conj().T
    return complex(np.sum(rho.entries.T * kernel))


def fidelity_trace(rho: FockOperator, dz, method: str = "disentangled") -> float:
    """tr[rho D rho D^+] by dense matrices."""
    _check_trace(rho.entries)
    d = displacement_matrix(rho.k, dz, rho.cutoff, method, check_tail=False).entries
    r = rho.entries
    return float(np.real(np.trace(r @ d @ r @ d.conj().T)))


# --- single-mode boson realization ------------------------------------------


def boson_ladder(N: int) -> np.ndarray:
    """Annihilation operator a on |0>..|N>."""
    return np.diag(np.sqrt(np.arange(1, N + 1)), 1).astype(complex)


def single_mode_generators(N: int):
    """K+ = a^+2/2, K- = a^2/2, K0 = (a a^+ + a^+ a)/4 in the boson Fock basis."""
    a = boson_ladder(N)
    ad = a.conj().T
    return 0.25 * (a @ ad + ad @ a), 0.5 * ad @ ad, 0.5 * a @ a


def single_mode_casimir_residual(N: int, margin: int = 3) -> float:
    """Max deviation of K0^2 - (K+K- + K-K+)/2 from -3/16 away from the cutoff edge."""
    k0, kp, km = single_mode_generators(N)
    c = k0 @ k0 - 0.5 * (kp @ km + km @ kp)
    inner = c[: N - margin, : N - margin]
    return float(np.abs(inner + 3 / 16 * np.eye(N - margin)).max())


def squeeze_boson(z, N: int) -> np.ndarray:
    """exp(xi K+ - xi* K-) with the single-mode generators, on a doubled space, cropped."""
    z = as_complex(z)
    big = 2 * N + 2
    _, kp, km = single_mode_generators(big)
    r = abs(z)
    xi = math.atanh(r) * (z / r if r > 0 else 0)
    return expm(xi * kp - np.conj(xi) * km)[: N + 1, : N + 1]


# --- spectral route -----------------------------------------------------------


def _log_measure(k, lam):
    """log of the K1 spectral density 2^(2k) |G(k + i lam)|^2 / (2 pi G(2k))."""
    return 2 * k * math.log(2.0) + 2 * loggamma(k + 1j * lam).real - math.log(2 * math.pi) - gammaln(2 * k)


def spectral_basis(k, n_support: int, lam_max: float, h: float):
    """Nodes lam_i = i h (symmetric) and Q[i, n] = sqrt(rho(lam_i) h) p_n(lam_i).

    p_n are the orthonormal polynomials of the K1 Jacobi matrix, generated by
    the three-term recurrence with periodic rescaling to avoid overflow.
    """
    m = int(math.ceil(lam_max / h))
    lam = h * np.arange(-m, m + 1)
    n = np.arange(n_support)
    b = 0.5 * np.sqrt((n + 1) * (n + 2 * k))
    q = np.zeros((lam.size, n_support))
    logs = np.zeros((lam.size, n_support))
    prev = np.zeros(lam.size)
    cur = np.ones(lam.size)
    s = 0.5 * (_log_measure(k, lam) + math.log(h))
    q[:, 0] = cur
    logs[:, 0] = s
    for j in range(n_support - 1):
        nxt = (lam * cur - (b[j - 1] if j else 0.0) * prev) / b[j]
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if big.any():
            cur[big] *= 1e-100
            prev[big] *= 1e-100
            s = s + big * (100 * math.log(10.0))
        q[:, j + 1] = cur
        logs[:, j + 1] = s
    return lam, q * np.exp(logs)


class SpectralOracle:
    """Trace evaluations tr[rho D P D^+] and tr[rho D rho D^+] by spectral quadrature.

    ``components`` is a Fock-form density operator written as a list of
    (weight, amplitude vector) pairs; ``density_components`` converts a dense
    matrix. ``max_tau`` bounds 2 artanh|z| of the evaluation points.
    """

    def __init__(self, k, components, max_tau: float, norm_tol: float = 1e-12, chunk: int = 256):
        self.k = check_k(k)
        self.weights = np.array([float(w) for w, _ in components])
        vecs = [np.asarray(v, dtype=complex) for _, v in components]
        self.n_support = max(v.size for v in vecs)
        self.vectors = np.zeros((len(vecs), self.n_support), dtype=complex)
        for i, v in enumerate(vecs):
            self.vectors[i, : v.size] = v
        self.norms = np.sum(np.abs(self.vectors) ** 2, axis=1)
        self.norm_tol = norm_tol
        self.chunk = chunk
        self.max_tau = float(max_tau)
        self._build()

    def _support_tau(self) -> float:
        """Effective hyperbolic radius of the state: mean excitation -> |zeta|."""
        n = np.arange(self.n_support)
        p = np.abs(self.vectors) ** 2
        mean = float(np.max(p @ n / np.maximum(self.norms, 1e-300)))
        r2 = mean / (mean + 2 * self.k)  # coherent-state relation n = 2k r^2 / (1 - r^2)
        return 2 * math.atanh(math.sqrt(min(r2, 1 - 1e-12)))

    def _build(self):
        k = self.k
        tsup = self._support_tau()
        self.h = 2 * math.pi / (2 * self.max_tau + 4 * tsup + 40.0 / k + 2.0)
        lam_big = 1.4 * self.n_support + 20.0
        lam, q = spectral_basis(k, self.n_support, lam_big, self.h)
        # window: wherever any rotation of the state carries spectral weight
        rot = np.exp(-1j * np.outer(np.arange(self.n_support), np.linspace(0, 2 * np.pi, 24, endpoint=False)))
        weight = np.zeros(lam.size)
        for v in self.vectors:
            f = q @ (v[:, None] * rot)
            weight = np.maximum(weight, np.max(np.abs(f) ** 2, axis=1))
        live = np.nonzero(weight > 1e-34 * self.norms.max())[0]
        lim = max(abs(lam[live[0]]), abs(lam[live[-1]])) + 5 * self.h
        keep = np.abs(lam) <= lim + 1e-12
        self.lam = lam[keep]
        self.q = q[keep]
        self.q_cols = np.ascontiguousarray(self.q)
        self.worst_norm_defect = 0.0

    def _transform(self, vec, theta):
        """F[i, j] = sum_n Q[i, n] exp(-i theta_j n) vec[n]."""
        x = np.exp(-1j * np.outer(np.arange(self.n_support), theta)) * vec[:, None]
        return self.q_cols @ np.ascontiguousarray(x.real) + 1j * (self.q_cols @ np.ascontiguousarray(x.imag))

    def _certify(self, f, norm):
        defect = np.abs(np.sum(np.abs(f) ** 2, axis=0) - norm)
        worst = float(defect.max()) if defect.size else 0.0
        self.worst_norm_defect = max(self.worst_norm_defect, worst)
        if worst > self.norm_tol * max(norm, 1.0):
            raise OracleAccuracyError(f"spectral window misses weight {worst:.3g}")

    def _chunks(self, z):
        z = check_disk(np.atleast_1d(np.asarray(z, dtype=complex)).ravel())
        tau = 2 * np.arctanh(np.abs(z))
        if tau.size and tau.max() > self.max_tau + 1e-12:
            raise ValueError("point beyond the oracle's max_tau")
        theta = np.angle(z) + 0.5 * np.pi
        for s in range(0, z.size, self.chunk):
            yield s, tau[s : s + self.chunk], theta[s : s + self.chunk]

    def wigner(self, z) -> np.ndarray:
        """sum_a w_a <psi_a| D(z) P D(z)^+ |psi_a> for an array of points."""
        shape = np.shape(z)
        out = np.zeros(np.size(z), dtype=complex)
        for s, tau, theta in self._chunks(z):
            ph = np.exp(-2j * np.outer(self.lam, tau))
            acc = np.zeros(tau.size, dtype=complex)
            for w, v, nv in zip(self.weights, self.vectors, self.norms):
                f = self._transform(v, theta)
                self._certify(f, nv)
                acc += w * np.sum(ph * np.conj(f) * f[::-1], axis=0)
            out[s : s + tau.size] = acc
        return out.reshape(shape)

    def fidelity(self, dz) -> np.ndarray:
        """sum_ab w_a w_b |<psi_a| D(dz) |psi_b>|^2."""
        shape = np.shape(dz)
        out = np.zeros(np.size(dz))
        for s, tau, theta in self._chunks(dz):
            ph = np.exp(-1j * np.outer(self.lam, tau))
            fs = []
            for v, nv in zip(self.vectors, self.norms):
                f = self._transform(v, theta)
                self._certify(f, nv)
                fs.append(f)
            acc = np.zeros(tau.size)
            for a, fa in enumerate(fs):
                for b, fb in enumerate(fs):
                    amp = np.sum(ph * np.conj(fa) * fb, axis=0)
                    acc += self.weights[a] * self.weights[b] * np.abs(amp) ** 2
            out[s : s + tau.size] = acc
        return out.reshape(shape)

    def matrix_element(self, bra, ket, z) -> np.ndarray:
        """<bra| D(z) |ket> for arbitrary Fock vectors (padded to the support)."""
        bra = np.pad(np.asarray(bra, dtype=complex), (0, self.n_support - len(bra)))
        ket = np.pad(np.asarray(ket, dtype=complex), (0, self.n_support - len(ket)))
        shape = np.shape(z)
        out = np.zeros(np.size(z), dtype=complex)
        for s, tau, theta in self._chunks(z):
            fa = self._transform(bra, theta)
            fb = self._transform(ket, theta)
            out[s : s + tau.size] = np.sum(np.exp(-1j * np.outer(self.lam, tau)) * np.conj(fa) * fb, axis=0)
        return out.reshape(shape)


def density_components(rho: FockOperator, cutoff_eig: float = 1e-15):
    """Eigen-decomposition of a Hermitian density matrix into (weight, vector) pairs."""
    _check_trace(rho.entries)
    vals, vecs = np.linalg.eigh(0.5 * (rho.entries + rho.entries.conj().T))
    return [(float(v), vecs[:, i]) for i, v in enumerate(vals) if v > cutoff_eig]


def state_components(state, cutoff: int | None = None):
    """(weight, Fock vector) pairs for a pure state or a mixture."""
    comps = pure_components(state)
    if cutoff is None:
        cutoff = oracle_cutoff(state.k, max(s.max_modulus() for _, s in comps))
    return [(w, s.amplitudes(cutoff)) for w, s in comps]


def oracle_for(state, points, cutoff: int | None = None) -> SpectralOracle:
    """Spectral oracle sized for ``state`` and the evaluation ``points``."""
    pts = check_disk(points)
    max_tau = float(2 * np.arctanh(np.abs(pts).max())) if pts.size else 0.0
    return SpectralOracle(state.k, state_components(state, cutoff), max_tau)
