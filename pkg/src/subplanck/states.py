"""SU(1,1) Perelomov coherent states, their superpositions and mixtures."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .geometry import EPS_BOUNDARY, BoundaryError, as_complex, check_disk, hyperbolic_distance

TAIL_MASS = 1e-12
KINDS = ("reference", "coherent", "cat_h", "cat_v", "compass")


def check_k(k) -> float:
    k = float(k)
    if not (k > 0 and math.isfinite(k)):
        raise ValueError(f"Bargmann index must be positive, got {k!r}")
    return k


def _log_binom(k, n):
    """log sqrt(Gamma(n+2k) / (n! Gamma(2k)))."""
    return 0.5 * (gammaln(n + 2 * k) - gammaln(n + 1) - gammaln(2 * k))


def coherent_amplitude(k, z, n):
    """Fock amplitude <k,n|zeta> = (1-|z|^2)^k sqrt(G(n+2k)/(n! G(2k))) z^n.

    Evaluated in the log domain; ``n`` may be an integer array.
    """
    k = check_k(k)
    z = as_complex(z)
    n = np.asarray(n)
    r = abs(z)
    if r == 0.0:
        return np.where(n == 0, 1.0 + 0j, 0j)
    logmag = k * math.log1p(-r * r) + _log_binom(k, n) + n * math.log(r)
    return np.exp(logmag + 1j * n * math.atan2(z.imag, z.real))


def coherent_amplitudes(k, z, n_max: int) -> np.ndarray:
    """Amplitudes for n = 0..n_max."""
    return coherent_amplitude(k, z, np.arange(n_max + 1))


def coherent_overlap(k, z1, z2):
    """<z1|z2> = [(1-|z1|^2)(1-|z2|^2)/(1-z1* z2)^2]^k, principal branch.

    Works elementwise on arrays. Re(1 - z1* z2) > 0 inside the disk, so the
    principal logarithm never meets its cut.
    """
    a = np.asarray(z1, dtype=complex)
    b = np.asarray(z2, dtype=complex)
    logv = k * (np.log1p(-np.abs(a) ** 2) + np.log1p(-np.abs(b) ** 2)) - 2 * k * np.log(1 - np.conj(a) * b)
    return np.exp(logv)


def overlap_modulus_geodesic(k, z1, z2) -> float:
    """|<z1|z2>| from the geodesic distance chi: cosh(chi/2)^(-2k)."""
    chi = hyperbolic_distance(z1, z2)
    return math.cosh(0.5 * chi) ** (-2 * check_k(k))


def tail_bound(k, r: float, n_cut: int) -> float:
    """Certified upper bound on sum_{n > n_cut} P(n) for a coherent state of modulus r.

    Uses the ratio P(n+1)/P(n) = r^2 (n+2k)/(n+1), which is monotone in n and
    tends to r^2, so every ratio beyond n_cut+1 is bounded by max(ratio, r^2).
    """
    if r == 0.0:
        return 0.0
    r2 = r * r
    m = n_cut + 1
    p_m = math.exp(2 * (k * math.log1p(-r2) + _log_binom(k, m) + m * math.log(r)))
    rho = max(r2 * (m + 2 * k) / (m + 1), r2)
    if rho >= 1.0:
        return math.inf
    return p_m / (1.0 - rho)


def tail_cutoff(k, r: float, tail: float = TAIL_MASS) -> int:
    """Smallest N with certified tail mass beyond N below ``tail``."""
    k = check_k(k)
    r = float(r)
    if r >= 1.0 - EPS_BOUNDARY:
        raise BoundaryError(f"|zeta| = {r!r} too close to the boundary")
    if r == 0.0:
        return 0
    # start near the bulk, then walk; the bound decreases monotonically once rho < 1
    mean = 2 * k * r * r / (1 - r * r)
    n = max(1, int(mean))
    step = max(1, int(math.sqrt(mean + 1)))
    while tail_bound(k, r, n) >= tail:
        n += step
    lo = max(0, n - step)
    while lo < n:
        mid = (lo + n) // 2
        if tail_bound(k, r, mid) < tail:
            n = mid
        else:
            lo = mid + 1
    return n


@dataclass(frozen=True)
class PhotonStatistics:
    pmf: np.ndarray
    mean: float
    variance: float
    fano: float
    tail_bound: float


def photon_pmf(k, z, n_max: int | None = None) -> PhotonStatistics:
    """Excitation-number distribution P(n) = |<k,n|z>|^2 with mean and Fano factor."""
    k = check_k(k)
    z = as_complex(z)
    need = tail_cutoff(k, abs(z))
    if n_max is None:
        n_max = need
    elif n_max < need:
        raise ValueError(f"n_max={n_max} below the tail cutoff {need} for 1e-12 mass")
    p = np.abs(coherent_amplitudes(k, z, n_max)) ** 2
    n = np.arange(n_max + 1)
    mean = float(n @ p)
    var = float((n - mean) ** 2 @ p)
    fano = var / mean if mean > 0 else float("nan")
    return PhotonStatistics(p, mean, var, fano, tail_bound(k, abs(z), n_max))


def two_mode_photon_statistics(q: int, z) -> dict:
    """Fano factors of the two-mode realization |n, n+q> for a coherent state.

    Mode 2 carries n photons, mode 1 carries n + q, the total is 2n + q.
    """
    real = realization_map(q)
    st = photon_pmf(real.k, z)
    n = np.arange(st.pmf.size)
    out = {"q": real.q, "k": real.k}
    for name, counts in (("mode2", n), ("mode1", n + real.q), ("total", 2 * n + real.q)):
        mean = float(counts @ st.pmf)
        var = float((counts - mean) ** 2 @ st.pmf)
        out[name] = {"mean": mean, "variance": var, "fano": var / mean if mean > 0 else float("nan")}
    return out


@dataclass(frozen=True)
class SuperpositionState:
    """Normalized pure state sum_j c_j |zeta_j>.

    ``coefficients`` are the raw (unnormalized) weights; ``weights`` already
    include the norm constant.
    """

    k: float
    centers: tuple
    coefficients: tuple
    norm_constant: float
    kind: str = "custom"
    zeta0: float | None = None

    @property
    def weights(self) -> np.ndarray:
        return self.norm_constant * np.asarray(self.coefficients, dtype=complex)

    @property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.centers, dtype=complex)

    def gram(self) -> np.ndarray:
        c = self.center_array
        return coherent_overlap(self.k, c[:, None], c[None, :])

    def norm(self) -> float:
        w = self.weights
        return float(np.real(np.conj(w) @ self.gram() @ w))

    def max_modulus(self) -> float:
        return float(np.abs(self.center_array).max())

    def amplitudes(self, n_max: int) -> np.ndarray:
        n = np.arange(n_max + 1)
        return sum(w * coherent_amplitude(self.k, c, n) for w, c in zip(self.weights, self.centers))

    def to_dict(self) -> dict:
        return {
            "type": "pure",
            "kind": self.kind,
            "k": self.k,
            "zeta0": self.zeta0,
            "centers": [[c.real, c.imag] for c in self.center_array],
            "coefficients": [[c.real, c.imag] for c in np.asarray(self.coefficients, dtype=complex)],
            "norm_constant": self.norm_constant,
        }


@dataclass(frozen=True)
class MixtureState:
    k: float
    components: tuple  # of (weight, SuperpositionState)
    kind: str = "mixture"
    zeta0: float | None = None

    def __post_init__(self):
        w = [c[0] for c in self.components]
        if any(x <= 0 for x in w) or abs(sum(w) - 1) > 1e-12:
            raise ValueError("mixture weights must be positive and sum to 1")

    def max_modulus(self) -> float:
        return max(s.max_modulus() for _, s in self.components)

    def purity(self) -> float:
        return purity(self)

    def to_dict(self) -> dict:
        return {
            "type": "mixture",
            "kind": self.kind,
            "k": self.k,
            "zeta0": self.zeta0,
            "components": [{"weight": w, "state": s.to_dict()} for w, s in self.components],
        }


def superposition(k, centers, coefficients=None, kind: str = "custom", zeta0=None) -> SuperpositionState:
    """Build and normalize sum_j c_j |z_j> through its Gram matrix."""
    k = check_k(k)
    centers = tuple(as_complex(c) for c in centers)
    if not centers:
        raise ValueError("at least one term required")
    if coefficients is None:
        coefficients = (1.0 + 0j,) * len(centers)
    coefficients = tuple(complex(c) for c in coefficients)
    if len(coefficients) != len(centers):
        raise ValueError("one coefficient per center")
    c = np.asarray(coefficients)
    if not np.any(c != 0):
        raise ValueError("coefficients are all zero")
    z = np.asarray(centers)
    g = coherent_overlap(k, z[:, None], z[None, :])
    n2 = float(np.real(np.conj(c) @ g @ c))
    if not n2 > 0:
        raise ValueError("superposition has zero norm")
    return SuperpositionState(k, centers, coefficients, 1.0 / math.sqrt(n2), kind, zeta0)


def _check_zeta0(zeta0) -> float:
    zeta0 = float(zeta0)
    if not 0.0 < zeta0 < 1.0 - EPS_BOUNDARY:
        raise BoundaryError(f"zeta0 must lie in (0, 1 - {EPS_BOUNDARY:g}), got {zeta0!r}")
    return zeta0


def make_state(kind: str, k, zeta0=None) -> SuperpositionState:
    """Reference, coherent, horizontal/vertical cat or compass state."""
    if kind == "reference":
        return superposition(k, [0.0], kind=kind)
    zeta0 = _check_zeta0(zeta0)
    if kind == "coherent":
        centers = [zeta0]
    elif kind == "cat_h":
        centers = [zeta0, -zeta0]
    elif kind == "cat_v":
        centers = [1j * zeta0, -1j * zeta0]
    elif kind == "compass":
        centers = [zeta0, -zeta0, 1j * zeta0, -1j * zeta0]
    else:
        raise ValueError(f"unknown state kind {kind!r}; expected one of {KINDS}")
    return superposition(k, centers, kind=kind, zeta0=zeta0)


def make_mixture(k, zeta0) -> MixtureState:
    """Equal-weight incoherent mixture of the horizontal and vertical cats."""
    k = check_k(k)
    h = make_state("cat_h", k, zeta0)
    v = make_state("cat_v", k, zeta0)
    return MixtureState(k, ((0.5, h), (0.5, v)), zeta0=h.zeta0)


def build(kind: str, k, zeta0=None):
    """Any supported state, including ``mixture``."""
    if kind == "mixture":
        return make_mixture(k, zeta0)
    return make_state(kind, k, zeta0)


def state_overlap(a: SuperpositionState, b: SuperpositionState) -> complex:
    """<a|b> by coherent-state Gram algebra."""
    za, zb = a.center_array, b.center_array
    g = coherent_overlap(a.k, za[:, None], zb[None, :])
    return complex(np.conj(a.weights) @ g @ b.weights)


def pure_components(state):
    """[(weight, SuperpositionState)] for either state type."""
    if isinstance(state, MixtureState):
        return list(state.components)
    return [(1.0, state)]


def purity(state) -> float:
    comps = pure_components(state)
    return float(sum(wa * wb * abs(state_overlap(a, b)) ** 2 for wa, a in comps for wb, b in comps))


@dataclass(frozen=True)
class TwoModeRealization:
    """Two-mode bosonic realization: |k,n> = |n, n+q> with k = (q+1)/2."""

    q: int
    k: float = field(init=False)
    label: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "k", (self.q + 1) / 2)
        label = "two_mode_squeezed_vacuum" if self.q == 0 else "two_mode_squeezed_number"
        object.__setattr__(self, "label", label)


def realization_map(q) -> TwoModeRealization:
    if isinstance(q, bool) or not float(q).is_integer() or q < 0:
        raise ValueError(f"degeneracy parameter must be a nonnegative integer, got {q!r}")
    return TwoModeRealization(int(q))


def single_mode_tag(k) -> str:
    """Single-mode realization (Casimir -3/16): which Fock parity carries index k."""
    if k == 0.25:
        return "squeezed_vacuum"
    if k == 0.75:
        return "squeezed_one_photon"
    raise ValueError(f"the single-mode realization only has k = 1/4 or 3/4, got {k!r}")


def single_mode_amplitudes(k, z, n_max: int) -> np.ndarray:
    """Coherent state of the single-mode realization in the ordinary boson Fock basis.

    k = 1/4 populates |2n>, k = 3/4 populates |2n+1>; returned vector has
    length 2*n_max + 2.
    """
    single_mode_tag(k)
    z = as_complex(z)
    n = np.arange(n_max + 1)
    m = 2 * n + (0 if k == 0.25 else 1)
    # sqrt(m!)/(2^n n!) z^n (1-|z|^2)^k
    logmag = k * math.log1p(-abs(z) ** 2) + 0.5 * gammaln(m + 1) - n * math.log(2) - gammaln(n + 1)
    vals = np.exp(logmag) * z ** n
    out = np.zeros(2 * n_max + 2, dtype=complex)
    out[m] = vals
    return out


def two_mode_amplitudes(q, z, n_max: int) -> np.ndarray:
    """Amplitudes on |n, n+q>: (1-|z|^2)^((q+1)/2) sqrt((n+q)!/(n! q!)) z^n."""
    real = realization_map(q)
    z = as_complex(z)
    n = np.arange(n_max + 1)
    logmag = 0.5 * (real.q + 1) * math.log1p(-abs(z) ** 2) + 0.5 * (
        gammaln(n + real.q + 1) - gammaln(n + 1) - gammaln(real.q + 1)
    )
    return np.exp(logmag) * z ** n


__all__ = [
    "BoundaryError",
    "KINDS",
    "MixtureState",
    "PhotonStatistics",
    "SuperpositionState",
    "TwoModeRealization",
    "build",
    "check_disk",
    "coherent_amplitude",
    "coherent_amplitudes",
    "coherent_overlap",
    "make_mixture",
    "make_state",
    "overlap_modulus_geodesic",
    "photon_pmf",
    "pure_components",
    "purity",
    "realization_map",
    "single_mode_amplitudes",
    "single_mode_tag",
    "state_overlap",
    "superposition",
    "tail_bound",
    "tail_cutoff",
    "two_mode_amplitudes",
    "two_mode_photon_statistics",
]
