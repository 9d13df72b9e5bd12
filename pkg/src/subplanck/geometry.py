"""Poincare disk and hyperboloid coordinates, and the SU(1,1) composition law."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

EPS_BOUNDARY = 1e-9


class BoundaryError(ValueError):
    """A point sits on or outside the disk boundary."""


@dataclass(frozen=True)
class DiskPoint:
    """A point zeta = x + i p of the open unit disk."""

    re: float
    im: float

    def __post_init__(self):
        r = math.hypot(self.re, self.im)
        if not r < 1.0 - EPS_BOUNDARY:
            raise BoundaryError(f"|zeta| = {r!r} is not below 1 - {EPS_BOUNDARY:g}")

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self):
        return math.hypot(self.re, self.im)

    def __complex__(self):
        return self.z


@dataclass(frozen=True)
class HyperboloidPoint:
    """Hyperbolic polar coordinates (tau, phi) on the upper sheet."""

    tau: float
    phi: float

    @property
    def xi(self) -> complex:
        return 0.5 * self.tau * complex(math.cos(self.phi), math.sin(self.phi))


@dataclass(frozen=True)
class CompositionResult:
    zeta3: DiskPoint
    phase: float


PointLike = Union[DiskPoint, complex, float]


def as_complex(z: PointLike) -> complex:
    """Validate a scalar disk point and return it as a Python complex."""
    if isinstance(z, DiskPoint):
        return z.z
    return DiskPoint.from_complex(z).z


def check_disk(z) -> np.ndarray:
    """Vectorised boundary check; returns ``z`` as a complex array."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    if z.size and not np.all(r < 1.0 - EPS_BOUNDARY):
        raise BoundaryError(f"|zeta| = {r.max()!r} is not below 1 - {EPS_BOUNDARY:g}")
    return z


def disk_to_hyperboloid(z: PointLike) -> HyperboloidPoint:
    z = as_complex(z)
    r = abs(z)
    tau = 2.0 * math.atanh(r)
    phi = 0.0 if r == 0.0 else math.atan2(z.imag, z.real) % (2 * math.pi)
    return HyperboloidPoint(tau, phi)


def hyperboloid_to_disk(h: HyperboloidPoint) -> DiskPoint:
    r = math.tanh(0.5 * h.tau)
    return DiskPoint(r * math.cos(h.phi), r * math.sin(h.phi))


def bloch_vector(h: HyperboloidPoint) -> tuple[float, float, float]:
    """Hyperbolic Bloch vector (n0, n1, n2) with n0^2 - n1^2 - n2^2 = 1."""
    s = math.sinh(h.tau)
    return math.cosh(h.tau), s * math.cos(h.phi), s * math.sin(h.phi)


def hyperbolic_distance(z1: PointLike, z2: PointLike) -> float:
    """Geodesic distance chi between two disk points (cosh chi = n1 . n2)."""
    a, b = as_complex(z1), as_complex(z2)
    d = abs((a - b) / (1 - a.conjugate() * b))
    return 2.0 * math.atanh(d)


def compose_displacements(z1: PointLike, z2: PointLike, order: str = "right_phase") -> CompositionResult:
    """Compose two SU(1,1) displacements.

    ``right_phase``: D(z1) D(z2) = D(z3) exp(i phi K0), z3 = (z1+z2)/(1+z1* z2).
    ``left_phase``:  D(z1) D(z2) = exp(-i phi K0) D(z3), z3 = (z1+z2)/(1+z1 z2*).
    In both cases phi = -2 arg(denominator), principal branch.
    """
    a, b = as_complex(z1), as_complex(z2)
    if order == "right_phase":
        den = 1 + a.conjugate() * b
    elif order == "left_phase":
        den = 1 + a * b.conjugate()
    else:
        raise ValueError(f"unknown order {order!r}")
    z3 = (a + b) / den
    if not abs(z3) < 1.0 - EPS_BOUNDARY:
        raise BoundaryError(f"composed point has |zeta3| = {abs(z3)!r}")
    return CompositionResult(DiskPoint.from_complex(z3), -2.0 * math.atan2(den.imag, den.real))


def su11_matrix(z: PointLike) -> np.ndarray:
    """2x2 matrix of D(z) in the representation K0 = s3/2, K1,2 = i s1,2/2."""
    z = as_complex(z)
    return np.array([[1.0, -z], [-z.conjugate(), 1.0]]) / math.sqrt(1.0 - abs(z) ** 2)


def phase_matrix(phi: float) -> np.ndarray:
    """exp(i phi K0) in the same 2x2 representation."""
    return np.diag([np.exp(0.5j * phi), np.exp(-0.5j * phi)])


def compose_via_matrix(z1: PointLike, z2: PointLike, order: str = "right_phase") -> tuple[complex, float]:
    """Extract (z3, phi) from the 2x2 product D(z1) D(z2)."""
    m = su11_matrix(z1) @ su11_matrix(z2)
    if order == "right_phase":
        # D(z3) exp(i phi K0): column scaling, M00 = e^{i phi/2}/sqrt(1-|z3|^2)
        return complex(-m[0, 1] / m[1, 1]), 2.0 * float(np.angle(m[0, 0]))
    if order == "left_phase":
        # exp(-i phi K0) D(z3): row scaling, M00 = e^{-i phi/2}/sqrt(1-|z3|^2)
        return complex(-m[0, 1] / m[0, 0]), -2.0 * float(np.angle(m[0, 0]))
    raise ValueError(f"unknown order {order!r}")


def mobius_shift(zj, z):
    """(zj - z)/(1 - zj z*): the image of zj after undoing a displacement by z."""
    return (zj - z) / (1 - zj * np.conj(z))
