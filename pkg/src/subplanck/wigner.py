"""Closed-form SU(1,1) Wigner functions on the Poincare disk.

The dyad W_{|z2><z1|}(z) = <z1| D(z) P D(z)^+ |z2> is reduced by the
composition law to a single coherent-state overlap. With
z'_j = (z_j - z)/(1 - z_j z*) and parity acting as P|w> = |-w>,

    W = exp(2ik [arg(1 - z1 z*) - arg(1 - z2 z*)]) <z'_1 | -z'_2>.

Everything is done in the log domain so k in the tens or hundreds is safe.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import EPS_BOUNDARY, check_disk
from .states import MixtureState, SuperpositionState, check_k, pure_components

WORKERS_ENV = "SUBPLANCK_WORKERS"


def wigner_dyad(k, z1, z2, z):
    """W_{|z2><z1|}(z), elementwise over broadcast arrays."""
    k = check_k(k)
    z1 = check_disk(z1)
    z2 = check_disk(z2)
    z = check_disk(z)
    zc = np.conj(z)
    d1 = 1 - z1 * zc
    d2 = 1 - z2 * zc
    p1 = (z1 - z) / d1
    p2 = (z2 - z) / d2
    s = 1 - np.abs(z) ** 2
    # 1 - |z'_j|^2 without cancellation near the boundary
    m1 = s * (1 - np.abs(z1) ** 2) / np.abs(d1) ** 2
    m2 = s * (1 - np.abs(z2) ** 2) / np.abs(d2) ** 2
    logov = k * (np.log(m1) + np.log(m2)) - 2 * k * np.log(1 + np.conj(p1) * p2)
    phase = 2 * k * (np.angle(d1) - np.angle(d2))
    return np.exp(logov + 1j * phase)


def wigner_dyad_printed(k, z1, z2, z, parse: str = "corrected"):
    """The printed closed form of the dyad Wigner function.

    ``literal`` keeps the doubled z2 z1* term of the printed denominator;
    ``corrected`` uses the single term that the overlap reduction produces.
    The k-th power is taken factor by factor with principal logarithms.
    """
    k = check_k(k)
    z1, z2, z = (np.asarray(a, dtype=complex) for a in (z1, z2, z))
    zc, z1c, z2c = np.conj(z), np.conj(z1), np.conj(z2)
    a2 = np.abs(z) ** 2
    cross = (2 if parse == "literal" else 1) * z2 * z1c
    if parse not in ("literal", "corrected"):
        raise ValueError(f"unknown parse {parse!r}")
    den = 1 - 2 * z * z1c + cross + a2 - 2 * zc * z2 + a2 * z1c * z2
    logs = (
        2 * np.log((a2 - 1) + 0j)
        + np.log(np.abs(z1) ** 2 - 1 + 0j)
        + np.log(np.abs(z2) ** 2 - 1 + 0j)
        + np.log(z2 * zc - 1)
        + np.log(z1c * z - 1)
        - np.log(z1 * zc - 1)
        - np.log(z2c * z - 1)
        - 2 * np.log(den)
    )
    phase = 2 * k * np.angle((1 - z1 * zc) / (1 - z2 * zc))
    return np.exp(k * logs + 1j * phase)


def wigner_point(state, z):
    """W_rho(z) for a pure superposition or a mixture, elementwise in z."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for weight, s in pure_components(state):
        w = s.weights
        c = s.center_array
        for i in range(c.size):
            for j in range(c.size):
                out += weight * np.conj(w[i]) * w[j] * wigner_dyad(s.k, c[i], c[j], z)
    return out


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def evaluate_rows(func, z: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Apply ``func`` to the masked samples of each grid row.

    Rows are the unit of work, so the result does not depend on how rows are
    distributed across workers.
    """
    out = np.full(z.shape, np.nan + 0j, dtype=complex)

    def row(i):
        m = mask[i]
        return i, (func(z[i, m]) if m.any() else None)

    n = worker_count()
    rows = range(z.shape[0])
    if n == 1:
        results = map(row, rows)
    else:
        with ThreadPoolExecutor(n) as ex:
            results = list(ex.map(row, rows))
    for i, vals in results:
        if vals is not None:
            out[i, mask[i]] = vals
    return out


def grid_points(resolution: int, extent: float):
    """Cell-centred square grid in (x, p); p varies along rows."""
    c = -extent + (np.arange(resolution) + 0.5) * (2 * extent / resolution)
    x, p = np.meshgrid(c, c)
    z = x + 1j * p
    mask = np.abs(z) < 1.0 - EPS_BOUNDARY
    return c, z, mask


@dataclass
class WignerGrid:
    coords: np.ndarray
    values: np.ndarray  # complex, NaN outside the mask
    mask: np.ndarray
    extent: float
    metadata: dict = field(default_factory=dict)

    @property
    def resolution(self) -> int:
        return self.coords.size

    def points(self) -> np.ndarray:
        x, p = np.meshgrid(self.coords, self.coords)
        return x + 1j * p

    def normalized(self) -> "WignerGrid":
        """Copy divided by the value at the disk origin."""
        w0 = self.metadata.get("w_origin")
        meta = dict(self.metadata, normalization="origin")
        return WignerGrid(self.coords, self.values / w0, self.mask, self.extent, meta)

    def max_imag(self) -> float:
        return float(np.abs(self.values[self.mask].imag).max())


def describe(state) -> dict:
    return state.to_dict() if hasattr(state, "to_dict") else {"kind": "custom"}


def wigner_of_state(state, resolution: int = 64, extent: float = 0.95, normalize: bool = False) -> WignerGrid:
    """Sample the Wigner function of ``state`` on a cell-centred square grid."""
    notes = []
    if extent > 1.0:
        msg = f"extent {extent} exceeds the unit disk; samples outside are masked"
        warnings.warn(msg)
        notes.append(msg)
    coords, z, mask = grid_points(resolution, extent)
    vals = evaluate_rows(lambda zz: wigner_point(state, zz), z, mask)
    meta = {
        "state": describe(state),
        "k": state.k,
        "normalization": "raw",
        "w_origin": complex(wigner_point(state, 0.0)),
        "warnings": notes,
    }
    grid = WignerGrid(coords, vals, mask, extent, meta)
    return grid.normalized() if normalize else grid


# --- cat-state interference -------------------------------------------------


def interference_cat_h(k, zeta0, z, form: str = "exact"):
    """Interference term between |zeta0> and |-zeta0>, in the scale where it is 1 at the origin.

    ``exact`` is Re W_{|-z0><z0|}; ``printed`` transcribes the closed form as
    printed; ``corrected`` replaces its final -4 z0^2 z* term by -4 z0^2 z*^2.
    """
    k = check_k(k)
    z = np.asarray(z, dtype=complex)
    if form == "exact":
        return np.real(wigner_dyad(k, zeta0, -zeta0, z))
    if form not in ("printed", "corrected"):
        raise ValueError(f"unknown form {form!r}")
    zc = np.conj(z)
    a2 = np.abs(z) ** 2
    last = -4 * zeta0**2 * (zc**2 if form == "corrected" else zc)
    den = 1 - 2 * (2 * z**2 + 1) * zeta0**2 + zeta0**4 + (zeta0**2 - 1) ** 2 * a2**2 + 2 * z * (zeta0**2 + 1) ** 2 * zc + last
    num = (zeta0**2 - 1) ** 2 * (a2 - 1) ** 2
    theta = (1 - zeta0 * zc) * (zeta0 * z - 1) / ((1 + zeta0 * zc) * (zeta0 * z - 1) + (z + zeta0) * (zeta0 - zc))
    mag = np.exp(k * np.log((num / den) + 0j))
    return np.real(mag * np.cos(2 * k * np.angle(theta)))


def cat_axis_theta(k, zeta0, p):
    """Printed fringe phase along the p axis: 2k atan(4 z0 p / (z0^2 - 1))."""
    return 2 * k * np.arctan(4 * zeta0 * np.asarray(p) / (zeta0**2 - 1))


def cat_axis_theta_exact(k, zeta0, p):
    """Exact fringe phase along the p axis: 2k atan(4 z0 p / ((z0^2 - 1)(1 + p^2)))."""
    p = np.asarray(p, dtype=float)
    return 2 * k * np.arctan(4 * zeta0 * p / ((zeta0**2 - 1) * (1 + p * p)))


def interference_cat_axis(k, zeta0, axis: str, coordinate):
    """On-axis interference of the horizontal cat.

    p_axis: the printed envelope times cos(theta'); x_axis: the exact value
    ((1 - x^2)/(1 + x^2))^(2k), which does not depend on zeta0.
    """
    k = check_k(k)
    u = np.asarray(coordinate, dtype=float)
    if np.any(np.abs(u) >= 1 - EPS_BOUNDARY):
        raise ValueError("coordinate must lie inside the disk")
    if axis == "p_axis":
        a = (zeta0**2 - 1) ** 2
        env = (a * (u * u - 1) ** 2 / (a * (1 + u**4) + 2 * u * u * (zeta0**4 + 6 * zeta0**2 + 1))) ** k
        return env * np.cos(cat_axis_theta(k, zeta0, u))
    if axis == "x_axis":
        return ((1 - u * u) / (1 + u * u)) ** (2 * k)
    raise ValueError(f"unknown axis {axis!r}")


def reference_wigner(k, z):
    """Wigner function of |k,0>: ((1 - |z|^2)/(1 + |z|^2))^(2k)."""
    a2 = np.abs(np.asarray(z)) ** 2
    return ((1 - a2) / (1 + a2)) ** (2 * check_k(k))


def coherent_lobe_printed(k, zeta0, z, sign: int = 1):
    """Half the Wigner function of |sign*zeta0>, closed form on the real-axis family.

    The cross term in the denominator enters with the opposite sign to the
    centre, which is what makes the lobe peak at z = sign*zeta0.
    """
    z = np.asarray(z, dtype=complex)
    a2 = np.abs(z) ** 2
    den = (zeta0**2 + 1) * (a2 + 1) - sign * 2 * zeta0 * (z + np.conj(z)).real
    return 0.5 * ((zeta0**2 - 1) * (a2 - 1) / den) ** (2 * check_k(k))
