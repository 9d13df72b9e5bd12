"""Zeros, feature extents and log-log scaling fits."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .sensitivity import bisect, direction_sweep
from .states import build, check_k
from .wigner import cat_axis_theta, cat_axis_theta_exact, interference_cat_axis, wigner_point

K_SET = (6, 10, 14, 20, 28, 40)


class ExtentError(ValueError):
    """The requested feature was not found inside the search range."""


class FitError(ValueError):
    pass


def fringe_samples(k, zeta0, lo: float, hi: float, per_period: int = 8) -> int:
    """Samples needed for ``per_period`` points per fringe period on [lo, hi].

    The fringe phase 2k atan(c p) with c = 4 z0/(1 - z0^2) changes fastest at
    p = 0, where one period spans pi/(k c).
    """
    c = 4 * zeta0 / (1 - zeta0**2)
    period = math.pi / (check_k(k) * c)
    return int(math.ceil(per_period * (hi - lo) / period)) + 1


def find_axis_zeros(profile, lo: float, hi: float, samples: int, tol: float = 1e-10) -> list[float]:
    """All sign changes of a 1-D ``profile`` on [lo, hi], refined by bisection."""
    u = np.linspace(lo, hi, samples)
    v = np.asarray(profile(u), dtype=float)
    idx = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    exact = list(u[np.nonzero(v == 0)[0]])
    f = lambda t: float(profile(np.array([t]))[0])
    roots = [bisect(f, u[i], u[i + 1], tol) for i in idx]
    return sorted(roots + exact)


def predicted_axis_zeros(k, zeta0, m) -> float:
    """|p| where cos(theta') vanishes: (1 - z0^2)/(4 z0) tan((2m+1) pi/(4k))."""
    arg = (2 * m + 1) * math.pi / (4 * check_k(k))
    if arg >= math.pi / 2:
        return math.nan
    return (1 - zeta0**2) / (4 * zeta0) * math.tan(arg)


def exact_axis_zeros(k, zeta0, m) -> float:
    """|p| of the m-th zero of the exact p-axis interference.

    Solves 4 z0 p / ((1 - z0^2)(1 + p^2)) = tan((2m+1) pi/(4k)) for the root
    inside the disk; NaN once the phase can no longer reach that value.
    """
    arg = (2 * m + 1) * math.pi / (4 * check_k(k))
    if arg >= math.pi / 2:
        return math.nan
    t = math.tan(arg) * (1 - zeta0**2)
    disc = 4 * zeta0**2 - t * t
    if disc < 0:
        return math.nan
    return (2 * zeta0 - math.sqrt(disc)) / t


def cat_p_profile(k, zeta0, form: str = "printed"):
    """p-axis profile of the horizontal cat: printed interference or full exact Wigner slice."""
    if form == "printed":
        return lambda p: interference_cat_axis(k, zeta0, "p_axis", p)
    if form == "exact":
        s = build("cat_h", k, zeta0)
        w0 = float(wigner_point(s, 0.0).real)
        return lambda p: wigner_point(s, 1j * np.asarray(p)).real / w0
    raise ValueError(f"unknown form {form!r}")


def state_profile(state, direction: float):
    """Normalized Wigner slice r -> W(r e^{i direction}) / W(0)."""
    u = complex(math.cos(direction), math.sin(direction))
    w0 = float(wigner_point(state, 0.0).real)
    return lambda r: wigner_point(state, np.asarray(r) * u).real / w0


@dataclass(frozen=True)
class Extent:
    value: float
    how: str  # "level", "zero" or "vertex"


def _first_below(profile, level, r_max, samples):
    r = np.linspace(0.0, r_max, samples)
    v = np.asarray(profile(r)) - level
    idx = np.nonzero(v[1:] * v[:-1] < 0)[0]
    return r, v, idx


def feature_extent(profile, feature: str, r_max: float = 0.5, samples: int = 4001, tol: float = 1e-12) -> Extent:
    """Extent of a normalized radial profile (profile(0) = 1).

    lobe_halfwidth: first crossing of 1/e. central_fringe_halfwidth: first
    zero. tile_halfwidth: first zero, or, when the profile only touches down
    without changing sign (a tile vertex), the first local minimum.
    """
    f = lambda t: float(np.asarray(profile(np.array([t])))[0])
    if feature == "lobe_halfwidth":
        r, v, idx = _first_below(profile, math.exp(-1), r_max, samples)
        if not idx.size:
            raise ExtentError(f"profile stays above 1/e up to r = {r_max}")
        i = idx[0]
        return Extent(bisect(lambda t: f(t) - math.exp(-1), r[i], r[i + 1], tol), "level")
    if feature not in ("central_fringe_halfwidth", "tile_halfwidth"):
        raise ValueError(f"unknown feature {feature!r}")
    r, v, idx = _first_below(profile, 0.0, r_max, samples)
    if feature == "tile_halfwidth":
        # a local minimum before the first zero marks a vertex the profile only touches
        dv = np.diff(v)
        mins = np.nonzero((dv[:-1] < 0) & (dv[1:] >= 0))[0] + 1
        first_zero = idx[0] if idx.size else len(r)
        if mins.size and mins[0] < first_zero:
            i = mins[0]
            res = minimize_scalar(f, bracket=(r[i - 1], r[i], r[i + 1]), tol=tol)
            return Extent(float(res.x), "vertex")
    if not idx.size:
        raise ExtentError(f"no zero found up to r = {r_max}")
    i = idx[0]
    return Extent(bisect(f, r[i], r[i + 1], tol), "zero")


@dataclass(frozen=True)
class ScalingFit:
    k_values: tuple
    feature_values: tuple
    exponent: float
    intercept: float
    r_squared: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["k_values"] = list(self.k_values)
        d["feature_values"] = list(self.feature_values)
        return d


def fit_scaling(k_values, values) -> ScalingFit:
    """Least-squares line through (log k, log value)."""
    k = np.asarray(k_values, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(set(k.tolist())) < 5:
        raise FitError("need at least five distinct k values")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise FitError("feature values must be finite and positive")
    x, y = np.log(k), np.log(v)
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(tuple(k.tolist()), tuple(v.tolist()), float(slope), float(icept), r2)


# --- measurement procedures ----------------------------------------------------


def lobe_halfwidth(k) -> float:
    return feature_extent(state_profile(build("reference", k), 0.0), "lobe_halfwidth").value


def cat_fringe_halfwidth(k, zeta0: float = 0.8) -> float:
    prof = cat_p_profile(k, zeta0, "exact")
    n = fringe_samples(k, zeta0, 0.0, 0.2)
    return feature_extent(prof, "central_fringe_halfwidth", r_max=0.2, samples=n).value


def compass_tile_halfwidth(k, direction: str = "axis", zeta0: float = 0.8) -> Extent:
    angle = 0.0 if direction == "axis" else math.pi / 4
    prof = state_profile(build("compass", k, zeta0), angle)
    n = fringe_samples(k, zeta0, 0.0, 0.2)
    return feature_extent(prof, "tile_halfwidth", r_max=0.2, samples=n)


def compass_detectable(k, zeta0: float = 0.8) -> float:
    """Best-direction smallest detectable displacement of the compass state."""
    radii = [d.radius for d in direction_sweep(build("compass", k, zeta0)) if d.detected]
    return min(radii)


FEATURES = {
    "lobe": lobe_halfwidth,
    "fringe": cat_fringe_halfwidth,
    "tile_axis": lambda k: compass_tile_halfwidth(k, "axis").value,
    "tile_diagonal": lambda k: compass_tile_halfwidth(k, "diagonal").value,
    "tile_area_axis": lambda k: compass_tile_halfwidth(k, "axis").value ** 2,
    "tile_area_diagonal": lambda k: compass_tile_halfwidth(k, "diagonal").value ** 2,
    "compass_detectable": compass_detectable,
}

TARGETS = {
    "lobe": (-0.5, 0.05),
    "fringe": (-1.0, 0.05),
    "tile_axis": (-1.0, 0.05),
    "tile_diagonal": (-1.0, 0.05),
    "tile_area_axis": (-2.0, 0.1),
    "tile_area_diagonal": (-2.0, 0.1),
    "compass_detectable": (-1.0, 0.1),
}


def scaling_study(feature: str, k_values=K_SET) -> ScalingFit:
    if feature not in FEATURES:
        raise ValueError(f"unknown feature {feature!r}; choose from {sorted(FEATURES)}")
    return fit_scaling(k_values, [FEATURES[feature](k) for k in k_values])


def fringe_phase_gap(k, zeta0, p) -> np.ndarray:
    """Difference between the printed and the exact p-axis fringe phases."""
    return cat_axis_theta(k, zeta0, p) - cat_axis_theta_exact(k, zeta0, p)
