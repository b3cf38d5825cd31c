"""Weighted model spaces: volume growth and isoperimetric profiles.

The reference geometries are Euclidean space (kappa = 0) and the round unit
sphere (kappa = 1), carrying a constant weight alpha in (0, 1] that scales all
measures: the asymptotic volume ratio in the flat case, the normalized total
measure in the spherical one.  Geodesic balls realize the isoperimetric
profile, which is what every comparison in :mod:`robinsym.verify` is tested
against.
"""

import math
from dataclasses import dataclass

import numpy as np


class DomainRangeError(ValueError):
    """A radius, volume, or measure level lies outside the model range."""


# Newton loses its footing where the volume profile flattens; switch to plain
# bisection when the target volume is this close (relatively) to full measure.
_ENDPOINT_MARGIN = 1e-6


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def sn_kappa(kappa: int, s):
    """Model warping function: s for kappa=0, sin(s) for kappa=1."""
    if kappa == 0:
        return np.asarray(s, dtype=float) if np.ndim(s) else float(s)
    return np.sin(s)


@dataclass(frozen=True)
class ModelSpace:
    """A weighted simply connected model space.

    Parameters
    ----------
    kappa : int
        Curvature normalization, 0 (Euclidean) or 1 (unit round sphere).
        Other positive curvatures are handled by rescaling to kappa = 1.
    n : int
        Dimension, at least 2.
    alpha : float
        Constant weight in (0, 1].
    """

    kappa: int
    n: int
    alpha: float = 1.0

    def __post_init__(self):
        if self.kappa not in (0, 1):
            raise DomainRangeError(f"kappa must be 0 or 1, got {self.kappa}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise DomainRangeError(f"dimension n must be an integer >= 2, got {self.n}")
        if not (0.0 < self.alpha <= 1.0):
            raise DomainRangeError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def omega_n(self) -> float:
        return unit_ball_volume(self.n)

    @property
    def max_radius(self):
        """Largest admissible ball radius (pi on the sphere, inf when flat)."""
        return math.pi if self.kappa == 1 else math.inf

    @property
    def total_volume(self):
        """Weighted volume of the whole space (inf when flat)."""
        return volume_profile(self, math.pi) if self.kappa == 1 else math.inf


@dataclass(frozen=True)
class GeodesicBall:
    """A geodesic ball in a model space, the symmetrized comparison domain."""

    space: ModelSpace
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0) or not math.isfinite(self.radius):
            raise DomainRangeError(f"ball radius must be positive, got {self.radius}")
        if self.space.kappa == 1 and self.radius > math.pi:
            raise DomainRangeError(
                f"spherical ball radius must be <= pi, got {self.radius}"
            )

    @property
    def weighted_volume(self) -> float:
        return volume_profile(self.space, self.radius)

    @property
    def volume(self) -> float:
        """Un-weighted model volume, weighted_volume / alpha."""
        return self.weighted_volume / self.space.alpha

    @property
    def boundary_area(self) -> float:
        """Un-weighted area of the boundary sphere."""
        return sphere_area(self.space, self.radius)


def sphere_area(space: ModelSpace, r):
    """Un-weighted area n*omega_n*sn_kappa(r)^(n-1) of the radius-r sphere."""
    n = space.n
    return n * space.omega_n * sn_kappa(space.kappa, r) ** (n - 1)


def _check_radius(space, r):
    r = np.asarray(r, dtype=float)
    if np.any(r < -1e-15) or (space.kappa == 1 and np.any(r > math.pi + 1e-12)):
        raise DomainRangeError(
            f"radius must lie in [0, {space.max_radius}] for kappa={space.kappa}"
        )
    return np.clip(r, 0.0, space.max_radius)


def _r_minus_sin_cos_series(r):
    # r - sin(r)cos(r) via series near 0, where the closed form cancels
    # catastrophically.  Equals sum_k (-1)^(k+1) (2r)^(2k+1) / (2*(2k+1)!).
    out = np.zeros_like(r)
    term = (2.0 * r) ** 3 / 12.0
    k = 1
    while np.any(np.abs(term) > 1e-18 * np.abs(out) + 1e-300):
        out = out + term
        k += 1
        term = term * (-1) * (2.0 * r) ** 2 / ((2 * k) * (2 * k + 1))
        if k > 40:
            break
    return out


_SERIES_TERMS = 30


def _sin_power_series_coeffs(m):
    # Maclaurin coefficients c_k of (sin(s)/s)^m in powers of s^2
    base = np.zeros(_SERIES_TERMS)
    fact = 1.0
    for k in range(_SERIES_TERMS):
        if k > 0:
            fact *= (2 * k) * (2 * k + 1)
        base[k] = (-1.0) ** k / fact
    coef = np.zeros(_SERIES_TERMS)
    coef[0] = 1.0
    for _ in range(m):
        coef = np.convolve(coef, base)[:_SERIES_TERMS]
    return coef


def _sin_power_integral(m, r):
    """int_0^r sin(s)^m ds, exact recursion with a series branch near zero.

    The textbook recursion S_m = ((m-1) S_{m-2} - sin^{m-1}(r) cos(r)) / m
    cancels like eps/r^2 as r -> 0, so small radii integrate the Maclaurin
    expansion of sin^m term by term instead.
    """
    r = np.asarray(r, dtype=float)
    small = r < 0.3
    out = np.empty_like(r)
    if np.any(small):
        rs = np.where(small, r, 0.0)
        coef = _sin_power_series_coeffs(m)
        acc = np.zeros_like(rs)
        r2 = rs * rs
        for k in range(_SERIES_TERMS - 1, -1, -1):
            acc = acc * r2 + coef[k] / (m + 1 + 2 * k)
        out[small] = (rs ** (m + 1) * acc)[small]
    if np.any(~small):
        rl = np.where(~small, r, 1.0)
        s_even = rl.copy()                      # S_0
        s_odd = 2.0 * np.sin(0.5 * rl) ** 2     # S_1
        sin_r, cos_r = np.sin(rl), np.cos(rl)
        for mm in range(2, m + 1):
            nxt = ((mm - 1) * (s_even if mm % 2 == 0 else s_odd)
                   - sin_r ** (mm - 1) * cos_r) / mm
            if mm % 2 == 0:
                s_even = nxt
            else:
                s_odd = nxt
        s_m = s_even if m % 2 == 0 else s_odd
        out[~small] = s_m[~small]
    return out


def volume_profile(space: ModelSpace, r):
    """Weighted volume I(r) of the geodesic ball of radius r.

    Closed forms are used for kappa=0 (all n) and kappa=1 with n in {2, 3};
    other spherical dimensions evaluate the sine-power integral exactly by
    recursion (series-stabilized near zero), keeping full precision so the
    profile can be inverted to relative 1e-12.
    """
    scalar = np.ndim(r) == 0
    r = _check_radius(space, r)
    n, a = space.n, space.alpha
    if space.kappa == 0:
        out = a * space.omega_n * r**n
    elif n == 2:
        # 2*pi*a*(1 - cos r), written to stay accurate near r = 0
        out = 4.0 * math.pi * a * np.sin(0.5 * r) ** 2
    elif n == 3:
        small = r < 0.2
        closed = r - np.sin(r) * np.cos(r)
        series = _r_minus_sin_cos_series(np.where(small, r, 0.0))
        out = 2.0 * math.pi * a * np.where(small, series, closed)
    else:
        out = a * n * space.omega_n * _sin_power_integral(n - 1, r)
    return float(out) if scalar else out


def volume_profile_derivative(space: ModelSpace, r, order: int = 1):
    """First or second radial derivative of the volume profile."""
    scalar = np.ndim(r) == 0
    r = _check_radius(space, r)
    n, a = space.n, space.alpha
    coef = a * n * space.omega_n
    s = sn_kappa(space.kappa, r)
    if order == 1:
        out = coef * s ** (n - 1)
    elif order == 2:
        ds = np.ones_like(r) if space.kappa == 0 else np.cos(r)
        if n == 2:
            out = coef * ds
        else:
            out = coef * (n - 1) * s ** (n - 2) * ds
    else:
        raise ValueError(f"order must be 1 or 2, got {order}")
    return float(out) if scalar else out


def radius_for_volume(space: ModelSpace, vol: float) -> float:
    """Radius of the geodesic ball with weighted volume ``vol``.

    Inverts the volume profile.  On the sphere, a guarded Newton iteration is
    used (bisection steps whenever Newton leaves the bracket), switching to
    pure bisection when vol sits within a relative 1e-6 of full measure, where
    the profile derivative vanishes.
    """
    if not (vol >= 0.0) or not math.isfinite(vol):
        raise DomainRangeError(f"volume must be non-negative and finite, got {vol}")
    if vol == 0.0:
        return 0.0
    n, a = space.n, space.alpha
    if space.kappa == 0:
        return (vol / (a * space.omega_n)) ** (1.0 / n)

    total = volume_profile(space, math.pi)
    if vol > total * (1.0 + 1e-12):
        raise DomainRangeError(
            f"volume {vol} exceeds the total spherical measure {total}"
        )
    vol = min(vol, total)
    if n == 2:
        # vol = 4*pi*a*sin(r/2)^2
        return 2.0 * math.asin(min(1.0, math.sqrt(vol / (4.0 * math.pi * a))))

    if vol >= total * (1.0 - 4e-16):
        return math.pi
    lo, hi = 0.0, math.pi
    if total - vol < _ENDPOINT_MARGIN * total:
        # <= so that float-plateau values near full measure resolve upward
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if volume_profile(space, mid) <= vol:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        return 0.5 * (lo + hi)

    r = math.pi * (vol / total) ** (1.0 / n)
    for _ in range(100):
        f = volume_profile(space, r) - vol
        if f > 0.0:
            hi = r
        elif f < 0.0:
            lo = r
        else:
            return r
        df = volume_profile_derivative(space, r)
        step_ok = df > 0.0
        if step_ok:
            r_new = r - f / df
            step_ok = lo < r_new < hi
        if not step_ok:
            r_new = 0.5 * (lo + hi)
        if abs(r_new - r) < 1e-16 * max(1.0, r):
            return r_new
        r = r_new
    return r


def radii_for_volumes(space: ModelSpace, vols) -> np.ndarray:
    """Vector form of :func:`radius_for_volume`."""
    return np.array([radius_for_volume(space, float(v)) for v in np.atleast_1d(vols)])


def isoperimetric_profile(space: ModelSpace, l):
    """Weighted boundary measure G(l) of the ball enclosing weighted volume l.

    G is the derivative of the volume profile composed with its inverse; for
    kappa=0 it reduces to the closed form n*(omega_n*alpha)^(1/n) * l^((n-1)/n).
    """
    scalar = np.ndim(l) == 0
    l = np.asarray(l, dtype=float)
    if np.any(l < -1e-15):
        raise DomainRangeError("measure level must be nonnegative")
    l = np.maximum(l, 0.0)
    n, a = space.n, space.alpha
    if space.kappa == 0:
        out = n * (space.omega_n * a) ** (1.0 / n) * l ** ((n - 1.0) / n)
    else:
        total = volume_profile(space, math.pi)
        if np.any(l > total * (1.0 + 1e-12)):
            raise DomainRangeError(
                f"measure level exceeds the total spherical measure {total}"
            )
        flat = np.atleast_1d(np.minimum(l, total))
        vals = np.empty_like(flat)
        for i, li in enumerate(flat):
            if li == 0.0 or li == total:
                vals[i] = 0.0
            else:
                r = radius_for_volume(space, float(li))
                vals[i] = volume_profile_derivative(space, r)
        out = vals.reshape(np.shape(l))
    return float(out) if scalar else out


def profile_convexity_margin(space: ModelSpace, p: float, r):
    """Margin I'(r)^2 - 2*p*I(r)*I''(r) of the volume profile.

    Nonnegativity of this margin over (0, pi) is what makes the map
    l -> l^(1/p) * G(l)^(-2) monotone on the sphere; it is exposed so the
    verification layer can sample it directly.
    """
    if p <= 0.0:
        raise DomainRangeError(f"exponent p must be positive, got {p}")
    i0 = volume_profile(space, r)
    i1 = volume_profile_derivative(space, r, order=1)
    i2 = volume_profile_derivative(space, r, order=2)
    return i1**2 - 2.0 * p * i0 * i2
