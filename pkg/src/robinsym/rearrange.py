"""Distribution functions, rearrangements, and Lorentz norms.

For a piecewise-linear field on a measured mesh, the superlevel-set measure
mu(t) = |{|h| > t}|_g is piecewise quadratic in t: on each triangle, with
sorted vertex values a <= b <= c, the superlevel area fraction is

    1                                   t < a
    1 - (t-a)^2 / ((b-a)(c-a))          a <= t < b
    (c-t)^2 / ((c-b)(c-a))              b <= t < c
    0                                   t >= c

The module assembles these exactly into global per-interval quadratic
coefficients between sorted breakpoints (the distinct vertex magnitudes),
with the per-triangle density frozen at the centroid.  Everything downstream
— the decreasing rearrangement, its exact running integral, Schwarz
symmetrization onto model-space balls, and Lorentz norms — evaluates that
piecewise representation rather than rescanning the mesh.
"""

import math
from dataclasses import dataclass

import numpy as np

from .mesh import ScalarField
from .model_geometry import (
    GeodesicBall,
    ModelSpace,
    radii_for_volumes,
    radius_for_volume,
    volume_profile,
)
from .radial import RadialProfile

_VALUE_MERGE_TOL = 1e-14


class RearrangeDomainError(ValueError):
    """Rearrangement queried outside [0, total measure]."""


class SphereOverflowError(ValueError):
    """Total measure exceeds the round sphere; no ball of that volume exists."""


class MeshMismatchError(ValueError):
    """Two fields that must share a mesh do not."""


class LorentzDivergenceError(ArithmeticError):
    """The Lorentz integral failed to produce a finite value."""


@dataclass(frozen=True)
class LorentzParams:
    """Exponent pair (p, q); q = math.inf selects the weak (sup) form."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0.0) or math.isnan(self.p) or math.isinf(self.p):
            raise ValueError(f"p must be a positive real, got {self.p}")
        if not (self.q > 0.0) or math.isnan(self.q):
            raise ValueError(f"q must be positive or inf, got {self.q}")


class DistributionData:
    """Piecewise-quadratic superlevel measure mu(t) of a nonnegative quantity.

    Slot j of the coefficient arrays covers [t_{j-1}, t_j) between the sorted
    breakpoints (t_{-1} = -inf, t_0 = 0); mu is right-continuous, equal to the
    total measure for t < 0 and zero at and above the largest breakpoint.
    """

    def __init__(self, breaks, coef_a, coef_b, coef_c, total):
        self._breaks = np.ascontiguousarray(breaks, dtype=float)
        self._A = np.ascontiguousarray(coef_a, dtype=float)
        self._B = np.ascontiguousarray(coef_b, dtype=float)
        self._C = np.ascontiguousarray(coef_c, dtype=float)
        self.total = float(total)
        K = len(self._breaks)
        if K < 1 or self._breaks[0] != 0.0:
            raise ValueError("breakpoints must start at 0")
        if np.any(np.diff(self._breaks) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if self._A.shape != (K + 1,) or self._B.shape != (K + 1,) or self._C.shape != (K + 1,):
            raise ValueError("coefficient arrays must have len(breaks)+1 slots")

    # -- construction -------------------------------------------------------

    @staticmethod
    def from_field(field: ScalarField) -> "DistributionData":
        mesh = field.mesh
        weights = mesh.chart_areas() * mesh.centroid_density()
        total = float(np.sum(weights))
        tri_vals = field.values[mesh.triangles]
        # |h| > t for t >= 0 splits into {h > t} and {-h > t}, disjoint
        triples = np.vstack([np.sort(tri_vals, axis=1), np.sort(-tri_vals, axis=1)])
        w = np.concatenate([weights, weights])
        keep = triples[:, 2] > 0.0
        triples, w = triples[keep], w[keep]

        scale = float(np.max(np.abs(tri_vals))) if tri_vals.size else 1.0
        tol = _VALUE_MERGE_TOL * max(scale, 1.0)
        pos = triples[triples > 0.0]
        raw = np.unique(np.concatenate([[0.0], pos]))
        breaks = raw[np.concatenate([[True], np.diff(raw) > tol])]

        # snap the positive values onto the merged breakpoints
        idx = np.clip(np.searchsorted(breaks, triples), 1, len(breaks) - 1)
        lower, upper = breaks[idx - 1], breaks[idx]
        snapped = np.where(np.abs(triples - lower) <= np.abs(upper - triples), lower, upper)
        triples = np.where(triples > 0.0, snapped, triples)

        K = len(breaks)
        dA = np.zeros(K + 2)
        dB = np.zeros(K + 2)
        dC = np.zeros(K + 2)
        a, b, c = triples[:, 0], triples[:, 1], triples[:, 2]

        def slot_of(values):
            # slot whose left edge is `values` (exact breakpoint members)
            return np.searchsorted(breaks, values) + 1

        # constant piece w on [0, a) for a > 0
        mask = a > 0.0
        if np.any(mask):
            end = slot_of(a[mask])
            np.add.at(dA, np.ones(mask.sum(), dtype=int), w[mask])
            np.add.at(dA, end, -w[mask])

        # w * (1 - (t-a)^2/D1) on [max(a,0), b)
        mask = b > np.maximum(a, 0.0)
        if np.any(mask):
            am, bm, cm, wm = a[mask], b[mask], c[mask], w[mask]
            d1 = (bm - am) * (cm - am)
            start = slot_of(np.maximum(am, 0.0))
            end = slot_of(bm)
            ca = wm - wm * am**2 / d1
            cb = 2.0 * wm * am / d1
            cc = -wm / d1
            np.add.at(dA, start, ca)
            np.add.at(dA, end, -ca)
            np.add.at(dB, start, cb)
            np.add.at(dB, end, -cb)
            np.add.at(dC, start, cc)
            np.add.at(dC, end, -cc)

        # w * (c-t)^2/D2 on [max(b,0), c)
        mask = c > np.maximum(b, 0.0)
        if np.any(mask):
            am, bm, cm, wm = a[mask], b[mask], c[mask], w[mask]
            d2 = (cm - bm) * (cm - am)
            start = slot_of(np.maximum(bm, 0.0))
            end = slot_of(cm)
            ca = wm * cm**2 / d2
            cb = -2.0 * wm * cm / d2
            cc = wm / d2
            np.add.at(dA, start, ca)
            np.add.at(dA, end, -ca)
            np.add.at(dB, start, cb)
            np.add.at(dB, end, -cb)
            np.add.at(dC, start, cc)
            np.add.at(dC, end, -cc)

        A = np.cumsum(dA)[: K + 1]
        B = np.cumsum(dB)[: K + 1]
        C = np.cumsum(dC)[: K + 1]
        A[0], B[0], C[0] = total, 0.0, 0.0  # mu = total below t = 0
        A[K], B[K], C[K] = 0.0, 0.0, 0.0  # and 0 at/above the max value
        return DistributionData(breaks, A, B, C, total)

    @staticmethod
    def from_monotone_pairs(values_desc, measures_asc) -> "DistributionData":
        """Threshold/measure pairs of a sampled non-increasing profile.

        mu is interpolated linearly between the sampled levels and jumps
        across plateaus, exactly reproducing the pairs at the sample levels.
        """
        v = np.asarray(values_desc, dtype=float)
        m = np.asarray(measures_asc, dtype=float)
        if v.shape != m.shape or v.ndim != 1 or len(v) < 2:
            raise ValueError("need matching 1-D threshold and measure arrays")
        scale = float(np.max(np.abs(v))) or 1.0
        if float(np.max(np.diff(v))) > 1e-12 * scale:
            raise ValueError("thresholds must be non-increasing")
        if float(np.min(np.diff(m))) < -1e-12 * max(float(m[-1]), 1.0):
            raise ValueError("measures must be non-decreasing")
        if float(np.min(v)) < -1e-12 * scale:
            raise ValueError("thresholds must be non-negative")
        v = np.maximum(v, 0.0)
        total = float(m[-1])

        uv, first_idx = np.unique(v, return_index=True)  # ascending values
        _, last_rev = np.unique(v[::-1], return_index=True)
        last_idx = len(v) - 1 - last_rev
        mu_right = m[first_idx]  # smallest radius at that level
        mu_left = m[last_idx]  # largest radius at that level

        if uv[0] > 0.0:
            breaks = np.concatenate([[0.0], uv])
            mu_right = np.concatenate([[total], mu_right])
            mu_left = np.concatenate([[total], mu_left])
        else:
            breaks = uv
        K = len(breaks)
        A = np.zeros(K + 1)
        B = np.zeros(K + 1)
        C = np.zeros(K + 1)
        A[0] = total
        t0, t1 = breaks[:-1], breaks[1:]
        left_val = mu_right[:-1]  # mu at the slot's left edge
        right_val = mu_left[1:]  # mu approaching the slot's right edge
        slope = (right_val - left_val) / (t1 - t0)
        B[1:K] = slope
        A[1:K] = left_val - slope * t0
        return DistributionData(breaks, A, B, C, total)

    # -- evaluation ---------------------------------------------------------

    @property
    def breakpoints(self) -> np.ndarray:
        """Threshold values, strictly decreasing."""
        return self._breaks[::-1].copy()

    @property
    def measures(self) -> np.ndarray:
        """mu at the breakpoints (right-continuous values)."""
        return self.evaluate(self.breakpoints)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self._breaks, t, side="right")
        out = self._A[idx] + t * (self._B[idx] + t * self._C[idx])
        return out if out.ndim else float(out)

    def derivative(self, t):
        """Within-interval derivative mu'(t) (right version at breakpoints)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self._breaks, t, side="right")
        out = self._B[idx] + 2.0 * t * self._C[idx]
        return out if out.ndim else float(out)

    def _interval_integrals(self):
        # exact integral of mu over each finite slot [t_{j-1}, t_j)
        a, b = self._breaks[:-1], self._breaks[1:]
        j = np.arange(1, len(self._breaks))
        P = lambda x: x * (self._A[j] + x * (self._B[j] / 2.0 + x * self._C[j] / 3.0))
        return P(b) - P(a)

    def tail_integral(self, t):
        """Exact integral of mu over [max(t, 0), infinity)."""
        t = np.asarray(t, dtype=float)
        seg = self._interval_integrals()
        suffix = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        idx = np.searchsorted(self._breaks, t, side="right")
        j = np.clip(idx, 1, len(self._breaks) - 1)
        tc = np.clip(t, self._breaks[j - 1], self._breaks[j])
        P = lambda x: x * (self._A[j] + x * (self._B[j] / 2.0 + x * self._C[j] / 3.0))
        partial = P(self._breaks[j]) - P(tc)
        out = np.where(idx >= len(self._breaks), 0.0,
                       np.where(idx == 0, suffix[0], partial + suffix[j]))
        return out if out.ndim else float(out)

    def moment(self, exponent_t: float, power_mu: int) -> float:
        """Exact integral of t^(exponent_t) mu(t)^(power_mu) over t >= 0."""
        if power_mu not in (1, 2):
            raise ValueError("exact moments support mu powers 1 and 2 only")
        a, b = self._breaks[:-1], self._breaks[1:]
        j = np.arange(1, len(self._breaks))
        A, B, C = self._A[j], self._B[j], self._C[j]
        if power_mu == 1:
            coefs = [A, B, C]
        else:
            coefs = [A * A, 2 * A * B, B * B + 2 * A * C, 2 * B * C, C * C]
        out = 0.0
        for k, ck in enumerate(coefs):
            expo = exponent_t + k + 1.0
            out += float(np.sum(ck * (b**expo - a**expo) / expo))
        return out

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,mu\n")
            for t, m in zip(self.breakpoints, self.measures):
                fh.write(f"{float(t)!r},{float(m)!r}\n")


def distribution_function(field: ScalarField) -> DistributionData:
    """Exact distribution function of |field| on its measured mesh."""
    return DistributionData.from_field(field)


# ---------------------------------------------------------------------------
# decreasing rearrangement


class DecreasingRearrangement:
    """Generalized inverse h*(s) = inf{t >= 0 : mu(t) <= s} on [0, total]."""

    def __init__(self, dist: DistributionData):
        self.dist = dist
        self.total = dist.total
        br = dist._breaks
        K = len(br)
        j = np.arange(K)
        self._mu_left = dist._A[j] + br * (dist._B[j] + br * dist._C[j])
        self._mu_right = dist._A[j + 1] + br * (dist._B[j + 1] + br * dist._C[j + 1])

    @property
    def sup_value(self) -> float:
        """h*(0), the essential sup of the field magnitude."""
        return float(self.dist._breaks[-1]) if self._mu_right[0] > 0.0 else 0.0

    def kinks(self) -> np.ndarray:
        """Measure values where h* changes analytic form, ascending in s."""
        s = np.concatenate([self._mu_left, self._mu_right, [0.0, self.total]])
        s = np.unique(np.clip(s, 0.0, self.total))
        return s

    def _invert(self, s, strict):
        dist = self.dist
        br = dist._breaks
        K = len(br)
        s = np.asarray(s, dtype=float)
        side = "left" if strict else "right"
        count = np.searchsorted(self._mu_right[::-1], s, side=side)
        k = K - count
        k_c = np.clip(k, 1, K - 1)

        A = dist._A[k_c] - s
        B = dist._B[k_c]
        C = dist._C[k_c]
        left_ok = self._mu_left[k_c] < s if strict else self._mu_left[k_c] <= s
        disc = np.sqrt(np.maximum(B * B - 4.0 * C * A, 0.0))
        denom = -B + disc
        safe = np.abs(denom) > 0.0
        root = np.where(safe, 2.0 * A / np.where(safe, denom, 1.0), br[k_c])
        root = np.clip(root, br[k_c - 1], br[k_c])
        out = np.where(left_ok, root, br[k_c])
        out = np.where(k == 0, 0.0, out)
        out = np.where(k >= K, br[-1], out)
        return out if out.ndim else float(out)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        slack = 1e-12 * max(self.total, 1.0)
        if np.any(s < -slack) or np.any(s > self.total + slack):
            raise RearrangeDomainError(
                f"rearrangement argument outside [0, {self.total!r}]"
            )
        return self._invert(np.clip(s, 0.0, self.total), strict=False)

    def left_limit(self, s):
        """lim_{x -> s^-} h*(x); at s = total this is the essential infimum."""
        s = np.asarray(s, dtype=float)
        slack = 1e-12 * max(self.total, 1.0)
        if np.any(s < -slack) or np.any(s > self.total + slack):
            raise RearrangeDomainError(
                f"rearrangement argument outside [0, {self.total!r}]"
            )
        return self._invert(np.clip(s, 0.0, self.total), strict=True)

    def cumulative(self, w):
        """Exact integral of h* over [0, w] (layer-cake identity)."""
        w = np.asarray(w, dtype=float)
        tau = self.__call__(w)
        out = np.clip(w, 0.0, self.total) * tau + self.dist.tail_integral(tau)
        return out if out.ndim else float(out)


def decreasing_rearrangement(dist: DistributionData) -> DecreasingRearrangement:
    return DecreasingRearrangement(dist)


def schwarz_rearrangement(dist: DistributionData, space: ModelSpace) -> RadialProfile:
    """Radial non-increasing representative on the ball of equal measure.

    The grid contains the exact radii of every rearrangement kink (so the
    threshold-measure relation holds to roundoff at sampled levels) plus a
    uniform backbone; the boundary value is the essential infimum.
    """
    total = dist.total
    if space.kappa == 1 and total > space.total_volume * (1.0 + 1e-12):
        raise SphereOverflowError(
            f"measure {total!r} exceeds the sphere volume {space.total_volume!r}"
        )
    R = radius_for_volume(space, min(total, space.total_volume))
    rearr = decreasing_rearrangement(dist)

    kink_radii = radii_for_volumes(space, rearr.kinks())
    grid = np.unique(np.concatenate([np.linspace(0.0, R, 257), kink_radii]))
    grid = np.clip(grid, 0.0, R)
    keep = np.concatenate([[True], np.diff(grid) > 1e-13 * max(R, 1.0)])
    grid = grid[keep]
    grid[-1] = R

    s_grid = np.minimum(volume_profile(space, grid), total)
    values = rearr(s_grid)
    values[-1] = rearr.left_limit(total)
    values = np.maximum.accumulate(values[::-1])[::-1]  # roundoff-proof monotone
    return RadialProfile(ball=GeodesicBall(space=space, radius=R),
                         grid=grid, values=values)


# ---------------------------------------------------------------------------
# Lorentz norms


_GL16 = np.polynomial.legendre.leggauss(16)
_GL32 = np.polynomial.legendre.leggauss(32)


def _gl(f, a, b, rule):
    x, w = rule
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.sum(w * f(mid + half * x)))


def _adaptive_gl(f, a, b, tol, depth=0):
    coarse = _gl(f, a, b, _GL16)
    fine = _gl(f, a, b, _GL32)
    if not (math.isfinite(coarse) and math.isfinite(fine)):
        return fine  # overflow: propagate to the caller's divergence check
    # the roundoff floor keeps an over-tight absolute tol from forcing a
    # full-depth bisection tree once the two rules agree to machine noise
    if abs(fine - coarse) <= tol + 4e-16 * abs(fine) or depth >= 24:
        return fine
    mid = 0.5 * (a + b)
    return _adaptive_gl(f, a, mid, tol / 2.0, depth + 1) + _adaptive_gl(
        f, mid, b, tol / 2.0, depth + 1
    )


def lorentz_norm(dist: DistributionData, params: LorentzParams) -> float:
    """Lorentz functional of the distribution.

    Finite q: (p * int_0^inf t^(q-1) mu(t)^(q/p) dt)^(1/q), evaluated exactly
    per interval when q/p is 1 or 2 and by adaptive Gauss quadrature (rel.
    tol 1e-10) otherwise.  q = inf: sup_t t^p mu(t).
    """
    p, q = params.p, params.q
    br = dist._breaks
    K = len(br)
    j = np.arange(1, K)
    A, B, C = dist._A[j], dist._B[j], dist._C[j]

    if math.isinf(q):
        lo, hi = br[:-1], br[1:]
        best = np.maximum(hi**p * (A + hi * (B + hi * C)),
                          lo**p * (A + lo * (B + lo * C)))
        # interior critical points of t^p (A + B t + C t^2)
        qa, qb, qc = (p + 2.0) * C, (p + 1.0) * B, p * A
        disc = qb * qb - 4.0 * qa * qc
        ok = (disc >= 0.0) & (np.abs(qa) > 0.0)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        for sgn in (1.0, -1.0):
            t = np.where(ok, (-qb + sgn * sq) / np.where(ok, 2.0 * qa, 1.0), lo)
            t = np.clip(t, lo, hi)
            best = np.maximum(best, t**p * (A + t * (B + t * C)))
        value = float(np.max(best)) if len(best) else 0.0
        if not math.isfinite(value):
            raise LorentzDivergenceError("weak-form supremum is not finite")
        return value

    ratio = q / p
    if abs(ratio - round(ratio)) < 1e-12 and round(ratio) in (1, 2):
        integral = dist.moment(q - 1.0, int(round(ratio)))
    else:
        integral = 0.0
        m1 = dist.moment(q - 1.0, 1)
        log_rough = (math.log(max(m1, 1e-300))
                     + (ratio - 1.0) * math.log(max(dist.total, 1.0)))
        if log_rough > 700.0:  # the integrand overflows double precision
            raise LorentzDivergenceError(
                f"Lorentz integrand overflows for (p={p}, q={q})"
            )
        rough = m1 * max(dist.total, 1.0) ** (ratio - 1.0)
        tol = 1e-10 * max(abs(rough), 1e-300) / max(K, 1)
        # one vectorized two-level pass over all interior segments; only the
        # few that miss the tolerance (power singularities at mu = 0) fall
        # back to per-segment adaptive bisection
        positive = br[:-1] > 0.0
        lo, hi = br[:-1][positive], br[1:][positive]
        idx = np.nonzero(positive)[0] + 1
        Av, Bv, Cv = dist._A[idx], dist._B[idx], dist._C[idx]

        def _batch(nodes):
            x, w = nodes
            mid = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo)
            t = mid[:, None] + half[:, None] * x[None, :]
            mu = np.maximum(Av[:, None] + t * (Bv[:, None] + t * Cv[:, None]),
                            0.0)
            return (t ** (q - 1.0) * mu**ratio) @ w * half

        coarse, fine = _batch(_GL16), _batch(_GL32)
        settled = np.abs(fine - coarse) <= tol + 4e-16 * np.abs(fine)
        settled &= np.isfinite(fine)
        integral += float(np.sum(fine[settled]))
        for k in np.nonzero(~settled)[0]:
            Aj, Bj, Cj = Av[k], Bv[k], Cv[k]
            g = lambda t: (t ** (q - 1.0)
                           * np.maximum(Aj + t * (Bj + t * Cj), 0.0) ** ratio)
            integral += _adaptive_gl(g, lo[k], hi[k], tol)
        if br[0] == 0.0 and K > 1:
            # substitute t = b x^(1/q); removes the t^(q-1) endpoint power
            b0 = br[1]
            A0, B0, C0 = dist._A[1], dist._B[1], dist._C[1]
            g = lambda x: np.maximum(
                A0 + b0 * x ** (1.0 / q) * (B0 + b0 * x ** (1.0 / q) * C0),
                0.0) ** ratio
            integral += b0**q / q * _adaptive_gl(g, 0.0, 1.0, tol)
    value = float((p * integral) ** (1.0 / q))
    if not math.isfinite(value):
        raise LorentzDivergenceError(
            f"Lorentz integral for (p={p}, q={q}) did not converge"
        )
    return value


# ---------------------------------------------------------------------------
# Hardy-Littlewood pairing


# graded reference subdivision of [0, 1]: rearrangements have square-root
# behavior at interval ends, so cells shrink geometrically into both corners
_HL_EDGES = np.array(
    [0.0, 1e-7, 1e-5, 1e-3, 1e-2, 0.1, 0.5, 0.9, 0.99, 0.999, 1.0 - 1e-5,
     1.0 - 1e-7, 1.0]
)
_HL_X, _HL_W = np.polynomial.legendre.leggauss(12)


def _pair_nodes(lo, hi):
    edges = lo[:, None] + (hi - lo)[:, None] * _HL_EDGES[None, :]
    a = edges[:, :-1].ravel()
    b = edges[:, 1:].ravel()
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _HL_X[None, :]
    weights = half[:, None] * _HL_W[None, :]
    return nodes.ravel(), weights.ravel()


def hardy_littlewood_check(f1: ScalarField, f2: ScalarField):
    """(integral of |f1 f2| over the mesh, integral of f1* f2* over [0, total]).

    The mesh side uses the edge-midpoint rule (exact for sign-definite P1
    products); the rearranged side integrates between the kinks of both
    rearrangements on a corner-graded Gauss grid.
    """
    if f1.mesh is not f2.mesh and not (
        f1.mesh.geometry == f2.mesh.geometry
        and f1.mesh.vertices.shape == f2.mesh.vertices.shape
        and np.array_equal(f1.mesh.vertices, f2.mesh.vertices)
        and np.array_equal(f1.mesh.triangles, f2.mesh.triangles)
    ):
        raise MeshMismatchError("fields live on different meshes")

    mesh = f1.mesh
    tri = mesh.triangles
    w = mesh.chart_areas() * mesh.centroid_density()
    v1, v2 = f1.values[tri], f2.values[tri]
    lhs = 0.0
    for i, jj in ((0, 1), (1, 2), (2, 0)):
        m1 = 0.5 * (v1[:, i] + v1[:, jj])
        m2 = 0.5 * (v2[:, i] + v2[:, jj])
        lhs += float(np.sum(w / 3.0 * np.abs(m1 * m2)))

    r1 = decreasing_rearrangement(distribution_function(f1))
    r2 = decreasing_rearrangement(distribution_function(f2))
    s_nodes = np.unique(np.concatenate([r1.kinks(), r2.kinks()]))
    lo, hi = s_nodes[:-1], s_nodes[1:]
    keep = hi > lo
    nodes, weights = _pair_nodes(lo[keep], hi[keep])
    rhs = float(np.sum(weights * r1(nodes) * r2(nodes)))
    return lhs, rhs
