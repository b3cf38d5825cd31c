"""Measured triangle meshes on 2-D charts.

A mesh lives in a planar chart and carries the metric through densities: a
per-vertex area density and per-edge boundary length densities.  Three chart
geometries are supported:

* ``flat``: the chart is the domain, densities are 1 (or user supplied);
* ``sphere_stereographic``: stereographic chart of the unit round sphere,
  area density 4/(1+|x|^2)^2, length density 2/(1+|x|^2);
* ``warped``: rotationally symmetric surface with metric dr^2 + psi(r)^2
  dtheta^2 pulled back to Cartesian chart coordinates; the area density is
  psi(r)/r and lengths depend on direction.

Generators produce structured meshes for disks, squares, spherical caps and
annulus sectors, and ear-clipping plus midpoint refinement for general simple
polygons.  Meshes serialize to a small JSON schema.
"""

import json
import math
from dataclasses import dataclass

import numpy as np


class MeshFormatError(ValueError):
    """A mesh file or mesh arrays cannot be parsed into a mesh."""


class MeshInvariantError(ValueError):
    """A structural mesh invariant fails; names the check and the element."""


class DegenerateGeometryError(ValueError):
    """Requested domain parameters produce degenerate or out-of-chart geometry."""


GEOMETRIES = ("flat", "sphere_stereographic", "warped")

# stereographic charts must stay away from the antipode of the chart center
CHART_RADIUS_CAP = 10.0

# generators shrink their structural step so no edge (including diagonals)
# exceeds the requested target_h
_H_SAFETY = 0.7


# ---------------------------------------------------------------------------
# warped rotationally symmetric surfaces


@dataclass(frozen=True)
class WarpedSurfaceSpec:
    """A catalog rotationally symmetric surface, metric dr^2 + psi(r)^2 dtheta^2.

    Catalog entries (0 < c <= 1):

    * ``cone``: psi(r) = c*r.  Flat away from the (conical) vertex, exact
      asymptotic volume ratio c, and the extremal case of the weighted
      isoperimetric inequality.
    * ``smoothed_cone``: psi(r) = c*r + (1-c)*(1 - exp(-r)).  Smooth at the
      origin (psi'(0) = 1), nonnegative curvature everywhere (psi'' <= 0),
      exact asymptotic volume ratio c.
    """

    name: str
    c: float

    def __post_init__(self):
        if self.name not in ("cone", "smoothed_cone"):
            raise DegenerateGeometryError(f"unknown warped surface {self.name!r}")
        if not (0.0 < self.c <= 1.0):
            raise DegenerateGeometryError(
                f"warp parameter c must lie in (0, 1], got {self.c}"
            )

    @property
    def avr(self) -> float:
        """Asymptotic volume ratio lim |B_r| / (pi r^2), exact for the catalog."""
        return self.c

    def psi(self, r):
        r = np.asarray(r, dtype=float)
        if self.name == "cone":
            return self.c * r
        return self.c * r - (1.0 - self.c) * np.expm1(-r)

    def dpsi(self, r):
        r = np.asarray(r, dtype=float)
        if self.name == "cone":
            return np.full_like(r, self.c)
        return self.c + (1.0 - self.c) * np.exp(-r)

    def d2psi(self, r):
        r = np.asarray(r, dtype=float)
        if self.name == "cone":
            return np.zeros_like(r)
        return -(1.0 - self.c) * np.exp(-r)

    def chart_area_density(self, r):
        """psi(r)/r with its r -> 0 limit filled in."""
        r = np.asarray(r, dtype=float)
        if self.name == "cone":
            return np.full_like(r, self.c)
        small = r < 1e-7
        rs = np.where(small, 1.0, r)
        out = self.c - (1.0 - self.c) * np.expm1(-rs) / rs
        return np.where(small, self.c + (1.0 - self.c) * (1.0 - 0.5 * r), out)

    def curvature_proxy(self, r):
        """Gauss curvature -psi''/psi (0/0 at the origin resolved by limit)."""
        r = np.asarray(r, dtype=float)
        psi = self.psi(np.maximum(r, 1e-12))
        return -self.d2psi(r) / np.maximum(psi, 1e-300)

    def to_json(self):
        return {"name": self.name, "c": self.c}

    @staticmethod
    def from_json(obj):
        try:
            return WarpedSurfaceSpec(name=obj["name"], c=float(obj["c"]))
        except (KeyError, TypeError) as exc:
            raise MeshFormatError(f"bad warp spec {obj!r}") from exc


def warped_profile(name: str, c: float) -> WarpedSurfaceSpec:
    """Catalog constructor for warped surfaces."""
    return WarpedSurfaceSpec(name=name, c=c)


# ---------------------------------------------------------------------------
# chart metric helpers


def area_density(geometry: str, warp, points) -> np.ndarray:
    """Per-point metric area density in chart coordinates."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if geometry == "flat":
        return np.ones(len(pts))
    if geometry == "sphere_stereographic":
        return 4.0 / (1.0 + np.sum(pts**2, axis=1)) ** 2
    return warp.chart_area_density(np.hypot(pts[:, 0], pts[:, 1]))


def length_factor(geometry: str, warp, points, directions) -> np.ndarray:
    """Metric length per unit chart length at ``points`` along unit ``directions``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if geometry == "flat":
        return np.ones(len(pts))
    if geometry == "sphere_stereographic":
        return 2.0 / (1.0 + np.sum(pts**2, axis=1))
    dirs = np.asarray(directions, dtype=float).reshape(-1, 2)
    r = np.hypot(pts[:, 0], pts[:, 1])
    safe = np.maximum(r, 1e-300)
    radial = (pts[:, 0] * dirs[:, 0] + pts[:, 1] * dirs[:, 1]) / safe
    radial = np.where(r < 1e-12, 1.0, radial)  # any direction works at the tip
    w = warp.chart_area_density(r)  # psi/r
    t2 = np.clip(radial**2, 0.0, 1.0)
    return np.sqrt(t2 + w**2 * (1.0 - t2))


def warped_metric_tensors(warp, points) -> np.ndarray:
    """Per-point 2x2 arrays sqrt(det g) * g^{-1} for the warped chart metric.

    This is the weight of the Dirichlet integrand in chart coordinates; it
    equals the identity for conformal charts and
    (psi/r) * rhat rhat^T + (r/psi) * that that^T here.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    r = np.hypot(pts[:, 0], pts[:, 1])
    w = warp.chart_area_density(r)  # psi/r -> 1 or c at the tip
    safe = np.maximum(r, 1e-300)
    rhat = np.where(r[:, None] < 1e-12, np.array([1.0, 0.0]), pts / safe[:, None])
    that = np.stack([-rhat[:, 1], rhat[:, 0]], axis=1)
    out = (
        w[:, None, None] * rhat[:, :, None] * rhat[:, None, :]
        + (1.0 / w)[:, None, None] * that[:, :, None] * that[:, None, :]
    )
    return out


# ---------------------------------------------------------------------------
# the mesh


class MeasuredMesh:
    """Conforming triangulation of a chart domain with measure densities.

    Parameters
    ----------
    vertices : (N, 2) array
        Chart coordinates.
    triangles : (M, 3) int array
        Vertex indices, counterclockwise in the chart.
    boundary_edges : (K, 2) int array
        Directed boundary edges with the domain on the left.
    geometry : str
        One of ``flat``, ``sphere_stereographic``, ``warped``.
    warp : WarpedSurfaceSpec, optional
        Required exactly when geometry is ``warped``.
    density : (N,) array, optional
        Per-vertex area density; computed from the geometry when omitted.
    """

    def __init__(self, vertices, triangles, boundary_edges, geometry="flat",
                 warp=None, density=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.boundary_edges = np.ascontiguousarray(boundary_edges, dtype=np.int64)
        if geometry not in GEOMETRIES:
            raise MeshFormatError(f"unknown geometry {geometry!r}")
        if (geometry == "warped") != (warp is not None):
            raise MeshFormatError("warp spec required iff geometry is 'warped'")
        self.geometry = geometry
        self.warp = warp
        if density is None:
            self.density = area_density(geometry, warp, self.vertices)
            self._custom_density = False
        else:
            self.density = np.ascontiguousarray(density, dtype=float)
            ref = area_density(geometry, warp, self.vertices)
            self._custom_density = not (
                self.density.shape == ref.shape and np.allclose(self.density, ref, rtol=1e-12, atol=1e-12)
            )
        self.validate()
        self.boundary_density = self._boundary_density()

    # -- structure ---------------------------------------------------------

    def validate(self):
        v, t, b = self.vertices, self.triangles, self.boundary_edges
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise MeshInvariantError(f"vertices: expected (N>=3, 2) array, got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3 or len(t) < 1:
            raise MeshInvariantError(f"triangles: expected (M>=1, 3) array, got {t.shape}")
        if b.ndim != 2 or b.shape[1] != 2 or len(b) < 3:
            raise MeshInvariantError(f"boundary_edges: expected (K>=3, 2) array, got {b.shape}")
        if not np.all(np.isfinite(v)):
            raise MeshInvariantError("finite: vertices contain non-finite values")
        if t.min() < 0 or t.max() >= len(v):
            raise MeshInvariantError("index-range: triangle index out of range")
        if b.min() < 0 or b.max() >= len(v):
            raise MeshInvariantError("index-range: boundary edge index out of range")

        areas = self.chart_areas()
        bad = np.nonzero(areas <= 0.0)[0]
        if len(bad):
            raise MeshInvariantError(
                f"orientation: triangle {bad[0]} has non-positive chart area {areas[bad[0]]!r}"
            )

        if self.density.shape != (len(v),):
            raise MeshInvariantError("density: wrong shape")
        if not np.all(np.isfinite(self.density)) or np.any(self.density <= 0.0):
            idx = int(np.argmin(self.density))
            raise MeshInvariantError(f"density-positive: vertex {idx} has density {self.density[idx]!r}")

        # conformity: directed interior edges pair up, boundary edges appear once
        edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        directed = {}
        for a, bb in edges:
            key = (int(a), int(bb))
            directed[key] = directed.get(key, 0) + 1
            if directed[key] > 1:
                raise MeshInvariantError(f"edge-conformity: directed edge {key} repeats")
        boundary_from_tris = {k for k in directed if (k[1], k[0]) not in directed}
        declared = {(int(a), int(bb)) for a, bb in b}
        if len(declared) != len(b):
            raise MeshInvariantError("boundary-match: duplicate boundary edge")
        if declared != boundary_from_tris:
            missing = boundary_from_tris - declared
            extra = declared - boundary_from_tris
            raise MeshInvariantError(
                f"boundary-match: declared boundary disagrees with triangulation "
                f"(missing {sorted(missing)[:3]}, extra {sorted(extra)[:3]})"
            )

        # boundary edges must close up into loops
        outdeg, indeg = {}, {}
        for a, bb in declared:
            outdeg[a] = outdeg.get(a, 0) + 1
            indeg[bb] = indeg.get(bb, 0) + 1
        for node in set(outdeg) | set(indeg):
            if outdeg.get(node, 0) != 1 or indeg.get(node, 0) != 1:
                raise MeshInvariantError(f"boundary-loops: vertex {node} does not chain")

        if self.geometry == "sphere_stereographic":
            rmax = float(np.max(np.hypot(v[:, 0], v[:, 1])))
            if rmax > CHART_RADIUS_CAP:
                raise MeshInvariantError(
                    f"chart-radius: |x| = {rmax:.3f} exceeds the cap {CHART_RADIUS_CAP}"
                )
        if self.geometry == "warped":
            proxy = self.warp.curvature_proxy(np.hypot(v[:, 0], v[:, 1]))
            if np.min(proxy) < -1e-9:
                idx = int(np.argmin(proxy))
                raise MeshInvariantError(
                    f"warp-curvature: vertex {idx} sees curvature {proxy[idx]!r}"
                )

    # -- measures ----------------------------------------------------------

    def chart_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def centroid_density(self) -> np.ndarray:
        """Per-triangle density frozen at the centroid (equals the vertex mean
        for the linear densities used throughout)."""
        return np.mean(self.density[self.triangles], axis=1)

    def total_measure(self) -> float:
        """Weighted area, per-triangle quadrature exact for linear density."""
        return float(np.sum(self.chart_areas() * self.centroid_density()))

    def boundary_chart_lengths(self) -> np.ndarray:
        seg = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return np.hypot(seg[:, 0], seg[:, 1])

    def boundary_measure(self) -> float:
        """Weighted boundary length: chart length times trapezoidal density."""
        return float(np.sum(self.boundary_chart_lengths() * np.mean(self.boundary_density, axis=1)))

    def mesh_size(self) -> float:
        """Maximum metric edge length; the h of every C*h tolerance model."""
        out = 0.0
        for i, j in ((0, 1), (1, 2), (2, 0)):
            a = self.vertices[self.triangles[:, i]]
            b = self.vertices[self.triangles[:, j]]
            seg = b - a
            ln = np.hypot(seg[:, 0], seg[:, 1])
            d = seg / np.maximum(ln, 1e-300)[:, None]
            fac = np.maximum(
                length_factor(self.geometry, self.warp, a, d),
                length_factor(self.geometry, self.warp, b, d),
            )
            out = max(out, float(np.max(ln * fac)))
        return out

    def chart_mesh_size(self) -> float:
        out = 0.0
        for i, j in ((0, 1), (1, 2), (2, 0)):
            seg = self.vertices[self.triangles[:, j]] - self.vertices[self.triangles[:, i]]
            out = max(out, float(np.max(np.hypot(seg[:, 0], seg[:, 1]))))
        return out

    def _boundary_density(self) -> np.ndarray:
        a = self.vertices[self.boundary_edges[:, 0]]
        b = self.vertices[self.boundary_edges[:, 1]]
        seg = b - a
        ln = np.hypot(seg[:, 0], seg[:, 1])
        d = seg / np.maximum(ln, 1e-300)[:, None]
        return np.stack(
            [
                length_factor(self.geometry, self.warp, a, d),
                length_factor(self.geometry, self.warp, b, d),
            ],
            axis=1,
        )

    @property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    def __repr__(self):
        return (
            f"MeasuredMesh({len(self.vertices)} vertices, {len(self.triangles)} "
            f"triangles, {len(self.boundary_edges)} boundary edges, {self.geometry})"
        )


@dataclass
class ScalarField:
    """Per-vertex sampled scalar function on a mesh."""

    mesh: MeasuredMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (len(self.mesh.vertices),):
            raise MeshFormatError(
                f"field has {self.values.shape} values for {len(self.mesh.vertices)} vertices"
            )
        if not np.all(np.isfinite(self.values)):
            raise MeshFormatError("field contains non-finite values")


# ---------------------------------------------------------------------------
# generation helpers


def _extract_boundary(triangles) -> np.ndarray:
    """Directed edges that appear in exactly one triangle, chained into loops."""
    t = np.asarray(triangles)
    edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    seen = {(int(a), int(b)) for a, b in edges}
    bnd = [(a, b) for (a, b) in seen if (b, a) not in seen]
    nxt = {a: b for a, b in bnd}
    loops = []
    remaining = dict(nxt)
    while remaining:
        start = min(remaining)
        cur = start
        while True:
            nb = remaining.pop(cur)
            loops.append((cur, nb))
            cur = nb
            if cur == start:
                break
    return np.array(loops, dtype=np.int64)


def _zip_rings(inner, inner_angles, outer, outer_angles):
    """Triangulate the band between two CCW closed rings by angle merge."""
    na, nb = len(inner), len(outer)
    ia = np.append(inner_angles, inner_angles[0] + 2.0 * math.pi)
    oa = np.append(outer_angles, outer_angles[0] + 2.0 * math.pi)
    tris = []
    i = j = 0
    while i < na or j < nb:
        take_inner = j >= nb or (i < na and ia[i + 1] <= oa[j + 1])
        if take_inner:
            tris.append((inner[i], outer[j % nb], inner[(i + 1) % na]))
            i += 1
        else:
            tris.append((inner[i % na], outer[j], outer[(j + 1) % nb]))
            j += 1
    return tris


def _disk_points(radius, target_h, n_boundary=None):
    m = max(1, math.ceil(radius / (_H_SAFETY * target_h)))
    for _ in range(8):
        verts, tris = _disk_build(radius, m, n_boundary)
        longest = 0.0
        for i, j in ((0, 1), (1, 2), (2, 0)):
            seg = verts[tris[:, j]] - verts[tris[:, i]]
            longest = max(longest, float(np.max(np.hypot(seg[:, 0], seg[:, 1]))))
        if longest <= target_h or n_boundary is not None:
            break
        # zipper diagonals can overshoot the ring step; thicken the rings
        m = max(m + 1, math.ceil(m * longest / target_h))
    return verts, tris


def _disk_build(radius, m, n_boundary=None):
    n_out = n_boundary if n_boundary is not None else 6 * m
    verts = [(0.0, 0.0)]
    rings = []  # (indices, angles)
    for j in range(1, m + 1):
        r = radius * j / m
        nj = max(3, int(round(n_out * j / m)))
        ang = 2.0 * math.pi * np.arange(nj) / nj
        idx = np.arange(len(verts), len(verts) + nj)
        verts.extend(zip(r * np.cos(ang), r * np.sin(ang)))
        rings.append((idx, ang))
    tris = []
    first_idx, _ = rings[0]
    n1 = len(first_idx)
    for i in range(n1):
        tris.append((0, first_idx[i], first_idx[(i + 1) % n1]))
    for j in range(len(rings) - 1):
        tris.extend(_zip_rings(rings[j][0], rings[j][1], rings[j + 1][0], rings[j + 1][1]))
    return np.asarray(verts, dtype=float), np.array(tris, dtype=np.int64)


def _square_points(side, target_h):
    k = max(1, math.ceil(side * math.sqrt(2.0) / target_h))
    axis = np.linspace(0.0, side, k + 1)
    xx, yy = np.meshgrid(axis, axis, indexing="xy")
    verts = np.stack([xx.ravel(), yy.ravel()], axis=1)

    def vid(i, j):
        return j * (k + 1) + i

    tris = []
    for j in range(k):
        for i in range(k):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return verts, np.array(tris, dtype=np.int64)


def _annulus_sector_points(r_inner, r_outer, angle0, angle1, target_h):
    if not (0.0 <= r_inner < r_outer):
        raise DegenerateGeometryError("need 0 <= r_inner < r_outer")
    span = angle1 - angle0
    if not (0.0 < span < 2.0 * math.pi):
        raise DegenerateGeometryError("sector angle span must lie in (0, 2*pi)")
    if r_inner == 0.0:
        raise DegenerateGeometryError("r_inner must be positive (use disk for r_inner = 0)")
    step = _H_SAFETY * target_h
    kr = max(1, math.ceil((r_outer - r_inner) / step))
    ka = max(1, math.ceil(span * r_outer / step))
    rr = np.linspace(r_inner, r_outer, kr + 1)
    aa = np.linspace(angle0, angle1, ka + 1)
    verts = np.array(
        [(r * math.cos(a), r * math.sin(a)) for r in rr for a in aa]
    )

    def vid(i, j):  # i radial, j angular
        return i * (ka + 1) + j

    tris = []
    for i in range(kr):
        for j in range(ka):
            v00, v01 = vid(i, j), vid(i, j + 1)
            v10, v11 = vid(i + 1, j), vid(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return verts, np.array(tris, dtype=np.int64)


# -- polygons ----------------------------------------------------------------


def _polygon_signed_area(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_properly_intersect(p1, p2, p3, p4):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _check_simple_polygon(pts):
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(i - j) in (0, 1) or (i == 0 and j == n - 1):
                continue
            if _segments_properly_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]):
                raise DegenerateGeometryError(
                    f"polygon self-intersects between edges {i} and {j}"
                )


def _ear_clip(pts):
    """Triangulate a simple CCW polygon by ear clipping."""
    n = len(pts)
    idx = list(range(n))
    tris = []

    def cross(o, a, b):
        return (pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1]) - (
            pts[a, 1] - pts[o, 1]
        ) * (pts[b, 0] - pts[o, 0])

    def inside(a, b, c, p):
        d1 = cross(a, b, p)
        d2 = cross(b, c, p)
        d3 = cross(c, a, p)
        return d1 >= 0 and d2 >= 0 and d3 >= 0

    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 4 * n * n:
            raise DegenerateGeometryError("ear clipping failed; polygon may be degenerate")
        m = len(idx)
        clipped = False
        for k in range(m):
            a, b, c = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            if cross(a, b, c) <= 1e-14 * np.max(np.abs(pts)) ** 2:
                continue  # reflex or flat corner
            if any(
                inside(a, b, c, q)
                for q in idx
                if q not in (a, b, c)
            ):
                continue
            tris.append((a, b, c))
            idx.pop(k)
            clipped = True
            break
        if not clipped:
            raise DegenerateGeometryError("ear clipping stalled; polygon may self-touch")
    tris.append(tuple(idx))
    return np.array(tris, dtype=np.int64)


def _refine4(verts, tris):
    """Split every triangle into four via shared edge midpoints."""
    verts = list(map(tuple, verts))
    midpoint = {}

    def mid(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in midpoint:
            pa, pb = verts[a], verts[b]
            verts.append(((pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0))
            midpoint[key] = len(verts) - 1
        return midpoint[key]

    out = []
    for a, b, c in tris:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    return np.array(verts), np.array(out, dtype=np.int64)


def _polygon_points(points, target_h):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise DegenerateGeometryError("polygon needs at least 3 (x, y) points")
    _check_simple_polygon(pts)
    if _polygon_signed_area(pts) < 0:
        pts = pts[::-1].copy()
    if abs(_polygon_signed_area(pts)) < 1e-14:
        raise DegenerateGeometryError("polygon has (near-)zero area")
    tris = _ear_clip(pts)
    verts = pts
    for _ in range(40):
        edge_len = 0.0
        for i, j in ((0, 1), (1, 2), (2, 0)):
            seg = verts[tris[:, j]] - verts[tris[:, i]]
            edge_len = max(edge_len, float(np.max(np.hypot(seg[:, 0], seg[:, 1]))))
        if edge_len <= target_h:
            break
        verts, tris = _refine4(verts, tris)
    return np.asarray(verts, dtype=float), tris


# ---------------------------------------------------------------------------
# public generation and serialization


def generate_domain(kind: str, target_h: float, geometry: str = "flat",
                    warp: WarpedSurfaceSpec | None = None, **params) -> MeasuredMesh:
    """Generate a structured measured mesh.

    Supported kinds and their parameters:

    * ``disk``: ``radius`` (and optionally ``n_boundary`` to pin the exact
      number of boundary segments, overriding target_h along the rim)
    * ``square``: ``side``
    * ``polygon``: ``points`` (sequence of (x, y), any orientation)
    * ``spherical_cap``: ``theta`` (geodesic cap angle; geometry is forced to
      the stereographic sphere chart)
    * ``annulus_sector``: ``r_inner``, ``r_outer``, ``angle0``, ``angle1``

    ``target_h`` bounds the maximum edge length in chart coordinates.
    """
    if target_h <= 0.0:
        raise DegenerateGeometryError("target_h must be positive")

    if kind == "spherical_cap":
        theta = params.pop("theta")
        if params:
            raise DegenerateGeometryError(f"unexpected parameters {sorted(params)}")
        if geometry not in ("flat", "sphere_stereographic"):
            raise DegenerateGeometryError("spherical_cap implies the sphere chart")
        if not (0.0 < theta <= 2.0 * math.atan(CHART_RADIUS_CAP)):
            raise DegenerateGeometryError(
                f"cap angle must lie in (0, {2.0 * math.atan(CHART_RADIUS_CAP):.4f}] "
                "to stay inside the chart-radius cap"
            )
        verts, tris = _disk_points(math.tan(0.5 * theta), target_h)
        geometry = "sphere_stereographic"
    elif kind == "disk":
        radius = params.pop("radius")
        n_boundary = params.pop("n_boundary", None)
        if params:
            raise DegenerateGeometryError(f"unexpected parameters {sorted(params)}")
        if radius <= 0.0:
            raise DegenerateGeometryError("disk radius must be positive")
        verts, tris = _disk_points(radius, target_h, n_boundary)
    elif kind == "square":
        side = params.pop("side")
        if params:
            raise DegenerateGeometryError(f"unexpected parameters {sorted(params)}")
        if side <= 0.0:
            raise DegenerateGeometryError("square side must be positive")
        verts, tris = _square_points(side, target_h)
    elif kind == "polygon":
        points = params.pop("points")
        if params:
            raise DegenerateGeometryError(f"unexpected parameters {sorted(params)}")
        verts, tris = _polygon_points(points, target_h)
    elif kind == "annulus_sector":
        verts, tris = _annulus_sector_points(
            params.pop("r_inner"), params.pop("r_outer"),
            params.pop("angle0"), params.pop("angle1"), target_h,
        )
        if params:
            raise DegenerateGeometryError(f"unexpected parameters {sorted(params)}")
    else:
        raise DegenerateGeometryError(f"unknown domain kind {kind!r}")

    if geometry == "sphere_stereographic":
        rmax = float(np.max(np.hypot(verts[:, 0], verts[:, 1])))
        if rmax > CHART_RADIUS_CAP:
            raise DegenerateGeometryError(
                f"domain reaches chart radius {rmax:.3f} > cap {CHART_RADIUS_CAP}"
            )
    boundary = _extract_boundary(tris)
    return MeasuredMesh(verts, tris, boundary, geometry=geometry, warp=warp)


def refine(mesh: MeasuredMesh) -> MeasuredMesh:
    """Uniform midpoint refinement; densities recomputed from the geometry
    (interpolated when the mesh carries a custom density)."""
    verts, tris = _refine4(mesh.vertices, mesh.triangles)
    boundary = _extract_boundary(tris)
    density = None
    if mesh._custom_density:
        # midpoints average their parents; parents keep their values
        density = np.empty(len(verts))
        density[: len(mesh.vertices)] = mesh.density
        old = len(mesh.vertices)
        # rebuild the midpoint map exactly as _refine4 did
        seen = {}
        ptr = old
        for a, b, c in mesh.triangles:
            for u, vtx in ((a, b), (b, c), (c, a)):
                key = (u, vtx) if u < vtx else (vtx, u)
                if key not in seen:
                    seen[key] = ptr
                    density[ptr] = 0.5 * (mesh.density[key[0]] + mesh.density[key[1]])
                    ptr += 1
    return MeasuredMesh(verts, tris, boundary, geometry=mesh.geometry,
                        warp=mesh.warp, density=density)


def save_mesh(mesh: MeasuredMesh, path: str):
    """Write the JSON form; floats round-trip exactly."""
    obj = {
        "geometry": mesh.geometry,
        "vertices": mesh.vertices.tolist(),
        "triangles": mesh.triangles.tolist(),
        "boundary_edges": mesh.boundary_edges.tolist(),
        "density": mesh.density.tolist(),
    }
    if mesh.warp is not None:
        obj["warp"] = mesh.warp.to_json()
    with open(path, "w") as fh:
        json.dump(obj, fh)


def load_mesh(path: str) -> MeasuredMesh:
    """Read the JSON form written by :func:`save_mesh` (density optional)."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MeshFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise MeshFormatError(f"{path}: expected a JSON object")
    for key in ("geometry", "vertices", "triangles", "boundary_edges"):
        if key not in obj:
            raise MeshFormatError(f"{path}: missing field {key!r}")
    warp = WarpedSurfaceSpec.from_json(obj["warp"]) if "warp" in obj else None
    try:
        return MeasuredMesh(
            np.asarray(obj["vertices"], dtype=float),
            np.asarray(obj["triangles"], dtype=np.int64),
            np.asarray(obj["boundary_edges"], dtype=np.int64),
            geometry=obj["geometry"],
            warp=warp,
            density=np.asarray(obj["density"], dtype=float) if "density" in obj else None,
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, (MeshInvariantError, MeshFormatError)):
            raise
        raise MeshFormatError(f"{path}: malformed arrays ({exc})") from exc
