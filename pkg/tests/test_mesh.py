"""Mesh generation, measures, serialization, validation."""

import json
import math

import numpy as np
import pytest

from robinsym.mesh import (
    CHART_RADIUS_CAP,
    DegenerateGeometryError,
    MeasuredMesh,
    MeshFormatError,
    MeshInvariantError,
    ScalarField,
    area_density,
    generate_domain,
    load_mesh,
    refine,
    save_mesh,
    warped_metric_tensors,
    warped_profile,
)

L_SHAPE = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]


def shoelace_of_boundary(mesh):
    a = mesh.vertices[mesh.boundary_edges[:, 0]]
    b = mesh.vertices[mesh.boundary_edges[:, 1]]
    return 0.5 * float(np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))


def test_square_measures_exact():
    m = generate_domain("square", target_h=0.2, side=1.0)
    assert m.total_measure() == pytest.approx(1.0, abs=1e-12)
    assert m.boundary_measure() == pytest.approx(4.0, abs=1e-12)
    assert m.chart_mesh_size() <= 0.2
    assert m.mesh_size() == m.chart_mesh_size()  # flat metric


def test_disk_measures_converge():
    # inscribed polygon: deficit O(h^2), from below
    for h in (0.2, 0.1, 0.05):
        m = generate_domain("disk", target_h=h, radius=1.0)
        assert m.chart_mesh_size() <= h * (1.0 + 1e-12)
        assert 0.0 < math.pi - m.total_measure() < 5.0 * h * h
        assert 0.0 < 2.0 * math.pi - m.boundary_measure() < 5.0 * h * h


def test_disk_frozen_regression():
    # values generated by this code and checked against the closed forms above
    m = generate_domain("disk", target_h=0.2, radius=1.0)
    assert len(m.vertices) == 271
    assert m.total_measure() == pytest.approx(3.134508681381216, rel=1e-14)
    assert m.boundary_measure() == pytest.approx(6.279641522331391, rel=1e-14)


def test_disk_refinement_order():
    deficits = []
    for h in (0.2, 0.1, 0.05):
        m = generate_domain("disk", target_h=h, radius=1.0)
        deficits.append(math.pi - m.total_measure())
    assert deficits[0] / deficits[1] > 3.0
    assert deficits[1] / deficits[2] > 3.0


def test_disk_boundary_segment_override():
    m = generate_domain("disk", target_h=0.3, radius=1.0, n_boundary=12)
    assert len(m.boundary_edges) == 12


def test_total_measure_matches_boundary_shoelace():
    # flat meshes: triangle area sum must equal the boundary polygon area
    for m in (
        generate_domain("square", target_h=0.3, side=1.0),
        generate_domain("disk", target_h=0.3, radius=1.0),
        generate_domain("polygon", target_h=0.3, points=L_SHAPE),
    ):
        assert m.total_measure() == pytest.approx(shoelace_of_boundary(m), rel=1e-12)


def test_spherical_cap_measures():
    # area 2*pi*(1 - cos(theta)), boundary 2*pi*sin(theta) on the unit sphere
    for theta, h in ((math.pi / 2, 0.05), (2.0, 0.1)):
        m = generate_domain("spherical_cap", target_h=h, theta=theta)
        assert m.geometry == "sphere_stereographic"
        area = 2.0 * math.pi * (1.0 - math.cos(theta))
        perim = 2.0 * math.pi * math.sin(theta)
        assert abs(m.total_measure() - area) < 5.0 * h * h * area
        assert abs(m.boundary_measure() - perim) < 5.0 * h * h * perim


def test_spherical_cap_frozen_regression():
    m = generate_domain("spherical_cap", target_h=0.1, theta=2.0)
    assert len(m.vertices) == 2107
    assert m.total_measure() == pytest.approx(8.896008966413941, rel=1e-14)
    assert m.boundary_measure() == pytest.approx(5.712898064052375, rel=1e-14)


def test_spherical_cap_chart_cap():
    limit = 2.0 * math.atan(CHART_RADIUS_CAP)
    with pytest.raises(DegenerateGeometryError, match="cap angle"):
        generate_domain("spherical_cap", target_h=1.0, theta=limit + 0.01)
    m = generate_domain("spherical_cap", target_h=5.0, theta=2.9)
    r = np.hypot(m.vertices[:, 0], m.vertices[:, 1])
    assert np.max(r) <= CHART_RADIUS_CAP


def test_sphere_mesh_size_uses_metric():
    m = generate_domain("spherical_cap", target_h=0.1, theta=math.pi / 2)
    # conformal factor is 2 at the chart origin and 1 at the rim
    assert m.chart_mesh_size() < m.mesh_size() <= 2.0 * m.chart_mesh_size() + 1e-12


def test_warped_cone_measures():
    h = 0.05
    m = generate_domain("disk", target_h=h, radius=1.0, geometry="warped",
                        warp=warped_profile("cone", 0.5))
    assert abs(m.total_measure() - math.pi / 2) < 5.0 * h * h
    assert abs(m.boundary_measure() - math.pi) < 5.0 * h * h
    # tangential chords cost at most their chart length here
    assert m.mesh_size() <= m.chart_mesh_size() + 1e-12


def test_warped_smoothed_cone_measures():
    c, h = 0.5, 0.1
    w = warped_profile("smoothed_cone", c)
    m = generate_domain("disk", target_h=h, radius=1.0, geometry="warped", warp=w)
    area = 2.0 * math.pi * (c / 2.0 + (1.0 - c) * math.exp(-1.0))
    perim = 2.0 * math.pi * (c + (1.0 - c) * (1.0 - math.exp(-1.0)))
    assert abs(m.total_measure() - area) < 5.0 * h * h
    assert abs(m.boundary_measure() - perim) < 5.0 * h * h
    assert m.total_measure() == pytest.approx(2.7247068133636, rel=1e-13)


def test_warp_catalog_validation():
    with pytest.raises(DegenerateGeometryError):
        warped_profile("cone", 0.0)
    with pytest.raises(DegenerateGeometryError):
        warped_profile("cone", 1.5)
    with pytest.raises(DegenerateGeometryError):
        warped_profile("paraboloid", 0.5)
    assert warped_profile("smoothed_cone", 0.3).avr == 0.3


def test_warp_curvature_proxy_nonnegative():
    r = np.linspace(0.0, 20.0, 400)
    for c in (0.2, 0.5, 0.9, 1.0):
        w = warped_profile("smoothed_cone", c)
        assert np.min(w.curvature_proxy(r)) >= -1e-12
        assert np.all(warped_profile("cone", c).curvature_proxy(r) == 0.0)


def test_warp_density_small_radius_limit():
    w = warped_profile("smoothed_cone", 0.4)
    r = np.array([0.0, 1e-10, 1e-8, 1e-6, 1e-3])
    d = w.chart_area_density(r)
    assert d[0] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diff(d) < 0.0)  # decays toward c
    assert warped_profile("cone", 0.4).chart_area_density(0.0) == 0.4


def test_warped_metric_tensors():
    w = warped_profile("cone", 0.5)
    pts = np.array([[0.7, 0.0], [0.3, 0.4], [0.0, 0.0]])
    T = warped_metric_tensors(w, pts)
    assert np.linalg.det(T) == pytest.approx(np.ones(3), abs=1e-12)
    # on the x-axis the tensor is diag(psi/r, r/psi)
    assert T[0] == pytest.approx(np.diag([0.5, 2.0]), abs=1e-12)
    # elsewhere it is the rotation of that diagonal form
    phi = math.atan2(0.4, 0.3)
    R = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    assert T[1] == pytest.approx(R @ np.diag([0.5, 2.0]) @ R.T, abs=1e-12)


def test_annulus_sector_measures():
    h = 0.05
    m = generate_domain("annulus_sector", target_h=h, r_inner=1.0, r_outer=2.0,
                        angle0=0.0, angle1=math.pi / 2)
    area = (math.pi / 4) * (4.0 - 1.0)
    perim = (math.pi / 2) * 3.0 + 2.0
    assert abs(m.total_measure() - area) < 5.0 * h * h
    assert abs(m.boundary_measure() - perim) < 5.0 * h * h


def test_annulus_sector_validation():
    with pytest.raises(DegenerateGeometryError):
        generate_domain("annulus_sector", target_h=0.1, r_inner=2.0, r_outer=1.0,
                        angle0=0.0, angle1=1.0)
    with pytest.raises(DegenerateGeometryError):
        generate_domain("annulus_sector", target_h=0.1, r_inner=0.0, r_outer=1.0,
                        angle0=0.0, angle1=1.0)
    with pytest.raises(DegenerateGeometryError):
        generate_domain("annulus_sector", target_h=0.1, r_inner=1.0, r_outer=2.0,
                        angle0=0.0, angle1=7.0)


def test_polygon_exact_measures():
    m = generate_domain("polygon", target_h=0.1, points=L_SHAPE)
    assert m.total_measure() == pytest.approx(3.0, abs=1e-12)
    assert m.boundary_measure() == pytest.approx(8.0, abs=1e-12)
    assert m.chart_mesh_size() <= 0.1
    # clockwise input is normalized
    m2 = generate_domain("polygon", target_h=0.5, points=L_SHAPE[::-1])
    assert m2.total_measure() == pytest.approx(3.0, abs=1e-12)


def test_polygon_rejects_bad_input():
    bowtie = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]
    with pytest.raises(DegenerateGeometryError, match="self-intersect"):
        generate_domain("polygon", target_h=0.5, points=bowtie)
    with pytest.raises(DegenerateGeometryError):
        generate_domain("polygon", target_h=0.5, points=[(0, 0), (1, 0)])
    with pytest.raises(DegenerateGeometryError, match="area"):
        generate_domain("polygon", target_h=0.5, points=[(0, 0), (1, 0), (2, 0)])


def test_generate_domain_argument_errors():
    with pytest.raises(DegenerateGeometryError):
        generate_domain("hexagon", target_h=0.1)
    with pytest.raises(DegenerateGeometryError):
        generate_domain("disk", target_h=-0.1, radius=1.0)
    with pytest.raises(DegenerateGeometryError, match="unexpected"):
        generate_domain("disk", target_h=0.1, radius=1.0, sides=3)


def test_invariant_violations_are_named():
    m = generate_domain("square", target_h=0.5, side=1.0)
    t = m.triangles.copy()
    t[0, [0, 1]] = t[0, [1, 0]]
    with pytest.raises(MeshInvariantError, match="orientation: triangle 0"):
        MeasuredMesh(m.vertices, t, m.boundary_edges)

    b = m.boundary_edges.copy()
    b[0] = b[0][::-1]
    with pytest.raises(MeshInvariantError, match="boundary-match"):
        MeasuredMesh(m.vertices, m.triangles, b)

    d = np.ones(len(m.vertices))
    d[3] = -1.0
    with pytest.raises(MeshInvariantError, match="density-positive: vertex 3"):
        MeasuredMesh(m.vertices, m.triangles, m.boundary_edges, density=d)

    t2 = m.triangles.copy()
    t2[0, 0] = len(m.vertices)
    with pytest.raises(MeshInvariantError, match="index-range"):
        MeasuredMesh(m.vertices, t2, m.boundary_edges)


def test_save_load_round_trip(tmp_path):
    w = warped_profile("smoothed_cone", 0.5)
    m = generate_domain("disk", target_h=0.3, radius=1.0, geometry="warped", warp=w)
    p1 = tmp_path / "m1.json"
    p2 = tmp_path / "m2.json"
    save_mesh(m, p1)
    m2 = load_mesh(p1)
    save_mesh(m2, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert np.array_equal(m.vertices, m2.vertices)
    assert np.array_equal(m.triangles, m2.triangles)
    assert np.array_equal(m.boundary_edges, m2.boundary_edges)
    assert np.array_equal(m.density, m2.density)
    assert m2.warp == w


def test_load_density_optional(tmp_path):
    m = generate_domain("spherical_cap", target_h=0.4, theta=1.0)
    path = tmp_path / "cap.json"
    save_mesh(m, path)
    obj = json.loads(path.read_text())
    del obj["density"]
    path.write_text(json.dumps(obj))
    m2 = load_mesh(path)
    assert np.array_equal(m2.density, m.density)


def test_load_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(MeshFormatError, match="JSON"):
        load_mesh(p)
    p.write_text(json.dumps({"geometry": "flat"}))
    with pytest.raises(MeshFormatError, match="missing field"):
        load_mesh(p)
    m = generate_domain("square", target_h=0.5, side=1.0)
    save_mesh(m, p)
    obj = json.loads(p.read_text())
    obj["geometry"] = "hyperbolic"
    p.write_text(json.dumps(obj))
    with pytest.raises(MeshFormatError, match="geometry"):
        load_mesh(p)


def test_refine_preserves_and_halves():
    m = generate_domain("square", target_h=0.3, side=1.0)
    r = refine(m)
    assert r.total_measure() == pytest.approx(1.0, abs=1e-12)
    assert r.chart_mesh_size() == pytest.approx(0.5 * m.chart_mesh_size(), rel=1e-12)
    assert len(r.triangles) == 4 * len(m.triangles)


def test_refine_interpolates_custom_density():
    m = generate_domain("square", target_h=0.3, side=1.0)
    dens = 1.0 + m.vertices[:, 0]
    m2 = MeasuredMesh(m.vertices, m.triangles, m.boundary_edges, density=dens)
    # the quadrature is exact for linear densities, before and after refining
    assert m2.total_measure() == pytest.approx(1.5, abs=1e-12)
    r = refine(m2)
    assert r.total_measure() == pytest.approx(1.5, abs=1e-12)
    assert np.allclose(r.density, 1.0 + r.vertices[:, 0], atol=1e-12)


def test_refine_recomputes_geometric_density():
    m = generate_domain("spherical_cap", target_h=0.3, theta=1.0)
    r = refine(m)
    assert np.allclose(r.density, area_density("sphere_stereographic", None, r.vertices))


def test_scalar_field_validation():
    m = generate_domain("square", target_h=0.5, side=1.0)
    ScalarField(m, np.zeros(len(m.vertices)))
    with pytest.raises(MeshFormatError):
        ScalarField(m, np.zeros(3))
    bad = np.zeros(len(m.vertices))
    bad[0] = np.nan
    with pytest.raises(MeshFormatError):
        ScalarField(m, bad)


def test_geometry_warp_pairing():
    m = generate_domain("square", target_h=0.5, side=1.0)
    with pytest.raises(MeshFormatError, match="warp"):
        MeasuredMesh(m.vertices, m.triangles, m.boundary_edges, geometry="warped")
    with pytest.raises(MeshFormatError, match="warp"):
        MeasuredMesh(m.vertices, m.triangles, m.boundary_edges,
                     geometry="flat", warp=warped_profile("cone", 0.5))
