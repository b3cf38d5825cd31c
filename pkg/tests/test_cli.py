"""Config loading, the expression grammar, and the experiment runner."""

import json
import math

import numpy as np
import pytest

from robinsym import cli, fem
from robinsym import mesh as msh
from robinsym.cli import ConfigError, SourceExpression


def _write_config(tmp_path, name="cfg.json", **overrides):
    doc = {
        "space": {"kappa": 0, "n": 2},
        "domain": {"kind": "square", "side": 1.0},
        "source": "torsion",
        "beta": [1.0],
        "h": 0.2,
        "refine_levels": 0,
        "checks": [{"id": "thm1.1", "p": 1.0, "q": 1}],
        "output_dir": str(tmp_path / "out"),
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# ---------------------------------------------------------------------------
# expression grammar


def test_expression_evaluation():
    x = np.array([0.0, 0.5, 1.5])
    y = np.array([1.0, -2.0, 0.25])
    expr = SourceExpression("1 + 2*x^2 - y/2")
    assert np.allclose(expr(x, y), 1.0 + 2.0 * x**2 - y / 2.0)
    gauss = SourceExpression("exp(-r^2)")
    assert np.allclose(gauss(x, y), np.exp(-(x**2 + y**2)))
    assert SourceExpression("2^3^2")(np.zeros(1), np.zeros(1))[0] == 512.0
    assert SourceExpression("-x^2")(np.array([3.0]), np.zeros(1))[0] == -9.0
    assert SourceExpression("pi * e")(np.zeros(2), np.zeros(2))[0] == pytest.approx(
        math.pi * math.e)
    assert SourceExpression("cos(x)*sin(y)")(x, y) == pytest.approx(
        np.cos(x) * np.sin(y))


def test_expression_rejects_bad_input():
    for text in ("z + 1", "tan(x)", "(x + 1", "x + ", "x $ y", "exp x", "1 2"):
        with pytest.raises(ConfigError):
            SourceExpression(text)


# ---------------------------------------------------------------------------
# list-checks


def test_list_checks_text(capsys):
    assert cli.main(["list-checks"]) == 0
    out = capsys.readouterr().out
    for cid in ("thm1.1", "thm1.2-pointwise", "saint-venant", "bossel-daners"):
        assert cid in out
    assert "admissible:" in out and "n/(2n-2)" in out


def test_list_checks_json(capsys):
    assert cli.main(["list-checks", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    ids = [entry["id"] for entry in payload]
    assert ids == sorted(ids) and "bossel-daners" in ids
    for entry in payload:
        assert {"description", "parameters", "admissible"} <= set(entry)


# ---------------------------------------------------------------------------
# mesh subcommands


def test_mesh_gen_and_validate(tmp_path, capsys):
    out = str(tmp_path / "disk.json")
    assert cli.main(["mesh", "gen", "disk", "--h", "0.3", "--radius", "1.0",
                     "--out", out]) == 0
    mesh = msh.load_mesh(out)
    assert mesh.mesh_size() <= 0.3
    assert cli.main(["mesh", "validate", out]) == 0
    assert "valid:" in capsys.readouterr().out


def test_mesh_gen_polygon_and_warped(tmp_path):
    out = str(tmp_path / "ell.json")
    points = "0,0 1,0 1,0.5 0.5,0.5 0.5,1 0,1"
    assert cli.main(["mesh", "gen", "polygon", "--h", "0.2",
                     "--points", points, "--out", out]) == 0
    assert msh.load_mesh(out).total_measure() == pytest.approx(0.75, rel=1e-9)
    cone = str(tmp_path / "cone.json")
    assert cli.main(["mesh", "gen", "disk", "--h", "0.3", "--radius", "1.0",
                     "--geometry", "warped", "--warp-profile", "cone",
                     "--warp-c", "0.7", "--out", cone]) == 0
    assert msh.load_mesh(cone).total_measure() == pytest.approx(
        0.7 * math.pi, rel=1e-2)


def test_mesh_subcommand_failures(tmp_path, capsys):
    assert cli.main(["mesh", "gen", "pentagon", "--h", "0.2",
                     "--out", str(tmp_path / "x.json")]) == 2
    assert cli.main(["mesh", "gen", "disk", "--h", "0.3", "--radius", "1.0",
                     "--warp-profile", "cone",
                     "--out", str(tmp_path / "y.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["mesh", "validate", str(bad)]) == 2
    assert cli.main(["mesh", "validate", str(tmp_path / "absent.json")]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------------------
# config validation


def test_load_config_defaults_echoed(tmp_path):
    path = _write_config(tmp_path)
    config = cli.load_config(path)
    assert config.resolved["space"]["alpha"] == 1.0
    assert config.resolved["beta"] == [1.0]
    assert config.resolved["refine_levels"] == 0
    assert config.beta == (1.0,)


def test_range_rejected_before_dimension(tmp_path, capsys):
    # p outside the q=1 range for n=3 must produce the range diagnostic even
    # though a 3-d space could never be meshed either
    path = _write_config(tmp_path, space={"kappa": 0, "n": 3},
                         checks=[{"id": "thm1.1", "p": 2.0, "q": 1}])
    assert cli.main(["run", path]) == 2
    err = capsys.readouterr().err
    assert "range" in err and "0.75" in err

    path = _write_config(tmp_path, space={"kappa": 0, "n": 3},
                         checks=[{"id": "thm1.2", "p": 2.0, "q": 1}])
    assert cli.main(["run", path]) == 2
    assert "two-dimensional" in capsys.readouterr().err


def test_config_rejections(tmp_path):
    cases = [
        dict(checks=[{"id": "nonesuch"}]),
        dict(checks=[{"id": "thm1.1", "p": 1.0}]),
        dict(checks=[{"id": "thm1.1", "p": 1.0, "q": 1, "extra": 2}]),
        dict(checks=[{"id": "thm1.1", "p": 1.0, "q": 3}]),
        dict(checks=[]),
        dict(beta=[]),
        dict(beta=[-1.0]),
        dict(beta=[True]),
        dict(h=-0.1),
        dict(refine_levels=-1),
        dict(refine_levels=True),
        dict(domain={"kind": "square", "mesh": "x.json"}),
        dict(domain={"side": 1.0}),
        dict(domain={"mesh": str(tmp_path / "absent.json")}),
        dict(source={"expr": "1 +"}),
        dict(source={"field": str(tmp_path / "absent.json")}),
        dict(source="sorcery"),
        dict(source={"expr": "x"},
             checks=[{"id": "saint-venant"}]),  # torsion-only check
    ]
    for overrides in cases:
        path = _write_config(tmp_path, **overrides)
        with pytest.raises(ConfigError):
            cli.load_config(path)
    with pytest.raises(ConfigError):
        cli.load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "nj.json"
    bad.write_text("]")
    with pytest.raises(ConfigError):
        cli.load_config(str(bad))
    path = _write_config(tmp_path)
    doc = json.loads((tmp_path / "cfg.json").read_text())
    del doc["output_dir"]
    (tmp_path / "cfg.json").write_text(json.dumps(doc))
    with pytest.raises(ConfigError):
        cli.load_config(path)
    assert cli.load_config(path, output_dir=str(tmp_path / "o")).output_dir


def test_negative_expression_rejected_at_run(tmp_path, capsys):
    path = _write_config(tmp_path, source={"expr": "x - 1"},
                         checks=[{"id": "min-comparison"}])
    assert cli.main(["run", path]) == 2
    assert "negative" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# pipeline runs


def test_run_pipeline_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    path = _write_config(
        tmp_path, refine_levels=1,
        checks=[{"id": "thm1.1", "p": 1.0, "q": 1}, {"id": "saint-venant"},
                {"id": "flux-identity"}, {"id": "level-set-chain"}])
    assert cli.main(["run", path]) == 0
    assert "all checks passed" in capsys.readouterr().out

    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("check_id,lhs,rhs,gap,tol,passed")
    assert any(line.startswith("thm1.1") for line in summary[1:])
    reports = [json.loads(line)
               for line in (out / "reports.jsonl").read_text().splitlines()]
    assert all(rep["passed"] for rep in reports)
    levels = {rep["context"]["level"] for rep in reports}
    assert levels == {0, 1}

    resolved = json.loads((out / "config_resolved.json").read_text())
    assert resolved["refine_levels"] == 1 and resolved["source"] == "torsion"

    plots = out / "plots"
    for name in ("mu_b0_L0.csv", "mu_b0_L1.csv", "usharp_b0_L0.csv",
                 "gap_thm1.1_b0.csv", "gap_saint-venant_b0.csv"):
        lines = (plots / name).read_text().splitlines()
        assert "," in lines[0] and len(lines) > 2
    gap_lines = (plots / "gap_saint-venant_b0.csv").read_text().splitlines()
    hs = [float(line.split(",")[0]) for line in gap_lines[1:]]
    assert hs == sorted(hs, reverse=True) and len(hs) == 2


def test_run_determinism_and_jobs(tmp_path, capsys):
    cfgs = []
    for tag in ("a", "b", "c"):
        cfgs.append(_write_config(
            tmp_path, name=f"cfg_{tag}.json",
            beta=[0.5, 2.0], refine_levels=1,
            checks=[{"id": "thm1.1", "p": 1.0, "q": 1},
                    {"id": "min-comparison"}, {"id": "measure-bound"}],
            output_dir=str(tmp_path / f"out_{tag}")))
    assert cli.main(["run", cfgs[0]]) == 0
    assert cli.main(["run", cfgs[1]]) == 0
    assert cli.main(["run", cfgs[2], "--jobs", "4"]) == 0
    capsys.readouterr()
    ref = (tmp_path / "out_a" / "summary.csv").read_bytes()
    assert (tmp_path / "out_b" / "summary.csv").read_bytes() == ref
    assert (tmp_path / "out_c" / "summary.csv").read_bytes() == ref
    ref_jsonl = (tmp_path / "out_a" / "reports.jsonl").read_bytes()
    assert (tmp_path / "out_c" / "reports.jsonl").read_bytes() == ref_jsonl


def test_run_expression_source(tmp_path, capsys):
    path = _write_config(
        tmp_path, domain={"kind": "disk", "radius": 1.0},
        source={"expr": "1 + 2*exp(-8*((x-0.3)^2 + (y-0.2)^2))"}, h=0.25,
        checks=[{"id": "thm1.1", "p": 1.0, "q": 1},
                {"id": "min-comparison"}, {"id": "measure-bound"}])
    assert cli.main(["run", path]) == 0
    capsys.readouterr()


def test_run_field_source(tmp_path, capsys):
    mesh = msh.generate_domain("square", target_h=0.25, side=1.0)
    mesh_path = str(tmp_path / "mesh.json")
    msh.save_mesh(mesh, mesh_path)
    u = fem.solve_robin_poisson(fem.RobinProblem(mesh=mesh, beta=1.0))
    field_path = str(tmp_path / "field.json")
    fem.save_field(u, field_path, mesh_path)
    path = _write_config(tmp_path, domain={"mesh": mesh_path},
                         source={"field": field_path},
                         checks=[{"id": "min-comparison"}])
    assert cli.main(["run", path]) == 0
    capsys.readouterr()
    path = _write_config(tmp_path, domain={"mesh": mesh_path},
                         source={"field": field_path}, refine_levels=1,
                         checks=[{"id": "min-comparison"}])
    with pytest.raises(ConfigError):
        cli.load_config(path)


def test_run_failing_check_exits_one(tmp_path, capsys):
    # a cone-weighted mesh matched against the unweighted space genuinely
    # violates the isoperimetric comparison once the tolerance tightens
    path = _write_config(
        tmp_path, domain={"kind": "disk", "radius": 1.0, "geometry": "warped",
                          "warp": {"profile": "cone", "c": 0.8}},
        h=0.02, checks=[{"id": "isoperimetric"}])
    assert cli.main(["run", path]) == 1
    out = capsys.readouterr().out
    assert "FAILED isoperimetric" in out
    summary = (tmp_path / "out" / "summary.csv").read_text().splitlines()
    assert summary[1].split(",")[5] == "False"


def test_run_solver_error_exits_three(tmp_path, capsys):
    mesh = msh.generate_domain("square", target_h=0.5, side=1.0)
    sick = msh.MeasuredMesh(mesh.vertices, mesh.triangles, mesh.boundary_edges,
                            density=np.full(len(mesh.vertices), 1e-200))
    mesh_path = str(tmp_path / "sick.json")
    msh.save_mesh(sick, mesh_path)
    path = _write_config(tmp_path, domain={"mesh": mesh_path},
                         checks=[{"id": "min-comparison"}])
    assert cli.main(["run", path]) == 3
    assert "solver:" in capsys.readouterr().err
