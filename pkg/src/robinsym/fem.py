"""P1 finite elements for the Robin problems on a measured mesh.

Assembly produces the stiffness, interior mass, boundary mass, and load of
the weak Robin formulation.  In two dimensions the Dirichlet integrand is
conformally invariant, so for the flat and stereographic charts the
stiffness is the plain chart stiffness; warped charts carry the full
sqrt(det g) g^{-1} weight, frozen per triangle at the centroid.  Mass and
load use the density-weighted edge-midpoint rule, the boundary mass a
2-point Gauss rule per edge; both are exact for linear fields with linear
densities.
"""

import json
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, splu

from .mesh import (
    MeasuredMesh,
    MeshFormatError,
    ScalarField,
    load_mesh,
    warped_metric_tensors,
)

_DIRECT_DOF_CAP = 20_000
_EIGEN_MAX_ITERS = 400


class SingularGeometryError(ValueError):
    """A triangle's metric determinant underflows; the chart is unusable."""


class SolverConvergenceError(RuntimeError):
    """The iterative solver missed its tolerance within the iteration cap."""


class EigenSignError(RuntimeError):
    """The computed ground state changes sign (discretization failure)."""


@dataclass(frozen=True)
class RobinProblem:
    """Robin boundary problem data; ``source=None`` is the unit torsion source."""

    mesh: MeasuredMesh
    beta: float
    source: ScalarField | None = None

    def __post_init__(self):
        if not (self.beta > 0.0) or not math.isfinite(self.beta):
            raise ValueError(f"beta must be positive and finite, got {self.beta}")
        if self.source is not None:
            if self.source.mesh is not self.mesh:
                raise ValueError("source field lives on a different mesh")
            vals = self.source.values
            scale = float(np.max(np.abs(vals))) or 1.0
            if float(np.min(vals)) < -1e-12 * scale:
                raise ValueError("source must be non-negative")
            if float(np.max(vals)) <= 0.0:
                raise ValueError("source must not vanish identically")

    def source_values(self) -> np.ndarray:
        if self.source is None:
            return np.ones(len(self.mesh.vertices))
        return np.maximum(self.source.values, 0.0)


@dataclass(frozen=True)
class AssembledSystem:
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    boundary_mass: sp.csr_matrix
    load: np.ndarray

    def robin_matrix(self, beta: float) -> sp.csr_matrix:
        return (self.stiffness + beta * self.boundary_mass).tocsr()


def _check_metric(mesh: MeasuredMesh):
    # per-triangle density is sqrt(det g) up to the conformal square; a
    # vanishing value is the underflow signal either way
    rho = mesh.centroid_density()
    if not np.all(np.isfinite(rho)) or float(np.min(rho)) < 1e-150:
        k = int(np.argmin(rho))
        raise SingularGeometryError(
            f"triangle {k}: metric determinant underflows (density {rho[k]:.3e})"
        )


def assemble(problem: RobinProblem) -> AssembledSystem:
    """Stiffness, mass, boundary mass, and load of the weak Robin form."""
    mesh = problem.mesh
    _check_metric(mesh)
    verts, tris = mesh.vertices, mesh.triangles
    nv = len(verts)
    p = verts[tris]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]  # 2 * chart area, > 0
    area = 0.5 * det

    # constant P1 gradients: grad phi_i = rot90(opposite edge) / det
    grads = np.empty((len(tris), 3, 2))
    for i in range(3):
        a, b = p[:, (i + 1) % 3], p[:, (i + 2) % 3]
        grads[:, i, 0] = (a[:, 1] - b[:, 1]) / det
        grads[:, i, 1] = (b[:, 0] - a[:, 0]) / det

    if mesh.geometry == "warped":
        centroids = np.mean(p, axis=1)
        weight = warped_metric_tensors(mesh.warp, centroids)
        gw = np.einsum("tia,tab->tib", grads, weight)
    else:
        gw = grads  # conformal invariance of the 2-D Dirichlet integral
    k_local = area[:, None, None] * np.einsum("tia,tja->tij", gw, grads)

    dens = mesh.density[tris]
    f = problem.source_values()[tris]
    rho_mid = 0.5 * (dens + np.roll(dens, -1, axis=1))  # midpoints 01, 12, 20
    f_mid = 0.5 * (f + np.roll(f, -1, axis=1))
    # basis values at the midpoints: phi_i is 1/2 on its two adjacent ones
    phi = 0.5 * np.array([[1.0, 0.0, 1.0],
                          [1.0, 1.0, 0.0],
                          [0.0, 1.0, 1.0]])  # [vertex, midpoint]
    m_local = (area[:, None, None] / 3.0) * np.einsum(
        "im,jm,tm->tij", phi, phi, rho_mid)
    load_local = (area[:, None] / 3.0) * np.einsum("im,tm->ti", phi, f_mid * rho_mid)

    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    stiffness = sp.coo_matrix((k_local.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    mass = sp.coo_matrix((m_local.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    load = np.zeros(nv)
    np.add.at(load, tris.ravel(), load_local.ravel())

    # boundary mass, 2-point Gauss per edge on the arclength parameter
    edges = mesh.boundary_edges
    lengths = mesh.boundary_chart_lengths()
    sigma = mesh.boundary_density
    t_nodes = (0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0))
    b00 = np.zeros(len(edges))
    b01 = np.zeros(len(edges))
    b11 = np.zeros(len(edges))
    for t in t_nodes:
        st = sigma[:, 0] * (1.0 - t) + sigma[:, 1] * t
        b00 += 0.5 * (1.0 - t) ** 2 * st
        b01 += 0.5 * (1.0 - t) * t * st
        b11 += 0.5 * t**2 * st
    br = np.concatenate([edges[:, 0], edges[:, 0], edges[:, 1], edges[:, 1]])
    bc = np.concatenate([edges[:, 0], edges[:, 1], edges[:, 0], edges[:, 1]])
    bv = np.concatenate([lengths * b00, lengths * b01, lengths * b01, lengths * b11])
    boundary_mass = sp.coo_matrix((bv, (br, bc)), shape=(nv, nv)).tocsr()

    return AssembledSystem(stiffness=stiffness, mass=mass,
                           boundary_mass=boundary_mass, load=load)


def _solve_spd(A: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    """Jacobi-preconditioned CG at 1e-10 relative residual, direct fallback."""
    n = A.shape[0]
    diag = A.diagonal()
    precond = sp.diags(1.0 / diag)
    maxiter = int(50 * math.sqrt(n)) + 1
    x, info = cg(A, b, rtol=1e-10, atol=0.0, maxiter=maxiter, M=precond)
    if info == 0:
        return x
    if n < _DIRECT_DOF_CAP:
        return splu(A.tocsc()).solve(b)
    raise SolverConvergenceError(
        f"CG missed 1e-10 within {maxiter} iterations on {n} dof"
    )


def solve_robin_poisson(problem: RobinProblem) -> ScalarField:
    """Weak solution of -div(grad u) = f with the Robin boundary condition."""
    system = assemble(problem)
    u = _solve_spd(system.robin_matrix(problem.beta), system.load)
    if float(np.min(u)) <= 0.0:
        warnings.warn("solution is not strictly positive; mesh too coarse",
                      RuntimeWarning, stacklevel=2)
    return ScalarField(mesh=problem.mesh, values=u)


def solve_robin_eigen(mesh: MeasuredMesh, beta: float):
    """Smallest Robin eigenpair by inverse power iteration, zero shift.

    Returns (lambda, eigenfield) with the field positive and normalized to
    max = 1; eigenvalue tolerance 1e-9 relative.
    """
    problem = RobinProblem(mesh=mesh, beta=beta)
    system = assemble(problem)
    A = system.robin_matrix(beta).tocsc()
    M = system.mass
    n = A.shape[0]
    if n < _DIRECT_DOF_CAP:
        solver = splu(A).solve
    else:
        A_csr = A.tocsr()
        solver = lambda rhs: _solve_spd(A_csr, rhs)

    x = np.ones(n)
    x /= math.sqrt(float(x @ (M @ x)))
    lam = float(x @ (A @ x))
    for _ in range(_EIGEN_MAX_ITERS):
        y = solver(M @ x)
        y /= math.sqrt(float(y @ (M @ y)))
        lam_new = float(y @ (A @ y)) / float(y @ (M @ y))
        x = y
        if abs(lam_new - lam) <= 1e-9 * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    else:
        raise SolverConvergenceError(
            f"inverse power iteration missed 1e-9 in {_EIGEN_MAX_ITERS} rounds"
        )

    if x[int(np.argmax(np.abs(x)))] < 0.0:
        x = -x
    # stiff beta on non-acute meshes dips a few boundary values slightly
    # negative (the Robin block is not an M-matrix); that shrinks under
    # refinement, while a genuinely signed state is negative at unit scale
    if float(np.min(x)) < -1e-3 * float(np.max(x)):
        raise EigenSignError("computed ground state changes sign")
    x = np.maximum(x, 0.0)
    x /= float(np.max(x))
    return lam, ScalarField(mesh=mesh, values=x)


# ---------------------------------------------------------------------------
# field export


def save_field(field: ScalarField, path: str, mesh_ref: str):
    """JSON form {"mesh_ref": ..., "values": [...]}; floats round-trip."""
    obj = {"mesh_ref": str(mesh_ref),
           "values": [float(v) for v in field.values]}
    with open(path, "w") as fh:
        json.dump(obj, fh)


def load_field(path: str) -> ScalarField:
    """Read a field written by :func:`save_field`; mesh_ref resolves
    relative to the field file's directory."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MeshFormatError(f"unreadable field file {path}: {exc}") from exc
    if not isinstance(obj, dict) or "mesh_ref" not in obj or "values" not in obj:
        raise MeshFormatError("field file needs 'mesh_ref' and 'values'")
    ref = obj["mesh_ref"]
    if not os.path.isabs(ref):
        ref = os.path.join(os.path.dirname(os.path.abspath(path)), ref)
    mesh = load_mesh(ref)
    values = np.asarray(obj["values"], dtype=float)
    return ScalarField(mesh=mesh, values=values)
