"""
Robin boundary problems with P1 finite elements
===============================================

Two solvers share one assembly: the Poisson problem -div(grad u) = f with
du/dN + beta*u = 0, and the first Robin eigenvalue.  On the unit disk both
have radial references, so the discretization error is directly visible.
"""

import numpy as np

from robinsym import (
    RobinProblem, generate_domain, refine, solve_robin_eigen,
    solve_robin_poisson,
)

# torsion on the unit disk: f = 1, beta = 1 has the closed form
# v(r) = (1 - r^2)/4 + 1/2
mesh = generate_domain("disk", target_h=0.08, radius=1.0)
print("disk torsion error under refinement:")
for _ in range(3):
    u = solve_robin_poisson(RobinProblem(mesh=mesh, beta=1.0))
    r = np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1])
    err = float(np.max(np.abs(u.values - (1.0 - r**2) / 4.0 - 0.5)))
    print(f"  h = {mesh.mesh_size():.4f}: max nodal error {err:.2e}")
    mesh = refine(mesh)

# a general source is any P1 field on the same mesh
square = generate_domain("square", target_h=0.05, side=1.0)
xy = square.vertices
from robinsym import ScalarField
bump = ScalarField(mesh=square, values=np.exp(
    -10.0 * ((xy[:, 0] - 0.7)**2 + (xy[:, 1] - 0.3)**2)))
u = solve_robin_poisson(RobinProblem(mesh=square, beta=0.5, source=bump))
print(f"\nsquare with an offset bump source: max u = {u.values.max():.5f} "
      f"at {tuple(np.round(xy[np.argmax(u.values)], 3))}")

# the first eigenvalue interpolates between the Neumann value 0 and the
# Dirichlet limit (the squared first Bessel root 5.7832 on the disk)
disk = generate_domain("disk", target_h=0.04, radius=1.0)
print("\ndisk Robin eigenvalue vs beta:")
for beta in (0.01, 0.1, 1.0, 10.0, 1e3, 1e6):
    lam, ground = solve_robin_eigen(disk, beta)
    print(f"  beta = {beta:<8g} lambda = {lam:.6f}   "
          f"min/max of ground state {ground.values.min():.4f} / "
          f"{ground.values.max():.4f}")
