"""
Model spaces and their volume profiles
======================================

A model space here is R^n or the unit sphere S^n carrying a conical weight
alpha in (0, 1].  Everything downstream (matched balls, rearrangements,
comparison profiles) is driven by two functions of the radius: the weighted
ball volume I(r) and the isoperimetric profile G(v) giving the least
weighted perimeter among sets of weighted volume v.
"""

import math

import numpy as np

from robinsym import (
    ModelSpace, isoperimetric_profile, profile_convexity_margin,
    radius_for_volume, sphere_area, volume_profile,
)

# the flat plane, the plane with a cone deficit, and the 2-sphere
flat = ModelSpace(kappa=0, n=2)
cone = ModelSpace(kappa=0, n=2, alpha=0.6)
sphere = ModelSpace(kappa=1, n=2)

for space in (flat, cone, sphere):
    print(f"kappa={space.kappa} n={space.n} alpha={space.alpha}: "
          f"I(1) = {volume_profile(space, 1.0):.6f}, "
          f"sphere area at r=1: {sphere_area(space, 1.0):.6f}")

# the flat profile is the classical isoperimetric bound 2*sqrt(pi*v),
# scaled by sqrt(alpha) on the cone
v = 1.0
print("\nG(1):")
print(f"  flat    {isoperimetric_profile(flat, v):.6f} "
      f"(2*sqrt(pi) = {2*math.sqrt(math.pi):.6f})")
print(f"  cone    {isoperimetric_profile(cone, v):.6f} "
      f"(scaled by sqrt(0.6) = {2*math.sqrt(math.pi*0.6):.6f})")
print(f"  sphere  {isoperimetric_profile(sphere, v):.6f}")

# volume inversion: radius of the ball holding a given weighted volume
for vol in (0.5, 2.0):
    r_flat = radius_for_volume(flat, vol)
    r_cone = radius_for_volume(cone, vol)
    print(f"\nball of volume {vol}: flat radius {r_flat:.6f}, "
          f"cone radius {r_cone:.6f}")
    print(f"  check: I(r) = {volume_profile(cone, r_cone):.12f}")

# on the sphere the combination I'(r)^2 - 2p I(r) I''(r) stays nonnegative
# up to the exponent p = n/(2n-2); that margin is what makes the comparison
# machinery monotone.  Beyond the threshold it dips negative.
r = np.linspace(0.0, math.pi - 1e-3, 1001)
for n in (2, 3, 5):
    s = ModelSpace(kappa=1, n=n)
    p_star = n / (2.0 * n - 2.0)
    ok = float(np.min(profile_convexity_margin(s, p_star, r)))
    bad = float(np.min(profile_convexity_margin(s, p_star + 0.2, r)))
    print(f"\nn={n}: margin at p={p_star:.3f} min {ok:.2e}, "
          f"at p={p_star + 0.2:.3f} min {bad:.2e}")
