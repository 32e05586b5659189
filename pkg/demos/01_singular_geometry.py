"""Singular-limit geometry of the FitzHugh-Nagumo oscillator.

Builds the critical manifold, the singular periodic orbit and its phase
map, then shows that isochrons are vertical: every point at the same
height ``z`` in the same basin shares one phase.
"""

import numpy as np

from relaxprc import (
    Branch, OnSeparatrix, basin_of, branch_solve, build_orbit, fitzhugh_nagumo,
    fold_points, orbit_point, phase_of,
)

sys = fitzhugh_nagumo()          # a=0.7, b=0.8, I=1
geom = fold_points(sys)
orbit = build_orbit(geom)

print("lower fold  ", geom.lower_fold)
print("upper fold  ", geom.upper_fold)
print("jump lands at", branch_solve(geom, geom.z_minus, Branch.UPPER), "and",
      branch_solve(geom, geom.z_plus, Branch.LOWER))
print(f"T_s0 = {orbit.period_slow:.12f}   theta_plus = {orbit.theta_plus:.12f}")

# walk once around the orbit
for th in np.linspace(0, 2 * np.pi, 9)[:-1]:
    x, z, br = orbit_point(orbit, th)
    print(f"theta={th:5.3f}  ({x:+.4f}, {z:.4f})  {br.value}")

# a horizontal line through the bistable range crosses exactly two isochrons
z = 1.0
seen = {}
for x in np.linspace(-2.5, 2.5, 21):
    try:
        seen.setdefault(basin_of(geom, x, z).value, set()).add(round(phase_of(orbit, x, z), 12))
    except OnSeparatrix:
        print(f"x={x:+.2f} sits on the separatrix, phase undefined")
print("phases along z=1:", {k: sorted(v) for k, v in seen.items()})
