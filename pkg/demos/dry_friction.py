"""Oscillating energy produces a friction threshold.

Run with ``python demos/dry_friction.py``.

With energy wiggles of amplitude ``A`` the homogenised system does not move
until the force exceeds ``A``. Above the threshold the rate follows
``rho v = sqrt(xi^2 - A^2)``. The script checks both against the numerical
cell problem.
"""

import numpy as np

from edpconv.cell import (CellProblemSpec, contact_relation_wiggly_energy, r_eff_wiggly_energy,
                          r_eff_wiggly_energy_slope)

A, rho = 1.0, 1.0
spec = CellProblemSpec.wiggly_energy(A, rho)

print("  xi      v(xi)     M0 - v xi")
for xi in np.linspace(-3, 3, 13):
    v = contact_relation_wiggly_energy(A, rho, xi)
    print(f"{xi:6.2f}  {v:8.4f}  {spec.value(v, xi) - v * xi:10.2e}")

for w in (1e-6, 0.5, 1.0):
    print(f"R_eff({w}) = {r_eff_wiggly_energy(A, rho, w):.6f},"
          f" slope {r_eff_wiggly_energy_slope(A, rho, w):.6f}")
print("the slope tends to A at 0+, so R_eff has a kink like dry friction")
