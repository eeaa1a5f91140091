"""Oscillating mobility: the flow converges, the dissipation structure does not.

Run with ``python demos/wiggly_flow.py``.

Part one integrates ``(1 + 0.8 cos(2 pi q/eps)) qdot = -q`` for shrinking
``eps`` and measures the distance to the averaged flow ``qdot = -q``.
Part two looks at the limit bipotential from the cell problem: it agrees
with the averaged quadratic dissipation on the contact line but lies strictly
below it elsewhere, so it is not a dual sum.
"""

import numpy as np

from edpconv.cell import CellProblemSpec, bipotential_grid, moments
from edpconv.core import PeriodicCoefficient, ScalarFunction, classify_bipotential
from edpconv.flow import WigglyFamily, convergence_study, edp_residual

mu = PeriodicCoefficient.cosine(0.8, 1.0)
family = WigglyFamily(mu, ScalarFunction.quadratic(1.0), q0=1.0)

print("eps      sup|q_eps - q_0|   EDP residual   steps")
table = convergence_study(family, [0.2, 0.1, 0.05, 0.025], T=2.0)
for e, err, tr in zip(table.eps, table.errors, table.trajectories):
    res = edp_residual(tr, family.system(float(e)))
    print(f"{e:<8} {err:<18.3e} {res:<14.1e} {tr.times.size - 1}")
print("empirical orders:", np.round(table.rates(), 3))

m = moments(mu)
print(f"\nmu_bar = {m.mean:.6f}, mu_half = {m.root_mean:.6f}, mu_max = {m.maximum:.6f}")

spec = CellProblemSpec.wiggly_dissipation(mu)
grid = np.linspace(-2, 2, 33)
M = bipotential_grid(spec, grid, grid, workers=4)
c = classify_bipotential(M)
print("classification:", c.report())
print(f"largest mixed difference: {c.max_mixed_difference:.4f}")

v, xi = 1.0, 0.0
print(f"M0({v}, {xi}) = {spec.value(v, xi):.6f}, averaged dual sum gives {0.5 * m.mean:.6f}")
