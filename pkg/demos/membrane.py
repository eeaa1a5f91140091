"""Thin low-mobility layer versus the transmission-condition limit.

Run with ``python demos/membrane.py``.

The layer ``[0, eps]`` carries mobility ``eps * a_*(x/eps)``. As ``eps``
shrinks, solutions approach a two-domain problem whose interface flux is
``a_eff (u(0+) - u(0-))`` with ``a_eff`` the harmonic mean of ``a_*``.
"""

import math

from edpconv.membrane import (MembraneProblem, cosh_dissipation, effective_membrane_coefficient,
                              membrane_convergence_study, solve_limit_pde,
                              transmission_identity_check)

a_star = lambda y: 1.0 / (1.0 + y)  # noqa: E731
print(f"a_eff = {effective_membrane_coefficient(a_star):.12f} (closed form 2/3)")

prob = MembraneProblem(a_star=a_star, V=lambda x: 0.5 * x, n_bulk=100)
step = lambda x: 1.0 if x < 0 else 0.0  # noqa: E731
tab = membrane_convergence_study(prob, [0.2, 0.1, 0.05], T=0.5, u0=step, snapshots=25, workers=3)
for e, err in zip(tab.eps, tab.errors):
    print(f"eps = {e:<5}  sup_t L1 distance to the limit = {err:.4f}")

lim = solve_limit_pde(prob, step, 0.5)
print(f"limit model: mass drift {lim.max_mass_drift():.1e},"
      f" entropy increase {lim.max_entropy_increase():.1e},"
      f" ledger residual {lim.ledger_residual():.2e} at dt = {lim.dt:.0e}")

print(f"C*(2 log 2) = {cosh_dissipation(2 * math.log(2)):.15f}")
print(f"identity residual at (4, 1): {transmission_identity_check(4.0, 1.0):.1e}")
