"""Homogenization cell problems for the wiggly-dissipation and wiggly-energy models.

Both limit bipotentials have the density form

    M0(v, xi) = inf { int_0^1 alpha(y) v^2 / (2 b) + b beta(y) / 2 dy :
                      b > 0, int b = 1 }

with ``alpha = mu``, ``beta = xi^2/mu`` for oscillating mobility and
``alpha = rho``, ``beta = (xi + A sin 2 pi y)^2 / rho`` for the oscillating
energy. Pointwise stationarity gives ``b = |v| sqrt(alpha) / sqrt(beta + 2 lam)``
and the value reduces to a one-dimensional concave maximisation in the
multiplier,

    M0 = max_{lam >= -beta_min/2}  |v| int sqrt(alpha (beta + 2 lam)) dy - lam,

whose maximiser sits on the lower end exactly when part of the mass of
``b`` concentrates on the minimisers of ``beta``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize

from . import _quadrature
from .core import PeriodicCoefficient, SampledBipotential, recenter
from .errors import NonConvergence, RootBracketFailure

__all__ = [
    "WIGGLY_DISSIPATION",
    "WIGGLY_ENERGY",
    "CellProblemSpec",
    "CellSolution",
    "Moments",
    "moments",
    "m0",
    "m0_wiggly_dissipation",
    "m0_wiggly_energy",
    "m0_oracle",
    "bipotential_grid",
    "tilted_bipotential_grid",
    "PhiTable",
    "phi_extract",
    "conjecture_check",
    "joint_convexity_probe",
    "convexity_inequality",
    "riemannian_distances",
    "contact_relation_wiggly_energy",
    "r_eff_wiggly_energy",
    "r_eff_wiggly_energy_slope",
]

WIGGLY_DISSIPATION = "wiggly-dissipation"
WIGGLY_ENERGY = "wiggly-energy"

Scalar = Union[float, Callable[[float], float]]


def _at(f: Scalar, q: float) -> float:
    return float(f(q)) if callable(f) else float(f)


class Moments(NamedTuple):
    mean: float
    root_mean: float
    maximum: float


def moments(mu: PeriodicCoefficient, q: float = 0.0) -> Moments:
    """``(mu_bar, mu_half, mu_max)`` of ``mu(q, .)``.

    ``mu_half = (int sqrt(mu))^2``; Jensen gives ``mu_half <= mu_bar <= mu_max``.
    """
    mx, _ = mu.maximum(q)
    return Moments(mu.mean(q), mu.root_mean_squared(q), mx)


@dataclass(frozen=True, eq=False)
class CellProblemSpec:
    """Which cell problem to solve, and at which frozen state ``q``."""

    model: str
    coefficient: Optional[PeriodicCoefficient] = None
    amplitude: Optional[Scalar] = None
    rho: Optional[Scalar] = None
    q: float = 0.0
    n_y: int = 64
    rtol: float = 1e-10
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.n_y < 64:
            raise ValueError("n_y must be at least 64")
        if self.model == WIGGLY_DISSIPATION:
            if self.coefficient is None:
                raise ValueError("wiggly-dissipation needs a coefficient")
            mx, arg = self.coefficient.maximum(self.q)
            self._cache["mu_max"] = mx
            self._cache["breaks"] = tuple(self.coefficient.breakpoints) + (arg,)
        elif self.model == WIGGLY_ENERGY:
            A, rho = _at(self.amplitude, self.q), _at(self.rho, self.q)
            if not (A > 0 and rho > 0):
                raise ValueError("wiggly-energy needs A(q) > 0 and rho(q) > 0")
            self._cache["A"], self._cache["rho"] = A, rho
        else:
            raise ValueError(f"unknown model {self.model!r}")

    @classmethod
    def wiggly_dissipation(cls, mu: PeriodicCoefficient, q: float = 0.0, **kw):
        return cls(WIGGLY_DISSIPATION, coefficient=mu, q=q, **kw)

    @classmethod
    def wiggly_energy(cls, amplitude: Scalar, rho: Scalar, q: float = 0.0, **kw):
        return cls(WIGGLY_ENERGY, amplitude=amplitude, rho=rho, q=q, **kw)

    @property
    def A(self) -> float:
        return self._cache["A"]

    @property
    def rho_q(self) -> float:
        return self._cache["rho"]

    @property
    def mu_max(self) -> float:
        return self._cache["mu_max"]

    def moments(self) -> Moments:
        if "moments" not in self._cache:
            self._cache["moments"] = moments(self.coefficient, self.q)
        return self._cache["moments"]

    def value(self, v: float, xi: float) -> float:
        return m0(self, v, xi).value

    # density-form data --------------------------------------------------------

    def _density_data(self, xi: float):
        """``(alpha, beta - beta_min, beta_min, breaks)`` for a given force."""
        if self.model == WIGGLY_DISSIPATION:
            mu, q, mx = self.coefficient, self.q, self.mu_max
            xi2 = xi * xi

            def alpha(y):
                return np.asarray(mu(q, y), dtype=float)

            def excess(y):
                return np.maximum(xi2 / alpha(y) - xi2 / mx, 0.0)

            return alpha, excess, xi2 / mx, self._cache["breaks"]
        A, rho = self.A, self.rho_q
        gmin = max(abs(xi) - A, 0.0)
        breaks = [0.25, 0.75]
        if abs(xi) <= A:
            s = np.arcsin(-xi / A) / (2 * np.pi)
            breaks += [np.mod(s, 1.0), np.mod(0.5 - s, 1.0)]

        def alpha(y):
            return np.full(np.shape(y), rho)

        def excess(y):
            g = xi + A * np.sin(2 * np.pi * np.asarray(y, dtype=float))
            return np.maximum((g * g - gmin * gmin) / rho, 0.0)

        return alpha, excess, gmin * gmin / rho, tuple(breaks)


@dataclass(frozen=True, eq=False)
class CellSolution:
    """Minimiser data of one cell problem.

    ``b`` holds the absolutely continuous part of the optimal density on the
    quadrature nodes ``y``; ``concentrated_mass`` is the mass carried by the
    minimisers of ``beta`` (all of it when ``v = 0``).
    """

    value: float
    multiplier: float
    y: Optional[np.ndarray]
    b: Optional[np.ndarray]
    weights: Optional[np.ndarray]
    concentrated_mass: float
    constraint_residual: float
    panels: int = 0

    @property
    def concentrated(self) -> bool:
        return self.concentrated_mass > 0.0


def _solve_on_nodes(a, d, w, absv, beta_min):
    """Maximise the reduced dual on fixed nodes; returns ``(value, t, b, mass)``.

    ``t = lam + beta_min/2 >= 0`` is the shifted multiplier.
    """
    sa = np.sqrt(a)
    scale = max(float(np.max(d)) + beta_min, absv * absv * float(np.max(a)), 1e-300)

    def g(t):
        with np.errstate(divide="ignore"):
            return absv * float(np.dot(w, sa / np.sqrt(d + 2 * t))) - 1.0

    lo = 1e-14 * scale
    if g(lo) <= 0.0:
        t = 0.0
    else:
        hi = scale
        grow = 0
        while g(hi) > 0.0:
            hi *= 2.0
            grow += 1
            if grow > 400 or not np.isfinite(hi):
                raise RootBracketFailure("constraint function has no sign change")
        t = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    s = d + 2 * t
    with np.errstate(divide="ignore"):
        b = absv * sa / np.sqrt(s)
    value = 0.5 * beta_min + absv * float(np.dot(w, np.sqrt(a * s))) - t
    mass = 0.0
    if t == 0.0:
        b = np.where(np.isfinite(b), b, 0.0)
        mass = max(0.0, 1.0 - float(np.dot(w, b)))
    return value, t, b, mass


def m0(spec: CellProblemSpec, v: float, xi: float) -> CellSolution:
    """Cell value ``M0(q, v, xi)`` by the Lagrange reduction.

    Quadrature panels are doubled until the value changes by less than
    ``spec.rtol`` relative. ``v = 0`` is handled in closed form
    (``M0 = beta_min/2``, density fully concentrated).
    """
    alpha, excess, beta_min, breaks = spec._density_data(float(xi))
    absv = abs(float(v))
    if absv == 0.0:
        return CellSolution(0.5 * beta_min, -0.5 * beta_min, None, None, None, 1.0, 0.0, 0)
    b_pts = _quadrature.clean_breaks(breaks)
    panels = max(1, spec.n_y // (_quadrature.GL_ORDER * (b_pts.size - 1)))
    prev = None
    floor = 1e-15 * (absv * absv + xi * xi)
    while True:
        y, w = _quadrature.composite_rule(b_pts, panels)
        a, d = alpha(y), excess(y)
        value, t, b, mass = _solve_on_nodes(a, d, w, absv, beta_min)
        if prev is not None and abs(value - prev) <= spec.rtol * abs(value) + floor:
            break
        if panels >= 2048:
            break
        prev = value
        panels *= 2
    residual = abs(float(np.dot(w, b)) + mass - 1.0)
    return CellSolution(value, t - 0.5 * beta_min, y, b, w, mass, residual, panels)


def m0_wiggly_dissipation(spec: CellProblemSpec, v: float, xi: float) -> CellSolution:
    if spec.model != WIGGLY_DISSIPATION:
        raise ValueError("spec is not a wiggly-dissipation problem")
    return m0(spec, v, xi)


def m0_wiggly_energy(spec: CellProblemSpec, v: float, xi: float) -> CellSolution:
    if spec.model != WIGGLY_ENERGY:
        raise ValueError("spec is not a wiggly-energy problem")
    return m0(spec, v, xi)


# ---------------------------------------------------------------------------
# brute-force oracle


def m0_oracle(spec: CellProblemSpec, v: float, xi: float, n_b: int = 512,
              tol: float = 1e-9, max_sweeps: int = 50_000) -> float:
    """Minimise the discretised density objective directly.

    The unknowns are ``b_i`` on the uniform nodes ``i/n_b`` with mean one.
    Each sweep sorts the partial derivatives and pairs the largest with the
    smallest; every pair re-splits its combined mass exactly (a 1-d convex
    problem solved by safeguarded Newton), which keeps the constraint and
    decreases the objective. Stops when the derivative spread, an upper bound
    on the optimality gap, falls below ``tol`` times the objective.
    """
    if v == 0.0:
        raise ValueError("the oracle needs v != 0")
    y = np.arange(n_b) / n_b
    if spec.model == WIGGLY_DISSIPATION:
        mu = np.asarray(spec.coefficient(spec.q, y), dtype=float)
        A_ = 0.5 * mu * v * v
        C_ = 0.5 * xi * xi / mu
    else:
        g = xi + spec.A * np.sin(2 * np.pi * y)
        A_ = np.full(n_b, 0.5 * spec.rho_q * v * v)
        C_ = 0.5 * g * g / spec.rho_q
    b = np.ones(n_b)
    half = n_b // 2

    def objective(bb):
        return float(np.mean(A_ / bb + C_ * bb))

    for _ in range(max_sweeps):
        d = -A_ / (b * b) + C_
        order = np.argsort(d)
        spread = d[order[-1]] - d[order[0]]
        val = objective(b)
        if spread <= tol * val:
            return val
        i, j = order[:half], order[::-1][:half]
        s = b[i] + b[j]
        Ai, Aj, dc = A_[i], A_[j], C_[i] - C_[j]
        x = b[i].copy()
        lo, hi = np.zeros_like(s), s.copy()
        for _ in range(60):
            r = s - x
            h1 = -Ai / (x * x) + Aj / (r * r) + dc
            h2 = 2 * Ai / x**3 + 2 * Aj / r**3
            lo = np.where(h1 < 0, x, lo)
            hi = np.where(h1 > 0, x, hi)
            step = x - h1 / h2
            bad = (step <= lo) | (step >= hi) | ~np.isfinite(step)
            x_new = np.where(bad, 0.5 * (lo + hi), step)
            if np.all(np.abs(x_new - x) <= 1e-15 * s):
                x = x_new
                break
            x = x_new
        b[i], b[j] = x, s - x
    raise NonConvergence(f"oracle did not converge in {max_sweeps} sweeps")


# ---------------------------------------------------------------------------
# grids


def bipotential_grid(spec: CellProblemSpec, v_grid, xi_grid, workers: int = 1,
                     gap_tolerance: float = 1e-7) -> SampledBipotential:
    return SampledBipotential.from_function(spec.value, v_grid, xi_grid, q=spec.q,
                                            gap_tolerance=gap_tolerance, workers=workers)


def cell_solutions(spec: CellProblemSpec, v_grid, xi_grid, workers: int = 1):
    """All ``CellSolution`` objects of a grid, row-major in ``v``."""
    pts = [(float(v), float(x)) for v in v_grid for x in xi_grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: m0(spec, *p), pts))
    return [m0(spec, *p) for p in pts]


def tilted_bipotential_grid(spec: CellProblemSpec, energy_slope: float, v_grid, xi_grid,
                            workers: int = 1, gap_tolerance: float = 1e-7) -> SampledBipotential:
    """Limit bipotential seen through a tilted family, re-centred afterwards.

    The tilted dissipation functional depends on the tilt force ``eta`` through
    ``N(v, eta) = M0(v, eta - E'(q))`` where ``E`` already contains the tilt;
    re-centring by ``E'(q)`` must give back ``M0`` itself.
    """
    def N(v, eta):
        return spec.value(v, eta - energy_slope)

    return SampledBipotential.from_function(recenter(N, energy_slope), v_grid, xi_grid,
                                            q=spec.q, gap_tolerance=gap_tolerance,
                                            workers=workers)


# ---------------------------------------------------------------------------
# structure of M0 for oscillating mobility


@dataclass(frozen=True)
class PhiTable:
    s: np.ndarray
    phi: np.ndarray
    lower_bound: np.ndarray
    expected: dict

    def endpoint_errors(self) -> dict:
        """Deviation from the closed-form values at s = 0, 1/2, 1."""
        out = {}
        for s0, target in self.expected.items():
            k = int(np.argmin(np.abs(self.s - s0)))
            if abs(self.s[k] - s0) < 1e-14:
                out[s0] = float(abs(self.phi[k] - target))
        return out


def phi_extract(spec: CellProblemSpec, s_grid) -> PhiTable:
    """Profile ``Phi(s)`` with ``M0(v, xi) = (xi^2 + mu_bar^2 v^2) Phi(xi^2/(xi^2 + mu_bar^2 v^2))``.

    Evaluated on the unit ray ``xi = sqrt(s)``, ``v = sqrt(1 - s)/mu_bar``.
    """
    mom = spec.moments()
    s = np.asarray(s_grid, dtype=float)
    if np.any((s < 0) | (s > 1)):
        raise ValueError("s must lie in [0, 1]")
    phi = np.array([spec.value(np.sqrt(1 - t) / mom.mean, np.sqrt(t)) for t in s])
    lower = np.sqrt(s * (1 - s)) / mom.mean
    expected = {
        0.0: mom.root_mean / (2 * mom.mean**2),
        0.5: 1.0 / (2 * mom.mean),
        1.0: 1.0 / (2 * mom.maximum),
    }
    return PhiTable(s, phi, lower, expected)


def conjecture_check(spec: CellProblemSpec, v_grid, xi_grid, workers: int = 1):
    """``M0 - (R_eff + R_eff*)`` on a grid, with ``R_eff = mu_bar v^2/2``.

    Returns ``(max excess, difference matrix)``; the excess should never be
    positive, since the density ``mu/mu_bar`` is an admissible competitor.
    """
    mbar = spec.moments().mean
    M = bipotential_grid(spec, v_grid, xi_grid, workers)
    v = M.v_grid[:, None]
    xi = M.xi_grid[None, :]
    diff = M.values - (0.5 * mbar * v * v + 0.5 * xi * xi / mbar)
    return float(np.max(diff)), diff


def joint_convexity_probe(spec: CellProblemSpec, v0: float = 1.0) -> float:
    """Midpoint test of joint convexity of ``M0``.

    Compares ``M0`` at the midpoint of ``(v0, 0)`` and ``(0, mu_bar v0)`` with the
    mean of the end values; a positive return certifies non-convexity.
    """
    mbar = spec.moments().mean
    left = spec.value(v0, 0.0)
    right = spec.value(0.0, mbar * v0)
    mid = spec.value(0.5 * v0, 0.5 * mbar * v0)
    return mid - 0.5 * (left + right)


def convexity_inequality(mu: PeriodicCoefficient, q: float = 0.0) -> float:
    """``mu_bar - (mu_half + mu_bar^2/mu_max)``; positive means joint convexity fails."""
    m = moments(mu, q)
    return m.mean - (m.root_mean + m.mean**2 / m.maximum)


def riemannian_distances(mu: PeriodicCoefficient, q0: float, q1: float) -> tuple[float, float]:
    """``(D_eff, D_0)``: distances induced by ``mu_bar`` and by ``mu_half``.

    ``D_0 <= D_eff`` always, with equality only for ``y``-independent ``mu``.
    """
    if not q0 < q1:
        raise ValueError("need q0 < q1")
    if not mu.depends_on_q:
        m = moments(mu, q0)
        return (q1 - q0) * np.sqrt(m.mean), (q1 - q0) * np.sqrt(m.root_mean)
    eff, _ = sp_integrate.quad(lambda q: np.sqrt(mu.mean(q)), q0, q1, epsabs=1e-13, epsrel=1e-12)
    low, _ = sp_integrate.quad(lambda q: np.sqrt(mu.root_mean_squared(q)), q0, q1,
                               epsabs=1e-13, epsrel=1e-12)
    return eff, low


# ---------------------------------------------------------------------------
# closed forms for oscillating energy


def contact_relation_wiggly_energy(A: float, rho: float, xi):
    """Rate on the contact set: ``rho v = sign(xi) sqrt(max(xi^2 - A^2, 0))``."""
    xi = np.asarray(xi, dtype=float)
    out = np.sign(xi) * np.sqrt(np.maximum(xi * xi - A * A, 0.0)) / rho
    return float(out) if out.ndim == 0 else out


def r_eff_wiggly_energy(A: float, rho: float, v):
    """``int_0^|v| sqrt(A^2 + (rho w)^2) dw`` in closed form."""
    av = np.abs(np.asarray(v, dtype=float))
    out = 0.5 * (av * np.sqrt(A * A + (rho * av) ** 2) + (A * A / rho) * np.arcsinh(rho * av / A))
    return float(out) if out.ndim == 0 else out


def r_eff_wiggly_energy_slope(A: float, rho: float, v):
    """Derivative of the effective potential for ``v != 0``; jumps from ``-A`` to ``A`` at 0."""
    v = np.asarray(v, dtype=float)
    out = np.sign(v) * np.sqrt(A * A + (rho * v) ** 2)
    return float(out) if out.ndim == 0 else out
