"""Thin-layer diffusion and its cosh-type membrane limit in one dimension.

Both models use cell-centred finite volumes on ``[-1, 1]`` with no-flux
ends and implicit Euler in time. Bulk fluxes use the exponentially fitted
(Scharfetter-Gummel) form

    F = a_face / h * (B(-dV) u_R - B(dV) u_L),   B(x) = x / (exp(x) - 1),

which is consistent with ``a (u' + u V')`` and keeps ``exp(-V)`` an exact
discrete steady state. In the limit model the two cells adjacent to ``x=0``
are coupled by the cosh kinetic relation evaluated at those cells; for
equal equilibrium weights this is ``a_eff (u(0+) - u(0-))``.

Sign convention: a face flux ``F`` enters as ``du/dt = dF/dx``, so ``F < 0``
moves mass to the right.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate as sp_integrate
from scipy.linalg import lapack

from ._quadrature import integrate as quad_integrate
from .errors import DegenerateGrid, LinearSolveFailure, PositivityLoss

__all__ = [
    "MembraneProblem",
    "MembraneState",
    "MembraneSeries",
    "EquilibriumDensity",
    "equilibrium_density",
    "effective_membrane_coefficient",
    "solve_layer_pde",
    "solve_limit_pde",
    "interface_flux",
    "cosh_dissipation",
    "cosh_dissipation_slope",
    "dual_dissipation_functional",
    "transmission_identity_check",
    "relative_entropy",
    "l1_distance",
    "MembraneConvergenceTable",
    "membrane_convergence_study",
]

Func = Callable[[float], float]
MIN_LAYER_CELLS = 32


def _value(f) -> Func:
    return getattr(f, "value", f)


def _const(c: float) -> Func:
    return lambda x: c


# ---------------------------------------------------------------------------
# scalar pieces


@dataclass(frozen=True)
class EquilibriumDensity:
    """``w0(x) = exp(-V(x)) / Z`` on an interval."""

    V: Func
    lo: float
    hi: float
    Z: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-np.vectorize(self.V, otypes=[float])(x)) / self.Z
        return out if out.ndim else float(out)


def equilibrium_density(V, domain: tuple[float, float] = (-1.0, 1.0)) -> EquilibriumDensity:
    v = _value(V)
    lo, hi = map(float, domain)
    Z = quad_integrate(lambda x: np.exp(-np.vectorize(v, otypes=[float])(x)), lo, hi,
                       (lo, hi), rtol=1e-13, atol=0.0)
    return EquilibriumDensity(v, lo, hi, Z)


def effective_membrane_coefficient(a_star, breakpoints: Sequence[float] = ()) -> float:
    """Harmonic mean ``1 / int_0^1 1/a_*(y) dy``."""
    a = _value(a_star) if not isinstance(a_star, (int, float)) else _const(float(a_star))
    inv = quad_integrate(lambda y: 1.0 / np.vectorize(a, otypes=[float])(y), 0.0, 1.0,
                         (0.0, *breakpoints, 1.0), rtol=1e-13, atol=0.0)
    return 1.0 / inv


def cosh_dissipation(zeta):
    """``C*(z) = 4 cosh(z/2) - 4``, written to avoid cancellation near 0."""
    z = np.asarray(zeta, dtype=float)
    out = 8.0 * np.sinh(0.25 * z) ** 2
    return out if out.ndim else float(out)


def cosh_dissipation_slope(zeta):
    z = np.asarray(zeta, dtype=float)
    out = 2.0 * np.sinh(0.5 * z)
    return out if out.ndim else float(out)


def transmission_identity_check(a: float, b: float) -> float:
    """``|sqrt(ab) * C*'(log a - log b) - (a - b)|``."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    lhs = math.sqrt(a * b) * cosh_dissipation_slope(math.log(a) - math.log(b))
    return abs(lhs - (a - b))


def interface_flux(u_left: float, u_right: float, a_eff: float,
                   w_left: float = 1.0, w_right: float = 1.0) -> float:
    """Transmission flux ``a_eff * sqrt(u_L u_R) * C*'(xi_L - xi_R)`` with ``xi = -log(u/w)``.

    Equal weights reduce this to ``a_eff * (u_right - u_left)``.
    """
    if w_left == w_right:
        return a_eff * (u_right - u_left)
    r = math.sqrt(w_left / w_right)
    return a_eff * (u_right * r - u_left / r)


def dual_dissipation_functional(u: tuple[Func, Func], xi: tuple[Func, Func], a_minus, a_plus,
                                a_eff: float, n: int = 2001) -> float:
    """Membrane-limit dual dissipation for piecewise-smooth ``u`` and ``xi``.

    ``u`` and ``xi`` are pairs (left piece on ``[-1, 0]``, right piece on
    ``[0, 1]``) so the one-sided values at ``0`` are unambiguous. Bulk
    integrals use the trapezoid rule on ``n`` points per side with
    second-order differences for ``xi'``.
    """
    total = 0.0
    for (lo, hi), uf, xf, af in (((-1.0, 0.0), u[0], xi[0], a_minus),
                                  ((0.0, 1.0), u[1], xi[1], a_plus)):
        x = np.linspace(lo, hi, n)
        uu = np.array([uf(t) for t in x])
        xx = np.array([xf(t) for t in x])
        aa = np.array([_value(af)(t) for t in x])
        dxi = np.gradient(xx, x, edge_order=2)
        total += sp_integrate.trapezoid(0.5 * aa * dxi * dxi * uu, x)
    jump = xi[1](0.0) - xi[0](0.0)
    return float(total + a_eff * math.sqrt(u[0](0.0) * u[1](0.0)) * cosh_dissipation(jump))


def _lambda_b(z: np.ndarray) -> np.ndarray:
    out = np.ones_like(z)
    pos = z > 0
    zp = z[pos]
    out[pos] = zp * np.log(zp) - zp + 1.0
    return out


def relative_entropy(u: np.ndarray, w: np.ndarray, widths: np.ndarray) -> float:
    """Midpoint rule for ``int lambda_B(u/w) w dx`` with ``0 log 0 = 0``."""
    return float(np.sum(_lambda_b(u / w) * w * widths))


def l1_distance(edges_a, u_a, edges_b, u_b) -> float:
    """Exact L1 distance of two piecewise-constant functions on the same interval."""
    ea, eb = np.asarray(edges_a, float), np.asarray(edges_b, float)
    if not (math.isclose(ea[0], eb[0]) and math.isclose(ea[-1], eb[-1])):
        raise ValueError("grids must cover the same interval")
    merged = np.union1d(ea, eb)
    mids = 0.5 * (merged[1:] + merged[:-1])
    ia = np.clip(np.searchsorted(ea, mids) - 1, 0, len(u_a) - 1)
    ib = np.clip(np.searchsorted(eb, mids) - 1, 0, len(u_b) - 1)
    return float(np.sum(np.abs(np.asarray(u_a)[ia] - np.asarray(u_b)[ib]) * np.diff(merged)))


# ---------------------------------------------------------------------------
# problem description and discretisation


@dataclass(frozen=True, eq=False)
class MembraneProblem:
    """Diffusion on ``[-1, 1]`` with mobility ``a_-`` left of 0, ``eps*a_*(x/eps)``
    on ``[0, eps]`` and ``a_+`` right of ``eps``.

    ``mirrored`` describes the reflected problem ``x -> -x`` (layer on
    ``[-eps, 0]``). Its discretisation is the exact reflection of the
    unmirrored one, cell for cell.
    """

    a_minus: Func = field(default_factory=lambda: _const(1.0))
    a_plus: Func = field(default_factory=lambda: _const(1.0))
    a_star: Func = field(default_factory=lambda: _const(1.0))
    V: Func = field(default_factory=lambda: _const(0.0))
    eps: float = 0.1
    n_bulk: int = 200
    n_layer: int = MIN_LAYER_CELLS
    a_lower: float = 1e-8
    mirrored: bool = False
    a_star_breaks: tuple = ()

    def __post_init__(self):
        if not self.eps > 0 or self.eps >= 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.n_layer < MIN_LAYER_CELLS:
            raise DegenerateGrid(f"layer needs at least {MIN_LAYER_CELLS} cells, got {self.n_layer}")
        if self.n_bulk < 2:
            raise DegenerateGrid("need at least two bulk cells per side")

    def mirror(self) -> "MembraneProblem":
        return replace(self, mirrored=not self.mirrored)

    @property
    def a_eff(self) -> float:
        return effective_membrane_coefficient(self.a_star, self.a_star_breaks)

    def _check_lower(self, a: np.ndarray, what: str):
        if np.any(~(a >= self.a_lower)):
            raise ValueError(f"{what} falls below the lower bound {self.a_lower}")

    def _orient(self, edges, a, V):
        if not self.mirrored:
            return edges, a, V
        return -edges[::-1], a[::-1].copy(), V[::-1].copy()

    def _V_cells(self, centers):
        v = _value(self.V)
        return np.array([v(x) for x in centers])

    def layer_grid(self) -> "_Grid":
        e = self.eps
        edges = np.concatenate([
            np.linspace(-1.0, 0.0, self.n_bulk + 1),
            np.linspace(0.0, e, self.n_layer + 1)[1:],
            np.linspace(e, 1.0, self.n_bulk + 1)[1:],
        ])
        c = 0.5 * (edges[1:] + edges[:-1])
        am, ap, ast = _value(self.a_minus), _value(self.a_plus), _value(self.a_star)
        nl = self.n_bulk
        a = np.empty(c.size)
        a[:nl] = [am(x) for x in c[:nl]]
        a[nl:nl + self.n_layer] = [e * ast(x / e) for x in c[nl:nl + self.n_layer]]
        a[nl + self.n_layer:] = [ap(x) for x in c[nl + self.n_layer:]]
        self._check_lower(a[:nl], "a_minus")
        self._check_lower(a[nl + self.n_layer:], "a_plus")
        self._check_lower(a[nl:nl + self.n_layer] / e, "a_star")
        edges, a, V = self._orient(edges, a, self._V_cells(c))
        return _Grid(edges, a, V, None)

    def limit_grid(self) -> "_Grid":
        edges = np.concatenate([np.linspace(-1.0, 0.0, self.n_bulk + 1),
                                np.linspace(0.0, 1.0, self.n_bulk + 1)[1:]])
        c = 0.5 * (edges[1:] + edges[:-1])
        am, ap = _value(self.a_minus), _value(self.a_plus)
        nl = self.n_bulk
        a = np.array([am(x) for x in c[:nl]] + [ap(x) for x in c[nl:]])
        self._check_lower(a, "bulk mobility")
        edges, a, V = self._orient(edges, a, self._V_cells(c))
        # index of the face at x = 0
        return _Grid(edges, a, V, (self.n_bulk, self.a_eff))

    def bulk_step(self) -> float:
        return max(1.0 / self.n_bulk, (1.0 - self.eps) / self.n_bulk)


@dataclass(frozen=True, eq=False)
class _Grid:
    edges: np.ndarray
    a: np.ndarray
    V: np.ndarray
    membrane: Optional[tuple]  # (face index, a_eff) or None

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def equilibrium(self) -> np.ndarray:
        w = np.exp(-(self.V - np.min(self.V)))
        # fsum is order independent, which keeps mirrored grids bit-exact
        return w / math.fsum(w * self.widths)

    def face_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Per interior face, the weights ``(cL, cR)`` with ``F = cR u_R - cL u_L``."""
        h, a, V = self.widths, self.a, self.V
        hl, hr = h[:-1], h[1:]
        a_face = (hl + hr) / (hl / a[:-1] + hr / a[1:])
        dist = 0.5 * (hl + hr)
        dV = V[1:] - V[:-1]
        base = a_face / dist
        cL = base * _bernoulli(dV)
        cR = base * _bernoulli(-dV)
        if self.membrane is not None:
            k, a_eff = self.membrane
            if self.edges.size - 1 - 2 * k != 0:
                raise DegenerateGrid("membrane face must split the grid evenly")
            # mirrored grids keep the interface at the same central face
            w = self.equilibrium()
            wl, wr = w[k - 1], w[k]
            cL[k - 1] = a_eff * math.sqrt(wr / wl)
            cR[k - 1] = a_eff * math.sqrt(wl / wr)
        return cL, cR


def _bernoulli(x: np.ndarray) -> np.ndarray:
    out = np.ones_like(x)
    nz = x != 0
    out[nz] = x[nz] / np.expm1(x[nz])
    return out


# ---------------------------------------------------------------------------
# time stepping


@dataclass(frozen=True, eq=False)
class MembraneState:
    u: np.ndarray
    edges: np.ndarray
    time: float

    @property
    def mass(self) -> float:
        return float(np.sum(self.u * np.diff(self.edges)))


@dataclass(frozen=True, eq=False)
class MembraneSeries:
    """Snapshots plus per-step mass and entropy diagnostics."""

    edges: np.ndarray
    w: np.ndarray
    times: np.ndarray
    snapshots: np.ndarray
    step_times: np.ndarray
    mass: np.ndarray
    entropy: np.ndarray
    dt: float
    dissipation: Optional[np.ndarray] = None

    def ledger_residual(self) -> float:
        """``E(u(T)) + D(T) - E(u(0))`` with ``D`` summed over implicit steps.

        Per face the discrete kinetic relation gives ``R + R* = F * dlog(u/w)``
        for the quadratic bulk and for the cosh interface structure alike.
        Implicit Euler makes the residual non-positive and of order ``dt``.
        """
        return float(self.entropy[-1] + self.dissipation[-1] - self.entropy[0])

    def state(self, k: int = -1) -> MembraneState:
        return MembraneState(self.snapshots[k], self.edges, float(self.times[k]))

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]

    def max_mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass - self.mass[0])) / abs(self.mass[0]))

    def max_entropy_increase(self) -> float:
        d = np.diff(self.entropy)
        return float(max(0.0, np.max(d))) if d.size else 0.0

    def interface_jump(self, k_face: int) -> np.ndarray:
        return self.snapshots[:, k_face] - self.snapshots[:, k_face - 1]


class _Tridiagonal:
    """LU-factorised tridiagonal matrix together with its reversal.

    Solving with both and averaging makes the solve commute exactly with
    reversing the unknowns, which gives bit-exact mirror symmetry.
    """

    def __init__(self, lower, diag, upper):
        self.fwd = self._factor(lower, diag, upper)
        self.rev = self._factor(upper[::-1].copy(), diag[::-1].copy(), lower[::-1].copy())

    @staticmethod
    def _factor(dl, d, du):
        dl, d, du, du2, ipiv, info = lapack.dgttrf(dl, d, du)
        if info != 0:
            raise LinearSolveFailure(f"tridiagonal factorisation failed (info={info})")
        return dl, d, du, du2, ipiv

    @staticmethod
    def _solve(f, b):
        x, info = lapack.dgttrs(*f, b)
        if info != 0:
            raise LinearSolveFailure(f"tridiagonal solve failed (info={info})")
        return x

    def solve(self, b: np.ndarray) -> np.ndarray:
        x1 = self._solve(self.fwd, b)
        x2 = self._solve(self.rev, b[::-1].copy())[::-1]
        return 0.5 * (x1 + x2)


def _assemble(grid: _Grid, dt: float) -> _Tridiagonal:
    h = grid.widths
    cL, cR = grid.face_coefficients()
    # face k between cells k and k+1: cell k gains F, cell k+1 loses F.
    # The two face terms are summed first so the result is reversal symmetric.
    left = np.zeros_like(h)
    right = np.zeros_like(h)
    left[:-1] = dt * cL
    right[1:] = dt * cR
    diag = h + (left + right)
    upper = -dt * cR
    lower = -dt * cL
    return _Tridiagonal(lower, diag, upper)


def _initial(grid: _Grid, u0) -> np.ndarray:
    if isinstance(u0, str):
        if u0 != "equilibrium":
            raise ValueError(f"unknown initial datum {u0!r}")
        return grid.equilibrium()
    if callable(u0):
        u = np.array([float(u0(x)) for x in grid.centers])
    else:
        u = np.asarray(u0, dtype=float).copy()
        if u.shape != grid.a.shape:
            raise ValueError("initial datum has the wrong length")
    if np.any(u < 0):
        raise ValueError("initial datum must be non-negative")
    m = math.fsum(u * grid.widths)
    if not m > 0:
        raise ValueError("initial datum has no mass")
    return u / m


def _run(grid: _Grid, u0, T: float, dt: float, snapshots: int) -> MembraneSeries:
    if not T > 0:
        raise ValueError("T must be positive")
    steps = max(1, math.ceil(T / dt - 1e-9))
    dt = T / steps
    h = grid.widths
    w = grid.equilibrium()
    u = _initial(grid, u0)
    save = np.unique(np.round(np.linspace(0, steps, snapshots + 1)).astype(int))
    solver = _assemble(grid, dt)
    mass = np.empty(steps + 1)
    ent = np.empty(steps + 1)
    mass[0] = np.sum(u * h)
    ent[0] = relative_entropy(u, w, h)
    snaps = [u.copy()] if save[0] == 0 else []
    cL, _ = grid.face_coefficients()
    k_face = cL * w[:-1]
    diss = np.zeros(steps + 1)
    floor = -1e-13
    for n in range(1, steps + 1):
        u_new = solver.solve(u * h)
        if np.min(u_new) < floor * np.max(np.abs(u_new)):
            u_new = _substep(grid, u, dt, floor)
        u = u_new
        mass[n] = np.sum(u * h)
        ent[n] = relative_entropy(u, w, h)
        z = u / w
        with np.errstate(divide="ignore", invalid="ignore"):
            lz = np.log(z)
            rate = k_face * (z[1:] - z[:-1]) * (lz[1:] - lz[:-1])
        diss[n] = diss[n - 1] + dt * float(np.sum(np.where(np.isfinite(rate), rate, 0.0)))
        if n in save:
            snaps.append(u.copy())
    return MembraneSeries(grid.edges, w, save * dt, np.array(snaps),
                          np.arange(steps + 1) * dt, mass, ent, dt, diss)


def _substep(grid: _Grid, u, dt, floor, depth: int = 12):
    """Retry a rejected step as successively halved sub-steps."""
    h = grid.widths
    for k in range(1, depth + 1):
        m = 2 ** k
        solver = _assemble(grid, dt / m)
        v = u.copy()
        ok = True
        for _ in range(m):
            v = solver.solve(v * h)
            if np.min(v) < floor * np.max(np.abs(v)):
                ok = False
                break
        if ok:
            return v
    raise PositivityLoss(f"negative density persists after {2 ** depth} sub-steps")


def _default_dt(prob: MembraneProblem, dt: Optional[float]) -> float:
    return prob.bulk_step() ** 2 if dt is None else dt


def solve_layer_pde(prob: MembraneProblem, u0, T: float, dt: Optional[float] = None,
                    snapshots: int = 100) -> MembraneSeries:
    """Implicit-Euler solution of the thin-layer problem.

    ``u0`` is a callable of ``x``, an array of cell values or the string
    ``"equilibrium"``; it is rescaled to unit mass. The default time step is
    the squared bulk cell width (not the layer width; the scheme is
    unconditionally stable and positivity preserving).
    """
    return _run(prob.layer_grid(), u0, T, _default_dt(prob, dt), snapshots)


def solve_limit_pde(prob: MembraneProblem, u0, T: float, dt: Optional[float] = None,
                    snapshots: int = 100) -> MembraneSeries:
    """Two bulk domains coupled at ``x = 0`` by the effective transmission flux."""
    return _run(prob.limit_grid(), u0, T, _default_dt(prob, dt), snapshots)


# ---------------------------------------------------------------------------
# convergence


@dataclass(frozen=True, eq=False)
class MembraneConvergenceTable:
    eps: np.ndarray
    errors: np.ndarray

    def is_decreasing(self, slack: float = 0.05) -> bool:
        e = self.errors
        if e.size < 2:
            return True
        return bool(np.all(np.diff(e[:-1]) < 0)) and e[-1] < e[-2] * (1 + slack)


def _sup_l1(a: MembraneSeries, b: MembraneSeries) -> float:
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise ValueError("series must share snapshot times")
    return max(l1_distance(a.edges, ua, b.edges, ub) for ua, ub in zip(a.snapshots, b.snapshots))


def membrane_convergence_study(prob: MembraneProblem, eps_list: Sequence[float], T: float,
                               u0, dt: Optional[float] = None, snapshots: int = 100,
                               workers: int = 1) -> MembraneConvergenceTable:
    """``sup_t ||u_eps - u_limit||_1`` over snapshot times for each ``eps``.

    The limit model and every layer run share one time step, so the table
    measures the model error rather than time-discretisation differences.
    """
    eps = np.asarray(eps_list, dtype=float)
    if np.any(np.diff(eps) >= 0):
        raise ValueError("eps list must be decreasing")
    probs = [replace(prob, eps=float(e)) for e in eps]
    step = dt if dt is not None else max(p.bulk_step() for p in probs) ** 2
    limit = solve_limit_pde(prob, u0, T, step, snapshots)

    def one(p):
        return _sup_l1(solve_layer_pde(p, u0, T, step, snapshots), limit)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            errs = list(ex.map(one, probs))
    else:
        errs = [one(p) for p in probs]
    return MembraneConvergenceTable(eps, np.array(errs))
