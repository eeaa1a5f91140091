"""Scalar gradient-flow integration with an energy-dissipation ledger.

The integrator is an embedded Dormand-Prince 5(4) pair acting on the
augmented state ``(q, int R dt, int R* dt)`` so the two dissipation integrals
are carried at the same order as the state. For oscillating mobilities a
period-resolution cap keeps ``|dq|`` per step below ``eps/points_per_period``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize
from scipy.interpolate import CubicHermiteSpline

from .core import DissipationPotential, GradientSystem1D, PeriodicCoefficient, ScalarFunction
from .errors import StiffnessFailure

__all__ = [
    "StepControl",
    "Trajectory",
    "integrate",
    "limit_flow",
    "edp_residual",
    "WigglyFamily",
    "ConvergenceTable",
    "convergence_study",
    "spring_damper_systems",
]


@dataclass(frozen=True)
class StepControl:
    rtol: float = 1e-8
    atol: float = 1e-10
    max_dt: float = 0.05
    min_dt: float = 1e-12
    points_per_period: int = 50
    first_dt: Optional[float] = None
    max_steps: int = 2_000_000

    def scaled(self, factor: float) -> "StepControl":
        return replace(self, rtol=self.rtol * factor, atol=self.atol * factor)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted time points with states, rates and the running EDP ledger.

    ``energy[i]`` is the (tilted) energy at ``states[i]``; ``int_r`` and
    ``int_rstar`` are cumulative integrals of ``R(q, qdot)`` and
    ``R*(q, -E'(q))`` from the initial time.
    """

    times: np.ndarray
    states: np.ndarray
    rates: np.ndarray
    energy: np.ndarray
    int_r: np.ndarray
    int_rstar: np.ndarray
    implicit_steps: int = 0

    @property
    def dissipation(self) -> np.ndarray:
        return self.int_r + self.int_rstar

    @property
    def running_residual(self) -> np.ndarray:
        return self.energy + self.dissipation - self.energy[0]

    def interpolate(self, t):
        spline = CubicHermiteSpline(self.times, self.states, self.rates)
        return spline(t)

    @classmethod
    def from_curve(cls, times, states, rates, system: GradientSystem1D) -> "Trajectory":
        """Ledger of an arbitrary (not necessarily solving) curve, by trapezoid."""
        t = np.asarray(times, dtype=float)
        q = np.asarray(states, dtype=float)
        v = np.asarray(rates, dtype=float)
        R = system.dissipation
        r = np.array([R.primal(a, b) for a, b in zip(q, v)])
        rs = np.array([R.dual(a, system.force(a)) for a in q])
        e = np.array([system.total_energy(a) for a in q])
        return cls(t, q, v, e,
                   sp_integrate.cumulative_trapezoid(r, t, initial=0.0),
                   sp_integrate.cumulative_trapezoid(rs, t, initial=0.0))

    def sup_distance(self, other: Union["Trajectory", Callable]) -> float:
        """``max_i |q(t_i) - other(t_i)|`` over this trajectory's time points."""
        ref = other.interpolate if isinstance(other, Trajectory) else other
        return float(np.max(np.abs(self.states - ref(self.times))))


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array(_A[6] + (0.0,))
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _rhs(system: GradientSystem1D):
    R = system.dissipation

    def f(q: float) -> np.ndarray:
        xi = system.force(q)
        v = R.kinetic_rate(q, xi)
        return np.array([v, R.primal(q, v), R.dual(q, xi)])

    return f


def _implicit_midpoint(f, y: np.ndarray, dt: float) -> np.ndarray:
    """One implicit-midpoint step; the ledger uses the midpoint rule."""
    q = y[0]

    def res(z):
        return z - q - dt * f(0.5 * (q + z))[0]

    z = optimize.newton(res, q + dt * f(q)[0], tol=1e-15, maxiter=100)
    return y + dt * f(0.5 * (q + z))


def integrate(system: GradientSystem1D, q0: float, T: float,
              ctrl: StepControl = StepControl()) -> Trajectory:
    """Solve ``qdot = d_xi R*(q, -E'(q))`` on ``[0, T]``.

    Raises
    ------
    StiffnessFailure
        If the step controller underflows ``ctrl.min_dt`` and the implicit
        midpoint fallback cannot meet the tolerance either.
    NonInvertibleKineticRelation
        From the dissipation potential when no rate can be computed.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    # non-finite trial stages are rejected by the controller, so don't warn on them
    with np.errstate(over="ignore", invalid="ignore"):
        return _integrate(system, q0, T, ctrl)


def _integrate(system: GradientSystem1D, q0: float, T: float, ctrl: StepControl) -> Trajectory:
    f = _rhs(system)
    res_dq = None
    if system.epsilon is not None:
        res_dq = system.epsilon / ctrl.points_per_period

    y = np.array([float(q0), 0.0, 0.0])
    k1 = f(y[0])
    t = 0.0
    times, states, rates = [0.0], [y[0]], [k1[0]]
    ir, irs = [0.0], [0.0]
    implicit = 0

    def cap(dt, rate):
        dt = min(dt, ctrl.max_dt, T - t)
        if res_dq is not None and rate != 0.0:
            dt = min(dt, res_dq / abs(rate))
        return dt

    if ctrl.first_dt is not None:
        dt = ctrl.first_dt
    else:
        dt = 0.01 * max(abs(y[0]), 1e-3) / max(abs(k1[0]), 1e-12)
    dt = cap(dt, k1[0])

    for _ in range(ctrl.max_steps):
        if t >= T:
            break
        ks = [k1]
        for s in range(1, 7):
            ys = y + dt * sum(a * k for a, k in zip(_A[s], ks))
            ks.append(f(ys[0]))
        K = np.array(ks)
        y_new = y + dt * (_B5[:6] @ K[:6])
        err_vec = dt * (_E @ K)
        sc = ctrl.atol + ctrl.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / sc) ** 2)))
        resolved = res_dq is None or abs(y_new[0] - y[0]) <= res_dq * (1 + 1e-12)
        if err <= 1.0 and resolved:
            t = T if T - (t + dt) <= 1e-14 * T else t + dt
            y = y_new
            k1 = K[6]
            times.append(t)
            states.append(y[0])
            rates.append(k1[0])
            ir.append(y[1])
            irs.append(y[2])
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            dt = cap(dt * fac, k1[0])
            continue
        fac = 0.5 if not resolved else max(0.2, 0.9 * err ** -0.2)
        new_dt = dt * min(fac, 0.9)
        if new_dt >= ctrl.min_dt:
            dt = new_dt
            continue
        # explicit controller underflow: try one implicit midpoint step
        dt = min(ctrl.min_dt, T - t)
        try:
            full = _implicit_midpoint(f, y, dt)
            half = _implicit_midpoint(f, _implicit_midpoint(f, y, 0.5 * dt), 0.5 * dt)
        except (RuntimeError, OverflowError) as exc:
            raise StiffnessFailure(f"implicit fallback failed at t={t}: {exc}") from exc
        sc = ctrl.atol + ctrl.rtol * np.abs(half)
        est = float(np.max(np.abs(half - full) / sc)) / 3.0
        if not est <= 1.0:
            raise StiffnessFailure(f"step underflow at t={t:.6g} (dt < {ctrl.min_dt:g})")
        implicit += 1
        t = t + dt
        y = half
        k1 = f(y[0])
        times.append(t)
        states.append(y[0])
        rates.append(k1[0])
        ir.append(y[1])
        irs.append(y[2])
        dt = cap(2 * dt, k1[0])
    else:
        raise StiffnessFailure(f"step budget {ctrl.max_steps} exhausted at t={t}")

    st = np.array(states)
    energy = np.array([system.total_energy(q) for q in st])
    return Trajectory(np.array(times), st, np.array(rates), energy,
                      np.array(ir), np.array(irs), implicit)


def _as_mobility(mu_bar) -> Callable[[float], float]:
    if isinstance(mu_bar, ScalarFunction):
        return mu_bar.value
    if callable(mu_bar):
        return mu_bar
    c = float(mu_bar)
    return lambda q: c


def limit_flow(mu_bar, energy: ScalarFunction, q0: float, T: float,
               ctrl: StepControl = StepControl(), tilt: Optional[ScalarFunction] = None
               ) -> Trajectory:
    """Homogenised flow ``mu_bar(q) qdot = -E'(q)``."""
    sys = GradientSystem1D(energy, DissipationPotential.quadratic(_as_mobility(mu_bar)), tilt)
    return integrate(sys, q0, T, ctrl)


def edp_residual(traj: Trajectory, system: GradientSystem1D) -> float:
    """``E(q(T)) + int_0^T (R + R*) dt - E(q(0))``.

    Zero (to solver tolerance) on solutions and non-negative on any curve.
    """
    return float(system.total_energy(traj.states[-1]) + traj.int_r[-1] + traj.int_rstar[-1]
                 - system.total_energy(traj.states[0]))


# ---------------------------------------------------------------------------
# epsilon families


@dataclass(frozen=True, eq=False)
class WigglyFamily:
    """Gradient systems with mobility ``mu(q, q/eps)`` and a fixed energy."""

    coefficient: PeriodicCoefficient
    energy: ScalarFunction
    q0: float = 1.0
    tilt: Optional[ScalarFunction] = None
    _cache: dict = field(default_factory=dict, repr=False)

    def system(self, eps: float) -> GradientSystem1D:
        return GradientSystem1D(self.energy, DissipationPotential.wiggly(self.coefficient, eps),
                                self.tilt, eps)

    def mean_mobility(self) -> Callable[[float], float]:
        mu = self.coefficient
        if not mu.depends_on_q:
            if "mean" not in self._cache:
                self._cache["mean"] = mu.mean(0.0)
            c = self._cache["mean"]
            return lambda q: c
        return mu.mean

    def limit_system(self) -> GradientSystem1D:
        return GradientSystem1D(self.energy, DissipationPotential.quadratic(self.mean_mobility()),
                                self.tilt)


@dataclass(frozen=True, eq=False)
class ConvergenceTable:
    eps: np.ndarray
    errors: np.ndarray
    trajectories: tuple
    limit: Trajectory

    def is_decreasing(self, slack: float = 0.05) -> bool:
        """Strictly decreasing, except the last entry may exceed its predecessor by ``slack``."""
        e = self.errors
        if e.size < 2:
            return True
        head = bool(np.all(np.diff(e[:-1]) < 0))
        return head and e[-1] < e[-2] * (1 + slack)

    def rates(self) -> np.ndarray:
        """Empirical orders ``log(e_k/e_{k+1}) / log(eps_k/eps_{k+1})``."""
        return np.log(self.errors[:-1] / self.errors[1:]) / np.log(self.eps[:-1] / self.eps[1:])


def convergence_study(family: WigglyFamily, eps_list: Sequence[float], T: float,
                      ctrl: StepControl = StepControl()) -> ConvergenceTable:
    """Sup-in-time distance between ``q_eps`` and the homogenised solution."""
    eps = np.asarray(eps_list, dtype=float)
    if np.any(np.diff(eps) >= 0):
        raise ValueError("eps list must be decreasing")
    fine = replace(ctrl, max_dt=min(ctrl.max_dt, 1e-3))
    limit = integrate(family.limit_system(), family.q0, T, fine)
    trajs, errs = [], []
    for e in eps:
        tr = integrate(family.system(float(e)), family.q0, T, ctrl)
        trajs.append(tr)
        errs.append(tr.sup_distance(limit))
    return ConvergenceTable(eps, np.array(errs), tuple(trajs), limit)


def spring_damper_systems(k: float = 1.0, mu: float = 1.0):
    """Two gradient structures for ``mu qdot = -k q``: quadratic and exponential.

    The exponential one uses ``phi(q) = k q / (1 - exp(-k q / mu))`` (equal to
    ``mu`` at ``q = 0``), so its kinetic relation yields the same rate.
    """
    energy = ScalarFunction.quadratic(k)

    def phi(q):
        x = k * q / mu
        return mu if x == 0 else k * q / -math.expm1(-x)

    quad = GradientSystem1D(energy, DissipationPotential.quadratic(lambda q: mu))
    expo = GradientSystem1D(energy, DissipationPotential.exponential(phi))
    return quad, expo
