"""Domain types for scalar gradient systems and sampled bipotentials.

A gradient system here is a triple (R, E, R_diss) with a scalar state. The
module also holds the machinery that inspects a sampled bipotential
``M(v, xi)``: Fenchel-Young gaps, contact sets, force-dependent potentials
and the three-way classification into dual sums, contact-equivalent
potentials and force-dependent-only bipotentials.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from . import _quadrature
from .errors import (
    EmptyContactSet,
    InvalidBipotential,
    NonInvertibleKineticRelation,
    NonMonotoneContact,
    OffGrid,
)

__all__ = [
    "ScalarFunction",
    "PeriodicCoefficient",
    "DissipationPotential",
    "GradientSystem1D",
    "SampledBipotential",
    "ContactSet",
    "BipotentialClass",
    "Classification",
    "fenchel_young_gap",
    "tilt_system",
    "extract_contact_set",
    "contact_relation",
    "force_dependent_potential",
    "classify_bipotential",
    "superlinearity_proxy",
    "recenter",
]


# ---------------------------------------------------------------------------
# scalar functions and coefficients


@dataclass(frozen=True, eq=False)
class ScalarFunction:
    """A real function of the state together with its derivative."""

    value: Callable[[float], float]
    derivative: Callable[[float], float]
    label: str = ""
    _negates: Optional["ScalarFunction"] = field(default=None, repr=False)

    def __call__(self, q):
        return self.value(q)

    def __add__(self, other: "ScalarFunction") -> "ScalarFunction":
        f, g = self, other
        return ScalarFunction(
            lambda q: f.value(q) + g.value(q),
            lambda q: f.derivative(q) + g.derivative(q),
            label=f"{f.label}+{g.label}",
        )

    def __neg__(self) -> "ScalarFunction":
        f = self
        return ScalarFunction(
            lambda q: -f.value(q),
            lambda q: -f.derivative(q),
            label=f"-({f.label})",
            _negates=f,
        )

    def is_negation_of(self, other: "ScalarFunction") -> bool:
        return self._negates is other or other._negates is self

    @classmethod
    def from_values(cls, f: Callable[[float], float], label: str = "", step: float = 1e-6):
        """Wrap ``f`` with a central finite-difference derivative."""
        return cls(f, lambda q: (f(q + step) - f(q - step)) / (2 * step), label)

    @classmethod
    def quadratic(cls, k: float = 1.0, label: str = "") -> "ScalarFunction":
        return cls(lambda q: 0.5 * k * q * q, lambda q: k * q, label or f"{k}*q^2/2")

    @classmethod
    def linear(cls, slope: float = 1.0, label: str = "") -> "ScalarFunction":
        return cls(lambda q: slope * q, lambda q: slope + 0.0 * q, label or f"{slope}*q")

    @classmethod
    def zero(cls) -> "ScalarFunction":
        return cls(lambda q: 0.0 * q, lambda q: 0.0 * q, "0")

    def derivative_error(
        self, points: Sequence[float] | None = None, step: float = 1e-5, seed: int = 0
    ) -> float:
        """Max relative mismatch between ``derivative`` and a central difference.

        The relative error is taken against ``max(|f'|, 1)``.
        """
        if points is None:
            points = np.random.default_rng(seed).uniform(-2.0, 2.0, 20)
        worst = 0.0
        for q in points:
            fd = (self.value(q + step) - self.value(q - step)) / (2 * step)
            d = self.derivative(q)
            worst = max(worst, abs(fd - d) / max(abs(d), 1.0))
        return worst


@dataclass(frozen=True, eq=False)
class PeriodicCoefficient:
    """Positive coefficient ``mu(q, y)``, 1-periodic in ``y``.

    ``evaluator`` must broadcast over numpy arrays in ``y``. ``breakpoints``
    lists the points of ``[0, 1]`` where ``mu(q, .)`` has kinks so quadrature
    can split there.
    """

    evaluator: Callable[[float, np.ndarray], np.ndarray]
    lower_bound: float
    upper_bound: float
    breakpoints: tuple[float, ...] = ()
    depends_on_q: bool = True
    label: str = ""

    def __post_init__(self):
        if not (0.0 < self.lower_bound <= self.upper_bound < np.inf):
            raise ValueError("coefficient bounds must satisfy 0 < lower <= upper < inf")
        y = np.linspace(0.0, 1.0, 257)
        for q in (-1.0, 0.0, 0.37, 1.0):
            a = np.asarray(self.evaluator(q, y), dtype=float)
            b = np.asarray(self.evaluator(q, y + 1.0), dtype=float)
            if np.max(np.abs(a - b)) > 1e-12 * max(1.0, np.max(np.abs(a))):
                raise ValueError(f"coefficient {self.label!r} is not 1-periodic in y")
            if np.min(a) < self.lower_bound - 1e-12 or np.max(a) > self.upper_bound + 1e-12:
                raise ValueError(f"coefficient {self.label!r} violates its stated bounds")

    def __call__(self, q, y):
        return self.evaluator(q, y)

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, c: float) -> "PeriodicCoefficient":
        return cls(lambda q, y: c + 0.0 * np.asarray(y, dtype=float), c, c,
                   depends_on_q=False, label=f"const({c})")

    @classmethod
    def cosine(cls, amplitude: float = 0.8, base: float = 1.0,
               q_factor: Callable[[float], float] | None = None,
               q_bounds: tuple[float, float] = (1.0, 1.0)) -> "PeriodicCoefficient":
        """``q_factor(q) * (base + amplitude*cos(2 pi y))``.

        ``q_bounds`` bounds ``q_factor`` over the states of interest.
        """
        if abs(amplitude) >= base:
            raise ValueError("need |amplitude| < base for a positive coefficient")
        if q_factor is None:
            def ev(q, y):
                return base + amplitude * np.cos(2 * np.pi * np.asarray(y, dtype=float))
            return cls(ev, base - abs(amplitude), base + abs(amplitude),
                       depends_on_q=False, label=f"{base}+{amplitude}cos(2pi y)")

        def ev(q, y):
            return q_factor(q) * (base + amplitude * np.cos(2 * np.pi * np.asarray(y, dtype=float)))
        lo, hi = q_bounds
        return cls(ev, lo * (base - abs(amplitude)), hi * (base + abs(amplitude)),
                   label=f"f(q)*({base}+{amplitude}cos(2pi y))")

    @classmethod
    def power(cls, alpha: float = 0.05, gamma: float = 4.0) -> "PeriodicCoefficient":
        """``alpha + |2y - 1|**gamma`` on the unit cell, extended periodically."""

        def ev(q, y):
            yy = np.mod(np.asarray(y, dtype=float), 1.0)
            return alpha + np.abs(2 * yy - 1) ** gamma
        return cls(ev, alpha, alpha + 1.0, breakpoints=(0.5,), depends_on_q=False,
                   label=f"{alpha}+|2y-1|^{gamma}")

    # moments -------------------------------------------------------------------

    def maximum(self, q: float, samples: int = 4097) -> tuple[float, float]:
        """``(max_y mu(q, y), argmax)`` by dense sampling and local refinement."""
        y = np.linspace(0.0, 1.0, samples)
        vals = np.asarray(self.evaluator(q, y), dtype=float)
        k = int(np.argmax(vals))
        best, arg = float(vals[k]), float(y[k])
        h = 1.0 / (samples - 1)
        lo, hi = arg - h, arg + h
        res = optimize.minimize_scalar(
            lambda t: -float(self.evaluator(q, np.array([t]))[0]),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-13},
        )
        if -res.fun > best:
            best, arg = float(-res.fun), float(np.mod(res.x, 1.0))
        return best, arg

    def quadrature_breaks(self, q: float) -> tuple[float, ...]:
        _, arg = self.maximum(q)
        return tuple(self.breakpoints) + (arg,)

    def mean(self, q: float) -> float:
        """Arithmetic cell average of ``mu(q, .)``."""
        return _quadrature.integrate(lambda y: self.evaluator(q, y),
                                     breaks=self.quadrature_breaks(q), rtol=1e-13)

    def root_mean_squared(self, q: float) -> float:
        """``(int sqrt(mu) dy)**2``."""
        s = _quadrature.integrate(lambda y: np.sqrt(self.evaluator(q, y)),
                                  breaks=self.quadrature_breaks(q), rtol=1e-13)
        return s * s

    def harmonic_mean(self, q: float) -> float:
        inv = _quadrature.integrate(lambda y: 1.0 / self.evaluator(q, y),
                                    breaks=self.quadrature_breaks(q), rtol=1e-13)
        return 1.0 / inv


# ---------------------------------------------------------------------------
# dissipation potentials and gradient systems


@dataclass(frozen=True, eq=False)
class DissipationPotential:
    """Primal potential ``R(q, v)`` with its Legendre dual ``R*(q, xi)``.

    ``rate`` is ``d_xi R*`` (the kinetic relation solved for the rate) and
    ``force`` is ``d_v R``; either may be missing, in which case the other is
    inverted numerically.
    """

    primal: Callable[[float, float], float]
    dual: Callable[[float, float], float]
    kind: str = "closed-form"
    rate: Optional[Callable[[float, float], float]] = None
    force: Optional[Callable[[float, float], float]] = None
    mobility: Optional[Callable[[float], float]] = None

    @classmethod
    def quadratic(cls, mobility: Callable[[float], float]) -> "DissipationPotential":
        """``R = m(q) v^2 / 2`` for a positive mobility ``m``."""
        m = mobility
        return cls(
            primal=lambda q, v: 0.5 * m(q) * v * v,
            dual=lambda q, xi: 0.5 * xi * xi / m(q),
            kind="quadratic-with-coefficient",
            rate=lambda q, xi: xi / m(q),
            force=lambda q, v: m(q) * v,
            mobility=m,
        )

    @classmethod
    def exponential(cls, phi: Callable[[float], float]) -> "DissipationPotential":
        """``R = phi(q) (e^v - v - 1)`` with dual ``phi * ((1+s) log(1+s) - s)``, ``s = xi/phi``."""

        def dual(q, xi):
            f = phi(q)
            s = xi / f
            if s <= -1.0:
                return f if s == -1.0 else math.inf
            return f * ((1.0 + s) * math.log1p(s) - s)

        def rate(q, xi):
            s = xi / phi(q)
            if s <= -1.0:
                raise NonInvertibleKineticRelation(f"force {xi} outside the range of d_v R")
            return math.log1p(s)

        return cls(
            primal=lambda q, v: phi(q) * (math.expm1(v) - v),
            dual=dual,
            kind="closed-form",
            rate=rate,
            force=lambda q, v: phi(q) * math.expm1(v),
        )

    @classmethod
    def wiggly(cls, coefficient: PeriodicCoefficient, epsilon: float) -> "DissipationPotential":
        """Quadratic potential with the oscillating mobility ``mu(q, q/eps)``."""
        return cls.quadratic(lambda q: float(coefficient(q, q / epsilon)))

    @classmethod
    def from_samples(cls, v_grid, values) -> "DissipationPotential":
        """State-independent potential given by samples on a rate grid.

        The dual is the discrete Legendre transform; the kinetic relation is
        the piecewise-linear inverse of the sampled slopes.
        """
        from .legendre import SampledConvexFunction, conjugate

        v = np.asarray(v_grid, dtype=float)
        r = np.asarray(values, dtype=float)
        f = SampledConvexFunction(v, r)
        slopes = np.diff(r) / np.diff(v)
        monotone = bool(np.all(np.diff(slopes) >= -1e-12 * max(1.0, np.max(np.abs(slopes)))))
        span = max(abs(slopes[0]), abs(slopes[-1]))
        fstar = conjugate(f, np.linspace(-span, span, 4 * len(v) + 1))
        mids = 0.5 * (v[1:] + v[:-1])

        def rate(q, xi):
            if not monotone:
                raise NonInvertibleKineticRelation("sampled potential has non-monotone slopes")
            return float(np.interp(xi, slopes, mids))

        return cls(
            primal=lambda q, vv: float(np.interp(vv, v, r)),
            dual=lambda q, xi: float(np.interp(xi, fstar.grid, fstar.values)),
            kind="general-sampled",
            rate=rate,
            force=lambda q, vv: float(np.interp(vv, mids, slopes)),
        )

    def kinetic_rate(self, q: float, xi: float) -> float:
        """Rate ``v`` with ``xi in d_v R(q, v)``."""
        if self.rate is not None:
            return self.rate(q, xi)
        if self.force is None:
            raise NonInvertibleKineticRelation("neither rate nor force law is available")
        g = lambda v: self.force(q, v) - xi  # noqa: E731
        lo, hi = -1.0, 1.0
        for _ in range(200):
            if g(lo) <= 0.0 <= g(hi):
                return optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4e-16)
            lo, hi = 2 * lo, 2 * hi
        raise NonInvertibleKineticRelation(f"could not bracket the rate for xi={xi}")

    def check(self, q: float, v_samples, xi_samples, tol: float = 1e-9) -> dict[str, bool]:
        """Evaluate the defining properties on sample grids."""
        v = np.asarray(v_samples, dtype=float)
        xi = np.asarray(xi_samples, dtype=float)
        r = np.array([self.primal(q, vv) for vv in v])
        rs = np.array([self.dual(q, x) for x in xi])
        second = r[2:] - 2 * r[1:-1] + r[:-2]
        return {
            "vanishes_at_zero": abs(self.primal(q, 0.0)) <= tol,
            "nonnegative": bool(np.all(r >= -tol)),
            "midpoint_convex": bool(np.all(second >= -tol)),
            "fenchel_young": bool(np.all(r[:, None] + rs[None, :] - np.outer(v, xi) >= -tol)),
        }


@dataclass(frozen=True, eq=False)
class GradientSystem1D:
    energy: ScalarFunction
    dissipation: DissipationPotential
    tilt: Optional[ScalarFunction] = None
    epsilon: Optional[float] = None

    def total_energy(self, q):
        if self.tilt is None:
            return self.energy(q)
        return self.energy(q) + self.tilt(q)

    def force(self, q):
        """Driving force ``-(E'(q) + F'(q))``."""
        if self.tilt is None:
            return -self.energy.derivative(q)
        return -(self.energy.derivative(q) + self.tilt.derivative(q))

    def rate(self, q):
        return self.dissipation.kinetic_rate(q, self.force(q))


def tilt_system(system: GradientSystem1D, tilt: ScalarFunction) -> GradientSystem1D:
    """Add ``tilt`` to the energy, keeping the very same dissipation object.

    Tilting by ``F`` and then by ``-F`` (built with unary minus) restores the
    original force field exactly.
    """
    if system.tilt is None:
        new = tilt
    elif tilt.is_negation_of(system.tilt):
        new = None
    else:
        new = system.tilt + tilt
    return GradientSystem1D(system.energy, system.dissipation, new, system.epsilon)


def fenchel_young_gap(R: DissipationPotential, q: float, v: float, xi: float) -> float:
    return R.primal(q, v) + R.dual(q, xi) - v * xi


def superlinearity_proxy(v_grid, r_values, xi_grid) -> bool:
    """Finite stand-in for superlinearity on a sampled window.

    ``R(v)/|v|`` at both grid extremes must exceed the largest ``|xi|``, which
    guarantees non-empty subdifferentials inside the window.
    """
    v = np.asarray(v_grid, dtype=float)
    r = np.asarray(r_values, dtype=float)
    bound = np.max(np.abs(xi_grid))
    ends = [i for i in (0, len(v) - 1) if v[i] != 0.0]
    return all(r[i] / abs(v[i]) > bound for i in ends)


# ---------------------------------------------------------------------------
# sampled bipotentials


@dataclass(frozen=True, eq=False)
class SampledBipotential:
    """Values ``M(v, xi)`` on a rectangular grid at a frozen state ``q``.

    ``values[i, j]`` belongs to ``(v_grid[i], xi_grid[j])``. ``gap_tolerance``
    is relative: a pair counts as contact when
    ``M - v*xi <= gap_tolerance * (1 + |v*xi|)``.
    """

    v_grid: np.ndarray
    xi_grid: np.ndarray
    values: np.ndarray
    q: float = 0.0
    gap_tolerance: float = 1e-7

    def __post_init__(self):
        v = np.asarray(self.v_grid, dtype=float)
        xi = np.asarray(self.xi_grid, dtype=float)
        m = np.asarray(self.values, dtype=float)
        if m.shape != (v.size, xi.size):
            raise InvalidBipotential(f"values shape {m.shape} != ({v.size}, {xi.size})")
        if np.any(np.diff(v) <= 0) or np.any(np.diff(xi) <= 0):
            raise InvalidBipotential("grids must be strictly increasing")
        for name, arr in (("v_grid", v), ("xi_grid", xi), ("values", m)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_function(cls, fn: Callable[[float, float], float], v_grid, xi_grid,
                      q: float = 0.0, gap_tolerance: float = 1e-7,
                      workers: int = 1) -> "SampledBipotential":
        """Evaluate ``fn(v, xi)`` on the grid, optionally with a thread pool."""
        v = np.asarray(v_grid, dtype=float)
        xi = np.asarray(xi_grid, dtype=float)

        def row(vv):
            return [fn(vv, x) for x in xi]

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(row, v))
        else:
            rows = [row(vv) for vv in v]
        return cls(v, xi, np.array(rows, dtype=float), q, gap_tolerance)

    def gap(self) -> np.ndarray:
        return self.values - np.outer(self.v_grid, self.xi_grid)

    def tolerance(self) -> np.ndarray:
        return self.gap_tolerance * (1.0 + np.abs(np.outer(self.v_grid, self.xi_grid)))

    def violations(self) -> dict[str, float]:
        """Worst violation of each structural property (positive = violated)."""
        tol = self.tolerance()
        out = {"fenchel_young": float(np.max(-self.gap() - tol))}
        zero = np.flatnonzero(self.v_grid == 0.0)
        if zero.size:
            drop = self.values[zero[0]][None, :] - self.values - tol
            out["minimal_at_zero_rate"] = float(np.max(drop))
        v = self.v_grid
        if v.size >= 3:
            h = np.diff(v)
            slopes = np.diff(self.values, axis=0) / h[:, None]
            second = np.diff(slopes, axis=0) * (0.5 * (h[1:] + h[:-1]))[:, None]
            scale = 1e-9 * max(1.0, float(np.max(np.abs(self.values))))
            out["convex_in_rate"] = float(np.max(-second)) - scale
        return out

    def validate(self) -> None:
        bad = {k: x for k, x in self.violations().items() if x > 0}
        if bad:
            raise InvalidBipotential(f"bipotential violates {sorted(bad)}: {bad}")


@dataclass(frozen=True)
class ContactColumn:
    v: float
    xi_lo: float
    xi_hi: float

    @property
    def xi_mid(self) -> float:
        return 0.5 * (self.xi_lo + self.xi_hi)


@dataclass(frozen=True)
class ContactSet:
    pairs: np.ndarray
    residuals: np.ndarray
    columns: tuple[ContactColumn, ...]
    coverage: float

    def min_dissipation(self) -> float:
        """``min v*xi`` over stored pairs; dissipativity means this is >= -tol."""
        return float(np.min(self.pairs[:, 0] * self.pairs[:, 1]))


def extract_contact_set(M: SampledBipotential) -> ContactSet:
    """All grid pairs where ``M`` meets the Fenchel-Young bound.

    Within a rate column only the connected run of contact points around the
    smallest gap is kept; a convex column has no other.
    """
    gap = M.gap()
    ok = gap <= M.tolerance()
    pairs, res, cols = [], [], []
    for i, v in enumerate(M.v_grid):
        hits = np.flatnonzero(ok[i])
        if hits.size == 0:
            continue
        k = hits[np.argmin(gap[i, hits])]
        lo = k
        while lo - 1 >= 0 and ok[i, lo - 1]:
            lo -= 1
        hi = k
        while hi + 1 < M.xi_grid.size and ok[i, hi + 1]:
            hi += 1
        for j in range(lo, hi + 1):
            pairs.append((v, M.xi_grid[j]))
            res.append(gap[i, j])
        cols.append(ContactColumn(float(v), float(M.xi_grid[lo]), float(M.xi_grid[hi])))
    if not pairs:
        raise EmptyContactSet(
            f"no grid pair within gap tolerance; smallest gap {float(np.min(gap)):.3e}"
        )
    return ContactSet(np.array(pairs), np.array(res), tuple(cols), len(cols) / M.v_grid.size)


def contact_relation(contact: ContactSet, tol: float = 1e-9):
    """Monotone contact relation through the origin.

    Returns ``(v, xi_lo, xi_hi)`` arrays sorted by ``v`` with the origin
    inserted when ``v = 0`` is not a populated column.

    Raises
    ------
    NonMonotoneContact
        If a later column starts below where an earlier one ends, or the
        relation misses the origin.
    """
    v = np.array([c.v for c in contact.columns])
    lo = np.array([c.xi_lo for c in contact.columns])
    hi = np.array([c.xi_hi for c in contact.columns])
    if not np.any(v == 0.0):
        k = int(np.searchsorted(v, 0.0))
        v, lo, hi = np.insert(v, k, 0.0), np.insert(lo, k, 0.0), np.insert(hi, k, 0.0)
    else:
        k = int(np.flatnonzero(v == 0.0)[0])
        if not (lo[k] - tol <= 0.0 <= hi[k] + tol):
            raise NonMonotoneContact(f"zero-rate column contact [{lo[k]}, {hi[k]}] misses xi=0")
    scale = tol * max(1.0, float(np.max(np.abs(hi))), float(np.max(np.abs(lo))))
    jumps = lo[1:] - hi[:-1]
    if np.any(jumps < -scale):
        bad = int(np.argmin(jumps))
        raise NonMonotoneContact(
            f"contact relation decreases between v={v[bad]} and v={v[bad + 1]}"
        )
    return v, lo, hi


def integrate_contact_relation(v, lo, hi) -> np.ndarray:
    """``R_eff(v) = int_0^v xi(w) dw`` by the trapezoid rule.

    On each interval the right end of the left column and the left end of the
    right column are used, so a vertical segment (rate-independent plateau)
    contributes its correct one-sided slopes.
    """
    zero = int(np.flatnonzero(v == 0.0)[0])
    out = np.zeros_like(v)
    for k in range(zero, v.size - 1):
        out[k + 1] = out[k] + 0.5 * (v[k + 1] - v[k]) * (hi[k] + lo[k + 1])
    for k in range(zero, 0, -1):
        out[k - 1] = out[k] - 0.5 * (v[k] - v[k - 1]) * (hi[k - 1] + lo[k])
    return out


def force_dependent_potential(M: SampledBipotential, xi: float) -> np.ndarray:
    """``v -> M(v, xi) - M(0, xi)`` sampled on ``M.v_grid``."""
    j = np.flatnonzero(np.isclose(M.xi_grid, xi, rtol=1e-12, atol=1e-14))
    if j.size == 0:
        raise OffGrid(f"xi={xi} is not on the force grid")
    zero = np.flatnonzero(M.v_grid == 0.0)
    if zero.size == 0:
        raise OffGrid("v = 0 is not on the rate grid")
    col = M.values[:, j[0]]
    return col - col[zero[0]]


class BipotentialClass(str, enum.Enum):
    DUAL_SUM = "DualSum"
    CONTACT_EQUIVALENT = "ContactEquivalent"
    FORCE_DEPENDENT_ONLY = "ForceDependentOnly"


@dataclass(frozen=True)
class Classification:
    kind: BipotentialClass
    v: np.ndarray
    potential: np.ndarray
    contact: ContactSet
    max_mixed_difference: float
    separability_threshold: float
    contact_equivalent: bool
    contact_potential: Optional[np.ndarray]
    detail: str = ""

    @property
    def is_dual_sum(self) -> bool:
        return self.kind is BipotentialClass.DUAL_SUM

    def report(self) -> str:
        dual = "YES" if self.is_dual_sum else "NO"
        return f"{self.kind.value}; DualSum: {dual}"


def mixed_difference(M: SampledBipotential) -> np.ndarray:
    """``M(v,xi) - M(v,xi0) - M(v0,xi) + M(v0,xi0)`` with ``(v0, xi0)`` nearest the origin."""
    i0 = int(np.argmin(np.abs(M.v_grid)))
    j0 = int(np.argmin(np.abs(M.xi_grid)))
    m = M.values
    return m - m[:, [j0]] - m[[i0], :] + m[i0, j0]


def classify_bipotential(M: SampledBipotential, separability_tolerance: float = 1e-8,
                         monotonicity_tolerance: float = 1e-9) -> Classification:
    """Sort a sampled bipotential into dual sum / contact-equivalent / force-dependent.

    The dual-sum test is the vanishing of the mixed second difference over the
    whole grid (relative to ``max|M|``). The contact-equivalence test checks
    that the contact columns form a monotone relation through the origin and
    integrates it. Raises ``EmptyContactSet`` when no contact pair exists.
    """
    contact = extract_contact_set(M)
    mixed = mixed_difference(M)
    threshold = separability_tolerance * max(float(np.max(np.abs(M.values))), 1e-300)
    max_mixed = float(np.max(np.abs(mixed)))
    dual_sum = max_mixed <= threshold

    try:
        cv, lo, hi = contact_relation(contact, monotonicity_tolerance)
        contact_pot = integrate_contact_relation(cv, lo, hi)
        contact_ok = True
        reason = ""
    except NonMonotoneContact as exc:
        cv = contact_pot = None
        contact_ok = False
        reason = str(exc)

    j0 = int(np.argmin(np.abs(M.xi_grid)))
    i0 = int(np.argmin(np.abs(M.v_grid)))
    if dual_sum:
        kind = BipotentialClass.DUAL_SUM
        v = M.v_grid
        pot = M.values[:, j0] - M.values[i0, j0]
    elif contact_ok:
        kind = BipotentialClass.CONTACT_EQUIVALENT
        v, pot = cv, contact_pot
    else:
        kind = BipotentialClass.FORCE_DEPENDENT_ONLY
        v = M.v_grid
        pot = M.values[:, j0] - M.values[i0, j0]
    return Classification(
        kind=kind, v=np.asarray(v), potential=np.asarray(pot), contact=contact,
        max_mixed_difference=max_mixed, separability_threshold=threshold,
        contact_equivalent=contact_ok,
        contact_potential=None if contact_pot is None else np.asarray(contact_pot),
        detail=reason,
    )


def recenter(N: Callable[[float, float], float], energy_slope: float) -> Callable[[float, float], float]:
    """Turn a tilt-indexed functional ``N(v, eta)`` into ``M(v, xi) = N(v, xi + E0'(q))``."""
    return lambda v, xi: N(v, xi + energy_slope)
