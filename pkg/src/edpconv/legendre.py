"""Discrete Legendre-Fenchel transforms on one-dimensional grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateGrid, OutOfDomain

__all__ = ["SampledConvexFunction", "conjugate", "biconjugate_check", "subdifferential",
           "lower_hull"]


@dataclass(frozen=True, eq=False)
class SampledConvexFunction:
    """Samples of a function on a sorted grid.

    ``truncated`` marks dual points whose supremum was attained at the edge of
    the primal window; their values under-estimate the true transform.
    """

    grid: np.ndarray
    values: np.ndarray
    domain_note: str = "primal-rates"
    truncated: Optional[np.ndarray] = None

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        f = np.asarray(self.values, dtype=float)
        if g.shape != f.shape or g.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", f)

    @property
    def scale(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        return max(1.0, float(np.max(np.abs(finite)))) if finite.size else 1.0

    def is_convex(self, tol: float = 1e-10) -> bool:
        slopes = np.diff(self.values) / np.diff(self.grid)
        h = 0.5 * (self.grid[2:] - self.grid[:-2])
        return bool(np.all(np.diff(slopes) * h >= -tol * self.scale))

    def __call__(self, x):
        return np.interp(x, self.grid, self.values)


def lower_hull(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of sorted points (monotone chain)."""
    hull: list[int] = []
    for k in range(x.size):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j when it lies on or above the chord i -> k
            if (f[j] - f[i]) * (x[k] - x[i]) >= (f[k] - f[i]) * (x[j] - x[i]):
                hull.pop()
            else:
                break
        hull.append(k)
    return np.asarray(hull, dtype=int)


def conjugate(f: SampledConvexFunction, dual_grid=None) -> SampledConvexFunction:
    """``f*(xi) = max_v (xi*v - f(v))`` over the grid.

    The maximiser index is non-decreasing in ``xi``, so after taking the lower
    hull one pointer sweep over the sorted dual grid suffices. The default dual
    grid spans the range of difference quotients of ``f`` with the same number
    of points.
    """
    x, y = f.grid, f.values
    finite = np.isfinite(y)
    if np.count_nonzero(finite) < 2:
        raise DegenerateGrid("need at least two finite samples")
    x, y = x[finite], y[finite]
    if dual_grid is None:
        q = np.diff(y) / np.diff(x)
        dual_grid = np.linspace(q.min(), q.max(), x.size)
    xi = np.asarray(dual_grid, dtype=float)
    order = np.argsort(xi, kind="stable")

    h = lower_hull(x, y)
    hx, hy = x[h], y[h]
    slopes = np.diff(hy) / np.diff(hx)
    out = np.empty_like(xi)
    trunc = np.zeros(xi.shape, dtype=bool)
    eps = 1e-12 * max(1.0, float(np.max(np.abs(slopes))) if slopes.size else 1.0)
    k = 0
    for idx in order:
        s = xi[idx]
        while k < slopes.size and slopes[k] < s:
            k += 1
        out[idx] = s * hx[k] - hy[k]
        if slopes.size == 0 or s > slopes[-1] + eps or s < slopes[0] - eps:
            trunc[idx] = True
    note = "dual-forces" if f.domain_note == "primal-rates" else "primal-rates"
    return SampledConvexFunction(xi, out, note, trunc)


def biconjugate_check(f: SampledConvexFunction) -> float:
    """``max |f** - f|`` over the grid of ``f``; the distance to the convex hull."""
    fss = conjugate(conjugate(f), f.grid)
    return float(np.max(np.abs(fss.values - f.values)))


def subdifferential(f: SampledConvexFunction, x: float) -> tuple[float, float]:
    """One-sided difference quotients around ``x``.

    On a grid point the slopes of the two adjacent cells are returned; at a
    window edge the missing side is infinite. Inside a cell both ends equal
    the cell slope.
    """
    g, v = f.grid, f.values
    if not (g[0] <= x <= g[-1]):
        raise OutOfDomain(f"x={x} outside [{g[0]}, {g[-1]}]")
    slopes = np.diff(v) / np.diff(g)
    k = int(np.searchsorted(g, x))
    on_grid = k < g.size and np.isclose(g[k], x, rtol=0, atol=1e-12 * max(1.0, abs(x)))
    if not on_grid:
        s = float(slopes[k - 1])
        return s, s
    left = float(slopes[k - 1]) if k > 0 else -np.inf
    right = float(slopes[k]) if k < slopes.size else np.inf
    return left, right
