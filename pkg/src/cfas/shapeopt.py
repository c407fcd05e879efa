"""Best rectangle / cuboid under a measure budget and per-axis limits.

The closed-form HSP is increasing in every side (for u0 > 3), so the budget is
active unless the whole limiting box already fits.  The optimum is then the
least compact admissible shape: the longest limits are used in full and the
shortest side absorbs the budget.  Grid searches are provided as independent
checks.
"""

import math
from dataclasses import dataclass

import numpy as np

from .analytic import closed_form_value

DEFAULT_STEPS = 4000


def _positive(**kwargs):
    for name, v in kwargs.items():
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class ShapeConstraints2D:
    """Area budget S and side limits L1, L2 (wavelengths)."""

    S: float
    L1: float
    L2: float

    def __post_init__(self):
        _positive(S=self.S, L1=self.L1, L2=self.L2)

    @property
    def limits(self):
        return (self.L1, self.L2)


@dataclass(frozen=True)
class ShapeConstraints3D:
    """Volume budget V and side limits L1, L2, L3 (wavelengths)."""

    V: float
    L1: float
    L2: float
    L3: float

    def __post_init__(self):
        _positive(V=self.V, L1=self.L1, L2=self.L2, L3=self.L3)

    @property
    def limits(self):
        return (self.L1, self.L2, self.L3)


def _solve_sorted(budget, limits):
    # limits ascending; fill every axis but the shortest, which takes the rest
    full = math.prod(limits)
    if budget >= full:
        return list(limits)
    rest = math.prod(limits[1:])
    # budget < full implies budget / rest < limits[0], so this is always feasible
    return [budget / rest] + list(limits[1:])


def _solve(budget, limits):
    order = sorted(range(len(limits)), key=lambda i: (limits[i], i))
    sides_sorted = _solve_sorted(budget, [limits[i] for i in order])
    out = [0.0] * len(limits)
    for pos, axis in enumerate(order):
        out[axis] = sides_sorted[pos]
    return tuple(out)


def optimal_rectangle(c):
    """Optimal (T1, T2) in the caller's axis order."""
    return _solve(c.S, c.limits)


def optimal_cuboid(c):
    """Optimal (T1, T2, T3) in the caller's axis order."""
    return _solve(c.V, c.limits)


def is_feasible(sides, c, tol=1e-12):
    budget = c.S if isinstance(c, ShapeConstraints2D) else c.V
    if any(t < -tol for t in sides):
        return False
    if any(t > L * (1 + tol) for t, L in zip(sides, c.limits)):
        return False
    return math.prod(sides) <= budget * (1 + tol)


def _first_argmax(values):
    # np.argmax returns the first maximum, i.e. the smallest grid index
    idx = int(np.argmax(values))
    return idx, float(values.flat[idx])


def brute_force_rectangle(c, lambda2, u0, steps=DEFAULT_STEPS):
    """Grid search over T2 with T1 = min(L1, S / T2).

    Returns ``(T1, T2, value)``; ties resolve to the smallest T2.
    """
    if steps < 100:
        raise ValueError("the grid needs at least 100 steps")
    t2 = np.arange(steps + 1) * (c.L2 / steps)
    with np.errstate(divide="ignore"):
        t1 = np.minimum(c.L1, c.S / t2)
    values = closed_form_value((t1, t2), lambda2, u0)
    i, best = _first_argmax(values)
    return float(t1[i]), float(t2[i]), best


def brute_force_cuboid(c, lambda2, u0, steps=DEFAULT_STEPS):
    """Grid search over (T2, T3) with T1 = min(L1, V / (T2 T3)).

    Returns ``(T1, T2, T3, value)``; ties resolve to the smallest T2, then T3.
    Rows are processed one T2 value at a time to bound memory.
    """
    if steps < 100:
        raise ValueError("the grid needs at least 100 steps")
    t2_grid = np.arange(steps + 1) * (c.L2 / steps)
    t3 = np.arange(steps + 1) * (c.L3 / steps)
    best = (-math.inf, None)
    for t2 in t2_grid:
        with np.errstate(divide="ignore"):
            t1 = np.minimum(c.L1, c.V / (t2 * t3))
        values = closed_form_value((t1, t2, t3), lambda2, u0)
        j, v = _first_argmax(values)
        if v > best[0]:
            best = (v, (float(t1[j]), float(t2), float(t3[j])))
    value, (b1, b2, b3) = best
    return b1, b2, b3, value
