"""Linear and mixed-integer linear programming used by set predicates,
hulls, rescaling, closest points, and fault-diagnosis input design.

The solvers are deterministic; identical programs give identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import NodeBudgetExceeded, NumericalFailure
from .intervals import IntervalVector

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}

DEFAULT_NODE_BUDGET = 10**5


def _as_matrix(m, ncols):
    if m is None:
        return np.zeros((0, ncols))
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return m


@dataclass(frozen=True)
class LinearProgram:
    """min objective @ x  s.t.  A_eq x = b_eq, A_ub x <= b_ub, x in bounds."""

    objective: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    bounds: IntervalVector | None = None  # None means all-free

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        object.__setattr__(self, "objective", c)
        n = c.shape[0]
        for name in ("A_eq", "A_ub"):
            m = getattr(self, name)
            if m is not None:
                m = _as_matrix(m, n)
                if m.shape[1] != n:
                    raise ValueError(f"{name} has {m.shape[1]} columns, expected {n}")
                object.__setattr__(self, name, m)
        for mn, bn in (("A_eq", "b_eq"), ("A_ub", "b_ub")):
            m, b = getattr(self, mn), getattr(self, bn)
            if (m is None) != (b is None):
                raise ValueError(f"{mn} and {bn} must be given together")
            if b is not None:
                b = np.asarray(b, dtype=float).ravel()
                if b.shape[0] != m.shape[0]:
                    raise ValueError(f"{bn} length {b.shape[0]} != {mn} rows {m.shape[0]}")
                object.__setattr__(self, bn, b)
        if self.bounds is not None and self.bounds.dim != n:
            raise ValueError(f"bounds dim {self.bounds.dim} != {n} variables")

    @property
    def nvars(self):
        return self.objective.shape[0]


@dataclass(frozen=True)
class MixedIntegerProgram:
    """A LinearProgram plus a set of variable indices restricted to {0, 1}."""

    lp: LinearProgram
    binary_indices: tuple = ()

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.binary_indices)))
        if idx and (idx[0] < 0 or idx[-1] >= self.lp.nvars):
            raise ValueError("binary index out of range")
        object.__setattr__(self, "binary_indices", idx)


@dataclass(frozen=True)
class LPResult:
    status: str
    x: np.ndarray | None = None
    value: float | None = None


def _scipy_bounds(lp):
    if lp.bounds is None:
        return [(None, None)] * lp.nvars
    lo, hi = lp.bounds.lo, lp.bounds.hi
    return [
        (None if np.isneginf(l) else l, None if np.isposinf(h) else h)
        for l, h in zip(lo, hi)
    ]


def solve_lp(lp: LinearProgram) -> LPResult:
    """Solve the LP; statuses are trusted (never silently wrong).

    Returns LPResult with status OPTIMAL (x, value set), INFEASIBLE, or
    UNBOUNDED.  Raises NumericalFailure when the backend cannot certify
    any of the three.
    """
    res = scipy.optimize.linprog(
        lp.objective,
        A_ub=lp.A_ub if lp.A_ub is not None and lp.A_ub.size else None,
        b_ub=lp.b_ub if lp.b_ub is not None and lp.b_ub.size else None,
        A_eq=lp.A_eq if lp.A_eq is not None and lp.A_eq.size else None,
        b_eq=lp.b_eq if lp.b_eq is not None and lp.b_eq.size else None,
        bounds=_scipy_bounds(lp),
        method="highs",
        options=_LP_OPTIONS,
    )
    if res.status == 0:
        return LPResult(OPTIMAL, np.asarray(res.x, dtype=float), float(res.fun))
    if res.status == 2:
        return LPResult(INFEASIBLE)
    if res.status == 3:
        return LPResult(UNBOUNDED)
    raise NumericalFailure(f"LP solver failed: {res.message}")


def solve_milp(mip: MixedIntegerProgram, node_budget: int = DEFAULT_NODE_BUDGET) -> LPResult:
    """Solve the MILP to proven optimality (zero gap at 1e-6 integrality).

    Raises NodeBudgetExceeded when the search hits the node budget without
    a proof.
    """
    lp = mip.lp
    n = lp.nvars
    integrality = np.zeros(n)
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    if lp.bounds is not None:
        lo, hi = lp.bounds.lo.copy(), lp.bounds.hi.copy()
    for i in mip.binary_indices:
        integrality[i] = 1
        lo[i] = max(lo[i], 0.0)
        hi[i] = min(hi[i], 1.0)
        if lo[i] > hi[i]:
            return LPResult(INFEASIBLE)

    constraints = []
    if lp.A_eq is not None and lp.A_eq.size:
        constraints.append(scipy.optimize.LinearConstraint(lp.A_eq, lp.b_eq, lp.b_eq))
    if lp.A_ub is not None and lp.A_ub.size:
        constraints.append(
            scipy.optimize.LinearConstraint(lp.A_ub, -np.inf, lp.b_ub)
        )
    res = scipy.optimize.milp(
        lp.objective,
        integrality=integrality,
        bounds=scipy.optimize.Bounds(lo, hi),
        constraints=constraints or None,
        options={"node_limit": node_budget, "mip_rel_gap": 0.0},
    )
    if res.status == 0:
        x = np.asarray(res.x, dtype=float)
        # snap binaries; verify integrality tolerance
        for i in mip.binary_indices:
            if abs(x[i] - round(x[i])) > 1e-6:
                raise NumericalFailure(f"binary variable {i} ended at {x[i]}")
            x[i] = round(x[i])
        return LPResult(OPTIMAL, x, float(res.fun))
    if res.status == 2:
        return LPResult(INFEASIBLE)
    if res.status == 1:
        raise NodeBudgetExceeded(f"MILP node budget {node_budget} exhausted")
    raise NumericalFailure(f"MILP solver failed: {res.message}")
