"""Support-function and feasibility LPs over generator representations.

Operates on raw matrices so both the set classes and the query layer can
call in without import cycles.  A generator representation here is

    x = c + G xi + M delta,   A xi + S delta = b,   ||xi||_inf <= 1,

with delta free (M, S empty for zonotopes/CZs).
"""

from __future__ import annotations

import numpy as np

from .errors import EmptySet, UnboundedSet
from .intervals import IntervalVector
from .optim import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, solve_lp


def _blocks(G, c, A, b, M, S):
    c = np.asarray(c, dtype=float).ravel()
    n = c.shape[0]
    G = np.zeros((n, 0)) if G is None else np.atleast_2d(np.asarray(G, dtype=float))
    M = np.zeros((n, 0)) if M is None else np.atleast_2d(np.asarray(M, dtype=float))
    ng, nl = G.shape[1], M.shape[1]
    if b is None:
        A = np.zeros((0, ng))
        S = np.zeros((0, nl))
        b = np.zeros(0)
    else:
        b = np.asarray(b, dtype=float).ravel()
        A = np.zeros((len(b), ng)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
        S = np.zeros((len(b), nl)) if S is None else np.atleast_2d(np.asarray(S, dtype=float))
    return G, c, A, b, M, S


def _xi_delta_bounds(ng, nl, extra=()):
    lo = np.concatenate([-np.ones(ng), np.full(nl, -np.inf), [e[0] for e in extra]])
    hi = np.concatenate([np.ones(ng), np.full(nl, np.inf), [e[1] for e in extra]])
    return IntervalVector(lo, hi)


def support_value(d, G, c, A=None, b=None, M=None, S=None):
    """max d @ x over the set; returns (value, attaining point).

    Raises EmptySet / UnboundedSet.
    """
    G, c, A, b, M, S = _blocks(G, c, A, b, M, S)
    d = np.asarray(d, dtype=float).ravel()
    ng, nl = G.shape[1], M.shape[1]
    if ng + nl == 0:
        if b.size and np.max(np.abs(b)) > 1e-9:
            raise EmptySet("degenerate point set with inconsistent constraints")
        return float(d @ c), c.copy()
    obj = -np.concatenate([d @ G, d @ M])  # maximize
    res = solve_lp(
        LinearProgram(
            obj,
            A_eq=np.hstack([A, S]) if b.size else None,
            b_eq=b if b.size else None,
            bounds=_xi_delta_bounds(ng, nl),
        )
    )
    if res.status == INFEASIBLE:
        raise EmptySet("support LP infeasible")
    if res.status == UNBOUNDED:
        raise UnboundedSet("support LP unbounded")
    xi = res.x[:ng]
    delta = res.x[ng : ng + nl]
    point = c + G @ xi + M @ delta
    return -res.value + float(d @ c), point


def interval_hull_lp(G, c, A=None, b=None, M=None, S=None):
    """Tightest axis-aligned box via 2n support LPs; (lo, hi) arrays."""
    c = np.asarray(c, dtype=float).ravel()
    n = c.shape[0]
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        hi[i], _ = support_value(e, G, c, A, b, M, S)
        v, _ = support_value(-e, G, c, A, b, M, S)
        lo[i] = -v
    return lo, hi


def min_infnorm_xi(A, b, ng, S=None):
    """min t s.t. A xi + S delta = b, |xi_i| <= t (delta free).

    Returns (t, xi, delta); t is None when the equality system is
    infeasible even with unbounded xi (provably empty set).
    """
    b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()
    A = np.zeros((len(b), ng)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
    nl = 0 if S is None else np.atleast_2d(np.asarray(S)).shape[1]
    S = np.zeros((len(b), nl)) if S is None else np.atleast_2d(np.asarray(S, dtype=float))
    if ng + nl == 0:
        if b.size and np.max(np.abs(b)) > 1e-9:
            return None, np.zeros(0), np.zeros(0)
        return 0.0, np.zeros(0), np.zeros(0)
    # vars: xi (ng), delta (nl), t
    obj = np.zeros(ng + nl + 1)
    obj[-1] = 1.0
    A_ub = np.zeros((2 * ng, ng + nl + 1))
    A_ub[:ng, :ng] = np.eye(ng)
    A_ub[ng:, :ng] = -np.eye(ng)
    A_ub[:, -1] = -1.0
    b_ub = np.zeros(2 * ng)
    A_eq = np.hstack([A, S, np.zeros((len(b), 1))]) if b.size else None
    lo = np.concatenate([np.full(ng + nl, -np.inf), [0.0]])
    hi = np.full(ng + nl + 1, np.inf)
    res = solve_lp(
        LinearProgram(
            obj,
            A_eq=A_eq,
            b_eq=b if b.size else None,
            A_ub=A_ub,
            b_ub=b_ub,
            bounds=IntervalVector(lo, hi),
        )
    )
    if res.status == INFEASIBLE:
        return None, None, None
    if res.status != OPTIMAL:
        raise UnboundedSet("infinity-norm LP unbounded")  # cannot happen: t >= 0
    return float(res.value), res.x[:ng], res.x[ng : ng + nl]


def membership_t(z, G, c, A=None, b=None, M=None, S=None):
    """min t with c + G xi + M delta = z appended to the constraint system.

    Membership of z corresponds to t <= 1 (+ tolerance); returns None when
    even the unbounded-xi system is infeasible.
    """
    G, c, A, b, M, S = _blocks(G, c, A, b, M, S)
    z = np.asarray(z, dtype=float).ravel()
    A_full = np.vstack([A, G])
    S_full = np.vstack([S, M])
    b_full = np.concatenate([b, z - c])
    t, _, _ = min_infnorm_xi(A_full, b_full, G.shape[1], S_full)
    return t


def closest_point_lp(h, G, c, A=None, b=None):
    """Point of the CZ minimizing ||z - h||_inf; None when the set is empty."""
    G, c, A, b, _, _ = _blocks(G, c, A, b, None, None)
    h = np.asarray(h, dtype=float).ravel()
    n, ng = G.shape
    if ng == 0:
        if b.size and np.max(np.abs(b)) > 1e-9:
            return None
        return c.copy()
    # vars: xi (ng), t
    obj = np.zeros(ng + 1)
    obj[-1] = 1.0
    A_ub = np.zeros((2 * n, ng + 1))
    A_ub[:n, :ng] = G
    A_ub[n:, :ng] = -G
    A_ub[:, -1] = -1.0
    b_ub = np.concatenate([h - c, c - h])
    res = solve_lp(
        LinearProgram(
            obj,
            A_eq=np.hstack([A, np.zeros((A.shape[0], 1))]) if b.size else None,
            b_eq=b if b.size else None,
            A_ub=A_ub,
            b_ub=b_ub,
            bounds=_xi_delta_bounds(ng, 0, extra=[(0.0, np.inf)]),
        )
    )
    if res.status != OPTIMAL:
        return None
    return c + G @ res.x[:ng]
