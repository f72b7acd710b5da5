"""Complexity reduction: zonotope generator reduction, CZ constraint
elimination + generator reduction via lifting, LZ line elimination,
rescaling, and parallelotope bounds.

The defining guarantee of every reduction is containment: the output always
contains the input.  rescale is the exception: it is membership-exact.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptySet, TargetTooSmall
from .intervals import IntervalVector
from .sets import ConZonotope, LineZonotope, Zonotope
from .setops import lift, unlift
from . import support

_PIN_TOL = 1e-12


def reduce_zonotope(z, ng):
    """Enclose Z by a zonotope with at most ng generators.

    Generators sort ascending by ||g||_1 - ||g||_inf; the smallest
    (n_g - ng + n) are boxed into an axis-aligned block, the rest are kept.
    """
    if not isinstance(z, Zonotope):
        raise TypeError("reduce_zonotope expects a Zonotope")
    n = z.dim
    if ng < n:
        raise TargetTooSmall(f"target {ng} below ambient dimension {n}")
    if z.ng <= ng:
        return z
    scores = np.sum(np.abs(z.G), axis=0) - np.max(np.abs(z.G), axis=0)
    order = np.argsort(scores, kind="stable")
    nbox = z.ng - ng + n
    boxed = z.G[:, order[:nbox]]
    kept = z.G[:, order[nbox:]]
    box = np.diag(np.sum(np.abs(boxed), axis=1))
    return Zonotope(z.c, np.hstack([kept, box]), lift_split=z.lift_split)


def _tighten_xi_domain(A, b, max_sweeps=10, tol=1e-12):
    """Interval constraint propagation of A xi = b over the unit box.

    Returns the tightened per-variable domain [lo, hi] inside [-1, 1];
    raises EmptySet when propagation proves infeasibility.
    """
    ng = A.shape[1]
    lo = -np.ones(ng)
    hi = np.ones(ng)
    for _ in range(max_sweeps):
        changed = False
        for i in range(A.shape[0]):
            row = A[i]
            nz = np.nonzero(np.abs(row) > _PIN_TOL)[0]
            if nz.size == 0:
                if abs(b[i]) > 1e-9:
                    raise EmptySet("constraint row 0 = b with b != 0")
                continue
            t_lo = np.minimum(row * lo, row * hi)
            t_hi = np.maximum(row * lo, row * hi)
            tot_lo, tot_hi = np.sum(t_lo), np.sum(t_hi)
            for j in nz:
                rest_lo = tot_lo - t_lo[j]
                rest_hi = tot_hi - t_hi[j]
                num_lo, num_hi = b[i] - rest_hi, b[i] - rest_lo
                if row[j] > 0:
                    cand_lo, cand_hi = num_lo / row[j], num_hi / row[j]
                else:
                    cand_lo, cand_hi = num_hi / row[j], num_lo / row[j]
                new_lo = max(lo[j], cand_lo)
                new_hi = min(hi[j], cand_hi)
                if new_lo > new_hi + 1e-9:
                    raise EmptySet("xi-domain tightening proved infeasibility")
                new_hi = max(new_hi, new_lo)
                if new_lo > lo[j] + tol or new_hi < hi[j] - tol:
                    changed = True
                lo[j], hi[j] = new_lo, new_hi
        if not changed:
            break
    return lo, hi


def rescale(z, mode="interval"):
    """Membership-identical CZ with its xi-domain re-normalized to the unit box.

    mode "interval" tightens by constraint propagation; mode "lp" solves
    2 n_g support LPs for the exact domain.
    """
    if not isinstance(z, ConZonotope):
        raise TypeError("rescale expects a ConZonotope")
    if z.nc == 0 or z.ng == 0:
        return z
    if mode == "interval":
        lo, hi = _tighten_xi_domain(np.asarray(z.A), np.asarray(z.b))
    elif mode == "lp":
        lo, hi = support.interval_hull_lp(np.eye(z.ng), np.zeros(z.ng), z.A, z.b)
        lo, hi = np.maximum(lo, -1.0), np.minimum(hi, 1.0)
        if np.any(lo > hi + 1e-9):
            raise EmptySet("LP domain tightening proved infeasibility")
        hi = np.maximum(hi, lo)
    else:
        raise ValueError(f"unknown rescale mode {mode!r}")
    if np.allclose(lo, -1.0) and np.allclose(hi, 1.0):
        return z
    m = 0.5 * (hi + lo)
    r = 0.5 * (hi - lo)
    return ConZonotope(
        z.c + z.G @ m,
        z.G * r[None, :],
        z.A * r[None, :],
        z.b - z.A @ m,
    )


def _pick_pivot(A, b):
    """Pivot (i, j) minimizing the implied-range spill of xi_j beyond
    [-1, 1]; ties break by largest |A_ij|.  None when A has no usable
    entry."""
    best = None
    best_key = None
    for i in range(A.shape[0]):
        row = A[i]
        absrow = np.abs(row)
        total = np.sum(absrow)
        for j in np.nonzero(absrow > _PIN_TOL)[0]:
            rest = total - absrow[j]
            lo = (b[i] - rest) / row[j]
            hi = (b[i] + rest) / row[j]
            if lo > hi:
                lo, hi = hi, lo
            spill = max(hi, 1.0) - min(lo, -1.0) - 2.0
            key = (spill, -absrow[j], i, j)
            if best_key is None or key < best_key:
                best_key = key
                best = (i, j)
    return best


def _eliminate_constraint(G, c, A, b, i, j):
    """Gauss-Jordan: solve constraint i for xi_j, substitute, drop both."""
    a = A[i, j]
    Lg = G[:, j] / a
    La = A[:, j] / a
    c2 = c + Lg * b[i]
    G2 = G - np.outer(Lg, A[i])
    b2 = b - La * b[i]
    A2 = A - np.outer(La, A[i])
    keep_rows = np.arange(A.shape[0]) != i
    keep_cols = np.arange(A.shape[1]) != j
    return G2[:, keep_cols], c2, A2[np.ix_(keep_rows, keep_cols)], b2[keep_rows]


def reduce_conzonotope(z, ng, nc):
    """Enclose Z by a CZ with at most ng generators and nc constraints.

    Constraints are eliminated one at a time (rescale, pick the pivot with
    the least unit-box spill, Gauss-Jordan substitute).  Remaining generator
    excess is reduced on the lifted zonotope and unlifted back.
    """
    if not isinstance(z, ConZonotope):
        raise TypeError("reduce_conzonotope expects a ConZonotope")
    if ng < z.dim:
        raise TargetTooSmall(f"target ng={ng} below ambient dimension {z.dim}")
    if nc < 0:
        raise TargetTooSmall("target nc must be >= 0")

    G, c, A, b = (np.array(z.G), np.array(z.c), np.array(z.A), np.array(z.b))
    while A.shape[0] > nc:
        zz = rescale(ConZonotope(c, G, A, b), "interval")
        G, c, A, b = np.array(zz.G), np.array(zz.c), np.array(zz.A), np.array(zz.b)
        # drop rows that became 0 = 0 (infeasible 0 = b already raised above)
        live = np.any(np.abs(A) > _PIN_TOL, axis=1) | (np.abs(b) > 1e-9)
        if not np.all(live):
            A, b = A[live], b[live]
            continue
        piv = _pick_pivot(A, b)
        if piv is None:
            raise EmptySet("all-zero constraint rows with nonzero rhs")
        G, c, A, b = _eliminate_constraint(G, c, A, b, *piv)
    out = ConZonotope(c, G, A, b)

    if out.ng > ng:
        if ng < out.dim + out.nc:
            raise TargetTooSmall(
                f"ng={ng} cannot hold {out.nc} constraints in R^{out.dim}; need >= {out.dim + out.nc}"
            )
        out = unlift(reduce_zonotope(lift(out), ng))
    return out


def reduce_linezonotope(z, ng, nc):
    """LZ reduction: eliminate every removable line first (exact), then
    CZ-style reduction of the bounded part."""
    if not isinstance(z, LineZonotope):
        raise TypeError("reduce_linezonotope expects a LineZonotope")
    M, G, c = np.array(z.M), np.array(z.G), np.array(z.c)
    S, A, b = np.array(z.S), np.array(z.A), np.array(z.b)

    while S.size:
        i, j = np.unravel_index(np.argmax(np.abs(S)), S.shape)
        if abs(S[i, j]) <= _PIN_TOL:
            break
        s = S[i, j]
        Lm = M[:, j] / s
        Ls = S[:, j] / s
        c = c + Lm * b[i]
        G = G - np.outer(Lm, A[i])
        M = M - np.outer(Lm, S[i])
        A = A - np.outer(Ls, A[i])
        b = b - Ls * b[i]
        S = S - np.outer(Ls, S[i])
        keep_rows = np.arange(S.shape[0]) != i
        keep_cols = np.arange(S.shape[1]) != j
        M = M[:, keep_cols]
        S = S[np.ix_(keep_rows, keep_cols)]
        A = A[keep_rows]
        b = b[keep_rows]

    cz = reduce_conzonotope(ConZonotope(c, G, A, b), max(ng, c.shape[0]), nc)
    return LineZonotope(
        cz.c, G=cz.G, M=M, S=np.zeros((cz.nc, M.shape[1])), A=cz.A, b=cz.b
    )


def reduce_set(z, ng, nc=0):
    """Kind dispatch for the per-step estimator reduction."""
    if isinstance(z, Zonotope):
        return reduce_zonotope(z, ng)
    if isinstance(z, ConZonotope):
        return reduce_conzonotope(z, ng, nc)
    if isinstance(z, LineZonotope):
        return reduce_linezonotope(z, ng, nc)
    raise TypeError(f"cannot reduce {type(z).__name__}")


def partope_bound(z):
    """Parallelotope (n-generator zonotope) enclosure.

    Zonotopes reduce through the generator-boxing pipeline (a parallelotope
    maps to itself; rank deficiency shows up as zero generator columns,
    kept so the result has exactly n columns).  Constrained zonotopes take
    the tight axis-aligned box from 2n support LPs instead: eliminating
    every constraint through pivoting inflates heavily constrained sets so
    much that the volume metric stops tracking actual set size.
    """
    if isinstance(z, ConZonotope):
        if z.nc == 0:
            z = Zonotope(z.c, z.G)
        else:
            hull = _hull_of(z)
            return Zonotope(hull.mid, np.diag(hull.rad))
    if not isinstance(z, Zonotope):
        raise TypeError("partope_bound expects a Zonotope or ConZonotope")
    out = reduce_zonotope(Zonotope(z.c, z.G), z.dim)
    if out.ng < out.dim:
        pad = np.zeros((out.dim, out.dim - out.ng))
        out = Zonotope(out.c, np.hstack([out.G, pad]))
    return out


def _hull_of(z):
    lo, hi = support.interval_hull_lp(z.G, z.c, z.A, z.b)
    return IntervalVector(lo, hi)


def tightened_xi_bounds(z):
    """Tightened xi-domain of a CZ as an IntervalVector (diagnostic helper)."""
    lo, hi = _tighten_xi_domain(np.asarray(z.A), np.asarray(z.b))
    return IntervalVector(lo, hi)
