"""Closed-form set algebra for zonotopes, constrained zonotopes, and line
zonotopes: linear maps, Minkowski sums, Cartesian products, generalized
intersections, strip/halfspace intersections, convex hulls, interval-matrix
inclusion, closest points, and lift/unlift.

Exact operations are exact; intersect_strip_zon and cz_inclusion are
one-sided enclosures (result contains the true set).
"""

from __future__ import annotations

import numpy as np

from . import geometry, support
from .errors import (
    EmptySet,
    NotALiftedSet,
    ShapeMismatch,
    UnboundedSlack,
)
from .intervals import IntervalMatrix, IntervalVector
from .sets import (
    ConZonotope,
    HPolytope,
    LineZonotope,
    Strip,
    Zonotope,
    as_conzonotope,
    as_linezonotope,
    as_zonotope,
)

STRIP_VOLUME_BUDGET = 10**4


def _rank(x):
    if isinstance(x, Zonotope):
        return 0
    if isinstance(x, ConZonotope):
        return 1
    if isinstance(x, LineZonotope):
        return 2
    if isinstance(x, IntervalVector):
        return -1
    raise ShapeMismatch(f"not a zonotopic set: {type(x).__name__}")


def promote_pair(x, y):
    """Lift both operands to the higher of their representation kinds."""
    r = max(_rank(x), _rank(y), 0)
    conv = (as_zonotope, as_conzonotope, as_linezonotope)[r]
    return conv(x), conv(y)


def negate(z):
    """-Z, the reflection through the origin."""
    return linmap(-np.eye(z.dim), z)


def linmap(R, z):
    """Exact image R Z for a zonotopic set."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[1] != z.dim:
        raise ShapeMismatch(f"R has {R.shape[1]} columns but set has dim {z.dim}")
    if isinstance(z, Zonotope):
        return Zonotope(R @ z.c, R @ z.G)
    if isinstance(z, ConZonotope):
        return ConZonotope(R @ z.c, R @ z.G, z.A, z.b)
    if isinstance(z, LineZonotope):
        return LineZonotope(R @ z.c, G=R @ z.G, M=R @ z.M, S=z.S, A=z.A, b=z.b)
    raise ShapeMismatch(f"linmap does not support {type(z).__name__}")


def translate(z, p):
    """Z + p for a point p."""
    p = np.asarray(p, dtype=float).ravel()
    if p.shape[0] != z.dim:
        raise ShapeMismatch("translation vector dimension mismatch")
    if isinstance(z, Zonotope):
        return Zonotope(z.c + p, z.G)
    if isinstance(z, ConZonotope):
        return ConZonotope(z.c + p, z.G, z.A, z.b)
    if isinstance(z, LineZonotope):
        return LineZonotope(z.c + p, G=z.G, M=z.M, S=z.S, A=z.A, b=z.b)
    raise ShapeMismatch(f"translate does not support {type(z).__name__}")


def _blkdiag(a, b):
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]))
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


def minkowski_sum(z, w):
    """Z + W: concatenated generators, block-diagonal constraints; exact."""
    z, w = promote_pair(z, w)
    if z.dim != w.dim:
        raise ShapeMismatch(f"ambient dims differ: {z.dim} vs {w.dim}")
    if isinstance(z, Zonotope):
        return Zonotope(z.c + w.c, np.hstack([z.G, w.G]))
    if isinstance(z, ConZonotope):
        return ConZonotope(
            z.c + w.c,
            np.hstack([z.G, w.G]),
            _blkdiag(z.A, w.A),
            np.concatenate([z.b, w.b]),
        )
    return LineZonotope(
        z.c + w.c,
        G=np.hstack([z.G, w.G]),
        M=np.hstack([z.M, w.M]),
        S=_blkdiag(z.S, w.S),
        A=_blkdiag(z.A, w.A),
        b=np.concatenate([z.b, w.b]),
    )


def minkowski_diff_point(z, w):
    """Z + (-W), the Minkowski sum with the reflected set."""
    return minkowski_sum(z, negate(w))


def cartesian_product(z, w):
    """[Z; W]: stacked centers, block-diagonal generators/constraints."""
    z, w = promote_pair(z, w)
    c = np.concatenate([z.c, w.c])
    if isinstance(z, Zonotope):
        return Zonotope(c, _blkdiag(z.G, w.G))
    if isinstance(z, ConZonotope):
        return ConZonotope(c, _blkdiag(z.G, w.G), _blkdiag(z.A, w.A), np.concatenate([z.b, w.b]))
    return LineZonotope(
        c,
        G=_blkdiag(z.G, w.G),
        M=_blkdiag(z.M, w.M),
        S=_blkdiag(z.S, w.S),
        A=_blkdiag(z.A, w.A),
        b=np.concatenate([z.b, w.b]),
    )


def generalized_intersection(z, y, R=None):
    """Z inter_R Y = {z in Z : R z in Y}; exact for CZ and LZ.

    Y may be any zonotopic set; it is promoted to Z's kind.  R defaults to
    the identity (plain intersection).
    """
    if _rank(z) < 1:
        z = as_conzonotope(z)
    if R is None:
        R = np.eye(z.dim)
    R = np.atleast_2d(np.asarray(R, dtype=float))
    y = as_linezonotope(y) if isinstance(z, LineZonotope) else as_conzonotope(y)
    if R.shape != (y.dim, z.dim):
        raise ShapeMismatch(f"R must be {y.dim}x{z.dim}, got {R.shape}")

    if isinstance(z, ConZonotope):
        G = np.hstack([z.G, np.zeros((z.dim, y.ng))])
        A = np.vstack(
            [
                np.hstack([z.A, np.zeros((z.nc, y.ng))]),
                np.hstack([np.zeros((y.nc, z.ng)), y.A]),
                np.hstack([R @ z.G, -y.G]),
            ]
        )
        b = np.concatenate([z.b, y.b, y.c - R @ z.c])
        return ConZonotope(z.c, G, A, b)

    G = np.hstack([z.G, np.zeros((z.dim, y.ng))])
    M = np.hstack([z.M, np.zeros((z.dim, y.nl))])
    S = np.vstack(
        [
            np.hstack([z.S, np.zeros((z.nc, y.nl))]),
            np.hstack([np.zeros((y.nc, z.nl)), y.S]),
            np.hstack([R @ z.M, -y.M]),
        ]
    )
    A = np.vstack(
        [
            np.hstack([z.A, np.zeros((z.nc, y.ng))]),
            np.hstack([np.zeros((y.nc, z.ng)), y.A]),
            np.hstack([R @ z.G, -y.G]),
        ]
    )
    b = np.concatenate([z.b, y.b, y.c - R @ z.c])
    return LineZonotope(z.c, G=G, M=M, S=S, A=A, b=b)


def _drop_zero_columns(G, tol=1e-14):
    keep = np.linalg.norm(G, axis=0) > tol
    return G[:, keep]


def intersect_strip_zon(z, s, volume_budget=STRIP_VOLUME_BUDGET):
    """Zonotope guaranteed to contain Z inter S for a strip S.

    For any gain vector lam the zonotope
        (c + lam (d - p'c), [(I - lam p') G, sigma lam])
    contains the intersection; the gain is picked from the finite candidate
    set {0} u {g_j / (p'g_j)} by minimizing the volume metric (exact
    determinant-sum when within budget, Frobenius norm otherwise), ties to
    the lowest candidate index.
    """
    if not isinstance(z, Zonotope) or not isinstance(s, Strip):
        raise ShapeMismatch("intersect_strip_zon needs a Zonotope and a Strip")
    if s.dim != z.dim:
        raise ShapeMismatch(f"strip dim {s.dim} vs zonotope dim {z.dim}")
    if not np.isfinite(s.sigma):
        return z  # no information

    n = z.dim
    pG = s.p @ z.G
    scale = max(1.0, float(np.max(np.abs(pG), initial=0.0)))
    lams = [np.zeros(n)]
    for j in range(z.ng):
        if abs(pG[j]) > 1e-12 * scale:
            lams.append(z.G[:, j] / pG[j])

    use_exact = geometry.n_combinations(z.ng + 1, n) <= volume_budget

    best = None
    best_vol = np.inf
    for lam in lams:
        Gc = np.hstack([(np.eye(n) - np.outer(lam, s.p)) @ z.G, (s.sigma * lam)[:, None]])
        cc = z.c + lam * (s.d - s.p @ z.c)
        if use_exact:
            vol = geometry.zonotope_volume_exact(Gc, budget=volume_budget)
        else:
            vol = geometry.zonotope_frobenius(Gc)
        if vol < best_vol:
            best_vol = vol
            best = (cc, Gc)
    cc, Gc = best
    return Zonotope(cc, _drop_zero_columns(Gc))


def _empty_cz_like(z):
    """A CZ with z's shape carrying a provably infeasible constraint."""
    A = np.vstack([z.A, np.zeros((1, z.ng))])
    b = np.concatenate([z.b, [1.0]])
    return ConZonotope(z.c, z.G, A, b)


def intersect_halfspaces_cz(z, p):
    """Exact intersection of a CZ with an H-rep polytope.

    Every active inequality row h'x <= kf gains one slack generator whose
    range comes from the interval of h'G xi over the xi box; redundant rows
    (already implied by the box) are skipped.  Equality rows append directly
    as constraints on the existing xi.
    """
    out, _ = intersect_halfspaces_cz_info(z, p)
    return out


def intersect_halfspaces_cz_info(z, p):
    """intersect_halfspaces_cz plus the slack-row records (hG, rad, mid),
    which let callers reconstruct explicit xi witnesses."""
    z = as_conzonotope(z)
    if not isinstance(p, HPolytope):
        raise ShapeMismatch("second operand must be an HPolytope")
    if p.dim != z.dim:
        raise ShapeMismatch(f"polytope dim {p.dim} vs set dim {z.dim}")

    G, A, b = z.G, z.A, z.b
    c = z.c
    slack_rows = []  # (hG row, rad, mid)
    empty = False
    for h, kf in zip(p.H, p.k):
        hG = h @ G
        if not np.all(np.isfinite(hG)):
            raise UnboundedSlack("halfspace direction unbounded over the set")
        rho = float(np.sum(np.abs(hG)))
        r = float(kf - h @ c)
        if r >= rho:  # implied by the box: redundant
            continue
        if r < -rho:
            empty = True
            break
        lo = -rho
        slack_rows.append((hG, 0.5 * (r - lo), 0.5 * (r + lo)))

    if empty:
        return _empty_cz_like(z), []

    ns = len(slack_rows)
    G_out = np.hstack([G, np.zeros((z.dim, ns))])
    A_out = np.hstack([A, np.zeros((A.shape[0], ns))])
    b_out = b
    if ns:
        rows = np.zeros((ns, z.ng + ns))
        rhs = np.zeros(ns)
        for i, (hG, rad, mid) in enumerate(slack_rows):
            rows[i, : z.ng] = hG
            rows[i, z.ng + i] = -rad
            rhs[i] = mid
        A_out = np.vstack([A_out, rows])
        b_out = np.concatenate([b_out, rhs])

    if p.neq:
        A_out = np.vstack([A_out, np.hstack([p.Aeq @ G, np.zeros((p.neq, ns))])])
        b_out = np.concatenate([b_out, p.beq - p.Aeq @ c])

    return ConZonotope(c, G_out, A_out, b_out), slack_rows


def convex_hull(z, w):
    """Exact conv(Z u W) as a constrained zonotope.

    Interpolation generator lam in [-1, 1] blends the two sets; the bilinear
    products beta*xi are linearized by rescaling each xi block to live in
    [-(1+-lam)/2, (1+-lam)/2], enforced through 2(ng1+ng2) slack rows.
    """
    z = as_conzonotope(z)
    w = as_conzonotope(w)
    if z.dim != w.dim:
        raise ShapeMismatch(f"ambient dims differ: {z.dim} vs {w.dim}")
    n, m1, m2 = z.dim, z.ng, w.ng
    k1, k2 = z.nc, w.nc
    ns = 2 * (m1 + m2)
    ngen = m1 + m2 + 1 + ns

    G = np.zeros((n, ngen))
    G[:, :m1] = z.G
    G[:, m1 : m1 + m2] = w.G
    G[:, m1 + m2] = 0.5 * (z.c - w.c)
    c = 0.5 * (z.c + w.c)

    nrows = k1 + k2 + ns
    A = np.zeros((nrows, ngen))
    b = np.zeros(nrows)
    r = 0
    if k1:
        A[r : r + k1, :m1] = z.A
        A[r : r + k1, m1 + m2] = -0.5 * z.b
        b[r : r + k1] = 0.5 * z.b
        r += k1
    if k2:
        A[r : r + k2, m1 : m1 + m2] = w.A
        A[r : r + k2, m1 + m2] = 0.5 * w.b
        b[r : r + k2] = 0.5 * w.b
        r += k2
    scol = m1 + m2 + 1
    # |xi1_j| <= (1+lam)/2  and  |xi2_j| <= (1-lam)/2, one slack per row
    for sign in (1.0, -1.0):
        for j in range(m1):
            A[r, j] = sign
            A[r, m1 + m2] = -0.5
            A[r, scol] = -1.0
            b[r] = -0.5
            r += 1
            scol += 1
    for sign in (1.0, -1.0):
        for j in range(m2):
            A[r, m1 + j] = sign
            A[r, m1 + m2] = 0.5
            A[r, scol] = -1.0
            b[r] = -0.5
            r += 1
            scol += 1
    return ConZonotope(c, G, A, b)


def cz_inclusion(J, z, hull=None):
    """Enclosure of {J x : J in [J], x in Z} for an interval matrix [J].

    mid(J) Z + box(diag(rad(J) m)) with m the componentwise absolute bound
    of Z's interval hull; sound, keeps Z's constraints through the linear
    part.  Unconstrained input stays a plain zonotope.
    """
    if not isinstance(J, IntervalMatrix):
        J = IntervalMatrix.point(J)
    if J.shape[1] != z.dim:
        raise ShapeMismatch(f"[J] has {J.shape[1]} columns but set has dim {z.dim}")
    if hull is None:
        hull = _interval_hull_genrep(z)
    m = np.maximum(np.abs(hull.lo), np.abs(hull.hi))
    base = linmap(J.mid, z)
    d = J.rad @ m
    box = Zonotope(np.zeros(J.shape[0]), np.diag(d))
    return minkowski_sum(base, box)


def _interval_hull_genrep(z):
    """Interval hull; closed form for plain zonotopes, support LPs otherwise.

    (The query layer re-exports this as the public interval_hull.)
    """
    if isinstance(z, Zonotope) or (isinstance(z, ConZonotope) and z.nc == 0):
        r = np.sum(np.abs(z.G), axis=1)
        return IntervalVector(z.c - r, z.c + r)
    if isinstance(z, ConZonotope):
        lo, hi = support.interval_hull_lp(z.G, z.c, z.A, z.b)
        return IntervalVector(lo, hi)
    if isinstance(z, LineZonotope):
        lo, hi = support.interval_hull_lp(z.G, z.c, z.A, z.b, z.M, z.S)
        return IntervalVector(lo, hi)
    if isinstance(z, IntervalVector):
        return z
    raise ShapeMismatch(f"interval hull does not support {type(z).__name__}")


def closest_point(z, h):
    """Point of Z minimizing ||z - h||_inf (LP); raises EmptySet."""
    z = as_conzonotope(z)
    h = np.asarray(h, dtype=float).ravel()
    if h.shape[0] != z.dim:
        raise ShapeMismatch(f"target dim {h.shape[0]} vs set dim {z.dim}")
    pt = support.closest_point_lp(h, z.G, z.c, z.A, z.b)
    if pt is None:
        raise EmptySet("closest_point on an empty constrained zonotope")
    return pt


def lift(z):
    """Embed a CZ as the zonotope ([G; A], [c; -b]) in R^(n+nc).

    The result carries (n, nc) split metadata so unlift can invert it.
    """
    z = as_conzonotope(z)
    G = np.vstack([z.G, z.A])
    c = np.concatenate([z.c, -z.b])
    return Zonotope(c, G, lift_split=(z.dim, z.nc))


def unlift(z):
    """Invert lift(); requires the (n, nc) split metadata."""
    if not isinstance(z, Zonotope) or z.lift_split is None:
        raise NotALiftedSet("unlift needs a zonotope produced by lift()")
    n, nc = z.lift_split
    if n + nc != z.dim:
        raise NotALiftedSet(f"lift metadata {z.lift_split} inconsistent with dim {z.dim}")
    return ConZonotope(z.c[:n], z.G[:n, :], z.G[n:, :], -z.c[n:])
