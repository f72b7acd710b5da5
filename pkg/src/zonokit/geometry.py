"""Raw geometric machinery on plain arrays: zonotope H-rep, 2-D polygons,
exact zonotope volume.

Everything here works on bare (G, c, H, k, ...) matrices so the set classes
and the query layer can both use it without import cycles.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import BudgetExceeded, DegenerateZonotope, EmptySet

DEFAULT_COMBO_BUDGET = 10**5


def n_combinations(n, k):
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def cross_product_normal(cols):
    """Generalized cross product of n-1 vectors in R^n (cofactor expansion)."""
    m = np.asarray(cols, dtype=float)  # (n-1, n), rows are the vectors
    n = m.shape[1]
    if n == 1:
        return np.array([1.0])
    v = np.empty(n)
    for i in range(n):
        sub = np.delete(m, i, axis=1)
        v[i] = (-1.0) ** i * np.linalg.det(sub)
    return v


def zonotope_volume_exact(G, budget=DEFAULT_COMBO_BUDGET):
    """Exact volume 2^n * sum over n-column subsets of |det|."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    n, ng = G.shape
    if ng < n:
        return 0.0
    combos = n_combinations(ng, n)
    if combos > budget:
        raise BudgetExceeded(
            f"volume needs {combos} determinants, budget is {budget}"
        )
    total = 0.0
    for idx in itertools.combinations(range(ng), n):
        total += abs(np.linalg.det(G[:, idx]))
    return (2.0**n) * total


def zonotope_frobenius(G):
    return float(np.linalg.norm(np.asarray(G, dtype=float)))


def _dedup_normals(normals, tol=1e-10):
    out = []
    for v in normals:
        nv = np.linalg.norm(v)
        if nv <= tol:
            continue
        v = v / nv
        # canonical sign: first significant component positive
        for x in v:
            if abs(x) > tol:
                if x < 0:
                    v = -v
                break
        if not any(np.linalg.norm(v - w) < 1e-9 for w in out):
            out.append(v)
    return out


def zonotope_hrep(G, c, budget=DEFAULT_COMBO_BUDGET, allow_degenerate=False):
    """Halfspace representation {H x <= k} of a zonotope (G, c).

    Facet normals come from generalized cross products of (n-1)-subsets of
    generators; offsets from support evaluation.  With allow_degenerate the
    rank-deficient case is handled by solving in the spanned subspace and
    pinning the orthogonal complement with paired opposite rows; otherwise
    rank deficiency raises DegenerateZonotope.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    c = np.asarray(c, dtype=float).ravel()
    n, ng = G.shape

    rank = np.linalg.matrix_rank(G, tol=1e-10) if ng else 0
    if rank < n:
        if not allow_degenerate:
            raise DegenerateZonotope(
                f"generators span a {rank}-dimensional subspace of R^{n}"
            )
        return _zonotope_hrep_degenerate(G, c, rank, budget)

    combos = n_combinations(ng, n - 1)
    if combos > budget:
        raise BudgetExceeded(
            f"H-rep needs {combos} facet candidates, budget is {budget}"
        )

    if n == 1:
        normals = [np.array([1.0])]
    else:
        normals = [
            cross_product_normal(G[:, idx].T)
            for idx in itertools.combinations(range(ng), n - 1)
        ]
    normals = _dedup_normals(normals)
    if not normals:
        raise DegenerateZonotope("no nondegenerate facet normals found")

    rows, offs = [], []
    for v in normals:
        spread = float(np.sum(np.abs(v @ G)))
        base = float(v @ c)
        rows.append(v)
        offs.append(base + spread)
        rows.append(-v)
        offs.append(-base + spread)
    return np.array(rows), np.array(offs)


def _zonotope_hrep_degenerate(G, c, rank, budget):
    n = G.shape[0]
    if rank == 0:
        # single point: pin every coordinate
        H = np.vstack([np.eye(n), -np.eye(n)])
        k = np.concatenate([c, -c])
        return H, k
    u, s, _ = np.linalg.svd(G, full_matrices=True)
    basis = u[:, :rank]
    comp = u[:, rank:]
    Hs, ks = zonotope_hrep(basis.T @ G, np.zeros(rank), budget)
    H = Hs @ basis.T
    k = ks + H @ c
    pins_H = np.vstack([comp.T, -comp.T])
    pins_k = np.concatenate([comp.T @ c, -(comp.T @ c)])
    return np.vstack([H, pins_H]), np.concatenate([k, pins_k])


def zonotope_vertices_2d(G, c):
    """CCW vertex cycle of a 2-D zonotope via generator angle sorting."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    c = np.asarray(c, dtype=float).ravel()
    gens = [g for g in G.T if np.linalg.norm(g) > 1e-14]
    if not gens:
        return np.array([c])
    # flip into the upper half plane, sort by angle
    gens = [(-g if (g[1] < 0 or (g[1] == 0 and g[0] < 0)) else g) for g in gens]
    gens.sort(key=lambda g: math.atan2(g[1], g[0]))
    gens = np.array(gens)
    start = c - np.sum(gens, axis=0)
    verts = [start]
    for g in gens:
        verts.append(verts[-1] + 2.0 * g)
    for g in gens[:-1]:
        verts.append(verts[-1] - 2.0 * g)
    return _clean_polygon(np.array(verts))


def polygon_from_halfspaces(H, k, Aeq=None, beq=None, tol=1e-9):
    """Vertices of {H x <= k, Aeq x = beq} in R^2, CCW.

    Enumerates pairwise row intersections (equalities count as two opposite
    inequality rows) and keeps feasible candidates.  Raises EmptySet when no
    candidate survives.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    k = np.asarray(k, dtype=float).ravel()
    rows = [(H[i], k[i]) for i in range(H.shape[0])]
    if Aeq is not None and np.size(Aeq):
        Aeq = np.atleast_2d(np.asarray(Aeq, dtype=float))
        beq = np.asarray(beq, dtype=float).ravel()
        for i in range(Aeq.shape[0]):
            rows.append((Aeq[i], beq[i]))
            rows.append((-Aeq[i], -beq[i]))

    cands = []
    for (a1, b1), (a2, b2) in itertools.combinations(rows, 2):
        M = np.array([a1, a2])
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        scale = max(1.0, np.abs(M).max())
        if abs(det) < 1e-12 * scale * scale:
            continue
        x = np.linalg.solve(M, np.array([b1, b2]))
        # feasibility against every row, scaled per-row
        ok = True
        for a, b in rows:
            norm = max(1.0, np.linalg.norm(a))
            if a @ x > b + tol * norm:
                ok = False
                break
        if ok:
            cands.append(x)
    if not cands:
        raise EmptySet("halfspace system has no vertices (empty or unbounded)")
    cands = np.array(cands)
    return _clean_polygon(_ccw_order(cands))


def _ccw_order(pts):
    center = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0])
    order = np.lexsort((pts[:, 1], pts[:, 0], ang))
    return pts[order]


def _clean_polygon(pts, tol=1e-9):
    """Deduplicate near-identical and collinear vertices, keep CCW order."""
    scale = max(1.0, float(np.abs(pts).max()))
    uniq = []
    for p in pts:
        if not any(np.linalg.norm(p - q) < tol * scale for q in uniq):
            uniq.append(p)
    if len(uniq) <= 2:
        return np.array(uniq)
    pts = _ccw_order(np.array(uniq))
    m = len(pts)
    keep = []
    for i in range(m):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % m]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) > tol * scale * scale:
            keep.append(pts[i])
    if len(keep) < 3:  # fully collinear: keep the two extreme points
        d = pts - pts[0]
        t = d @ (pts[-1] - pts[0])
        return np.array([pts[np.argmin(t)], pts[np.argmax(t)]])
    return np.array(keep)


def polygon_contains(poly, x, tol=1e-8):
    """Membership in the convex polygon given as a CCW vertex cycle."""
    poly = np.asarray(poly, dtype=float)
    x = np.asarray(x, dtype=float)
    m = len(poly)
    if m == 1:
        return bool(np.linalg.norm(x - poly[0]) <= tol)
    if m == 2:
        d = poly[1] - poly[0]
        L = np.linalg.norm(d)
        t = (x - poly[0]) @ d / (L * L)
        proj = poly[0] + np.clip(t, 0.0, 1.0) * d
        return bool(np.linalg.norm(x - proj) <= tol)
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        e = b - a
        if (x[0] - a[0]) * e[1] - (x[1] - a[1]) * e[0] > tol * max(1.0, np.linalg.norm(e)):
            return False
    return True


def adaptive_support_polygon(support, tol=1e-7, max_lps=4000):
    """Polygon of a bounded 2-D convex set from its support function, exact
    up to the LP tolerance.  Used where halfspace enumeration is over budget.

    support(d) -> (value, attaining point).  A direction pair refines while
    the corner of its two supporting lines sticks out beyond the chord of
    the support points: probing the bisecting direction then either finds a
    new extreme point or certifies a cutting edge, so the recursion settles
    on the polygon's true edge fan.
    """

    def probe(angle):
        d = np.array([np.cos(angle), np.sin(angle)])
        v, p = support(d)
        return v, p

    angles = [0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi]
    vals_pts = [probe(a) for a in angles]
    pts = [p for _, p in vals_pts]
    calls = len(angles)
    stack = [
        (angles[i], *vals_pts[i], angles[i] + 0.5 * np.pi, *vals_pts[(i + 1) % 4])
        for i in range(4)
    ]
    scale = max(1.0, max(abs(v) for v, _ in vals_pts))
    while stack:
        a1, v1, p1, a2, v2, p2 = stack.pop()
        if a2 - a1 < 1e-5:
            continue
        d1 = np.array([np.cos(a1), np.sin(a1)])
        d2 = np.array([np.cos(a2), np.sin(a2)])
        # corner of the two supporting lines
        M = np.array([d1, d2])
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) < 1e-12:
            continue
        q = np.linalg.solve(M, np.array([v1, v2]))
        am = 0.5 * (a1 + a2)
        dm = np.array([np.cos(am), np.sin(am)])
        chord = max(dm @ p1, dm @ p2)
        if dm @ q <= chord + tol * scale:
            continue  # the region between chord and corner is negligible
        calls += 1
        if calls > max_lps:
            raise BudgetExceeded("support polygon refinement exceeded LP budget")
        vm, pm = support(dm)
        pts.append(pm)
        stack.append((a1, v1, p1, am, vm, pm))
        stack.append((am, vm, pm, a2, v2, p2))
    return _clean_polygon(np.array(pts))
