"""LP-backed set queries: emptiness, membership, interval hull, H-rep,
volume, radius, sampling, projection/permutation.

Membership ties resolve in the containment-safe direction: t close to 1
counts as inside/nonempty.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from . import geometry, support
from .errors import (
    DimensionMismatch,
    EmptySet,
    ShapeMismatch,
    UnboundedSet,
    UnsupportedMethod,
)
from .intervals import IntervalVector
from .reduction import partope_bound
from .sets import ConZonotope, HPolytope, LineZonotope, Zonotope, _cz_hrep_rows
from .setops import _interval_hull_genrep

LP_TOL = 1e-9
DEFAULT_BUDGET = geometry.DEFAULT_COMBO_BUDGET


def _gen_blocks(z):
    if isinstance(z, Zonotope):
        return z.G, z.c, None, None, None, None
    if isinstance(z, ConZonotope):
        return z.G, z.c, z.A, z.b, None, None
    if isinstance(z, LineZonotope):
        return z.G, z.c, z.A, z.b, z.M, z.S
    raise ShapeMismatch(f"not a zonotopic set: {type(z).__name__}")


def is_empty(z, tol=LP_TOL):
    """True iff no feasible xi (and free delta) exists; LP decided."""
    if isinstance(z, Zonotope):
        return False
    G, c, A, b, M, S = _gen_blocks(z)
    if b is None or b.size == 0:
        return False
    t, _, _ = support.min_infnorm_xi(A, b, G.shape[1], S)
    if t is None:
        return True
    return t > 1.0 + tol


def is_inside(z, x, tol=LP_TOL):
    """True iff x = c + G xi (+ M delta) with A xi (+ S delta) = b, ||xi||inf <= 1."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != z.dim:
        raise ShapeMismatch(f"point dim {x.shape[0]} vs set dim {z.dim}")
    G, c, A, b, M, S = _gen_blocks(z)
    t = support.membership_t(x, G, c, A, b, M, S)
    return t is not None and t <= 1.0 + tol


def contains_points(z, pts, tol=LP_TOL, hrep_budget=2 * 10**4):
    """Vectorized membership of many points; boolean array, one per row.

    Three exact strategies, picked by structure: unique-candidate solve when
    the stacked [G; A] has full column rank, facet checks when the H-rep is
    within budget, and the membership LP per point otherwise.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != z.dim:
        raise ShapeMismatch(f"points have dim {pts.shape[1]}, set has dim {z.dim}")
    G, c, A, b, M, S = _gen_blocks(z)
    if M is None and pts.shape[0] > 1:
        A0 = np.zeros((0, G.shape[1])) if A is None else A
        b0 = np.zeros(0) if b is None else b
        res = _contains_points_fast(G, c, A0, b0, pts, tol, hrep_budget, z)
        if res is not None:
            return res
    return np.array([is_inside(z, x, tol) for x in pts])


def _contains_points_fast(G, c, A, b, pts, tol, hrep_budget, z):
    n, ng = G.shape
    M = np.vstack([G, A])
    rhs = np.vstack([(pts - c).T, np.tile(b[:, None], (1, pts.shape[0]))])
    live = np.linalg.norm(M, axis=0) > 1e-14
    Ml = M[:, live]
    if Ml.shape[1] == 0:
        return np.max(np.abs(rhs), axis=0) <= tol * max(1.0, np.abs(rhs).max(initial=1.0))
    rank = np.linalg.matrix_rank(Ml, tol=1e-10)
    if rank == Ml.shape[1]:
        Xi, *_ = np.linalg.lstsq(Ml, rhs, rcond=None)
        resid = np.max(np.abs(Ml @ Xi - rhs), axis=0)
        scale = max(1.0, np.abs(rhs).max(initial=1.0), np.abs(Ml).max())
        ok_res = resid <= max(tol, 1e-9) * scale
        ok_box = np.max(np.abs(Xi), axis=0) <= 1.0 + tol
        return ok_res & ok_box
    combos = geometry.n_combinations(ng, n + A.shape[0] - 1 if A.size else n - 1)
    if combos <= hrep_budget:
        if isinstance(z, ConZonotope) and z.nc:
            H, k = _cz_hrep_rows(z, hrep_budget)
        else:
            H, k = geometry.zonotope_hrep(G, c, budget=hrep_budget, allow_degenerate=True)
        norms = np.maximum(np.linalg.norm(H, axis=1), 1e-300)
        vals = (H @ pts.T - k[:, None]) / norms[:, None]
        return np.all(vals <= tol, axis=0)
    return None


def interval_hull(z):
    """Tightest axis-aligned box: closed form for zonotopes, support LPs
    for constrained/line zonotopes.  Raises EmptySet / UnboundedSet."""
    return _interval_hull_genrep(z)


def hrep(z, budget=DEFAULT_BUDGET):
    """Halfspace representation of a zonotope or CZ as an HPolytope.

    Zonotope facets come from generator cross products (full-rank required);
    a CZ goes through its lifted zonotope and a slice at the pinned lifted
    coordinates.
    """
    if isinstance(z, Zonotope):
        H, k = geometry.zonotope_hrep(z.G, z.c, budget=budget, allow_degenerate=False)
        return HPolytope(H, k)
    if isinstance(z, ConZonotope):
        H, k = _cz_hrep_rows(z, budget)
        return HPolytope(H, k)
    raise ShapeMismatch(f"hrep does not support {type(z).__name__}")


def volume(z, metric="exact", budget=DEFAULT_BUDGET):
    """Volume of a zonotopic set.

    metric "exact": determinant-sum formula, zonotopes only (budgeted).
    metric "partope-nthroot": n-th root of the volume of a parallelotope
    enclosure; defined for zonotopes and CZs, used as the demo tightness
    metric.
    """
    if metric == "exact":
        if isinstance(z, ConZonotope) and z.nc == 0:
            z = Zonotope(z.c, z.G)
        if not isinstance(z, Zonotope):
            raise UnsupportedMethod("exact volume is only available for zonotopes")
        return geometry.zonotope_volume_exact(z.G, budget=budget)
    if metric == "partope-nthroot":
        par = partope_bound(z)
        v = abs(np.linalg.det(par.G)) * (2.0 ** par.dim)
        return float(v ** (1.0 / par.dim))
    raise UnsupportedMethod(f"unknown volume metric {metric!r}")


def radius(z, metric="inf"):
    """Radius under a metric: "inf" is the largest half-width of the
    interval hull; "frobenius" is ||G||_F."""
    if metric == "inf":
        hull = interval_hull(z)
        return float(np.max(hull.rad, initial=0.0))
    if metric == "frobenius":
        return geometry.zonotope_frobenius(z.G)
    raise UnsupportedMethod(f"unknown radius metric {metric!r}")


def _effective_cz(z):
    """Rewrite a bounded LZ (S with full column rank) as a CZ by pinning
    delta = S^+ (b - A xi); raises UnboundedSet otherwise."""
    if z.nl == 0:
        return ConZonotope(z.c, z.G, z.A, z.b)
    S = np.asarray(z.S)
    if S.size == 0 or np.linalg.matrix_rank(S, tol=1e-10) < z.nl:
        raise UnboundedSet("line zonotope has free line directions")
    Sp = np.linalg.pinv(S)
    G = z.G - z.M @ Sp @ z.A
    c = z.c + z.M @ Sp @ z.b
    P = np.eye(z.nc) - S @ Sp
    A = P @ z.A
    b = P @ z.b
    live = np.any(np.abs(A) > 1e-12, axis=1) | (np.abs(b) > 1e-12)
    return ConZonotope(c, G, A[live], b[live])


def sample(z, n, rng, burnin_factor=50):
    """n points inside the set, each passing is_inside.

    Zonotopes map uniform xi draws; constrained zonotopes run hit-and-run
    on {A xi = b} intersected with the unit box (burn-in 50 n_g steps);
    bounded line zonotopes are rewritten as CZs first.  The random stream
    is explicit so calls are reproducible and independent.
    """
    return sample_xi(z, n, rng, burnin_factor)[0]


def sample_xi(z, n, rng, burnin_factor=50):
    """Like sample but also returns the xi parameters, (points, xi)."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    if n == 0:
        return np.zeros((0, z.dim)), np.zeros((0, getattr(z, "ng", 0)))
    if isinstance(z, LineZonotope):
        z = _effective_cz(z)
    if isinstance(z, Zonotope) or (isinstance(z, ConZonotope) and z.nc == 0):
        xi = rng.uniform(-1.0, 1.0, size=(n, z.ng))
        return z.c + xi @ z.G.T, xi
    return _hit_and_run(z, n, rng, burnin_factor)


def _hit_and_run(z, n, rng, burnin_factor):
    G, c, A, b = np.asarray(z.G), np.asarray(z.c), np.asarray(z.A), np.asarray(z.b)
    ng = G.shape[1]
    if ng == 0:
        if b.size and np.max(np.abs(b)) > 1e-9:
            raise EmptySet("sampling an empty point set")
        return np.tile(c, (n, 1)), np.zeros((n, 0))
    t, xi0, _ = support.min_infnorm_xi(A, b, ng)
    if t is None or t > 1.0 + LP_TOL:
        raise EmptySet("sampling an empty constrained zonotope")
    xi = np.clip(xi0, -1.0, 1.0)
    null = scipy.linalg.null_space(A)
    if null.shape[1] == 0:
        return np.tile(c + G @ xi, (n, 1)), np.tile(xi, (n, 1))
    pinvA = np.linalg.pinv(A)
    burnin = burnin_factor * ng
    out = np.empty((n, ng))
    got = 0
    step = 0
    max_steps = 20 * (burnin + n) + 1000
    while got < n and step < max_steps:
        step += 1
        d = null @ rng.standard_normal(null.shape[1])
        nd = np.linalg.norm(d)
        if nd < 1e-14:
            continue
        d /= nd
        hi = np.inf
        lo = -np.inf
        pos = d > 1e-14
        neg = d < -1e-14
        if np.any(pos):
            hi = min(hi, np.min((1.0 - xi[pos]) / d[pos]))
            lo = max(lo, np.max((-1.0 - xi[pos]) / d[pos]))
        if np.any(neg):
            hi = min(hi, np.min((-1.0 - xi[neg]) / d[neg]))
            lo = max(lo, np.max((1.0 - xi[neg]) / d[neg]))
        if not np.isfinite(hi) or not np.isfinite(lo) or hi < lo:
            continue
        xi = xi + rng.uniform(lo, hi) * d
        xi = xi + pinvA @ (b - A @ xi)
        np.clip(xi, -1.0, 1.0, out=xi)
        if step > burnin:
            out[got] = xi
            got += 1
    if got < n:
        raise EmptySet("hit-and-run failed to move; set may have no interior")
    return c + out @ G.T, out


def projection(z, dims):
    """Exact projection onto the listed dimensions (also permutes)."""
    dims = list(dims)
    for d in dims:
        if not 0 <= d < z.dim:
            raise IndexError(f"projection dimension {d} out of range 0..{z.dim - 1}")
    if isinstance(z, Zonotope):
        return Zonotope(z.c[dims], z.G[dims, :], lift_split=None)
    if isinstance(z, ConZonotope):
        return ConZonotope(z.c[dims], z.G[dims, :], z.A, z.b)
    if isinstance(z, LineZonotope):
        return LineZonotope(z.c[dims], G=z.G[dims, :], M=z.M[dims, :], S=z.S, A=z.A, b=z.b)
    raise ShapeMismatch(f"projection does not support {type(z).__name__}")


def permute(z, order):
    """Permutation of the ambient coordinates (full-length projection)."""
    order = list(order)
    if sorted(order) != list(range(z.dim)):
        raise IndexError(f"not a permutation of 0..{z.dim - 1}: {order}")
    return projection(z, order)


def _support_fn(z):
    """Support-function callable d -> (value, point); feeds the adaptive
    2-D polygon fallback in sets.vertices_2d."""
    G, c, A, b, M, S = _gen_blocks(z)

    def fn(d):
        return support.support_value(d, G, c, A, b, M, S)

    return fn
