"""Set representations: strips, zonotopes, constrained zonotopes, line
zonotopes, H-rep polytopes, plus the lossless conversion lattice and 2-D
vertex enumeration.

Empty blocks are stored as zero-column/zero-row matrices, never as absent
fields, so every operation is shape-total.  All values are immutable.

Conversion lattice (lossless arrows only; anything needing approximation
lives in the reduction module instead):

    Interval -> Zonotope -> ConZonotope -> LineZonotope
    Interval/Zonotope/ConZonotope -> HPolytope
    Strip -> HPolytope, Strip -> LineZonotope
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from . import geometry
from .errors import (
    DimensionUnsupported,
    EmptySet,
    ShapeMismatch,
    UnsupportedConversion,
)
from .intervals import IntervalVector


def _ro(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def _vec(v, name):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1:
        raise ShapeMismatch(f"{name} must be a vector, got shape {v.shape}")
    return v


def _mat(m, rows, cols, name):
    """Coerce to a 2-D float array; None becomes a zero-width block."""
    if m is None:
        return np.zeros((rows if rows is not None else 0, cols if cols is not None else 0))
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ShapeMismatch(f"{name} must be a matrix, got shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise ShapeMismatch(f"{name} must have {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ShapeMismatch(f"{name} must have {cols} columns, got {m.shape[1]}")
    return m


class Strip:
    """Slab {s : |p's - d| <= sigma}; the state set of one scalar measurement."""

    __slots__ = ("p", "d", "sigma")

    def __init__(self, p, d=0.0, sigma=1.0):
        p = _vec(p, "p")
        if not np.any(p):
            raise ShapeMismatch("strip normal must not be the zero vector")
        if sigma < 0:
            raise ShapeMismatch("strip half-width must be nonnegative")
        self.p = _ro(p)
        self.d = float(d)
        self.sigma = float(sigma)

    @property
    def dim(self):
        return self.p.shape[0]

    def __repr__(self):
        return f"Strip(p={self.p.tolist()}, d={self.d:g}, sigma={self.sigma:g})"

    def contains(self, x, tol=1e-9):
        return bool(abs(self.p @ np.asarray(x, dtype=float) - self.d) <= self.sigma + tol)


class Zonotope:
    """{c + G xi : ||xi||_inf <= 1}."""

    __slots__ = ("G", "c", "lift_split")

    def __init__(self, c, G=None, lift_split=None):
        c = _vec(c, "c")
        G = _mat(G, c.shape[0], None, "G")
        self.c = _ro(c)
        self.G = _ro(G)
        # (n, nc) metadata when this zonotope is a lifted constrained zonotope
        self.lift_split = tuple(lift_split) if lift_split is not None else None

    @property
    def dim(self):
        return self.c.shape[0]

    @property
    def ng(self):
        return self.G.shape[1]

    def __repr__(self):
        return f"Zonotope(dim={self.dim}, ng={self.ng})"


class ConZonotope:
    """{c + G xi : ||xi||_inf <= 1, A xi = b}; represents any convex polytope."""

    __slots__ = ("G", "c", "A", "b")

    def __init__(self, c, G=None, A=None, b=None):
        c = _vec(c, "c")
        G = _mat(G, c.shape[0], None, "G")
        if (A is None) != (b is None):
            raise ShapeMismatch("A and b must be given together")
        b = np.zeros(0) if b is None else _vec(b, "b")
        A = _mat(A, b.shape[0], G.shape[1], "A")
        self.c = _ro(c)
        self.G = _ro(G)
        self.A = _ro(A)
        self.b = _ro(b)

    @property
    def dim(self):
        return self.c.shape[0]

    @property
    def ng(self):
        return self.G.shape[1]

    @property
    def nc(self):
        return self.A.shape[0]

    def __repr__(self):
        return f"ConZonotope(dim={self.dim}, ng={self.ng}, nc={self.nc})"


class LineZonotope:
    """{M delta + G xi + c : delta free, ||xi||_inf <= 1, S delta + A xi = b}.

    The free line directions make unbounded sets representable while keeping
    the generator calculus.
    """

    __slots__ = ("M", "G", "c", "S", "A", "b")

    def __init__(self, c, G=None, M=None, S=None, A=None, b=None):
        c = _vec(c, "c")
        G = _mat(G, c.shape[0], None, "G")
        M = _mat(M, c.shape[0], None, "M")
        b = np.zeros(0) if b is None else _vec(b, "b")
        A = _mat(A, b.shape[0], G.shape[1], "A")
        S = _mat(S, b.shape[0], M.shape[1], "S")
        self.c = _ro(c)
        self.G = _ro(G)
        self.M = _ro(M)
        self.S = _ro(S)
        self.A = _ro(A)
        self.b = _ro(b)

    @classmethod
    def realset(cls, n):
        """All of R^n: identity lines, no generators, no constraints."""
        return cls(np.zeros(n), M=np.eye(n))

    @property
    def dim(self):
        return self.c.shape[0]

    @property
    def ng(self):
        return self.G.shape[1]

    @property
    def nl(self):
        return self.M.shape[1]

    @property
    def nc(self):
        return self.A.shape[0]

    def __repr__(self):
        return f"LineZonotope(dim={self.dim}, nl={self.nl}, ng={self.ng}, nc={self.nc})"


class HPolytope:
    """{x : H x <= k, Aeq x = beq}."""

    __slots__ = ("H", "k", "Aeq", "beq")

    def __init__(self, H=None, k=None, Aeq=None, beq=None, dim=None):
        if H is None and Aeq is None and dim is None:
            raise ShapeMismatch("HPolytope needs H, Aeq, or an explicit dim")
        k = np.zeros(0) if k is None else _vec(k, "k")
        beq = np.zeros(0) if beq is None else _vec(beq, "beq")
        if dim is None:
            probe = H if H is not None else Aeq
            dim = np.atleast_2d(np.asarray(probe)).shape[1]
        H = _mat(H, k.shape[0], dim, "H")
        Aeq = _mat(Aeq, beq.shape[0], dim, "Aeq")
        self.H = _ro(H)
        self.k = _ro(k)
        self.Aeq = _ro(Aeq)
        self.beq = _ro(beq)

    @property
    def dim(self):
        return self.H.shape[1]

    @property
    def nh(self):
        return self.H.shape[0]

    @property
    def neq(self):
        return self.Aeq.shape[0]

    def __repr__(self):
        return f"HPolytope(dim={self.dim}, nh={self.nh}, neq={self.neq})"

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        if self.nh and np.any(self.H @ x > self.k + tol * np.maximum(1.0, np.linalg.norm(self.H, axis=1))):
            return False
        if self.neq and np.any(np.abs(self.Aeq @ x - self.beq) > tol * np.maximum(1.0, np.linalg.norm(self.Aeq, axis=1))):
            return False
        return True


# ---------------------------------------------------------------------------
# conversion lattice


def as_zonotope(x):
    if isinstance(x, Zonotope):
        return x
    if isinstance(x, IntervalVector):
        return Zonotope(x.mid, np.diag(x.rad))
    raise UnsupportedConversion(f"cannot convert {type(x).__name__} to Zonotope")


def as_conzonotope(x):
    if isinstance(x, ConZonotope):
        return x
    if isinstance(x, (IntervalVector, Zonotope)):
        z = as_zonotope(x)
        return ConZonotope(z.c, z.G)
    raise UnsupportedConversion(f"cannot convert {type(x).__name__} to ConZonotope")


def as_linezonotope(x):
    if isinstance(x, LineZonotope):
        return x
    if isinstance(x, Strip):
        # slab basis: one generator along p, free lines spanning the kernel
        nrm2 = float(x.p @ x.p)
        center = x.p * (x.d / nrm2)
        gen = (x.p * (x.sigma / nrm2)).reshape(-1, 1)
        lines = scipy.linalg.null_space(x.p.reshape(1, -1))
        return LineZonotope(center, G=gen, M=lines)
    if isinstance(x, (IntervalVector, Zonotope, ConZonotope)):
        cz = as_conzonotope(x)
        return LineZonotope(cz.c, G=cz.G, A=cz.A, b=cz.b)
    raise UnsupportedConversion(f"cannot convert {type(x).__name__} to LineZonotope")


def as_hpolytope(x, budget=geometry.DEFAULT_COMBO_BUDGET):
    if isinstance(x, HPolytope):
        return x
    if isinstance(x, Strip):
        H = np.vstack([x.p, -x.p])
        k = np.array([x.d + x.sigma, x.sigma - x.d])
        return HPolytope(H, k)
    if isinstance(x, IntervalVector):
        n = x.dim
        return HPolytope(np.vstack([np.eye(n), -np.eye(n)]), np.concatenate([x.hi, -x.lo]))
    if isinstance(x, Zonotope):
        H, k = geometry.zonotope_hrep(x.G, x.c, budget=budget, allow_degenerate=True)
        return HPolytope(H, k)
    if isinstance(x, ConZonotope):
        H, k = _cz_hrep_rows(x, budget)
        return HPolytope(H, k)
    raise UnsupportedConversion(f"cannot convert {type(x).__name__} to HPolytope")


def _cz_hrep_rows(z, budget):
    """H-rep rows of a CZ: H-rep of the lifted zonotope, sliced at the
    pinned lifted coordinates (which drops the lifted columns)."""
    n, nc = z.dim, z.nc
    if nc == 0:
        return geometry.zonotope_hrep(z.G, z.c, budget=budget, allow_degenerate=True)
    G_lift = np.vstack([z.G, z.A])
    c_lift = np.concatenate([z.c, -z.b])
    H_full, k_full = geometry.zonotope_hrep(G_lift, c_lift, budget=budget, allow_degenerate=True)
    H = H_full[:, :n]
    rows, offs = [], []
    infeasible = False
    for h, kf in zip(H, k_full):
        if np.linalg.norm(h) < 1e-12:
            if kf < -1e-9:
                infeasible = True
            continue
        rows.append(h)
        offs.append(kf)
    if infeasible:  # slice plane misses the lifted zonotope: empty set
        return np.zeros((1, n)), np.array([-1.0])
    return np.array(rows), np.array(offs)


_KIND_CONVERTERS = {
    Zonotope: as_zonotope,
    ConZonotope: as_conzonotope,
    LineZonotope: as_linezonotope,
    HPolytope: as_hpolytope,
}

_KIND_NAMES = {
    "interval": IntervalVector,
    "strip": Strip,
    "zonotope": Zonotope,
    "conzonotope": ConZonotope,
    "linezonotope": LineZonotope,
    "hpolytope": HPolytope,
}


def convert(x, target):
    """Convert x to the target representation along a lossless arrow.

    target may be the class or its lowercase kind name.  Arrows that would
    need approximation (e.g. ConZonotope -> Zonotope) are deliberately
    unsupported; see reduction.partope_bound for enclosures.
    """
    if isinstance(target, str):
        try:
            target = _KIND_NAMES[target.lower()]
        except KeyError:
            raise UnsupportedConversion(f"unknown set kind {target!r}") from None
    if isinstance(x, target):
        return x
    conv = _KIND_CONVERTERS.get(target)
    if conv is None:
        raise UnsupportedConversion(f"no conversions into {target.__name__}")
    return conv(x)


def vertices_2d(x, budget=geometry.DEFAULT_COMBO_BUDGET, support_fallback=None):
    """CCW vertex cycle of a bounded nonempty set in R^2.

    Zonotopes use generator angle sorting; constrained zonotopes and
    H-polytopes go through halfspace-pair intersection of their H-rep.
    When the CZ H-rep is over the combinatorial budget, an LP-based
    support-function refinement takes over (support_fallback is injected by
    the query layer to avoid an import cycle).
    """
    if isinstance(x, (Zonotope, ConZonotope, LineZonotope)) and x.dim != 2:
        raise DimensionUnsupported(f"vertices_2d needs ambient dimension 2, got {x.dim}")
    if isinstance(x, HPolytope) and x.dim != 2:
        raise DimensionUnsupported(f"vertices_2d needs ambient dimension 2, got {x.dim}")

    if isinstance(x, Zonotope):
        return geometry.zonotope_vertices_2d(x.G, x.c)
    if isinstance(x, ConZonotope):
        if x.nc == 0:
            return geometry.zonotope_vertices_2d(x.G, x.c)
        lift_combos = geometry.n_combinations(x.ng, x.dim + x.nc - 1)
        if lift_combos > budget:
            if support_fallback is None:
                from .queries import _support_fn  # late import: query layer owns LPs

                support_fallback = _support_fn(x)
            return geometry.adaptive_support_polygon(support_fallback)
        H, k = _cz_hrep_rows(x, budget)
        return geometry.polygon_from_halfspaces(H, k)
    if isinstance(x, HPolytope):
        if x.nh == 0 and x.neq == 0:
            raise EmptySet("cannot enumerate vertices of an unconstrained polytope")
        return geometry.polygon_from_halfspaces(x.H, x.k, x.Aeq, x.beq)
    raise UnsupportedConversion(f"vertices_2d does not support {type(x).__name__}")
