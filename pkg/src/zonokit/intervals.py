"""Interval vectors/matrices and exact-range interval arithmetic.

All ranges are exact images of the real operation over the operand boxes,
up to floating-point rounding: no outward rounding is performed, so
containment guarantees hold modulo the last few ulps.  Values are immutable
and every operation is pure.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatch,
    DivByIntervalContainingZero,
    DomainViolation,
)

_HALF_PI = np.pi / 2.0
_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# vectorized range kernels on (lo, hi) ndarray pairs
#
# These are shared with the function-DAG module, which traces scalar
# intervals through expression graphs.  All kernels accept ndarrays (or
# scalars) and broadcast.

def add_rng(al, ah, bl, bh):
    return al + bl, ah + bh


def sub_rng(al, ah, bl, bh):
    return al - bh, ah - bl


def mul_rng(al, ah, bl, bh):
    p1, p2, p3, p4 = al * bl, al * bh, ah * bl, ah * bh
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return lo, hi


def div_rng(al, ah, bl, bh):
    if np.any((np.asarray(bl) <= 0.0) & (np.asarray(bh) >= 0.0)):
        raise DivByIntervalContainingZero(
            "interval divisor straddles or touches zero"
        )
    return mul_rng(al, ah, 1.0 / bh, 1.0 / bl)


def neg_rng(al, ah):
    return -ah, -al


def sqr_rng(al, ah):
    lo2, hi2 = al * al, ah * ah
    lo = np.where((al <= 0.0) & (ah >= 0.0), 0.0, np.minimum(lo2, hi2))
    return lo, np.maximum(lo2, hi2)


def pow_rng(al, ah, n):
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainViolation(f"pow exponent must be a nonneg integer, got {n!r}")
    if n == 0:
        shape = np.broadcast(al, ah).shape
        return np.ones(shape), np.ones(shape)
    if n == 1:
        return np.asarray(al, dtype=float), np.asarray(ah, dtype=float)
    if n % 2 == 1:
        return al**n, ah**n
    lo2, hi2 = al**n, ah**n
    lo = np.where((al <= 0.0) & (ah >= 0.0), 0.0, np.minimum(lo2, hi2))
    return lo, np.maximum(lo2, hi2)


def abs_rng(al, ah):
    lo2, hi2 = np.abs(al), np.abs(ah)
    lo = np.where((al <= 0.0) & (ah >= 0.0), 0.0, np.minimum(lo2, hi2))
    return lo, np.maximum(lo2, hi2)


def sqrt_rng(al, ah):
    if np.any(np.asarray(al) < 0.0):
        raise DomainViolation("sqrt of an interval with negative lower bound")
    return np.sqrt(al), np.sqrt(ah)


def exp_rng(al, ah):
    return np.exp(al), np.exp(ah)


def log_rng(al, ah):
    if np.any(np.asarray(al) <= 0.0):
        raise DomainViolation("log of an interval with nonpositive lower bound")
    return np.log(al), np.log(ah)


def sin_rng(al, ah):
    al = np.asarray(al, dtype=float)
    ah = np.asarray(ah, dtype=float)
    slo, shi = np.sin(al), np.sin(ah)
    lo = np.minimum(slo, shi)
    hi = np.maximum(slo, shi)
    # extremum scan: max at pi/2 + 2k*pi, min at -pi/2 + 2k*pi inside [al, ah]
    kmax = np.floor((ah - _HALF_PI) / _TWO_PI)
    has_max = kmax * _TWO_PI + _HALF_PI >= al
    kmin = np.floor((ah + _HALF_PI) / _TWO_PI)
    has_min = kmin * _TWO_PI - _HALF_PI >= al
    wide = (ah - al) >= _TWO_PI
    hi = np.where(has_max | wide, 1.0, hi)
    lo = np.where(has_min | wide, -1.0, lo)
    return lo, hi


def cos_rng(al, ah):
    # cos(x) = sin(x + pi/2); use the shift to reuse the scan
    return sin_rng(np.asarray(al) + _HALF_PI, np.asarray(ah) + _HALF_PI)


def tan_rng(al, ah):
    al = np.asarray(al, dtype=float)
    ah = np.asarray(ah, dtype=float)
    # reject any odd multiple of pi/2 inside [al, ah]
    k1 = np.ceil(al / _HALF_PI)
    k2 = np.floor(ah / _HALF_PI)
    has_odd = (k2 >= k1) & ~((k1 == k2) & (np.mod(k1, 2) == 0))
    if np.any(has_odd) or np.any((ah - al) >= np.pi):
        raise DomainViolation("tan over an interval containing a pole")
    return np.tan(al), np.tan(ah)


_UNARY_KERNELS = {
    "sqr": sqr_rng,
    "sqrt": sqrt_rng,
    "exp": exp_rng,
    "log": log_rng,
    "sin": sin_rng,
    "cos": cos_rng,
    "tan": tan_rng,
    "abs": abs_rng,
    "neg": neg_rng,
}


def _ro(a):
    """Read-only float array."""
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


class _EmptyInterval:
    """Singleton result of a disjoint interval intersection.

    Estimation code treats it as a fault-detection signal, so it is an
    ordinary value rather than an exception.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EMPTY"

    def __bool__(self):
        return False


EMPTY = _EmptyInterval()


def is_empty_interval(x):
    return x is EMPTY


class IntervalVector:
    """Componentwise interval `[lo, hi]`; a scalar interval has dimension 1."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatch(
                f"interval endpoints must be equal-length vectors, got {lo.shape} and {hi.shape}"
            )
        if np.any(lo > hi):
            raise DomainViolation("interval with lo > hi")
        self.lo = _ro(lo)
        self.hi = _ro(hi)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def point(cls, v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return cls(v, v)

    @classmethod
    def from_mid_rad(cls, mid, rad):
        mid = np.atleast_1d(np.asarray(mid, dtype=float))
        rad = np.atleast_1d(np.asarray(rad, dtype=float))
        return cls(mid - rad, mid + rad)

    # -- basic queries -------------------------------------------------------

    @property
    def dim(self):
        return self.lo.shape[0]

    def __len__(self):
        return self.dim

    @property
    def mid(self):
        return 0.5 * (self.hi + self.lo)

    @property
    def rad(self):
        return 0.5 * (self.hi - self.lo)

    @property
    def diam(self):
        return self.hi - self.lo

    def __getitem__(self, i):
        return IntervalVector(np.atleast_1d(self.lo[i]), np.atleast_1d(self.hi[i]))

    def __repr__(self):
        parts = ", ".join(f"[{l:g}, {h:g}]" for l, h in zip(self.lo, self.hi))
        return f"IntervalVector({parts})"

    def _check_dim(self, other):
        if self.dim != other.dim:
            raise DimensionMismatch(
                f"interval dimensions differ: {self.dim} vs {other.dim}"
            )

    @staticmethod
    def _coerce(x):
        if isinstance(x, IntervalVector):
            return x
        return IntervalVector.point(x)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        self._check_dim(other)
        return IntervalVector(*add_rng(self.lo, self.hi, other.lo, other.hi))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        self._check_dim(other)
        return IntervalVector(*sub_rng(self.lo, self.hi, other.lo, other.hi))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        self._check_dim(other)
        return IntervalVector(*mul_rng(self.lo, self.hi, other.lo, other.hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        self._check_dim(other)
        return IntervalVector(*div_rng(self.lo, self.hi, other.lo, other.hi))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return IntervalVector(-self.hi, -self.lo)

    # -- elementary functions --------------------------------------------

    def unary(self, fn, n=None):
        """Apply a Table-style elementary function componentwise.

        fn is one of sqr, pow, sqrt, exp, log, sin, cos, tan, abs;
        pow additionally takes the integer exponent n >= 0.
        """
        if fn == "pow":
            return IntervalVector(*pow_rng(self.lo, self.hi, n))
        try:
            kern = _UNARY_KERNELS[fn]
        except KeyError:
            raise DomainViolation(f"unknown elementary function {fn!r}") from None
        return IntervalVector(*kern(self.lo, self.hi))

    def sqr(self):
        return self.unary("sqr")

    def pow(self, n):
        return self.unary("pow", n)

    def sqrt(self):
        return self.unary("sqrt")

    def exp(self):
        return self.unary("exp")

    def log(self):
        return self.unary("log")

    def sin(self):
        return self.unary("sin")

    def cos(self):
        return self.unary("cos")

    def tan(self):
        return self.unary("tan")

    def abs(self):
        return self.unary("abs")

    # -- lattice operations ----------------------------------------------

    def intersect(self, other):
        """Componentwise intersection; EMPTY if any component is disjoint."""
        other = self._coerce(other)
        self._check_dim(other)
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return EMPTY
        return IntervalVector(lo, hi)

    def hull(self, other):
        other = self._coerce(other)
        self._check_dim(other)
        return IntervalVector(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def contains_interval(self, other, tol=0.0):
        other = self._coerce(other)
        self._check_dim(other)
        return bool(np.all(self.lo - tol <= other.lo) and np.all(other.hi <= self.hi + tol))

    # -- predicates --------------------------------------------------------

    def __gt__(self, other):
        other = self._coerce(other)
        self._check_dim(other)
        return bool(np.all(self.lo > other.hi))

    def __ge__(self, other):
        other = self._coerce(other)
        self._check_dim(other)
        return bool(np.all(self.lo >= other.hi))

    def __lt__(self, other):
        other = self._coerce(other)
        self._check_dim(other)
        return bool(np.all(self.hi < other.lo))

    def __le__(self, other):
        other = self._coerce(other)
        self._check_dim(other)
        return bool(np.all(self.hi <= other.lo))

    def isinside(self, x, tol=0.0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"point dim {x.shape[0]} vs interval dim {self.dim}")
        return bool(np.all(self.lo - tol <= x) and np.all(x <= self.hi + tol))

    # -- sampling ----------------------------------------------------------

    def sample(self, n, rng, dist="uniform"):
        """Draw n points inside the box; rows of the returned (n, dim) array.

        dist: "uniform" (default) or "gaussian" (clipped normal around mid).
        """
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        if n < 0:
            raise ValueError("sample count must be >= 0")
        if dist == "uniform":
            u = rng.uniform(-1.0, 1.0, size=(n, self.dim))
        elif dist == "gaussian":
            u = np.clip(rng.standard_normal((n, self.dim)) / 3.0, -1.0, 1.0)
        else:
            raise ValueError(f"unknown sampling distribution {dist!r}")
        return self.mid + u * self.rad

    # -- norms ---------------------------------------------------------------

    def norm(self, p=2):
        """Exact range of ||x||_p over the box, as a scalar interval."""
        alo, ahi = abs_rng(self.lo, self.hi)
        if p == 1:
            return IntervalVector([np.sum(alo)], [np.sum(ahi)])
        if p == 2:
            return IntervalVector(
                [np.sqrt(np.sum(alo * alo))], [np.sqrt(np.sum(ahi * ahi))]
            )
        raise ValueError(f"norm order must be 1 or 2, got {p!r}")


class IntervalMatrix:
    """Elementwise interval matrix `[lo, hi]` (used for interval Jacobians)."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = np.atleast_2d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape:
            raise DimensionMismatch(
                f"interval matrix endpoints differ in shape: {lo.shape} vs {hi.shape}"
            )
        if np.any(lo > hi):
            raise DomainViolation("interval matrix with lo > hi")
        self.lo = _ro(lo)
        self.hi = _ro(hi)

    @classmethod
    def point(cls, m):
        m = np.atleast_2d(np.asarray(m, dtype=float))
        return cls(m, m)

    @classmethod
    def from_mid_rad(cls, mid, rad):
        mid = np.atleast_2d(np.asarray(mid, dtype=float))
        rad = np.atleast_2d(np.asarray(rad, dtype=float))
        return cls(mid - rad, mid + rad)

    @property
    def shape(self):
        return self.lo.shape

    @property
    def mid(self):
        return 0.5 * (self.hi + self.lo)

    @property
    def rad(self):
        return 0.5 * (self.hi - self.lo)

    @property
    def T(self):
        return IntervalMatrix(self.lo.T, self.hi.T)

    def __repr__(self):
        return f"IntervalMatrix(lo={self.lo!r}, hi={self.hi!r})"

    def matvec(self, x):
        """Range of [M] x for x an IntervalVector or a real vector."""
        if not isinstance(x, IntervalVector):
            x = IntervalVector.point(x)
        if self.shape[1] != x.dim:
            raise DimensionMismatch(
                f"matrix has {self.shape[1]} columns but vector has dim {x.dim}"
            )
        lo, hi = mul_rng(self.lo, self.hi, x.lo[None, :], x.hi[None, :])
        return IntervalVector(np.sum(lo, axis=1), np.sum(hi, axis=1))

    def contains_matrix(self, m, tol=0.0):
        m = np.atleast_2d(np.asarray(m, dtype=float))
        return bool(np.all(self.lo - tol <= m) and np.all(m <= self.hi + tol))
