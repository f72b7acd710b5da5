"""Interval arithmetic: exact ranges, predicates, sampling, norms."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zonokit.errors import DivByIntervalContainingZero, DomainViolation
from zonokit.intervals import EMPTY, IntervalMatrix, IntervalVector, is_empty_interval


def iv(lo, hi):
    return IntervalVector(np.atleast_1d(lo), np.atleast_1d(hi))


class TestMidRadDiam:
    def test_basic(self):
        a = iv(1, 3)
        assert a.mid[0] == 2 and a.rad[0] == 1 and a.diam[0] == 2

    def test_degenerate(self):
        a = iv(-2, -2)
        assert a.mid[0] == -2 and a.rad[0] == 0 and a.diam[0] == 0

    def test_half(self):
        a = iv(0, 5)
        assert a.mid[0] == 2.5 and a.rad[0] == 2.5 and a.diam[0] == 5


class TestArithmetic:
    def test_add(self):
        c = iv(1, 2) + iv(3, 4)
        assert c.lo[0] == 4 and c.hi[0] == 6

    def test_mul(self):
        # oracle: min/max over the four endpoint products of [-1,2]*[3,4]
        prods = [a * b for a in (-1, 2) for b in (3, 4)]
        c = iv(-1, 2) * iv(3, 4)
        assert c.lo[0] == min(prods) == -4
        assert c.hi[0] == max(prods) == 8

    def test_div_through_zero_raises(self):
        with pytest.raises(DivByIntervalContainingZero):
            iv(1, 2) / iv(-1, 1)

    def test_div_touching_zero_raises(self):
        with pytest.raises(DivByIntervalContainingZero):
            iv(1, 2) / iv(0, 1)

    def test_div(self):
        c = iv(1, 2) / iv(2, 4)
        assert np.isclose(c.lo[0], 0.25) and np.isclose(c.hi[0], 1.0)

    def test_scalar_mixing(self):
        c = 2.0 + iv(0, 1) * 3.0
        assert c.lo[0] == 2 and c.hi[0] == 5


class TestElementary:
    def test_exp_monotone(self):
        c = iv(0, 1).exp()
        assert c.lo[0] == 1.0 and np.isclose(c.hi[0], np.e)

    def test_sin_extremum_scan(self):
        # critical points k*pi/2 inside [0, pi]: max at pi/2
        c = iv(0, np.pi).sin()
        assert np.isclose(c.lo[0], 0, atol=1e-15) and c.hi[0] == 1.0

    def test_sin_wide(self):
        c = iv(0, 10).sin()
        assert c.lo[0] == -1.0 and c.hi[0] == 1.0

    def test_cos_contains_min(self):
        c = iv(3, 4).cos()  # pi inside
        assert c.lo[0] == -1.0

    def test_pow_even_straddle(self):
        c = iv(-1, 2).pow(2)
        assert c.lo[0] == 0 and c.hi[0] == 4

    def test_pow_odd(self):
        c = iv(-2, 1).pow(3)
        assert c.lo[0] == -8 and c.hi[0] == 1

    def test_sqrt_domain(self):
        with pytest.raises(DomainViolation):
            iv(-1, 1).sqrt()

    def test_log_domain(self):
        with pytest.raises(DomainViolation):
            iv(0, 1).log()

    def test_tan_pole(self):
        with pytest.raises(DomainViolation):
            iv(1, 2).tan()  # pi/2 inside

    def test_tan_monotone(self):
        c = iv(-0.5, 0.5).tan()
        assert np.isclose(c.lo[0], np.tan(-0.5)) and np.isclose(c.hi[0], np.tan(0.5))

    def test_abs_straddle(self):
        c = iv(-3, 2).abs()
        assert c.lo[0] == 0 and c.hi[0] == 3


class TestLattice:
    def test_intersect(self):
        c = iv(0, 2).intersect(iv(1, 3))
        assert c.lo[0] == 1 and c.hi[0] == 2

    def test_intersect_disjoint_is_empty_value(self):
        assert is_empty_interval(iv(0, 1).intersect(iv(2, 3)))
        assert iv(0, 1).intersect(iv(2, 3)) is EMPTY

    def test_hull(self):
        c = iv(0, 1).hull(iv(2, 3))
        assert c.lo[0] == 0 and c.hi[0] == 3


class TestPredicates:
    def test_isinside(self):
        assert iv(0, 2).isinside([1.0])
        assert not iv(0, 2).isinside([3.0])

    def test_comparisons(self):
        assert iv(3, 4) > iv(1, 2)
        assert not (iv(1, 3) > iv(2, 4))
        assert iv(1, 2) < iv(3, 4)
        assert iv(1, 2) <= iv(2, 3)

    def test_sampling_all_inside(self):
        box = IntervalVector([0, 0], [1, 1])
        pts = box.sample(100, np.random.default_rng(0))
        assert pts.shape == (100, 2)
        assert all(box.isinside(p) for p in pts)

    def test_sampling_gaussian_inside(self):
        box = IntervalVector([-1, 2], [1, 5])
        pts = box.sample(200, np.random.default_rng(1), dist="gaussian")
        assert all(box.isinside(p) for p in pts)


class TestNorms:
    def test_norm1_straddle(self):
        # oracle: |x| over [-1,2] ranges over [0,2]
        c = iv(-1, 2).norm(1)
        assert c.lo[0] == 0 and c.hi[0] == 2

    def test_norm1_positive(self):
        c = IntervalVector([1, 3], [2, 4]).norm(1)
        assert c.lo[0] == 4 and c.hi[0] == 6

    def test_norm2_corners(self):
        # oracle: corner enumeration of [0,3]x[0,4] gives max 5 at (3,4)
        corners = [np.hypot(a, b) for a in (0, 3) for b in (0, 4)]
        c = IntervalVector([0, 0], [3, 4]).norm(2)
        assert c.lo[0] == 0 and np.isclose(c.hi[0], max(corners)) and max(corners) == 5


# -- property tests ----------------------------------------------------------

finite = st.floats(-50, 50, allow_nan=False)


@st.composite
def intervals(draw, n=1):
    lo = np.array([draw(finite) for _ in range(n)])
    hi = lo + np.array([draw(st.floats(0, 20)) for _ in range(n)])
    return IntervalVector(lo, hi)


@given(intervals(), intervals())
def test_intersection_commutative(a, b):
    ab = a.intersect(b)
    ba = b.intersect(a)
    if is_empty_interval(ab):
        assert is_empty_interval(ba)
    else:
        assert np.allclose(ab.lo, ba.lo) and np.allclose(ab.hi, ba.hi)


@given(intervals())
def test_intersection_idempotent(a):
    aa = a.intersect(a)
    assert np.allclose(aa.lo, a.lo) and np.allclose(aa.hi, a.hi)


@given(intervals(), intervals(), intervals())
def test_hull_associative(a, b, c):
    left = a.hull(b).hull(c)
    right = a.hull(b.hull(c))
    assert np.allclose(left.lo, right.lo) and np.allclose(left.hi, right.hi)


@st.composite
def dyadic_intervals(draw):
    # endpoints on a coarse dyadic grid: mid/rad arithmetic is then exact
    lo = draw(st.integers(-2**10, 2**10)) / 2.0**6
    hi = lo + draw(st.integers(0, 2**10)) / 2.0**6
    return IntervalVector([lo], [hi])


@given(dyadic_intervals())
def test_mid_rad_reconstruct_exactly(a):
    # exact identity on dyadic-exact endpoints (the arithmetic rounds
    # nothing); general floats may be off by an ulp
    assert a.mid[0] - a.rad[0] == a.lo[0]
    assert a.mid[0] + a.rad[0] == a.hi[0]


@given(intervals(2), intervals(2))
@settings(max_examples=50)
def test_inclusion_monotonicity(a, b):
    inner = a.intersect(b)
    if is_empty_interval(inner):
        return
    for fn in ("exp", "sin", "cos", "abs"):
        fa = inner.unary(fn)
        fb = a.unary(fn)
        assert fb.contains_interval(fa, tol=1e-12)


def _rand_interval(rng, n, lo=-5.0, hi=5.0):
    a = rng.uniform(lo, hi, n)
    b = a + rng.uniform(0, 3, n)
    return IntervalVector(a, b)


def test_fundamental_theorem_sampled():
    """f(x) in F(X) for random boxes and points, every implemented op."""
    rng = np.random.default_rng(7)
    n = 2000
    X = _rand_interval(rng, n)
    Y = _rand_interval(rng, n)
    x = X.lo + rng.uniform(0, 1, n) * X.diam
    y = Y.lo + rng.uniform(0, 1, n) * Y.diam
    slack = 1e-12

    for op, fn in (
        ("add", lambda u, v: u + v),
        ("sub", lambda u, v: u - v),
        ("mul", lambda u, v: u * v),
    ):
        F = getattr(IntervalVector, f"__{op}__")(X, Y)
        vals = fn(x, y)
        assert np.all(F.lo - slack <= vals) and np.all(vals <= F.hi + slack)

    pos = IntervalVector(np.abs(X.lo) + 0.1, np.abs(X.lo) + 0.1 + X.diam)
    xp = pos.lo + rng.uniform(0, 1, n) * pos.diam
    F = X / pos
    vals = x / xp
    assert np.all(F.lo - slack <= vals) and np.all(vals <= F.hi + slack)

    for fn_name, real in (
        ("exp", np.exp),
        ("sin", np.sin),
        ("cos", np.cos),
        ("abs", np.abs),
        ("sqr", np.square),
    ):
        F = X.unary(fn_name)
        vals = real(x)
        assert np.all(F.lo - slack <= vals), fn_name
        assert np.all(vals <= F.hi + slack), fn_name

    for fn_name, real in (("sqrt", np.sqrt), ("log", np.log)):
        F = pos.unary(fn_name)
        vals = real(xp)
        assert np.all(F.lo - slack <= vals) and np.all(vals <= F.hi + slack)


class TestIntervalMatrix:
    def test_matvec_point(self):
        M = IntervalMatrix([[1, 2], [3, 4]])
        out = M.matvec([1.0, 1.0])
        assert np.allclose(out.lo, [3, 7]) and np.allclose(out.hi, [3, 7])

    def test_matvec_encloses_samples(self):
        rng = np.random.default_rng(3)
        lo = rng.normal(size=(3, 2))
        M = IntervalMatrix(lo, lo + rng.uniform(0, 1, (3, 2)))
        X = IntervalVector([-1, 0], [1, 2])
        out = M.matvec(X)
        for _ in range(200):
            m = M.lo + rng.uniform(0, 1, (3, 2)) * (M.hi - M.lo)
            x = X.lo + rng.uniform(0, 1, 2) * X.diam
            v = m @ x
            assert np.all(out.lo - 1e-10 <= v) and np.all(v <= out.hi + 1e-10)

    def test_transpose_symmetry(self):
        M = IntervalMatrix([[0, 1], [1, 0]], [[0.5, 2], [2, 0.5]])
        assert np.allclose(M.T.lo, M.lo.T)
