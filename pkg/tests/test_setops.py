"""Set algebra: exactness by sampling against the definitional sets."""

import numpy as np
import pytest

from zonokit.errors import EmptySet, NotALiftedSet, ShapeMismatch
from zonokit.intervals import IntervalMatrix, IntervalVector
from zonokit.queries import contains_points, interval_hull, is_empty, is_inside, sample
from zonokit.sets import ConZonotope, HPolytope, LineZonotope, Strip, Zonotope, as_conzonotope
from zonokit.setops import (
    cartesian_product,
    closest_point,
    convex_hull,
    cz_inclusion,
    generalized_intersection,
    intersect_halfspaces_cz,
    intersect_strip_zon,
    lift,
    linmap,
    minkowski_sum,
    translate,
    unlift,
)

DEMO_CZ = ConZonotope(
    [-1, 1], [[0.2, 0.4, 0.2], [0.2, 0.0, -0.2]], [[2.0, 2.0, 2.0]], [-3.0]
)


def unit_box(n=2):
    return Zonotope(np.zeros(n), np.eye(n))


class TestLinmap:
    def test_identity(self):
        z = unit_box()
        out = linmap(np.eye(2), z)
        assert np.allclose(out.G, z.G) and np.allclose(out.c, z.c)

    def test_row_sum_range(self):
        # oracle: corners of the unit box map to [-2, 2] under [1, 1]
        corners = [s1 + s2 for s1 in (-1, 1) for s2 in (-1, 1)]
        out = linmap(np.array([[1.0, 1.0]]), unit_box())
        h = interval_hull(out)
        assert h.lo[0] == min(corners) and h.hi[0] == max(corners)

    def test_zero_map(self):
        out = linmap(np.zeros((2, 2)), unit_box())
        h = interval_hull(out)
        assert np.allclose(h.lo, 0) and np.allclose(h.hi, 0)

    def test_shape_check(self):
        with pytest.raises(ShapeMismatch):
            linmap(np.eye(3), unit_box())


class TestMinkowski:
    def test_translate_by_point(self):
        z = unit_box()
        out = minkowski_sum(z, Zonotope([3.0, -1.0]))
        assert np.allclose(out.c, [3, -1])
        assert np.allclose(np.sort(np.abs(out.G).sum(axis=1)), [1, 1])

    def test_box_plus_box_hull(self):
        out = minkowski_sum(unit_box(), unit_box())
        h = interval_hull(out)
        assert np.allclose(h.lo, [-2, -2]) and np.allclose(h.hi, [2, 2])

    def test_cz_constraint_counts(self):
        a = ConZonotope([0, 0], np.eye(2), [[1.0, 1.0]], [0.5])
        b = ConZonotope([0, 0], np.eye(2), [[1.0, -1.0], [0.5, 0.5]], [0.0, 0.1])
        out = minkowski_sum(a, b)
        assert out.nc == a.nc + b.nc and out.ng == a.ng + b.ng

    def test_exactness_two_sided(self):
        rng = np.random.default_rng(2)
        a = Zonotope([1.0, 0.0], rng.normal(size=(2, 3)))
        b = Zonotope([0.0, -1.0], rng.normal(size=(2, 2)))
        out = minkowski_sum(a, b)
        pa, pb = sample(a, 300, rng), sample(b, 300, rng)
        assert contains_points(out, pa + pb, 1e-8).all()
        # reverse direction: samples of the sum decompose (via support check
        # in random directions: h(out) == h(a) + h(b) for Minkowski sums)
        for _ in range(20):
            d = rng.normal(size=2)
            ha = np.max(pa @ d)  # sampled support proxies
            hs = interval_hull(linmap(d[None, :], out))
            exact = interval_hull(linmap(d[None, :], a)).hi[0] + interval_hull(
                linmap(d[None, :], b)
            ).hi[0]
            assert np.isclose(hs.hi[0], exact, atol=1e-9)


class TestCartesian:
    def test_points(self):
        out = cartesian_product(Zonotope([1.0]), Zonotope([2.0]))
        assert np.allclose(out.c, [1, 2]) and out.ng == 0

    def test_boxes(self):
        out = cartesian_product(unit_box(1), unit_box(1))
        h = interval_hull(out)
        assert np.allclose(h.lo, [-1, -1]) and np.allclose(h.hi, [1, 1])

    def test_cz_counts(self):
        a = ConZonotope([0], [[1.0, 0.5]], [[1.0, 1.0]], [0.2])
        b = ConZonotope([0], [[1.0]], [[1.0]], [0.1])
        out = cartesian_product(a, b)
        assert out.ng == a.ng + b.ng and out.nc == a.nc + b.nc


class TestGeneralizedIntersection:
    def test_self_intersection(self):
        z = as_conzonotope(unit_box())
        out = generalized_intersection(z, z)
        rng = np.random.default_rng(0)
        pts = sample(z, 200, rng)
        assert contains_points(out, pts, 1e-8).all()

    def test_shifted_boxes_grid_oracle(self):
        # oracle: dense grid membership at resolution 0.05, grid points kept
        # off the facet boundaries
        a = as_conzonotope(unit_box())
        b = as_conzonotope(Zonotope([1.0, 0.0], np.eye(2)))
        out = generalized_intersection(a, b)
        for x1 in np.arange(-1.175, 2.2, 0.05):
            for x2 in np.arange(-1.15, 1.2, 0.1):
                expect = (0 < x1 < 1) and (-1 < x2 < 1)
                assert is_inside(out, [x1, x2], tol=1e-9) == expect, (x1, x2)

    def test_disjoint_empty(self):
        a = as_conzonotope(unit_box())
        b = as_conzonotope(Zonotope([5.0, 0.0], np.eye(2)))
        assert is_empty(generalized_intersection(a, b))

    def test_lz_couples_lines(self):
        lz = LineZonotope.realset(2)
        box = as_conzonotope(unit_box())
        out = generalized_intersection(lz, box, np.eye(2))
        assert isinstance(out, LineZonotope)
        assert is_inside(out, [0.5, 0.5]) and not is_inside(out, [2.0, 0.0])


class TestStripIntersection:
    def test_wide_strip_returns_z(self):
        z = unit_box()
        out = intersect_strip_zon(z, Strip([1.0, 0.0], 0.0, np.inf))
        assert out is z

    def test_half_width_strip(self):
        # oracle: grid membership of box cap |x1| <= 0.5
        z = unit_box()
        out = intersect_strip_zon(z, Strip([1.0, 0.0], 0.0, 0.5))
        for x1 in np.arange(-0.45, 0.5, 0.1):
            for x2 in np.arange(-0.95, 1.0, 0.1):
                assert is_inside(out, [x1, x2], tol=1e-9)

    def test_no_informative_generator(self):
        z = Zonotope([0.0, 0.0], [[0.0, 0.0], [1.0, 0.5]])
        out = intersect_strip_zon(z, Strip([1.0, 0.0], 0.0, 0.1))
        assert np.allclose(out.c, z.c)
        assert np.allclose(np.abs(out.G).sum(axis=1), np.abs(z.G).sum(axis=1))

    def test_containment_random(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            z = Zonotope(rng.normal(size=2), rng.normal(size=(2, 4)))
            s = Strip(rng.normal(size=2), rng.normal(), abs(rng.normal()) + 0.1)
            out = intersect_strip_zon(z, s)
            pts = sample(z, 200, rng)
            members = pts[[s.contains(p) for p in pts]]
            if len(members):
                assert contains_points(out, members, 1e-8).all()


class TestHalfspaceIntersection:
    def test_covering_polytope_is_noop_membership(self):
        z = as_conzonotope(unit_box())
        p = HPolytope([[1.0, 0.0]], [5.0])
        out = intersect_halfspaces_cz(z, p)
        rng = np.random.default_rng(1)
        pts = sample(z, 200, rng)
        assert contains_points(out, pts, 1e-8).all()

    def test_halfbox_grid_oracle(self):
        z = as_conzonotope(unit_box())
        out = intersect_halfspaces_cz(z, HPolytope([[1.0, 0.0]], [0.0]))
        for x1 in np.arange(-0.95, 1.0, 0.1):
            for x2 in np.arange(-0.95, 1.0, 0.1):
                assert is_inside(out, [x1, x2], 1e-9) == (x1 <= 0)

    def test_equality_slice(self):
        z = as_conzonotope(unit_box())
        out = intersect_halfspaces_cz(
            z, HPolytope(Aeq=[[1.0, 0.0]], beq=[0.5], dim=2)
        )
        assert not is_empty(out)
        h = interval_hull(out)
        assert np.isclose(h.lo[0], 0.5) and np.isclose(h.hi[0], 0.5)
        assert np.isclose(h.lo[1], -1) and np.isclose(h.hi[1], 1)

    def test_infeasible_cut(self):
        z = as_conzonotope(unit_box())
        out = intersect_halfspaces_cz(z, HPolytope([[1.0, 0.0]], [-5.0]))
        assert is_empty(out)


class TestConvexHull:
    def test_idempotent_membership(self):
        z = DEMO_CZ
        out = convex_hull(z, z)
        rng = np.random.default_rng(9)
        pts = sample(z, 200, rng)
        assert contains_points(out, pts, 1e-8).all()

    def test_two_points_segment(self):
        # oracle: 2-D vertex enumeration of the hull of two points
        from zonokit.sets import vertices_2d

        a, b = np.array([0.0, 0.0]), np.array([2.0, 1.0])
        out = convex_hull(Zonotope(a), Zonotope(b))
        V = vertices_2d(out)
        got = {tuple(np.round(v, 8)) for v in V}
        assert got == {(0.0, 0.0), (2.0, 1.0)}

    def test_shifted_boxes_rectangle(self):
        # oracle: convex hull of the 8 corners is the rectangle [-1,4]x[-1,1]
        out = convex_hull(unit_box(), Zonotope([3.0, 0.0], np.eye(2)))
        h = interval_hull(out)
        assert np.allclose(h.lo, [-1, -1], atol=1e-7)
        assert np.allclose(h.hi, [4, 1], atol=1e-7)
        for corner in ([-1, -1], [4, 1], [-1, 1], [4, -1]):
            assert is_inside(out, corner, tol=1e-7)

    def test_budget(self):
        a = ConZonotope([0, 0], np.eye(2), [[1.0, 1.0]], [0.0])
        b = as_conzonotope(unit_box())
        out = convex_hull(a, b)
        assert out.ng == a.ng + b.ng + 1 + 2 * (a.ng + b.ng)
        assert out.nc == a.nc + b.nc + 2 * (a.ng + b.ng)

    def test_convexity_and_containment(self):
        rng = np.random.default_rng(12)
        a = Zonotope(rng.normal(size=2), rng.normal(size=(2, 2)))
        b = ConZonotope(rng.normal(size=2), rng.normal(size=(2, 3)), [[1.0, 0.0, 1.0]], [0.3])
        out = convex_hull(a, b)
        pa = sample(a, 100, rng)
        pb = sample(b, 100, rng)
        assert contains_points(out, pa, 1e-8).all()
        assert contains_points(out, pb, 1e-8).all()
        lam = rng.uniform(0, 1, 100)[:, None]
        mids = lam * pa + (1 - lam) * pb
        assert contains_points(out, mids, 1e-8).all()


class TestCZInclusion:
    def test_zero_radius_is_linmap(self):
        J = IntervalMatrix([[1.0, 2.0], [0.0, 1.0]])
        z = DEMO_CZ
        out = cz_inclusion(J, z)
        ref = linmap(J.mid, z)
        rng = np.random.default_rng(3)
        pts = sample(ref, 200, rng)
        assert contains_points(out, pts, 1e-8).all()
        h1, h2 = interval_hull(out), interval_hull(ref)
        assert np.allclose(h1.lo, h2.lo, atol=1e-7) and np.allclose(h1.hi, h2.hi, atol=1e-7)

    def test_scalar_interval(self):
        # oracle: sampling J in [0.9, 1.1] and x in [-1, 1]
        J = IntervalMatrix.from_mid_rad([[1.0]], [[0.1]])
        z = Zonotope([0.0], [[1.0]])
        out = cz_inclusion(J, z)
        h = interval_hull(out)
        rng = np.random.default_rng(8)
        js = rng.uniform(0.9, 1.1, 10**4)
        xs = rng.uniform(-1, 1, 10**4)
        vals = js * xs
        assert h.lo[0] <= vals.min() and vals.max() <= h.hi[0]
        assert np.isclose(h.lo[0], -1.1) and np.isclose(h.hi[0], 1.1)

    def test_point_set(self):
        # oracle: interval matrix-vector product on the point
        m = np.array([2.0, -3.0])
        J = IntervalMatrix.from_mid_rad([[1.0, 0.0], [0.5, 0.5]], [[0.1, 0.2], [0.0, 0.3]])
        out = cz_inclusion(J, Zonotope(m))
        h = interval_hull(out)
        ref = J.matvec(m)
        assert np.allclose(h.lo, ref.lo, atol=1e-9) and np.allclose(h.hi, ref.hi, atol=1e-9)


class TestClosestPoint:
    def test_inside_returns_itself(self):
        z = as_conzonotope(unit_box())
        p = closest_point(z, [0.3, -0.2])
        assert np.allclose(p, [0.3, -0.2], atol=1e-7)

    def test_box_projection(self):
        p = closest_point(as_conzonotope(unit_box()), [3.0, 0.0])
        assert np.isclose(p[0], 1.0, atol=1e-7)

    def test_segment_lp_oracle(self):
        z = ConZonotope([0, 0], np.eye(2), [[1.0, -1.0]], [0.0])  # xi1 = xi2
        p = closest_point(z, [1.0, -1.0])
        assert np.allclose(p, [0.0, 0.0], atol=1e-7)

    def test_empty(self):
        z = ConZonotope([0, 0], np.eye(2), [[1.0, 1.0]], [3.0])
        with pytest.raises(EmptySet):
            closest_point(z, [0.0, 0.0])


class TestLiftUnlift:
    def test_demo_cz(self):
        L = lift(DEMO_CZ)
        assert L.dim == 3
        assert np.allclose(L.c, [-1, 1, 3])
        assert np.allclose(L.G, np.vstack([DEMO_CZ.G, DEMO_CZ.A]))
        assert L.lift_split == (2, 1)

    def test_unconstrained_trivial(self):
        z = as_conzonotope(unit_box())
        L = lift(z)
        assert L.dim == 2 and L.lift_split == (2, 0)

    def test_roundtrip_membership(self):
        z = DEMO_CZ
        back = unlift(lift(z))
        rng = np.random.default_rng(5)
        pts = sample(z, 500, rng)
        assert contains_points(back, pts, 1e-8).all()
        outs = rng.uniform(-3, 3, (200, 2))
        for p in outs:
            assert is_inside(z, p) == is_inside(back, p)

    def test_unlift_requires_tag(self):
        with pytest.raises(NotALiftedSet):
            unlift(unit_box())


def test_translate():
    out = translate(DEMO_CZ, [1.0, 1.0])
    assert np.allclose(out.c, [0.0, 2.0])
    assert np.allclose(out.A, DEMO_CZ.A)
