"""LP-backed queries: emptiness, membership, hulls, H-rep, volume, sampling."""

import numpy as np
import pytest

from zonokit.errors import (
    BudgetExceeded,
    DegenerateZonotope,
    EmptySet,
    UnboundedSet,
    UnsupportedMethod,
)
from zonokit.geometry import polygon_contains
from zonokit.queries import (
    contains_points,
    hrep,
    interval_hull,
    is_empty,
    is_inside,
    permute,
    projection,
    radius,
    sample,
    volume,
)
from zonokit.sets import ConZonotope, LineZonotope, Zonotope, as_conzonotope, vertices_2d
from zonokit.setops import lift

DEMO_CZ = ConZonotope(
    [-1, 1], [[0.2, 0.4, 0.2], [0.2, 0.0, -0.2]], [[2.0, 2.0, 2.0]], [-3.0]
)


def unit_box(n=2):
    return Zonotope(np.zeros(n), np.eye(n))


class TestIsEmpty:
    def test_unreachable_rhs(self):
        # max xi1 + xi2 = 2 < 3: analytically forced empty
        z = ConZonotope([0.0], [[1.0, 0.0]], [[1.0, 1.0]], [3.0])
        assert is_empty(z)

    def test_zero_rhs_feasible(self):
        z = ConZonotope([0.0], [[1.0, 0.0]], [[1.0, 1.0]], [0.0])
        assert not is_empty(z)

    def test_line_absorbs_constraint(self):
        z = LineZonotope([0.0], M=[[1.0]], S=[[1.0]], A=None, b=[10.0])
        assert not is_empty(z)

    def test_zonotope_never_empty(self):
        assert not is_empty(unit_box())


class TestIsInside:
    def test_center(self):
        assert is_inside(unit_box(), [0.0, 0.0])

    def test_outside_support(self):
        z = unit_box()
        beyond = z.c + 1.1 * np.abs(z.G).sum(axis=1)
        assert not is_inside(z, beyond)

    def test_sampler_agreement(self):
        rng = np.random.default_rng(0)
        pts = sample(DEMO_CZ, 300, rng)
        lam = rng.uniform(0, 1, (100, 1))
        combos = lam * pts[:100] + (1 - lam) * pts[100:200]
        for p in combos[:50]:
            assert is_inside(DEMO_CZ, p, tol=1e-8)


class TestGridOracle:
    def test_random_small_czs(self):
        """is_empty / is_inside agree with a dense xi-grid oracle on small
        instances built to give the grid a clean decision."""
        rng = np.random.default_rng(42)
        grid1 = np.arange(-1.0, 1.0 + 1e-9, 0.1)
        for trial in range(50):
            ng = rng.integers(2, 5)
            nc = rng.integers(1, 3)
            G = rng.normal(size=(2, ng))
            A = rng.normal(size=(nc, ng))
            if trial % 2 == 0:
                # witness on the grid: nonempty, and the grid certifies it
                xi0 = rng.choice(grid1, ng)
                z = ConZonotope([0, 0], G, A, A @ xi0)
                assert not is_empty(z)
                assert is_inside(z, z.c + G @ xi0, tol=1e-9)
            else:
                # rhs beyond the reachable range: provably empty
                margin = np.abs(A).sum(axis=1)
                b = margin + 1.0 + rng.uniform(0, 1, nc)
                z = ConZonotope([0, 0], G, A, b)
                grids = np.meshgrid(*([grid1] * ng))
                xis = np.stack([g.ravel() for g in grids])
                assert np.all(np.abs(A @ xis - b[:, None]).max(axis=0) > 0.5)
                assert is_empty(z)


class TestIntervalHull:
    def test_unit_box(self):
        h = interval_hull(unit_box())
        assert np.allclose(h.lo, [-1, -1]) and np.allclose(h.hi, [1, 1])

    def test_abs_row_sums(self):
        z = Zonotope([0, 0], [[1, 0, 1], [0, 1, 1]])
        h = interval_hull(z)
        assert np.allclose(h.lo, [-2, -2]) and np.allclose(h.hi, [2, 2])

    def test_demo_cz_one_sided_sampling(self):
        h = interval_hull(DEMO_CZ)
        rng = np.random.default_rng(1)
        pts = sample(DEMO_CZ, 10**4, rng)
        assert np.all(pts.min(axis=0) >= h.lo - 1e-9)
        assert np.all(pts.max(axis=0) <= h.hi + 1e-9)
        # faces are attained up to sampling slack
        assert np.all(pts.min(axis=0) - h.lo < 0.05)
        assert np.all(h.hi - pts.max(axis=0) < 0.05)

    def test_hull_minimal_sign_vector(self):
        rng = np.random.default_rng(2)
        z = Zonotope(rng.normal(size=2), rng.normal(size=(2, 4)))
        h = interval_hull(z)
        for i in range(2):
            xi = np.sign(z.G[i])
            xi[xi == 0] = 1.0
            assert np.isclose((z.c + z.G @ xi)[i], h.hi[i])

    def test_unbounded_lz(self):
        with pytest.raises(UnboundedSet):
            interval_hull(LineZonotope.realset(2))

    def test_empty_raises(self):
        z = ConZonotope([0.0], [[1.0]], [[1.0]], [5.0])
        with pytest.raises(EmptySet):
            interval_hull(z)


class TestHrep:
    def test_unit_box(self):
        p = hrep(unit_box())
        assert p.nh == 4
        assert np.allclose(np.sort(p.k), [1, 1, 1, 1])

    def test_hexagon_rows(self):
        p = hrep(Zonotope([0, 0], [[1, 0, 1], [0, 1, 1]]))
        assert p.nh == 6

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateZonotope):
            hrep(Zonotope([0, 0], [[1.0, 2.0], [0.0, 0.0]]))

    def test_budget(self):
        rng = np.random.default_rng(0)
        z = Zonotope(np.zeros(4), rng.normal(size=(4, 30)))
        with pytest.raises(BudgetExceeded):
            hrep(z, budget=10)

    def test_membership_and_tightness(self):
        rng = np.random.default_rng(7)
        z = Zonotope(rng.normal(size=2), rng.normal(size=(2, 5)))
        p = hrep(z)
        pts = sample(z, 500, rng)
        for x in pts:
            assert p.contains(x, tol=1e-8)
        # every facet touched by some corner of xi
        for h, kf in zip(p.H, p.k):
            best = h @ z.c + np.abs(h @ z.G).sum()
            assert np.isclose(best, kf, atol=1e-9)

    def test_cz_hrep_duality_with_vertices(self):
        from zonokit.geometry import polygon_from_halfspaces

        p = hrep(DEMO_CZ)
        poly_h = polygon_from_halfspaces(p.H, p.k)
        poly_v = vertices_2d(DEMO_CZ)
        for v in poly_v:
            assert polygon_contains(poly_h, v, tol=1e-6)
        for v in poly_h:
            assert polygon_contains(poly_v, v, tol=1e-6)


class TestVolume:
    def test_unit_box(self):
        assert np.isclose(volume(unit_box(), "exact"), 4.0)

    def test_hexagon_formula(self):
        # oracle: Monte-Carlo volume within 2%
        z = Zonotope([0, 0], [[1, 0, 1], [0, 1, 1]])
        v = volume(z, "exact")
        assert np.isclose(v, 12.0)
        rng = np.random.default_rng(3)
        h = interval_hull(z)
        box_pts = h.lo + rng.uniform(0, 1, (2 * 10**5, 2)) * h.diam
        frac = contains_points(z, box_pts, 1e-9).mean()
        mc = frac * np.prod(h.diam)
        assert abs(mc - v) / v < 0.02

    def test_point_zero(self):
        assert volume(Zonotope([1.0, 2.0]), "exact") == 0.0

    def test_exact_cz_unsupported(self):
        with pytest.raises(UnsupportedMethod):
            volume(DEMO_CZ, "exact")

    def test_partope_nthroot(self):
        v = volume(unit_box(), "partope-nthroot")
        assert np.isclose(v, 2.0)  # (2^2 * det I)^(1/2)


class TestRadius:
    def test_unit_box_inf(self):
        assert np.isclose(radius(unit_box(), "inf"), 1.0)

    def test_point(self):
        assert radius(Zonotope([3.0, 4.0]), "inf") == 0.0

    def test_hexagon(self):
        assert np.isclose(radius(Zonotope([0, 0], [[1, 0, 1], [0, 1, 1]]), "inf"), 2.0)

    def test_frobenius(self):
        assert np.isclose(radius(unit_box(), "frobenius"), np.sqrt(2.0))


class TestSample:
    def test_zero_count(self):
        assert sample(unit_box(), 0, np.random.default_rng(0)).shape == (0, 2)

    def test_box_statistics(self):
        rng = np.random.default_rng(5)
        pts = sample(unit_box(), 10**3, rng)
        assert contains_points(unit_box(), pts, 1e-9).all()
        assert np.all(np.abs(pts.mean(axis=0)) < 0.1)

    def test_demo_cz_membership(self):
        rng = np.random.default_rng(6)
        pts = sample(DEMO_CZ, 10**3, rng)
        assert contains_points(DEMO_CZ, pts, 1e-8).all()

    def test_empty_raises(self):
        z = ConZonotope([0.0], [[1.0]], [[1.0]], [5.0])
        with pytest.raises(EmptySet):
            sample(z, 10, np.random.default_rng(0))

    def test_reproducible(self):
        a = sample(DEMO_CZ, 50, np.random.default_rng(9))
        b = sample(DEMO_CZ, 50, np.random.default_rng(9))
        assert np.array_equal(a, b)


class TestProjection:
    def test_identity_permutation(self):
        z = DEMO_CZ
        out = permute(z, [0, 1])
        assert np.allclose(out.c, z.c) and np.allclose(out.G, z.G)

    def test_project_3d_box(self):
        z = Zonotope(np.zeros(3), np.eye(3))
        out = projection(z, [0, 2])
        h = interval_hull(out)
        assert np.allclose(h.lo, [-1, -1]) and np.allclose(h.hi, [1, 1])

    def test_projection_drops_constraints_documented(self):
        # projecting the lifted zonotope onto the first n dims forgets the
        # constraints: a point outside the CZ lands inside the projection
        z = DEMO_CZ
        L = lift(z)
        proj = projection(L, [0, 1])
        probe = z.c + z.G @ np.array([1.0, 1.0, 1.0])  # violates A xi = b
        assert not is_inside(z, probe)
        assert is_inside(proj, probe, tol=1e-9)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            projection(unit_box(), [0, 5])

    def test_bad_permutation(self):
        with pytest.raises(IndexError):
            permute(unit_box(), [0, 0])


def test_contains_points_paths_agree():
    """The vectorized membership fast paths match the per-point LP."""
    rng = np.random.default_rng(10)
    # square-invertible path
    z1 = ConZonotope([0, 0], np.eye(2), None, None)
    # hrep path (underdetermined, small)
    z2 = Zonotope([0.5, -0.5], rng.normal(size=(2, 5)))
    # full-column-rank overdetermined path
    z3 = ConZonotope([0, 0], rng.normal(size=(2, 3)), rng.normal(size=(2, 3)), [0.1, -0.2])
    for z in (z1, z2, z3):
        pts = rng.uniform(-2, 2, (100, 2))
        fast = contains_points(z, pts, 1e-9)
        slow = np.array([is_inside(z, p, 1e-9) for p in pts])
        assert np.array_equal(fast, slow)
