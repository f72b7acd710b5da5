"""Complexity reduction: containment is the defining guarantee."""

import numpy as np
import pytest

from zonokit.errors import EmptySet, TargetTooSmall
from zonokit.queries import contains_points, is_inside, sample
from zonokit.reduction import (
    partope_bound,
    reduce_conzonotope,
    reduce_linezonotope,
    reduce_zonotope,
    rescale,
)
from zonokit.sets import ConZonotope, LineZonotope, Zonotope, as_conzonotope


def seeded_cz(seed=42, ng=47, nc=15):
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(2, ng)) * 0.35
    A = rng.normal(size=(nc, ng))
    xi0 = rng.uniform(-0.55, 0.55, ng)
    return ConZonotope(np.zeros(2), G, A, A @ xi0)


class TestReduceZonotope:
    def test_noop_when_under_target(self):
        z = Zonotope([0, 0], np.eye(2))
        out = reduce_zonotope(z, 5)
        assert out is z

    def test_boxing_oracle(self):
        # all three generators boxed: abs row sums give diag(1.1, 1.1)
        z = Zonotope([0, 0], [[1.0, 0.0, 0.1], [0.0, 1.0, 0.1]])
        out = reduce_zonotope(z, 2)
        assert out.ng == 2
        assert np.allclose(np.sort(np.abs(out.G).sum(axis=1)), [1.1, 1.1])
        rng = np.random.default_rng(0)
        pts = sample(z, 10**3, rng)
        assert contains_points(out, pts, 1e-8).all()

    def test_parallelotope_unchanged(self):
        z = Zonotope([1, 2], [[1.0, 0.5], [0.0, 1.0]])
        assert reduce_zonotope(z, 2) is z

    def test_target_too_small(self):
        with pytest.raises(TargetTooSmall):
            reduce_zonotope(Zonotope([0, 0], np.eye(2)), 1)

    def test_containment_random(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            z = Zonotope(rng.normal(size=3), rng.normal(size=(3, 12)))
            out = reduce_zonotope(z, 6)
            assert out.ng <= 6
            pts = sample(z, 300, rng)
            assert contains_points(out, pts, 1e-8).all()


class TestRescale:
    def test_unconstrained_noop(self):
        z = as_conzonotope(Zonotope([0, 0], np.eye(2)))
        assert rescale(z) is z

    def test_pinned_variable(self):
        z = ConZonotope([0.0, 0.0], [[1.0], [0.5]], [[1.0]], [0.5])
        out = rescale(z)
        assert np.allclose(out.G, 0.0)
        assert np.allclose(out.c, [0.5, 0.25])

    def test_membership_identical_two_sided(self):
        z = seeded_cz(7, 10, 3)
        for mode in ("interval", "lp"):
            out = rescale(z, mode)
            rng = np.random.default_rng(1)
            pts = sample(z, 500, rng)
            assert contains_points(out, pts, 1e-7).all()
            probes = rng.uniform(-3, 3, (200, 2))
            for p in probes:
                assert is_inside(z, p, 1e-7) == is_inside(out, p, 1e-7)

    def test_infeasible_raises(self):
        z = ConZonotope([0.0], [[1.0]], [[1.0]], [5.0])
        with pytest.raises(EmptySet):
            rescale(z)


class TestReduceConZonotope:
    def test_noop(self):
        z = seeded_cz(1, 8, 2)
        out = reduce_conzonotope(z, z.ng, z.nc)
        assert out.ng == z.ng and out.nc == z.nc

    def test_demo_counts_and_containment(self):
        z = seeded_cz()
        out = reduce_conzonotope(z, 4, 2)
        assert out.ng == 4 and out.nc == 2
        rng = np.random.default_rng(2)
        pts = sample(z, 10**4, rng)
        assert contains_points(out, pts, 1e-8).all()

    def test_drop_all_constraints(self):
        z = seeded_cz(3, 12, 4)
        out = reduce_conzonotope(z, 12, 0)
        assert out.nc == 0
        rng = np.random.default_rng(3)
        pts = sample(z, 10**3, rng)
        assert contains_points(out, pts, 1e-8).all()

    def test_target_too_small(self):
        with pytest.raises(TargetTooSmall):
            reduce_conzonotope(seeded_cz(), 1, 2)


class TestReduceLineZonotope:
    def test_no_lines_matches_cz(self):
        z = seeded_cz(5, 10, 3)
        lz = LineZonotope(z.c, G=z.G, A=z.A, b=z.b)
        out = reduce_linezonotope(lz, 6, 1)
        assert out.ng <= 6 and out.nc <= 1 and out.nl == 0
        rng = np.random.default_rng(5)
        pts = sample(z, 500, rng)
        for p in pts[:100]:
            assert is_inside(out, p, tol=1e-8)

    def test_realset_unchanged(self):
        out = reduce_linezonotope(LineZonotope.realset(2), 5, 2)
        assert out.nl == 2 and out.ng == 0 and out.nc == 0

    def test_removable_line_eliminated(self):
        # line delta with constraint delta = 0: substitutable exactly
        lz = LineZonotope([0.0, 0.0], G=[[1.0], [0.0]], M=[[1.0], [0.5]], S=[[1.0]], A=[[0.0]], b=[0.0])
        out = reduce_linezonotope(lz, 5, 5)
        assert out.nl == 0
        rng = np.random.default_rng(6)
        # membership oracle vs the pure-CZ remainder {c + G xi}
        for _ in range(100):
            xi = rng.uniform(-1, 1)
            assert is_inside(out, [xi, 0.0], tol=1e-8)
        assert not is_inside(out, [0.0, 1.0], tol=1e-8)


class TestPartopeBound:
    def test_parallelotope_fixed_point(self):
        z = Zonotope([1, 0], [[1.0, 0.2], [0.0, 1.0]])
        out = partope_bound(z)
        assert np.allclose(out.G, z.G) and np.allclose(out.c, z.c)

    def test_hexagon(self):
        z = Zonotope([0, 0], [[1, 0, 1], [0, 1, 1]])
        out = partope_bound(z)
        assert out.ng == 2
        rng = np.random.default_rng(7)
        pts = sample(z, 10**3, rng)
        assert contains_points(out, pts, 1e-8).all()

    def test_rank_deficient_padded(self):
        z = Zonotope([0, 0], [[1.0], [0.0]])
        out = partope_bound(z)
        assert out.ng == 2
        assert is_inside(out, [0.5, 0.0])

    def test_cz_containment(self):
        z = seeded_cz(8, 15, 5)
        out = partope_bound(z)
        assert isinstance(out, Zonotope) and out.ng == 2
        rng = np.random.default_rng(8)
        pts = sample(z, 10**3, rng)
        assert contains_points(out, pts, 1e-8).all()


def test_counts_contract_random():
    rng = np.random.default_rng(11)
    for _ in range(5):
        ng, nc = int(rng.integers(8, 20)), int(rng.integers(3, 8))
        G = rng.normal(size=(3, ng))
        A = rng.normal(size=(nc, ng))
        z = ConZonotope(np.zeros(3), G, A, A @ rng.uniform(-0.5, 0.5, ng))
        tng, tnc = int(rng.integers(5, 8)), int(rng.integers(0, 3))
        out = reduce_conzonotope(z, tng, tnc)
        assert out.ng <= tng and out.nc <= tnc
        pts = sample(z, 300, rng)
        assert contains_points(out, pts, 1e-8).all()
