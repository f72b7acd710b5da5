"""Polyhedral relaxations: tape soundness, envelope exactness at corners,
and the CZ propagation pipeline."""

import numpy as np
import pytest

from zonokit import funcdag as fd
from zonokit import polyrelax as pr
from zonokit.intervals import IntervalVector
from zonokit.queries import contains_points, interval_hull, sample_xi
from zonokit.sets import ConZonotope, as_conzonotope

DEMO_CZ = ConZonotope(
    [-1, 1], [[0.2, 0.4, 0.2], [0.2, 0.0, -0.2]], [[2.0, 2.0, 2.0]], [-3.0]
)


def demo_f():
    b = fd.DagBuilder(2)
    x1, x2 = b.inputs()
    return b.build(
        [3 * x1 - x1**2 / 7 - 4 * x1 * x2 / (4 + x1), -2 * x2 + 3 * x1 * x2 / (4 + x1)]
    )


def demo_g():
    b = fd.DagBuilder(4)
    x1, x2, v1, v2 = b.inputs()
    return b.build([x1 - fd.sin(x2 / 2) + v1, (-x1 + 1) * x2 + v2])


def _trace_satisfies(res, dag, xs, slack=1e-8):
    """Every factor trace lies in its interval slot and satisfies P."""
    trace = pr.full_factor_trace(res, dag, xs)
    lo, hi = res.Z.lo, res.Z.hi
    ok = np.all(trace >= lo[:, None] - slack, axis=0)
    ok &= np.all(trace <= hi[:, None] + slack, axis=0)
    P = res.P
    if P.nh:
        scale = np.maximum(1.0, np.linalg.norm(P.H, axis=1))
        ok &= np.all((P.H @ trace - P.k[:, None]) / scale[:, None] <= slack, axis=0)
    if P.neq:
        scale = np.maximum(1.0, np.linalg.norm(P.Aeq, axis=1))
        ok &= np.all(
            np.abs(P.Aeq @ trace - P.beq[:, None]) / scale[:, None] <= slack, axis=0
        )
    return ok


class TestEnvelopes:
    def test_square_slice_at_one(self):
        # x^2 over [0, 2] restricted to x = 1: tangent floor 1, secant roof 2
        b = fd.DagBuilder(1)
        (x,) = b.inputs()
        dag = b.build([x**2])
        res = pr.relax_function(dag, IntervalVector([0.0], [2.0]))
        xf, wf = res.input_factors[0], res.output_factors[0]
        zlo, zhi = -np.inf, np.inf
        for coeffs, rhs, _ in res.tape.ineq:
            cx = coeffs.get(xf, 0.0)
            cw = coeffs.get(wf, 0.0)
            if cw > 0:  # w <= (rhs - cx * 1) / cw
                zhi = min(zhi, (rhs - cx) / cw)
            elif cw < 0:
                zlo = max(zlo, (rhs - cx) / cw)
        assert np.isclose(zlo, 1.0) and np.isclose(zhi, 2.0)

    def test_mccormick_pins_corner(self):
        # x*y over [0,1]^2 at the corner (1,1): the rows force z = 1
        b = fd.DagBuilder(2)
        x, y = b.inputs()
        dag = b.build([x * y])
        res = pr.relax_function(dag, IntervalVector([0, 0], [1, 1]))
        fx, fy = res.input_factors
        fw = res.output_factors[0]
        zlo, zhi = -np.inf, np.inf
        for coeffs, rhs, _ in res.tape.ineq:
            cw = coeffs.get(fw, 0.0)
            base = rhs - coeffs.get(fx, 0.0) - coeffs.get(fy, 0.0)
            if cw > 0:
                zhi = min(zhi, base / cw)
            elif cw < 0:
                zlo = max(zlo, base / cw)
        assert np.isclose(zlo, 1.0) and np.isclose(zhi, 1.0)

    def test_affine_exact_line(self):
        b = fd.DagBuilder(1)
        (x,) = b.inputs()
        dag = b.build([2 * x + 1])
        res = pr.relax_function(dag, IntervalVector([-3.0], [3.0]))
        rng = np.random.default_rng(0)
        xs = rng.uniform(-3, 3, (1, 100))
        assert _trace_satisfies(res, dag, xs).all()
        # equality rows pin the output exactly
        trace = pr.full_factor_trace(res, dag, xs)
        out = trace[res.output_factors[0]]
        assert np.allclose(out, 2 * xs[0] + 1)


class TestTapeSoundness:
    @pytest.mark.parametrize(
        "build,domain",
        [
            (lambda: demo_f(), IntervalVector([3.0, 0.1], [7.0, 1.0])),
            (lambda: demo_g(), IntervalVector([3, -1, -0.2, -0.2], [7, 1, 0.2, 0.2])),
            (
                lambda: (lambda b: b.build([b.inputs()[0] ** 2]))(fd.DagBuilder(1)),
                IntervalVector([-2.0], [3.0]),
            ),
            (
                lambda: (lambda b: b.build([b.inputs()[0] * b.inputs()[1]]))(
                    fd.DagBuilder(2)
                ),
                IntervalVector([-1, -2], [2, 1]),
            ),
            (
                lambda: (lambda b: b.build([fd.exp(b.inputs()[0])]))(fd.DagBuilder(1)),
                IntervalVector([-1.0], [2.0]),
            ),
            (
                lambda: (lambda b: b.build([fd.log(b.inputs()[0])]))(fd.DagBuilder(1)),
                IntervalVector([0.5], [4.0]),
            ),
            (
                lambda: (lambda b: b.build([fd.sin(b.inputs()[0])]))(fd.DagBuilder(1)),
                IntervalVector([-2.0], [2.0]),
            ),
        ],
        ids=["demo-f", "demo-g", "square", "bilinear", "exp", "log", "sin"],
    )
    def test_traces_satisfy_tape(self, build, domain):
        dag = build()
        res = pr.relax_function(dag, domain)
        rng = np.random.default_rng(11)
        xs = domain.sample(10**4, rng).T
        assert _trace_satisfies(res, dag, xs, slack=1e-8).all()

    def test_prefix_restriction_reproduces_earlier_accumulator(self):
        dag = demo_f()
        domain = IntervalVector([3.0, 0.1], [7.0, 1.0])
        res = pr.relax_function(dag, domain)
        upto = res.Z.dim // 2
        P_half = res.tape.hpolytope(upto=upto)
        # rows of the prefix are exactly the rows created by factors < upto
        n_ineq = sum(1 for _, _, made in res.tape.ineq if made < upto)
        n_eq = sum(1 for _, _, made in res.tape.eq if made < upto)
        assert P_half.nh == n_ineq and P_half.neq == n_eq
        assert P_half.dim == upto

    def test_fallback_logged_for_wide_sin(self):
        b = fd.DagBuilder(1)
        (x,) = b.inputs()
        dag = b.build([fd.sin(x)])
        res = pr.relax_function(dag, IntervalVector([-2.0], [2.0]))
        assert any(op == "sin" for _, op in res.tape.fallbacks)
        res2 = pr.relax_function(dag, IntervalVector([0.1], [1.0]))
        assert not res2.tape.fallbacks  # concave piece: secant/tangent rule


class TestPropagatePR:
    def test_affine_membership_equivalent(self):
        b = fd.DagBuilder(2)
        x1, x2 = b.inputs()
        dag = b.build([x1 + 2 * x2, x1 - x2])
        R = np.array([[1.0, 2.0], [1.0, -1.0]])
        out, _ = pr.propagate_pr_cz(dag, DEMO_CZ)
        rng = np.random.default_rng(1)
        pts, _ = sample_xi(DEMO_CZ, 400, rng)
        imgs = pts @ R.T
        assert contains_points(out, imgs, 1e-7).all()
        h_out = interval_hull(out)
        from zonokit.setops import linmap

        h_ref = interval_hull(linmap(R, DEMO_CZ))
        assert np.allclose(h_out.lo, h_ref.lo, atol=1e-6)
        assert np.allclose(h_out.hi, h_ref.hi, atol=1e-6)

    def test_demo_containment(self):
        dag = demo_f()
        rng = np.random.default_rng(2)
        _, xi = sample_xi(DEMO_CZ, 10**4, rng)
        ok = pr.pr_sample_containment(dag, DEMO_CZ, xi, slack=1e-8)
        assert ok.all()

    def test_pr_tightest_on_demo(self):
        from zonokit.propagate import propagate
        from zonokit.queries import volume

        dag = demo_f()
        vols = {
            m: volume(propagate(DEMO_CZ, dag, m), "partope-nthroot")
            for m in ("meanvalue", "firstorder", "polyrelax")
        }
        assert vols["polyrelax"] <= vols["meanvalue"] + 1e-12
        assert vols["polyrelax"] <= vols["firstorder"] + 1e-12

    def test_pr_inside_natural_interval_box(self):
        dag = demo_f()
        out, _ = pr.propagate_pr_cz(dag, DEMO_CZ)
        h = interval_hull(out)
        nat = fd.eval_interval(dag, interval_hull(DEMO_CZ))
        assert np.all(h.lo >= nat.lo - 1e-7) and np.all(h.hi <= nat.hi + 1e-7)

    def test_pin_outputs_update(self):
        # pinning the output to a consistent value keeps the pre-image point
        dag = demo_f()
        x_true = np.array([-1.3, 1.0])
        assert contains_points(DEMO_CZ, x_true[None, :], 1e-9)[0]
        y = fd.eval_real(dag, x_true)
        pinned, res = pr.propagate_pr_cz(dag, DEMO_CZ, pin_outputs=y)
        from zonokit.queries import is_inside, projection

        xpart = projection(pinned, range(2))
        assert is_inside(xpart, x_true, tol=1e-7)
