"""Polyhedral relaxations of factorable functions over a box domain.

Walking the DAG assigns one factor per node and accumulates, per factor,
its natural-extension interval slot and a halfspace relaxation of the
elementary operation's graph: exact equality rows for affine ops,
McCormick inequalities for products/quotients, secant + tangent cuts for
convex/concave univariate pieces, and sound interval-bound rows as the
trigonometric fallback across inflections.

The tape is an explicit value threaded through the construction (not
ambient static state), so independent relaxations can run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import funcdag as fd
from . import intervals as iv
from .errors import DomainViolation, EmptySet
from .intervals import IntervalVector
from .queries import interval_hull, projection
from .sets import ConZonotope, HPolytope
from .setops import intersect_halfspaces_cz_info

DEFAULT_CUTS = 3  # tangent points: both endpoints plus midpoint


@dataclass
class RelaxTape:
    """Factor intervals Z plus the accumulated halfspace system P over the
    factor space.  Rows carry the factor index that created them so prefix
    restrictions reproduce earlier accumulators."""

    n_factors: int = 0
    z_lo: list = field(default_factory=list)
    z_hi: list = field(default_factory=list)
    ineq: list = field(default_factory=list)  # ({factor: coeff}, rhs, creator)
    eq: list = field(default_factory=list)
    input_factors: list = field(default_factory=list)
    output_factors: list = field(default_factory=list)
    fallbacks: list = field(default_factory=list)  # (factor, op) interval-row fallbacks

    def new_factor(self, lo, hi):
        self.z_lo.append(float(lo))
        self.z_hi.append(float(hi))
        self.n_factors += 1
        return self.n_factors - 1

    def add_ineq(self, coeffs, rhs, creator):
        self.ineq.append((dict(coeffs), float(rhs), creator))

    def add_eq(self, coeffs, rhs, creator):
        self.eq.append((dict(coeffs), float(rhs), creator))

    @property
    def Z(self):
        return IntervalVector(np.array(self.z_lo), np.array(self.z_hi))

    def hpolytope(self, upto=None):
        """Assemble the accumulator as an HPolytope over the factor space.

        upto restricts to rows created by factors < upto (prefix property).
        """
        nf = self.n_factors if upto is None else upto
        rows_i = [(c, r) for c, r, made in self.ineq if upto is None or made < upto]
        rows_e = [(c, r) for c, r, made in self.eq if upto is None or made < upto]
        H = np.zeros((len(rows_i), nf))
        k = np.zeros(len(rows_i))
        for i, (c, r) in enumerate(rows_i):
            for j, v in c.items():
                H[i, j] = v
            k[i] = r
        Aeq = np.zeros((len(rows_e), nf))
        beq = np.zeros(len(rows_e))
        for i, (c, r) in enumerate(rows_e):
            for j, v in c.items():
                Aeq[i, j] = v
            beq[i] = r
        return HPolytope(H, k, Aeq, beq, dim=nf)


@dataclass
class RelaxResult:
    Z: IntervalVector
    P: HPolytope
    input_factors: tuple
    output_factors: tuple
    tape: RelaxTape
    factor_of_node: tuple = ()
    aux_factors: tuple = ()  # (factor index, "recip", divisor node index)


def _fval(op, t, power=None):
    if op == "pow":
        return t**power
    return {
        "sqrt": np.sqrt,
        "exp": np.exp,
        "log": np.log,
        "sin": np.sin,
        "cos": np.cos,
        "tan": np.tan,
        "abs": np.abs,
    }[op](t)


def _fderiv(op, t, power=None):
    if op == "pow":
        return power * t ** (power - 1) if power else 0.0
    if op == "sqrt":
        return np.inf if t <= 0.0 else 0.5 / np.sqrt(t)
    if op == "exp":
        return np.exp(t)
    if op == "log":
        return np.inf if t <= 0.0 else 1.0 / t
    if op == "sin":
        return np.cos(t)
    if op == "cos":
        return -np.sin(t)
    if op == "tan":
        return 1.0 + np.tan(t) ** 2
    if op == "abs":
        return np.sign(t)
    raise DomainViolation(f"no envelope rule for {op}")


def _reciprocal_envelope(tape, r_fac, v_fac, V, creator, n_cuts):
    """Envelope rows for r = 1/v over a sign-definite v-interval
    (convex for v > 0, concave for v < 0)."""
    vl, vu = V
    rl, ru = iv.div_rng(1.0, 1.0, vl, vu)
    if vu - vl < 1e-14:
        tape.add_eq({r_fac: 1.0}, float(1.0 / vl), creator)
        return (float(rl), float(ru))
    s = (1.0 / vu - 1.0 / vl) / (vu - vl)
    if vl > 0.0:
        # secant above, tangents below
        tape.add_ineq({r_fac: 1.0, v_fac: -s}, 1.0 / vl - s * vl, creator)
        for t in np.linspace(vl, vu, max(2, n_cuts)):
            d = -1.0 / (t * t)
            tape.add_ineq({r_fac: -1.0, v_fac: d}, d * t - 1.0 / t, creator)
    else:
        # v < 0: concave; secant below, tangents above
        tape.add_ineq({r_fac: -1.0, v_fac: s}, s * vl - 1.0 / vl, creator)
        for t in np.linspace(vl, vu, max(2, n_cuts)):
            d = -1.0 / (t * t)
            tape.add_ineq({r_fac: 1.0, v_fac: -d}, 1.0 / t - d * t, creator)
    return (float(rl), float(ru))


def _curvature(op, lo, hi, power=None):
    """ "convex", "concave", or None (inflection inside) for the op on [lo, hi]."""
    if op in ("exp",):
        return "convex"
    if op in ("sqrt", "log"):
        return "concave"
    if op == "abs":
        return "convex"
    if op == "pow":
        if power % 2 == 0:
            return "convex"
        if power == 1:
            return "convex"  # affine: secant == tangents, exact either way
        if lo >= 0.0:
            return "convex"
        if hi <= 0.0:
            return "concave"
        return None
    if op == "sin":
        slo, shi = iv.sin_rng(lo, hi)
        if shi <= 0.0:
            return "convex"
        if slo >= 0.0:
            return "concave"
        return None
    if op == "cos":
        clo, chi = iv.cos_rng(lo, hi)
        if chi <= 0.0:
            return "convex"
        if clo >= 0.0:
            return "concave"
        return None
    if op == "tan":
        tlo, thi = iv.tan_rng(lo, hi)
        if tlo >= 0.0:
            return "convex"
        if thi <= 0.0:
            return "concave"
        return None
    return None


def _mccormick(tape, k_out, i_u, j_v, U, V, creator):
    """Four McCormick rows for w = u*v with u in U, v in V.

    Exact at the domain corners; the convex hull of the bilinear graph.
    """
    ul, uu = U
    vl, vu = V

    def row(cu, cv, cw, rhs):
        tape.add_ineq({i_u: cu, j_v: cv, k_out: cw}, rhs, creator)

    if i_u == j_v:
        # self-product (w = u*u): McCormick still sound with U = V
        def row(cu, cv, cw, rhs):  # noqa: F811 - merged coefficient variant
            tape.add_ineq({i_u: cu + cv, k_out: cw}, rhs, creator)

    # w >= ul v + vl u - ul vl ; w >= uu v + vu u - uu vu
    row(vl, ul, -1.0, ul * vl)
    row(vu, uu, -1.0, uu * vu)
    # w <= ul v + vu u - ul vu ; w <= uu v + vl u - uu vl
    row(-vu, -ul, 1.0, -ul * vu)
    row(-vl, -uu, 1.0, -uu * vl)


def _envelope(tape, k_out, i_u, op, U, W, creator, n_cuts, power=None):
    """Secant + tangent cuts for a convex or concave univariate op, or the
    two interval-bound rows as the sound fallback."""
    ul, uu = U
    wl, wu = W
    curv = _curvature(op, ul, uu, power)
    if curv is None:
        tape.add_ineq({k_out: 1.0}, wu, creator)
        tape.add_ineq({k_out: -1.0}, -wl, creator)
        tape.fallbacks.append((k_out, op))
        return
    if uu - ul < 1e-14:
        tape.add_eq({k_out: 1.0}, float(_fval(op, ul, power)), creator)
        return
    fl = float(_fval(op, ul, power))
    fu = float(_fval(op, uu, power))
    s = (fu - fl) / (uu - ul)
    if curv == "convex":
        # secant above: w <= fl + s (u - ul)
        tape.add_ineq({k_out: 1.0, i_u: -s}, fl - s * ul, creator)
    else:
        # secant below: w >= fl + s (u - ul)
        tape.add_ineq({k_out: -1.0, i_u: s}, s * ul - fl, creator)
    for t in np.linspace(ul, uu, max(2, n_cuts)):
        d = float(_fderiv(op, t, power))
        if not np.isfinite(d):
            continue  # singular endpoint (sqrt/log at 0): skip, stays sound
        ft = float(_fval(op, t, power))
        if curv == "convex":
            # tangent below: w >= ft + d (u - t)
            tape.add_ineq({k_out: -1.0, i_u: d}, d * t - ft, creator)
        else:
            # tangent above: w <= ft + d (u - t)
            tape.add_ineq({k_out: 1.0, i_u: -d}, ft - d * t, creator)


def relax_function(dag, domain, n_cuts=DEFAULT_CUTS):
    """Relax the DAG over the box: per-factor interval slots Z plus the
    accumulated halfspace system P over the factor space.

    Every node gets a factor; division nodes additionally create one
    auxiliary reciprocal factor."""
    dag = dag.ensure_input_nodes()
    if domain.dim != dag.arity:
        raise DomainViolation(
            f"domain has dim {domain.dim}, dag arity is {dag.arity}"
        )
    zlo, zhi = fd.interval_factor_trace(dag, domain)
    tape = RelaxTape()
    fac = [None] * dag.n_nodes  # node index -> factor index
    aux = []
    for idx, nd in enumerate(dag.nodes):
        k = tape.new_factor(zlo[idx], zhi[idx])
        fac[idx] = k

        def U(node):
            return (zlo[node], zhi[node])

        if nd.op == "input":
            tape.input_factors.append(k)
            continue
        if nd.op == "const":
            tape.add_eq({k: 1.0}, nd.value, k)
        elif nd.op == "add":
            a, b = fac[nd.args[0]], fac[nd.args[1]]
            tape.add_eq({k: 1.0, a: -1.0, b: -1.0} if a != b else {k: 1.0, a: -2.0}, 0.0, k)
        elif nd.op == "sub":
            a, b = fac[nd.args[0]], fac[nd.args[1]]
            if a == b:
                tape.add_eq({k: 1.0}, 0.0, k)
            else:
                tape.add_eq({k: 1.0, a: -1.0, b: 1.0}, 0.0, k)
        elif nd.op == "mul":
            an, bn = nd.args
            _mccormick(tape, k, fac[an], fac[bn], U(an), U(bn), k)
        elif nd.op == "div":
            an, bn = nd.args
            # w = u / v, two complementary relaxations:
            # (i) McCormick on u = w * v with w bounded by interval division;
            # (ii) an auxiliary reciprocal factor r = 1/v with its secant/
            #      tangent envelope, then McCormick on w = u * r.  The
            #      reciprocal route is much tighter when v has a narrow
            #      sign-definite range, since its envelope gap is second
            #      order in the v-range.
            _mccormick(tape, fac[an], k, fac[bn], (zlo[idx], zhi[idx]), U(bn), k)
            rl0, ru0 = iv.div_rng(1.0, 1.0, zlo[bn], zhi[bn])
            r_fac = tape.new_factor(rl0, ru0)
            aux.append((r_fac, "recip", bn))
            R = _reciprocal_envelope(tape, r_fac, fac[bn], U(bn), r_fac, n_cuts)
            _mccormick(tape, k, fac[an], r_fac, U(an), R, r_fac)
        elif nd.op == "pow":
            if nd.power == 0:
                tape.add_eq({k: 1.0}, 1.0, k)
            elif nd.power == 1:
                tape.add_eq({k: 1.0, fac[nd.args[0]]: -1.0}, 0.0, k)
            else:
                _envelope(
                    tape, k, fac[nd.args[0]], "pow", U(nd.args[0]), (zlo[idx], zhi[idx]), k, n_cuts, nd.power
                )
        else:
            _envelope(tape, k, fac[nd.args[0]], nd.op, U(nd.args[0]), (zlo[idx], zhi[idx]), k, n_cuts)

    imap = dag.input_node_map()
    inputs = tuple(fac[imap[i]] for i in range(dag.arity))
    outputs = tuple(fac[o] for o in dag.outputs)
    return RelaxResult(
        tape.Z, tape.hpolytope(), inputs, outputs, tape, tuple(fac), tuple(aux)
    )


def full_factor_trace(res, dag, x):
    """Per-factor values of the relaxation for inputs x (batched), including
    the auxiliary reciprocal factors."""
    dag = dag.ensure_input_nodes()
    node_trace = fd.factor_trace(dag, x)
    width = node_trace.shape[1:] if node_trace.ndim > 1 else ()
    out = np.zeros((res.Z.dim,) + width)
    for node, f in enumerate(res.factor_of_node):
        out[f] = node_trace[node]
    for f, kind, node in res.aux_factors:
        if kind == "recip":
            out[f] = 1.0 / node_trace[node]
    return out


def propagate_pr_cz(dag, X, n_cuts=DEFAULT_CUTS, pin_outputs=None):
    """CZ enclosure of dag(X) via the polyhedral relaxation.

    Lifts X into the factor space (input coordinates tied to X, remaining
    factors spanned by fresh generators over their interval slots),
    intersects with the accumulated halfspaces, and projects onto the
    output factors.  pin_outputs, when given, additionally pins the output
    factors to those values and projects onto the state inputs instead
    (the measurement-update variant).
    """
    X = X if isinstance(X, ConZonotope) else ConZonotope(X.c, X.G)
    hull = interval_hull(X)
    res = relax_function(dag, hull, n_cuts)
    lifted = _lift_to_factor_space(X, res)
    P = res.P
    if pin_outputs is not None:
        y = np.asarray(pin_outputs, dtype=float).ravel()
        sel = np.zeros((len(res.output_factors), res.Z.dim))
        for r, of in enumerate(res.output_factors):
            sel[r, of] = 1.0
        P = HPolytope(
            P.H,
            P.k,
            np.vstack([P.Aeq, sel]) if P.neq else sel,
            np.concatenate([P.beq, y]) if P.neq else y,
            dim=res.Z.dim,
        )
    inter, _ = intersect_halfspaces_cz_info(lifted, P)
    dims = list(res.output_factors) if pin_outputs is None else list(res.input_factors)
    return projection(inter, dims), res


def _lift_to_factor_space(X, res):
    """CZ over the factor space containing every factor trace of X's points."""
    nf = res.Z.dim
    inputs = list(res.input_factors)
    others = [j for j in range(nf) if j not in set(inputs)]
    mid, rad = res.Z.mid, res.Z.rad
    c = mid.copy()
    for pos, j in enumerate(inputs):
        c[j] = X.c[pos]
    G = np.zeros((nf, X.ng + len(others)))
    for pos, j in enumerate(inputs):
        G[j, : X.ng] = X.G[pos]
    for t, j in enumerate(others):
        G[j, X.ng + t] = rad[j]
    A = np.hstack([X.A, np.zeros((X.nc, len(others)))])
    return ConZonotope(c, G, A, X.b)


def pr_sample_containment(dag, X, xi_samples, n_cuts=DEFAULT_CUTS, slack=1e-8):
    """Constructive membership of propagated samples in the PR enclosure.

    For each xi of X, an explicit witness xi-vector of the intersected
    factor-space CZ is assembled (X's own xi, the fresh-factor coordinates
    from the interval slots, the slack coordinates from the halfspace rows)
    and verified against every constraint, the unit box, and the projected
    image point.  Exactly the membership LP's feasibility certificate,
    vectorized over the whole batch.
    """
    X = X if isinstance(X, ConZonotope) else ConZonotope(X.c, X.G)
    xi_samples = np.atleast_2d(np.asarray(xi_samples, dtype=float))
    m = xi_samples.shape[0]
    dag_e = dag.ensure_input_nodes()
    hull = interval_hull(X)
    res = relax_function(dag_e, hull, n_cuts)
    lifted = _lift_to_factor_space(X, res)
    inter, _ = intersect_halfspaces_cz_info(lifted, res.P)

    pts = X.c + xi_samples @ X.G.T
    trace = full_factor_trace(res, dag_e, pts.T)  # (n_factors, m)
    images = trace[list(res.output_factors), :]

    nf = res.Z.dim
    inputs = set(res.input_factors)
    others = [j for j in range(nf) if j not in inputs]
    mid, rad = res.Z.mid, res.Z.rad
    ok = np.ones(m, dtype=bool)

    fresh = np.zeros((len(others), m))
    for t, j in enumerate(others):
        if rad[j] > 1e-300:
            fresh[t] = (trace[j] - mid[j]) / rad[j]
        else:
            ok &= np.abs(trace[j] - mid[j]) <= slack * max(1.0, abs(mid[j]))
    xi_lift = np.vstack([xi_samples.T, fresh])  # (lifted.ng, m)

    ns = inter.ng - lifted.ng
    xi_full = np.vstack([xi_lift, np.zeros((ns, m))])
    if ns:
        # slack rows sit right after lifted's own constraint rows
        start = lifted.nc
        for i in range(ns):
            row = inter.A[start + i]
            radr = -row[lifted.ng + i]
            v = row[: lifted.ng] @ xi_lift - inter.b[start + i]
            if radr > 1e-300:
                xi_full[lifted.ng + i] = v / radr
            else:
                ok &= np.abs(v) <= slack * max(1.0, np.abs(row).max())

    ok &= np.max(np.abs(xi_full), axis=0) <= 1.0 + slack
    if inter.nc:
        resid = inter.A @ xi_full - inter.b[:, None]
        scale = max(1.0, np.abs(inter.A).max(), np.abs(inter.b).max(initial=1.0))
        ok &= np.max(np.abs(resid), axis=0) <= slack * scale
    out_rows = inter.c[list(res.output_factors), None] + inter.G[
        list(res.output_factors), :
    ] @ xi_full
    scale_img = max(1.0, np.abs(images).max(initial=1.0))
    ok &= np.max(np.abs(out_rows - images), axis=0) <= slack * scale_img
    return ok
