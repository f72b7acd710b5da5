"""Factorable functions as expression DAGs with shared subexpressions.

A FuncDAG is an ordered node list (children precede parents) over the
elementary op set {add, sub, mul, div, pow, sqrt, exp, log, sin, cos, tan,
abs}; norm1/norm2 requests expand structurally into abs/sqrt chains at
construction.  Evaluation is available over reals (batched) and intervals,
plus forward-mode Jacobians (real and interval) and interval Hessians.

Build either through DagBuilder's operator-overloaded expressions or from
the JSON schema (see dag_from_json).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import intervals as iv
from .errors import DomainViolation, NonDifferentiable, ShapeMismatch
from .intervals import IntervalMatrix, IntervalVector

UNARY_OPS = ("pow", "sqrt", "exp", "log", "sin", "cos", "tan", "abs")
BINARY_OPS = ("add", "sub", "mul", "div")


@dataclass(frozen=True)
class Node:
    op: str  # "input", "const", or an elementary op
    args: tuple = ()
    value: float | None = None  # const
    index: int | None = None  # input
    power: int | None = None  # pow


@dataclass(frozen=True)
class FuncDAG:
    arity: int
    nodes: tuple
    outputs: tuple

    def __post_init__(self):
        for i, nd in enumerate(self.nodes):
            if nd.op == "input":
                if not 0 <= nd.index < self.arity:
                    raise ShapeMismatch(f"node {i}: input index {nd.index} out of range")
            elif nd.op == "const":
                pass
            elif nd.op in UNARY_OPS:
                if len(nd.args) != 1:
                    raise ShapeMismatch(f"node {i}: {nd.op} takes one argument")
            elif nd.op in BINARY_OPS:
                if len(nd.args) != 2:
                    raise ShapeMismatch(f"node {i}: {nd.op} takes two arguments")
            else:
                raise ShapeMismatch(f"node {i}: unknown op {nd.op!r}")
            if any(not 0 <= a < i for a in nd.args):
                raise ShapeMismatch(f"node {i}: argument references must precede the node")
        for o in self.outputs:
            if not 0 <= o < len(self.nodes):
                raise ShapeMismatch(f"output index {o} out of range")

    @property
    def n_out(self):
        return len(self.outputs)

    @property
    def n_nodes(self):
        return len(self.nodes)

    def input_node_map(self):
        """input index -> node index (None when the input never appears)."""
        m = [None] * self.arity
        for i, nd in enumerate(self.nodes):
            if nd.op == "input" and m[nd.index] is None:
                m[nd.index] = i
        return m

    def with_outputs(self, outputs):
        return FuncDAG(self.arity, self.nodes, tuple(int(o) for o in outputs))

    def ensure_input_nodes(self):
        """Equivalent DAG in which every input has a node (appended if absent)."""
        m = self.input_node_map()
        if all(x is not None for x in m):
            return self
        nodes = list(self.nodes)
        for idx, nd_idx in enumerate(m):
            if nd_idx is None:
                nodes.append(Node("input", index=idx))
        return FuncDAG(self.arity, tuple(nodes), self.outputs)


# ---------------------------------------------------------------------------
# builder


class Expr:
    """Operator-overloaded handle into a DagBuilder."""

    __slots__ = ("builder", "idx")

    def __init__(self, builder, idx):
        self.builder = builder
        self.idx = idx

    def _bin(self, op, other, swap=False):
        other = self.builder._coerce(other)
        a, b = (other.idx, self.idx) if swap else (self.idx, other.idx)
        return self.builder._node(Node(op, (a, b)))

    def __add__(self, other):
        return self._bin("add", other)

    __radd__ = __add__

    def __sub__(self, other):
        return self._bin("sub", other)

    def __rsub__(self, other):
        return self._bin("sub", other, swap=True)

    def __mul__(self, other):
        return self._bin("mul", other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._bin("div", other)

    def __rtruediv__(self, other):
        return self._bin("div", other, swap=True)

    def __pow__(self, n):
        return self.builder._node(Node("pow", (self.idx,), power=int(n)))

    def __neg__(self):
        return self.builder.const(-1.0) * self


def _unary_expr(op):
    def fn(e: Expr):
        return e.builder._node(Node(op, (e.idx,)))

    fn.__name__ = op
    return fn


sqrt = _unary_expr("sqrt")
exp = _unary_expr("exp")
log = _unary_expr("log")
sin = _unary_expr("sin")
cos = _unary_expr("cos")
tan = _unary_expr("tan")
absval = _unary_expr("abs")


def norm1(exprs):
    """||x||_1 expanded into abs/add nodes."""
    acc = absval(exprs[0])
    for e in exprs[1:]:
        acc = acc + absval(e)
    return acc


def norm2(exprs):
    """||x||_2 expanded into pow/add/sqrt nodes."""
    acc = exprs[0] ** 2
    for e in exprs[1:]:
        acc = acc + e**2
    return sqrt(acc)


class DagBuilder:
    """Hash-consing builder: identical (op, args) pairs share one node."""

    def __init__(self, arity):
        self.arity = int(arity)
        self._nodes = []
        self._memo = {}
        for i in range(self.arity):
            self._node(Node("input", index=i))

    def _key(self, nd):
        return (nd.op, nd.args, nd.value, nd.index, nd.power)

    def _node(self, nd):
        key = self._key(nd)
        if key in self._memo:
            return Expr(self, self._memo[key])
        self._nodes.append(nd)
        idx = len(self._nodes) - 1
        self._memo[key] = idx
        return Expr(self, idx)

    def inputs(self):
        return tuple(Expr(self, i) for i in range(self.arity))

    def const(self, v):
        return self._node(Node("const", value=float(v)))

    def _coerce(self, x):
        if isinstance(x, Expr):
            return x
        return self.const(x)

    def build(self, outputs):
        if isinstance(outputs, Expr):
            outputs = [outputs]
        return FuncDAG(self.arity, tuple(self._nodes), tuple(e.idx for e in outputs))


# ---------------------------------------------------------------------------
# evaluation


def _trace_real(dag, x):
    x = np.asarray(x, dtype=float)
    if x.shape[0] != dag.arity:
        raise ShapeMismatch(f"input has {x.shape[0]} rows, dag arity is {dag.arity}")
    vals = [None] * dag.n_nodes
    for i, nd in enumerate(dag.nodes):
        if nd.op == "input":
            vals[i] = x[nd.index]
        elif nd.op == "const":
            vals[i] = nd.value if x.ndim == 1 else np.full(x.shape[1], nd.value)
        elif nd.op == "add":
            vals[i] = vals[nd.args[0]] + vals[nd.args[1]]
        elif nd.op == "sub":
            vals[i] = vals[nd.args[0]] - vals[nd.args[1]]
        elif nd.op == "mul":
            vals[i] = vals[nd.args[0]] * vals[nd.args[1]]
        elif nd.op == "div":
            den = vals[nd.args[1]]
            if np.any(np.asarray(den) == 0.0):
                raise DomainViolation("division by zero along the trace")
            vals[i] = vals[nd.args[0]] / den
        elif nd.op == "pow":
            vals[i] = np.asarray(vals[nd.args[0]], dtype=float) ** nd.power
        elif nd.op == "sqrt":
            v = vals[nd.args[0]]
            if np.any(np.asarray(v) < 0.0):
                raise DomainViolation("sqrt of a negative value")
            vals[i] = np.sqrt(v)
        elif nd.op == "exp":
            vals[i] = np.exp(vals[nd.args[0]])
        elif nd.op == "log":
            v = vals[nd.args[0]]
            if np.any(np.asarray(v) <= 0.0):
                raise DomainViolation("log of a nonpositive value")
            vals[i] = np.log(v)
        elif nd.op == "sin":
            vals[i] = np.sin(vals[nd.args[0]])
        elif nd.op == "cos":
            vals[i] = np.cos(vals[nd.args[0]])
        elif nd.op == "tan":
            vals[i] = np.tan(vals[nd.args[0]])
        elif nd.op == "abs":
            vals[i] = np.abs(vals[nd.args[0]])
    return vals


def eval_real(dag, x):
    """Evaluate over reals; x is (arity,) or (arity, batch)."""
    vals = _trace_real(dag, x)
    return np.array([vals[o] for o in dag.outputs])


def factor_trace(dag, x):
    """Values of every node (one factor per node); (n_nodes,) or (n_nodes, batch)."""
    return np.array(_trace_real(dag, x))


def _trace_interval(dag, X):
    if X.dim != dag.arity:
        raise ShapeMismatch(f"box has dim {X.dim}, dag arity is {dag.arity}")
    lo, hi = X.lo, X.hi
    vals = [None] * dag.n_nodes
    for i, nd in enumerate(dag.nodes):
        if nd.op == "input":
            vals[i] = (lo[nd.index], hi[nd.index])
        elif nd.op == "const":
            vals[i] = (nd.value, nd.value)
        elif nd.op == "add":
            vals[i] = iv.add_rng(*vals[nd.args[0]], *vals[nd.args[1]])
        elif nd.op == "sub":
            vals[i] = iv.sub_rng(*vals[nd.args[0]], *vals[nd.args[1]])
        elif nd.op == "mul":
            vals[i] = iv.mul_rng(*vals[nd.args[0]], *vals[nd.args[1]])
        elif nd.op == "div":
            vals[i] = iv.div_rng(*vals[nd.args[0]], *vals[nd.args[1]])
        elif nd.op == "pow":
            vals[i] = iv.pow_rng(*vals[nd.args[0]], nd.power)
        else:
            kern = getattr(iv, f"{nd.op}_rng")
            vals[i] = kern(*vals[nd.args[0]])
    return vals


def eval_interval(dag, X):
    """Natural interval extension: node-wise interval arithmetic."""
    vals = _trace_interval(dag, X)
    return IntervalVector(
        np.array([float(vals[o][0]) for o in dag.outputs]),
        np.array([float(vals[o][1]) for o in dag.outputs]),
    )


def interval_factor_trace(dag, X):
    """Per-node interval slots of the natural extension (lo, hi arrays)."""
    vals = _trace_interval(dag, X)
    return (
        np.array([float(v[0]) for v in vals]),
        np.array([float(v[1]) for v in vals]),
    )


# ---------------------------------------------------------------------------
# forward-mode derivatives

_ZERO = (0.0, 0.0)


def _ione(v):
    return (v, v)


def _unary_d1(op, u, power=None):
    """Interval enclosure of f'(u) for a unary op over the interval u."""
    ul, uh = u
    if op == "pow":
        n = power
        if n == 0:
            return _ZERO
        return iv.mul_rng(*_ione(float(n)), *iv.pow_rng(ul, uh, n - 1))
    if op == "sqrt":
        if ul <= 0.0:
            raise DomainViolation("sqrt not differentiable at 0 over the box")
        s = iv.sqrt_rng(ul, uh)
        return iv.div_rng(1.0, 1.0, 2.0 * s[0], 2.0 * s[1])
    if op == "exp":
        return iv.exp_rng(ul, uh)
    if op == "log":
        return iv.div_rng(1.0, 1.0, ul, uh)
    if op == "sin":
        return iv.cos_rng(ul, uh)
    if op == "cos":
        return iv.neg_rng(*iv.sin_rng(ul, uh))
    if op == "tan":
        t = iv.tan_rng(ul, uh)
        return iv.add_rng(1.0, 1.0, *iv.sqr_rng(*t))
    if op == "abs":
        if ul <= 0.0 <= uh:
            raise DomainViolation("abs not differentiable over a box containing 0")
        return _ione(1.0 if ul > 0.0 else -1.0)
    raise NonDifferentiable(f"no derivative rule for {op}")


def _unary_d2(op, u, power=None):
    """Interval enclosure of f''(u)."""
    ul, uh = u
    if op == "pow":
        n = power
        if n <= 1:
            return _ZERO
        return iv.mul_rng(*_ione(float(n * (n - 1))), *iv.pow_rng(ul, uh, n - 2))
    if op == "sqrt":
        if ul <= 0.0:
            raise DomainViolation("sqrt second derivative needs a positive box")
        s = iv.sqrt_rng(ul, uh)
        den = iv.mul_rng(*iv.mul_rng(ul, uh, *s), 4.0, 4.0)
        return iv.neg_rng(*iv.div_rng(1.0, 1.0, *den))
    if op == "exp":
        return iv.exp_rng(ul, uh)
    if op == "log":
        return iv.neg_rng(*iv.div_rng(1.0, 1.0, *iv.sqr_rng(ul, uh)))
    if op == "sin":
        return iv.neg_rng(*iv.sin_rng(ul, uh))
    if op == "cos":
        return iv.neg_rng(*iv.cos_rng(ul, uh))
    if op == "tan":
        t = iv.tan_rng(ul, uh)
        sec2 = iv.add_rng(1.0, 1.0, *iv.sqr_rng(*t))
        return iv.mul_rng(*iv.mul_rng(2.0, 2.0, *t), *sec2)
    if op == "abs":
        if ul <= 0.0 <= uh:
            raise DomainViolation("abs not twice differentiable over a box containing 0")
        return _ZERO
    raise NonDifferentiable(f"no second-derivative rule for {op}")


def jacobian(dag, at):
    """Forward-mode Jacobian of the outputs w.r.t. the inputs.

    at: real vector -> real (n_out, arity) matrix; IntervalVector -> an
    IntervalMatrix enclosing {J(x) : x in box}.
    """
    if isinstance(at, IntervalVector):
        return _jacobian_interval(dag, at)
    return _jacobian_real(dag, np.asarray(at, dtype=float))


def _jacobian_real(dag, x):
    vals = _trace_real(dag, x)
    n = dag.arity
    tang = [None] * dag.n_nodes
    for i, nd in enumerate(dag.nodes):
        if nd.op == "input":
            t = np.zeros(n)
            t[nd.index] = 1.0
            tang[i] = t
        elif nd.op == "const":
            tang[i] = np.zeros(n)
        elif nd.op == "add":
            tang[i] = tang[nd.args[0]] + tang[nd.args[1]]
        elif nd.op == "sub":
            tang[i] = tang[nd.args[0]] - tang[nd.args[1]]
        elif nd.op == "mul":
            a, b = nd.args
            tang[i] = tang[a] * vals[b] + vals[a] * tang[b]
        elif nd.op == "div":
            a, b = nd.args
            tang[i] = (tang[a] - vals[i] * tang[b]) / vals[b]
        else:
            u = nd.args[0]
            d = _d1_real(nd.op, vals[u], nd.power)
            tang[i] = d * tang[u]
    return np.array([tang[o] for o in dag.outputs])


def _d1_real(op, v, power=None):
    if op == "pow":
        return 0.0 if power == 0 else power * v ** (power - 1)
    if op == "sqrt":
        if np.any(np.asarray(v) <= 0.0):
            raise DomainViolation("sqrt not differentiable at 0")
        return 0.5 / np.sqrt(v)
    if op == "exp":
        return np.exp(v)
    if op == "log":
        return 1.0 / v
    if op == "sin":
        return np.cos(v)
    if op == "cos":
        return -np.sin(v)
    if op == "tan":
        return 1.0 + np.tan(v) ** 2
    if op == "abs":
        if np.any(np.asarray(v) == 0.0):
            raise NonDifferentiable("abs not differentiable at 0")
        return np.sign(v)
    raise NonDifferentiable(f"no derivative rule for {op}")


def _jacobian_interval(dag, X):
    vals = _trace_interval(dag, X)
    n = dag.arity
    tang = [None] * dag.n_nodes  # (lo, hi) arrays of shape (n,)
    for i, nd in enumerate(dag.nodes):
        if nd.op == "input":
            t = np.zeros(n)
            t[nd.index] = 1.0
            tang[i] = (t.copy(), t.copy())
        elif nd.op == "const":
            tang[i] = (np.zeros(n), np.zeros(n))
        elif nd.op == "add":
            tang[i] = iv.add_rng(*tang[nd.args[0]], *tang[nd.args[1]])
        elif nd.op == "sub":
            tang[i] = iv.sub_rng(*tang[nd.args[0]], *tang[nd.args[1]])
        elif nd.op == "mul":
            a, b = nd.args
            t1 = iv.mul_rng(*tang[a], *vals[b])
            t2 = iv.mul_rng(*vals[a], *tang[b])
            tang[i] = iv.add_rng(*t1, *t2)
        elif nd.op == "div":
            a, b = nd.args
            num = iv.sub_rng(
                *iv.mul_rng(*tang[a], *vals[b]), *iv.mul_rng(*vals[a], *tang[b])
            )
            tang[i] = iv.div_rng(*num, *iv.sqr_rng(*vals[b]))
        else:
            u = nd.args[0]
            d = _unary_d1(nd.op, vals[u], nd.power)
            tang[i] = iv.mul_rng(d[0], d[1], *tang[u])
    lo = np.array([tang[o][0] for o in dag.outputs])
    hi = np.array([tang[o][1] for o in dag.outputs])
    return IntervalMatrix(lo, hi)


def hessian_interval(dag, X, output=0):
    """Interval enclosure of the Hessian of one output over the box,
    forward-over-forward."""
    return hessians_interval(dag, X)[output]


def hessians_interval(dag, X):
    """Interval Hessian enclosures of every output over the box."""
    vals = _trace_interval(dag, X)
    n = dag.arity
    zg = (np.zeros(n), np.zeros(n))
    zh = (np.zeros((n, n)), np.zeros((n, n)))
    grad = [None] * dag.n_nodes
    hess = [None] * dag.n_nodes

    def outer(a, b):
        return iv.mul_rng(a[0][:, None], a[1][:, None], b[0][None, :], b[1][None, :])

    for i, nd in enumerate(dag.nodes):
        if nd.op == "input":
            g = np.zeros(n)
            g[nd.index] = 1.0
            grad[i] = (g.copy(), g.copy())
            hess[i] = zh
        elif nd.op == "const":
            grad[i] = zg
            hess[i] = zh
        elif nd.op in ("add", "sub"):
            a, b = nd.args
            op = iv.add_rng if nd.op == "add" else iv.sub_rng
            grad[i] = op(*grad[a], *grad[b])
            hess[i] = op(*hess[a], *hess[b])
        elif nd.op == "mul":
            a, b = nd.args
            grad[i] = iv.add_rng(
                *iv.mul_rng(*grad[a], *vals[b]), *iv.mul_rng(*vals[a], *grad[b])
            )
            cross = iv.add_rng(*outer(grad[a], grad[b]), *outer(grad[b], grad[a]))
            hess[i] = iv.add_rng(
                *iv.add_rng(
                    *iv.mul_rng(*hess[a], *vals[b]), *iv.mul_rng(*vals[a], *hess[b])
                ),
                *cross,
            )
        elif nd.op == "div":
            a, b = nd.args
            w = vals[i]
            gw = iv.div_rng(
                *iv.sub_rng(*grad[a], *iv.mul_rng(w[0], w[1], *grad[b])),
                *vals[b],
            )
            grad[i] = gw
            cross = iv.add_rng(*outer(gw, grad[b]), *outer(grad[b], gw))
            num = iv.sub_rng(
                *iv.sub_rng(*hess[a], *cross), *iv.mul_rng(w[0], w[1], *hess[b])
            )
            hess[i] = iv.div_rng(*num, *vals[b])
        else:
            u = nd.args[0]
            d1 = _unary_d1(nd.op, vals[u], nd.power)
            d2 = _unary_d2(nd.op, vals[u], nd.power)
            grad[i] = iv.mul_rng(d1[0], d1[1], *grad[u])
            hess[i] = iv.add_rng(
                *iv.mul_rng(d1[0], d1[1], *hess[u]),
                *iv.mul_rng(d2[0], d2[1], *outer(grad[u], grad[u])),
            )
    out = []
    for o in dag.outputs:
        out.append(IntervalMatrix(hess[o][0], hess[o][1]))
    return out


# ---------------------------------------------------------------------------
# transforms


def bind_inputs(dag, fixed):
    """Partially evaluate: input indices in `fixed` become constants and the
    remaining inputs are renumbered in ascending original order."""
    fixed = {int(k): float(v) for k, v in fixed.items()}
    remap = {}
    new_idx = 0
    for i in range(dag.arity):
        if i not in fixed:
            remap[i] = new_idx
            new_idx += 1
    nodes = []
    for nd in dag.nodes:
        if nd.op == "input" and nd.index in fixed:
            nodes.append(Node("const", value=fixed[nd.index]))
        elif nd.op == "input":
            nodes.append(Node("input", index=remap[nd.index]))
        else:
            nodes.append(nd)
    return FuncDAG(new_idx, tuple(nodes), dag.outputs)


def stack_with_inputs(dag, input_indices):
    """Outputs become [inputs listed; original outputs]; used for lifted
    measurement sets [x; g(x, v)]."""
    dag = dag.ensure_input_nodes()
    imap = dag.input_node_map()
    new_outputs = tuple(imap[i] for i in input_indices) + dag.outputs
    return dag.with_outputs(new_outputs)


# ---------------------------------------------------------------------------
# JSON schema (shared with the CLI)


def dag_to_json(dag):
    nodes = []
    for nd in dag.nodes:
        if nd.op == "input":
            nodes.append({"op": "input", "index": nd.index})
        elif nd.op == "const":
            nodes.append({"op": "const", "value": nd.value})
        elif nd.op == "pow":
            nodes.append({"op": "pow", "args": list(nd.args), "n": nd.power})
        else:
            nodes.append({"op": nd.op, "args": list(nd.args)})
    return {"arity": dag.arity, "nodes": nodes, "outputs": list(dag.outputs)}


def dag_from_json(doc):
    from .errors import ConfigInvalid

    try:
        arity = int(doc["arity"])
        raw_nodes = doc["nodes"]
        outputs = [int(o) for o in doc["outputs"]]
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigInvalid(f"malformed dag document: {err}") from None
    nodes = []
    for i, nd in enumerate(raw_nodes):
        op = nd.get("op")
        path = f"nodes[{i}]"
        if op == "input":
            nodes.append(Node("input", index=int(nd["index"])))
        elif op == "const":
            nodes.append(Node("const", value=float(nd["value"])))
        elif op in ("pow",):
            args = tuple(int(a) for a in nd["args"])
            nodes.append(Node("pow", args, power=int(nd["n"])))
        elif op in UNARY_OPS or op in BINARY_OPS:
            args = tuple(int(a) for a in nd["args"])
            nodes.append(Node(op, args))
        else:
            raise ConfigInvalid(f"unknown op {op!r}", path=path)
        for a in nodes[-1].args:
            if not 0 <= a < i:
                raise ConfigInvalid(
                    f"references undefined node {a}", path=f"{path}.args"
                )
    try:
        return FuncDAG(arity, tuple(nodes), tuple(outputs))
    except ShapeMismatch as err:
        raise ConfigInvalid(str(err)) from None
