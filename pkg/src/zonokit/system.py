"""Discrete-time system models and simulation under bounded uncertainty.

Three model classes: linear, linear descriptor (possibly singular E), and
nonlinear with factorable f/g.  Simulation draws per-step disturbances from
the bounding zonotopes with an explicit seeded stream, so records replay
bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllPosedDescriptor, ShapeMismatch
from .funcdag import FuncDAG, eval_real
from .queries import sample
from .sets import Zonotope


def _mat(m, rows, cols, name):
    if m is None:
        return np.zeros((rows, cols if cols is not None else 0))
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if rows is not None and m.shape[0] != rows:
        raise ShapeMismatch(f"{name} must have {rows} rows, got {m.shape[0]}")
    return m


@dataclass(frozen=True)
class LinearSystem:
    """x_k = A x_{k-1} + Bw w_{k-1} + Bu u_{k-1};  y_k = C x_k + Dv v_k."""

    A: np.ndarray
    Bw: np.ndarray = None
    Bu: np.ndarray = None
    C: np.ndarray = None
    Dv: np.ndarray = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ShapeMismatch(f"A must be square, got {A.shape}")
        nx = A.shape[0]
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Bw", _mat(self.Bw, nx, None, "Bw"))
        object.__setattr__(self, "Bu", _mat(self.Bu, nx, None, "Bu"))
        C = self.C if self.C is not None else np.zeros((0, nx))
        C = np.atleast_2d(np.asarray(C, dtype=float))
        if C.shape[1] != nx:
            raise ShapeMismatch(f"C must have {nx} columns, got {C.shape[1]}")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Dv", _mat(self.Dv, C.shape[0], None, "Dv"))

    @property
    def nx(self):
        return self.A.shape[0]

    @property
    def nw(self):
        return self.Bw.shape[1]

    @property
    def nu(self):
        return self.Bu.shape[1]

    @property
    def ny(self):
        return self.C.shape[0]

    @property
    def nv(self):
        return self.Dv.shape[1]


@dataclass(frozen=True)
class DescriptorSystem(LinearSystem):
    """E x_k = A x_{k-1} + Bw w_{k-1} + Bu u_{k-1};  y_k = C x_k + Dv v_k.

    E may be singular; rows with a zero E-row are algebraic equations.
    """

    E: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        E = np.eye(self.nx) if self.E is None else np.atleast_2d(np.asarray(self.E, dtype=float))
        if E.shape != (self.nx, self.nx):
            raise ShapeMismatch(f"E must be {self.nx}x{self.nx}, got {E.shape}")
        object.__setattr__(self, "E", E)

    def algebraic_rows(self, tol=1e-12):
        """Indices i with E_i = 0: the row reads 0 = A_i x + Bw_i w + Bu_i u."""
        return [i for i in range(self.nx) if np.all(np.abs(self.E[i]) <= tol)]

    def static_rows(self, tol=1e-12):
        """Algebraic rows free of disturbance and input: 0 = A_i x holds at
        every time index, pinning the state to a manifold."""
        return [
            i
            for i in self.algebraic_rows(tol)
            if np.all(np.abs(self.Bw[i]) <= tol) and np.all(np.abs(self.Bu[i]) <= tol)
        ]


@dataclass(frozen=True)
class NonlinearSystem:
    """x_k = f(x_{k-1}, w_{k-1}, u_{k-1});  y_k = g(x_k, v_k), f/g as DAGs."""

    f: FuncDAG
    g: FuncDAG
    nx: int
    nw: int = 0
    nu: int = 0
    nv: int = 0

    def __post_init__(self):
        if self.f.arity != self.nx + self.nw + self.nu:
            raise ShapeMismatch(
                f"f arity {self.f.arity} != nx+nw+nu = {self.nx + self.nw + self.nu}"
            )
        if self.f.n_out != self.nx:
            raise ShapeMismatch(f"f has {self.f.n_out} outputs, expected {self.nx}")
        if self.g.arity != self.nx + self.nv:
            raise ShapeMismatch(f"g arity {self.g.arity} != nx+nv = {self.nx + self.nv}")

    @property
    def ny(self):
        return self.g.n_out


@dataclass(frozen=True)
class SimulationRecord:
    """States x_0..x_N, outputs y_1..y_N, and the drawn disturbances."""

    x: np.ndarray  # (N+1, nx)
    y: np.ndarray  # (N, ny)
    w: np.ndarray  # (N, nw)
    v: np.ndarray  # (N, nv)

    @property
    def steps(self):
        return self.y.shape[0]


def _draws(W, n, count, rng):
    if count == 0 or W is None:
        return np.zeros((n, count))
    if isinstance(W, Zonotope) and W.ng == 0:
        return np.tile(W.c, (n, 1))
    return sample(W, n, rng)


def simulate(sys, x0, N, W=None, V=None, u=None, rng=0):
    """Simulate N steps; returns a SimulationRecord.

    W / V bound the process and measurement uncertainty (zonotopes; None
    when the system has no such channel).  u is an (N, nu) known-input
    sequence, all zeros when omitted.  rng is a seed or Generator.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    x0 = np.asarray(x0, dtype=float).ravel()
    nx = sys.nx
    if x0.shape[0] != nx:
        raise ShapeMismatch(f"x0 has dim {x0.shape[0]}, system has nx={nx}")
    nu = sys.nu
    if u is None:
        u = np.zeros((N, nu))
    else:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if u.shape != (N, nu):
            raise ShapeMismatch(f"u must be ({N}, {nu}), got {u.shape}")

    ws = _draws(W, N, sys.nw, rng)
    vs = _draws(V, N, sys.nv, rng)
    xs = np.zeros((N + 1, nx))
    xs[0] = x0
    ny = sys.ny
    ys = np.zeros((N, ny))

    if isinstance(sys, DescriptorSystem):
        _check_descriptor_consistency(sys, x0)
        step = _descriptor_step
    elif isinstance(sys, LinearSystem):
        step = _linear_step
    elif isinstance(sys, NonlinearSystem):
        step = _nonlinear_step
    else:
        raise ShapeMismatch(f"cannot simulate {type(sys).__name__}")

    for k in range(N):
        xs[k + 1] = step(sys, xs[k], ws[k], u[k])
        if isinstance(sys, NonlinearSystem):
            ys[k] = eval_real(sys.g, np.concatenate([xs[k + 1], vs[k]]))
        else:
            ys[k] = sys.C @ xs[k + 1] + sys.Dv @ vs[k]
    return SimulationRecord(xs, ys, ws, vs)


def _linear_step(sys, x, w, u):
    return sys.A @ x + sys.Bw @ w + sys.Bu @ u


def _nonlinear_step(sys, x, w, u):
    return eval_real(sys.f, np.concatenate([x, w, u]))


def _check_descriptor_consistency(sys, x0, tol=1e-8):
    rows = sys.static_rows()
    if rows:
        resid = sys.A[rows] @ x0
        if np.max(np.abs(resid), initial=0.0) > tol * max(1.0, np.abs(x0).max()):
            raise IllPosedDescriptor(
                "initial state violates the static algebraic rows"
            )


def _descriptor_step(sys, x, w, u):
    """Solve the step equation stacked with the next-step static rows.

    Static algebraic rows (zero E row, no w/u entry) hold at every index,
    so 0 = A_i x_k joins E x_k = A x_{k-1} + ... in determining x_k.  The
    solve is least-norm; an inconsistent system raises rather than
    projecting.
    """
    rhs_dyn = sys.A @ x + sys.Bw @ w + sys.Bu @ u
    static = sys.static_rows()
    M = np.vstack([sys.E, sys.A[static]]) if static else sys.E
    rhs = np.concatenate([rhs_dyn, np.zeros(len(static))]) if static else rhs_dyn
    xk, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    resid = M @ xk - rhs
    if np.max(np.abs(resid), initial=0.0) > 1e-8 * max(1.0, np.abs(rhs).max()):
        raise IllPosedDescriptor("descriptor step equation is inconsistent")
    return xk
