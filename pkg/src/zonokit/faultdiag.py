"""Open-loop active fault diagnosis for families of linear models:
design an input sequence that separates the stacked output reachable tubes
of every model pair, so one measured output sequence identifies the model.

The separation condition 0 not-in Y_i(u) - Y_j(u) is encoded over the
facets of the difference tube with big-M binaries and solved as a MILP
minimizing ||u||_inf; the returned input is always re-certified pairwise
by LP emptiness checks, never trusted from the encoding alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleSeparation, ShapeMismatch
from .geometry import DEFAULT_COMBO_BUDGET
from .intervals import IntervalVector
from .optim import INFEASIBLE, OPTIMAL, LinearProgram, MixedIntegerProgram, solve_lp, solve_milp
from .queries import hrep, is_empty
from .sets import Zonotope, as_conzonotope
from .setops import cartesian_product, generalized_intersection, linmap, minkowski_sum
from .system import LinearSystem


@dataclass(frozen=True)
class ModelFamily:
    """Candidate models sharing X0, W, V, a horizon, an input box U, and a
    separation margin epsilon."""

    models: tuple
    x0: Zonotope
    W: Zonotope
    V: Zonotope
    horizon: int
    u_bounds: IntervalVector
    epsilon: float = 0.01

    def __post_init__(self):
        models = tuple(self.models)
        object.__setattr__(self, "models", models)
        if not models:
            raise ShapeMismatch("model family needs at least one model")
        nx, nu, ny = models[0].nx, models[0].nu, models[0].ny
        for m in models:
            if (m.nx, m.nu, m.ny) != (nx, nu, ny):
                raise ShapeMismatch("all models must share nx, nu, ny")
        if self.epsilon <= 0:
            raise ShapeMismatch("separation margin must be positive")
        if self.u_bounds.dim != nu:
            raise ShapeMismatch(f"input box must have dim {nu}")

    @property
    def nu(self):
        return self.models[0].nu

    @property
    def ny(self):
        return self.models[0].ny


def output_tube(model, x0, W, V, N, useq=None):
    """Stacked output set [Y_1; ...; Y_N] for one model; exact.

    Returns (tube, F, d): the tube for the given input sequence (zeros when
    omitted), plus the input sensitivity of the stacked center,
    center(u) = F u + d, with the generators independent of u.
    """
    nu, ny, nx = model.nu, model.ny, model.nx
    useq = np.zeros((N, nu)) if useq is None else np.atleast_2d(np.asarray(useq, dtype=float))
    if useq.shape != (N, nu):
        raise ShapeMismatch(f"input sequence must be ({N}, {nu})")

    X = x0
    tube = None
    for k in range(N):
        X = linmap(model.A, X)
        if model.nw and W is not None:
            X = minkowski_sum(X, linmap(model.Bw, W))
        if nu:
            from .setops import translate

            X = translate(X, model.Bu @ useq[k])
        Y = linmap(model.C, X)
        if model.nv and V is not None:
            Y = minkowski_sum(Y, linmap(model.Dv, V))
        tube = Y if tube is None else cartesian_product(tube, Y)

    # center sensitivity: block (k, l) = C A^(k-1-l) Bu for l < k
    F = np.zeros((N * ny, N * nu))
    if nu:
        powers = [np.eye(nx)]
        for _ in range(N):
            powers.append(model.A @ powers[-1])
        for k in range(N):
            for l in range(k + 1):
                F[k * ny : (k + 1) * ny, l * nu : (l + 1) * nu] = (
                    model.C @ powers[k - l] @ model.Bu
                )
    d = tube.c - F @ useq.ravel()
    return tube, F, d


@dataclass(frozen=True)
class SeparationCertificate:
    pair: tuple
    empty: bool
    margin: float

    @property
    def separated(self):
        return self.empty


@dataclass(frozen=True)
class SeparationResult:
    u: np.ndarray  # (N, nu)
    objective: float
    certificates: tuple

    @property
    def all_separated(self):
        return all(c.separated for c in self.certificates)


def _difference_rows(fam, i, j, budget):
    """Facet normals/offsets of the centered difference tube of models i, j,
    plus the stacked center sensitivity of the difference."""
    N = fam.horizon
    ti, Fi, di = output_tube(fam.models[i], fam.x0, fam.W, fam.V, N)
    tj, Fj, dj = output_tube(fam.models[j], fam.x0, fam.W, fam.V, N)
    Gd = np.hstack([ti.G, tj.G])
    diff0 = Zonotope(np.zeros(Gd.shape[0]), Gd)
    P = hrep(diff0, budget=budget)
    # keep one row per facet pair (the zonotope H-rep is symmetric)
    return P, Fi - Fj, di - dj


def certify_separation(fam, useq, budget=DEFAULT_COMBO_BUDGET):
    """LP emptiness check of every pairwise tube intersection, plus the
    achieved facet margin of the difference tube."""
    N = fam.horizon
    tubes = [output_tube(m, fam.x0, fam.W, fam.V, N, useq)[0] for m in fam.models]
    certs = []
    for i in range(len(fam.models)):
        for j in range(i + 1, len(fam.models)):
            inter = generalized_intersection(
                as_conzonotope(tubes[i]), as_conzonotope(tubes[j])
            )
            empty = is_empty(inter)
            P, Fd, dd = _difference_rows(fam, i, j, budget)
            cdiff = Fd @ np.asarray(useq, dtype=float).ravel() + dd
            margin = float(np.max(P.H @ cdiff - P.k))
            certs.append(SeparationCertificate((i, j), empty, margin))
    return tuple(certs)


def design_separating_input(fam, budget=DEFAULT_COMBO_BUDGET, node_budget=10**5):
    """Minimal-infinity-norm input sequence separating all pairwise tubes.

    For each pair and each facet row |h' z| <= k of the centered difference
    tube, a binary activates  s h'(F u + d) >= k + eps - M (1 - delta); at
    least one row must activate per pair.  The MILP result is re-certified
    by pairwise LP emptiness before being returned.
    """
    N, nu = fam.horizon, fam.nu
    nvar_u = N * nu
    pairs = [
        (i, j)
        for i in range(len(fam.models))
        for j in range(i + 1, len(fam.models))
    ]
    rows = []  # (pair_index, h, k)
    pair_data = []
    for pi, (i, j) in enumerate(pairs):
        P, Fd, dd = _difference_rows(fam, i, j, budget)
        pair_data.append((Fd, dd))
        for h, kf in zip(P.H, P.k):
            rows.append((pi, h, kf))

    # variables: [u (nvar_u), t, deltas (2 per row: signs +1/-1)]
    nrows = len(rows)
    nvar = nvar_u + 1 + 2 * nrows
    obj = np.zeros(nvar)
    obj[nvar_u] = 1.0

    ulo = np.tile(fam.u_bounds.lo, N)
    uhi = np.tile(fam.u_bounds.hi, N)
    lo = np.concatenate([ulo, [0.0], np.zeros(2 * nrows)])
    hi = np.concatenate([uhi, [np.inf], np.ones(2 * nrows)])

    A_ub = []
    b_ub = []
    # |u_i| <= t
    for i in range(nvar_u):
        r = np.zeros(nvar)
        r[i], r[nvar_u] = 1.0, -1.0
        A_ub.append(r)
        b_ub.append(0.0)
        r = np.zeros(nvar)
        r[i], r[nvar_u] = -1.0, -1.0
        A_ub.append(r)
        b_ub.append(0.0)
    # big-M activation rows
    eps = fam.epsilon
    for ridx, (pi, h, kf) in enumerate(rows):
        Fd, dd = pair_data[pi]
        hF = h @ Fd
        hd = float(h @ dd)
        span = float(np.sum(np.maximum(np.abs(hF * ulo), np.abs(hF * uhi))))
        bigM = kf + eps + span + abs(hd)
        for s, dcol in ((1.0, nvar_u + 1 + 2 * ridx), (-1.0, nvar_u + 2 + 2 * ridx)):
            # -s hF u - M delta <= -(k + eps) + M - s hd
            r = np.zeros(nvar)
            r[:nvar_u] = -s * hF
            r[dcol] = -bigM
            A_ub.append(r)
            b_ub.append(-(kf + eps) + bigM - s * hd)
    # per pair: sum of deltas >= 1
    for pi in range(len(pairs)):
        r = np.zeros(nvar)
        for ridx, (pj, _, _) in enumerate(rows):
            if pj == pi:
                r[nvar_u + 1 + 2 * ridx] = -1.0
                r[nvar_u + 2 + 2 * ridx] = -1.0
        A_ub.append(r)
        b_ub.append(-1.0)

    mip = MixedIntegerProgram(
        LinearProgram(
            obj,
            A_ub=np.array(A_ub),
            b_ub=np.array(b_ub),
            bounds=IntervalVector(lo, hi),
        ),
        binary_indices=tuple(range(nvar_u + 1, nvar)),
    )
    res = solve_milp(mip, node_budget=node_budget)
    if res.status == INFEASIBLE:
        raise InfeasibleSeparation(
            "no input in the admissible box separates the output tubes"
        )
    if res.status != OPTIMAL:
        raise InfeasibleSeparation(f"MILP ended with status {res.status}")
    useq = res.x[:nvar_u].reshape(fam.horizon, nu)
    certs = certify_separation(fam, useq, budget)
    return SeparationResult(useq, float(res.value), certs)
