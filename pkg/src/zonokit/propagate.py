"""Enclosures of nonlinear images f(X) behind a single dispatch entry point.

Methods by representation:
  IntervalVector: natural, meanvalue
  Zonotope:       meanvalue, firstorder
  ConZonotope:    meanvalue, firstorder, polyrelax

Every method is sound: the returned set contains {f(x) : x in X}.
"""

from __future__ import annotations

import numpy as np

from . import funcdag as fd
from . import polyrelax as pr
from .errors import UnsupportedMethod
from .intervals import IntervalVector
from .queries import interval_hull
from .sets import ConZonotope, Zonotope
from .setops import closest_point, cz_inclusion, linmap, minkowski_sum, translate

_METHODS = {
    IntervalVector: ("natural", "meanvalue"),
    Zonotope: ("meanvalue", "firstorder"),
    ConZonotope: ("meanvalue", "firstorder", "polyrelax"),
}


def propagate(X, dag, method, n_cuts=pr.DEFAULT_CUTS):
    """Enclosure of dag(X) by the same representation kind as X (the
    polyhedral relaxation returns a ConZonotope)."""
    allowed = None
    for kind, methods in _METHODS.items():
        if isinstance(X, kind):
            allowed = methods
            break
    if allowed is None:
        raise UnsupportedMethod(f"cannot propagate a {type(X).__name__}")
    if method not in allowed:
        raise UnsupportedMethod(
            f"method {method!r} not available for {type(X).__name__}; options: {allowed}"
        )
    if isinstance(X, IntervalVector):
        if method == "natural":
            return fd.eval_interval(dag, X)
        return _meanvalue_interval(X, dag)
    if method == "meanvalue":
        return propagate_mv(X, dag)
    if method == "firstorder":
        return propagate_fo(X, dag)
    enclosure, _ = pr.propagate_pr_cz(dag, X, n_cuts=n_cuts)
    return enclosure


def _meanvalue_interval(X, dag):
    m = X.mid
    J = fd.jacobian(dag, X)
    fm = fd.eval_real(dag, m)
    dev = IntervalVector(X.lo - m, X.hi - m)
    return J.matvec(dev) + IntervalVector.point(fm)


def propagate_mv(X, dag):
    """Mean value extension: f(z*) + [J](X - z*) with [J] the interval
    Jacobian over the interval hull; z* is the center for zonotopes and the
    closest point to the hull center for CZs."""
    hull = interval_hull(X)
    if isinstance(X, Zonotope):
        zstar = X.c
    else:
        zstar = closest_point(X, hull.mid)
    J = fd.jacobian(dag, hull)
    dev = translate(X, -zstar)
    dev_hull = IntervalVector(hull.lo - zstar, hull.hi - zstar)
    out = cz_inclusion(J, dev, hull=dev_hull)
    return translate(out, fd.eval_real(dag, zstar))


def propagate_fo(X, dag):
    """First-order Taylor extension: f(c) + J(c)(X - c) + R with the
    remainder R bounded through interval Hessians over the hull.

    The expansion point is the hull midpoint (equal to the center for
    zonotopes), so the deviation box is exactly the hull radius.
    """
    hull = interval_hull(X)
    c = hull.mid
    r = hull.rad
    Jc = fd.jacobian(dag, c)
    lin = linmap(Jc, translate(X, -c))
    hessians = fd.hessians_interval(dag, hull)
    S = np.outer(r, r)
    rlo = np.empty(len(hessians))
    rhi = np.empty(len(hessians))
    for q, H in enumerate(hessians):
        Tlo, Thi = H.lo * S, H.hi * S
        d_lo = np.minimum(np.diag(Tlo), 0.0)  # diag terms scale xi^2 in [0, 1]
        d_hi = np.maximum(np.diag(Thi), 0.0)
        Moff = np.maximum(np.abs(Tlo), np.abs(Thi))
        np.fill_diagonal(Moff, 0.0)
        off = np.sum(Moff)  # off-diag terms scale xi_i xi_j in [-1, 1]
        rlo[q] = 0.5 * (np.sum(d_lo) - off)
        rhi[q] = 0.5 * (np.sum(d_hi) + off)
    R = IntervalVector(rlo, rhi)
    rem_box = Zonotope(R.mid, np.diag(R.rad))
    out = minkowski_sum(lin, rem_box)
    return translate(out, fd.eval_real(dag, c))
