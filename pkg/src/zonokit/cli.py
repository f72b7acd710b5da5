"""Command-line interface: canned demos and config-driven experiments.

Subcommands:
  demo-reduction   seeded 47-generator / 15-constraint CZ reduced to (4, 2)
  demo-propagate   CZ image enclosures under MV / FO / PR with sample checks
  demo-estimation  100-step nonlinear estimation with five methods
  demo-afd         two-model separating-input design with certificates
  run CONFIG.json  user-defined experiment

Exit codes: 0 ok, 2 invalid config, 3 numerical failure / budget exhausted.
All artifacts (CSV, SVG, JSON) are deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import estimation as est
from . import faultdiag as afd
from . import funcdag as fd
from . import polyrelax as pr
from . import svgplot
from .errors import BudgetExceeded, ConfigInvalid, NumericalFailure, ZonokitError
from .intervals import IntervalVector
from .propagate import propagate
from .queries import contains_points, interval_hull, is_inside, sample, sample_xi, volume
from .reduction import reduce_conzonotope
from .sets import ConZonotope, Zonotope, as_conzonotope, vertices_2d
from .serialize import set_from_json, system_from_json
from .system import DescriptorSystem, LinearSystem, NonlinearSystem, simulate

DEFAULT_SEED = 2024


def _outdir(args):
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


def _write_csv(path, rows, header_comment=None):
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _fmt_cell(v) for k, v in r.items()})


def _fmt_cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.10g}"
    return v


# ---------------------------------------------------------------------------
# demo systems and sets


def demo_reduction_cz(seed):
    """Deterministic pseudo-random CZ in R^2 with 47 generators and 15
    constraints (the printed figure's input set is not published, so a
    seeded instance with the exact counts substitutes)."""
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(2, 47)) * 0.35
    A = rng.normal(size=(15, 47))
    xi0 = rng.uniform(-0.55, 0.55, 47)
    return ConZonotope(np.zeros(2), G, A, A @ xi0)


def demo_propagate_setup():
    b = fd.DagBuilder(2)
    x1, x2 = b.inputs()
    f1 = 3 * x1 - x1**2 / 7 - 4 * x1 * x2 / (4 + x1)
    f2 = -2 * x2 + 3 * x1 * x2 / (4 + x1)
    dag = b.build([f1, f2])
    X = ConZonotope(
        [-1, 1], [[0.2, 0.4, 0.2], [0.2, 0.0, -0.2]], [[2.0, 2.0, 2.0]], [-3.0]
    )
    return dag, X


def demo_nonlinear_system():
    bf = fd.DagBuilder(4)
    x1, x2, w1, w2 = bf.inputs()
    f = bf.build(
        [
            3 * x1 - x1**2 / 7 - 4 * x1 * x2 / (4 + x1) + w1,
            -2 * x2 + 3 * x1 * x2 / (4 + x1) + w2,
        ]
    )
    bg = fd.DagBuilder(4)
    gx1, gx2, gv1, gv2 = bg.inputs()
    g = bg.build([gx1 - fd.sin(gx2 / 2) + gv1, (-gx1 + 1) * gx2 + gv2])
    sys = NonlinearSystem(f, g, nx=2, nw=2, nv=2)
    X0 = Zonotope([5.0, 0.5], [[0.5, 1.0, -0.5], [0.5, 0.5, 0.0]])
    W = Zonotope([0.0, 0.0], 0.5 * np.eye(2))
    V = Zonotope([0.0, 0.0], 0.2 * np.eye(2))
    return sys, X0, W, V, np.array([5.2, 0.65])


def demo_afd_family():
    """Two scalar models differing in the state matrix sign: without input
    the stacked output tubes coincide, a large enough first input separates
    them through the second output."""
    m1 = LinearSystem([[0.5]], Bw=[[1.0]], Bu=[[1.0]], C=[[1.0]], Dv=[[1.0]])
    m2 = LinearSystem([[-0.5]], Bw=[[1.0]], Bu=[[1.0]], C=[[1.0]], Dv=[[1.0]])
    x0 = Zonotope([0.0], [[0.1]])
    W = Zonotope([0.0], [[0.05]])
    V = Zonotope([0.0], [[0.05]])
    return afd.ModelFamily(
        (m1, m2), x0, W, V, horizon=2, u_bounds=IntervalVector([-1.0], [1.0]), epsilon=0.01
    )


# ---------------------------------------------------------------------------
# demo commands


def cmd_demo_reduction(args):
    out = _outdir(args)
    Z = demo_reduction_cz(args.seed)
    R = reduce_conzonotope(Z, 4, 2)
    rng = np.random.default_rng(args.seed + 1)
    pts = sample(Z, 10**4, rng)
    ok = contains_points(R, pts, tol=1e-8)
    violations = int((~ok).sum())

    poly_orig = vertices_2d(Z, budget=args.budget)
    poly_red = vertices_2d(R, budget=args.budget)
    svgplot.write_svg(
        os.path.join(out, "reduction.svg"),
        [poly_orig, poly_red],
        labels=["original", "reduced"],
        title="CZ complexity reduction: 47 generators / 15 constraints to 4 / 2",
    )
    report = {
        "input": {"generators": Z.ng, "constraints": Z.nc},
        "output": {"generators": R.ng, "constraints": R.nc},
        "samples": int(len(pts)),
        "violations": violations,
    }
    with open(os.path.join(out, "reduction_report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    print(f"reduced ({Z.ng}, {Z.nc}) -> ({R.ng}, {R.nc})")
    print(f"violations: {violations}")
    return 0 if violations == 0 else 3


def cmd_demo_propagate(args):
    out = _outdir(args)
    dag, X = demo_propagate_setup()
    rng = np.random.default_rng(args.seed)
    pts, xi = sample_xi(X, 10**4, rng)
    img = fd.eval_real(dag, pts.T).T

    rows = []
    polys = []
    labels = []
    metrics = {}
    for method in ("meanvalue", "firstorder", "polyrelax"):
        enc = propagate(X, dag, method)
        if method == "polyrelax":
            ok = pr.pr_sample_containment(dag, X, xi, slack=1e-8)
        else:
            ok = contains_points(enc, img, tol=1e-8)
        vol = volume(enc, "partope-nthroot")
        metrics[method] = vol
        rows.append(
            {
                "method": method,
                "generators": enc.ng,
                "constraints": enc.nc,
                "partope_nthroot": vol,
                "violations": int((~ok).sum()),
            }
        )
        polys.append(vertices_2d(enc, budget=args.budget))
        labels.append(method)
    polys.append(img[:: max(1, len(img) // 400)])
    labels.append("samples")

    _write_csv(
        os.path.join(out, "propagate_metrics.csv"),
        rows,
        "schema v1: CZ image enclosures, partope-nthroot tightness metric",
    )
    svgplot.write_svg(
        os.path.join(out, "propagate.svg"), polys[:-1], labels=labels[:-1],
        title="CZ enclosures of the nonlinear image",
    )
    for r in rows:
        print(
            f"{r['method']}: partope-nthroot {r['partope_nthroot']:.4f} "
            f"violations {r['violations']}"
        )
    ok_order = metrics["polyrelax"] <= metrics["meanvalue"] + 1e-12 and metrics[
        "polyrelax"
    ] <= metrics["firstorder"] + 1e-12
    print(f"polyrelax tightest: {ok_order}")
    return 0 if ok_order and all(r["violations"] == 0 for r in rows) else 3


def cmd_demo_estimation(args):
    out = _outdir(args)
    sys, X0, W, V, x0 = demo_nonlinear_system()
    rec = simulate(sys, x0, 100, W, V, rng=args.seed)
    all_rows = []
    finals = {}
    snapshots = []
    snap_labels = []
    ok_all = True
    for method in ("zon-mv", "zon-fo", "cz-mv", "cz-fo", "cz-pr"):
        x0set = X0 if method.startswith("zon") else as_conzonotope(X0)
        cfg = est.EstimatorConfig(method, x0set, W=W, V=V, ng=20, nc=5)
        states = est.run_estimator(sys, cfg, rec.y)
        rows = est.estimation_csv_rows(states, true_states=rec.x[1:])
        for r in rows:
            r["method"] = method
        all_rows.extend(rows)
        contained = all(r["contains_true"] for r in rows)
        faults = any(r["fault"] for r in rows)
        finals[method] = rows[-1]["volume_pnr"]
        ok_all &= contained and not faults
        print(
            f"{method}: contained {contained} faults {faults} "
            f"final volume {finals[method]:.4f}"
        )
        if method in ("cz-fo", "cz-pr", "zon-fo"):
            snapshots.append(vertices_2d(states[-1].updated, budget=args.budget))
            snap_labels.append(method)
    pr_best = all(finals["cz-pr"] <= v + 1e-12 for v in finals.values())
    print(f"cz-pr tightest at step 100: {pr_best}")
    _write_csv(
        os.path.join(out, "estimation_volumes.csv"),
        all_rows,
        "schema v1: per-step hull bounds, radius, partope-nthroot volume, fault flag, containment",
    )
    svgplot.write_svg(
        os.path.join(out, "estimation_sets.svg"),
        snapshots,
        labels=snap_labels,
        title="final-step state enclosures",
    )
    return 0 if ok_all and pr_best else 3


def cmd_demo_afd(args):
    out = _outdir(args)
    fam = demo_afd_family()
    res = afd.design_separating_input(fam, budget=args.budget)
    zero_certs = afd.certify_separation(fam, np.zeros_like(res.u), budget=args.budget)

    doc = {
        "u": res.u.tolist(),
        "objective": res.objective,
        "certificates": [
            {"pair": list(c.pair), "separated": bool(c.separated), "margin": c.margin}
            for c in res.certificates
        ],
        "zero_input_overlaps": [not c.separated for c in zero_certs],
    }
    with open(os.path.join(out, "afd_result.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)

    tubes = [
        afd.output_tube(m, fam.x0, fam.W, fam.V, fam.horizon, res.u)[0]
        for m in fam.models
    ]
    svgplot.write_svg(
        os.path.join(out, "afd_tubes.svg"),
        [vertices_2d(t, budget=args.budget) for t in tubes],
        labels=[f"model{i}" for i in range(len(tubes))],
        title="separated stacked output tubes",
    )
    print(f"designed input: {res.u.ravel().tolist()} (|u|_inf = {res.objective:.4f})")
    for c in res.certificates:
        print(f"pair {c.pair}: separated {c.separated} margin {c.margin:.4f}")
    print(f"zero input overlaps: {all(not c.separated for c in zero_certs)}")
    return 0 if res.all_separated else 3


# ---------------------------------------------------------------------------
# config-driven runs


def _cfg_get(doc, key, path, typ=None):
    if key not in doc:
        raise ConfigInvalid(f"missing field {key!r}", path=path)
    v = doc[key]
    if typ is not None and not isinstance(v, typ):
        raise ConfigInvalid(f"field {key!r} must be {typ.__name__}", path=path)
    return v


def cmd_run(args):
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ConfigInvalid(f"cannot read config: {err}")
    except json.JSONDecodeError as err:
        raise ConfigInvalid(f"config is not valid JSON: {err}")
    if not isinstance(doc, dict):
        raise ConfigInvalid("config must be a JSON object")
    seed = int(doc.get("seed", args.seed))
    experiment = _cfg_get(doc, "experiment", "config", str)
    out = _outdir(args)

    if experiment == "estimation":
        return _run_estimation(doc, seed, out)
    if experiment == "propagate":
        return _run_propagate(doc, seed, out)
    if experiment == "afd":
        return _run_afd(doc, seed, out)
    raise ConfigInvalid(
        f"unknown experiment {experiment!r} (options: estimation, propagate, afd)",
        path="config.experiment",
    )


def _run_estimation(doc, seed, out):
    sys = system_from_json(_cfg_get(doc, "system", "config"))
    x0_set = set_from_json(_cfg_get(doc, "x0_set", "config"), "config.x0_set")
    W = set_from_json(doc["w_set"], "config.w_set") if "w_set" in doc else None
    V = set_from_json(doc["v_set"], "config.v_set") if "v_set" in doc else None
    steps = int(_cfg_get(doc, "steps", "config"))
    method = _cfg_get(doc, "method", "config", str)
    limits = doc.get("limits", {})
    bx = (
        set_from_json(doc["admissible_box"], "config.admissible_box")
        if "admissible_box" in doc
        else None
    )
    x0_true = np.asarray(
        doc.get("x0_true", np.asarray(x0_set.c if hasattr(x0_set, "c") else x0_set.mid)),
        dtype=float,
    )
    if method in ("cz", "lz", "strip"):
        x0_est = {
            "cz": as_conzonotope,
            "strip": lambda s: s,
            "lz": lambda s: s,
        }[method](x0_set)
        if method == "lz":
            from .sets import as_linezonotope

            x0_est = as_linezonotope(x0_set)
    else:
        x0_est = x0_set if method.startswith("zon") else as_conzonotope(x0_set)
    cfg = est.EstimatorConfig(
        method,
        x0_est,
        W=W,
        V=V,
        ng=int(limits.get("ng", 20)),
        nc=int(limits.get("nc", 5)),
        bx=bx if bx is None or isinstance(bx, IntervalVector) else interval_hull(bx),
    )
    rec = simulate(sys, x0_true, steps, W, V, rng=seed)
    states = est.run_estimator(sys, cfg, rec.y)
    rows = est.estimation_csv_rows(states, true_states=rec.x[1:])
    _write_csv(
        os.path.join(out, "estimation.csv"),
        rows,
        "schema v1: per-step hull bounds, radius, partope-nthroot volume, fault flag, containment",
    )
    print(f"wrote {len(rows)} estimation rows")
    return 0


def _run_propagate(doc, seed, out):
    dag = fd.dag_from_json(_cfg_get(doc, "dag", "config"))
    X = set_from_json(_cfg_get(doc, "set", "config"), "config.set")
    methods = doc.get("methods", ["meanvalue"])
    rows = []
    for method in methods:
        if not isinstance(method, str):
            raise ConfigInvalid("methods must be strings", path="config.methods")
        enc = propagate(as_conzonotope(X), dag, method)
        rows.append(
            {
                "method": method,
                "generators": enc.ng,
                "constraints": enc.nc,
                "partope_nthroot": volume(enc, "partope-nthroot"),
            }
        )
    _write_csv(os.path.join(out, "propagate.csv"), rows, "schema v1: image enclosures")
    print(f"wrote {len(rows)} propagation rows")
    return 0


def _run_afd(doc, seed, out):
    fam_doc = _cfg_get(doc, "family", "config")
    models = tuple(
        system_from_json(m, f"config.family.models[{i}]")
        for i, m in enumerate(_cfg_get(fam_doc, "models", "config.family", list))
    )
    fam = afd.ModelFamily(
        models,
        set_from_json(_cfg_get(fam_doc, "x0", "config.family"), "config.family.x0"),
        set_from_json(_cfg_get(fam_doc, "w", "config.family"), "config.family.w"),
        set_from_json(_cfg_get(fam_doc, "v", "config.family"), "config.family.v"),
        horizon=int(_cfg_get(fam_doc, "horizon", "config.family")),
        u_bounds=set_from_json(
            _cfg_get(fam_doc, "u_bounds", "config.family"), "config.family.u_bounds"
        ),
        epsilon=float(fam_doc.get("epsilon", 0.01)),
    )
    res = afd.design_separating_input(fam)
    with open(os.path.join(out, "afd.json"), "w") as fh:
        json.dump(
            {
                "u": res.u.tolist(),
                "objective": res.objective,
                "certificates": [
                    {"pair": list(c.pair), "separated": bool(c.separated), "margin": c.margin}
                    for c in res.certificates
                ],
            },
            fh,
            indent=2,
            sort_keys=True,
        )
    print(f"designed |u|_inf = {res.objective:.4f}; separated: {res.all_separated}")
    return 0 if res.all_separated else 3


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="zonokit", description="zonotopic set computation and estimation demos"
    )
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out-dir", default="out")
    p.add_argument(
        "--budget",
        type=int,
        default=10**5,
        help="combinatorial budget for H-rep/volume enumeration",
    )
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("demo-reduction")
    sub.add_parser("demo-propagate")
    sub.add_parser("demo-estimation")
    sub.add_parser("demo-afd")
    runp = sub.add_parser("run")
    runp.add_argument("config")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {
        "demo-reduction": cmd_demo_reduction,
        "demo-propagate": cmd_demo_propagate,
        "demo-estimation": cmd_demo_estimation,
        "demo-afd": cmd_demo_afd,
        "run": cmd_run,
    }
    try:
        return handlers[args.command](args)
    except ConfigInvalid as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (NumericalFailure, BudgetExceeded) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except ZonokitError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
