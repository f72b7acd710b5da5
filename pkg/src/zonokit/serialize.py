"""JSON documents for sets, systems, and experiment configs.

Every set kind serializes as a kind tag plus dense row-major matrices;
systems carry their matrices or DAG documents.  These schemas back the CLI
config files and the test fixtures.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigInvalid
from .funcdag import dag_from_json, dag_to_json
from .intervals import IntervalVector
from .sets import ConZonotope, HPolytope, LineZonotope, Strip, Zonotope
from .system import DescriptorSystem, LinearSystem, NonlinearSystem


def _m(a):
    return np.asarray(a, dtype=float).tolist()


def set_to_json(x):
    if isinstance(x, IntervalVector):
        return {"kind": "interval", "lo": _m(x.lo), "hi": _m(x.hi)}
    if isinstance(x, Strip):
        return {"kind": "strip", "p": _m(x.p), "d": x.d, "sigma": x.sigma}
    if isinstance(x, Zonotope):
        return {"kind": "zonotope", "c": _m(x.c), "G": _m(x.G)}
    if isinstance(x, ConZonotope):
        return {
            "kind": "conzonotope",
            "c": _m(x.c),
            "G": _m(x.G),
            "A": _m(x.A),
            "b": _m(x.b),
        }
    if isinstance(x, LineZonotope):
        return {
            "kind": "linezonotope",
            "c": _m(x.c),
            "G": _m(x.G),
            "M": _m(x.M),
            "S": _m(x.S),
            "A": _m(x.A),
            "b": _m(x.b),
        }
    if isinstance(x, HPolytope):
        return {
            "kind": "hpolytope",
            "H": _m(x.H),
            "k": _m(x.k),
            "Aeq": _m(x.Aeq),
            "beq": _m(x.beq),
        }
    raise ConfigInvalid(f"cannot serialize {type(x).__name__}")


def _req(doc, key, path):
    if key not in doc:
        raise ConfigInvalid(f"missing field {key!r}", path=path)
    return doc[key]


def set_from_json(doc, path="set"):
    if not isinstance(doc, dict):
        raise ConfigInvalid("set document must be an object", path=path)
    kind = _req(doc, "kind", path)
    try:
        if kind == "interval":
            return IntervalVector(_req(doc, "lo", path), _req(doc, "hi", path))
        if kind == "strip":
            return Strip(_req(doc, "p", path), doc.get("d", 0.0), doc.get("sigma", 1.0))
        if kind == "zonotope":
            return Zonotope(_req(doc, "c", path), doc.get("G"))
        if kind == "conzonotope":
            return ConZonotope(
                _req(doc, "c", path), doc.get("G"), doc.get("A"), doc.get("b")
            )
        if kind == "linezonotope":
            return LineZonotope(
                _req(doc, "c", path),
                G=doc.get("G"),
                M=doc.get("M"),
                S=doc.get("S"),
                A=doc.get("A"),
                b=doc.get("b"),
            )
        if kind == "hpolytope":
            return HPolytope(
                doc.get("H"), doc.get("k"), doc.get("Aeq"), doc.get("beq")
            )
    except ConfigInvalid:
        raise
    except Exception as err:
        raise ConfigInvalid(f"bad set document: {err}", path=path) from None
    raise ConfigInvalid(f"unknown set kind {kind!r}", path=path)


def system_to_json(sys):
    if isinstance(sys, DescriptorSystem):
        return {
            "kind": "descriptor",
            "E": _m(sys.E),
            "A": _m(sys.A),
            "Bw": _m(sys.Bw),
            "Bu": _m(sys.Bu),
            "C": _m(sys.C),
            "Dv": _m(sys.Dv),
        }
    if isinstance(sys, LinearSystem):
        return {
            "kind": "linear",
            "A": _m(sys.A),
            "Bw": _m(sys.Bw),
            "Bu": _m(sys.Bu),
            "C": _m(sys.C),
            "Dv": _m(sys.Dv),
        }
    if isinstance(sys, NonlinearSystem):
        return {
            "kind": "nonlinear",
            "f": dag_to_json(sys.f),
            "g": dag_to_json(sys.g),
            "dims": {"nx": sys.nx, "nw": sys.nw, "nu": sys.nu, "nv": sys.nv},
        }
    raise ConfigInvalid(f"cannot serialize {type(sys).__name__}")


def system_from_json(doc, path="system"):
    if not isinstance(doc, dict):
        raise ConfigInvalid("system document must be an object", path=path)
    kind = _req(doc, "kind", path)
    try:
        if kind == "linear":
            return LinearSystem(
                _req(doc, "A", path),
                Bw=doc.get("Bw"),
                Bu=doc.get("Bu"),
                C=doc.get("C"),
                Dv=doc.get("Dv"),
            )
        if kind == "descriptor":
            return DescriptorSystem(
                _req(doc, "A", path),
                Bw=doc.get("Bw"),
                Bu=doc.get("Bu"),
                C=doc.get("C"),
                Dv=doc.get("Dv"),
                E=_req(doc, "E", path),
            )
        if kind == "nonlinear":
            dims = _req(doc, "dims", path)
            f = dag_from_json(_req(doc, "f", path))
            g = dag_from_json(_req(doc, "g", path))
            return NonlinearSystem(
                f,
                g,
                nx=int(_req(dims, "nx", f"{path}.dims")),
                nw=int(dims.get("nw", 0)),
                nu=int(dims.get("nu", 0)),
                nv=int(dims.get("nv", 0)),
            )
    except ConfigInvalid:
        raise
    except Exception as err:
        raise ConfigInvalid(f"bad system document: {err}", path=path) from None
    raise ConfigInvalid(f"unknown system kind {kind!r}", path=path)
