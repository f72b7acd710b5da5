"""Minimal deterministic SVG output for 2-D set polygons.

No plotting dependency: polygons come straight from vertices_2d in data
coordinates; the viewBox carries the data bounds and a scale(1,-1) group
flips the y axis, so a re-parsed polygon is directly comparable with the
set it came from.
"""

from __future__ import annotations

import re

import numpy as np

PALETTE = ("#2a9d8f", "#1d6fb8", "#e76f51", "#7b2cbf", "#c9a227", "#444444")


def _fmt(x):
    return f"{x:.6g}"


def write_svg(path, polygons, labels=None, title=None):
    """Write labeled polygons to an SVG file.

    polygons: list of (n, 2) vertex arrays in data coordinates.
    """
    polygons = [np.atleast_2d(np.asarray(p, dtype=float)) for p in polygons]
    allpts = np.vstack(polygons)
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    pad = 0.08 * span
    lo, hi = lo - pad, hi + pad
    w, h = hi - lo

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="640" height="480" '
        f'viewBox="{_fmt(lo[0])} {_fmt(-hi[1])} {_fmt(w)} {_fmt(h)}">',
    ]
    if title:
        lines.append(f"<!-- {title} -->")
    lines.append('<g transform="scale(1,-1)">')
    sw = _fmt(0.004 * max(w, h))
    for i, poly in enumerate(polygons):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(p[0])},{_fmt(p[1])}" for p in poly)
        label = labels[i] if labels else f"set{i}"
        if len(poly) == 1:
            lines.append(
                f'<circle data-label="{label}" cx="{_fmt(poly[0][0])}" cy="{_fmt(poly[0][1])}" '
                f'r="{sw}" fill="{color}"/>'
            )
        else:
            lines.append(
                f'<polygon data-label="{label}" points="{pts}" fill="{color}" '
                f'fill-opacity="0.25" stroke="{color}" stroke-width="{sw}"/>'
            )
    lines.append("</g>")
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_polygons(path):
    """Re-parse polygons written by write_svg: {label: (n, 2) array}."""
    with open(path) as fh:
        text = fh.read()
    out = {}
    for m in re.finditer(r'<polygon data-label="([^"]*)" points="([^"]*)"', text):
        label, pts = m.group(1), m.group(2)
        arr = np.array([[float(v) for v in p.split(",")] for p in pts.split()])
        out[label] = arr
    for m in re.finditer(
        r'<circle data-label="([^"]*)" cx="([^"]*)" cy="([^"]*)"', text
    ):
        out[m.group(1)] = np.array([[float(m.group(2)), float(m.group(3))]])
    return out
