"""Static SVG plots of planar point series (mm coordinates)."""

from __future__ import annotations

from math import ceil, floor
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import InputError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")
CANVAS = 600  # plot square, px
MARGIN = 60
LEGEND_WIDTH = 180
MARKER_RADIUS = 2.5


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _validate(series):
    if not series:
        raise InputError("nothing to plot: no series given")
    cleaned = []
    for label, points in series:
        pts = np.asarray(points, dtype=float).reshape(-1, 2) if len(points) else np.empty((0, 2))
        if len(pts) == 0:
            raise InputError(f"series {label!r} is empty")
        if not np.all(np.isfinite(pts)):
            raise InputError(f"series {label!r} has non-finite coordinates")
        cleaned.append((str(label), pts))
    return cleaned


def render_svg(series, style: str = "polyline", title: str = "") -> str:
    """SVG 1.1 document for ``series``, a list of ``(label, points)`` pairs.

    Data are drawn in mm inside a transformed group (y up) with
    non-scaling strokes, so coordinates in the file are the data values.
    """
    if style not in ("polyline", "dots"):
        raise InputError(f"unknown plot style {style!r}")
    series = _validate(series)
    allpts = np.vstack([p for _, p in series])
    lo = np.floor(allpts.min(axis=0))
    hi = np.ceil(allpts.max(axis=0))
    span = max(float(np.max(hi - lo)), 1.0)
    x0, y0 = float(lo[0]), float(lo[1])
    x1, y1 = x0 + span, y0 + span
    k = CANVAS / span  # px per mm

    width = MARGIN * 2 + CANVAS + LEGEND_WIDTH
    height = MARGIN * 2 + CANVAS
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{escape(title or 'conescan plot')}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{MARGIN + CANVAS / 2:g}" y="{MARGIN / 2:g}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{escape(title)}</text>'
        )

    def px(x):
        return MARGIN + (x - x0) * k

    def py(y):
        return MARGIN + (y1 - y) * k

    # 1 mm grid with tick labels; thinned out when the span is large.
    step = max(1, int(ceil(span / 20)))
    out.append('<g class="grid" stroke="#dddddd" stroke-width="1">')
    for v in range(int(floor(x0)), int(ceil(x1)) + 1, step):
        out.append(f'<line x1="{px(v):g}" y1="{MARGIN}" x2="{px(v):g}" y2="{MARGIN + CANVAS}"/>')
    for v in range(int(floor(y0)), int(ceil(y1)) + 1, step):
        out.append(f'<line x1="{MARGIN}" y1="{py(v):g}" x2="{MARGIN + CANVAS}" y2="{py(v):g}"/>')
    out.append("</g>")
    out.append('<g class="axes" stroke="black" stroke-width="1.5" fill="none">')
    out.append(f'<rect x="{MARGIN}" y="{MARGIN}" width="{CANVAS}" height="{CANVAS}"/>')
    if x0 <= 0 <= x1:
        out.append(f'<line x1="{px(0):g}" y1="{MARGIN}" x2="{px(0):g}" y2="{MARGIN + CANVAS}"/>')
    if y0 <= 0 <= y1:
        out.append(f'<line x1="{MARGIN}" y1="{py(0):g}" x2="{MARGIN + CANVAS}" y2="{py(0):g}"/>')
    out.append("</g>")
    out.append('<g class="ticks" font-family="sans-serif" font-size="11" fill="black">')
    for v in range(int(floor(x0)), int(ceil(x1)) + 1, step):
        out.append(f'<text x="{px(v):g}" y="{MARGIN + CANVAS + 16}" text-anchor="middle">{v}</text>')
    for v in range(int(floor(y0)), int(ceil(y1)) + 1, step):
        out.append(f'<text x="{MARGIN - 6}" y="{py(v) + 4:g}" text-anchor="end">{v}</text>')
    out.append(
        f'<text x="{MARGIN + CANVAS / 2:g}" y="{MARGIN + CANVAS + 40}" text-anchor="middle">x (mm)</text>'
    )
    out.append(
        f'<text x="{MARGIN - 40}" y="{MARGIN + CANVAS / 2:g}" text-anchor="middle" '
        f'transform="rotate(-90 {MARGIN - 40} {MARGIN + CANVAS / 2:g})">y (mm)</text>'
    )
    out.append("</g>")

    # Data group: mm -> px with y flipped.
    out.append(
        f'<g class="data" transform="translate({_fmt(MARGIN - x0 * k)} {_fmt(MARGIN + y1 * k)}) '
        f'scale({_fmt(k)} {_fmt(-k)})">'
    )
    for i, (label, pts) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        attr_label = escape(label, {'"': "&quot;"})
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        if style == "polyline" and len(pts) > 1:
            out.append(
                f'<polyline class="series" data-label="{attr_label}" points="{coords}" '
                f'fill="none" stroke="{color}" stroke-width="1.5" vector-effect="non-scaling-stroke"/>'
            )
        else:
            r = _fmt(MARKER_RADIUS / k)
            for x, y in pts:
                out.append(f'<circle class="marker" cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r}" fill="{color}"/>')
    out.append("</g>")

    out.append('<g class="legend" font-family="sans-serif" font-size="12">')
    lx = MARGIN + CANVAS + 20
    for i, (label, _) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        ly = MARGIN + 10 + 20 * i
        out.append(f'<rect x="{lx}" y="{ly}" width="14" height="10" fill="{color}"/>')
        out.append(f'<text x="{lx + 20}" y="{ly + 10}">{escape(label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg_plot(series, out, style: str = "polyline", title: str = "") -> None:
    """Render ``series`` and write the SVG to ``out``."""
    text = render_svg(series, style=style, title=title)
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror}") from None
