"""SVG scatter plots of labelled point sets.

Unclustered points are gray, clusters take colours in order of their rank
(rank 0 has the smallest NFA). 3D data is drawn as three axis-pair
projections side by side.
"""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

GRAY = "#b0b0b0"
PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#17becf", "#bcbd22", "#7f7f7f")
PANEL = 400
MARGIN = 10
RADIUS = 1.5


def color_for(label: int) -> str:
    return GRAY if label < 0 else PALETTE[label % len(PALETTE)]


def _panel(pts, labels, x0, lo, hi, title):
    span = np.where(hi > lo, hi - lo, 1.0)
    inner = PANEL - 2 * MARGIN
    xy = (pts - lo) / span * inner
    out = [f'<g transform="translate({x0},0)">',
           f'<rect x="0" y="0" width="{PANEL}" height="{PANEL}" fill="white" stroke="black"/>']
    if title:
        out.append(f'<text x="{MARGIN}" y="{MARGIN + 4}" font-size="10">{title}</text>')
    # unclustered first so clusters are drawn on top
    order = np.argsort(labels >= 0, kind="stable")
    for i in order:
        cx = MARGIN + xy[i, 0]
        cy = PANEL - MARGIN - xy[i, 1]
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{RADIUS}" fill="{color_for(int(labels[i]))}"/>')
    out.append("</g>")
    return out


def render_svg(points, labels, title: str = "") -> str:
    """SVG document with one circle per point and panel."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if len(pts) != len(labels):
        raise ValueError("points and labels differ in length")
    dim = pts.shape[1] if len(pts) else 2
    if dim == 1:
        pts = np.c_[pts, np.zeros(len(pts))]
        pairs = [(0, 1)]
    elif dim == 2:
        pairs = [(0, 1)]
    else:
        pairs = [(0, 1), (0, 2), (1, 2)]
    width = PANEL * len(pairs)
    body = []
    for p, (a, b) in enumerate(pairs):
        sub = pts[:, [a, b]] if len(pts) else np.zeros((0, 2))
        lo = sub.min(axis=0) if len(sub) else np.zeros(2)
        hi = sub.max(axis=0) if len(sub) else np.ones(2)
        name = f"x{a} / x{b}" if dim > 2 else ""
        body += _panel(sub, labels, p * PANEL, lo, hi, name)
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL}" '
            f'viewBox="0 0 {width} {PANEL}">']
    if title:
        head.append(f"<title>{quoteattr(title)[1:-1]}</title>")
    return "\n".join(head + body + ["</svg>"]) + "\n"


def save_svg(path, points, labels, title: str = "") -> None:
    with open(path, "w") as f:
        f.write(render_svg(points, labels, title))
