"""Hand-written SVG scatter plot of a 2-feature audit."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from burdenaudit.classifier import LinearModel
from burdenaudit.counterfactual import Counterfactual
from burdenaudit.dataset import Dataset, split

log = logging.getLogger(__name__)

WIDTH, HEIGHT, MARGIN = 640, 560, 50
GROUP_COLORS = {0: "#d95f02", 1: "#1b9e77"}
CF_COLOR = "#333333"


def _clip_line(w, b, xmin, xmax, ymin, ymax):
    """Segment of ``w[0]*x + w[1]*y + b = 0`` inside the box, or None."""
    pts = []
    if w[1] != 0:
        for x in (xmin, xmax):
            y = -(w[0] * x + b) / w[1]
            if ymin <= y <= ymax:
                pts.append((x, y))
    if w[0] != 0:
        for y in (ymin, ymax):
            x = -(w[1] * y + b) / w[0]
            if xmin <= x <= xmax:
                pts.append((x, y))
    pts = sorted(set(pts))
    if len(pts) < 2:
        return None
    return pts[0], pts[-1]


def _marker(kind: str, cx: float, cy: float, color: str, r: float = 5.0) -> str:
    if kind == "square":
        return (f'<rect x="{cx - r:.2f}" y="{cy - r:.2f}" width="{2 * r:.2f}" height="{2 * r:.2f}" '
                f'fill="{color}"/>')
    if kind == "triangle":
        return (f'<polygon points="{cx - r:.2f},{cy - r:.2f} {cx + r:.2f},{cy - r:.2f} {cx:.2f},{cy + r:.2f}" '
                f'fill="{color}"/>')
    # cross
    return (f'<path d="M{cx - r:.2f},{cy - r:.2f} L{cx + r:.2f},{cy + r:.2f} M{cx - r:.2f},{cy + r:.2f} '
            f'L{cx + r:.2f},{cy - r:.2f}" stroke="{color}" stroke-width="1.8"/>')


def render_svg(dataset: Dataset, model: LinearModel, counterfactuals: Sequence[Counterfactual],
               title: str = "") -> str:
    features, groups, labels = split(dataset)
    names = dataset.feature_names
    cf_pts = [cf.c_star for cf in counterfactuals if cf.valid and cf.c_star is not None]
    allpts = np.vstack([features] + ([np.asarray(cf_pts)] if cf_pts else []))
    if len(allpts):
        xmin, ymin = allpts.min(axis=0)
        xmax, ymax = allpts.max(axis=0)
    else:
        xmin = ymin = 0.0
        xmax = ymax = 1.0
    padx = max((xmax - xmin) * 0.05, 0.5)
    pady = max((ymax - ymin) * 0.05, 0.5)
    xmin, xmax, ymin, ymax = xmin - padx, xmax + padx, ymin - pady, ymax + pady

    def sx(v):
        return MARGIN + (v - xmin) / (xmax - xmin) * (WIDTH - 2 * MARGIN)

    def sy(v):
        return HEIGHT - MARGIN - (v - ymin) / (ymax - ymin) * (HEIGHT - 2 * MARGIN)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" height="{HEIGHT - 2 * MARGIN}" '
        f'fill="none" stroke="#999"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(names[0])}</text>')
    out.append(f'<text x="14" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {HEIGHT / 2:.0f})">{escape(names[1])}</text>')
    for frac in (0.0, 0.5, 1.0):
        vx = xmin + frac * (xmax - xmin)
        vy = ymin + frac * (ymax - ymin)
        out.append(f'<text x="{sx(vx):.2f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" '
                   f'fill="#666">{vx:.1f}</text>')
        out.append(f'<text x="{MARGIN - 6}" y="{sy(vy) + 4:.2f}" text-anchor="end" fill="#666">{vy:.1f}</text>')

    seg = _clip_line(model.weights, model.bias, xmin, xmax, ymin, ymax)
    if seg is not None:
        (x0, y0), (x1, y1) = seg
        out.append(f'<line class="boundary" x1="{sx(x0):.2f}" y1="{sy(y0):.2f}" x2="{sx(x1):.2f}" '
                   f'y2="{sy(y1):.2f}" stroke="black" stroke-width="1.5" stroke-dasharray="8,4"/>')

    for cf in counterfactuals:
        if not cf.valid or cf.c_star is None:
            continue
        ox, oy = features[cf.origin_index]
        cx, cy = cf.c_star
        out.append(f'<line class="connector" x1="{sx(ox):.2f}" y1="{sy(oy):.2f}" x2="{sx(cx):.2f}" '
                   f'y2="{sy(cy):.2f}" stroke="#777" stroke-dasharray="2,3"/>')
    for (px, py), s, y in zip(features, groups, labels):
        color = GROUP_COLORS.get(int(s), "#7570b3")
        out.append(_marker("square" if y == 1 else "triangle", sx(px), sy(py), color))
    for cf in counterfactuals:
        if cf.valid and cf.c_star is not None:
            out.append(_marker("cross", sx(cf.c_star[0]), sy(cf.c_star[1]), CF_COLOR, 4.0))

    legend = [(f"S={s}, Y={y}", "square" if y == 1 else "triangle", GROUP_COLORS.get(s, "#7570b3"))
              for s in sorted(set(groups.tolist())) for y in (0, 1)]
    legend.append(("counterfactual", "cross", CF_COLOR))
    lx, ly = WIDTH - MARGIN - 120, MARGIN + 16
    for i, (text, kind, color) in enumerate(legend):
        out.append(_marker(kind, lx, ly + 18 * i - 4, color, 4.5))
        out.append(f'<text x="{lx + 12}" y="{ly + 18 * i}">{escape(text)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(dataset: Dataset, model: LinearModel, counterfactuals: Sequence[Counterfactual],
              path: str | Path, title: str = "") -> Path | None:
    """Write the SVG; returns None (and logs a notice) unless there are exactly 2 features."""
    width = len(dataset.schema.legitimate)
    if width != 2:
        log.warning("plot skipped: data has %d legitimate features, plot needs 2", width)
        return None
    path = Path(path)
    path.write_text(render_svg(dataset, model, counterfactuals, title), encoding="utf-8")
    return path
