"""Deterministic SVG 1.1 drawings of planar scenes."""
from __future__ import annotations

import numpy as np

from hilbertsep import geometry as geo
from hilbertsep.errors import DimensionNot2

SIZE = 480
PAD = 24
COLORS = {1: "#1f77b4", -1: "#d62728"}
BALL_COLORS = ("#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def clip_line(domain, w, c):
    """Segment of ``w @ x + c = 0`` inside the domain, or None."""
    w = np.asarray(w, dtype=float)
    x0 = -c / (w @ w) * w
    u = np.array([-w[1], w[0]])
    clear = domain.clearances(x0)
    slope = domain.W @ u
    lo, hi = -np.inf, np.inf
    for cl, s in zip(clear, slope):
        if abs(s) <= geo.TOL_PARALLEL:
            if cl < 0:
                return None
        elif s > 0:
            lo = max(lo, -cl / s)
        else:
            hi = min(hi, -cl / s)
    if not hi > lo:
        return None
    return x0 + lo * u, x0 + hi * u


class _Canvas:
    def __init__(self, domain):
        lo, hi = (np.asarray(v, dtype=float) for v in domain.bbox)
        span = float(np.max(hi - lo)) or 1.0
        self.lo, self.scale = lo, (SIZE - 2 * PAD) / span
        self.height = SIZE

    def xy(self, p):
        x = PAD + (p[0] - self.lo[0]) * self.scale
        y = self.height - PAD - (p[1] - self.lo[1]) * self.scale
        return f"{x:.3f},{y:.3f}"


def _polygon(canvas, verts, **attrs):
    # the title carries the vertices in domain coordinates
    pts = " ".join(canvas.xy(v) for v in verts)
    extra = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
    world = " ".join(f"({x:.6g}, {y:.6g})" for x, y in verts)
    return f'  <polygon points="{pts}" {extra}><title>{world}</title></polygon>'


def render_svg(domain, points=None, labels=None, model=None, balls=(), metric=geo.HILBERT):
    """SVG text for the domain, labelled points, a separator line and metric balls.

    ``balls`` is a sequence of ``(center, radius)``; each is drawn as the
    polygon cut out by its constraint system.
    """
    if domain.dimension != 2:
        raise DimensionNot2("rendering is planar only")
    canvas = _Canvas(domain)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
           f'viewBox="0 0 {SIZE} {SIZE}">',
           f'  <rect width="{SIZE}" height="{SIZE}" fill="white"/>']
    verts = geo.polygon_vertices(domain.W, domain.c)
    out.append(_polygon(canvas, verts, id="domain", fill="#f4f4f4", stroke="black", stroke_width="1.5"))
    for i, (center, r) in enumerate(balls):
        ball = geo.metric_ball(domain, center, r, metric)
        bv = geo.polygon_vertices(np.vstack([ball.A, domain.W]), np.concatenate([ball.b, domain.c]))
        color = BALL_COLORS[i % len(BALL_COLORS)]
        if len(bv):
            out.append(_polygon(canvas, bv, id=f"ball{i}", fill=color, fill_opacity="0.2",
                                stroke=color, stroke_width="1"))
        cx, cy = canvas.xy(ball.center.coords).split(",")
        out.append(f'  <circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>')
    if model is not None:
        seg = clip_line(domain, model.w, model.c)
        if seg is not None:
            (x1, y1), (x2, y2) = (canvas.xy(s).split(",") for s in seg)
            out.append(f'  <line id="separator" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                       f'stroke="black" stroke-width="1.5" stroke-dasharray="6,3"/>')
    if points is not None:
        labels = np.ones(len(points), dtype=int) if labels is None else labels
        for p, s in zip(np.atleast_2d(points), labels):
            cx, cy = canvas.xy(p).split(",")
            out.append(f'  <circle cx="{cx}" cy="{cy}" r="4" fill="{COLORS.get(int(s), "gray")}" '
                       f'stroke="black" stroke-width="0.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
