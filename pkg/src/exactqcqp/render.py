"""SVG pictures of 2-D constraint families.

Each restricted zone ``{u : (u;1)^T B (u;1) <= 0}`` becomes one translucent
layer, so the feasible region is what stays white. Zones are traced with
marching squares on a regular sample grid: cells entirely inside are merged
into horizontal runs, boundary cells contribute the clipped polygon, and
saddle cells are resolved by the value at the cell centre.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .constraints import ConstraintSet, evaluate_many

MIN_RESOLUTION = 64
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


@dataclass(frozen=True)
class RenderSpec:
    bbox: tuple = ((-2.0, 2.0), (-2.0, 2.0))
    resolution: int = 400
    size: int = 480
    opacity: float = 0.35

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < MIN_RESOLUTION:
            raise ValueError(f"resolution must be an integer >= {MIN_RESOLUTION}")
        (x0, x1), (y0, y1) = self.bbox
        if not (x1 > x0 and y1 > y0):
            raise ValueError("bbox must have positive width and height")


def sample_grid(matrix, bbox, resolution: int):
    """Values of the quadratic form at ``resolution x resolution`` grid nodes.

    Returns ``(xs, ys, values)`` with ``values[j, i]`` at ``(xs[i], ys[j])``.
    """
    (x0, x1), (y0, y1) = bbox
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    gx, gy = np.meshgrid(xs, ys)
    vals = evaluate_many(matrix, np.column_stack([gx.ravel(), gy.ravel()])).reshape(gx.shape)
    return xs, ys, vals


def _clip_cell(corners, values):
    """Part of a cell (as a polygon) where the bilinear field is ``<= 0``.

    ``corners`` and ``values`` go round the cell counter-clockwise.
    """
    out = []
    for k in range(4):
        p, q = corners[k], corners[(k + 1) % 4]
        a, b = values[k], values[(k + 1) % 4]
        if a <= 0:
            out.append(p)
        if (a <= 0) != (b <= 0):
            t = a / (a - b)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _cell_polygons(corners, values):
    inside = [v <= 0 for v in values]
    saddle = inside == [True, False, True, False] or inside == [False, True, False, True]
    if saddle and np.mean(values) > 0:
        # two separate corner triangles
        polys = []
        for k in range(4):
            if not inside[k]:
                continue
            prev, nxt = (k - 1) % 4, (k + 1) % 4
            p = corners[k]
            t1 = values[k] / (values[k] - values[nxt])
            t0 = values[k] / (values[k] - values[prev])
            a = (p[0] + t1 * (corners[nxt][0] - p[0]), p[1] + t1 * (corners[nxt][1] - p[1]))
            b = (p[0] + t0 * (corners[prev][0] - p[0]), p[1] + t0 * (corners[prev][1] - p[1]))
            polys.append([b, p, a])
        return polys
    poly = _clip_cell(corners, values)
    return [poly] if len(poly) >= 3 else []


def zone_polygons(matrix, bbox, resolution: int = 400) -> list[list[tuple[float, float]]]:
    """Polygons (in data coordinates) covering the restricted zone of ``matrix``."""
    xs, ys, v = sample_grid(matrix, bbox, resolution)
    inside = v <= 0
    full = inside[:-1, :-1] & inside[1:, :-1] & inside[:-1, 1:] & inside[1:, 1:]
    empty = ~(inside[:-1, :-1] | inside[1:, :-1] | inside[:-1, 1:] | inside[1:, 1:])
    polys = []
    for j in range(resolution - 1):
        row = full[j]
        i = 0
        while i < resolution - 1:
            if row[i]:
                start = i
                while i < resolution - 1 and row[i]:
                    i += 1
                polys.append([(xs[start], ys[j]), (xs[i], ys[j]), (xs[i], ys[j + 1]), (xs[start], ys[j + 1])])
            else:
                i += 1
    for j, i in zip(*np.nonzero(~full & ~empty)):
        corners = [(xs[i], ys[j]), (xs[i + 1], ys[j]), (xs[i + 1], ys[j + 1]), (xs[i], ys[j + 1])]
        values = [v[j, i], v[j, i + 1], v[j + 1, i + 1], v[j + 1, i]]
        polys.extend(_cell_polygons(corners, values))
    return polys


def region_components(matrix, bbox, resolution: int = 400) -> int:
    """Number of 4-connected components of the sampled restricted zone."""
    _, _, v = sample_grid(matrix, bbox, resolution)
    _, count = ndimage.label(v <= 0)
    return int(count)


def render_svg(cset: ConstraintSet, spec: RenderSpec | None = None) -> str:
    """SVG 1.1 document with one translucent layer per restricted zone."""
    spec = spec or RenderSpec()
    if cset.n is not None and cset.n != 3:
        raise ValueError("rendering needs 3x3 constraints (two variables)")
    (x0, x1), (y0, y1) = spec.bbox
    size = spec.size
    pad = 40
    sx = (size - 2 * pad) / (x1 - x0)
    sy = (size - 2 * pad) / (y1 - y0)

    def px(x, y):
        return pad + (x - x0) * sx, size - pad - (y - y0) * sy

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    for k, c in enumerate(cset):
        colour = PALETTE[k % len(PALETTE)]
        parts = []
        for poly in zone_polygons(c.matrix, spec.bbox, spec.resolution):
            pts = [px(x, y) for x, y in poly]
            parts.append("M" + " L".join(f"{a:.2f},{b:.2f}" for a, b in pts) + " Z")
        label = c.label or f"B{k}"
        lines.append(
            f'<g id="zone-{k}"><title>{label}</title>'
            f'<path d="{" ".join(parts)}" fill="{colour}" fill-opacity="{spec.opacity}" stroke="none"/></g>'
        )
    lines.extend(_axes(spec, px))
    for k, c in enumerate(cset):
        colour = PALETTE[k % len(PALETTE)]
        lines.append(
            f'<text x="{size - pad + 4}" y="{pad + 14 * k}" font-size="11" fill="{colour}">{c.label or f"B{k}"}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _axes(spec: RenderSpec, px) -> list[str]:
    (x0, x1), (y0, y1) = spec.bbox
    out = []
    ax_y = min(max(0.0, y0), y1)
    ax_x = min(max(0.0, x0), x1)
    a, b = px(x0, ax_y)
    c, d = px(x1, ax_y)
    out.append(f'<line x1="{a:.2f}" y1="{b:.2f}" x2="{c:.2f}" y2="{d:.2f}" stroke="black" stroke-width="1"/>')
    a, b = px(ax_x, y0)
    c, d = px(ax_x, y1)
    out.append(f'<line x1="{a:.2f}" y1="{b:.2f}" x2="{c:.2f}" y2="{d:.2f}" stroke="black" stroke-width="1"/>')
    a, b = px(x1, ax_y)
    out.append(f'<text x="{a + 4:.2f}" y="{b + 4:.2f}" font-size="12">u1</text>')
    a, b = px(ax_x, y1)
    out.append(f'<text x="{a + 4:.2f}" y="{b - 4:.2f}" font-size="12">u2</text>')
    for x in np.unique(np.round(np.linspace(x0, x1, 5), 6)):
        a, b = px(x, ax_y)
        out.append(f'<text x="{a:.2f}" y="{b + 14:.2f}" font-size="9" text-anchor="middle">{x:g}</text>')
    for y in np.unique(np.round(np.linspace(y0, y1, 5), 6)):
        a, b = px(ax_x, y)
        out.append(f'<text x="{a - 4:.2f}" y="{b + 3:.2f}" font-size="9" text-anchor="end">{y:g}</text>')
    return out
