"""Plain SVG rendering of a partition: the frame of the sample space, inner
boundaries as polylines, optional density shading and point overlay."""
from __future__ import annotations

import numpy as np

from .geometry import Partition, shared_edges


def inner_lines(partition: Partition) -> list[tuple[int, int, int, int]]:
    """Inner boundary as maximal straight segments ``(x0, y0, x1, y1)`` in
    lattice offsets.  Collinear pieces that touch are joined."""
    labelled = [(r, j) for j, reg in enumerate(partition.regions) for r in reg.rects]
    by_line: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for axis, pos, lo, hi, _, _ in shared_edges(labelled):
        by_line.setdefault((axis, pos), []).append((lo, hi))
    out = []
    for (axis, pos), spans in sorted(by_line.items()):
        spans.sort()
        cur_lo, cur_hi = spans[0]
        merged = []
        for lo, hi in spans[1:]:
            if lo <= cur_hi:
                cur_hi = max(cur_hi, hi)
            else:
                merged.append((cur_lo, cur_hi))
                cur_lo, cur_hi = lo, hi
        merged.append((cur_lo, cur_hi))
        for lo, hi in merged:
            out.append((pos, lo, pos, hi) if axis == 0 else (lo, pos, hi, pos))
    return out


def render_svg(partition: Partition, densities=None, points=None, shade: bool = False,
               width: int = 600) -> str:
    g = partition.grid
    scale = width / g.nx
    height = g.ny * scale

    def px(ix, iy):
        # SVG y grows downwards
        return ix * scale, height - iy * scale

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.2f}" '
             f'viewBox="0 0 {width} {height:.2f}">']
    if shade and densities is not None:
        dens = np.asarray(densities, float)
        top = dens.max() if dens.size and dens.max() > 0 else 1.0
        parts.append('<g class="shade" fill="#1f4e9c" stroke="none">')
        for reg, f in zip(partition.regions, dens):
            for r in reg.rects:
                x, y = px(r.x0, r.y1)
                parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{(r.x1 - r.x0) * scale:.2f}" '
                             f'height="{(r.y1 - r.y0) * scale:.2f}" fill-opacity="{f / top:.4f}"/>')
        parts.append("</g>")
    if points is not None and len(points):
        e = g.epsilon
        parts.append('<g class="points" fill="#333333">')
        for x, y in np.asarray(points, float):
            cx, cy = px(x / e - g.origin[0], y / e - g.origin[1])
            parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="0.8"/>')
        parts.append("</g>")
    parts.append(f'<rect class="frame" x="0" y="0" width="{width}" height="{height:.2f}" '
                 f'fill="none" stroke="black" stroke-width="1.5"/>')
    for x0, y0, x1, y1 in inner_lines(partition):
        (a, b), (c, d) = px(x0, y0), px(x1, y1)
        parts.append(f'<polyline class="boundary" points="{a:.2f},{b:.2f} {c:.2f},{d:.2f}" '
                     f'fill="none" stroke="#c0392b" stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
