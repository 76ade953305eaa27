"""Deterministic SVG drawings of certificates.

Each part is drawn as a rounded blob around the convex hull of its points.
Three-dimensional point sets are drawn as one panel per z-layer.
"""

from __future__ import annotations

from pathlib import Path

from .certificates import Certificate

PALETTE = (
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4",
    "#f032e6", "#bfef45", "#469990", "#9a6324", "#800000", "#808000",
    "#000075", "#fabed4", "#ffd8b1", "#aaffc3", "#dcbeff", "#a9a9a9",
)
UNIT = 40
MARGIN = 30
GAP = 40


def color(i: int) -> str:
    if i < len(PALETTE):
        return PALETTE[i]
    # beyond the fixed palette, step the hue by the golden angle
    return f"hsl({(i * 137) % 360},65%,50%)"


def _hull(points: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Convex hull by the monotone chain, counter-clockwise, no repeats."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _layers(cert: Certificate) -> list[tuple[str, dict[int, list[tuple[int, int]]]]]:
    """Panels as (title, part index -> planar points)."""
    dim = cert.dim_x
    if dim == 1:
        return [("", {i: [(p[0], 0) for p in part] for i, part in enumerate(cert.parts)})]
    if dim == 2:
        return [("", {i: [tuple(p) for p in part] for i, part in enumerate(cert.parts)})]
    zs = sorted({p[2] for p in cert.points})
    out = []
    for z in zs:
        layer = {}
        for i, part in enumerate(cert.parts):
            pts = [(p[0], p[1]) for p in part if p[2] == z]
            if pts:
                layer[i] = pts
        out.append((f"z = {z}", layer))
    return out


def render_svg(cert: Certificate) -> str:
    panels = _layers(cert)
    xs = [p[0] for p in cert.points]
    ys = [p[1] for p in cert.points] if cert.dim_x > 1 else [0]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    pw = (x1 - x0) * UNIT
    ph = (y1 - y0) * UNIT
    title_h = 20 if cert.dim_x > 2 else 0
    width = 2 * MARGIN + len(panels) * pw + (len(panels) - 1) * GAP
    height = 2 * MARGIN + ph + title_h
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for n, (title, layer) in enumerate(panels):
        ox = MARGIN + n * (pw + GAP)
        oy = MARGIN + title_h

        def at(p):
            # lattice y grows upward
            return ox + (p[0] - x0) * UNIT, oy + (y1 - p[1]) * UNIT

        if title:
            lines.append(
                f'<text class="layer" x="{ox + pw // 2}" y="{MARGIN}" font-family="sans-serif" '
                f'font-size="14" text-anchor="middle">{title}</text>'
            )
        for i in sorted(layer):
            hull = [at(p) for p in _hull(layer[i])]
            c = color(i)
            style = (
                f'fill="{c}" fill-opacity="0.35" stroke="{c}" stroke-opacity="0.35" '
                f'stroke-width="{UNIT // 2}" stroke-linejoin="round" stroke-linecap="round"'
            )
            if len(hull) == 1:
                (x, y), = hull
                lines.append(f'<circle class="part" cx="{x}" cy="{y}" r="{UNIT // 4}" fill="{c}" fill-opacity="0.35"/>')
            else:
                pts = " ".join(f"{x},{y}" for x, y in hull)
                lines.append(f'<polygon class="part" points="{pts}" {style}/>')
        for i in sorted(layer):
            for p in sorted(layer[i]):
                x, y = at(p)
                lines.append(f'<circle class="pt" cx="{x}" cy="{y}" r="4" fill="black"><title>part {i}</title></circle>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_svg(cert: Certificate, path) -> Path:
    path = Path(path)
    path.write_text(render_svg(cert), encoding="utf-8")
    return path
