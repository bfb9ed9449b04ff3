"""Static SVG pictures of configurations in the Poincaré disk.

Boundary points are pushed through the Cayley map z ↦ (z − i)/(z + i); every
geodesic becomes an arc of a circle orthogonal to the unit circle (or a
diameter).  Only float midpoints are used; nothing here feeds back into exact
computations.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .flats import ConfigSpec, Flat
from .moebius import INF, BoundaryPt, OrientedGeodesic

SIZE = 320
PAD = 20


def cayley(p: BoundaryPt) -> tuple[float, float]:
    """Image of a boundary point on the unit circle."""
    if p is INF:
        return (1.0, 0.0)
    x = float(p)
    den = x * x + 1.0
    return ((x * x - 1.0) / den, -2.0 * x / den)


def _screen(pt: tuple[float, float], ox: float, oy: float, scale: float) -> tuple[float, float]:
    return (ox + scale * pt[0], oy - scale * pt[1])


def geodesic_path(g: OrientedGeodesic, ox: float, oy: float, scale: float) -> str:
    p1, p2 = cayley(g.start), cayley(g.end)
    s1, s2 = _screen(p1, ox, oy, scale), _screen(p2, ox, oy, scale)
    cross = p1[0] * p2[1] - p1[1] * p2[0]
    dot = p1[0] * p2[0] + p1[1] * p2[1]
    if abs(cross) < 1e-9:
        return f"M {s1[0]:.4f} {s1[1]:.4f} L {s2[0]:.4f} {s2[1]:.4f}"
    half = math.acos(max(-1.0, min(1.0, dot))) / 2
    radius = math.tan(half)
    # centre of the orthogonal circle, beyond the chord midpoint
    mx, my = (p1[0] + p2[0]) / 2, (p1[1] + p2[1]) / 2
    norm = math.hypot(mx, my)
    dist = 1.0 / math.cos(half)
    c = (mx / norm * dist, my / norm * dist)
    inner = (c[0] - radius * c[0] / dist, c[1] - radius * c[1] / dist)
    sc, sm = _screen(c, ox, oy, scale), _screen(inner, ox, oy, scale)
    v1 = (s1[0] - sc[0], s1[1] - sc[1])
    vm = (sm[0] - sc[0], sm[1] - sc[1])
    sweep = 1 if v1[0] * vm[1] - v1[1] * vm[0] > 0 else 0
    r = radius * scale
    return f"M {s1[0]:.4f} {s1[1]:.4f} A {r:.4f} {r:.4f} 0 0 {sweep} {s2[0]:.4f} {s2[1]:.4f}"


def render_flats(families: dict[str, list[Flat]], r: int, title: str = "") -> str:
    """One disk per factor; each geodesic becomes one <path class="arc">."""
    colours = {"A": "#1f5fbf", "B": "#c0392b"}
    width = r * (SIZE + PAD) + PAD
    height = SIZE + 2 * PAD + 20
    scale = SIZE / 2
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    for k in range(r):
        ox = PAD + k * (SIZE + PAD) + scale
        oy = PAD + 20 + scale
        out.append(f'<g id="factor-{k + 1}">')
        out.append(f'<text x="{ox - scale:.1f}" y="{PAD + 10}" font-size="12">factor {k + 1}</text>')
        out.append(f'<circle cx="{ox:.4f}" cy="{oy:.4f}" r="{scale:.4f}" fill="none" stroke="#555"/>')
        for family, flats in families.items():
            for idx, f in enumerate(flats):
                d = geodesic_path(f.coords[k], ox, oy, scale)
                out.append(
                    f'<path class="arc" data-flat="{family}{idx + 1}" d="{d}" fill="none" '
                    f'stroke="{colours.get(family, "#000")}" stroke-width="1.5"/>'
                )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_config(c: ConfigSpec, title: str = "") -> str:
    return render_flats({"A": list(c.A), "B": list(c.B)}, c.r, title)
