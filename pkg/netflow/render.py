"""netflow renderer - deterministic standalone SVG for networks.

No dependencies beyond numpy. The same network and options always give the
same bytes, so snapshots can be diffed.
"""

from __future__ import annotations

import html
import logging
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from netflow.anisotropy import CrystallinePolytope
from netflow.network import Network
from netflow.schema import RENDER_MARGIN, RENDER_RADIUS, RENDER_SIZE

if TYPE_CHECKING:
    from netflow.crystalline import CahnHoffmanField

logger = logging.getLogger(__name__)

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _fmt(x: float) -> str:
    return f"{x:.6f}".rstrip("0").rstrip(".") if x != 0 else "0"


def _curve_points(net: Network, curve_id: str, radius: float) -> np.ndarray:
    """Polyline points with half-lines truncated at distance `radius` from their base point."""
    c = net.curve(curve_id)
    pts = [np.asarray(c.points, dtype=float)]
    if c.start_halfline is not None:
        pts.insert(0, (c.points[0] + radius * c.start_halfline)[None, :])
    if c.end_halfline is not None:
        pts.append((c.points[-1] + radius * c.end_halfline)[None, :])
    return np.vstack(pts)


class _Frame:
    """World -> pixel map: y axis flipped, uniform scale, margin on every side."""

    def __init__(self, points: np.ndarray, size: int, margin: float) -> None:
        if len(points):
            lo, hi = points.min(axis=0), points.max(axis=0)
        else:
            lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
        span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
        self.lo = lo - margin * span
        self.span = span * (1.0 + 2.0 * margin)
        self.size = size
        self.offset = (self.span - (hi - lo + 2.0 * margin * span)) / 2.0

    def __call__(self, p: np.ndarray) -> tuple[float, float]:
        x = (p[0] - self.lo[0] + self.offset[0]) / self.span * self.size
        y = self.size - (p[1] - self.lo[1] + self.offset[1]) / self.span * self.size
        return x, y

    def path(self, pts: np.ndarray, closed: bool = False) -> str:
        coords = [self(p) for p in pts]
        d = "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in coords)
        return d + " Z" if closed else d


def render_svg(
    net: Network,
    radius: float = RENDER_RADIUS,
    size: int = RENDER_SIZE,
    field: CahnHoffmanField | None = None,
    wulff: str | None = None,
    margin: float = RENDER_MARGIN,
) -> str:
    """Render one path per curve and one dot per junction.

    `field` adds Cahn-Hoffman arrows at segment midpoints; `wulff` names an
    anisotropy whose Wulff polygon is drawn as an inset in the top-left corner.
    """
    curves = {c.id: _curve_points(net, c.id, radius) for c in net.curves}
    everything = np.vstack(list(curves.values())) if curves else np.zeros((0, 2))
    frame = _Frame(everything, size, margin)
    stroke = max(1.0, size / 400.0)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for k, c in enumerate(net.curves):
        color = _PALETTE[k % len(_PALETTE)]
        out.append(
            f'<path id="curve-{html.escape(c.id, quote=True)}" d="{frame.path(curves[c.id], c.closed)}" '
            f'fill="none" stroke="{color}" stroke-width="{_fmt(stroke)}"/>'
        )
    for j in net.junctions:
        x, y = frame(j.point)
        out.append(
            f'<circle id="junction-{html.escape(j.id, quote=True)}" cx="{_fmt(x)}" cy="{_fmt(y)}" '
            f'r="{_fmt(3 * stroke)}" fill="black"/>'
        )
    if field is not None:
        out.extend(_arrows(net, field, frame, stroke))
    if wulff is not None:
        out.extend(_wulff_inset(net, wulff, size, stroke))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _arrows(net: Network, field: CahnHoffmanField, frame: _Frame, stroke: float) -> list[str]:
    scale = 0.1 * frame.span
    lines = []
    for s in net.finite_segments():
        if s.id not in field.vectors:
            continue
        mid = 0.5 * (s.a + s.b)
        vec = 0.5 * (field.vectors[s.id][0] + field.vectors[s.id][1])
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            continue
        tip = mid + scale * vec / norm
        (x0, y0), (x1, y1) = frame(mid), frame(tip)
        lines.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
            f'stroke="gray" stroke-width="{_fmt(stroke)}"/>'
        )
    return lines


def _wulff_inset(net: Network, name: str, size: int, stroke: float) -> list[str]:
    aniso = net.anisotropies[name]
    if isinstance(aniso, CrystallinePolytope):
        pts = aniso.vertices
    else:
        theta = np.linspace(0.0, 2.0 * np.pi, 180, endpoint=False)
        # Wulff shape of a smooth anisotropy: envelope of the support lines
        nus = np.column_stack([np.cos(theta), np.sin(theta)])
        pts = np.array([aniso.gradient(nu) for nu in nus])
    inset = size // 5
    extent = float(np.max(np.abs(pts))) or 1.0
    cx = cy = inset / 2.0 + 4.0
    d = "M " + " L ".join(
        f"{_fmt(cx + p[0] / extent * inset / 2.0)} {_fmt(cy - p[1] / extent * inset / 2.0)}" for p in pts
    ) + " Z"
    return [
        f'<g id="wulff-{html.escape(name, quote=True)}">',
        f'<rect x="4" y="4" width="{inset}" height="{inset}" fill="none" stroke="lightgray"/>',
        f'<path d="{d}" fill="none" stroke="black" stroke-width="{_fmt(stroke)}"/>',
        "</g>",
    ]


def write_svg(net: Network, output_path: str | Path, **options) -> int:
    """Render and write to file. Returns bytes written; rejects paths containing '..'."""
    output_path = Path(output_path)
    if ".." in output_path.parts:
        raise ValueError("Output path must not contain '..' (path traversal)")
    content = render_svg(net, **options)
    output_path.write_text(content, encoding="utf-8")
    logger.debug("wrote %s (%d curves)", output_path, len(net.curves))
    return len(content.encode("utf-8"))
