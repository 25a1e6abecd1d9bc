"""
Benchmark networks.

Crystalline:
    octagon_triod     one junction, regular octagon, three segments + half-lines
    hexagon_theta     two junctions, regular hexagon, Theta-shaped closed cells
    three_hexagons    one junction, three hexagonal anisotropies (regular or not)
    square_curve      closed square under the square Wulff shape

Smooth:
    circle, ellipse   closed sampled curves
    triod             three straight sampled curves with sliding half-line tails
    theta             two circular arcs and a chord meeting at two junctions
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from netflow.anisotropy import Anisotropy, CrystallinePolytope, SmoothAnisotropy, regular_polygon
from netflow.errors import NetworkError
from netflow.network import Curve, Junction, Network


def _unit(degrees: float) -> np.ndarray:
    a = math.radians(degrees)
    return np.array([math.cos(a), math.sin(a)])


def _path(start, directions: Sequence[float], lengths: Sequence[float]) -> np.ndarray:
    pts = [np.asarray(start, dtype=float)]
    for d, L in zip(directions, lengths):
        if L <= 0:
            raise NetworkError(f"Path segment lengths must be positive, got {tuple(lengths)}")
        pts.append(pts[-1] + L * _unit(d))
    return np.array(pts)


# =============================================================================
# Crystalline benchmarks
# =============================================================================

def octagon_triod(L1: float, L2: float, L3: float) -> Network:
    """Triod under the unit-side regular octagon.

    Curves c1, c2, c3 leave the junction at 270, 45 and 135 degrees and turn
    into half-lines at 225, 90 and 90 degrees. On this geometry the minimal
    field reduces to alpha x^2 + beta x + gamma with x = kappa(c1:0) * L1.
    """
    octagon = regular_polygon(8, 1.0)
    origin = np.zeros(2)
    curves = [
        Curve.create("c1", "octagon", _path(origin, [270.0], [L1]), end_halfline=_unit(225.0)),
        Curve.create("c2", "octagon", _path(origin, [45.0], [L2]), end_halfline=_unit(90.0)),
        Curve.create("c3", "octagon", _path(origin, [135.0], [L3]), end_halfline=_unit(90.0)),
    ]
    junction = Junction.create("q", origin, [("c2", "start"), ("c3", "start"), ("c1", "start")])
    return Network.create({"octagon": octagon}, curves, [junction])


def hexagon_theta(
    middle: float = 1.0,
    left: Sequence[float] = (1.0, 1.0, 1.0),
    right: Sequence[float] = (1.0, 1.0, 1.0),
) -> Network:
    """Theta network under the unit-side regular hexagon (vertices at 30 + 60k degrees).

    Junction p sits at the origin and q at (0, middle). s1 runs p -> q on the
    left through directions 210, 150, 90, 30, 330; s3 mirrors it on the right;
    s2 is the vertical chord. `left` / `right` fix the first three side lengths
    of each path, the last two follow from closing the path at q.
    """
    m = float(middle)
    l1, l2, l3 = (float(v) for v in left)
    r1, r2, r3 = (float(v) for v in right)
    left_lengths = [l1, l2, l3, l1 - l3 + m, l2 + l3 - m]
    right_lengths = [r1, r2, r3, r1 + m - r3, r2 - m + r3]
    if min(left_lengths + right_lengths) <= 0 or m <= 0:
        raise NetworkError(
            f"Theta side lengths must be positive, got left {left_lengths}, right {right_lengths}, middle {m}"
        )
    p, q = np.zeros(2), np.array([0.0, m])
    s1 = _path(p, [210.0, 150.0, 90.0, 30.0, 330.0], left_lengths)
    s3 = _path(p, [330.0, 30.0, 90.0, 150.0, 210.0], right_lengths)
    s1[-1] = q
    s3[-1] = q
    curves = [
        Curve.create("s1", "hexagon", s1, phases=(1, 2)),
        Curve.create("s2", "hexagon", [p, q], phases=(1, 3)),
        Curve.create("s3", "hexagon", s3, phases=(2, 3)),
    ]
    junctions = [
        Junction.create("p", p, [("s3", "start"), ("s2", "start"), ("s1", "start")]),
        Junction.create("q", q, [("s3", "end"), ("s1", "end"), ("s2", "end")]),
    ]
    return Network.create({"hexagon": regular_polygon(6, 1.0)}, curves, junctions)


def random_hexagon_theta(rng: np.random.Generator, low: float = 0.5, high: float = 2.0) -> Network:
    """A hexagon theta with random free side lengths, redrawn until every side is positive."""
    while True:
        m = rng.uniform(low, high)
        left = rng.uniform(low, high, size=3)
        right = rng.uniform(low, high, size=3)
        if (left[0] - left[2] + m > 0.1 and left[1] + left[2] - m > 0.1
                and right[0] + m - right[2] > 0.1 and right[1] - m + right[2] > 0.1):
            return hexagon_theta(m, left, right)


def theta_lengths(net: Network) -> tuple[list[float], float]:
    """Outer side lengths S11..S15, S31..S35 and the chord length of a hexagon theta."""
    outer = [s.length for s in net.curve_segments("s1")] + [s.length for s in net.curve_segments("s3")]
    return outer, net.curve_segments("s2")[0].length


def three_hexagons(angle: float = 0.0) -> Network:
    """One junction joining three hexagonal anisotropies.

    phi1 is the unit-side hexagon with vertices at 30 + 60k degrees; phi2 and
    phi3 are hexagons of circumradius sqrt(3)/2 with vertices at 60k degrees.
    Curve 2 and 3 have normals at 120 and 240 degrees, which pins their
    Cahn-Hoffman vectors to Wulff vertices; curve 1 has its normal at `angle`
    degrees. At 0 the only balanced triple uses the midpoint of an edge of
    phi1 (regular, margin 0); away from the edge normals it is not regular.
    """
    anisotropies = {
        "phi1": regular_polygon(6, 1.0),
        "phi2": regular_polygon(6, math.sqrt(3.0) / 2.0, rotation=math.pi / 6.0),
        "phi3": regular_polygon(6, math.sqrt(3.0) / 2.0, rotation=math.pi / 6.0),
    }
    origin = np.zeros(2)
    normals = [angle, 120.0, 240.0]
    curves = []
    for i, nu in enumerate(normals, start=1):
        curves.append(Curve.create(
            f"c{i}", f"phi{i}", _path(origin, [nu - 90.0], [1.0]), end_halfline=_unit(nu - 70.0),
        ))
    junction = Junction.create("q", origin, [("c1", "start"), ("c2", "start"), ("c3", "start")])
    return Network.create(anisotropies, curves, [junction])


def square_curve(side: float = 1.0) -> Network:
    """Counterclockwise square of the given side centred at the origin, Wulff square (+-1, +-1)."""
    a = side / 2.0
    pts = [(-a, -a), (a, -a), (a, a), (-a, a)]
    wulff = CrystallinePolytope.create([(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)])
    return Network.create({"square": wulff}, [Curve.create("square", "square", pts, closed=True)])


# =============================================================================
# Smooth benchmarks
# =============================================================================

def circle(radius: float = 1.0, n: int = 200, anisotropy: Anisotropy | None = None, center=(0.0, 0.0)) -> Network:
    """Counterclockwise sampled circle with n nodes."""
    aniso = anisotropy or SmoothAnisotropy.from_family("euclidean", [1.0])
    theta = 2.0 * np.pi * np.arange(n) / n
    pts = np.asarray(center, dtype=float) + radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return Network.create({"phi": aniso}, [Curve.create("circle", "phi", pts, kind="sampled", closed=True)])


def ellipse(a: float = 2.0, b: float = 1.0, n: int = 200, anisotropy: Anisotropy | None = None) -> Network:
    aniso = anisotropy or SmoothAnisotropy.from_family("euclidean", [1.0])
    theta = 2.0 * np.pi * np.arange(n) / n
    pts = np.column_stack([a * np.cos(theta), b * np.sin(theta)])
    return Network.create({"phi": aniso}, [Curve.create("ellipse", "phi", pts, kind="sampled", closed=True)])


def triod(
    angles: Sequence[float] = (90.0, 210.0, 330.0),
    length: float = 1.0,
    n: int = 20,
    anisotropies: Sequence[Anisotropy] | None = None,
) -> Network:
    """Three straight sampled curves leaving the origin at `angles` degrees, with half-line tails."""
    if anisotropies is None:
        euclid = SmoothAnisotropy.from_family("euclidean", [1.0])
        anisotropies = (euclid, euclid, euclid)
    table: dict[str, Anisotropy] = {f"phi{i}": a for i, a in enumerate(anisotropies, start=1)}
    curves = []
    s = np.linspace(0.0, length, n)[:, None]
    for i, angle in enumerate(angles, start=1):
        d = _unit(angle)
        curves.append(Curve.create(f"c{i}", f"phi{i}", s * d, kind="sampled", end_halfline=d))
    junction = Junction.create("q", np.zeros(2), [(f"c{i}", "start") for i in range(1, 4)])
    return Network.create(table, curves, [junction])


def theta(
    n: int = 40,
    anisotropy: Anisotropy | None = None,
    half_height: float = 0.5,
) -> Network:
    """Two circular arcs and a straight chord from p = (0, -h) to q = (0, h).

    The arcs leave p at 210 and 330 degrees, so all three curves meet at 120
    degrees; with an anisotropic energy the junction still has to be
    equilibrated before running a flow (see smooth_flow.equilibrate).
    """
    aniso = anisotropy or SmoothAnisotropy.from_family("euclidean", [1.0])
    h = float(half_height)
    c = h / math.sqrt(3.0)
    R = math.hypot(c, h)
    p, q = np.array([0.0, -h]), np.array([0.0, h])
    t_right = np.linspace(-2.0 * math.pi / 3.0, 2.0 * math.pi / 3.0, n)
    right = np.column_stack([c + R * np.cos(t_right), R * np.sin(t_right)])
    t_left = np.linspace(-math.pi / 3.0, -5.0 * math.pi / 3.0, n)
    left = np.column_stack([-c + R * np.cos(t_left), R * np.sin(t_left)])
    chord = np.column_stack([np.zeros(n), np.linspace(-h, h, n)])
    for pts in (left, right, chord):
        pts[0], pts[-1] = p, q
    curves = [
        Curve.create("s1", "phi", left, kind="sampled", phases=(1, 2)),
        Curve.create("s2", "phi", chord, kind="sampled", phases=(1, 3)),
        Curve.create("s3", "phi", right, kind="sampled", phases=(2, 3)),
    ]
    junctions = [
        Junction.create("p", p, [("s3", "start"), ("s2", "start"), ("s1", "start")]),
        Junction.create("q", q, [("s3", "end"), ("s1", "end"), ("s2", "end")]),
    ]
    return Network.create({"phi": aniso}, curves, junctions)

