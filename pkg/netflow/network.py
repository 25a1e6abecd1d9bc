"""
netflow Network - planar networks of curves meeting at triple junctions.

A network is an anisotropy table, a list of curves and an explicit junction
table. Incidence is never inferred from coordinates: curve endpoints listed
in a junction are snapped to the junction point at build time.

Segment ids are stable across parallel copies of a network:

    "<curve>:<k>"       k-th finite segment of the curve
    "<curve>:start"     half-line attached to the curve's first node
    "<curve>:end"       half-line attached to the curve's last node

Orientation: tau is the unit tangent along the curve's parametrisation and
nu = tau rotated counterclockwise. A half-line at the start of a curve is
traversed from infinity towards the first node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import shapely
from scipy.integrate import trapezoid
from shapely.geometry import LineString, LinearRing

from netflow.anisotropy import Anisotropy, cross, rot_ccw
from netflow.errors import NetworkError
from netflow.schema import (
    CURVE_KINDS,
    END_LABELS,
    MAX_CURVES,
    MAX_POINTS_PER_CURVE,
    PARALLEL_TOLERANCE,
    SNAP_TOLERANCE,
    WINDOW_SCALE,
)

# Validation codes
SELF_INTERSECTION = "self-intersection"
CROSSING = "crossing"
NON_TRIPLE_JUNCTION = "non-triple-junction"
DISCONNECTED = "disconnected"
HALFLINE_AT_JUNCTION = "halfline-at-junction"
SPOON = "spoon"
DEGENERATE_SEGMENT = "degenerate-segment"


# =============================================================================
# Data model
# =============================================================================

@dataclass(frozen=True, eq=False)
class Curve:
    """A polyline or sampled curve, optionally ending in half-lines.

    `start_halfline` / `end_halfline` are unit directions pointing away from
    the curve's first / last node.
    """

    id: str
    anisotropy: str
    points: np.ndarray
    kind: str = "polyline"
    closed: bool = False
    start_halfline: np.ndarray | None = None
    end_halfline: np.ndarray | None = None
    phases: tuple[int, int] | None = None

    @classmethod
    def create(
        cls,
        id: str,
        anisotropy: str,
        points,
        kind: str = "polyline",
        closed: bool = False,
        start_halfline=None,
        end_halfline=None,
        phases: tuple[int, int] | None = None,
    ) -> Curve:
        if not id or not isinstance(id, str):
            raise NetworkError(f"Curve id must be a non-empty string, got {id!r}")
        if ":" in id:
            raise NetworkError(f"Curve id '{id}' must not contain ':'")
        if kind not in CURVE_KINDS:
            raise NetworkError(f"Curve '{id}' has unknown kind '{kind}'")
        pts = np.array(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise NetworkError(f"Curve '{id}' points must be a list of [x, y] pairs")
        if not np.all(np.isfinite(pts)):
            raise NetworkError(f"Curve '{id}' has non-finite coordinates")
        minimum = 3 if closed else 2
        if len(pts) < minimum:
            raise NetworkError(f"Curve '{id}' needs at least {minimum} points, got {len(pts)}")
        if len(pts) > MAX_POINTS_PER_CURVE:
            raise NetworkError(f"Curve '{id}' exceeds {MAX_POINTS_PER_CURVE} points")
        if closed and (start_halfline is not None or end_halfline is not None):
            raise NetworkError(f"Closed curve '{id}' cannot carry half-lines")
        if phases is not None:
            i, j = (int(v) for v in phases)
            if not i < j:
                raise NetworkError(f"Curve '{id}' phase labels must satisfy i < j, got {phases}")
            phases = (i, j)
        pts.setflags(write=False)
        return cls(
            id=id, anisotropy=anisotropy, points=pts, kind=kind, closed=bool(closed),
            start_halfline=_direction(start_halfline, id),
            end_halfline=_direction(end_halfline, id),
            phases=phases,
        )

    @property
    def n_segments(self) -> int:
        return len(self.points) if self.closed else len(self.points) - 1

    def halfline(self, end: str) -> np.ndarray | None:
        return self.start_halfline if end == "start" else self.end_halfline

    def end_point(self, end: str) -> np.ndarray:
        return self.points[0] if end == "start" else self.points[-1]


def _direction(d, curve_id: str) -> np.ndarray | None:
    if d is None:
        return None
    v = np.array(d, dtype=float)
    norm = float(np.linalg.norm(v)) if v.shape == (2,) and np.all(np.isfinite(v)) else 0.0
    if norm == 0.0:
        raise NetworkError(f"Curve '{curve_id}' has an invalid half-line direction {d!r}")
    v = v / norm
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class Junction:
    """A junction point and its incident curve ends in cyclic order."""

    id: str
    point: np.ndarray
    ends: tuple[tuple[str, str], ...]

    @classmethod
    def create(cls, id: str, point, ends: Sequence[Sequence[str]]) -> Junction:
        p = np.array(point, dtype=float)
        if p.shape != (2,) or not np.all(np.isfinite(p)):
            raise NetworkError(f"Junction '{id}' point must be a finite [x, y] pair")
        p.setflags(write=False)
        normalized = []
        for end in ends:
            if len(end) != 2 or end[1] not in END_LABELS:
                raise NetworkError(f"Junction '{id}' has invalid end {end!r}")
            normalized.append((str(end[0]), str(end[1])))
        return cls(id=id, point=p, ends=tuple(normalized))


@dataclass(frozen=True)
class Segment:
    """One straight piece of a curve: a finite segment or a half-line.

    For half-lines `a` and `b` both hold the finite anchor point.
    """

    id: str
    curve: str
    index: int
    a: np.ndarray
    b: np.ndarray
    tangent: np.ndarray
    anisotropy: str
    halfline: str | None = None

    @property
    def normal(self) -> np.ndarray:
        return rot_ccw(self.tangent)

    @property
    def length(self) -> float:
        if self.halfline is not None:
            return math.inf
        return float(np.linalg.norm(self.b - self.a))

    @property
    def is_halfline(self) -> bool:
        return self.halfline is not None


@dataclass(frozen=True)
class JunctionLeg:
    """A curve end at a junction, seen from the junction.

    sign is +1 when the curve ends at the junction and -1 when it starts
    there; `away` is the unit tangent pointing away from the junction.
    """

    curve: str
    end: str
    sign: int
    segment: Segment
    away: np.ndarray


@dataclass(frozen=True, eq=False)
class Network:
    anisotropies: Mapping[str, Anisotropy]
    curves: tuple[Curve, ...]
    junctions: tuple[Junction, ...] = ()
    _curve_index: dict = field(default=None, repr=False)
    _junction_index: dict = field(default=None, repr=False)
    _end_index: dict = field(default=None, repr=False)

    @classmethod
    def create(
        cls,
        anisotropies: Mapping[str, Anisotropy],
        curves: Sequence[Curve],
        junctions: Sequence[Junction] = (),
        snap_tolerance: float = SNAP_TOLERANCE,
    ) -> Network:
        """Build a network, checking references and snapping ends to junctions."""
        if len(curves) > MAX_CURVES:
            raise NetworkError(f"Network exceeds {MAX_CURVES} curves")
        curve_index: dict[str, Curve] = {}
        for c in curves:
            if c.id in curve_index:
                raise NetworkError(f"Duplicate curve id '{c.id}'")
            if c.anisotropy not in anisotropies:
                raise NetworkError(f"Curve '{c.id}' references unknown anisotropy '{c.anisotropy}'")
            curve_index[c.id] = c

        junction_index: dict[str, Junction] = {}
        end_index: dict[tuple[str, str], str] = {}
        snapped: dict[str, np.ndarray] = {cid: np.array(c.points) for cid, c in curve_index.items()}
        for j in junctions:
            if j.id in junction_index:
                raise NetworkError(f"Duplicate junction id '{j.id}'")
            junction_index[j.id] = j
            for end in j.ends:
                cid, label = end
                if cid not in curve_index:
                    raise NetworkError(f"Junction '{j.id}' references unknown curve '{cid}'")
                if curve_index[cid].closed:
                    raise NetworkError(f"Junction '{j.id}' references closed curve '{cid}'")
                if end in end_index:
                    raise NetworkError(
                        f"Curve end {cid}:{label} is attached to both '{end_index[end]}' and '{j.id}'"
                    )
                end_index[end] = j.id
                k = 0 if label == "start" else -1
                gap = float(np.linalg.norm(snapped[cid][k] - j.point))
                if gap > snap_tolerance * max(1.0, float(np.linalg.norm(j.point))):
                    raise NetworkError(
                        f"Curve end {cid}:{label} is {gap:.3g} away from junction '{j.id}'"
                    )
                snapped[cid][k] = j.point

        final_curves = []
        for c in curves:
            pts = snapped[c.id]
            pts.setflags(write=False)
            final_curves.append(Curve(
                id=c.id, anisotropy=c.anisotropy, points=pts, kind=c.kind, closed=c.closed,
                start_halfline=c.start_halfline, end_halfline=c.end_halfline, phases=c.phases,
            ))
        curve_index = {c.id: c for c in final_curves}
        return cls(
            anisotropies=dict(anisotropies),
            curves=tuple(final_curves),
            junctions=tuple(junctions),
            _curve_index=curve_index,
            _junction_index=junction_index,
            _end_index=end_index,
        )

    # -- lookups -------------------------------------------------------------

    def curve(self, curve_id: str) -> Curve:
        try:
            return self._curve_index[curve_id]
        except KeyError:
            raise NetworkError(f"Unknown curve '{curve_id}'") from None

    def junction(self, junction_id: str) -> Junction:
        try:
            return self._junction_index[junction_id]
        except KeyError:
            raise NetworkError(f"Unknown junction '{junction_id}'") from None

    def junction_at(self, curve_id: str, end: str) -> str | None:
        return self._end_index.get((curve_id, end))

    def aniso(self, curve_id: str) -> Anisotropy:
        return self.anisotropies[self.curve(curve_id).anisotropy]

    @property
    def bounded(self) -> bool:
        return all(c.start_halfline is None and c.end_halfline is None for c in self.curves)

    @property
    def vertices(self) -> np.ndarray:
        if not self.curves:
            return np.zeros((0, 2))
        return np.concatenate([c.points for c in self.curves])

    @property
    def diameter(self) -> float:
        v = self.vertices
        if len(v) < 2:
            return 0.0
        lo, hi = v.min(axis=0), v.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def with_curves(self, curves: Sequence[Curve], junction_points: Mapping[str, np.ndarray] | None = None) -> Network:
        """Same topology and anisotropies, new geometry."""
        junctions = self.junctions
        if junction_points is not None:
            junctions = tuple(
                Junction.create(j.id, junction_points[j.id], j.ends) for j in self.junctions
            )
        return Network.create(self.anisotropies, curves, junctions)

    # -- segments ------------------------------------------------------------

    def curve_segments(self, curve_id: str) -> list[Segment]:
        c = self.curve(curve_id)
        pts = c.points
        out: list[Segment] = []
        if c.start_halfline is not None:
            out.append(Segment(
                id=f"{c.id}:start", curve=c.id, index=-1, a=pts[0], b=pts[0],
                tangent=-c.start_halfline, anisotropy=c.anisotropy, halfline="start",
            ))
        n = len(pts)
        for k in range(c.n_segments):
            a, b = pts[k], pts[(k + 1) % n]
            d = b - a
            length = float(np.linalg.norm(d))
            if length == 0.0:
                raise NetworkError(f"Segment '{c.id}:{k}' has zero length")
            out.append(Segment(
                id=f"{c.id}:{k}", curve=c.id, index=k, a=a, b=b,
                tangent=d / length, anisotropy=c.anisotropy,
            ))
        if c.end_halfline is not None:
            out.append(Segment(
                id=f"{c.id}:end", curve=c.id, index=c.n_segments, a=pts[-1], b=pts[-1],
                tangent=c.end_halfline, anisotropy=c.anisotropy, halfline="end",
            ))
        return out

    def segments(self) -> list[Segment]:
        return [s for c in self.curves for s in self.curve_segments(c.id)]

    def finite_segments(self) -> list[Segment]:
        return [s for s in self.segments() if not s.is_halfline]

    def end_segment(self, curve_id: str, end: str) -> Segment:
        """The finite segment touching the given curve end."""
        c = self.curve(curve_id)
        k = 0 if end == "start" else c.n_segments - 1
        pts = c.points
        a, b = pts[k], pts[k + 1]
        d = b - a
        length = float(np.linalg.norm(d))
        if length == 0.0:
            raise NetworkError(f"Segment '{c.id}:{k}' has zero length")
        return Segment(id=f"{c.id}:{k}", curve=c.id, index=k, a=a, b=b,
                       tangent=d / length, anisotropy=c.anisotropy)

    def legs(self, junction_id: str) -> list[JunctionLeg]:
        out = []
        for cid, end in self.junction(junction_id).ends:
            seg = self.end_segment(cid, end)
            sign = -1 if end == "start" else 1
            out.append(JunctionLeg(curve=cid, end=end, sign=sign, segment=seg, away=-sign * seg.tangent))
        return out


# =============================================================================
# Geometry helpers
# =============================================================================

def translate(net: Network, v) -> Network:
    v = np.asarray(v, dtype=float)
    curves = [
        Curve.create(c.id, c.anisotropy, c.points + v, c.kind, c.closed,
                     c.start_halfline, c.end_halfline, c.phases)
        for c in net.curves
    ]
    return net.with_curves(curves, {j.id: j.point + v for j in net.junctions})


def reflect(net: Network) -> Network:
    """Point reflection x -> -x."""
    curves = [
        Curve.create(
            c.id, c.anisotropy, -c.points, c.kind, c.closed,
            None if c.start_halfline is None else -c.start_halfline,
            None if c.end_halfline is None else -c.end_halfline,
            c.phases,
        )
        for c in net.curves
    ]
    return net.with_curves(curves, {j.id: -j.point for j in net.junctions})


def junction_order(net: Network, junction_id: str) -> tuple[tuple[str, str], ...]:
    """Incident ends sorted counterclockwise by the direction they leave the junction,
    starting from the end listed first in the junction table."""
    legs = net.legs(junction_id)
    angles = [math.atan2(leg.away[1], leg.away[0]) for leg in legs]
    base = angles[0]
    order = sorted(range(len(legs)), key=lambda i: (angles[i] - base) % (2.0 * math.pi))
    return tuple((legs[i].curve, legs[i].end) for i in order)


def junction_coefficients(net: Network, junction_id: str) -> np.ndarray:
    """c_i with sum c_i h_i^away = 0 iff the shifted carrier lines stay concurrent.

    c_1 = u_2 x u_3 (cyclically) for the away tangents u_i; h^away is h for a
    curve starting at the junction and -h for one ending there.
    """
    legs = net.legs(junction_id)
    if len(legs) != 3:
        raise NetworkError(f"Junction '{junction_id}' is not a triple junction")
    u = [leg.away for leg in legs]
    return np.array([float(cross(u[(i + 1) % 3], u[(i + 2) % 3])) for i in range(3)])


def turning_angle(t1: np.ndarray, t2: np.ndarray) -> float:
    """Counterclockwise angle from direction t1 to direction t2, in (-pi, pi]."""
    return math.atan2(float(cross(t1, t2)), float(np.dot(t1, t2)))


def length_change_at_end(h_other: float, h_seg: float, turn: float) -> float:
    """Tangential displacement of a segment end when its carrier and a neighbour's move.

    The end is the intersection of the segment's carrier (shifted by h_seg along
    its normal) with a neighbouring carrier (shifted by h_other); `turn` is the
    counterclockwise angle from the neighbour's tangent to the segment's. The
    result is the displacement of the end along the segment's tangent.
    """
    return h_other / math.sin(turn) - h_seg / math.tan(turn)


def default_window(net: Network) -> tuple[np.ndarray, float]:
    """Centroid of the finite vertices and radius WINDOW_SCALE * diameter + 1."""
    v = net.vertices
    center = v.mean(axis=0) if len(v) else np.zeros(2)
    return center, WINDOW_SCALE * net.diameter + 1.0


def clipped_length(a: np.ndarray, d: np.ndarray, s_max: float, center: np.ndarray, radius: float) -> float:
    """Length of {a + s d : 0 <= s <= s_max} inside the disc."""
    aa = float(d @ d)
    if aa == 0.0:
        return 0.0
    w = a - center
    b = float(w @ d)
    c = float(w @ w) - radius * radius
    disc = b * b - aa * c
    if disc <= 0.0:
        return 0.0
    root = math.sqrt(disc)
    lo = max(0.0, (-b - root) / aa)
    hi = min(s_max, (-b + root) / aa)
    return max(0.0, hi - lo) * math.sqrt(aa)


def phi_length(
    net: Network,
    phi: Mapping[str, Anisotropy] | None = None,
    window: tuple[np.ndarray, float] | None = None,
) -> float:
    """Anisotropic length sum phi°(nu) |S|.

    Polyline segments are exact per segment; sampled curves use trapezoidal
    quadrature of phi°(rot(sigma')) over the node index. Networks with
    half-lines need a window (center, radius) and every straight piece is
    clipped to it; sampled curves are bounded and counted whole.
    """
    phi = net.anisotropies if phi is None else phi
    if not net.bounded and window is None:
        raise NetworkError("Network has half-lines; phi_length needs a window")
    center = radius = None
    if window is not None:
        center, radius = np.asarray(window[0], dtype=float), float(window[1])
    total = 0.0
    for c in net.curves:
        aniso = phi[c.anisotropy]
        if c.kind == "sampled" and window is None:
            pts = c.points
            if c.closed:
                deriv = 0.5 * (np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0))
                total += float(np.sum(aniso.dual(rot_ccw(deriv))))
            else:
                total += float(trapezoid(aniso.dual(rot_ccw(np.gradient(pts, axis=0)))))
            continue
        for seg in net.curve_segments(c.id):
            weight = float(aniso.dual(seg.normal))
            if seg.is_halfline:
                total += weight * clipped_length(seg.a, -seg.tangent if seg.halfline == "start" else seg.tangent,
                                                  math.inf, center, radius)
            elif window is None:
                total += weight * seg.length
            else:
                total += weight * clipped_length(seg.a, seg.b - seg.a, 1.0, center, radius)
    return total


def signed_lengths(ref: Network, net: Network) -> dict[str, float]:
    """(b - a) . tau_ref for every finite segment of a network parallel to ref."""
    out = {}
    for c in ref.curves:
        pts = net.curve(c.id).points
        ref_pts = c.points
        n = len(ref_pts)
        for k in range(c.n_segments):
            d_ref = ref_pts[(k + 1) % n] - ref_pts[k]
            tau = d_ref / np.linalg.norm(d_ref)
            out[f"{c.id}:{k}"] = float((pts[(k + 1) % n] - pts[k]) @ tau)
    return out


# =============================================================================
# Validation
# =============================================================================

@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def to_dict(self) -> dict:
        return {"code": self.code, "subject": self.subject, "message": self.message}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def add(self, code: str, subject: str, message: str) -> None:
        self.violations.append(Violation(code, subject, message))

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def to_dict(self) -> dict:
        return {"valid": self.valid, "violations": [v.to_dict() for v in self.violations]}


def _curve_geometry(c: Curve, ray: float):
    pts = c.points
    if c.closed:
        return LinearRing(pts)
    coords = list(map(tuple, pts))
    if c.start_halfline is not None:
        coords.insert(0, tuple(pts[0] + ray * c.start_halfline))
    if c.end_halfline is not None:
        coords.append(tuple(pts[-1] + ray * c.end_halfline))
    return LineString(coords)


def validate(net: Network) -> ValidationReport:
    """Report every admissibility violation of the network. Never raises."""
    report = ValidationReport()
    if not net.curves:
        return report

    for c in net.curves:
        d = np.diff(np.vstack([c.points, c.points[:1]]) if c.closed else c.points, axis=0)
        lengths = np.linalg.norm(d, axis=1)
        for k in np.nonzero(lengths <= SNAP_TOLERANCE * max(1.0, net.diameter))[0]:
            report.add(DEGENERATE_SEGMENT, f"{c.id}:{int(k)}", f"Segment '{c.id}:{int(k)}' has zero length")

    for j in net.junctions:
        if len(j.ends) != 3:
            report.add(NON_TRIPLE_JUNCTION, j.id,
                       f"Junction '{j.id}' has {len(j.ends)} incident ends; only triple junctions are admitted")
        for cid, end in j.ends:
            if net.curve(cid).halfline(end) is not None:
                report.add(HALFLINE_AT_JUNCTION, j.id,
                           f"Curve end {cid}:{end} carries a half-line and ends at junction '{j.id}'")
        curves_here = [cid for cid, _ in j.ends]
        for cid in set(curves_here):
            if curves_here.count(cid) == 2:
                others = [net.curve(o) for o in curves_here if o != cid]
                if any(o.start_halfline is not None or o.end_halfline is not None for o in others):
                    report.add(SPOON, j.id,
                               f"Junction '{j.id}' joins the closed loop '{cid}' to a half-line")

    # connectivity
    parent = {c.id: c.id for c in net.curves}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for j in net.junctions:
        ids = [cid for cid, _ in j.ends]
        for other in ids[1:]:
            parent[find(other)] = find(ids[0])
    roots = {find(c.id) for c in net.curves}
    if len(roots) > 1:
        report.add(DISCONNECTED, "network", f"Network has {len(roots)} connected components")

    # embeddedness
    ray = WINDOW_SCALE * (net.diameter + 1.0)
    geoms = {}
    for c in net.curves:
        try:
            g = _curve_geometry(c, ray)
        except ValueError as exc:
            report.add(SELF_INTERSECTION, c.id, f"Curve '{c.id}' is degenerate: {exc}")
            continue
        geoms[c.id] = g
        if not g.is_simple:
            report.add(SELF_INTERSECTION, c.id, f"Curve '{c.id}' intersects itself")

    tol = 10.0 * SNAP_TOLERANCE * max(1.0, net.diameter)
    ids = list(geoms)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            inter = geoms[a].intersection(geoms[b])
            if inter.is_empty:
                continue
            shared = [
                j.point for j in net.junctions
                if any(cid == a for cid, _ in j.ends) and any(cid == b for cid, _ in j.ends)
            ]
            overlap = inter.geom_type not in ("Point", "MultiPoint")
            stray = [
                p for p in shapely.get_coordinates(inter)
                if not any(np.linalg.norm(p - q) <= tol for q in shared)
            ]
            if overlap or stray:
                report.add(CROSSING, f"{a},{b}", f"Curves '{a}' and '{b}' meet away from a shared junction")
    return report


# =============================================================================
# Parallel networks
# =============================================================================

@dataclass(frozen=True)
class DistanceVector:
    vector: np.ndarray
    height: float
    source: str
    target: str


def distance_vector(S: Segment, T: Segment, tol: float = PARALLEL_TOLERANCE) -> DistanceVector:
    """H with carrier(T) = carrier(S) + H; height = H . nu_S."""
    if abs(float(cross(S.tangent, T.tangent))) > tol:
        angle = math.degrees(math.asin(min(1.0, abs(float(cross(S.tangent, T.tangent))))))
        raise NetworkError(f"Segments '{S.id}' and '{T.id}' are not parallel (angle {angle:.3g} deg)")
    nu = S.normal
    h = float((T.a - S.a) @ nu)
    return DistanceVector(vector=h * nu, height=h, source=S.id, target=T.id)


def _cyclic_equal(a: Sequence, b: Sequence) -> bool:
    if len(a) != len(b):
        return False
    if not a:
        return True
    doubled = list(b) + list(b)
    return any(doubled[i:i + len(a)] == list(a) for i in range(len(b)))


@dataclass(frozen=True)
class ParallelResult:
    parallel: bool
    correspondence: dict[str, str]
    reason: str = ""

    def __bool__(self) -> bool:
        return self.parallel


def is_parallel(A: Network, B: Network, tol: float = PARALLEL_TOLERANCE) -> ParallelResult:
    """Same combinatorics, parallel segments, colinear half-lines, same junction order."""

    def no(reason: str) -> ParallelResult:
        return ParallelResult(False, {}, reason)

    if {c.id for c in A.curves} != {c.id for c in B.curves}:
        return no("curve ids differ")
    if {j.id for j in A.junctions} != {j.id for j in B.junctions}:
        return no("junction ids differ")

    correspondence: dict[str, str] = {}
    scale = max(1.0, A.diameter, B.diameter)
    for c in A.curves:
        try:
            sa, sb = A.curve_segments(c.id), B.curve_segments(c.id)
        except NetworkError as exc:
            return no(str(exc))
        if [s.id for s in sa] != [s.id for s in sb] or c.closed != B.curve(c.id).closed:
            return no(f"curve '{c.id}' has a different segment structure")
        for s, t in zip(sa, sb):
            if abs(float(cross(s.tangent, t.tangent))) > tol or float(s.tangent @ t.tangent) <= 0.0:
                return no(f"segment '{s.id}' is not parallel")
            if s.is_halfline and abs(float((t.a - s.a) @ s.normal)) > 1e3 * tol * scale:
                return no(f"half-line '{s.id}' is not colinear")
            correspondence[s.id] = t.id

    for j in A.junctions:
        jb = B.junction(j.id)
        if not _cyclic_equal(j.ends, jb.ends):
            return no(f"junction '{j.id}' lists its ends in a different cyclic order")
        if not _cyclic_equal(junction_order(A, j.id), junction_order(B, j.id)):
            return no(f"curves meet at junction '{j.id}' in a different order")
    return ParallelResult(True, correspondence)


def segment_heights(ref: Network, net: Network) -> dict[str, float]:
    """Signed heights of every finite segment of net relative to ref."""
    result = is_parallel(ref, net)
    if not result:
        raise NetworkError(f"Networks are not parallel: {result.reason}")
    seg_b = {s.id: s for s in net.finite_segments()}
    return {s.id: distance_vector(s, seg_b[s.id]).height for s in ref.finite_segments()}


def network_distance(A: Network, B: Network) -> float:
    """max |H(S, T)| over corresponding segments."""
    result = is_parallel(A, B)
    if not result:
        raise NetworkError(f"Networks are not parallel: {result.reason}")
    seg_b = {s.id: s for s in B.segments()}
    best = 0.0
    for s in A.segments():
        best = max(best, float(np.linalg.norm(distance_vector(s, seg_b[s.id]).vector)))
    return best


# =============================================================================
# Rebuild from heights
# =============================================================================

def _intersect(pa, ta, pb, tb, fallback: np.ndarray) -> np.ndarray:
    na, nb = rot_ccw(ta), rot_ccw(tb)
    det = float(cross(ta, tb))
    ca, cb = float(na @ pa), float(nb @ pb)
    if abs(det) <= PARALLEL_TOLERANCE:
        if abs(ca - float(na @ pb)) > SNAP_TOLERANCE * max(1.0, float(np.linalg.norm(pa))):
            raise NetworkError("Degenerate intersection: parallel carrier lines no longer meet")
        return fallback + (ca - float(na @ fallback)) * na
    return np.linalg.solve(np.array([na, nb]), np.array([ca, cb]))


def rebuild_geometry(
    ref: Network, heights: Mapping[str, float], tol: float = 1e-8
) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Vertex positions of the network whose carrier lines are shifted by h nu.

    Returns (points per curve, junction points). Orientation is not checked;
    see rebuild_from_heights.
    """
    for key, value in heights.items():
        if key.endswith(":start") or key.endswith(":end"):
            if abs(value) > 0.0:
                raise NetworkError(f"Half-line '{key}' is fixed; got height {value}")

    def carrier(seg: Segment) -> tuple[np.ndarray, np.ndarray]:
        return seg.a + float(heights.get(seg.id, 0.0)) * seg.normal, seg.tangent

    scale = max(1.0, ref.diameter)
    junction_points: dict[str, np.ndarray] = {}
    for j in ref.junctions:
        legs = ref.legs(j.id)
        rows = np.array([leg.segment.normal for leg in legs])
        rhs = np.array([float(leg.segment.normal @ carrier(leg.segment)[0]) for leg in legs])
        q, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
        residual = float(np.max(np.abs(rows @ q - rhs)))
        if residual > tol * scale:
            raise NetworkError(
                f"Incompatible heights at junction '{j.id}': carrier lines miss by {residual:.3g}"
            )
        junction_points[j.id] = q

    points: dict[str, np.ndarray] = {}
    for c in ref.curves:
        segs = [s for s in ref.curve_segments(c.id) if not s.is_halfline]
        lines = [carrier(s) for s in segs]
        old = c.points
        n = len(old)
        new = np.array(old, dtype=float)
        if c.closed:
            for k in range(n):
                pa, ta = lines[k - 1]
                pb, tb = lines[k]
                new[k] = _intersect(pa, ta, pb, tb, old[k])
        else:
            for k in range(1, n - 1):
                pa, ta = lines[k - 1]
                pb, tb = lines[k]
                new[k] = _intersect(pa, ta, pb, tb, old[k])
            for end, k, line in (("start", 0, lines[0]), ("end", n - 1, lines[-1])):
                jid = ref.junction_at(c.id, end)
                direction = c.halfline(end)
                if jid is not None:
                    new[k] = junction_points[jid]
                elif direction is not None:
                    new[k] = _intersect(old[k], direction, line[0], line[1], old[k])
                else:
                    p, t = line
                    nu = rot_ccw(t)
                    new[k] = old[k] + float(nu @ (p - old[k])) * nu
        points[c.id] = new
    return points, junction_points


def rebuild_from_heights(ref: Network, heights: Mapping[str, float], tol: float = 1e-8) -> Network:
    """The parallel network whose carrier lines are those of ref shifted by h nu."""
    points, junction_points = rebuild_geometry(ref, heights, tol)
    curves = []
    for c in ref.curves:
        pts = points[c.id]
        n = len(pts)
        for k in range(c.n_segments):
            d_ref = c.points[(k + 1) % n] - c.points[k]
            if float((pts[(k + 1) % n] - pts[k]) @ d_ref) <= 0.0:
                raise NetworkError(f"Segment '{c.id}:{k}' collapsed or inverted")
        curves.append(Curve.create(c.id, c.anisotropy, pts, c.kind, c.closed,
                                   c.start_halfline, c.end_halfline, c.phases))
    return ref.with_curves(curves, junction_points)
