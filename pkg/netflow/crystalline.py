"""
Cahn-Hoffman fields and crystalline curvature of polygonal networks.

On a segment S whose normal is an edge normal of B_phi, a Cahn-Hoffman field
runs linearly along that Wulff edge; elsewhere it is a constant Wulff vertex.
Values at interior polyline vertices are forced (the two faces share one
vertex), so the only freedom sits at triple junctions: one offset per incident
end whose face is an edge, tied together by the balance condition

    sum_i s_i N_i = 0,    s_i = +1 if curve i ends at the junction, -1 if it starts there.

Balance is eliminated with a null-space basis, leaving box constraints on the
reduced variables, and the minimal field solves

    minimize  sum_S phi°(nu_S) (o_B - o_A)^2 / |S|

with the active-set solver in netflow.qp. The crystalline curvature of S is
(N(B) - N(A)) . tau_S / |S| = (o_B - o_A) / |S|.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import null_space

from netflow.anisotropy import (
    BoundaryPoint,
    CrystallinePolytope,
    check_triangle_inequality,
)
from netflow.errors import InvalidAnisotropyError, NetworkError, NotPhiRegularError, NumericalError
from netflow.network import Network, Segment
from netflow.qp import ActiveSetSolver, feasible_point

logger = logging.getLogger(__name__)

INTERIOR = "interior"
ON_REGION_BOUNDARY = "on-region-boundary"
AT_VERTEX = "at-vertex"

OCTAGON_X_RANGE = (1.0 - 1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))


# =============================================================================
# Assembly
# =============================================================================

@dataclass
class _Offset:
    """Offset of a segment endpoint along its Wulff edge, affine in the QP variables."""
    const: float
    coeffs: np.ndarray | None = None


@dataclass
class _Leg:
    curve: str
    end: str
    sign: int
    segment: str
    poly: CrystallinePolytope
    face: tuple[int, ...]
    local: int | None = None        # column in the junction's balance system


@dataclass
class _JunctionBlock:
    id: str
    legs: list[_Leg]
    particular: np.ndarray
    basis: np.ndarray               # (n_edge_legs, dof)
    lengths: np.ndarray
    start: int                      # first global variable index

    @property
    def dof(self) -> int:
        return self.basis.shape[1]

    @property
    def slice(self) -> slice:
        return slice(self.start, self.start + self.dof)


@dataclass
class _Assembly:
    net: Network
    phi: Mapping[str, CrystallinePolytope]
    faces: dict[str, tuple[int, ...]]
    ends: dict[str, tuple[_Offset | None, _Offset | None]]
    forced: dict[str, tuple[int | None, int | None]]
    blocks: list[_JunctionBlock]
    G: np.ndarray
    h: np.ndarray
    weights: np.ndarray
    rows: np.ndarray                # (n_edge_segments, n_vars)
    consts: np.ndarray
    edge_segments: list[str]

    @property
    def n_vars(self) -> int:
        return self.G.shape[1]

    def quadratic(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Q, c, const of f(t) = 1/2 t'Qt + c't + const."""
        W = self.weights
        Q = 2.0 * (self.rows.T * W) @ self.rows
        c = 2.0 * (self.rows.T * W) @ self.consts
        const = float(np.sum(W * self.consts ** 2))
        return Q, c, const

    def objective(self, t: np.ndarray) -> float:
        r = self.consts + self.rows @ t
        return float(np.sum(self.weights * r * r))


def _polytopes(net: Network, phi: Mapping | None) -> dict[str, CrystallinePolytope]:
    phi = net.anisotropies if phi is None else phi
    out = {}
    for c in net.curves:
        aniso = phi.get(c.anisotropy)
        if not isinstance(aniso, CrystallinePolytope):
            raise NetworkError(
                f"Curve '{c.id}' uses anisotropy '{c.anisotropy}', which is not crystalline; "
                "crystalline mode needs crystalline anisotropies"
            )
        if not aniso.even:
            raise InvalidAnisotropyError(f"Crystalline anisotropy '{c.anisotropy}' must be even")
        out[c.anisotropy] = aniso
    return out


def _shared_vertex(poly: CrystallinePolytope, fa: tuple[int, ...], fb: tuple[int, ...], where: str) -> int:
    common = set(fa) & set(fb)
    if not common:
        raise NotPhiRegularError(f"No Cahn-Hoffman vector exists at {where}: Wulff faces do not meet")
    if len(common) == 2:
        raise NetworkError(f"Consecutive segments at {where} are collinear; merge them")
    return common.pop()


def _vertex_offset(poly: CrystallinePolytope, face: tuple[int, ...], vertex: int) -> float:
    return 0.0 if vertex == face[0] else float(poly.edge_lengths[face[0]])


def _assemble(net: Network, phi: Mapping | None = None) -> _Assembly:
    polys = _polytopes(net, phi)
    for c in net.curves:
        if c.kind != "polyline":
            raise NetworkError(f"Curve '{c.id}' is sampled; crystalline mode needs polylines")
        if not c.closed:
            for end in ("start", "end"):
                if net.junction_at(c.id, end) is None and c.halfline(end) is None:
                    raise NetworkError(f"Curve end {c.id}:{end} is free; crystalline mode needs junctions or half-lines")
    for j in net.junctions:
        if len(j.ends) != 3:
            raise NetworkError(f"Junction '{j.id}' has {len(j.ends)} incident ends; only triple junctions are admitted")
        anisos = [polys[net.curve(cid).anisotropy] for cid, _ in j.ends]
        if len({id(a) for a in anisos}) > 1:
            check_triangle_inequality(anisos)

    faces: dict[str, tuple[int, ...]] = {}
    segs_by_curve: dict[str, list[Segment]] = {}
    for c in net.curves:
        poly = polys[c.anisotropy]
        segs = net.curve_segments(c.id)
        segs_by_curve[c.id] = segs
        for s in segs:
            faces[s.id] = poly.face(s.normal)

    # forced vertex values at polyline joints and half-lines
    forced: dict[str, list[int | None]] = {}
    for c in net.curves:
        poly = polys[c.anisotropy]
        segs = segs_by_curve[c.id]
        finite = [s for s in segs if not s.is_halfline]
        for s in finite:
            forced[s.id] = [None, None]
        n = len(finite)
        joints = list(range(n)) if c.closed else list(range(1, n))
        for k in joints:
            prev, cur = finite[k - 1], finite[k]
            v = _shared_vertex(poly, faces[prev.id], faces[cur.id], f"vertex {k} of curve '{c.id}'")
            forced[prev.id][1] = v
            forced[cur.id][0] = v
        for s in segs:
            if s.halfline == "start":
                v = _shared_vertex(poly, faces[s.id], faces[finite[0].id], f"the start half-line of '{c.id}'")
                forced[finite[0].id][0] = v
                forced[s.id] = [v, v]
            elif s.halfline == "end":
                v = _shared_vertex(poly, faces[finite[-1].id], faces[s.id], f"the end half-line of '{c.id}'")
                forced[finite[-1].id][1] = v
                forced[s.id] = [v, v]

    # junction balance, reduced by a null-space basis
    blocks: list[_JunctionBlock] = []
    start = 0
    for j in net.junctions:
        legs = []
        cols, lengths = [], []
        rhs = np.zeros(2)
        for leg in net.legs(j.id):
            poly = polys[net.curve(leg.curve).anisotropy]
            face = faces[leg.segment.id]
            entry = _Leg(leg.curve, leg.end, leg.sign, leg.segment.id, poly, face)
            if len(face) == 2:
                entry.local = len(cols)
                cols.append(leg.sign * poly.edge_direction(face[0]))
                lengths.append(float(poly.edge_lengths[face[0]]))
                rhs -= leg.sign * poly.vertices[face[0]]
            else:
                rhs -= leg.sign * poly.vertices[face[0]]
            legs.append(entry)
        A = np.array(cols).T if cols else np.zeros((2, 0))
        scale = max(p.diameter for p in {id(l.poly): l.poly for l in legs}.values())
        if A.shape[1]:
            p, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        else:
            p = np.zeros(0)
        residual = float(np.linalg.norm(A @ p - rhs))
        if residual > 1e-9 * scale:
            raise NotPhiRegularError(
                f"Junction '{j.id}' admits no balanced Cahn-Hoffman triple (residual {residual:.3g})"
            )
        D = null_space(A) if A.shape[1] else np.zeros((0, 0))
        blocks.append(_JunctionBlock(j.id, legs, p, D, np.array(lengths), start))
        start += D.shape[1]

    n_vars = start
    G_rows, h_rows = [], []
    for b in blocks:
        k = len(b.particular)
        if not k:
            continue
        D = np.zeros((k, n_vars))
        D[:, b.slice] = b.basis
        G_rows.append(D)
        h_rows.append(b.lengths - b.particular)
        G_rows.append(-D)
        h_rows.append(b.particular)
    G = np.vstack(G_rows) if G_rows else np.zeros((0, n_vars))
    h = np.concatenate(h_rows) if h_rows else np.zeros(0)

    junction_offsets: dict[tuple[str, str], _Offset] = {}
    for b in blocks:
        for leg in b.legs:
            if leg.local is None:
                continue
            coeffs = np.zeros(n_vars)
            coeffs[b.slice] = b.basis[leg.local]
            junction_offsets[(leg.curve, leg.end)] = _Offset(float(b.particular[leg.local]), coeffs)

    ends: dict[str, tuple[_Offset | None, _Offset | None]] = {}
    edge_segments, weights, rows, consts = [], [], [], []
    for c in net.curves:
        poly = polys[c.anisotropy]
        finite = [s for s in segs_by_curve[c.id] if not s.is_halfline]
        for k, s in enumerate(finite):
            face = faces[s.id]
            fa, fb = forced[s.id]
            if len(face) == 1:
                ends[s.id] = (None, None)
                continue
            pair = []
            for side, vertex, curve_end in ((0, fa, "start"), (1, fb, "end")):
                if vertex is not None:
                    pair.append(_Offset(_vertex_offset(poly, face, vertex)))
                else:
                    # only a junction end is left unforced
                    pair.append(junction_offsets.get((c.id, curve_end)))
                    if pair[-1] is None:
                        # face edge but junction leg fixed: impossible, the leg is this segment
                        raise NetworkError(f"Segment '{s.id}' has an unconstrained end")
            ends[s.id] = (pair[0], pair[1])
            a_coeff = pair[0].coeffs if pair[0].coeffs is not None else np.zeros(n_vars)
            b_coeff = pair[1].coeffs if pair[1].coeffs is not None else np.zeros(n_vars)
            edge_segments.append(s.id)
            weights.append(float(poly.dual(s.normal)) / s.length)
            rows.append(b_coeff - a_coeff)
            consts.append(pair[1].const - pair[0].const)

    return _Assembly(
        net=net, phi=polys, faces=faces, ends=ends,
        forced={k: (v[0], v[1]) for k, v in forced.items()},
        blocks=blocks, G=G, h=h,
        weights=np.array(weights), rows=np.array(rows).reshape(-1, n_vars),
        consts=np.array(consts), edge_segments=edge_segments,
    )


# =============================================================================
# Fields
# =============================================================================

@dataclass(frozen=True, eq=False)
class CahnHoffmanField:
    """Boundary-point values of a Cahn-Hoffman field at both ends of every segment.

    Half-lines carry a constant value (both entries equal). `junction_offsets`
    lists, per junction, the Wulff-edge offset of every incident end.
    """

    network: Network
    endpoints: dict[str, tuple[BoundaryPoint, BoundaryPoint]]
    vectors: dict[str, tuple[np.ndarray, np.ndarray]]
    junction_offsets: dict[str, dict[str, BoundaryPoint]]
    variables: np.ndarray
    objective: float
    unique: bool = True
    _assembly: _Assembly = field(default=None, repr=False)

    def value(self, segment_id: str, end: str = "start") -> np.ndarray:
        return self.vectors[segment_id][0 if end == "start" else 1]


def _field_from(asm: _Assembly, t: np.ndarray, unique: bool = True) -> CahnHoffmanField:
    net = asm.net
    endpoints, vectors = {}, {}
    for c in net.curves:
        poly = asm.phi[c.anisotropy]
        for s in net.curve_segments(c.id):
            face = asm.faces[s.id]
            if s.is_halfline or len(face) == 1:
                v = asm.forced[s.id][0] if s.is_halfline else face[0]
                bp = BoundaryPoint(edge=int(v), offset=0.0)
                endpoints[s.id] = (bp, bp)
                vec = poly.vertices[v]
                vectors[s.id] = (vec, vec)
                continue
            pts = []
            for off in asm.ends[s.id]:
                value = off.const + (off.coeffs @ t if off.coeffs is not None else 0.0)
                value = min(max(float(value), 0.0), float(poly.edge_lengths[face[0]]))
                pts.append(BoundaryPoint(edge=face[0], offset=value))
            endpoints[s.id] = (pts[0], pts[1])
            vectors[s.id] = (poly.point(pts[0]), poly.point(pts[1]))

    junction_offsets: dict[str, dict[str, BoundaryPoint]] = {}
    for b in asm.blocks:
        entry = {}
        for leg in b.legs:
            idx = 0 if leg.end == "start" else 1
            entry[f"{leg.curve}:{leg.end}"] = endpoints[leg.segment][idx]
        junction_offsets[b.id] = entry
    return CahnHoffmanField(
        network=net, endpoints=endpoints, vectors=vectors, junction_offsets=junction_offsets,
        variables=np.asarray(t, dtype=float), objective=asm.objective(t), unique=unique,
        _assembly=asm,
    )


def phi_regular(net: Network, phi: Mapping | None = None) -> tuple[bool, CahnHoffmanField | None]:
    """Whether the network admits a Cahn-Hoffman field, with a witness when it does."""
    try:
        asm = _assemble(net, phi)
    except NotPhiRegularError as exc:
        logger.info("network is not Phi-regular: %s", exc)
        return False, None
    t0 = feasible_point(asm.G, asm.h)
    if t0 is None:
        logger.info("network is not Phi-regular: junction offsets leave their Wulff edges")
        return False, None
    return True, _field_from(asm, t0)


def min_field(
    net: Network, phi: Mapping | None = None, strict: bool = False
) -> tuple[CahnHoffmanField, float]:
    """The Cahn-Hoffman field minimising sum phi°(nu) (div N)^2 |S|, and that minimum."""
    asm = _assemble(net, phi)
    t0 = feasible_point(asm.G, asm.h)
    if t0 is None:
        raise NotPhiRegularError("Junction offsets cannot all stay on their Wulff edges")
    Q, c, const = asm.quadratic()
    result = ActiveSetSolver().solve(Q, c, asm.G, asm.h, t0)
    logger.debug("min_field: %d variables, %d iterations, active %s", asm.n_vars, result.iterations, result.active)
    if not result.unique:
        message = "Minimal Cahn-Hoffman field is not unique (flat direction in the reduced problem)"
        if strict:
            raise NumericalError(message)
        logger.warning(message)
    f = _field_from(asm, result.x, unique=result.unique)
    return f, f.objective


def segment_curvature(f: CahnHoffmanField, segment_id: str) -> float:
    """(N(B) - N(A)) . tau_S / |S|; zero on half-lines."""
    if segment_id.endswith(":start") or segment_id.endswith(":end"):
        return 0.0
    curve_id, _, index = segment_id.rpartition(":")
    seg = next((s for s in f.network.curve_segments(curve_id) if s.id == segment_id), None)
    if seg is None:
        raise NetworkError(f"Unknown segment '{segment_id}'")
    length = seg.length
    if length == 0.0:
        raise NetworkError(f"Segment '{segment_id}' has zero length")
    na, nb = f.vectors[segment_id]
    return float((nb - na) @ seg.tangent) / length


def curvatures(f: CahnHoffmanField) -> dict[str, float]:
    return {s.id: segment_curvature(f, s.id) for s in f.network.segments()}


# =============================================================================
# Stability
# =============================================================================

@dataclass(frozen=True)
class JunctionStability:
    junction: str
    margin: float
    flag: str
    dof: int


@dataclass(frozen=True)
class StabilityReport:
    margin: float
    junctions: dict[str, JunctionStability]
    stable: bool

    def to_dict(self) -> dict:
        return {
            "margin": self.margin,
            "stable": self.stable,
            "junctions": {
                k: {"margin": v.margin, "flag": v.flag, "dof": v.dof} for k, v in self.junctions.items()
            },
        }


def stability_margin(net: Network, phi: Mapping | None, f: CahnHoffmanField) -> StabilityReport:
    """Distance along the Wulff boundaries from N_min to the edge of the admissible region.

    A junction with a leg forced to a Wulff vertex has margin 0. With one
    degree of freedom the distance is measured along the segment of balanced
    triples; with more, as the smallest distance of a leg to its own vertices.
    """
    asm = f._assembly if f._assembly is not None and f.network is net else _assemble(net, phi)
    t = f.variables
    report: dict[str, JunctionStability] = {}
    for b in asm.blocks:
        scale = max(leg.poly.diameter for leg in b.legs)
        tol = 1e-12 * scale
        if any(len(leg.face) == 1 for leg in b.legs):
            report[b.id] = JunctionStability(b.id, 0.0, AT_VERTEX, b.dof)
            continue
        local_t = t[b.slice]
        offsets = b.particular + b.basis @ local_t
        if b.dof == 0:
            margin = 0.0
        elif b.dof == 1:
            d = b.basis[:, 0]
            lo, hi = -math.inf, math.inf
            for k in range(len(d)):
                if abs(d[k]) <= 1e-14:
                    continue
                bounds = sorted(((0.0 - b.particular[k]) / d[k], (b.lengths[k] - b.particular[k]) / d[k]))
                lo, hi = max(lo, bounds[0]), min(hi, bounds[1])
            room = min(local_t[0] - lo, hi - local_t[0])
            candidates = [abs(d[k]) * room for k in range(len(d)) if abs(d[k]) > 1e-14]
            candidates += [min(offsets[k], b.lengths[k] - offsets[k]) for k in range(len(d)) if abs(d[k]) <= 1e-14]
            margin = max(0.0, min(candidates))
        else:
            margin = max(0.0, float(np.min(np.minimum(offsets, b.lengths - offsets))))
        flag = INTERIOR if margin > tol else ON_REGION_BOUNDARY
        report[b.id] = JunctionStability(b.id, float(margin) if margin > tol else 0.0, flag, b.dof)
    total = min((r.margin for r in report.values()), default=math.inf)
    return StabilityReport(margin=total, junctions=report, stable=total > 0.0)


def curvature_report(net: Network, phi: Mapping | None = None, strict: bool = False) -> dict:
    """Per-segment curvatures, junction offsets and the stability report, as plain data."""
    f, objective = min_field(net, phi, strict=strict)
    stability = stability_margin(net, phi, f)
    return {
        "objective": objective,
        "unique": f.unique,
        "segments": curvatures(f),
        "junctions": {
            jid: {key: {"edge": bp.edge, "offset": bp.offset} for key, bp in legs.items()}
            for jid, legs in f.junction_offsets.items()
        },
        "stability": stability.to_dict(),
    }


# =============================================================================
# Oracles and closed forms
# =============================================================================

def brute_force_objective(
    net: Network, phi: Mapping | None = None, resolution: int = 2000
) -> tuple[float, np.ndarray]:
    """Grid search of the reduced problem, refined once around the best cell.

    Only for networks with at most two reduced variables.
    """
    asm = _assemble(net, phi)
    n = asm.n_vars
    if n > 2:
        raise ValueError(f"brute_force_objective handles at most 2 variables, got {n}")
    if n == 0:
        return asm.objective(np.zeros(0)), np.zeros(0)

    ranges = []
    for i in range(n):
        lo, hi = -math.inf, math.inf
        # each block is 1-D, so row bounds separate per variable
        for row, hv in zip(asm.G, asm.h):
            if np.count_nonzero(np.abs(row) > 1e-14) == 1 and abs(row[i]) > 1e-14:
                bound = hv / row[i]
                if row[i] > 0:
                    hi = min(hi, bound)
                else:
                    lo = max(lo, bound)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("brute_force_objective needs one variable per junction")
        ranges.append((lo, hi))

    def search(ranges: list[tuple[float, float]]) -> tuple[float, np.ndarray]:
        grids = [np.linspace(lo, hi, resolution + 1) for lo, hi in ranges]
        best, arg = math.inf, None
        if n == 1:
            T = grids[0][None, :]
            r = asm.consts[:, None] + asm.rows @ T
            vals = np.sum(asm.weights[:, None] * r * r, axis=0)
            k = int(np.argmin(vals))
            return float(vals[k]), T[:, k]
        for t1 in grids[0]:
            T = np.vstack([np.full_like(grids[1], t1), grids[1]])
            feasible = np.all(asm.G @ T <= asm.h[:, None] + 1e-12, axis=0)
            r = asm.consts[:, None] + asm.rows @ T
            vals = np.where(feasible, np.sum(asm.weights[:, None] * r * r, axis=0), math.inf)
            k = int(np.argmin(vals))
            if vals[k] < best:
                best, arg = float(vals[k]), T[:, k].copy()
        return best, arg

    best, arg = search(ranges)
    cells = [(hi - lo) / resolution for lo, hi in ranges]
    local = [(max(lo, a - 2 * w), min(hi, a + 2 * w)) for (lo, hi), a, w in zip(ranges, arg, cells)]
    fine, fine_arg = search(local)
    if fine < best:
        best, arg = fine, fine_arg
    return best, arg


@dataclass(frozen=True)
class TriodClosedForm:
    alpha: float
    beta: float
    gamma: float
    x_min: float
    stable: bool


def closed_form_triod(lengths: Sequence[float]) -> TriodClosedForm:
    """The octagon triod reduced to minimising alpha x^2 + beta x + gamma on [1 - 1/sqrt2, 1/sqrt2]."""
    if len(lengths) != 3:
        raise ValueError(f"closed_form_triod needs 3 lengths, got {len(lengths)}")
    L1, L2, L3 = (float(v) for v in lengths)
    if min(L1, L2, L3) <= 0:
        raise NetworkError(f"Segment lengths must be positive, got {tuple(lengths)}")
    r2 = math.sqrt(2.0)
    alpha = 1.0 / L1 + 1.0 / (2.0 * L2) + 1.0 / (2.0 * L3)
    beta = 1.0 / (r2 * L3) - (r2 + 1.0) / (r2 * L2)
    gamma = (3.0 + 2.0 * r2) / (4.0 * L2) + 1.0 / (4.0 * L3)
    lo, hi = OCTAGON_X_RANGE
    x_min = min(max(-beta / (2.0 * alpha), lo), hi)
    stable = (r2 - 1.0) / L1 + 1.0 / (r2 * L3) < 1.0 / L2 < r2 / L1 + r2 / L3
    return TriodClosedForm(alpha=alpha, beta=beta, gamma=gamma, x_min=x_min, stable=stable)


@dataclass(frozen=True)
class ThetaClosedForm:
    coefficients: dict[str, float]
    x1: float
    x2: float


def closed_form_theta(outer: Sequence[float], middle: float) -> ThetaClosedForm:
    """The hexagon theta network reduced to a quadratic in (x1, x2).

    `outer` lists the lengths S11..S15 then S31..S35; `middle` is S21. The
    constant alpha_0 sums all ten outer reciprocals, so it exceeds the true
    constant term by 1/S15 + 1/S31. The minimiser does not depend on it.
    """
    if len(outer) != 10:
        raise ValueError(f"closed_form_theta needs 10 outer lengths, got {len(outer)}")
    L = [float(v) for v in outer]
    m = float(middle)
    if min(L) <= 0 or m <= 0:
        raise NetworkError("Segment lengths must be positive")
    S11, S15, S31, S35 = L[0], L[4], L[5], L[9]
    a11 = 1.0 / S11 + 1.0 / m + 1.0 / S31
    a22 = 1.0 / S15 + 1.0 / m + 1.0 / S35
    a12 = -1.0 / m
    a1 = -1.0 / S11
    a2 = -1.0 / S35
    a0 = sum(1.0 / v for v in L)
    det = a11 * a22 - a12 * a12
    x1 = (a12 * a2 - a22 * a1) / det
    x2 = (a12 * a1 - a11 * a2) / det
    if not (0.0 < x1 < 1.0 and 0.0 < x2 < 1.0):
        raise NumericalError(f"Theta minimiser ({x1:.6g}, {x2:.6g}) left the open unit square")
    coefficients = {"alpha11": a11, "alpha22": a22, "alpha12": a12, "alpha1": a1, "alpha2": a2, "alpha0": a0}
    return ThetaClosedForm(coefficients=coefficients, x1=x1, x2=x2)
