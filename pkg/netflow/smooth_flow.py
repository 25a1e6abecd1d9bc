"""
Special anisotropic curvature flow of networks with smooth elliptic anisotropies.

Nodes of every curve sit on a uniform parameter grid and move by

    u_t = beta u_xx / |u_x|^2,    beta = phi°(nu) (psi + psi'')(arg nu)

(explicit Euler). After the interior update each triple junction is placed
by a damped Newton solve that makes the discrete Phi-length stationary in the
junction position, which is the Herring condition

    sum_i s_i grad phi_i°(nu_i) = 0     (s_i = +1 if curve i ends there, -1 if it starts there)

with nu_i taken from the junction-adjacent segment. Half-line ends slide on
their fixed carrier lines, free ends stay put.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from netflow.anisotropy import SmoothAnisotropy, rot_ccw, rot_cw
from netflow.errors import NetworkError, NumericalError, SingularityEvent
from netflow.network import Curve, Junction, Network, clipped_length, default_window, validate
from netflow.schema import (
    DT_SAFETY,
    ENERGY_SLACK,
    EPS_LEN_FACTOR,
    EVENT_EDGE_COLLAPSE,
    MAX_STEP_HALVINGS,
    NEWTON_DAMPING,
    NEWTON_MAX_ITER,
    TOL_HERRING,
)
from netflow.trajectory import FlowEvent, Snapshot, Trajectory

logger = logging.getLogger(__name__)


# =============================================================================
# State
# =============================================================================

@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """Nodes u(x_k) on the grid x_k = k/(m-1) (k/m when closed)."""

    id: str
    anisotropy: str
    nodes: np.ndarray
    closed: bool = False
    kind: str = "sampled"
    start_junction: str | None = None
    end_junction: str | None = None
    start_halfline: np.ndarray | None = None
    end_halfline: np.ndarray | None = None
    phases: tuple[int, int] | None = None

    @property
    def m(self) -> int:
        return len(self.nodes)

    @property
    def grid_step(self) -> float:
        return 1.0 / self.m if self.closed else 1.0 / (self.m - 1)

    @property
    def edges(self) -> np.ndarray:
        u = self.nodes
        return np.roll(u, -1, axis=0) - u if self.closed else np.diff(u, axis=0)

    @property
    def spacing(self) -> np.ndarray:
        return np.linalg.norm(self.edges, axis=1)

    def role(self, end: str) -> str:
        if self.closed:
            return "closed"
        if (self.start_junction if end == "start" else self.end_junction) is not None:
            return "junction"
        if (self.start_halfline if end == "start" else self.end_halfline) is not None:
            return "halfline"
        return "free"

    def with_nodes(self, nodes: np.ndarray) -> DiscreteCurve:
        return replace(self, nodes=nodes)


@dataclass(frozen=True, eq=False)
class DiscreteNetwork:
    anisotropies: Mapping[str, SmoothAnisotropy]
    curves: tuple[DiscreteCurve, ...]
    junctions: tuple[Junction, ...] = ()
    t: float = 0.0
    window: tuple[np.ndarray, float] | None = None

    @classmethod
    def from_network(cls, net: Network, t: float = 0.0, window=None) -> DiscreteNetwork:
        curves = []
        for c in net.curves:
            curves.append(DiscreteCurve(
                id=c.id, anisotropy=c.anisotropy, nodes=np.array(c.points, dtype=float),
                closed=c.closed, kind=c.kind,
                start_junction=net.junction_at(c.id, "start"), end_junction=net.junction_at(c.id, "end"),
                start_halfline=c.start_halfline, end_halfline=c.end_halfline, phases=c.phases,
            ))
        return cls(net.anisotropies, tuple(curves), net.junctions, t, window)

    def curve(self, curve_id: str) -> DiscreteCurve:
        for c in self.curves:
            if c.id == curve_id:
                return c
        raise NetworkError(f"Unknown curve '{curve_id}'")

    def aniso(self, curve: DiscreteCurve) -> SmoothAnisotropy:
        return self.anisotropies[curve.anisotropy]

    def junction_point(self, junction_id: str) -> np.ndarray:
        j = next(j for j in self.junctions if j.id == junction_id)
        cid, end = j.ends[0]
        nodes = self.curve(cid).nodes
        return nodes[0] if end == "start" else nodes[-1]

    def with_curves(self, curves, t: float | None = None) -> DiscreteNetwork:
        return replace(self, curves=tuple(curves), t=self.t if t is None else t)

    def to_network(self) -> Network:
        curves = [
            Curve.create(c.id, c.anisotropy, c.nodes, c.kind, c.closed, c.start_halfline, c.end_halfline, c.phases)
            for c in self.curves
        ]
        junctions = [Junction.create(j.id, self.junction_point(j.id), j.ends) for j in self.junctions]
        return Network.create(self.anisotropies, curves, junctions)


@dataclass(frozen=True)
class FlowDiagnostics:
    time: float
    energy: float
    herring: float
    compatibility: float
    min_edge: float
    min_speed: float
    dissipation: float

    def to_dict(self) -> dict:
        return {
            "energy": self.energy, "herring": self.herring, "compatibility": self.compatibility,
            "min_edge": self.min_edge, "min_speed": self.min_speed, "dissipation": self.dissipation,
        }


@dataclass(frozen=True, eq=False)
class StepResult:
    state: DiscreteNetwork
    dt: float
    halvings: int
    energy: float


# =============================================================================
# Curvature and residuals
# =============================================================================

def _central(curve: DiscreteCurve) -> tuple[np.ndarray, np.ndarray]:
    """u_x, u_xx at the nodes the Euler step moves (all for closed curves, interior otherwise)."""
    u, h = curve.nodes, curve.grid_step
    if curve.closed:
        nxt, prv = np.roll(u, -1, axis=0), np.roll(u, 1, axis=0)
        return (nxt - prv) / (2.0 * h), (nxt - 2.0 * u + prv) / (h * h)
    return (u[2:] - u[:-2]) / (2.0 * h), (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)


def aniso_curvature(curve: DiscreteCurve, aniso: SmoothAnisotropy) -> np.ndarray:
    """kappa^phi = (psi + psi'')(arg nu) (u' x u'') / |u'|^3 at interior nodes.

    Open curves give m - 2 values (nodes 1..m-2), closed curves m.
    """
    if curve.m < 3:
        return np.zeros(0)
    ux, uxx = _central(curve)
    speed = np.linalg.norm(ux, axis=1)
    if np.any(speed == 0.0):
        raise NetworkError(f"Curve '{curve.id}' has coincident nodes")
    nu = rot_ccw(ux)
    theta = np.arctan2(nu[:, 1], nu[:, 0])
    k = (ux[:, 0] * uxx[:, 1] - ux[:, 1] * uxx[:, 0]) / speed ** 3
    return aniso.stiffness(theta) * k


def _end_segment(curve: DiscreteCurve, end: str) -> np.ndarray:
    u = curve.nodes
    return u[1] - u[0] if end == "start" else u[-1] - u[-2]


def _end_normal(curve: DiscreteCurve, end: str) -> np.ndarray:
    d = _end_segment(curve, end)
    n = float(np.linalg.norm(d))
    if n == 0.0:
        raise NetworkError(f"Curve '{curve.id}' has a zero-length segment at its {end}")
    return rot_ccw(d / n)


def _legs(state: DiscreteNetwork, junction_id: str) -> list[tuple[DiscreteCurve, str, int]]:
    j = next((j for j in state.junctions if j.id == junction_id), None)
    if j is None:
        raise NetworkError(f"Unknown junction '{junction_id}'")
    if len(j.ends) != 3:
        raise NetworkError(f"Junction '{junction_id}' is not a triple junction")
    return [(state.curve(cid), end, 1 if end == "end" else -1) for cid, end in j.ends]


def herring_residual(state: DiscreteNetwork, junction_id: str) -> float:
    """|sum_i s_i grad phi_i°(nu_i)| with one-sided normals at the junction."""
    total = np.zeros(2)
    for curve, end, sign in _legs(state, junction_id):
        total += sign * state.aniso(curve).gradient(_end_normal(curve, end))
    return float(np.linalg.norm(total))


def _end_derivatives(curve: DiscreteCurve, end: str) -> tuple[np.ndarray, np.ndarray]:
    """Three-point one-sided u_x, u_xx at a curve end, in the curve's own parametrisation."""
    if curve.m < 3:
        raise NetworkError(f"Curve '{curve.id}' needs at least 3 nodes for one-sided second differences")
    u, h = curve.nodes, curve.grid_step
    if end == "start":
        u0, u1, u2 = u[0], u[1], u[2]
        ux = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * h)
    else:
        u0, u1, u2 = u[-1], u[-2], u[-3]
        ux = (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * h)
    return ux, (u0 - 2.0 * u1 + u2) / (h * h)


def end_velocity(curve: DiscreteCurve, aniso: SmoothAnisotropy, end: str) -> np.ndarray:
    ux, uxx = _end_derivatives(curve, end)
    nu = rot_ccw(ux)
    beta = float(aniso.flow_coefficient(math.atan2(nu[1], nu[0])))
    return beta * uxx / float(ux @ ux)


def compatibility_residual(state: DiscreteNetwork, junction_id: str) -> float:
    """Largest pairwise gap between the special-flow velocities of the incident ends."""
    vs = [end_velocity(c, state.aniso(c), end) for c, end, _ in _legs(state, junction_id)]
    return max(float(np.linalg.norm(vs[i] - vs[j])) for i in range(3) for j in range(i + 1, 3))


# =============================================================================
# Energy, resampling, time step
# =============================================================================

def _curve_energy(curve: DiscreteCurve, aniso: SmoothAnisotropy) -> float:
    return float(np.sum(aniso.dual(rot_ccw(curve.edges))))


def energy(state: DiscreteNetwork) -> float:
    """Phi-length of the polylines through the nodes.

    Half-line tails are added clipped to the state's window; without a window
    only the finite part is measured.
    """
    total = 0.0
    for c in state.curves:
        aniso = state.aniso(c)
        total += _curve_energy(c, aniso)
        if state.window is None:
            continue
        center, radius = state.window
        for end in ("start", "end"):
            direction = c.start_halfline if end == "start" else c.end_halfline
            if direction is None:
                continue
            anchor = c.nodes[0] if end == "start" else c.nodes[-1]
            tangent = -direction if end == "start" else direction
            weight = float(aniso.dual(rot_ccw(tangent)))
            total += weight * clipped_length(anchor, direction, math.inf, center, radius)
    return total


def resample_arclength(curve: DiscreteCurve) -> DiscreteCurve:
    """Redistribute nodes uniformly in arclength along the current polyline.

    End nodes (node 0 of a closed curve) stay fixed. New nodes lie on the old
    polyline, so the Phi-length never increases.
    """
    u = curve.nodes
    pts = np.vstack([u, u[:1]]) if curve.closed else u
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    n = curve.m
    targets = np.linspace(0.0, s[-1], n + 1)[:-1] if curve.closed else np.linspace(0.0, s[-1], n)
    new = np.column_stack([np.interp(targets, s, pts[:, 0]), np.interp(targets, s, pts[:, 1])])
    if not curve.closed:
        new[0], new[-1] = u[0], u[-1]
    return curve.with_nodes(new)


def resample_network(state: DiscreteNetwork, tol: float = TOL_HERRING) -> DiscreteNetwork:
    """Resample every curve in arclength, then re-place the junctions.

    Resampling moves the nodes next to each junction, so the Herring condition
    is restored afterwards. Neither stage raises the Phi-length.
    """
    curves = [resample_arclength(c) if c.m > 2 else c for c in state.curves]
    nodes = {c.id: np.array(c.nodes) for c in curves}
    try:
        _solve_junctions(state, nodes, tol)
    except NumericalError as exc:
        logger.warning("junctions not re-solved after resampling at t=%.6g: %s", state.t, exc)
        return state.with_curves(curves)
    return state.with_curves([c.with_nodes(nodes[c.id]) for c in curves])


def stable_dt(state: DiscreteNetwork, safety: float = DT_SAFETY) -> float:
    """safety * min |u_{k+1} - u_k|^2 / max beta."""
    min_sq, max_beta = math.inf, 0.0
    for c in state.curves:
        d = c.edges
        if not len(d):
            continue
        min_sq = min(min_sq, float(np.min(np.sum(d * d, axis=1))))
        nu = rot_ccw(d)
        max_beta = max(max_beta, float(np.max(state.aniso(c).flow_coefficient(np.arctan2(nu[:, 1], nu[:, 0])))))
    if max_beta <= 0.0 or not math.isfinite(min_sq):
        return math.inf
    return safety * min_sq / max_beta


def _min_speed(state: DiscreteNetwork) -> float:
    return min((float(np.min(c.spacing)) / c.grid_step for c in state.curves if c.m > 1), default=math.inf)


def _min_edge(state: DiscreteNetwork) -> float:
    return min((float(np.min(c.spacing)) for c in state.curves if c.m > 1), default=math.inf)


def diagnostics(state: DiscreteNetwork, previous_energy: float | None = None, dt: float = 0.0) -> FlowDiagnostics:
    e = energy(state)
    herring = max((herring_residual(state, j.id) for j in state.junctions), default=0.0)
    compat = 0.0
    for j in state.junctions:
        try:
            compat = max(compat, compatibility_residual(state, j.id))
        except NetworkError:
            pass
    rate = (previous_energy - e) / dt if previous_energy is not None and dt > 0 else 0.0
    return FlowDiagnostics(state.t, e, herring, compat, _min_edge(state), _min_speed(state), rate)


# =============================================================================
# Junction solve
# =============================================================================

def _junction_terms(q: np.ndarray, legs) -> tuple[float, np.ndarray, np.ndarray]:
    """Energy, gradient and Hessian in q of sum_i phi_i°(rot(d_i)) over the adjacent segments."""
    E, g, H = 0.0, np.zeros(2), np.zeros((2, 2))
    for aniso, p, sign in legs:
        d = (q - p) if sign > 0 else (p - q)
        length = float(np.linalg.norm(d))
        if length == 0.0:
            raise NumericalError("Junction collapsed onto a neighbouring node")
        nu = rot_ccw(d / length)
        theta = math.atan2(nu[1], nu[0])
        E += length * float(aniso.psi(theta))
        g += sign * rot_cw(aniso.gradient(nu))
        H += float(aniso.stiffness(theta)) / length * np.outer(nu, nu)
    return E, g, H


def solve_junction(
    q0: np.ndarray,
    legs,
    tol: float = TOL_HERRING,
    damping: float = NEWTON_DAMPING,
    max_iter: int = NEWTON_MAX_ITER,
) -> np.ndarray:
    """Damped Newton for the junction position; `legs` holds (aniso, neighbour node, sign)."""
    q = np.array(q0, dtype=float)
    E, g, H = _junction_terms(q, legs)
    for it in range(max_iter):
        if np.linalg.norm(g) <= tol:
            logger.debug("junction solve converged in %d iterations (|g|=%.3g)", it, np.linalg.norm(g))
            return q
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(H, -g, rcond=None)
        if float(step @ g) >= 0.0:
            step = -g
        alpha = 1.0
        while True:
            trial = q + alpha * step
            try:
                E_trial, g_trial, H_trial = _junction_terms(trial, legs)
            except NumericalError:
                E_trial = math.inf
            if E_trial <= E + 1e-4 * alpha * float(step @ g) or (
                E_trial <= E and np.linalg.norm(g_trial) < np.linalg.norm(g)
            ):
                break
            alpha *= damping
            if alpha < 1e-12:
                if np.linalg.norm(g) <= 10.0 * tol:
                    return q
                raise NumericalError(f"Junction Newton line search failed (|g|={np.linalg.norm(g):.3g})")
        q, E, g, H = trial, E_trial, g_trial, H_trial
    if np.linalg.norm(g) <= tol:
        return q
    raise NumericalError(f"Junction Newton did not converge in {max_iter} iterations (|g|={np.linalg.norm(g):.3g})")


def _solve_junctions(state: DiscreteNetwork, nodes: dict[str, np.ndarray], tol: float) -> None:
    for j in state.junctions:
        legs, q0 = [], None
        for cid, end in j.ends:
            u = nodes[cid]
            aniso = state.anisotropies[state.curve(cid).anisotropy]
            if end == "start":
                legs.append((aniso, u[1], -1))
                q0 = u[0] if q0 is None else q0
            else:
                legs.append((aniso, u[-2], 1))
                q0 = u[-1] if q0 is None else q0
        q = solve_junction(q0, legs, tol=tol)
        for cid, end in j.ends:
            nodes[cid][0 if end == "start" else -1] = q


def equilibrate(net: Network, tol: float = TOL_HERRING) -> Network:
    """Move every junction (and only the junctions) to satisfy the Herring condition."""
    state = DiscreteNetwork.from_network(net)
    nodes = {c.id: np.array(c.nodes) for c in state.curves}
    _solve_junctions(state, nodes, tol)
    return state.with_curves([c.with_nodes(nodes[c.id]) for c in state.curves]).to_network()


# =============================================================================
# Time stepping
# =============================================================================

def interior_velocity(curve: DiscreteCurve, aniso: SmoothAnisotropy) -> np.ndarray:
    """beta u_xx / |u_x|^2 at the nodes the Euler step moves; zero at open ends."""
    v = np.zeros_like(curve.nodes)
    if curve.m < 3 and not curve.closed:
        return v
    ux, uxx = _central(curve)
    nu = rot_ccw(ux)
    beta = aniso.flow_coefficient(np.arctan2(nu[:, 1], nu[:, 0]))
    vel = (beta / np.sum(ux * ux, axis=1))[:, None] * uxx
    if curve.closed:
        return vel
    v[1:-1] = vel
    return v


def _advance(state: DiscreteNetwork, dt: float, tol: float, threads: int) -> DiscreteNetwork:
    def velocity(c: DiscreteCurve) -> np.ndarray:
        return interior_velocity(c, state.aniso(c))

    if threads > 1 and len(state.curves) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            velocities = list(pool.map(velocity, state.curves))
    else:
        velocities = [velocity(c) for c in state.curves]

    nodes: dict[str, np.ndarray] = {}
    for c, v in zip(state.curves, velocities):
        u = c.nodes + dt * v
        for end, k, nb, direction in (("start", 0, 1, c.start_halfline), ("end", -1, -2, c.end_halfline)):
            if c.role(end) == "halfline":
                slide = dt * float(v[nb] @ direction)
                u[k] = c.nodes[k] + slide * direction
        nodes[c.id] = u
    _solve_junctions(state, nodes, tol)
    return state.with_curves([c.with_nodes(nodes[c.id]) for c in state.curves], t=state.t + dt)


def flow_step(
    state: DiscreteNetwork,
    dt: float,
    tol_herring: float = TOL_HERRING,
    threads: int = 1,
    eps_len: float = 0.0,
) -> StepResult:
    """One accepted explicit step.

    A failed junction solve or an energy increase beyond ENERGY_SLACK rejects
    the attempt and halves dt, at most MAX_STEP_HALVINGS times. A node spacing
    below eps_len raises an edge-collapse SingularityEvent.
    """
    e0 = energy(state)
    for halvings in range(MAX_STEP_HALVINGS + 1):
        try:
            new = _advance(state, dt, tol_herring, threads)
        except NumericalError as exc:
            logger.warning("step rejected at t=%.6g (dt=%.3g): %s", state.t, dt, exc)
            dt *= 0.5
            continue
        e1 = energy(new)
        if e1 > e0 + ENERGY_SLACK * abs(e0):
            logger.warning("step rejected at t=%.6g (dt=%.3g): energy rose by %.3g", state.t, dt, e1 - e0)
            dt *= 0.5
            continue
        for c in new.curves:
            if c.m > 1 and float(np.min(c.spacing)) < eps_len:
                k = int(np.argmin(c.spacing))
                raise SingularityEvent(FlowEvent(EVENT_EDGE_COLLAPSE, new.t, f"{c.id}:{k}", float(c.spacing[k])))
        return StepResult(new, dt, halvings, e1)
    raise NumericalError(f"Step failed after {MAX_STEP_HALVINGS} halvings at t={state.t:.6g}")


# =============================================================================
# First variation
# =============================================================================

def _finite_energy(curves: list[tuple[np.ndarray, bool, SmoothAnisotropy]]) -> float:
    total = 0.0
    for u, closed, aniso in curves:
        d = np.roll(u, -1, axis=0) - u if closed else np.diff(u, axis=0)
        total += float(np.sum(aniso.dual(rot_ccw(d))))
    return total


def first_variation_check(
    net: Network | DiscreteNetwork,
    perturbation: Mapping[str, np.ndarray],
    eps: float = 1e-4,
) -> tuple[float, float]:
    """Finite-difference derivative of the Phi-length along a node perturbation, and the formula.

    The formula is the interior term sum_k beta_k . (rot_cw N_{k-1/2} - rot_cw N_{k+1/2})
    (the discrete -int beta . nu kappa^phi) plus the conormal terms
    beta . rot_cw N at final points and beta . rot_ccw N at initial points.
    Half-line tails are not part of the measured length.

    The formula side is the exact gradient of the discrete length (summation
    by parts), so this checks the junction and conormal bookkeeping, not the
    accuracy of aniso_curvature.
    """
    state = net if isinstance(net, DiscreteNetwork) else DiscreteNetwork.from_network(net)
    fields = {}
    for c in state.curves:
        b = np.zeros_like(c.nodes) if c.id not in perturbation else np.asarray(perturbation[c.id], dtype=float)
        if b.shape != c.nodes.shape:
            raise NetworkError(f"Perturbation of '{c.id}' has shape {b.shape}, expected {c.nodes.shape}")
        fields[c.id] = b
    scale = max(1.0, max((float(np.max(np.abs(b))) for b in fields.values()), default=1.0))
    for j in state.junctions:
        values = [fields[cid][0 if end == "start" else -1] for cid, end in j.ends]
        if any(np.linalg.norm(v - values[0]) > 1e-12 * scale for v in values[1:]):
            raise NetworkError(f"Perturbation does not agree at junction '{j.id}'")

    def length(s: float) -> float:
        return _finite_energy([(c.nodes + s * fields[c.id], c.closed, state.aniso(c)) for c in state.curves])

    def central(e: float) -> float:
        return (length(e) - length(-e)) / (2.0 * e)

    fd = (4.0 * central(eps / 2.0) - central(eps)) / 3.0

    formula = 0.0
    for c in state.curves:
        b = fields[c.id]
        d = c.edges
        n = np.linalg.norm(d, axis=1)
        N = state.aniso(c).gradient(rot_ccw(d / n[:, None]))
        conormal = rot_cw(N)
        if c.closed:
            formula += float(np.sum(b * (np.roll(conormal, 1, axis=0) - conormal)))
        else:
            formula += float(np.sum(b[1:-1] * (conormal[:-1] - conormal[1:])))
            formula += float(b[-1] @ conormal[-1]) + float(b[0] @ rot_ccw(N[0]))
    return fd, formula


# =============================================================================
# Driver
# =============================================================================

def _check_smooth(net: Network) -> None:
    for c in net.curves:
        if not isinstance(net.anisotropies[c.anisotropy], SmoothAnisotropy):
            raise NetworkError(
                f"Curve '{c.id}' uses anisotropy '{c.anisotropy}', which is not smooth; smooth mode needs smooth anisotropies"
            )


def run_flow(
    net: Network,
    T: float,
    config=None,
    writer=None,
    on_snapshot: Callable[[Snapshot], None] | None = None,
) -> Trajectory:
    """Integrate to T or the first singularity event, recording snapshots at the configured cadence."""
    from netflow.config import RunConfig

    cfg = config or RunConfig(mode="smooth", T=T)
    _check_smooth(net)
    report = validate(net)
    if not report.valid:
        raise NetworkError(f"Network is not admissible: {', '.join(sorted(report.codes()))}")

    window = None if net.bounded else default_window(net)
    state = DiscreteNetwork.from_network(net, window=window)
    for j in state.junctions:
        r = herring_residual(state, j.id)
        if r > cfg.tol_herring_initial:
            raise NetworkError(
                f"Initial data violates the Herring condition at junction '{j.id}' (residual {r:.3g} > {cfg.tol_herring_initial:.3g})"
            )
        try:
            c = compatibility_residual(state, j.id)
        except NetworkError:
            continue
        if c > 1e-6 * (1.0 + max(np.linalg.norm(end_velocity(cv, state.aniso(cv), e)) for cv, e, _ in _legs(state, j.id))):
            logger.warning("initial data fails the second-order compatibility condition at '%s' (residual %.3g)", j.id, c)

    eps_len = EPS_LEN_FACTOR * _min_edge(state)
    traj = Trajectory(mode="smooth")

    def record(diag: FlowDiagnostics) -> None:
        snap = Snapshot(len(traj.snapshots), state.t, state.to_network(), diag.to_dict())
        traj.snapshots.append(snap)
        if writer is not None:
            writer.snapshot(snap)
        if on_snapshot is not None:
            on_snapshot(snap)

    diag = diagnostics(state)
    record(diag)
    prev_energy = diag.energy
    steps, since_snapshot = 0, 0
    horizon_tol = 1e-14 * max(1.0, T)
    while T - state.t > horizon_tol:
        dt = min(stable_dt(state, cfg.dt_safety), T - state.t)
        if cfg.dt is not None:
            dt = min(dt, cfg.dt)
        try:
            result = flow_step(state, dt, cfg.tol_herring, cfg.threads, eps_len)
        except SingularityEvent as exc:
            traj.events.append(exc.event)
            if writer is not None:
                writer.event(exc.event)
            logger.info("smooth flow stopped: %s", exc)
            break
        state = result.state
        steps += 1
        resampled = bool(cfg.resample_every) and steps % cfg.resample_every == 0
        if resampled:
            state = resample_network(state, cfg.tol_herring)
        since_snapshot += 1
        done = T - state.t <= horizon_tol
        if since_snapshot >= cfg.snapshot_every or done:
            diag = diagnostics(state, prev_energy, result.dt)
            record(diag)
            since_snapshot = 0
        prev_energy = energy(state) if resampled else result.energy
        logger.debug("step %d: t=%.6g dt=%.3g energy=%.12g", steps, state.t, result.dt, result.energy)

    traj.steps = steps
    traj.t_final = state.t
    logger.info("smooth flow: %d steps to t=%.6g, %d snapshots", steps, state.t, len(traj.snapshots))
    return traj

