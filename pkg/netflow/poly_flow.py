"""
Polycrystalline curvature flow as an ODE on segment heights.

A state is a reference network plus one signed height h_S per finite
segment; the current network is the parallel network whose carrier lines are
shifted by h_S nu_S. Heights evolve by

    h_S' = -phi°(nu_S) kappa^Phi(S)

with kappa^Phi read off the minimal Cahn-Hoffman field of the current
network. Half-lines keep their carriers. At every triple junction the heights
obey the linear constraint sum_i c_i h_i^away = 0 that keeps the three
carriers concurrent (see network.junction_coefficients).

The primary integrator is classical RK4 with a fixed step; the integral form
h(t) = int_0^t rates(h(s)) ds is solved by Picard iteration as a cross-check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import cumulative_trapezoid

from netflow.anisotropy import CrystallinePolytope
from netflow.crystalline import min_field, segment_curvature, stability_margin
from netflow.errors import NetworkError, NotPhiRegularError, NumericalError, SingularityEvent
from netflow.network import (
    Network,
    default_window,
    is_parallel,
    junction_coefficients,
    phi_length,
    rebuild_from_heights,
    signed_lengths,
    validate,
)
from netflow.schema import (
    CONSTRAINT_TOLERANCE,
    EPS_LEN_FACTOR,
    EPS_STAB_FACTOR,
    EVENT_HEIGHT_RADIUS,
    EVENT_SEGMENT_COLLAPSE,
    EVENT_STABILITY_LOSS,
    PICARD_MAX_ITER,
    PICARD_TOLERANCE,
)
from netflow.trajectory import FlowEvent, Snapshot, Trajectory

logger = logging.getLogger(__name__)


# =============================================================================
# State
# =============================================================================

@dataclass(frozen=True, eq=False)
class HeightState:
    ref: Network
    t: float
    h: dict[str, float]

    @classmethod
    def initial(cls, ref: Network, t: float = 0.0) -> HeightState:
        return cls(ref, t, {s.id: 0.0 for s in ref.finite_segments()})

    @cached_property
    def segment_ids(self) -> list[str]:
        return [s.id for s in self.ref.finite_segments()]

    @cached_property
    def network(self) -> Network:
        return rebuild_from_heights(self.ref, self.h)

    def vector(self) -> np.ndarray:
        return np.array([self.h[k] for k in self.segment_ids])

    def advanced(self, t: float, values: np.ndarray) -> HeightState:
        return HeightState(self.ref, t, dict(zip(self.segment_ids, (float(v) for v in values))))


@dataclass(frozen=True)
class FlowLimits:
    """Event thresholds fixed from the initial network."""

    eps_len: float
    eps_stab: float
    height_radius: float | None = None

    @classmethod
    def from_network(cls, net: Network, margin: float, height_radius: float | None = None) -> FlowLimits:
        lengths = [s.length for s in net.finite_segments()]
        return cls(EPS_LEN_FACTOR * min(lengths, default=0.0), EPS_STAB_FACTOR * margin, height_radius)


@dataclass(eq=False)
class PolyTrajectory(Trajectory):
    picard_deviation: float | None = None

    @property
    def heights(self) -> list[dict[str, float]]:
        return [s.heights for s in self.snapshots]

    def summary(self) -> dict:
        out = super().summary()
        out["picard_deviation"] = self.picard_deviation
        return out


# =============================================================================
# Constraint and residuals
# =============================================================================

def constraint_matrix(ref: Network) -> np.ndarray:
    """Row per junction: sum_i c_i sigma_i h_i = 0 (sigma = +1 for curves starting there, -1 otherwise)."""
    ids = {s.id: k for k, s in enumerate(ref.finite_segments())}
    C = np.zeros((len(ref.junctions), len(ids)))
    for r, j in enumerate(ref.junctions):
        coeffs = junction_coefficients(ref, j.id)
        for c, leg in zip(coeffs, ref.legs(j.id)):
            C[r, ids[leg.segment.id]] += c * (1.0 if leg.end == "start" else -1.0)
    return C


def height_constraint_residual(state: HeightState) -> float:
    """max over junctions of |sum_i c_i h_i^away|."""
    if not state.ref.junctions:
        return 0.0
    return float(np.max(np.abs(constraint_matrix(state.ref) @ state.vector())))


def curvature_rates(net: Network, phi: Mapping | None = None) -> dict[str, float]:
    """dh/dt = -phi°(nu_S) kappa^Phi(S) for every finite segment."""
    phi = net.anisotropies if phi is None else phi
    f, _ = min_field(net, phi)
    rates = {}
    for s in net.finite_segments():
        aniso = phi[s.anisotropy]
        rates[s.id] = -float(aniso.dual(s.normal)) * segment_curvature(f, s.id)
    return rates


def _balance(net: Network, rates: Mapping[str, float]) -> float:
    worst = 0.0
    for j in net.junctions:
        coeffs = junction_coefficients(net, j.id)
        total = sum(
            c * (1.0 if leg.end == "start" else -1.0) * rates[leg.segment.id]
            for c, leg in zip(coeffs, net.legs(j.id))
        )
        worst = max(worst, abs(total))
    return worst


def curvature_balance_residual(state: HeightState, phi: Mapping | None = None) -> float:
    """max over junctions of |sum_i c_i sigma_i phi_i° kappa_i| on the current network."""
    return _balance(state.network, curvature_rates(state.network, phi))


def project_constraint(ref: Network, h: np.ndarray) -> np.ndarray:
    """Least-norm correction of h onto the junction constraint subspace."""
    C = constraint_matrix(ref)
    if not len(C):
        return h
    correction, *_ = np.linalg.lstsq(C, C @ h, rcond=None)
    return h - correction


# =============================================================================
# Stepping
# =============================================================================

def _rates_vector(state: HeightState, phi: Mapping | None, t_event: float) -> np.ndarray:
    try:
        net = state.network
    except NetworkError as exc:
        raise SingularityEvent(FlowEvent(EVENT_SEGMENT_COLLAPSE, t_event, _collapsed(exc), math.nan)) from exc
    try:
        rates = curvature_rates(net, phi)
    except NotPhiRegularError as exc:
        raise SingularityEvent(FlowEvent(EVENT_STABILITY_LOSS, t_event, "network", 0.0)) from exc
    return np.array([rates[k] for k in state.segment_ids])


def _collapsed(exc: Exception) -> str:
    text = str(exc)
    start = text.find("'")
    end = text.find("'", start + 1)
    return text[start + 1:end] if start >= 0 and end > start else "network"


def check_events(state: HeightState, phi: Mapping | None, limits: FlowLimits) -> float:
    """Raise a SingularityEvent if a trigger holds at the state; return the stability margin."""
    try:
        net = state.network
    except NetworkError as exc:
        raise SingularityEvent(FlowEvent(EVENT_SEGMENT_COLLAPSE, state.t, _collapsed(exc), math.nan)) from exc
    lengths = signed_lengths(state.ref, net)
    shortest = min(lengths, key=lengths.get)
    if lengths[shortest] < limits.eps_len:
        raise SingularityEvent(FlowEvent(EVENT_SEGMENT_COLLAPSE, state.t, shortest, lengths[shortest]))
    if limits.height_radius is not None:
        tallest = max(state.h, key=lambda k: abs(state.h[k]))
        if abs(state.h[tallest]) > limits.height_radius:
            raise SingularityEvent(FlowEvent(EVENT_HEIGHT_RADIUS, state.t, tallest, abs(state.h[tallest])))
    try:
        f, _ = min_field(net, phi)
    except NotPhiRegularError as exc:
        raise SingularityEvent(FlowEvent(EVENT_STABILITY_LOSS, state.t, "network", 0.0)) from exc
    report = stability_margin(net, phi, f)
    if report.margin < limits.eps_stab:
        worst = min(report.junctions.values(), key=lambda r: r.margin)
        raise SingularityEvent(FlowEvent(EVENT_STABILITY_LOSS, state.t, worst.junction, worst.margin))
    return report.margin


def poly_step(
    state: HeightState,
    dt: float,
    phi: Mapping | None = None,
    limits: FlowLimits | None = None,
) -> HeightState:
    """One classical RK4 step of the height ODE.

    Drift of the junction constraint beyond CONSTRAINT_TOLERANCE is projected
    away with a warning. Events at the new time raise SingularityEvent.
    """
    t1 = state.t + dt
    h = state.vector()
    k1 = _rates_vector(state, phi, t1)
    k2 = _rates_vector(state.advanced(state.t + dt / 2, h + dt / 2 * k1), phi, t1)
    k3 = _rates_vector(state.advanced(state.t + dt / 2, h + dt / 2 * k2), phi, t1)
    k4 = _rates_vector(state.advanced(t1, h + dt * k3), phi, t1)
    h_new = h + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if state.ref.junctions:
        drift = float(np.max(np.abs(constraint_matrix(state.ref) @ h_new)))
        if drift > CONSTRAINT_TOLERANCE:
            logger.warning("junction constraint drifted to %.3g at t=%.6g; projecting", drift, t1)
            h_new = project_constraint(state.ref, h_new)
    new = state.advanced(t1, h_new)
    if limits is not None:
        check_events(new, phi, limits)
    return new


def default_dt(net: Network) -> float:
    shortest = min(s.length for s in net.finite_segments())
    return 1e-2 * shortest * shortest


def _time_grid(T: float, dt: float) -> np.ndarray:
    n = max(0, math.ceil(T / dt - 1e-9))
    return np.array([min(k * dt, T) for k in range(n + 1)])


# =============================================================================
# Drivers
# =============================================================================

def _check_crystalline(net: Network, phi: Mapping) -> None:
    for c in net.curves:
        if not isinstance(phi[c.anisotropy], CrystallinePolytope):
            raise NetworkError(
                f"Curve '{c.id}' uses anisotropy '{c.anisotropy}', which is not crystalline; "
                "crystalline mode needs crystalline anisotropies"
            )


def run_poly_flow(
    net0: Network,
    T: float,
    config=None,
    phi: Mapping | None = None,
    writer=None,
    on_snapshot: Callable[[Snapshot], None] | None = None,
) -> PolyTrajectory:
    """Integrate the height ODE to T or the first event."""
    from netflow.config import RunConfig

    cfg = config or RunConfig(mode="crystalline", T=T)
    phi = net0.anisotropies if phi is None else phi
    _check_crystalline(net0, phi)
    report = validate(net0)
    if not report.valid:
        raise NetworkError(f"Network is not admissible: {', '.join(sorted(report.codes()))}")
    f0, _ = min_field(net0, phi, strict=cfg.strict)
    stability = stability_margin(net0, phi, f0)
    if not stability.stable:
        raise NetworkError(f"Initial network is not stable (margin {stability.margin:.3g})")
    if len(net0.junctions) > 1:
        logger.warning("network has %d junctions; uniqueness of the flow is only known for a single triod",
                       len(net0.junctions))

    limits = FlowLimits.from_network(net0, stability.margin, cfg.height_radius)
    dt = cfg.dt or default_dt(net0)
    window = None if net0.bounded else default_window(net0)
    state = HeightState.initial(net0)
    traj = PolyTrajectory(mode="crystalline")

    def record(margin: float) -> None:
        net = state.network
        rates = curvature_rates(net, phi)
        f, _ = min_field(net, phi)
        lengths = signed_lengths(net0, net)
        diag = {
            "energy": phi_length(net, phi, window),
            "constraint": height_constraint_residual(state),
            "balance": _balance(net, rates),
            "margin": margin,
            "min_length": min(lengths.values()),
            "curvatures": {s.id: segment_curvature(f, s.id) for s in net.finite_segments()},
            "parallel": bool(is_parallel(net0, net)),
        }
        snap = Snapshot(len(traj.snapshots), state.t, net, diag, heights=dict(state.h))
        traj.snapshots.append(snap)
        if writer is not None:
            writer.snapshot(snap)
        if on_snapshot is not None:
            on_snapshot(snap)

    record(stability.margin)
    grid = _time_grid(T, dt)
    steps = 0
    for k in range(1, len(grid)):
        try:
            state = poly_step(state, grid[k] - grid[k - 1], phi, None)
            state = HeightState(state.ref, float(grid[k]), state.h)
            margin = check_events(state, phi, limits)
        except SingularityEvent as exc:
            traj.events.append(exc.event)
            if writer is not None:
                writer.event(exc.event)
            logger.info("crystalline flow stopped: %s", exc)
            break
        steps += 1
        if steps % cfg.snapshot_every == 0 or k == len(grid) - 1:
            record(margin)
        logger.debug("step %d: t=%.6g dt=%.3g", steps, state.t, dt)

    traj.steps = steps
    traj.t_final = state.t
    if cfg.picard_check and steps:
        traj.picard_deviation = picard_deviation(net0, traj, dt, phi)
        logger.info("picard cross-check: max |h_rk4 - h_picard| = %.3g", traj.picard_deviation)
    logger.info("crystalline flow: %d steps to t=%.6g, %d snapshots", steps, state.t, len(traj.snapshots))
    return traj


def picard_trajectory(
    net0: Network,
    T: float,
    dt: float,
    phi: Mapping | None = None,
    max_iter: int = PICARD_MAX_ITER,
    tol: float = PICARD_TOLERANCE,
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Fixed point of h(t) = int_0^t rates(h(s)) ds on the RK4 time grid.

    Returns (times, heights of shape (len(times), n_segments), segment ids).
    """
    times = _time_grid(T, dt)
    base = HeightState.initial(net0)
    ids = base.segment_ids
    H = np.zeros((len(times), len(ids)))
    for it in range(1, max_iter + 1):
        R = np.array([
            _rates_vector(base.advanced(float(t), H[k]), phi, float(t)) for k, t in enumerate(times)
        ])
        H_new = cumulative_trapezoid(R, times, axis=0, initial=0.0) if len(times) > 1 else np.zeros_like(H)
        change = float(np.max(np.abs(H_new - H))) if H.size else 0.0
        H = H_new
        logger.debug("picard iteration %d: change %.3g", it, change)
        if change < tol:
            return times, H, ids
    raise NumericalError(f"Picard iteration did not converge in {max_iter} iterations (last change {change:.3g})")


def picard_deviation(net0: Network, traj: PolyTrajectory, dt: float, phi: Mapping | None = None) -> float:
    """max |h_RK4 - h_Picard| over the recorded snapshots in [0, t_final / 2]."""
    horizon = traj.t_final / 2.0
    times, H, ids = picard_trajectory(net0, horizon, dt, phi)
    worst = 0.0
    for snap in traj.snapshots:
        match = np.nonzero(np.abs(times - snap.t) <= 1e-12 * max(1.0, horizon))[0]
        if not len(match):
            continue
        h = np.array([snap.heights[k] for k in ids])
        worst = max(worst, float(np.max(np.abs(h - H[match[0]]))))
    return worst
