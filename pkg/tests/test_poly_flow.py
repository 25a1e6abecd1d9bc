"""
Crystalline Flow Tests - height ODE, junction constraint, events, Picard cross-check.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from netflow.builders import hexagon_theta, octagon_triod, square_curve
from netflow.config import RunConfig
from netflow.errors import NetworkError
from netflow.poly_flow import (
    FlowLimits,
    HeightState,
    constraint_matrix,
    curvature_balance_residual,
    curvature_rates,
    height_constraint_residual,
    picard_trajectory,
    poly_step,
    run_poly_flow,
)
from netflow.trajectory import TrajectoryWriter, read_trajectory


VECTORS_PATH = Path(__file__).parent / "conformance" / "vectors.json"


@pytest.fixture(scope="module")
def vectors():
    with open(VECTORS_PATH, encoding="utf-8") as f:
        return json.load(f)


def _run(net, T, dt, **kw):
    cfg = RunConfig(mode="crystalline", T=T, dt=dt, **kw)
    return run_poly_flow(net, T, cfg)


def _square_height(L0, t):
    return (L0 - math.sqrt(L0 * L0 - 8.0 * t)) / 2.0


# =============================================================================
# Rates and residuals
# =============================================================================

class TestRates:

    def test_square_rates(self):
        rates = curvature_rates(square_curve(1.0))
        for seg_id, rate in rates.items():
            assert rate == pytest.approx(2.0), seg_id

    def test_halflines_excluded(self):
        rates = curvature_rates(octagon_triod(1.0, 0.55, 1.0))
        assert set(rates) == {"c1:0", "c2:0", "c3:0"}

    def test_initial_residuals(self):
        state = HeightState.initial(octagon_triod(1.0, 0.55, 1.0))
        assert height_constraint_residual(state) == 0.0

    def test_rates_satisfy_constraint(self):
        """Minimal curvatures move the three carriers of a stable triod concurrently."""
        for lengths in ((1.0, 0.55, 1.0), (0.8, 0.6, 1.3)):
            state = HeightState.initial(octagon_triod(*lengths))
            assert curvature_balance_residual(state) < 1e-9, lengths

    def test_constraint_matrix_shape(self):
        C = constraint_matrix(hexagon_theta())
        assert C.shape == (2, 11)


# =============================================================================
# Stepping
# =============================================================================

class TestPolyStep:

    def test_step_keeps_constraint(self):
        net = octagon_triod(1.0, 0.55, 1.0)
        state = HeightState.initial(net)
        for _ in range(5):
            state = poly_step(state, 1e-3)
        assert height_constraint_residual(state) < 1e-9
        assert state.t == pytest.approx(5e-3)

    def test_step_stays_parallel(self):
        from netflow.network import is_parallel

        net = octagon_triod(1.0, 0.55, 1.0)
        state = poly_step(HeightState.initial(net), 1e-3)
        assert is_parallel(net, state.network)

    def test_limits_from_network(self):
        net = octagon_triod(1.0, 0.55, 1.0)
        limits = FlowLimits.from_network(net, margin=0.2)
        assert limits.eps_len == pytest.approx(1e-6 * 0.55)
        assert limits.eps_stab == pytest.approx(2e-4)


# =============================================================================
# Runs
# =============================================================================

class TestRunPolyFlow:

    def test_shrinking_square(self, vectors):
        case = vectors["shrinking_square"]
        traj = _run(square_curve(case["side"]), case["T"], 1e-3)
        assert traj.event is None
        assert traj.t_final == pytest.approx(case["T"])
        for value in traj.final.heights.values():
            assert value == pytest.approx(case["height"], abs=case["tol"])

    def test_rk4_order(self):
        T = 0.1
        exact = _square_height(1.0, T)
        errors = []
        for dt in (0.05, 0.025):
            traj = _run(square_curve(1.0), T, dt)
            errors.append(abs(traj.final.heights["square:0"] - exact))
        order = math.log2(errors[0] / errors[1])
        assert order > 3.0, errors

    def test_triod_orders(self):
        net = octagon_triod(1.0, 0.55, 1.0)
        T = 0.02
        ref_traj = _run(net, T, 2.5e-4)
        ids = list(ref_traj.final.heights)
        ref = np.array([ref_traj.final.heights[k] for k in ids])
        rk4_errors, picard_errors = [], []
        for dt in (4e-3, 2e-3):
            traj = _run(net, T, dt)
            final = np.array([traj.final.heights[k] for k in ids])
            rk4_errors.append(float(np.max(np.abs(final - ref))))
            _, H, picard_ids = picard_trajectory(net, T, dt)
            picard = H[-1][[picard_ids.index(k) for k in ids]]
            picard_errors.append(float(np.max(np.abs(picard - ref))))
        assert math.log2(rk4_errors[0] / rk4_errors[1]) >= 3.5, rk4_errors
        assert math.log2(picard_errors[0] / picard_errors[1]) >= 0.9, picard_errors

    def test_energy_decreases(self):
        traj = _run(octagon_triod(1.0, 0.55, 1.0), 0.02, 2e-3)
        energies = traj.energies
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:])), energies

    def test_stable_triod_stays_parallel(self):
        traj = _run(octagon_triod(1.0, 0.55, 1.0), 0.02, 2e-3)
        assert traj.event is None
        for snap in traj.snapshots:
            assert snap.diagnostics["parallel"] is True
            assert snap.diagnostics["constraint"] < 1e-9
            assert snap.diagnostics["margin"] > 0.0

    def test_theta_flow(self):
        traj = _run(hexagon_theta(), 0.05, 1e-3)
        assert traj.event is None
        assert traj.steps == 50
        for snap in traj.snapshots:
            assert snap.diagnostics["constraint"] < 1e-9, snap.index
            # the middle segment of a symmetric theta never moves
            assert abs(snap.heights["s2:0"]) < 1e-10, snap.index

    def test_unstable_start_rejected(self):
        with pytest.raises(NetworkError, match="not stable"):
            _run(octagon_triod(1.0, 1.0, 1.0), 0.01, 1e-3)

    def test_collapse_event(self):
        # a unit square vanishes at t = 1/8
        traj = _run(square_curve(1.0), 0.2, 1e-3)
        event = traj.event
        assert event is not None
        assert event.kind == "segment-collapse"
        assert 0.1 < event.time <= 0.126 + 1e-9
        assert traj.t_final < 0.2

    def test_zero_horizon(self):
        traj = _run(octagon_triod(1.0, 0.55, 1.0), 0.0, 1e-3)
        assert len(traj.snapshots) == 1
        assert traj.steps == 0

    def test_snapshot_cadence(self):
        traj = _run(square_curve(1.0), 0.01, 1e-3, snapshot_every=5)
        assert [s.index for s in traj.snapshots] == [0, 1, 2]
        assert [s.t for s in traj.snapshots] == pytest.approx([0.0, 0.005, 0.01])

    def test_smooth_network_rejected(self):
        from netflow.builders import circle

        with pytest.raises(NetworkError, match="not crystalline"):
            _run(circle(n=20), 0.01, 1e-3)


# =============================================================================
# Picard cross-check
# =============================================================================

class TestPicard:

    def test_square_matches_exact(self):
        times, H, ids = picard_trajectory(square_curve(1.0), 0.05, 1e-3)
        exact = np.array([_square_height(1.0, t) for t in times])
        assert np.max(np.abs(H[:, ids.index("square:0")] - exact)) < 1e-5

    def test_agrees_with_rk4(self):
        net = octagon_triod(1.0, 0.55, 1.0)
        traj = _run(net, 0.02, 2e-3)
        times, H, ids = picard_trajectory(net, 0.02, 2e-3)
        final = np.array([traj.final.heights[k] for k in ids])
        assert np.max(np.abs(final - H[-1])) < 1e-5

    def test_run_reports_deviation(self):
        traj = _run(square_curve(1.0), 0.02, 1e-3, picard_check=True)
        assert traj.picard_deviation is not None
        assert traj.picard_deviation < 1e-5


# =============================================================================
# Trajectory files
# =============================================================================

class TestTrajectoryFile:

    def test_write_and_read(self, tmp_path):
        net = square_curve(1.0)
        cfg = RunConfig(mode="crystalline", T=0.01, dt=1e-3)
        path = tmp_path / "square.jsonl"
        with TrajectoryWriter(path, mode="crystalline", config=cfg.to_dict(), network=net) as writer:
            traj = run_poly_flow(net, cfg.T, cfg, writer=writer)
            writer.close(traj)
        data = read_trajectory(path)
        assert data["header"]["mode"] == "crystalline"
        assert data["header"]["schema"] == 1
        assert len(data["snapshots"]) == len(traj.snapshots)
        assert data["summary"]["steps"] == 10
        assert data["snapshots"][-1]["heights"]["square:0"] == pytest.approx(traj.final.heights["square:0"])

    def test_deterministic_bytes(self, tmp_path):
        net = octagon_triod(1.0, 0.55, 1.0)
        cfg = RunConfig(mode="crystalline", T=0.01, dt=1e-3)
        outputs = []
        for name in ("a.jsonl", "b.jsonl"):
            path = tmp_path / name
            with TrajectoryWriter(path, mode="crystalline", config=cfg.to_dict(), network=net) as writer:
                writer.close(run_poly_flow(net, cfg.T, cfg, writer=writer))
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]

    def test_event_record(self, tmp_path):
        net = square_curve(1.0)
        cfg = RunConfig(mode="crystalline", T=0.2, dt=1e-3)
        path = tmp_path / "collapse.jsonl"
        with TrajectoryWriter(path, mode="crystalline", config=cfg.to_dict(), network=net) as writer:
            writer.close(run_poly_flow(net, cfg.T, cfg, writer=writer))
        data = read_trajectory(path)
        assert data["events"][0]["kind"] == "segment-collapse"
        assert data["summary"]["event"]["kind"] == "segment-collapse"
