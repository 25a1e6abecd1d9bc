"""
Smooth Flow Tests - curvature, Herring condition, first variation, explicit flow.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from netflow.anisotropy import SmoothAnisotropy
from netflow.builders import circle, ellipse, square_curve, theta, triod
from netflow.config import RunConfig
from netflow.errors import NetworkError
from netflow.network import Curve, Network
from netflow.schema import DT_SAFETY, ENERGY_SLACK, TOL_HERRING
from netflow.smooth_flow import (
    DiscreteNetwork,
    aniso_curvature,
    compatibility_residual,
    energy,
    equilibrate,
    first_variation_check,
    herring_residual,
    resample_arclength,
    run_flow,
    stable_dt,
)


VECTORS_PATH = Path(__file__).parent / "conformance" / "vectors.json"
EUCLID = SmoothAnisotropy.from_family("euclidean", [1.0])
WAVY = SmoothAnisotropy.from_family("cosine", [0.1, 2])


@pytest.fixture(scope="module")
def vectors():
    with open(VECTORS_PATH, encoding="utf-8") as f:
        return json.load(f)


def _state(net):
    return DiscreteNetwork.from_network(net)


def _ellipse_curvature(a, b, n, aniso):
    """Exact kappa^phi of (a cos t, b sin t) at t_k = 2 pi k / n."""
    t = 2.0 * np.pi * np.arange(n) / n
    speed = np.hypot(a * np.sin(t), b * np.cos(t))
    nu_angle = np.arctan2(-a * np.sin(t), -b * np.cos(t))
    return aniso.stiffness(nu_angle) * a * b / speed ** 3


def _energies_non_increasing(energies):
    return all(b <= a + ENERGY_SLACK * abs(a) + 1e-15 for a, b in zip(energies, energies[1:]))


# =============================================================================
# Curvature
# =============================================================================

class TestCurvature:

    def test_circle_curvature_positive(self):
        state = _state(circle(2.0, 400))
        kappa = aniso_curvature(state.curves[0], EUCLID)
        assert kappa.shape == (400,)
        assert np.allclose(kappa, 0.5, rtol=1e-3)

    def test_open_curve_interior_only(self):
        state = _state(triod(n=10))
        kappa = aniso_curvature(state.curve("c1"), EUCLID)
        assert kappa.shape == (8,)
        assert np.allclose(kappa, 0.0, atol=1e-9)

    def test_stiffness_scales_curvature(self):
        aniso = SmoothAnisotropy.from_family("euclidean", [2.0])
        state = _state(circle(1.0, 200, anisotropy=aniso))
        assert np.allclose(aniso_curvature(state.curves[0], aniso), 2.0, rtol=1e-3)

    def test_ellipse_second_order(self):
        errors = []
        for n in (200, 400, 800):
            state = _state(ellipse(2.0, 1.0, n, anisotropy=WAVY))
            kappa = aniso_curvature(state.curves[0], WAVY)
            errors.append(float(np.max(np.abs(kappa - _ellipse_curvature(2.0, 1.0, n, WAVY)))))
        assert errors[-1] < 1e-4, errors
        for coarse, fine in zip(errors, errors[1:]):
            assert math.log2(coarse / fine) >= 1.8, errors


# =============================================================================
# Junction conditions
# =============================================================================

class TestJunctionConditions:

    def test_equal_weights_at_120_degrees(self, vectors):
        state = _state(triod())
        assert herring_residual(state, "q") == pytest.approx(vectors["herring"]["equal_weights_120"], abs=1e-12)

    def test_heavy_third_curve(self, vectors):
        net = triod(anisotropies=(EUCLID, EUCLID, EUCLID.scaled(3.0)))
        assert herring_residual(_state(net), "q") >= vectors["herring"]["incompatible_lower_bound"]

    def test_heavy_third_curve_at_random_angles(self, vectors):
        rng = np.random.default_rng(20240612)
        heavy = (EUCLID, EUCLID, EUCLID.scaled(3.0))
        worst, checked = math.inf, 0
        for _ in range(1000):
            angles = np.sort(rng.uniform(0.0, 360.0, size=3))
            gaps = np.diff(np.append(angles, angles[0] + 360.0))
            if np.min(gaps) < 1.0:
                continue
            net = triod(angles=tuple(float(a) for a in angles), n=3, anisotropies=heavy)
            worst = min(worst, herring_residual(_state(net), "q"))
            checked += 1
        assert checked > 900
        assert worst >= vectors["herring"]["incompatible_lower_bound"]

    def test_straight_triod_is_compatible(self):
        assert compatibility_residual(_state(triod()), "q") < 1e-10

    def test_unknown_junction(self):
        with pytest.raises(NetworkError, match="Unknown junction"):
            herring_residual(_state(triod()), "nope")

    def test_equilibrate_elliptic_theta(self):
        aniso = SmoothAnisotropy.from_family("elliptic", [1.5, 1.0])
        net = theta(n=20, anisotropy=aniso)
        assert herring_residual(_state(net), "p") > 1e-3
        balanced = _state(equilibrate(net))
        for jid in ("p", "q"):
            assert herring_residual(balanced, jid) <= 10.0 * TOL_HERRING, jid

    def test_equilibrate_moves_only_junctions(self):
        aniso = SmoothAnisotropy.from_family("elliptic", [1.5, 1.0])
        net = theta(n=20, anisotropy=aniso)
        balanced = equilibrate(net)
        for before, after in zip(net.curves, balanced.curves):
            assert np.array_equal(before.points[1:-1], after.points[1:-1]), before.id


# =============================================================================
# First variation
# =============================================================================

class TestFirstVariation:

    def test_closed_curve(self):
        aniso = SmoothAnisotropy.from_family("elliptic", [1.5, 1.0, 0.3])
        net = circle(1.0, 50, anisotropy=aniso)
        b = np.random.default_rng(3).normal(size=(50, 2))
        fd, formula = first_variation_check(net, {"circle": b})
        assert fd == pytest.approx(formula, rel=1e-6, abs=1e-9)

    def test_junction_conormals(self):
        net = triod(angles=(80.0, 200.0, 340.0), n=6)
        rng = np.random.default_rng(11)
        shift = rng.normal(size=2)
        perturbation = {}
        for cid in ("c1", "c2", "c3"):
            b = rng.normal(size=(6, 2))
            b[0] = shift
            perturbation[cid] = b
        fd, formula = first_variation_check(net, perturbation)
        assert fd == pytest.approx(formula, rel=1e-6, abs=1e-9)

    def test_anisotropic_theta(self):
        net = equilibrate(theta(n=20, anisotropy=WAVY))
        rng = np.random.default_rng(17)
        for trial in range(20):
            at_p, at_q = rng.normal(size=2), rng.normal(size=2)
            perturbation = {}
            for c in net.curves:
                b = rng.normal(size=c.points.shape)
                b[0], b[-1] = at_p, at_q
                perturbation[c.id] = b
            fd, formula = first_variation_check(net, perturbation)
            assert fd == pytest.approx(formula, rel=1e-6, abs=1e-9), f"trial {trial}"

    def test_translation_is_free(self):
        net = circle(1.0, 30)
        fd, formula = first_variation_check(net, {"circle": np.tile([0.3, -0.2], (30, 1))})
        assert fd == pytest.approx(0.0, abs=1e-9)
        assert formula == pytest.approx(0.0, abs=1e-12)

    def test_disagreeing_junction_values(self):
        net = triod(n=4)
        b = np.zeros((4, 2))
        b[0] = (1.0, 0.0)
        with pytest.raises(NetworkError, match="does not agree"):
            first_variation_check(net, {"c1": b})

    def test_wrong_shape(self):
        with pytest.raises(NetworkError, match="shape"):
            first_variation_check(circle(1.0, 30), {"circle": np.zeros((10, 2))})


# =============================================================================
# Helpers
# =============================================================================

class TestHelpers:

    def test_energy_of_circle(self):
        assert energy(_state(circle(1.0, 400))) == pytest.approx(2.0 * math.pi, rel=1e-4)

    def test_resample_uniform(self):
        net = triod(n=5)
        state = _state(net)
        c = state.curve("c1")
        skewed = c.with_nodes(np.outer([0.0, 0.1, 0.2, 0.7, 1.0], c.nodes[-1]))
        even = resample_arclength(skewed)
        assert np.allclose(np.linalg.norm(np.diff(even.nodes, axis=0), axis=1), 0.25)
        assert np.array_equal(even.nodes[0], skewed.nodes[0])
        assert np.array_equal(even.nodes[-1], skewed.nodes[-1])

    def test_resample_never_lengthens(self):
        state = _state(circle(1.0, 60))
        c = state.curves[0]
        jittered = c.with_nodes(c.nodes + 0.01 * np.random.default_rng(5).normal(size=c.nodes.shape))
        before = energy(state.with_curves([jittered]))
        after = energy(state.with_curves([resample_arclength(jittered)]))
        assert after <= before + 1e-12

    def test_stable_dt(self):
        state = _state(circle(1.0, 100))
        edge = float(np.min(state.curves[0].spacing))
        assert stable_dt(state) == pytest.approx(DT_SAFETY * edge * edge)


# =============================================================================
# Runs
# =============================================================================

class TestRunFlow:

    def test_shrinking_circle(self, vectors):
        case = vectors["shrinking_circle"]
        net = circle(case["radius"], case["nodes"])
        traj = run_flow(net, case["T"], RunConfig(mode="smooth", T=case["T"], snapshot_every=200))
        assert traj.event is None
        assert traj.t_final == pytest.approx(case["T"])
        radii = np.linalg.norm(traj.final.network.curves[0].points, axis=1)
        assert float(np.mean(radii)) == pytest.approx(case["final_radius"], abs=case["tol"])

    def test_energy_non_increasing(self):
        traj = run_flow(circle(1.0, 80), 0.05, RunConfig(mode="smooth", T=0.05, snapshot_every=5))
        energies = traj.energies
        assert all(b <= a * (1.0 + 1e-9) for a, b in zip(energies, energies[1:])), energies

    def test_straight_triod_is_stationary(self):
        net = triod(n=10)
        traj = run_flow(net, 0.01, RunConfig(mode="smooth", T=0.01, snapshot_every=1000))
        for before, after in zip(net.curves, traj.final.network.curves):
            assert np.allclose(before.points, after.points, atol=1e-9), before.id

    def test_theta_keeps_herring(self):
        traj = run_flow(equilibrate(theta(n=20)), 2e-3, RunConfig(mode="smooth", T=2e-3, snapshot_every=10))
        assert traj.event is None
        for snap in traj.snapshots:
            assert snap.diagnostics["herring"] <= 10.0 * TOL_HERRING

    def test_elliptic_theta_keeps_herring_every_step(self):
        aniso = SmoothAnisotropy.from_family("elliptic", [1.5, 1.0])
        net = equilibrate(theta(n=20, anisotropy=aniso))
        T = 1e-2
        traj = run_flow(net, T, RunConfig(mode="smooth", T=T, snapshot_every=1))
        assert traj.event is None
        assert traj.steps > 10
        assert len(traj.snapshots) == traj.steps + 1
        assert _energies_non_increasing(traj.energies), traj.energies
        for snap in traj.snapshots:
            assert snap.diagnostics["herring"] <= TOL_HERRING, snap.index

    def test_circle_spatial_order(self):
        T = 0.375
        errors = []
        for n in (50, 100, 200):
            traj = run_flow(circle(1.0, n), T, RunConfig(mode="smooth", T=T, snapshot_every=100000))
            assert traj.event is None
            radii = np.linalg.norm(traj.final.network.curves[0].points, axis=1)
            errors.append(abs(float(np.mean(radii)) - math.sqrt(1.0 - 2.0 * T)))
        for coarse, fine in zip(errors, errors[1:]):
            assert math.log2(coarse / fine) >= 1.8, errors

    def test_dissipation_after_resampling(self):
        n = 40
        x = np.arange(n) / n
        angle = 2.0 * np.pi * (x + 0.03 * np.sin(2.0 * np.pi * x))
        curve = Curve.create("blob", "phi", np.column_stack([np.cos(angle), np.sin(angle)]), kind="sampled", closed=True)
        net = Network.create({"phi": EUCLID}, [curve])
        T = 0.05
        traj = run_flow(net, T, RunConfig(mode="smooth", T=T, resample_every=1, snapshot_every=1))
        snaps = traj.snapshots
        assert len(snaps) > 2
        for prev, snap in zip(snaps, snaps[1:]):
            expected = (prev.diagnostics["energy"] - snap.diagnostics["energy"]) / (snap.t - prev.t)
            assert snap.diagnostics["dissipation"] == pytest.approx(expected, rel=1e-6), snap.index

    def test_zero_horizon(self):
        traj = run_flow(circle(1.0, 20), 0.0)
        assert len(traj.snapshots) == 1
        assert traj.steps == 0

    def test_herring_violation_rejected(self):
        net = triod(angles=(90.0, 180.0, 330.0))
        with pytest.raises(NetworkError, match="Herring"):
            run_flow(net, 0.01)

    def test_crystalline_network_rejected(self):
        with pytest.raises(NetworkError, match="not smooth"):
            run_flow(square_curve(1.0), 0.01)

    def test_single_step_advances(self):
        from netflow.smooth_flow import flow_step

        state = _state(circle(1.0, 60))
        dt = stable_dt(state)
        result = flow_step(state, dt)
        assert result.state.t == pytest.approx(dt)
        assert result.halvings == 0
        assert result.energy < energy(state)
