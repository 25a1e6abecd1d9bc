"""
Anisotropy Tests - smooth families, Wulff polygons, admissible triplets.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from netflow.anisotropy import (
    CrystallinePolytope,
    SmoothAnisotropy,
    check_triangle_inequality,
    dual_gradient,
    dual_value,
    primal_value,
    regular_polygon,
    solve_triplet,
    subdifferential_edge,
    triplet_params,
    triplet_points,
)
from netflow.errors import InvalidAnisotropyError


VECTORS_PATH = Path(__file__).parent / "conformance" / "vectors.json"


@pytest.fixture(scope="module")
def vectors():
    with open(VECTORS_PATH, encoding="utf-8") as f:
        return json.load(f)


def _square(half: float = 1.0) -> CrystallinePolytope:
    h = half
    return CrystallinePolytope.create([(h, h), (-h, h), (-h, -h), (h, -h)])


# =============================================================================
# Smooth families
# =============================================================================

class TestSmoothAnisotropy:

    def test_euclidean_dual(self):
        euclid = SmoothAnisotropy.from_family("euclidean", [1.0])
        assert dual_value(euclid, np.array([3.0, 4.0])) == pytest.approx(5.0)

    def test_euclidean_gradient(self):
        euclid = SmoothAnisotropy.from_family("euclidean", [1.0])
        assert np.allclose(dual_gradient(euclid, np.array([0.0, 1.0])), [0.0, 1.0])

    def test_dual_is_one_homogeneous(self):
        aniso = SmoothAnisotropy.from_family("cosine", [0.05, 4])
        rng = np.random.default_rng(7)
        for _ in range(20):
            xi = rng.normal(size=2)
            lam = rng.uniform(0.1, 5.0)
            assert aniso.dual(lam * xi) == pytest.approx(lam * aniso.dual(xi), rel=1e-12)

    def test_elliptic_axes(self):
        aniso = SmoothAnisotropy.from_family("elliptic", [2.0, 1.0])
        assert aniso.dual(np.array([1.0, 0.0])) == pytest.approx(2.0)
        assert aniso.dual(np.array([0.0, 1.0])) == pytest.approx(1.0)

    def test_gradient_dot_normal_is_dual(self):
        """Euler's identity for one-homogeneous functions."""
        aniso = SmoothAnisotropy.from_family("elliptic", [2.0, 1.0, 0.3])
        for theta in np.linspace(0.0, 2.0 * np.pi, 13):
            nu = np.array([math.cos(theta), math.sin(theta)])
            assert aniso.gradient(nu) @ nu == pytest.approx(aniso.dual(nu), rel=1e-12)

    def test_scaled(self):
        euclid = SmoothAnisotropy.from_family("euclidean", [1.0])
        assert euclid.scaled(3.0).dual(np.array([1.0, 0.0])) == pytest.approx(3.0)
        assert euclid.scaled(3.0).params == (3.0,)

    def test_non_elliptic_rejected(self):
        # psi + psi'' = 1 - 1.5 cos(4 theta) changes sign
        with pytest.raises(InvalidAnisotropyError, match="not elliptic"):
            SmoothAnisotropy.from_family("cosine", [0.1, 4])

    def test_unknown_family(self):
        with pytest.raises(InvalidAnisotropyError, match="Unknown smooth family"):
            SmoothAnisotropy.from_family("spiky", [1.0])

    def test_nonpositive_scale(self):
        with pytest.raises(InvalidAnisotropyError):
            SmoothAnisotropy.from_family("euclidean", [0.0])

    def test_non_finite_input(self):
        euclid = SmoothAnisotropy.from_family("euclidean", [1.0])
        with pytest.raises(ValueError, match="finite"):
            euclid.dual(np.array([np.nan, 1.0]))


# =============================================================================
# Wulff polygons
# =============================================================================

class TestCrystallinePolytope:

    def test_square_dual_and_gauge(self):
        sq = _square()
        assert sq.dual(np.array([1.0, 0.0])) == pytest.approx(1.0)
        assert sq.dual(np.array([1.0, 1.0])) == pytest.approx(2.0)
        assert primal_value(sq, np.array([1.0, 0.0])) == pytest.approx(1.0)
        assert primal_value(sq, np.array([0.5, 0.5])) == pytest.approx(0.5)

    def test_orientation_normalised(self):
        ccw = _square()
        cw = CrystallinePolytope.create(ccw.vertices[::-1])
        assert np.allclose(ccw.vertices, cw.vertices)

    def test_regular_hexagon(self):
        hexagon = regular_polygon(6, 1.0)
        assert hexagon.n == 6
        assert hexagon.even
        assert np.allclose(hexagon.edge_lengths, 1.0)
        assert hexagon.dual(np.array([1.0, 0.0])) == pytest.approx(math.sqrt(3.0) / 2.0)

    def test_face_edge_and_vertex(self):
        hexagon = regular_polygon(6, 1.0)
        assert len(hexagon.face(np.array([1.0, 0.0]))) == 2
        assert len(hexagon.face(np.array([math.cos(math.pi / 6), math.sin(math.pi / 6)]))) == 1

    def test_subdifferential_edge(self):
        edge = subdifferential_edge(_square(), np.array([1.0, 0.0]))
        assert sorted(edge[:, 1].tolist()) == pytest.approx([-1.0, 1.0])
        assert np.allclose(edge[:, 0], 1.0)

    def test_locate_round_trip(self):
        octagon = regular_polygon(8, 1.0)
        for k in range(octagon.n):
            bp = octagon.locate(octagon.vertices[k] + 0.3 * octagon.edge_direction(k))
            assert bp.edge == k
            assert bp.offset == pytest.approx(0.3)

    def test_non_convex_rejected(self):
        with pytest.raises(InvalidAnisotropyError, match="convex"):
            CrystallinePolytope.create([(1, 0), (0.1, 0.1), (0, 1), (-1, 0), (0, -1)])

    def test_origin_outside_rejected(self):
        with pytest.raises(InvalidAnisotropyError, match="origin"):
            CrystallinePolytope.create([(1, 1), (2, 1), (2, 2), (1, 2)])

    def test_even_flag_checked(self):
        with pytest.raises(InvalidAnisotropyError, match="even"):
            CrystallinePolytope.create([(1, 0), (0, 1), (-1, 0), (0, -2)], even=True)

    def test_repeated_vertex_rejected(self):
        with pytest.raises(InvalidAnisotropyError):
            CrystallinePolytope.create([(1, 0), (1, 0), (0, 1), (-1, 0)])


# =============================================================================
# Admissible triplets
# =============================================================================

class TestTriplets:

    def test_conformance_params(self, vectors):
        for case in vectors["triplet_params"]["cases"]:
            p = triplet_params(case["n"], case["l"])
            desc = case["desc"]
            assert p.theta_n == pytest.approx(case["theta_n"], abs=1e-14), desc
            assert p.delta == pytest.approx(case["delta"], abs=1e-14), desc
            assert p.c_bar == pytest.approx(case["c_bar"], abs=1e-14), desc
            assert p.q_y == pytest.approx(case["q_y"], abs=1e-14), desc
            assert p.q_z == pytest.approx(case["q_z"], abs=1e-14), desc
            assert list(p.interval_ab) == pytest.approx(case["interval_ab"], abs=1e-14), desc

    def test_triplet_points_sum_to_zero(self, vectors):
        for n in vectors["triplet_params"]["sum_to_zero_sides"]:
            p = triplet_params(n, 1.0)
            a, b = p.interval_ab
            for x in np.linspace(a, b, 7):
                X, Y, Z = triplet_points(p, x)
                assert np.linalg.norm(X + Y + Z) < 1e-10, f"n={n}, x={x}"

    def test_triplet_points_on_boundary(self):
        p = triplet_params(8, 1.0)
        octagon = regular_polygon(8, 1.0)
        for point in triplet_points(p, 0.5):
            assert octagon.gauge(point) == pytest.approx(1.0, abs=1e-12)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            triplet_params(7)
        with pytest.raises(ValueError):
            triplet_params(4)

    def test_square_edge_midpoint_has_family(self):
        sols = solve_triplet(_square(), np.array([1.0, 0.0]))
        assert sols.infinite

    def test_solutions_balance(self):
        hexagon = regular_polygon(6, 1.0)
        x = np.array([math.sqrt(3.0) / 2.0, 0.0])
        sols = solve_triplet(hexagon, x)
        assert sols.pairs or sols.families
        for y, z in sols.pairs:
            assert np.linalg.norm(x + y + z) < 1e-9
            assert hexagon.gauge(y) == pytest.approx(1.0, abs=1e-9)
            assert hexagon.gauge(z) == pytest.approx(1.0, abs=1e-9)

    def test_off_boundary_rejected(self):
        with pytest.raises(InvalidAnisotropyError, match="not on the Wulff boundary"):
            solve_triplet(_square(), np.array([0.5, 0.0]))


# =============================================================================
# Triangle inequality
# =============================================================================

class TestTriangleInequality:

    def test_equal_anisotropies_pass(self):
        euclid = SmoothAnisotropy.from_family("euclidean", [1.0])
        assert check_triangle_inequality([euclid, euclid, euclid])

    def test_heavy_third_fails_with_warning(self, caplog):
        euclid = SmoothAnisotropy.from_family("euclidean", [1.0])
        with caplog.at_level("WARNING"):
            assert not check_triangle_inequality([euclid, euclid, euclid.scaled(3.0)])
        assert "Triangle inequality" in caplog.text
