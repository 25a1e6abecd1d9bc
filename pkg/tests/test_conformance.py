"""
netflow Conformance Tests

File formats against the shared reference values: network JSON in both
directions, malformed and adversarial inputs, trajectory streams, and
byte-stable SVG output.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from netflow.anisotropy import CrystallinePolytope, SmoothAnisotropy
from netflow.builders import circle, hexagon_theta, octagon_triod, square_curve, triod
from netflow.converters import (
    anisotropy_from_dict,
    anisotropy_to_dict,
    dump_network,
    dumps,
    load_network,
    loads,
    network_from_dict,
    network_to_dict,
)
from netflow.errors import InvalidAnisotropyError, NetworkError, ParseError
from netflow.network import Network, phi_length
from netflow.render import render_svg, write_svg
from netflow.schema import MAX_FILE_SIZE, SCHEMA_VERSION
from netflow.trajectory import read_trajectory


VECTORS_PATH = Path(__file__).parent / "conformance" / "vectors.json"


@pytest.fixture(scope="module")
def vectors():
    with open(VECTORS_PATH, encoding="utf-8") as f:
        return json.load(f)


def _minimal(**overrides):
    data = {
        "schema": SCHEMA_VERSION,
        "anisotropies": {"phi": {"kind": "smooth", "family": "euclidean", "params": [1.0]}},
        "curves": [{"id": "c", "anisotropy": "phi", "points": [[0, 0], [1, 0]]}],
    }
    data.update(overrides)
    return data


# =============================================================================
# Network JSON
# =============================================================================

class TestNetworkJson:

    def test_benchmarks_survive_a_file(self, tmp_path):
        for net in (octagon_triod(1.0, 0.55, 1.0), hexagon_theta(), square_curve(), triod()):
            path = tmp_path / "net.json"
            dump_network(net, path)
            back = load_network(path)
            assert [c.id for c in back.curves] == [c.id for c in net.curves]
            assert [j.ends for j in back.junctions] == [j.ends for j in net.junctions]
            for a, b in zip(net.curves, back.curves):
                assert np.array_equal(a.points, b.points), a.id
                assert a.kind == b.kind

    def test_energy_preserved(self, vectors):
        side = vectors["shrinking_square"]["side"]
        net = loads(dumps(square_curve(side)))
        assert phi_length(net) == pytest.approx(4.0 * side)

    def test_phases_kept(self):
        back = network_from_dict(network_to_dict(hexagon_theta()))
        assert back.curve("s2").phases == (1, 3)

    def test_halflines_kept(self):
        back = loads(dumps(octagon_triod(1.0, 0.55, 1.0)))
        assert back.curve("c1").end_halfline is not None
        assert back.curve("c1").start_halfline is None

    def test_default_kind_is_polyline(self):
        assert network_from_dict(_minimal()).curve("c").kind == "polyline"

    def test_sampled_kind(self):
        assert loads(dumps(circle(n=12))).curve("circle").kind == "sampled"


class TestAnisotropyJson:

    def test_crystalline(self):
        wulff = CrystallinePolytope.create([(1, 1), (-1, 1), (-1, -1), (1, -1)])
        back = anisotropy_from_dict(anisotropy_to_dict(wulff))
        assert np.allclose(back.vertices, wulff.vertices)
        assert back.even

    def test_smooth_family(self):
        aniso = SmoothAnisotropy.from_family("elliptic", [2.0, 1.0, 0.4])
        back = anisotropy_from_dict(anisotropy_to_dict(aniso))
        nu = np.array([0.6, 0.8])
        assert back.dual(nu) == pytest.approx(aniso.dual(nu))

    def test_bare_callables_not_serializable(self):
        aniso = SmoothAnisotropy(psi=lambda t: 1.0 + 0.0 * t, psi_d1=lambda t: 0.0 * t, psi_d2=lambda t: 0.0 * t)
        with pytest.raises(InvalidAnisotropyError, match="cannot be serialized"):
            anisotropy_to_dict(aniso)


# =============================================================================
# Malformed input
# =============================================================================

class TestMalformedInput:

    def test_json_error_has_position(self):
        with pytest.raises(ParseError) as info:
            loads('{"schema": 1,\n  "curves": [,]}')
        assert info.value.line == 2
        assert info.value.column is not None

    def test_not_an_object(self):
        with pytest.raises(ParseError, match="JSON object"):
            loads("[1, 2, 3]")

    def test_unsupported_schema(self):
        with pytest.raises(ParseError, match="schema"):
            network_from_dict(_minimal(schema=99))

    def test_unknown_anisotropy_kind(self):
        with pytest.raises(ParseError, match="unknown kind"):
            network_from_dict(_minimal(anisotropies={"phi": {"kind": "fractal"}}))

    def test_unknown_family(self):
        with pytest.raises(ParseError, match="unknown family"):
            network_from_dict(_minimal(anisotropies={"phi": {"kind": "smooth", "family": "spiky"}}))

    def test_bad_points(self):
        curves = [{"id": "c", "anisotropy": "phi", "points": [[0, 0], [1, "x"]]}]
        with pytest.raises(ParseError, match="number pairs"):
            network_from_dict(_minimal(curves=curves))

    def test_boolean_is_not_a_number(self):
        curves = [{"id": "c", "anisotropy": "phi", "points": [[0, 0], [True, 0]]}]
        with pytest.raises(ParseError):
            network_from_dict(_minimal(curves=curves))

    def test_malformed_junction_end(self):
        junctions = [{"id": "q", "point": [0, 0], "ends": [["c", "middle"]]}]
        with pytest.raises(ParseError, match="malformed end"):
            network_from_dict(_minimal(junctions=junctions))

    def test_unknown_curve_reference(self):
        curves = [{"id": "c", "anisotropy": "missing", "points": [[0, 0], [1, 0]]}]
        with pytest.raises(NetworkError, match="unknown anisotropy"):
            network_from_dict(_minimal(curves=curves))

    def test_non_convex_wulff_shape(self):
        anisotropies = {"phi": {"kind": "crystalline", "vertices": [[1, 0], [0.1, 0.1], [0, 1], [-1, 0], [0, -1]]}}
        with pytest.raises(InvalidAnisotropyError):
            network_from_dict(_minimal(anisotropies=anisotropies))

    def test_oversized_file(self, tmp_path):
        path = tmp_path / "huge.json"
        with open(path, "wb") as f:
            f.truncate(MAX_FILE_SIZE + 1)
        with pytest.raises(ParseError, match="maximum size"):
            load_network(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="Cannot read"):
            load_network(tmp_path / "absent.json")


# =============================================================================
# Trajectory streams
# =============================================================================

class TestTrajectoryStream:

    def test_header_required(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text('{"type": "snapshot"}\n', encoding="utf-8")
        with pytest.raises(ParseError, match="header"):
            read_trajectory(path)

    def test_unknown_record(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text(f'{{"type": "header", "schema": {SCHEMA_VERSION}}}\n{{"type": "gossip"}}\n', encoding="utf-8")
        with pytest.raises(ParseError, match="gossip"):
            read_trajectory(path)

    def test_truncated_record(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text(f'{{"type": "header", "schema": {SCHEMA_VERSION}}}\n{{"type": "snap', encoding="utf-8")
        with pytest.raises(ParseError) as info:
            read_trajectory(path)
        assert info.value.line == 2

    def test_prefix_without_summary(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text(f'{{"type": "header", "schema": {SCHEMA_VERSION}}}\n', encoding="utf-8")
        data = read_trajectory(path)
        assert data["summary"] is None
        assert data["snapshots"] == []


# =============================================================================
# SVG
# =============================================================================

class TestSvg:

    def test_deterministic(self):
        net = hexagon_theta()
        assert render_svg(net) == render_svg(hexagon_theta())

    def test_one_path_per_curve(self):
        svg = render_svg(octagon_triod(1.0, 0.55, 1.0))
        assert svg.startswith('<svg xmlns="http://www.w3.org/2000/svg"')
        assert svg.count("<path ") == 3
        assert svg.count("<circle ") == 1
        assert svg.rstrip().endswith("</svg>")

    def test_closed_curves_close_the_path(self):
        assert ' Z"' in render_svg(square_curve())

    def test_ids_escaped(self):
        euclid = SmoothAnisotropy.from_family("euclidean", [1.0])
        from netflow.network import Curve

        net = Network.create({"phi": euclid}, [Curve.create('a"b', "phi", [(0, 0), (1, 0)])])
        assert 'id="curve-a&quot;b"' in render_svg(net)

    def test_empty_network(self):
        euclid = SmoothAnisotropy.from_family("euclidean", [1.0])
        svg = render_svg(Network.create({"phi": euclid}, []))
        assert "<path " not in svg
        assert svg.startswith("<svg")

    def test_arrows(self):
        from netflow.crystalline import min_field

        net = hexagon_theta()
        field, _ = min_field(net)
        svg = render_svg(net, field=field)
        assert svg.count("<line ") == len(list(net.finite_segments()))

    def test_smooth_wulff_inset(self):
        svg = render_svg(circle(n=20), wulff="phi")
        assert 'id="wulff-phi"' in svg

    def test_write_rejects_traversal(self, tmp_path):
        with pytest.raises(ValueError, match="path traversal"):
            write_svg(square_curve(), tmp_path / ".." / "x.svg")

    def test_write_returns_bytes(self, tmp_path):
        path = tmp_path / "sq.svg"
        n = write_svg(square_curve(), path)
        assert n == len(path.read_bytes())
