"""
netflow converters - networks and anisotropies to/from JSON.

Every object goes both ways:
  - anisotropy_to_dict / anisotropy_from_dict
  - network_to_dict / network_from_dict
  - dumps / loads            (JSON text)
  - dump_network / load_network   (files)

Only built-in smooth families serialize; a SmoothAnisotropy built from bare
callables has no file representation.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from netflow.anisotropy import Anisotropy, CrystallinePolytope, SmoothAnisotropy
from netflow.errors import InvalidAnisotropyError, ParseError
from netflow.network import Curve, Junction, Network
from netflow.schema import (
    ANISOTROPY_KINDS,
    END_LABELS,
    MAX_FILE_SIZE,
    SCHEMA_VERSION,
    SMOOTH_FAMILIES,
    SUPPORTED_SCHEMA_VERSIONS,
)

logger = logging.getLogger(__name__)


# =============================================================================
# Anisotropies
# =============================================================================

def anisotropy_to_dict(aniso: Anisotropy) -> dict[str, Any]:
    if isinstance(aniso, CrystallinePolytope):
        return {"kind": "crystalline", "vertices": aniso.vertices.tolist(), "even": aniso.even}
    if isinstance(aniso, SmoothAnisotropy):
        if aniso.family is None:
            raise InvalidAnisotropyError("Smooth anisotropy without a built-in family cannot be serialized")
        return {"kind": "smooth", "family": aniso.family, "params": list(aniso.params)}
    raise InvalidAnisotropyError(f"Unknown anisotropy type {type(aniso).__name__}")


def anisotropy_from_dict(data: Any, name: str = "anisotropy") -> Anisotropy:
    if not isinstance(data, dict):
        raise ParseError(f"Anisotropy '{name}' must be an object")
    kind = data.get("kind")
    if kind not in ANISOTROPY_KINDS:
        raise ParseError(f"Anisotropy '{name}' has unknown kind {kind!r}")
    if kind == "crystalline":
        vertices = data.get("vertices")
        if not isinstance(vertices, list):
            raise ParseError(f"Anisotropy '{name}' needs a 'vertices' list")
        even = data.get("even")
        if even is not None and not isinstance(even, bool):
            raise ParseError(f"Anisotropy '{name}' field 'even' must be a boolean")
        return CrystallinePolytope.create(_points(vertices, f"anisotropy '{name}'"), even=even)
    family = data.get("family")
    if family not in SMOOTH_FAMILIES:
        raise ParseError(f"Anisotropy '{name}' has unknown family {family!r}")
    params = data.get("params", [])
    if not isinstance(params, list) or not all(_is_number(p) for p in params):
        raise ParseError(f"Anisotropy '{name}' params must be a list of numbers")
    aniso = SmoothAnisotropy.from_family(family, [float(p) for p in params])
    aniso.check()
    return aniso


# =============================================================================
# Networks
# =============================================================================

def network_to_dict(net: Network) -> dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "anisotropies": {k: anisotropy_to_dict(a) for k, a in net.anisotropies.items()},
        "curves": [_curve_to_dict(c) for c in net.curves],
        "junctions": [
            {"id": j.id, "point": j.point.tolist(), "ends": [list(e) for e in j.ends]}
            for j in net.junctions
        ],
    }


def _curve_to_dict(c: Curve) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": c.id,
        "anisotropy": c.anisotropy,
        "kind": c.kind,
        "points": c.points.tolist(),
        "closed": c.closed,
        "start_halfline": None if c.start_halfline is None else c.start_halfline.tolist(),
        "end_halfline": None if c.end_halfline is None else c.end_halfline.tolist(),
    }
    if c.phases is not None:
        out["phases"] = list(c.phases)
    return out


def network_from_dict(data: Any) -> Network:
    """Build a Network from its JSON object. Structural problems raise ParseError."""
    if not isinstance(data, dict):
        raise ParseError("Network file must contain a JSON object")
    if data.get("schema") not in SUPPORTED_SCHEMA_VERSIONS:
        raise ParseError(f"Unsupported network schema {data.get('schema')!r}")
    raw_anisotropies = data.get("anisotropies")
    if not isinstance(raw_anisotropies, dict) or not raw_anisotropies:
        raise ParseError("Network needs a non-empty 'anisotropies' object")
    anisotropies = {str(k): anisotropy_from_dict(v, str(k)) for k, v in raw_anisotropies.items()}

    raw_curves = data.get("curves")
    if not isinstance(raw_curves, list):
        raise ParseError("Network needs a 'curves' list")
    curves = [_curve_from_dict(c, i) for i, c in enumerate(raw_curves)]

    raw_junctions = data.get("junctions", [])
    if not isinstance(raw_junctions, list):
        raise ParseError("Network field 'junctions' must be a list")
    junctions = [_junction_from_dict(j, i) for i, j in enumerate(raw_junctions)]
    return Network.create(anisotropies, curves, junctions)


def _curve_from_dict(data: Any, index: int) -> Curve:
    if not isinstance(data, dict):
        raise ParseError(f"Curve #{index} must be an object")
    cid = data.get("id")
    where = f"curve '{cid}'" if isinstance(cid, str) else f"curve #{index}"
    for key in ("id", "anisotropy"):
        if not isinstance(data.get(key), str):
            raise ParseError(f"{where.capitalize()} needs a string '{key}'")
    if not isinstance(data.get("closed", False), bool):
        raise ParseError(f"{where.capitalize()} field 'closed' must be a boolean")
    phases = data.get("phases")
    if phases is not None and (not isinstance(phases, list) or len(phases) != 2):
        raise ParseError(f"{where.capitalize()} field 'phases' must be a pair")
    return Curve.create(
        cid,
        data["anisotropy"],
        _points(data.get("points"), where),
        kind=data.get("kind", "polyline"),
        closed=data.get("closed", False),
        start_halfline=_optional_vector(data.get("start_halfline"), where),
        end_halfline=_optional_vector(data.get("end_halfline"), where),
        phases=None if phases is None else tuple(phases),
    )


def _junction_from_dict(data: Any, index: int) -> Junction:
    if not isinstance(data, dict) or not isinstance(data.get("id"), str):
        raise ParseError(f"Junction #{index} must be an object with a string 'id'")
    ends = data.get("ends")
    if not isinstance(ends, list):
        raise ParseError(f"Junction '{data['id']}' needs an 'ends' list")
    for end in ends:
        if not (isinstance(end, list) and len(end) == 2 and isinstance(end[0], str) and end[1] in END_LABELS):
            raise ParseError(f"Junction '{data['id']}' has malformed end {end!r}")
    point = _optional_vector(data.get("point"), f"junction '{data['id']}'")
    if point is None:
        raise ParseError(f"Junction '{data['id']}' needs a 'point'")
    return Junction.create(data["id"], point, ends)


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _points(raw: Any, where: str) -> list[list[float]]:
    if not isinstance(raw, list) or not all(
        isinstance(p, list) and len(p) == 2 and all(_is_number(x) for x in p) for p in raw
    ):
        raise ParseError(f"{where.capitalize()} points must be a list of [x, y] number pairs")
    return raw


def _optional_vector(raw: Any, where: str) -> list[float] | None:
    if raw is None:
        return None
    if not (isinstance(raw, list) and len(raw) == 2 and all(_is_number(x) for x in raw)):
        raise ParseError(f"{where.capitalize()} has a malformed vector {raw!r}")
    return raw


# =============================================================================
# Text and files
# =============================================================================

def dumps(net: Network, indent: int | None = 2) -> str:
    return json.dumps(network_to_dict(net), indent=indent)


def loads(text: str) -> Network:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
    return network_from_dict(data)


def load_network(path: str | Path) -> Network:
    path = Path(path)
    try:
        size = path.stat().st_size
    except OSError as exc:
        raise ParseError(f"Cannot read {path}: {exc.strerror}") from None
    if size > MAX_FILE_SIZE:
        raise ParseError(f"{path} exceeds maximum size ({MAX_FILE_SIZE} bytes)")
    net = loads(path.read_text(encoding="utf-8"))
    logger.debug("loaded %s: %d curves, %d junctions", path, len(net.curves), len(net.junctions))
    return net


def dump_network(net: Network, path: str | Path) -> None:
    Path(path).write_text(dumps(net) + "\n", encoding="utf-8")


__all__ = [
    "anisotropy_to_dict",
    "anisotropy_from_dict",
    "network_to_dict",
    "network_from_dict",
    "dumps",
    "loads",
    "load_network",
    "dump_network",
]
