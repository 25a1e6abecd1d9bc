"""
netflow trajectories - in-memory runs and the JSON-lines stream on disk.

Stream layout (one JSON object per line):

    {"type": "header", ...}        <- written on open
    {"type": "snapshot", ...}      <- appended and flushed as the run produces them
    {"type": "event", ...}         <- at most one, when a flow stops early
    {"type": "summary", ...}       <- written on close

Every line is flushed the moment it is written, so a run that dies half way
still leaves a readable prefix: the reader accepts a missing summary.

Usage:
    with TrajectoryWriter("run.jsonl", mode="smooth", config=cfg.to_dict(), network=net) as w:
        trajectory = run_flow(net, T, cfg, writer=w)
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from netflow.errors import ParseError
from netflow.network import Network
from netflow.schema import MAX_FILE_SIZE, SCHEMA_VERSION, SUPPORTED_SCHEMA_VERSIONS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlowEvent:
    """Why a flow stopped before its horizon. `time` is the first grid time the trigger held."""

    kind: str
    time: float
    subject: str
    value: float

    def to_dict(self) -> dict:
        return {"type": "event", "kind": self.kind, "t": self.time, "subject": self.subject, "value": _finite(self.value)}


@dataclass(frozen=True, eq=False)
class Snapshot:
    index: int
    t: float
    network: Network
    diagnostics: dict[str, Any]
    heights: dict[str, float] | None = None

    def to_dict(self) -> dict:
        out = {
            "type": "snapshot",
            "index": self.index,
            "t": self.t,
            "curves": {c.id: c.points.tolist() for c in self.network.curves},
            "diagnostics": _jsonable(self.diagnostics),
        }
        if self.heights is not None:
            out["heights"] = dict(self.heights)
        return out


@dataclass(eq=False)
class Trajectory:
    mode: str
    snapshots: list[Snapshot] = field(default_factory=list)
    events: list[FlowEvent] = field(default_factory=list)
    steps: int = 0
    t_final: float = 0.0

    @property
    def energies(self) -> list[float]:
        return [float(s.diagnostics["energy"]) for s in self.snapshots]

    @property
    def event(self) -> FlowEvent | None:
        return self.events[0] if self.events else None

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    def summary(self) -> dict:
        return {
            "type": "summary",
            "t_final": self.t_final,
            "steps": self.steps,
            "snapshots": len(self.snapshots),
            "energy": self.energies,
            "event": None if self.event is None else self.event.to_dict(),
        }


def _finite(value: float) -> float | None:
    return float(value) if math.isfinite(value) else None


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, float):
        return _finite(obj)
    return obj


class TrajectoryWriter:
    """Streaming JSON-lines writer. Each record is flushed as soon as it is written."""

    def __init__(self, path: str | Path, mode: str, config: dict | None = None, network: Network | None = None) -> None:
        from netflow.converters import network_to_dict

        self.path = Path(path)
        self._closed = False
        self.snapshots = 0
        fd = os.open(str(self.path), os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o644)
        self._handle = os.fdopen(fd, "w", encoding="utf-8")
        header = {
            "type": "header",
            "schema": SCHEMA_VERSION,
            "mode": mode,
            "config": _jsonable(config or {}),
            "network": None if network is None else network_to_dict(network),
        }
        self._write(header)

    def _write(self, record: dict) -> None:
        if self._closed:
            raise ValueError("Cannot write to a closed trajectory")
        self._handle.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._handle.flush()

    def snapshot(self, snap: Snapshot) -> None:
        self._write(snap.to_dict())
        self.snapshots += 1

    def event(self, event: FlowEvent) -> None:
        self._write(event.to_dict())

    def close(self, trajectory: Trajectory | None = None) -> None:
        if self._closed:
            return
        if trajectory is not None:
            self._write(trajectory.summary())
        self._handle.close()
        self._closed = True
        logger.debug("trajectory %s closed after %d snapshots", self.path, self.snapshots)

    def __enter__(self) -> TrajectoryWriter:
        return self

    def __exit__(self, *exc) -> None:
        # summary is written by close(trajectory); an exception leaves the prefix only
        self.close()


def read_trajectory(path: str | Path) -> dict:
    """Parse a trajectory stream into {"header", "snapshots", "events", "summary"}."""
    path = Path(path)
    if path.stat().st_size > MAX_FILE_SIZE:
        raise ParseError(f"Trajectory exceeds maximum size ({MAX_FILE_SIZE} bytes)")
    out: dict[str, Any] = {"header": None, "snapshots": [], "events": [], "summary": None}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"Malformed trajectory record: {exc.msg}", lineno, exc.colno) from None
            kind = record.get("type") if isinstance(record, dict) else None
            if lineno == 1:
                if kind != "header":
                    raise ParseError("Trajectory must start with a header record", 1, 1)
                if record.get("schema") not in SUPPORTED_SCHEMA_VERSIONS:
                    raise ParseError(f"Unsupported trajectory schema {record.get('schema')!r}", 1, 1)
                out["header"] = record
            elif kind == "snapshot":
                out["snapshots"].append(record)
            elif kind == "event":
                out["events"].append(record)
            elif kind == "summary":
                out["summary"] = record
            else:
                raise ParseError(f"Unknown trajectory record type {kind!r}", lineno, 1)
    if out["header"] is None:
        raise ParseError("Trajectory is empty")
    return out
