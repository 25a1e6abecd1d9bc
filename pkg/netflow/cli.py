"""
netflow CLI - curvature flows of planar networks with triple junctions.

Commands:
  netflow validate   - Check a network file (topology, embeddedness)
  netflow curvature  - Crystalline curvatures, junction offsets, stability report
  netflow evolve     - Run the smooth or crystalline flow, write a JSON-lines trajectory
  netflow svg        - Render a network file or a trajectory snapshot
  netflow energy     - Phi-length of a network

Exit codes: 0 success, 1 domain violation, 2 I/O or parse error,
3 numerical failure or event before the horizon.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from netflow.schema import ENV_LOG_LEVEL, EXIT_DOMAIN, EXIT_IO, EXIT_OK, MODES, RENDER_RADIUS

logger = logging.getLogger(__name__)


def _fail(exc: Exception, code: int | None = None) -> None:
    print(f"Error: {exc}", file=sys.stderr)
    sys.exit(code if code is not None else getattr(exc, "exit_code", EXIT_DOMAIN))


def _load(path: str):
    from netflow.converters import load_network

    return load_network(path)


def _emit(data: dict) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def cmd_validate(args: argparse.Namespace) -> None:
    """Print the validation report; exit 0 iff the network is admissible."""
    from netflow.network import validate

    report = validate(_load(args.path))
    _emit(report.to_dict())
    if not report.valid:
        for v in report.violations:
            print(f"  {v.code}: {v.message}", file=sys.stderr)
        sys.exit(EXIT_DOMAIN)


def cmd_curvature(args: argparse.Namespace) -> None:
    from netflow.crystalline import curvature_report
    from netflow.errors import NetflowError

    net = _load(args.path)
    try:
        report = curvature_report(net, strict=args.strict)
    except NetflowError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        sys.exit(exc.exit_code)
    _emit(report)


def cmd_evolve(args: argparse.Namespace) -> None:
    from netflow.config import RunConfig
    from netflow.errors import SingularityEvent
    from netflow.trajectory import TrajectoryWriter

    try:
        cfg = RunConfig.from_args(args)
    except ValueError as exc:
        _fail(exc, EXIT_DOMAIN)
    net = _load(args.path)
    output = Path(cfg.output or Path(args.path).with_suffix(".jsonl").name)

    on_snapshot = None
    if cfg.svg_dir:
        from netflow.render import write_svg

        svg_dir = Path(cfg.svg_dir)
        svg_dir.mkdir(parents=True, exist_ok=True)

        def on_snapshot(snap) -> None:
            write_svg(snap.network, svg_dir / f"snapshot_{snap.index:05d}.svg", radius=cfg.render_radius)

    with TrajectoryWriter(output, mode=cfg.mode, config=cfg.to_dict(), network=net) as writer:
        if cfg.mode == "smooth":
            from netflow.smooth_flow import run_flow

            traj = run_flow(net, cfg.T, cfg, writer=writer, on_snapshot=on_snapshot)
        else:
            from netflow.poly_flow import run_poly_flow

            traj = run_poly_flow(net, cfg.T, cfg, writer=writer, on_snapshot=on_snapshot)
        writer.close(traj)

    summary = traj.summary()
    summary["output"] = str(output)
    _emit(summary)
    if traj.event is not None and not cfg.events_ok:
        raise SingularityEvent(traj.event)


def _snapshot_network(path: str, index: int):
    """Header network with the curve coordinates of snapshot `index`."""
    import numpy as np

    from netflow.converters import network_from_dict
    from netflow.errors import ParseError
    from netflow.trajectory import read_trajectory

    data = read_trajectory(path)
    snapshots = data["snapshots"]
    if not -len(snapshots) <= index < len(snapshots):
        raise ParseError(f"Trajectory {path} has {len(snapshots)} snapshots, no index {index}")
    base = network_from_dict(data["header"]["network"])
    coords = snapshots[index]["curves"]
    curves = [dataclasses.replace(c, points=np.array(coords[c.id], dtype=float)) for c in base.curves]
    points = {}
    for j in base.junctions:
        cid, end = j.ends[0]
        points[j.id] = np.array(coords[cid][0 if end == "start" else -1], dtype=float)
    return base.with_curves(curves, points)


def cmd_svg(args: argparse.Namespace) -> None:
    from netflow.render import write_svg

    if args.snapshot is not None:
        net = _snapshot_network(args.path, args.snapshot)
    else:
        net = _load(args.path)
    field = None
    if args.arrows:
        from netflow.crystalline import min_field

        field, _ = min_field(net)
    output = args.output or str(Path(args.path).with_suffix(".svg").name)
    nbytes = write_svg(net, output, radius=args.radius, field=field, wulff=args.wulff)
    print(f"Wrote {output} ({nbytes} bytes)")


def cmd_energy(args: argparse.Namespace) -> None:
    from netflow.network import default_window, phi_length

    net = _load(args.path)
    window = None
    if not net.bounded:
        center, radius = default_window(net)
        window = (center, args.window if args.window is not None else radius)
    out = {"energy": phi_length(net, window=window)}
    if window is not None:
        out["window"] = {"center": window[0].tolist(), "radius": window[1]}
    _emit(out)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, default=None, help="Flow to run (default: smooth)")
    p.add_argument("--T", dest="T", type=float, default=None, help="Horizon (0 records the initial snapshot only)")
    p.add_argument("--dt", type=float, default=None, help="Crystalline step / smooth step cap")
    p.add_argument("--dt-safety", dest="dt_safety", type=float, default=None)
    p.add_argument("--tol-herring", dest="tol_herring", type=float, default=None)
    p.add_argument("--tol-herring-initial", dest="tol_herring_initial", type=float, default=None)
    p.add_argument("--resample-every", dest="resample_every", type=int, default=None)
    p.add_argument("--snapshot-every", dest="snapshot_every", type=int, default=None)
    p.add_argument("--threads", type=int, default=None, help="Worker threads (default: $NETFLOW_THREADS or 1)")
    p.add_argument("--picard-check", dest="picard_check", action="store_true",
                   help="Cross-check the crystalline run by Picard iteration")
    p.add_argument("--events-ok", dest="events_ok", action="store_true",
                   help="Exit 0 when the flow stops on a singularity event")
    p.add_argument("--strict", action="store_true", help="Fail on non-unique Cahn-Hoffman minimizers")
    p.add_argument("--height-radius", dest="height_radius", type=float, default=None)
    p.add_argument("-o", "--output", default=None, help="Trajectory path (default: <network>.jsonl)")
    p.add_argument("--svg-dir", dest="svg_dir", default=None, help="Write one SVG per snapshot here")
    p.add_argument("--render-radius", dest="render_radius", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    from netflow import __version__

    parser = argparse.ArgumentParser(
        prog="netflow",
        description="Curvature flows of planar networks with triple junctions",
    )
    parser.add_argument("--version", action="version", version=f"netflow {__version__}")
    parser.add_argument("--log-level", dest="log_level", default=None,
                        help=f"Logging level (default: ${ENV_LOG_LEVEL} or WARNING)")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("validate", help="Check a network file")
    p.add_argument("path")

    p = sub.add_parser("curvature", help="Crystalline curvature report as JSON")
    p.add_argument("path")
    p.add_argument("--strict", action="store_true", help="Fail on non-unique minimizers")

    p = sub.add_parser("evolve", help="Run a flow and write a JSON-lines trajectory")
    p.add_argument("path")
    _add_run_flags(p)

    p = sub.add_parser("svg", help="Render a network or trajectory snapshot as SVG")
    p.add_argument("path", help="Network JSON, or a trajectory with --snapshot")
    p.add_argument("--snapshot", type=int, default=None, help="Snapshot index in a trajectory file")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--radius", type=float, default=RENDER_RADIUS, help="Half-line truncation radius")
    p.add_argument("--wulff", default=None, help="Anisotropy id to draw as a Wulff inset")
    p.add_argument("--arrows", action="store_true", help="Draw Cahn-Hoffman vectors (crystalline)")

    p = sub.add_parser("energy", help="Phi-length of a network")
    p.add_argument("path")
    p.add_argument("--window", type=float, default=None, help="Window radius for unbounded networks")
    return parser


def main(argv: list[str] | None = None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = (args.log_level or os.environ.get(ENV_LOG_LEVEL) or "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    if not args.command:
        parser.print_help()
        sys.exit(EXIT_OK)

    commands = {
        "validate": cmd_validate,
        "curvature": cmd_curvature,
        "evolve": cmd_evolve,
        "svg": cmd_svg,
        "energy": cmd_energy,
    }

    from netflow.errors import NetflowError

    try:
        commands[args.command](args)
    except NetflowError as exc:
        _fail(exc)
    except OSError as exc:
        _fail(exc, EXIT_IO)
    except ValueError as exc:
        _fail(exc, EXIT_DOMAIN)


if __name__ == "__main__":
    main()
