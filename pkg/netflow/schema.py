"""
netflow file schemas v1
=======================

Anisotropy:
    {"kind": "smooth", "family": "cosine", "params": [eps, k, c]}
    {"kind": "crystalline", "vertices": [[x, y], ...], "even": true}

Network:
    {
      "schema": 1,
      "anisotropies": {"<id>": <anisotropy>, ...},
      "curves": [
        {"id": "c1", "anisotropy": "<id>", "kind": "polyline",
         "points": [[x, y], ...], "closed": false,
         "start_halfline": null, "end_halfline": [dx, dy]},
        ...
      ],
      "junctions": [
        {"id": "q1", "point": [x, y], "ends": [["c1", "start"], ["c2", "end"], ...]},
        ...
      ]
    }

Trajectory (JSON lines, one object per line):
    {"type": "header", "schema": 1, "mode": ..., "config": {...}, "network": {...}}
    {"type": "snapshot", "index": k, "t": ..., "curves": {"c1": [[x, y], ...]}, "diagnostics": {...}}
    ...
    {"type": "event", "kind": ..., "t": ..., "subject": ..., "value": ...}      <- optional
    {"type": "summary", "t_final": ..., "steps": ..., "snapshots": ..., "energy": [...]}

Design Decisions:
    - Every top-level object carries "schema": 1; readers reject other versions
    - Junction ends are listed in cyclic order; "start"/"end" refer to the
      curve's own parametrisation
    - Half-lines are an endpoint of a curve plus an outward direction
    - Curve ids double as keys in snapshot payloads
    - Trajectory lines are flushed as they are produced so an interrupted run
      still leaves every completed snapshot on disk
"""

SCHEMA_VERSION = 1
SUPPORTED_SCHEMA_VERSIONS = frozenset({1})

# Anisotropy kinds and smooth families
ANISOTROPY_KINDS = frozenset({"smooth", "crystalline"})
SMOOTH_FAMILIES = frozenset({"euclidean", "cosine", "elliptic"})

# Curve kinds and end labels
CURVE_KINDS = frozenset({"polyline", "sampled"})
END_LABELS = ("start", "end")

# Run modes
MODES = ("smooth", "crystalline")

# Event kinds
EVENT_SEGMENT_COLLAPSE = "segment-collapse"
EVENT_STABILITY_LOSS = "stability-loss"
EVENT_HEIGHT_RADIUS = "height-radius-exceeded"
EVENT_EDGE_COLLAPSE = "edge-collapse"
EVENT_KINDS = frozenset({
    EVENT_SEGMENT_COLLAPSE,
    EVENT_STABILITY_LOSS,
    EVENT_HEIGHT_RADIUS,
    EVENT_EDGE_COLLAPSE,
})

# Geometry tolerances
SNAP_TOLERANCE = 1e-9              # junction reconciliation of curve endpoints
BOUNDARY_TOLERANCE_FACTOR = 1e-9   # "on the Wulff boundary", times diameter(B_phi)
PARALLEL_TOLERANCE = 1e-10         # radians, distance vectors and parallelism
FACE_TOLERANCE = 1e-12             # argmax ties on Wulff vertices
ELLIPTICITY_SAMPLES = 720
HOMOGENEITY_SAMPLES = 64

# Smooth flow defaults
DT_SAFETY = 0.25
TOL_HERRING = 1e-8
TOL_HERRING_INITIAL = 1e-6
RESAMPLE_EVERY = 10
SNAPSHOT_EVERY = 1
NEWTON_DAMPING = 0.5
NEWTON_MAX_ITER = 50
MAX_STEP_HALVINGS = 12
ENERGY_SLACK = 1e-10

# Crystalline flow defaults
CONSTRAINT_TOLERANCE = 1e-9
EPS_LEN_FACTOR = 1e-6
EPS_STAB_FACTOR = 1e-3
WINDOW_SCALE = 10.0
PICARD_MAX_ITER = 200
PICARD_TOLERANCE = 1e-12

# QP
QP_MAX_ITER = 500
QP_FEASIBILITY_TOLERANCE = 1e-12
QP_CURVATURE_TOLERANCE = 1e-12

# Rendering
RENDER_RADIUS = 3.0
RENDER_SIZE = 512
RENDER_MARGIN = 0.05

# Safety limits
MAX_FILE_SIZE = 64 * 1024 * 1024
MAX_CURVES = 10_000
MAX_POINTS_PER_CURVE = 1_000_000

# Environment
ENV_THREADS = "NETFLOW_THREADS"
ENV_LOG_LEVEL = "NETFLOW_LOG_LEVEL"

# CLI exit codes
EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3
