"""Run configuration shared by the CLI and the flow drivers."""

from __future__ import annotations

import argparse
import os
from dataclasses import asdict, dataclass, field

from netflow.schema import (
    DT_SAFETY,
    ENV_THREADS,
    MODES,
    RENDER_RADIUS,
    RESAMPLE_EVERY,
    SNAPSHOT_EVERY,
    TOL_HERRING,
    TOL_HERRING_INITIAL,
)


def _env_threads() -> int:
    raw = os.environ.get(ENV_THREADS, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{ENV_THREADS} must be a positive integer, got {raw!r}") from None


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a run. T = 0 records the initial snapshot and takes no step.

    `dt` is the fixed step of the crystalline flow and an upper bound on the
    adaptive step of the smooth flow (None: smooth uses the stability bound
    only, crystalline derives a step from the shortest segment).
    """

    mode: str = "smooth"
    T: float = 0.0
    dt: float | None = None
    dt_safety: float = DT_SAFETY
    tol_herring: float = TOL_HERRING
    tol_herring_initial: float = TOL_HERRING_INITIAL
    resample_every: int = RESAMPLE_EVERY
    snapshot_every: int = SNAPSHOT_EVERY
    threads: int = field(default_factory=_env_threads)
    picard_check: bool = False
    events_ok: bool = False
    strict: bool = False
    height_radius: float | None = None
    output: str | None = None
    svg_dir: str | None = None
    render_radius: float = RENDER_RADIUS

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if not self.T >= 0.0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        for name in ("dt_safety", "tol_herring", "tol_herring_initial", "render_radius"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.snapshot_every < 1:
            raise ValueError(f"snapshot_every must be >= 1, got {self.snapshot_every}")
        if self.resample_every < 0:
            raise ValueError(f"resample_every must be >= 0, got {self.resample_every}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.height_radius is not None and not self.height_radius > 0.0:
            raise ValueError(f"height_radius must be > 0, got {self.height_radius}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        values = {}
        for name in cls.__dataclass_fields__:
            value = getattr(args, name, None)
            if value is not None:
                values[name] = value
        return cls(**values)

    def to_dict(self) -> dict:
        return asdict(self)
