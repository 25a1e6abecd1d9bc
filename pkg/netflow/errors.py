"""
netflow exceptions.

Every error raised on purpose by the package derives from NetflowError and
carries the CLI exit code it maps to. Domain errors also derive from
ValueError and numerical failures from RuntimeError, so callers that only
know the builtin hierarchy still catch them.
"""

from __future__ import annotations

from typing import Any

from netflow.schema import EXIT_DOMAIN, EXIT_IO, EXIT_NUMERICAL


class NetflowError(Exception):
    exit_code = EXIT_DOMAIN


class InvalidAnisotropyError(NetflowError, ValueError):
    """Degenerate, non-convex, non-elliptic or non-finite anisotropy data."""


class NetworkError(NetflowError, ValueError):
    """Invalid topology, incompatible heights, non-parallel inputs."""


class NotPhiRegularError(NetworkError):
    """The network admits no Cahn-Hoffman field."""


class ParseError(NetflowError, ValueError):
    exit_code = EXIT_IO

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class NumericalError(NetflowError, RuntimeError):
    exit_code = EXIT_NUMERICAL


class SingularityEvent(NumericalError):
    """A flow stopped before its horizon. `event` holds kind, time, subject and value."""

    def __init__(self, event: Any) -> None:
        super().__init__(
            f"{event.kind} at t={event.time:.6g} on {event.subject} (value {event.value:.3g})"
        )
        self.event = event
