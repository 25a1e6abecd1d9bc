"""
Small dense convex quadratic programs.

    minimize   1/2 x^T Q x + c^T x
    subject to G x <= h

Q is symmetric positive semidefinite. The feasible set is assumed bounded (it
always is for Cahn-Hoffman offsets, which live in boxes), so directions of
zero curvature are followed until a constraint blocks them.

Usage:
    x0 = feasible_point(G, h)
    result = ActiveSetSolver().solve(Q, c, G, h, x0)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from netflow.errors import NumericalError
from netflow.schema import QP_CURVATURE_TOLERANCE, QP_FEASIBILITY_TOLERANCE, QP_MAX_ITER

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QPResult:
    x: np.ndarray
    value: float
    active: tuple[int, ...]
    multipliers: np.ndarray
    iterations: int
    unique: bool


def feasible_point(G: np.ndarray, h: np.ndarray, tol: float = QP_FEASIBILITY_TOLERANCE) -> np.ndarray | None:
    """Chebyshev centre of {x : G x <= h}, or None when the set is empty."""
    m, n = G.shape
    if n == 0:
        return np.zeros(0) if np.all(h >= -tol) else None
    norms = np.linalg.norm(G, axis=1)
    # variables (x, r); maximise r
    A = np.hstack([G, norms[:, None]])
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    bounds = [(None, None)] * n + [(0.0, None)]
    res = linprog(cost, A_ub=A, b_ub=h + tol, bounds=bounds, method="highs")
    if res.status == 3:
        # unbounded radius only happens with no effective rows
        res = linprog(cost, A_ub=A, b_ub=h + tol, bounds=[(None, None)] * n + [(0.0, 1.0)], method="highs")
    if res.status != 0:
        return None
    x = np.asarray(res.x[:n], dtype=float)
    if np.any(G @ x - h > 10.0 * tol * max(1.0, float(np.max(np.abs(h))) if len(h) else 1.0)):
        return None
    return x


class ActiveSetSolver:
    """Primal active-set method working in the null space of the active rows."""

    def __init__(
        self,
        max_iter: int = QP_MAX_ITER,
        tol: float = QP_FEASIBILITY_TOLERANCE,
        curvature_tol: float = QP_CURVATURE_TOLERANCE,
    ) -> None:
        self.max_iter = max_iter
        self.tol = tol
        self.curvature_tol = curvature_tol

    def _reduced(self, Q: np.ndarray, G_w: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        Z = null_space(G_w) if len(G_w) else np.eye(n)
        if Z.shape[1] == 0:
            return Z, np.zeros(0), np.zeros((0, 0))
        H = Z.T @ Q @ Z
        w, V = np.linalg.eigh(0.5 * (H + H.T))
        return Z, w, V

    def solve(self, Q, c, G, h, x0) -> QPResult:
        Q = np.asarray(Q, dtype=float)
        c = np.asarray(c, dtype=float)
        G = np.asarray(G, dtype=float).reshape(-1, len(c))
        h = np.asarray(h, dtype=float)
        x = np.array(x0, dtype=float)
        n = len(c)
        scale = max(1.0, float(np.max(np.abs(Q))) if Q.size else 1.0)

        if n == 0:
            return QPResult(x=x, value=0.0, active=(), multipliers=np.zeros(0), iterations=0, unique=True)

        slack = h - G @ x
        if np.any(slack < -10.0 * self.tol * max(1.0, float(np.max(np.abs(h))))):
            raise NumericalError(f"QP start point is infeasible (max violation {-np.min(slack):.3g})")
        active: list[int] = [int(i) for i in np.nonzero(slack <= self.tol)[0]]
        active = self._independent(G, active)

        for iteration in range(1, self.max_iter + 1):
            g = Q @ x + c
            G_w = G[active] if active else np.zeros((0, n))
            Z, w, V = self._reduced(Q, G_w, n)
            step = np.zeros(n)
            unbounded = False
            if Z.shape[1]:
                gr = Z.T @ g
                flat = w <= self.curvature_tol * scale
                along_flat = V[:, flat].T @ gr if np.any(flat) else np.zeros(0)
                if along_flat.size and np.linalg.norm(along_flat) > self.tol * max(1.0, np.linalg.norm(g)):
                    step = -Z @ (V[:, flat] @ along_flat)
                    unbounded = True
                else:
                    curved = ~flat
                    coeffs = (V[:, curved].T @ gr) / w[curved]
                    step = -Z @ (V[:, curved] @ coeffs)

            if np.linalg.norm(step) <= self.tol * max(1.0, np.linalg.norm(x)):
                if not active:
                    return self._finish(Q, c, G, x, active, np.zeros(0), iteration)
                mu, *_ = np.linalg.lstsq(G_w.T, -g, rcond=None)
                worst = int(np.argmin(mu))
                if mu[worst] >= -self.tol * max(1.0, np.linalg.norm(g)):
                    return self._finish(Q, c, G, x, active, mu, iteration)
                logger.debug("qp iter %d: release constraint %d (mu=%.3g)", iteration, active[worst], mu[worst])
                active.pop(worst)
                continue

            alpha = np.inf if unbounded else 1.0
            blocking = None
            Gp = G @ step
            for i in range(len(h)):
                if i in active or Gp[i] <= self.tol * np.linalg.norm(step):
                    continue
                ratio = max(0.0, (h[i] - G[i] @ x) / Gp[i])
                if ratio < alpha:
                    alpha, blocking = ratio, i
            if not np.isfinite(alpha):
                raise NumericalError("QP is unbounded along a direction of zero curvature")
            x = x + alpha * step
            if blocking is not None:
                logger.debug("qp iter %d: constraint %d becomes active", iteration, blocking)
                active = self._independent(G, active + [blocking])
        raise NumericalError(f"Active-set solver did not converge in {self.max_iter} iterations")

    def _independent(self, G: np.ndarray, rows: list[int]) -> list[int]:
        kept: list[int] = []
        for i in rows:
            trial = kept + [i]
            if np.linalg.matrix_rank(G[trial], tol=1e-10) == len(trial):
                kept = trial
        return kept

    def _finish(self, Q, c, G, x, active, mu, iterations) -> QPResult:
        n = len(c)
        strongly_active = [i for i, m in zip(active, mu) if m > self.tol] if len(mu) else []
        G_w = G[strongly_active] if strongly_active else np.zeros((0, n))
        Z, w, _ = self._reduced(Q, G_w, n)
        scale = max(1.0, float(np.max(np.abs(Q))) if Q.size else 1.0)
        unique = Z.shape[1] == 0 or float(np.min(w)) > self.curvature_tol * scale
        value = float(0.5 * x @ Q @ x + c @ x)
        return QPResult(
            x=x, value=value, active=tuple(active), multipliers=np.asarray(mu, dtype=float),
            iterations=iterations, unique=unique,
        )
