"""
Anisotropies and their duals.

Two representations are supported:

    SmoothAnisotropy     - angle function psi(theta) = phi°(cos theta, sin theta)
                           with analytic first and second derivatives
    CrystallinePolytope  - the Wulff shape B_phi as a convex polygon, vertices
                           stored clockwise

For both, phi° (the dual, evaluated on normals) is the quantity the flows need.
Points of a crystalline Wulff boundary are addressed as BoundaryPoint(edge,
offset): edge k runs clockwise from vertex k to vertex k+1 and the offset is
the arclength from vertex k.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from netflow.errors import InvalidAnisotropyError
from netflow.schema import (
    BOUNDARY_TOLERANCE_FACTOR,
    ELLIPTICITY_SAMPLES,
    FACE_TOLERANCE,
    SMOOTH_FAMILIES,
)

logger = logging.getLogger(__name__)

AngleFunction = Callable[[np.ndarray], np.ndarray]

UNIT_TOLERANCE = 1e-9


def rot_ccw(v: np.ndarray) -> np.ndarray:
    """Rotate vectors (last axis of size 2) by +90 degrees."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def rot_cw(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _finite_vector(xi: np.ndarray, name: str = "xi") -> np.ndarray:
    arr = np.asarray(xi, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValueError(f"{name} must have trailing dimension 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {xi!r}")
    return arr


def _unit_vector(nu: np.ndarray) -> np.ndarray:
    arr = _finite_vector(nu, "nu")
    norms = np.linalg.norm(arr, axis=-1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
        raise ValueError(f"nu must be a unit vector (|nu| = {np.max(np.abs(norms)):.6g})")
    return arr


# =============================================================================
# Smooth anisotropies
# =============================================================================

@dataclass(frozen=True, eq=False)
class SmoothAnisotropy:
    """phi° given through psi(theta) = phi°(cos theta, sin theta).

    The one-homogeneous extension is phi°(xi) = |xi| psi(arg xi); its gradient
    on the unit circle is psi nu + psi' nu_perp and the tangential second
    derivative is psi + psi''.
    """

    psi: AngleFunction
    psi_d1: AngleFunction
    psi_d2: AngleFunction
    even: bool = False
    family: str | None = None
    params: tuple[float, ...] = ()

    @classmethod
    def from_family(cls, family: str, params: list[float] | tuple[float, ...] = ()) -> SmoothAnisotropy:
        """Build a built-in family.

        euclidean  [c]              psi = c
        cosine     [eps, k, c=1]    psi = c (1 + eps cos(k theta))
        elliptic   [a, b, angle=0]  phi°(xi) = sqrt(a^2 xi_1'^2 + b^2 xi_2'^2), xi' = R(-angle) xi
        """
        if family not in SMOOTH_FAMILIES:
            raise InvalidAnisotropyError(
                f"Unknown smooth family '{family}'. Known: {', '.join(sorted(SMOOTH_FAMILIES))}"
            )
        p = tuple(float(v) for v in params)
        if not all(math.isfinite(v) for v in p):
            raise InvalidAnisotropyError(f"Non-finite parameters for '{family}': {p}")

        if family == "euclidean":
            c = p[0] if p else 1.0
            if c <= 0:
                raise InvalidAnisotropyError(f"euclidean scale must be positive, got {c}")
            aniso = cls(
                psi=lambda t, c=c: np.full_like(np.asarray(t, dtype=float), c),
                psi_d1=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                psi_d2=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                even=True, family=family, params=(c,),
            )
        elif family == "cosine":
            if len(p) < 2:
                raise InvalidAnisotropyError("cosine family needs params [eps, k] or [eps, k, c]")
            eps, k = p[0], p[1]
            c = p[2] if len(p) > 2 else 1.0
            if k != int(k) or k < 0:
                raise InvalidAnisotropyError(f"cosine frequency k must be a nonnegative integer, got {k}")
            aniso = cls(
                psi=lambda t, e=eps, k=k, c=c: c * (1.0 + e * np.cos(k * np.asarray(t, dtype=float))),
                psi_d1=lambda t, e=eps, k=k, c=c: -c * e * k * np.sin(k * np.asarray(t, dtype=float)),
                psi_d2=lambda t, e=eps, k=k, c=c: -c * e * k * k * np.cos(k * np.asarray(t, dtype=float)),
                even=(int(k) % 2 == 0), family=family, params=(eps, k, c),
            )
        else:
            if len(p) < 2:
                raise InvalidAnisotropyError("elliptic family needs params [a, b] or [a, b, angle]")
            a, b = p[0], p[1]
            angle = p[2] if len(p) > 2 else 0.0
            if a <= 0 or b <= 0:
                raise InvalidAnisotropyError(f"elliptic semi-axes must be positive, got {a}, {b}")
            mean, half = (a * a + b * b) / 2.0, (a * a - b * b) / 2.0

            def g(t, mean=mean, half=half, angle=angle):
                return mean + half * np.cos(2.0 * (np.asarray(t, dtype=float) - angle))

            def g1(t, half=half, angle=angle):
                return -2.0 * half * np.sin(2.0 * (np.asarray(t, dtype=float) - angle))

            def g2(t, half=half, angle=angle):
                return -4.0 * half * np.cos(2.0 * (np.asarray(t, dtype=float) - angle))

            aniso = cls(
                psi=lambda t: np.sqrt(g(t)),
                psi_d1=lambda t: g1(t) / (2.0 * np.sqrt(g(t))),
                psi_d2=lambda t: g2(t) / (2.0 * np.sqrt(g(t))) - g1(t) ** 2 / (4.0 * g(t) ** 1.5),
                even=True, family=family, params=(a, b, angle),
            )
        aniso.check()
        return aniso

    def dual(self, xi: np.ndarray) -> np.ndarray | float:
        arr = _finite_vector(xi)
        r = np.linalg.norm(arr, axis=-1)
        theta = np.arctan2(arr[..., 1], arr[..., 0])
        value = r * self.psi(theta)
        return float(value) if np.ndim(value) == 0 else value

    def gradient(self, nu: np.ndarray) -> np.ndarray:
        arr = _unit_vector(nu)
        theta = np.arctan2(arr[..., 1], arr[..., 0])
        p = np.asarray(self.psi(theta))[..., None]
        p1 = np.asarray(self.psi_d1(theta))[..., None]
        return p * arr + p1 * rot_ccw(arr)

    def stiffness(self, theta: np.ndarray) -> np.ndarray:
        """psi + psi'' = (Hessian of phi° at nu) tau . tau."""
        return np.asarray(self.psi(theta)) + np.asarray(self.psi_d2(theta))

    def flow_coefficient(self, theta: np.ndarray) -> np.ndarray:
        """phi°(nu) (psi + psi''), the diffusion coefficient of the special flow."""
        return np.asarray(self.psi(theta)) * self.stiffness(theta)

    def ellipticity_margin(self, samples: int = ELLIPTICITY_SAMPLES) -> float:
        theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
        return float(np.min(self.stiffness(theta)))

    def check(self, samples: int = ELLIPTICITY_SAMPLES) -> None:
        """Positivity, ellipticity and derivative consistency on a sampling grid."""
        theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
        values = np.asarray(self.psi(theta), dtype=float)
        if not np.all(np.isfinite(values)) or np.min(values) <= 0.0:
            raise InvalidAnisotropyError(
                f"psi must be positive, min over {samples} samples is {np.min(values):.6g}"
            )
        margin = self.ellipticity_margin(samples)
        if margin <= 0.0:
            raise InvalidAnisotropyError(
                f"Anisotropy is not elliptic: min(psi + psi'') = {margin:.6g} <= 0"
            )
        h = 2.0 * np.pi / samples
        fd1 = (np.roll(values, -1) - np.roll(values, 1)) / (2.0 * h)
        d1 = np.asarray(self.psi_d1(theta), dtype=float)
        scale = max(1.0, float(np.max(np.abs(d1))), float(np.max(values)))
        if np.max(np.abs(fd1 - d1)) > 100.0 * h * h * scale:
            raise InvalidAnisotropyError(
                f"psi_d1 disagrees with finite differences of psi (max gap {np.max(np.abs(fd1 - d1)):.3g})"
            )
        fd2 = (np.roll(d1, -1) - np.roll(d1, 1)) / (2.0 * h)
        d2 = np.asarray(self.psi_d2(theta), dtype=float)
        scale2 = max(scale, float(np.max(np.abs(d2))))
        if np.max(np.abs(fd2 - d2)) > 100.0 * h * h * scale2:
            raise InvalidAnisotropyError(
                f"psi_d2 disagrees with finite differences of psi_d1 (max gap {np.max(np.abs(fd2 - d2)):.3g})"
            )

    def scaled(self, factor: float) -> SmoothAnisotropy:
        if factor <= 0 or not math.isfinite(factor):
            raise InvalidAnisotropyError(f"scale factor must be positive and finite, got {factor}")
        params = self.params
        if self.family == "euclidean":
            params = (params[0] * factor,)
        elif self.family == "cosine":
            params = (params[0], params[1], params[2] * factor)
        elif self.family == "elliptic":
            params = (params[0] * factor, params[1] * factor, params[2])
        return SmoothAnisotropy(
            psi=lambda t, f=factor, p=self.psi: f * p(t),
            psi_d1=lambda t, f=factor, p=self.psi_d1: f * p(t),
            psi_d2=lambda t, f=factor, p=self.psi_d2: f * p(t),
            even=self.even, family=self.family, params=params,
        )

    def __repr__(self) -> str:
        return f"SmoothAnisotropy(family={self.family!r}, params={self.params})"


# =============================================================================
# Crystalline anisotropies
# =============================================================================

@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the Wulff boundary: `offset` along edge `edge` (clockwise)."""

    edge: int
    offset: float


@dataclass(frozen=True, eq=False)
class CrystallinePolytope:
    """B_phi as a convex polygon with the origin strictly inside."""

    vertices: np.ndarray
    even: bool
    orientation: str = "clockwise"
    _normals: np.ndarray = field(repr=False, default=None)
    _support: np.ndarray = field(repr=False, default=None)

    @classmethod
    def create(cls, vertices, even: bool | None = None) -> CrystallinePolytope:
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidAnisotropyError(f"Wulff polygon needs at least 3 vertices, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidAnisotropyError("Wulff polygon vertices must be finite")
        scale = float(np.max(np.linalg.norm(v, axis=1)))
        if scale <= 0.0:
            raise InvalidAnisotropyError("Wulff polygon is degenerate (all vertices at the origin)")

        edges = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(edges, axis=1)
        if np.any(lengths <= FACE_TOLERANCE * scale):
            k = int(np.argmin(lengths))
            raise InvalidAnisotropyError(f"Wulff polygon has repeated vertex at index {k}")

        turn = cross(edges, np.roll(edges, -1, axis=0))
        if np.all(turn > 0):
            v = v[::-1].copy()
            edges = np.roll(v, -1, axis=0) - v
            lengths = np.linalg.norm(edges, axis=1)
            turn = cross(edges, np.roll(edges, -1, axis=0))
        if not np.all(turn < -FACE_TOLERANCE * scale * scale):
            raise InvalidAnisotropyError("Wulff polygon must be strictly convex")

        normals = rot_ccw(edges) / lengths[:, None]
        support = np.einsum("ij,ij->i", normals, v)
        if np.min(support) <= BOUNDARY_TOLERANCE_FACTOR * scale:
            raise InvalidAnisotropyError("Wulff polygon must contain the origin strictly inside")

        n = v.shape[0]
        symmetric = n % 2 == 0 and np.allclose(
            v[: n // 2], -v[n // 2:], atol=1e-12 * scale, rtol=0.0
        )
        if even is None:
            even = bool(symmetric)
        elif even and not symmetric:
            raise InvalidAnisotropyError(
                "Wulff polygon flagged even but is not centrally symmetric vertex-for-vertex"
            )
        return cls(vertices=v, even=bool(even), _normals=normals, _support=support)

    # -- geometry ------------------------------------------------------------

    @property
    def n(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edge_vectors, axis=1)

    @property
    def normals(self) -> np.ndarray:
        """Outward unit normals of the edges."""
        return self._normals

    @property
    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)))

    @property
    def tolerance(self) -> float:
        return BOUNDARY_TOLERANCE_FACTOR * self.diameter

    def edge_direction(self, k: int) -> np.ndarray:
        e = self.edge_vectors[k % self.n]
        return e / np.linalg.norm(e)

    # -- norms ---------------------------------------------------------------

    def dual(self, xi: np.ndarray) -> np.ndarray | float:
        arr = _finite_vector(xi)
        value = np.max(arr @ self.vertices.T, axis=-1)
        return float(value) if np.ndim(value) == 0 else value

    def gauge(self, x: np.ndarray) -> np.ndarray | float:
        """phi(x): the Minkowski gauge of B_phi."""
        arr = _finite_vector(x, "x")
        value = np.max((arr @ self._normals.T) / self._support, axis=-1)
        value = np.maximum(value, 0.0)
        return float(value) if np.ndim(value) == 0 else value

    # -- faces ---------------------------------------------------------------

    def face(self, nu: np.ndarray) -> tuple[int, ...]:
        """Vertex indices of the face of B_phi maximising v . nu: (k,) or (k, k+1)."""
        nu = _finite_vector(nu, "nu")
        scores = self.vertices @ nu
        top = float(np.max(scores))
        tol = FACE_TOLERANCE * max(1.0, self.diameter) * max(1.0, float(np.linalg.norm(nu)))
        idx = [int(i) for i in np.nonzero(scores >= top - tol)[0]]
        if len(idx) == 1:
            return (idx[0],)
        if len(idx) == 2:
            a, b = idx
            if (a + 1) % self.n == b:
                return (a, b)
            if (b + 1) % self.n == a:
                return (b, a)
        # near-ties beyond an edge only happen for |nu| ~ 0
        k = int(np.argmax(scores))
        return (k,)

    def point(self, bp: BoundaryPoint) -> np.ndarray:
        return self.vertices[bp.edge % self.n] + bp.offset * self.edge_direction(bp.edge)

    def locate(self, x: np.ndarray) -> BoundaryPoint:
        """Boundary coordinate of a point on the Wulff boundary."""
        x = _finite_vector(x, "x")
        if abs(self.gauge(x) - 1.0) * self.diameter > 10.0 * self.tolerance:
            raise InvalidAnisotropyError(f"Point {x.tolist()} is not on the Wulff boundary")
        gaps = np.abs(self._normals @ x - self._support)
        k = int(np.argmin(gaps))
        offset = float((x - self.vertices[k]) @ self.edge_direction(k))
        offset = min(max(offset, 0.0), float(self.edge_lengths[k]))
        return BoundaryPoint(edge=k, offset=offset)

    def __repr__(self) -> str:
        return f"CrystallinePolytope(n={self.n}, even={self.even})"


Anisotropy = Union[SmoothAnisotropy, CrystallinePolytope]


# =============================================================================
# Operations
# =============================================================================

def dual_value(aniso: Anisotropy, xi: np.ndarray) -> np.ndarray | float:
    """phi°(xi). One-homogeneous in xi."""
    return aniso.dual(xi)


def primal_value(aniso: CrystallinePolytope, x: np.ndarray) -> np.ndarray | float:
    return aniso.gauge(x)


def dual_gradient(aniso: SmoothAnisotropy, nu: np.ndarray) -> np.ndarray:
    """Cahn-Hoffman vector grad phi°(nu) of a smooth anisotropy at a unit normal."""
    if not isinstance(aniso, SmoothAnisotropy):
        raise InvalidAnisotropyError("dual_gradient needs a smooth anisotropy; use subdifferential_edge")
    return aniso.gradient(nu)


def subdifferential_edge(poly: CrystallinePolytope, nu: np.ndarray) -> np.ndarray:
    """The face of B_phi where v . nu is maximal, as a (2, 2) array of endpoints.

    A single vertex is returned as a degenerate segment (both rows equal).
    """
    nu = _unit_vector(nu)
    face = poly.face(nu)
    if len(face) == 1:
        v = poly.vertices[face[0]]
        return np.stack([v, v])
    return np.stack([poly.vertices[face[0]], poly.vertices[face[1]]])


def regular_polygon(n: int, side: float = 1.0, rotation: float = 0.0) -> CrystallinePolytope:
    """Regular n-gon of the given side with an edge whose outward normal has angle `rotation`."""
    if n < 3:
        raise InvalidAnisotropyError(f"regular polygon needs n >= 3, got {n}")
    if side <= 0:
        raise InvalidAnisotropyError(f"side must be positive, got {side}")
    radius = side / (2.0 * math.sin(math.pi / n))
    angles = rotation + math.pi / n + 2.0 * math.pi * np.arange(n) / n
    vertices = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return CrystallinePolytope.create(vertices[::-1], even=(n % 2 == 0))


def check_triangle_inequality(anisos: list[Anisotropy], samples: int = 360) -> bool:
    """phi_a° + phi_b° >= phi_c° for every ordering of the given anisotropies.

    Violations are logged, never raised.
    """
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    nus = np.column_stack([np.cos(theta), np.sin(theta)])
    values = [np.asarray(a.dual(nus)) for a in anisos]
    ok = True
    for i, j, k in itertools.permutations(range(len(anisos)), 3):
        if i < j and np.any(values[i] + values[j] < values[k] - 1e-12):
            gap = float(np.max(values[k] - values[i] - values[j]))
            logger.warning(
                "Triangle inequality fails: phi%d° + phi%d° < phi%d° by up to %.3g", i, j, k, gap
            )
            ok = False
    return ok


# =============================================================================
# Admissible triplets
# =============================================================================

@dataclass(frozen=True)
class TripletParams:
    n: int
    side: float
    theta_n: float
    delta: float
    c_bar: float
    q_y: float
    q_z: float
    interval_ab: tuple[float, float]


def triplet_params(n: int, l: float = 1.0) -> TripletParams:
    """Admissible-triplet numbers of a regular n-gon of side l (n even, n >= 6)."""
    if int(n) != n or n < 6 or n % 2:
        raise ValueError(f"n must be an even integer >= 6, got {n}")
    if not (l > 0 and math.isfinite(l)):
        raise ValueError(f"side length must be positive, got {l}")
    n = int(n)
    residue = n % 6
    if residue == 0:
        theta = 2.0 * math.pi / 3.0
    elif residue == 2:  # n = 6m - 4
        theta = 2.0 * math.pi / 3.0 * (1.0 + 1.0 / n)
    else:  # n = 6m - 2
        theta = 2.0 * math.pi / 3.0 * (1.0 - 1.0 / n)
    delta = l / (2.0 * (1.0 - math.cos(theta)))
    c_bar = -1.0 / (2.0 * math.cos(theta))
    if residue == 0:
        q_y, q_z, ab = 0.0, l, (0.0, l)
    elif residue == 2:
        q_y, q_z, ab = -c_bar * delta, c_bar * (l - delta), (delta, l - delta)
    else:
        q_y, q_z, ab = l - c_bar * (l - delta), l + c_bar * delta, (delta, l - delta)
    return TripletParams(
        n=n, side=l, theta_n=theta, delta=delta, c_bar=c_bar,
        q_y=q_y, q_z=q_z, interval_ab=ab,
    )


def triplet_points(
    params: TripletParams, x: float, rotation: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The triplet (X, Y, Z) on regular_polygon(n, side, rotation) for offset x.

    The three sides have outward normals at rotation, rotation + theta_n and
    rotation - theta_n. x is measured from the clockwise end of the first side,
    y = c_bar x + q_y from the clockwise end of the second and z = -c_bar x + q_z
    from the counterclockwise end of the third.
    """
    l = params.side
    apothem = l / (2.0 * math.tan(math.pi / params.n))
    y = params.c_bar * x + params.q_y
    z = -params.c_bar * x + params.q_z
    out = []
    for angle, t in (
        (rotation, x - l / 2.0),
        (rotation + params.theta_n, y - l / 2.0),
        (rotation - params.theta_n, l / 2.0 - z),
    ):
        normal = np.array([math.cos(angle), math.sin(angle)])
        out.append(apothem * normal + t * rot_ccw(normal))
    return out[0], out[1], out[2]


@dataclass(frozen=True)
class TripletSolutions:
    """Unordered pairs (Y, Z) completing X to an admissible triplet.

    `pairs` lists isolated solutions. `families` lists segments [Y0, Y1] along
    which every Y works, with Z = -X - Y.
    """

    x: np.ndarray
    pairs: list[tuple[np.ndarray, np.ndarray]]
    families: list[tuple[np.ndarray, np.ndarray]]

    @property
    def unique(self) -> bool:
        return len(self.pairs) == 1 and not self.families

    @property
    def infinite(self) -> bool:
        return bool(self.families)


def _boundary_intersections(
    a: np.ndarray, b: np.ndarray, tol: float
) -> tuple[list[np.ndarray], list[tuple[np.ndarray, np.ndarray]]]:
    """Points and overlap segments where the boundaries of polygons a and b meet."""
    points: list[np.ndarray] = []
    overlaps: list[tuple[np.ndarray, np.ndarray]] = []
    na, nb = len(a), len(b)
    for i in range(na):
        p, r = a[i], a[(i + 1) % na] - a[i]
        for j in range(nb):
            q, s = b[j], b[(j + 1) % nb] - b[j]
            denom = float(cross(r, s))
            qp = q - p
            if abs(denom) <= tol * np.linalg.norm(r) * np.linalg.norm(s):
                if abs(float(cross(qp, r))) > tol * np.linalg.norm(r):
                    continue
                rr = float(r @ r)
                t0 = float(qp @ r) / rr
                t1 = float((qp + s) @ r) / rr
                lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
                if hi - lo > tol:
                    overlaps.append((p + lo * r, p + hi * r))
                elif hi - lo >= -tol:
                    points.append(p + 0.5 * (lo + hi) * r)
                continue
            t = float(cross(qp, s)) / denom
            u = float(cross(qp, r)) / denom
            if -tol <= t <= 1 + tol and -tol <= u <= 1 + tol:
                points.append(p + min(max(t, 0.0), 1.0) * r)
    return points, overlaps


def _on_segment(y: np.ndarray, seg: tuple[np.ndarray, np.ndarray], tol: float) -> bool:
    a, b = seg
    d = b - a
    t = float((y - a) @ d) / float(d @ d)
    return -tol <= t <= 1 + tol and np.linalg.norm(a + min(max(t, 0.0), 1.0) * d - y) <= tol


def solve_triplet(poly: CrystallinePolytope, x: np.ndarray) -> TripletSolutions:
    """All unordered pairs (Y, Z) on the boundary of an even B_phi with X + Y + Z = 0.

    Y must lie on both the boundary of B_phi and that of B_phi - X, so the
    solutions are the boundary intersections of the polygon and its translate.
    """
    if not poly.even:
        raise InvalidAnisotropyError("solve_triplet needs an even (centrally symmetric) Wulff shape")
    x = _finite_vector(x, "X")
    tol = poly.tolerance
    if abs(poly.gauge(x) - 1.0) * poly.diameter > 10.0 * tol:
        raise InvalidAnisotropyError(f"X = {x.tolist()} is not on the Wulff boundary (phi = {poly.gauge(x):.12g})")

    points, overlaps = _boundary_intersections(poly.vertices, poly.vertices - x, tol / poly.diameter)
    scale_tol = 1e3 * tol

    families: list[tuple[np.ndarray, np.ndarray]] = []
    for seg in overlaps:
        mirrored = (-x - seg[0], -x - seg[1])
        if any(
            (_on_segment(mirrored[0], f, scale_tol) and _on_segment(mirrored[1], f, scale_tol))
            or (_on_segment(seg[0], f, scale_tol) and _on_segment(seg[1], f, scale_tol))
            for f in families
        ):
            continue
        families.append(seg)

    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    for y in points:
        if any(_on_segment(y, f, scale_tol) or _on_segment(-x - y, f, scale_tol) for f in families):
            continue
        z = -x - y
        if any(
            (np.linalg.norm(y - p) <= scale_tol and np.linalg.norm(z - q) <= scale_tol)
            or (np.linalg.norm(y - q) <= scale_tol and np.linalg.norm(z - p) <= scale_tol)
            for p, q in pairs
        ):
            continue
        pairs.append((y, z))
    return TripletSolutions(x=x, pairs=pairs, families=families)
