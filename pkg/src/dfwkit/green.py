"""Harmonic part of a data set from boundary values: a 2D constant-element
boundary element engine for the interior Laplace problem.

Collocation at element midpoints gives

    g_i / 2 = sum_j [ q_j G_ij - g_j H_ij ],

with ``G_ij`` the integral of ``-ln r / 2 pi`` over element ``j`` and
``H_ij`` the integral of its outward normal derivative. The same sums
evaluated at an interior point give the harmonic extension.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pointcloud import FormatError, read_table, write_csv

TWO_PI = 2.0 * math.pi

# 4-point Gauss-Legendre rule on [-1, 1]
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(4)


class DegenerateBoundaryError(ValueError):
    pass


class OutsideDomainError(ValueError):
    pass


class NearBoundaryWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[tuple[float, float], ...]


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = _cross(p2 - p1, q1 - p1)
    d2 = _cross(p2 - p1, q2 - p1)
    d3 = _cross(q2 - q1, p1 - q1)
    d4 = _cross(q2 - q1, p2 - q1)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


@dataclass(frozen=True)
class BoundaryMesh:
    """Closed counterclockwise polyline of straight elements.

    ``endpoints[j]`` holds the start and end vertex of element ``j``.
    """

    endpoints: np.ndarray  # (N, 2, 2)
    midpoints: np.ndarray = field(init=False, repr=False)
    normals: np.ndarray = field(init=False, repr=False)
    lengths: np.ndarray = field(init=False, repr=False)
    closed: bool = field(init=False, default=True)

    def __post_init__(self):
        e = np.asarray(self.endpoints, dtype=float)
        if e.ndim != 3 or e.shape[1:] != (2, 2) or e.shape[0] < 3:
            raise DegenerateBoundaryError("endpoints must be an (N>=3, 2, 2) array")
        d = e[:, 1] - e[:, 0]
        L = np.hypot(d[:, 0], d[:, 1])
        if np.any(L <= 0):
            raise DegenerateBoundaryError("zero-length element")
        gaps = np.linalg.norm(np.roll(e[:, 0], -1, axis=0) - e[:, 1], axis=1)
        closed = bool(np.all(gaps <= 1e-12 * max(1.0, float(L.sum()))))
        if not closed:
            raise DegenerateBoundaryError("elements do not form a closed polyline")
        area = 0.5 * float(np.sum(_cross(e[:, 0], e[:, 1])))
        if area <= 0:
            raise DegenerateBoundaryError("boundary must be counterclockwise with positive area")
        t = d / L[:, None]
        normals = np.column_stack([t[:, 1], -t[:, 0]])
        for name, arr in (("endpoints", e), ("midpoints", 0.5 * (e[:, 0] + e[:, 1])),
                          ("normals", normals), ("lengths", L)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "closed", closed)

    def __len__(self) -> int:
        return self.lengths.size

    @property
    def perimeter(self) -> float:
        return float(self.lengths.sum())

    @property
    def area(self) -> float:
        return 0.5 * float(np.sum(_cross(self.endpoints[:, 0], self.endpoints[:, 1])))

    def closure_defect(self) -> float:
        """``|sum L_j n_j|``, zero for a closed polyline."""
        return float(np.linalg.norm(self.lengths @ self.normals))

    def winding(self, x) -> np.ndarray:
        """Winding number of the boundary around each point of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        a = self.endpoints[None, :, 0, :] - x[:, None, :]
        b = self.endpoints[None, :, 1, :] - x[:, None, :]
        return np.sum(np.arctan2(_cross(a, b), np.sum(a * b, axis=-1)), axis=1) / TWO_PI

    def distance(self, x) -> np.ndarray:
        """Distance from each point to the nearest element."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        a = self.endpoints[:, 0]
        d = self.endpoints[:, 1] - a
        w = x[:, None, :] - a[None]
        s = np.clip(np.sum(w * d, axis=-1) / (self.lengths ** 2), 0.0, 1.0)
        near = a[None] + s[..., None] * d[None]
        return np.min(np.linalg.norm(x[:, None, :] - near, axis=-1), axis=1)

    def to_dict(self) -> dict:
        return {"vertices": [[float(v) for v in p] for p in self.endpoints[:, 0]]}

    @classmethod
    def from_vertices(cls, vertices) -> "BoundaryMesh":
        v = np.asarray(vertices, dtype=float)
        return cls(np.stack([v, np.roll(v, -1, axis=0)], axis=1))


def _split_counts(lengths: np.ndarray, N: int) -> np.ndarray:
    """Elements per side: at least one each, otherwise proportional to length
    (largest-remainder rounding)."""
    k = lengths.size
    extra = N - k
    share = extra * lengths / lengths.sum()
    counts = np.floor(share).astype(int)
    rest = extra - counts.sum()
    order = np.argsort(-(share - counts), kind="stable")
    counts[order[:rest]] += 1
    return counts + 1


def discretize_boundary(shape: Circle | Polygon, N: int) -> BoundaryMesh:
    """Constant-element mesh with ``N`` elements.

    Circles are split into chords of equal arc; polygon sides receive
    elements in proportion to their length (at least one each). Clockwise
    polygons are reoriented.
    """
    if int(N) != N or N < 8:
        raise ValueError("N must be an integer >= 8")
    N = int(N)
    if isinstance(shape, Circle):
        if not shape.radius > 0:
            raise DegenerateBoundaryError("circle radius must be positive")
        phi = TWO_PI * np.arange(N) / N
        v = np.column_stack([np.cos(phi), np.sin(phi)]) * shape.radius + np.asarray(shape.center, dtype=float)
        return BoundaryMesh.from_vertices(v)
    v = np.asarray(shape.vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
        raise DegenerateBoundaryError("polygon needs at least 3 vertices in 2D")
    area = 0.5 * float(np.sum(_cross(v, np.roll(v, -1, axis=0))))
    scale = float(np.max(np.ptp(v, axis=0)))
    if abs(area) <= 1e-12 * max(scale, 1e-300) ** 2:
        raise DegenerateBoundaryError("polygon vertices are collinear")
    if area < 0:
        v = v[::-1]
    k = v.shape[0]
    for i in range(k):
        for j in range(i + 2, k):
            if i == 0 and j == k - 1:
                continue
            if _segments_cross(v[i], v[(i + 1) % k], v[j], v[(j + 1) % k]):
                raise DegenerateBoundaryError("polygon is self-intersecting")
    if N < k:
        raise ValueError(f"N={N} is smaller than the number of polygon sides ({k})")
    w = np.roll(v, -1, axis=0)
    counts = _split_counts(np.linalg.norm(w - v, axis=1), N)
    pts = [v[i] + (w[i] - v[i]) * (np.arange(c) / c)[:, None] for i, c in enumerate(counts)]
    return BoundaryMesh.from_vertices(np.vstack(pts))


# ---------------------------------------------------------------------------
# element integrals


def _log_primitive(s, h):
    """Antiderivative of ``ln(s^2 + h^2)`` in ``s`` (``h >= 0``)."""
    s2 = s * s + h * h
    with np.errstate(divide="ignore", invalid="ignore"):
        logt = np.where(s2 > 0, s * np.log(np.where(s2 > 0, s2, 1.0)), 0.0)
        ang = np.where(h > 0, 2.0 * h * np.arctan(s / np.where(h > 0, h, 1.0)), 0.0)
    return logt - 2.0 * s + ang


def element_integrals(mesh: BoundaryMesh, x, rule: str = "analytic") -> tuple[np.ndarray, np.ndarray]:
    """Single- and double-layer integrals of every element seen from ``x``.

    Returns ``(G, H)`` of shape ``(P, N)``. ``rule="analytic"`` integrates
    straight elements exactly; ``rule="gauss4"`` uses four Gauss points per
    element (the caller must treat the self-element separately).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    a = mesh.endpoints[None, :, 0, :] - x[:, None, :]
    b = mesh.endpoints[None, :, 1, :] - x[:, None, :]
    if rule == "analytic":
        t = (b - a) / mesh.lengths[None, :, None]
        s1 = np.sum(a * t, axis=-1)
        s2 = np.sum(b * t, axis=-1)
        h = np.abs(np.sum(a * mesh.normals[None], axis=-1))
        G = -(_log_primitive(s2, h) - _log_primitive(s1, h)) / (4.0 * math.pi)
        H = -np.arctan2(_cross(a, b), np.sum(a * b, axis=-1)) / TWO_PI
        return G, H
    if rule != "gauss4":
        raise ValueError(f"unknown integration rule {rule!r}")
    G = np.zeros(a.shape[:2])
    H = np.zeros(a.shape[:2])
    for xg, wg in zip(_GAUSS_X, _GAUSS_W):
        y = 0.5 * (1 - xg) * a + 0.5 * (1 + xg) * b
        r2 = np.sum(y * y, axis=-1)
        w = 0.5 * wg * mesh.lengths[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            G += w * (-np.log(r2) / (2.0 * TWO_PI))
            H += w * (-np.sum(y * mesh.normals[None], axis=-1) / (TWO_PI * r2))
    return G, H


def boundary_matrices(mesh: BoundaryMesh, rule: str = "analytic") -> tuple[np.ndarray, np.ndarray]:
    G, H = element_integrals(mesh, mesh.midpoints, rule)
    L = mesh.lengths
    np.fill_diagonal(G, L / TWO_PI * (1.0 - np.log(L / 2.0)))
    np.fill_diagonal(H, 0.0)
    return G, H


@dataclass(frozen=True)
class HarmonicModel:
    """Boundary data of a solved interior Dirichlet problem.

    ``constant`` is the slack of the augmented boundary system (the additive
    constant of the complete fundamental solution); it is a diagnostic and
    stays at discretization-error size.
    """

    mesh: BoundaryMesh
    dirichlet: np.ndarray
    neumann: np.ndarray
    constant: float = 0.0
    rule: str = "analytic"

    def __post_init__(self):
        for name in ("dirichlet", "neumann"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if arr.size != len(self.mesh):
                raise ValueError(f"{name} needs one value per element")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def flux(self) -> float:
        return float(self.neumann @ self.mesh.lengths)

    def evaluate(self, x, check: bool = True) -> np.ndarray:
        return eval_interior(self, x, check=check)

    def to_dict(self) -> dict:
        return {
            "mesh": self.mesh.to_dict(),
            "dirichlet": [float(v) for v in self.dirichlet],
            "neumann": [float(v) for v in self.neumann],
            "constant": float(self.constant),
            "rule": self.rule,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HarmonicModel":
        mesh = BoundaryMesh.from_vertices(data["mesh"]["vertices"])
        return cls(mesh, data["dirichlet"], data["neumann"], float(data.get("constant", 0.0)),
                   data.get("rule", "analytic"))

    def dumps(self) -> str:
        return json.dumps({"format": "dfwkit-harmonic", "version": 1, **self.to_dict()},
                          indent=1, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "HarmonicModel":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if data.get("format") != "dfwkit-harmonic":
            raise FormatError(f"{path}: not a harmonic model file")
        return cls.from_dict(data)


def solve_dirichlet(mesh: BoundaryMesh, g, rule: str = "analytic") -> HarmonicModel:
    """Neumann data for Dirichlet data ``g`` (one value per element).

    The collocation system is augmented with a constant column and the flux
    compatibility row ``sum q_j L_j = 0``; this keeps it nonsingular on
    boundaries of unit logarithmic capacity (e.g. the unit circle), where
    the plain single-layer matrix is singular.
    """
    g = np.asarray(g, dtype=float).reshape(-1)
    N = len(mesh)
    if g.size != N:
        raise ValueError(f"g has {g.size} values for {N} elements")
    if not np.all(np.isfinite(g)):
        raise ValueError("boundary values must be finite")
    G, H = boundary_matrices(mesh, rule)
    A = np.zeros((N + 1, N + 1))
    A[:N, :N] = G
    A[:N, N] = 1.0
    A[N, :N] = mesh.lengths
    rhs = np.zeros(N + 1)
    rhs[:N] = 0.5 * g + H @ g
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateBoundaryError(f"singular boundary system: {exc}") from None
    if not np.all(np.isfinite(sol)):
        raise DegenerateBoundaryError("singular boundary system")
    return HarmonicModel(mesh, g, sol[:N], float(sol[N]), rule)


def eval_interior(model: HarmonicModel, x, check: bool = True) -> np.ndarray:
    """Harmonic extension at interior points ``x`` (shape ``(P, 2)``).

    Points outside raise :class:`OutsideDomainError`; points closer to the
    boundary than one element length emit :class:`NearBoundaryWarning`.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != 2:
        raise ValueError("interior points must be 2-D")
    mesh = model.mesh
    if check and x.shape[0]:
        inside = mesh.winding(x) > 0.5
        if not np.all(inside):
            bad = int(np.argmin(inside))
            raise OutsideDomainError(f"point {bad} {x[bad].tolist()} is outside the boundary")
        near = mesh.distance(x) <= float(mesh.lengths.max())
        if np.any(near):
            warnings.warn(f"{int(near.sum())} point(s) within one element length of the boundary; "
                          "accuracy degrades there", NearBoundaryWarning, stacklevel=2)
    G, H = element_integrals(mesh, x, model.rule)
    return G @ model.neumann - H @ model.dirichlet


def read_boundary_csv(path: str | Path, mesh: BoundaryMesh, tol: float = 1e-9) -> np.ndarray:
    """Read ``elem_index,mid_x,mid_y,g`` and check midpoints against ``mesh``."""
    header, data = read_table(path)
    if header != ["elem_index", "mid_x", "mid_y", "g"]:
        raise FormatError(f"{path}: expected header elem_index,mid_x,mid_y,g")
    idx = data[:, 0].astype(int)
    if sorted(idx.tolist()) != list(range(len(mesh))):
        raise FormatError(f"{path}: element indices must cover 0..{len(mesh) - 1} exactly once")
    g = np.empty(len(mesh))
    g[idx] = data[:, 3]
    off = np.max(np.abs(mesh.midpoints[idx] - data[:, 1:3]))
    if off > tol * max(1.0, float(np.max(np.abs(mesh.midpoints)))):
        raise FormatError(f"{path}: midpoints disagree with the mesh (max offset {off:.3e})")
    return g


def write_boundary_csv(path: str | Path | None, mesh: BoundaryMesh, g) -> str:
    rows = ((j, float(m[0]), float(m[1]), float(v)) for j, (m, v) in enumerate(zip(mesh.midpoints, g)))
    return write_csv(path, ["elem_index", "mid_x", "mid_y", "g"], rows)
