"""Distance and argument variables consumed by the kernels.

All functions accept either :class:`Point` instances or plain coordinate
arrays. Array inputs broadcast over leading axes, the last axis holding the
coordinates, so the same routines serve scalar calls and kernel assembly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DIM = 16


class DimensionError(ValueError):
    pass


class MissingTimeError(ValueError):
    pass


@dataclass(frozen=True)
class Point:
    coords: np.ndarray
    t: float | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=float))
        if c.ndim != 1 or not 1 <= c.size <= MAX_DIM:
            raise DimensionError(f"Point must have 1..{MAX_DIM} coordinates")
        if not np.all(np.isfinite(c)):
            raise ValueError("Point coordinates must be finite")
        object.__setattr__(self, "coords", c)
        if self.t is not None:
            object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class AnisotropyMatrix:
    """Symmetric positive-definite conductivity matrix with cached inverse."""

    kappa: np.ndarray
    inverse: np.ndarray = field(init=False, repr=False)
    det: float = field(init=False)

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.kappa, dtype=float))
        if k.shape[0] != k.shape[1]:
            raise DimensionError("kappa must be square")
        if not np.allclose(k, k.T, rtol=0.0, atol=1e-12):
            raise ValueError("kappa must be symmetric")
        if np.min(np.linalg.eigvalsh(k)) <= 0:
            raise ValueError("kappa must be positive definite")
        k.setflags(write=False)
        inv = np.linalg.inv(k)
        inv.setflags(write=False)
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "inverse", inv)
        object.__setattr__(self, "det", float(np.linalg.det(k)))

    @classmethod
    def identity(cls, n: int) -> "AnisotropyMatrix":
        return cls(np.eye(n))

    @property
    def dim(self) -> int:
        return self.kappa.shape[0]


def _coords(p) -> np.ndarray:
    if isinstance(p, Point):
        return p.coords
    return np.asarray(p, dtype=float)


def _time(p, given):
    if given is not None:
        return np.asarray(given, dtype=float)
    if isinstance(p, Point) and p.t is not None:
        return p.t
    raise MissingTimeError("time coordinate required")


def difference(a, b) -> np.ndarray:
    a, b = _coords(a), _coords(b)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return a - b


def euclidean(a, b):
    return np.linalg.norm(difference(a, b), axis=-1)


def geodesic(a, b, kappa: AnisotropyMatrix):
    """Anisotropic distance ``sqrt(d^T kappa^{-1} d)`` with ``d = a - b``."""
    d = difference(a, b)
    if d.shape[-1] != kappa.dim:
        raise DimensionError("kappa dimension does not match points")
    q = np.einsum("...i,ij,...j->...", d, kappa.inverse, d)
    return np.sqrt(np.maximum(q, 0.0))


def fractional_distance(a, b, s: float):
    """Minkowski-type distance ``(sum |d_i|^s)^(1/s)`` for ``s > 0``."""
    if not s > 0:
        raise ValueError("fractional_distance: s must be positive")
    d = np.abs(difference(a, b))
    return np.sum(d ** s, axis=-1) ** (1.0 / s)


def pseudo_euclidean(a, b, c: float, ta=None, tb=None):
    """``sqrt(|dx|^2 - c^2 dt^2)``, or ``None`` outside the light cone.

    Array inputs return NaN where the radicand is negative.
    """
    dx = euclidean(a, b)
    dt = _time(a, ta) - _time(b, tb)
    rad = dx * dx - (c * dt) ** 2
    if np.ndim(rad) == 0:
        return float(np.sqrt(rad)) if rad >= 0 else None
    return np.where(rad >= 0, np.sqrt(np.abs(rad)), np.nan)


def wave_cone_argument(a, b, c: float, ta=None, tb=None):
    """Return ``(sqrt(c^2 dt^2 - r^2), inside)``; the value is 0 outside."""
    r = euclidean(a, b)
    dt = _time(a, ta) - _time(b, tb)
    rad = (c * dt) ** 2 - r * r
    inside = rad > 0
    value = np.where(inside, np.sqrt(np.where(inside, rad, 0.0)), 0.0)
    if np.ndim(value) == 0:
        return float(value), bool(inside)
    return value, inside


def direction_projection(a, b, v):
    d = difference(a, b)
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != d.shape[-1]:
        raise DimensionError("direction vector dimension mismatch")
    return np.sum(d * v, axis=-1)
