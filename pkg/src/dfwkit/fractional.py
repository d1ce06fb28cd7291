"""Discrete Laplacians, their fractional matrix powers, power-law attenuation
fits, and two small scalar helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

MAX_UNKNOWNS = 4096


@dataclass(frozen=True)
class GridOperator:
    """Dirichlet ``-lap`` on a uniform grid with its cached eigensystem."""

    A: np.ndarray
    grid_shape: tuple[int, ...]
    h: float
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, float(np.max(np.abs(A)))):
            raise ValueError("A must be symmetric")
        w, V = np.linalg.eigh(A)
        if w[0] <= 0:
            raise ValueError("A must be positive definite")
        for name, arr in (("A", A), ("eigenvalues", w), ("eigenvectors", V)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.A.shape[0]


def _second_difference(n: int, h: float) -> sp.csr_matrix:
    return sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) / (h * h)


def build_discrete_laplacian(dim: int, n_per_side: int, h: float) -> GridOperator:
    """Second-difference Dirichlet Laplacian (negated, so SPD) on an
    ``n_per_side``-point interior grid in 1-D or 2-D."""
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if int(n_per_side) != n_per_side or n_per_side < 3:
        raise ValueError("n_per_side must be an integer >= 3")
    if not h > 0:
        raise ValueError("h must be positive")
    n = int(n_per_side)
    if n ** dim > MAX_UNKNOWNS:
        raise ValueError(f"grid too large for dense eigendecomposition ({n ** dim} > {MAX_UNKNOWNS})")
    T = _second_difference(n, h)
    if dim == 1:
        A = T
    else:
        I = sp.identity(n)
        A = sp.kron(T, I) + sp.kron(I, T)
    return GridOperator(A.toarray(), (n,) * dim, float(h))


def _check_y(y: float, allow_zero: bool = True) -> float:
    y = float(y)
    lo_ok = y >= 0 if allow_zero else y > 0
    if not (lo_ok and y <= 2):
        raise ValueError(f"fractional order y={y} outside {'[0, 2]' if allow_zero else '(0, 2]'}")
    return y


def matrix_fractional_power(op: GridOperator, y: float) -> np.ndarray:
    """``A^(y/2) = V diag(lambda^(y/2)) V^T`` for ``y`` in [0, 2]."""
    y = _check_y(y)
    V = op.eigenvectors
    return (V * op.eigenvalues ** (y / 2.0)) @ V.T


def apply_fractional_laplacian(op: GridOperator, y: float, p) -> np.ndarray:
    """``A^(y/2) p`` for ``y`` in (0, 2]; ``p`` may be flat or grid-shaped."""
    y = _check_y(y, allow_zero=False)
    p = np.asarray(p, dtype=float)
    shape = p.shape
    flat = p.reshape(-1)
    if flat.size != op.size:
        raise ValueError(f"vector of size {flat.size} does not match grid of size {op.size}")
    V = op.eigenvectors
    out = V @ (op.eigenvalues ** (y / 2.0) * (V.T @ flat))
    return out.reshape(shape)


class PowerLawFit(NamedTuple):
    alpha0: float
    y: float
    rms_log_residual: float
    out_of_range: bool  # y outside [0, 2]


def fit_power_law(omega, alpha) -> PowerLawFit:
    """Least-squares fit of ``alpha = alpha0 omega^y`` in log-log space."""
    w = np.asarray(omega, dtype=float).reshape(-1)
    a = np.asarray(alpha, dtype=float).reshape(-1)
    if w.size != a.size:
        raise ValueError("omega and alpha must have equal length")
    if np.any(w <= 0) or np.any(a <= 0):
        raise ValueError("power-law samples must be positive")
    if np.unique(w).size < 2:
        raise ValueError("need at least two distinct omega values")
    X = np.column_stack([np.ones(w.size), np.log(w)])
    coef, *_ = np.linalg.lstsq(X, np.log(a), rcond=None)
    resid = np.log(a) - X @ coef
    y = float(coef[1])
    return PowerLawFit(math.exp(coef[0]), y, float(np.sqrt(np.mean(resid ** 2))), not 0.0 <= y <= 2.0)


def hausdorff_dimension(N: float, q: float) -> float:
    """Similarity dimension ``ln N / ln q``."""
    if not (N > 0 and q > 0):
        raise ValueError("N and q must be positive")
    if q == 1:
        raise ValueError("q must differ from 1")
    return math.log(N) / math.log(q)


def peclet(D: float, C_p: float, mu: float, rho: float, k: float) -> float:
    """``D C_p mu rho / k``."""
    if not k > 0:
        raise ValueError("conductivity k must be positive")
    if not (D > 0 and C_p > 0 and mu > 0 and rho > 0):
        raise ValueError("D, C_p, mu and rho must be positive")
    return D * C_p * mu * rho / k
