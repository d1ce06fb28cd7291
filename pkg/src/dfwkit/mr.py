"""Multiple-reciprocity tools.

* :func:`mr_decompose` peels data into a ladder of high-order Laplace fits,
  one order per stage.
* :func:`apply_composite_operator` applies products of constant-coefficient
  operators (Laplace, Helmholtz, modified Helmholtz, convection-diffusion)
  by fourth-order central differences.
* :func:`mr_particular_solution` builds a Helmholtz particular solution from
  the Helmholtz kernel ladder, using ``(lap + lam^2) u_{m+1} = u_m / lam``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .green import HarmonicModel
from .kernels import Family, Kind, KernelSpec
from .pointcloud import PointCloud, write_csv
from .series import SeriesModel, assemble, fit, rms, solve_regularized

STAGNATION_GROWTH = 1.10


class LadderFamily(str, Enum):
    LAPLACE_2D = "LAPLACE_2D"
    LAPLACE_3D = "LAPLACE_3D"

    @property
    def dim(self) -> int:
        return 2 if self is LadderFamily.LAPLACE_2D else 3


class Termination(str, Enum):
    TOL_REACHED = "TOL_REACHED"
    MAX_ORDER = "MAX_ORDER"
    STAGNATION = "STAGNATION"


@dataclass(frozen=True)
class Stage:
    m: int
    model: SeriesModel
    residual_rms: float
    n_thresholded: int = 0

    @property
    def n_terms(self) -> int:
        return int(np.count_nonzero(self.model.coefficients))


@dataclass(frozen=True)
class MRLadder:
    """Stagewise decomposition ``f ~ f0 + sum_m (order-m fit)``.

    ``initial_residual_rms`` is the residual before any stage (stage 0).
    """

    stages: tuple[Stage, ...]
    initial_residual_rms: float
    terminated_reason: Termination
    base_harmonic: HarmonicModel | None = None
    rejected_orders: tuple[int, ...] = ()

    @property
    def residuals(self) -> list[float]:
        return [self.initial_residual_rms] + [s.residual_rms for s in self.stages]

    @property
    def final_residual_rms(self) -> float:
        return self.residuals[-1]

    def evaluate(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0])
        if self.base_harmonic is not None:
            out += self.base_harmonic.evaluate(x)
        for s in self.stages:
            out += s.model.evaluate(x)
        return out

    def report_rows(self) -> list[tuple]:
        rows = [(0, float(self.initial_residual_rms), 0, 0)]
        rows += [(s.m, float(s.residual_rms), s.n_terms, s.n_thresholded) for s in self.stages]
        return rows

    def write_report(self, path: str | Path | None) -> str:
        return write_csv(path, ["stage", "residual_rms", "n_terms", "thresholded"], self.report_rows())


def ladder_specs(family: LadderFamily | str, m: int, count: int) -> list[KernelSpec]:
    family = LadderFamily(family)
    return [KernelSpec(Family.LAPLACE, n=family.dim, m=m)] * count


def mr_decompose(points: PointCloud, family: LadderFamily | str, centers, M_max: int, tol: float,
                 *, regularization: float = 0.0, threshold: float = 0.0,
                 base_harmonic: HarmonicModel | None = None) -> MRLadder:
    """Greedy stagewise fit of ``points.values`` with order-m Laplace kernels.

    Stage ``m`` (``m = 1 .. M_max``) least-squares fits the current residual
    with order-``m`` kernels at ``centers`` and subtracts the fit. The run
    stops when the residual RMS drops below ``tol`` (absolute), after
    ``M_max`` stages, or on stagnation: a stage that raises the residual by
    more than 10% is discarded and ends the run; a smaller increase
    discards the stage and moves on to the next order.
    """
    family = LadderFamily(family)
    if points.values is None:
        raise ValueError("mr_decompose requires point values")
    if points.dim != family.dim:
        raise ValueError(f"{family.value} needs {family.dim}-D points, got {points.dim}-D")
    if M_max < 0:
        raise ValueError("M_max must be non-negative")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    ctr = centers if isinstance(centers, PointCloud) else PointCloud(centers)
    residual = np.array(points.values, dtype=float)
    if base_harmonic is not None:
        if family is not LadderFamily.LAPLACE_2D:
            raise ValueError("a harmonic base is available in 2-D only")
        residual = residual - base_harmonic.evaluate(points.coords)
    current = rms(residual)
    initial = current
    stages: list[Stage] = []
    rejected: list[int] = []
    reason = Termination.MAX_ORDER
    if current <= tol:
        return MRLadder((), initial, Termination.TOL_REACHED, base_harmonic)
    for m in range(1, M_max + 1):
        model = fit(points.with_values(residual), ctr, ladder_specs(family, m, len(ctr)),
                    regularization, threshold)
        trial = residual - assemble(points, ctr, model.specs) @ model.coefficients
        new = rms(trial)
        if new > current:
            if new > STAGNATION_GROWTH * current:
                reason = Termination.STAGNATION
                break
            rejected.append(m)
            continue
        residual, current = trial, new
        stages.append(Stage(m, model, new, model.fit_report.n_thresholded))
        if current <= tol:
            reason = Termination.TOL_REACHED
            break
    return MRLadder(tuple(stages), initial, reason, base_harmonic, tuple(rejected))


def joint_fit(points: PointCloud, family: LadderFamily | str, centers, orders: Sequence[int],
              regularization: float = 0.0) -> SeriesModel:
    """Single least-squares fit over the stacked dictionary of all ``orders``.

    This is the joint optimum that the stagewise ladder can at best match.
    """
    ctr = centers if isinstance(centers, PointCloud) else PointCloud(centers)
    coords = np.vstack([ctr.coords] * len(orders))
    specs = [s for m in orders for s in ladder_specs(family, m, len(ctr))]
    return fit(points, PointCloud(coords), specs, regularization)


# ---------------------------------------------------------------------------
# composite operators on grids


class FactorKind(str, Enum):
    LAPLACIAN = "LAPLACIAN"
    HELMHOLTZ = "HELMHOLTZ"
    MOD_HELMHOLTZ = "MOD_HELMHOLTZ"
    CONV_DIFF = "CONV_DIFF"


@dataclass(frozen=True)
class Factor:
    """One operator factor.

    LAPLACIAN: ``lap``; HELMHOLTZ: ``lap + lam^2``; MOD_HELMHOLTZ:
    ``lap - mu^2``; CONV_DIFF: ``D lap + v . grad - k``.
    """

    kind: FactorKind
    param: float = 0.0
    D: float = 1.0
    v: tuple[float, ...] | None = None
    k: float = 0.0

    @classmethod
    def laplacian(cls) -> "Factor":
        return cls(FactorKind.LAPLACIAN)

    @classmethod
    def helmholtz(cls, lam: float) -> "Factor":
        return cls(FactorKind.HELMHOLTZ, float(lam))

    @classmethod
    def mod_helmholtz(cls, mu: float) -> "Factor":
        return cls(FactorKind.MOD_HELMHOLTZ, float(mu))

    @classmethod
    def conv_diff(cls, D: float, v, k: float) -> "Factor":
        return cls(FactorKind.CONV_DIFF, D=float(D), v=tuple(float(x) for x in np.atleast_1d(v)), k=float(k))

    @classmethod
    def parse(cls, text: str) -> "Factor":
        """``LAPLACIAN``, ``HELMHOLTZ:1.5``, ``MOD_HELMHOLTZ:2`` or
        ``CONV_DIFF:D:v1;v2:k``."""
        head, *rest = text.strip().split(":")
        kind = FactorKind(head.upper())
        if kind is FactorKind.LAPLACIAN:
            return cls.laplacian()
        if kind is FactorKind.CONV_DIFF:
            if len(rest) != 3:
                raise ValueError("CONV_DIFF factor needs D:v1;v2;...:k")
            return cls.conv_diff(float(rest[0]), [float(x) for x in rest[1].split(";")], float(rest[2]))
        if len(rest) != 1:
            raise ValueError(f"{kind.value} factor needs one parameter")
        return cls(kind, float(rest[0]))


_STENCIL_RADIUS = 2


def _second(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    s = lambda k: _shift(f, axis, k)
    return (-s(2) + 16.0 * s(1) - 30.0 * s(0) + 16.0 * s(-1) - s(-2)) / (12.0 * h * h)


def _first(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    s = lambda k: _shift(f, axis, k)
    return (-s(2) + 8.0 * s(1) - 8.0 * s(-1) + s(-2)) / (12.0 * h)


def _shift(f: np.ndarray, axis: int, k: int) -> np.ndarray:
    """Interior slice offset by ``k`` along ``axis``, trimmed by the stencil
    radius on every axis."""
    R = _STENCIL_RADIUS
    idx = []
    for ax, size in enumerate(f.shape):
        off = k if ax == axis else 0
        idx.append(slice(R + off, size - R + off))
    return f[tuple(idx)]


def _apply_factor(f: np.ndarray, factor: Factor, h: float) -> np.ndarray:
    lap = sum(_second(f, ax, h) for ax in range(f.ndim))
    center = _shift(f, 0, 0)
    kind = factor.kind
    if kind is FactorKind.LAPLACIAN:
        return lap
    if kind is FactorKind.HELMHOLTZ:
        return lap + factor.param ** 2 * center
    if kind is FactorKind.MOD_HELMHOLTZ:
        return lap - factor.param ** 2 * center
    v = factor.v
    if v is None or len(v) != f.ndim:
        raise ValueError(f"CONV_DIFF velocity must have {f.ndim} components")
    adv = sum(v[ax] * _first(f, ax, h) for ax in range(f.ndim))
    return factor.D * lap + adv - factor.k * center


def apply_composite_operator(f_grid, operator: Sequence[Factor], h: float) -> np.ndarray:
    """Apply ``operator`` factors in order to samples on a uniform grid.

    Each factor uses fourth-order five-point central differences and trims
    two layers from every side of the grid.
    """
    f = np.asarray(f_grid, dtype=float)
    if not h > 0:
        raise ValueError("grid spacing must be positive")
    if f.ndim == 0:
        raise ValueError("f_grid must be at least 1-D")
    need = 2 * _STENCIL_RADIUS * len(operator) + 1
    if min(f.shape) < need:
        raise ValueError(f"grid of shape {f.shape} too small for {len(operator)} factor(s); "
                         f"need at least {need} samples per axis")
    for factor in operator:
        f = _apply_factor(f, factor, h)
    return f


# ---------------------------------------------------------------------------
# Helmholtz particular solution


class ParticularSolution(NamedTuple):
    model: SeriesModel
    relative_residual: float  # r_M: ||(lap + lam^2) u_p - f|| / ||f|| at the probes
    residual_history: tuple[float, ...]  # r_1 .. r_M
    diverged: bool


def helmholtz_ladder_specs(lam: float, dim: int, m: int, count: int) -> list[KernelSpec]:
    return [KernelSpec(Family.HELMHOLTZ, Kind.GENERAL, n=dim, m=m, scale=lam)] * count


def _source_residual(gamma_blocks, lam, dim, ctr, probes: PointCloud) -> float:
    approx = np.zeros(len(probes))
    for m, gam in enumerate(gamma_blocks):
        approx += assemble(probes, ctr, helmholtz_ladder_specs(lam, dim, m, len(ctr))) @ gam
    scale = rms(probes.values)
    return rms(approx - probes.values) / scale if scale > 0 else 0.0


def mr_particular_solution(source: PointCloud, lam: float, centers, M: int, *,
                           probes: PointCloud | None = None,
                           regularization: float = 0.0) -> ParticularSolution:
    """Particular solution of ``(lap + lam^2) u = f`` from the Helmholtz ladder.

    The source is fitted with general-solution kernels of orders ``0..M-1``
    at ``centers``. Because ``(lap + lam^2)(lam u_{m+1}) = u_m``, the
    returned series ``u_p = sum lam gamma_{m,k} u_{m+1}(x; c_k)`` has PDE
    residual equal to the source-fit residual. ``r_M`` is measured at
    ``probes`` (defaults to the source points) and tracked for every
    truncation ``1..M``; growth is flagged as divergence.
    """
    if source.values is None:
        raise ValueError("source values required")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    ctr = centers if isinstance(centers, PointCloud) else PointCloud(centers)
    dim = source.dim
    probes = source if probes is None else probes
    if probes.values is None:
        raise ValueError("probe values required")
    f = source.values
    if not np.any(f):
        empty = SeriesModel(np.zeros((0, dim)), (), np.zeros(0))
        return ParticularSolution(empty, 0.0, (0.0,) * M, False)
    history = []
    blocks: list[np.ndarray] = []
    for order in range(1, M + 1):
        A = np.hstack([assemble(source, ctr, helmholtz_ladder_specs(lam, dim, m, len(ctr)))
                       for m in range(order)])
        gamma = solve_regularized(A, f, regularization)
        blocks = np.split(gamma, order)
        history.append(_source_residual(blocks, lam, dim, ctr, probes))
    coords = np.vstack([ctr.coords] * M)
    specs = [s for m in range(M) for s in helmholtz_ladder_specs(lam, dim, m + 1, len(ctr))]
    coef = lam * np.concatenate(blocks)
    model = SeriesModel(coords, specs, coef)
    diverged = any(b > a * STAGNATION_GROWTH for a, b in zip(history, history[1:]))
    return ParticularSolution(model, history[-1], tuple(history), diverged)
