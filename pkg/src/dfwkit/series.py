"""Kernel expansion series: assembly, regularized fitting, evaluation, and
forward transforms computed by quadrature on a regular grid."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import linalg

from .kernels import Family, KernelError, KernelSpec
from .pointcloud import PointCloud

MODEL_FORMAT = "dfwkit-series"
MODEL_VERSION = 1
DUPLICATE_TOL = 1e-12


class SingularEvaluationError(KernelError):
    def __init__(self, i: int, j: int, msg: str = ""):
        self.i, self.j = i, j
        super().__init__(msg or f"singular kernel evaluation at point {i}, term {j}")


class RankDeficientError(np.linalg.LinAlgError):
    def __init__(self, condition: float, msg: str = ""):
        self.condition = condition
        super().__init__(msg or f"rank-deficient system (condition estimate {condition:.3e}); set regularization > 0")


def _as_cloud(points) -> PointCloud:
    return points if isinstance(points, PointCloud) else PointCloud(points)


def _spec_list(specs, count: int) -> list[KernelSpec]:
    if isinstance(specs, KernelSpec):
        return [specs] * count
    specs = list(specs)
    if len(specs) != count:
        raise ValueError(f"{len(specs)} specs for {count} centers")
    return specs


def _group_by_spec(specs: Sequence[KernelSpec]) -> dict[KernelSpec, list[int]]:
    groups: dict[KernelSpec, list[int]] = {}
    for j, s in enumerate(specs):
        groups.setdefault(s, []).append(j)
    return groups


def assemble(points, centers, specs) -> np.ndarray:
    """Collocation matrix ``A[i, j] = kernel_j(x_i, c_j)``.

    ``specs`` is one :class:`KernelSpec` for all centers or one per center.
    Complex kernels contribute their real part.

    Raises
    ------
    SingularEvaluationError
        A kernel is singular at some (point, center) pair; the first
        offending indices are reported.
    ValueError
        Two terms share a center (within 1e-12) and an identical spec.
    """
    pts = _as_cloud(points)
    ctr = _as_cloud(centers)
    specs = _spec_list(specs, len(ctr))
    A = np.zeros((len(pts), len(ctr)))
    for spec, cols in _group_by_spec(specs).items():
        if spec.family is Family.SCHRODINGER:
            raise KernelError("Schrodinger kernels are evaluation-only and cannot be fitted")
        cc = ctr.coords[cols]
        if len(cols) > 1:
            d = np.linalg.norm(cc[:, None, :] - cc[None, :, :], axis=-1)
            np.fill_diagonal(d, np.inf)
            if np.min(d) < DUPLICATE_TOL:
                a, b = np.unravel_index(np.argmin(d), d.shape)
                raise ValueError(f"duplicate centers {cols[a]} and {cols[b]} with identical spec")
        tc = None if ctr.t is None else ctr.t[cols]
        val = spec.evaluate(pts.coords, cc, pts.t, tc)
        sing = np.asarray(val.singular)
        if sing.any():
            i, jj = np.argwhere(sing)[0]
            raise SingularEvaluationError(int(i), int(cols[jj]))
        A[:, cols] = val.re
    if not np.all(np.isfinite(A)):
        i, j = np.argwhere(~np.isfinite(A))[0]
        raise SingularEvaluationError(int(i), int(j), f"non-finite kernel value at point {i}, term {j}")
    return A


@dataclass(frozen=True)
class FitReport:
    residual_rms: float
    condition_estimate: float
    regularization: float
    n_thresholded: int = 0


@dataclass(frozen=True)
class SeriesModel:
    centers: np.ndarray
    specs: tuple[KernelSpec, ...]
    coefficients: np.ndarray
    center_times: np.ndarray | None = None
    harmonic_part: object | None = None
    fit_report: FitReport | None = None

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        if c.ndim == 1:
            c = c[:, None] if c.size else c.reshape(0, 0)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=float).reshape(-1))
        object.__setattr__(self, "specs", tuple(self.specs))
        if not (len(self.specs) == len(self.coefficients) == c.shape[0]):
            raise ValueError("centers, specs and coefficients must have equal length")

    @property
    def n_terms(self) -> int:
        return len(self.coefficients)

    def evaluate(self, x, t=None) -> np.ndarray:
        """Harmonic part plus ``sum_j beta_j kernel_j(x, c_j)``."""
        pts = x if isinstance(x, PointCloud) else PointCloud(np.atleast_2d(np.asarray(x, dtype=float)), t=t)
        out = np.zeros(len(pts))
        if self.harmonic_part is not None:
            out += self.harmonic_part.evaluate(pts.coords)
        if self.n_terms:
            centers = PointCloud(self.centers, t=self.center_times)
            out += assemble(pts, centers, self.specs) @ self.coefficients
        return out

    # -- persistence ----------------------------------------------------------

    def to_dict(self) -> dict:
        terms = []
        for j in range(self.n_terms):
            term = {
                "center": [float(v) for v in self.centers[j]],
                "spec": self.specs[j].to_config(),
                "coefficient": float(self.coefficients[j]),
            }
            if self.center_times is not None:
                term["t"] = float(self.center_times[j])
            terms.append(term)
        report = None
        if self.fit_report is not None:
            report = {
                "residual_rms": self.fit_report.residual_rms,
                "condition_estimate": self.fit_report.condition_estimate,
                "regularization": self.fit_report.regularization,
                "n_thresholded": self.fit_report.n_thresholded,
            }
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "dim": int(self.centers.shape[1]) if self.n_terms else 0,
            "terms": terms,
            "fit_report": report,
            "harmonic_part": None if self.harmonic_part is None else self.harmonic_part.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SeriesModel":
        if data.get("format") != MODEL_FORMAT:
            raise ValueError("not a series model file")
        if data.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {data.get('version')}")
        terms = data["terms"]
        dim = data["dim"]
        centers = np.array([t["center"] for t in terms], dtype=float).reshape(len(terms), dim)
        specs = [KernelSpec.from_config(t["spec"]) for t in terms]
        coef = np.array([t["coefficient"] for t in terms], dtype=float)
        times = None
        if terms and "t" in terms[0]:
            times = np.array([t["t"] for t in terms], dtype=float)
        report = FitReport(**data["fit_report"]) if data.get("fit_report") else None
        harmonic = None
        if data.get("harmonic_part"):
            from .green import HarmonicModel

            harmonic = HarmonicModel.from_dict(data["harmonic_part"])
        return cls(centers, specs, coef, times, harmonic, report)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "SeriesModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def rms(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(np.mean(x * x))) if x.size else 0.0


def solve_regularized(A: np.ndarray, f: np.ndarray, regularization: float = 0.0) -> np.ndarray:
    """Minimize ``|A b - f|^2 + reg |b|^2`` with pivoted QR.

    With ``reg == 0`` a numerically rank-deficient ``A`` raises
    :class:`RankDeficientError`.
    """
    if regularization < 0:
        raise ValueError("regularization must be non-negative")
    N, M = A.shape
    if M == 0:
        return np.zeros(0)
    if regularization > 0:
        A = np.vstack([A, math.sqrt(regularization) * np.eye(M)])
        f = np.concatenate([f, np.zeros(M)])
    elif N < M:
        raise RankDeficientError(np.inf, f"underdetermined system ({N} equations, {M} terms) needs regularization > 0")
    Q, R, piv = linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[0] == 0 or diag[-1] <= max(A.shape) * np.finfo(float).eps * diag[0]:
        cond = np.inf if diag[-1] == 0 else diag[0] / diag[-1]
        raise RankDeficientError(cond)
    z = linalg.solve_triangular(R, Q.T @ f)
    beta = np.empty(M)
    beta[piv] = z
    return beta


def fit(points: PointCloud, centers, specs, regularization: float = 0.0,
        threshold: float = 0.0) -> SeriesModel:
    """Fit series coefficients to ``points.values``.

    ``threshold`` hard-zeroes coefficients below ``threshold * max|beta|``.
    """
    if points.values is None:
        raise ValueError("fit requires point values")
    ctr = _as_cloud(centers)
    specs = _spec_list(specs, len(ctr))
    A = assemble(points, ctr, specs)
    f = points.values
    if not np.any(f) and regularization > 0:
        beta = np.zeros(A.shape[1])
    else:
        beta = solve_regularized(A, f, regularization)
    dropped = 0
    if threshold > 0 and beta.size:
        small = np.abs(beta) < threshold * np.max(np.abs(beta))
        dropped = int(small.sum())
        beta = np.where(small, 0.0, beta)
    cond = float(np.linalg.cond(A)) if A.size else 0.0
    report = FitReport(rms(A @ beta - f), cond, float(regularization), dropped)
    return SeriesModel(ctr.coords, specs, beta, ctr.t, None, report)


def evaluate(model: SeriesModel, x, t=None) -> np.ndarray:
    return model.evaluate(x, t)


# ---------------------------------------------------------------------------
# forward transforms


class Quadrature(str, Enum):
    MIDPOINT = "MIDPOINT"
    TRAPEZOID = "TRAPEZOID"


class Analysis(str, Enum):
    KERNEL = "KERNEL"          # catalog kernel with one varying parameter
    WEYL = "WEYL"
    HILBERT = "HILBERT"
    ABEL = "ABEL"
    STIELTJES = "STIELTJES"


def _weights_1d(p: np.ndarray, rule: Quadrature) -> np.ndarray:
    if p.size == 1:
        return np.ones(1)
    gaps = np.diff(p)
    w = np.zeros(p.size)
    w[:-1] += gaps / 2.0
    w[1:] += gaps / 2.0
    if rule is Quadrature.MIDPOINT:
        w[0] += gaps[0] / 2.0
        w[-1] += gaps[-1] / 2.0
    return w


@dataclass(frozen=True)
class TransformGrid:
    """Parameter samples, translates and the quadrature rule.

    MIDPOINT treats samples as cell centers (the domain extends half a gap
    past each end); TRAPEZOID treats them as nodes of ``[p_0, p_last]``.
    """

    parameter_samples: np.ndarray
    translate_samples: np.ndarray
    quadrature: Quadrature = Quadrature.MIDPOINT
    parameter_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.parameter_samples, dtype=float))
        if p.size == 0 or np.any(np.diff(p) <= 0):
            raise ValueError("parameter samples must be non-empty and strictly increasing")
        xi = np.asarray(self.translate_samples, dtype=float)
        if xi.ndim == 1:
            xi = xi[:, None]
        rule = Quadrature(self.quadrature)
        object.__setattr__(self, "parameter_samples", p)
        object.__setattr__(self, "translate_samples", xi)
        object.__setattr__(self, "quadrature", rule)
        object.__setattr__(self, "parameter_weights", _weights_1d(p, rule))


@dataclass(frozen=True)
class TransformResult:
    values: np.ndarray  # (n_parameters, n_translates)
    parameter_weights: np.ndarray
    warnings: tuple[str, ...] = ()


def grid_axes(coords: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Recover the axes of a regular tensor grid; returns (axes, spacing)."""
    axes, spacing = [], []
    for k in range(coords.shape[1]):
        u = np.unique(coords[:, k])
        if u.size < 2:
            raise ValueError("grid needs at least two samples per axis")
        d = np.diff(u)
        if np.ptp(d) > 1e-9 * max(abs(d[0]), 1e-300):
            raise ValueError(f"axis {k} is not uniformly spaced")
        axes.append(u)
        spacing.append(float(np.mean(d)))
    if np.prod([a.size for a in axes]) != coords.shape[0]:
        raise ValueError("samples do not form a full tensor grid")
    return axes, np.array(spacing)


def spatial_weights(coords: np.ndarray, rule: Quadrature) -> tuple[np.ndarray, np.ndarray]:
    axes, h = grid_axes(coords)
    w = np.ones(coords.shape[0])
    for k, ax in enumerate(axes):
        wk = _weights_1d(ax, rule)
        idx = np.searchsorted(ax, coords[:, k])
        w *= wk[idx]
    return w, h


def effective_width(spec: KernelSpec) -> float | None:
    fam = spec.family
    if fam in (Family.HELMHOLTZ, Family.MOD_HELMHOLTZ, Family.HARTLEY, Family.DIFFUSION_RBF):
        return 1.0 / spec.scale
    if fam in (Family.POISSON, Family.POISSON_TRUNCATED):
        return spec.scale
    if fam is Family.GAUSS_HEAT:
        return math.sqrt(spec.scale)
    return None


def forward_transform(samples: PointCloud, grid: TransformGrid, analysis: Analysis | str = Analysis.KERNEL,
                      spec: KernelSpec | None = None, parameter: str = "scale", *,
                      reciprocal: bool = False, exclude_singular: bool = False,
                      power: float = 1.0, constant: float = 1.0, dimension: float | None = None,
                      t_translate=None) -> TransformResult:
    """Quadrature realization of ``W(theta, xi) = int f(x) K(xi - x; theta) dx``.

    Parameters
    ----------
    samples : PointCloud
        ``f`` on a regular tensor grid covering its support.
    grid : TransformGrid
        ``theta`` samples and translates ``xi``.
    analysis : Analysis
        KERNEL uses ``spec`` with field ``parameter`` (``"scale"``, ``"n"`` or
        ``"m"``) set to ``theta``; complex kernels are conjugated, and
        ``reciprocal=True`` uses ``1 / (K r)`` instead of ``K``. WEYL, ABEL
        (``theta`` = cut-off radius), HILBERT (``theta`` = shift ``eta``,
        symmetric exclusion of samples within half a cell of ``r = eta``)
        and STIELTJES (``theta`` = ``t``, exponent ``power``) are the
        distance-function analogues of the classical transforms;
        ``constant`` divides HILBERT and ABEL.
    exclude_singular : bool
        Drop samples where the KERNEL analysis kernel is singular instead of
        raising.
    """
    analysis = Analysis(analysis)
    if samples.values is None:
        raise ValueError("forward_transform requires sample values")
    coords = samples.coords
    if coords.shape[1] != grid.translate_samples.shape[1]:
        raise ValueError("translate dimension differs from sample dimension")
    w, h = spatial_weights(coords, grid.quadrature)
    fw = w * samples.values
    n = float(dimension) if dimension is not None else float(coords.shape[1])
    xi = grid.translate_samples
    r = np.linalg.norm(xi[:, None, :] - coords[None, :, :], axis=-1)
    warnings: list[str] = []
    P = grid.parameter_samples
    out = None

    if analysis is Analysis.KERNEL:
        if spec is None:
            raise ValueError("KERNEL analysis requires a KernelSpec")
        if parameter not in ("scale", "n", "m"):
            raise ValueError("parameter must be 'scale', 'n' or 'm'")
        t_x = None if spec.needs_time is False else samples.t
        for ip, theta in enumerate(P):
            value = int(round(theta)) if parameter == "m" else float(theta)
            s = spec.replace(**{parameter: value})
            width = effective_width(s)
            if width is not None and width / float(np.max(h)) < 8:
                warnings.append(f"grid too coarse for {parameter}={theta:g}: "
                                f"{width / float(np.max(h)):.2f} samples across kernel width")
            kv = s.evaluate(xi, coords, t_translate, t_x)
            K = np.conj(kv.value) if s.is_complex else np.asarray(kv.re)
            sing = np.asarray(kv.singular)
            if reciprocal:
                with np.errstate(divide="ignore", invalid="ignore"):
                    K = 1.0 / (K * r)
                sing = sing | ~np.isfinite(K)
            if sing.any():
                if not exclude_singular:
                    a, b = np.argwhere(sing)[0]
                    raise SingularEvaluationError(int(b), int(a), f"singular analysis kernel at translate {a}, sample {b}")
                K = np.where(sing, 0.0, K)
            row = K @ fw
            if out is None:
                out = np.zeros((P.size, xi.shape[0]), dtype=row.dtype)
            elif np.iscomplexobj(row) and not np.iscomplexobj(out):
                out = out.astype(complex)
            out[ip] = row
        return TransformResult(out, grid.parameter_weights, tuple(warnings))

    out = np.zeros((P.size, xi.shape[0]))
    for ip, theta in enumerate(P):
        if analysis is Analysis.WEYL:
            if n <= 1:
                raise ValueError("WEYL transform needs dimension > 1")
            pref = 2.0 * math.gamma(n / 2.0) / (math.sqrt(math.pi) * math.gamma((n - 1.0) / 2.0))
            gap = r * r - theta * theta
            live = gap > 0
            K = np.where(live, pref * np.where(live, gap, 1.0) ** ((n - 3.0) / 2.0) * r, 0.0)
        elif analysis is Analysis.ABEL:
            gap = r * r - theta * theta
            live = gap > 0
            K = np.where(live, r / np.sqrt(np.where(live, gap, 1.0)), 0.0) / constant
        elif analysis is Analysis.HILBERT:
            cell = 0.5 * float(np.max(h))
            d = r - theta
            # the tolerance keeps mirror-image pairs at exactly half a cell together
            keep = np.abs(d) >= cell * (1.0 - 1e-9)
            K = np.where(keep, 1.0 / np.where(keep, d, 1.0), 0.0) / constant
        else:
            if theta <= 0 and np.any(r + theta <= 0):
                raise ValueError("STIELTJES transform needs r + t > 0")
            K = math.gamma(power) * (r + theta) ** (-power)
        out[ip] = K @ fw
    return TransformResult(out, grid.parameter_weights, tuple(warnings))
