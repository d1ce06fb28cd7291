"""Kernel catalog: fundamental and general solutions behind one interface.

Every ``eval_*`` function is vectorized over its distance/coordinate
arguments and returns a :class:`KernelValue`. Evaluating a kernel that is
singular at the source exactly at the source yields NaN entries with the
``singular`` mask set; nothing raises, so batch assembly can report the
offending pairs.

Sign conventions
----------------
The zero-order Laplace kernels satisfy the radial equation with a negative
point source and are anchored to ``-ln(r)/2pi`` (2D), ``-1/(4 pi r)`` (3D)
and ``-r/2`` (1D). Higher-order Laplace kernels carry the same sign so that
``lap(u_m) = u_{m-1}`` holds exactly.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy import special

from . import geometry
from .geometry import AnisotropyMatrix
from .specfun import bessel_i, bessel_j, bessel_k, bessel_y, hankel1, unit_sphere_area


class KernelError(ValueError):
    pass


class Family(str, Enum):
    LAPLACE = "LAPLACE"
    HELMHOLTZ = "HELMHOLTZ"
    MOD_HELMHOLTZ = "MOD_HELMHOLTZ"
    CONV_DIFF = "CONV_DIFF"
    COMPOSITE_CD_LAPLACE = "COMPOSITE_CD_LAPLACE"
    HEAT = "HEAT"
    SCHRODINGER = "SCHRODINGER"
    POISSON = "POISSON"
    POISSON_TRUNCATED = "POISSON_TRUNCATED"
    GAUSS_HEAT = "GAUSS_HEAT"
    DIFFUSION_RBF = "DIFFUSION_RBF"
    TRANSLATE_HARMONIC = "TRANSLATE_HARMONIC"
    HARTLEY = "HARTLEY"
    GEODESIC_LAPLACE = "GEODESIC_LAPLACE"
    GEODESIC_HEAT = "GEODESIC_HEAT"
    GEODESIC_HELMHOLTZ = "GEODESIC_HELMHOLTZ"
    AXISYM_LAPLACE = "AXISYM_LAPLACE"
    INFINITE_DIFFUSION = "INFINITE_DIFFUSION"


class Kind(str, Enum):
    FUNDAMENTAL = "FUNDAMENTAL"
    GENERAL = "GENERAL"


class Normalization(str, Enum):
    """Modified-Helmholtz prefactor convention.

    PLAIN: ``(1/2pi)(2 pi mu r)^(1-n/2) K(mu r)``, ``e^{-mu r}/(2 mu)`` in 1D.
    SCALED: PLAIN times ``mu^(n-1/2)``; in 1D ``(sqrt(mu)/2) e^{-mu r}``.
    """

    PLAIN = "PLAIN"
    SCALED = "SCALED"


class HarmonicVariant(str, Enum):
    GAUSSIAN = "GAUSSIAN"  # exp(-alpha (dx + i dy)^2)
    EXPONENTIAL = "EXPONENTIAL"  # exp(alpha (dx + i dy))


class MQKind(str, Enum):
    POISSON = "POISSON"
    POISSON_TRUNCATED = "POISSON_TRUNCATED"
    GAUSS_HEAT = "GAUSS_HEAT"
    DIFFUSION_RBF = "DIFFUSION_RBF"
    INFINITE_DIFFUSION = "INFINITE_DIFFUSION"


class KernelValue(NamedTuple):
    re: np.ndarray | float
    im: np.ndarray | float
    singular: np.ndarray | bool

    @property
    def value(self):
        return np.asarray(self.re) + 1j * np.asarray(self.im)

    @property
    def magnitude(self):
        return np.hypot(self.re, self.im)

    @property
    def phase(self):
        return np.arctan2(self.im, self.re)

    @property
    def any_singular(self) -> bool:
        return bool(np.any(self.singular))


def _pack(z, singular) -> KernelValue:
    z = np.asarray(z)
    singular = np.asarray(singular, dtype=bool)
    singular = np.broadcast_to(singular, z.shape)
    re = np.where(singular, np.nan, z.real)
    im = np.where(singular, np.nan, z.imag if np.iscomplexobj(z) else 0.0)
    if re.ndim == 0:
        return KernelValue(float(re), float(im), bool(singular))
    return KernelValue(re, im, singular.copy())


def _radius(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise KernelError("distance must be finite and non-negative")
    return r


# ---------------------------------------------------------------------------
# Laplace


def laplace_ladder_coefficients(m: int) -> tuple[float, float]:
    """(A_m, B_m) of the 2D high-order Laplace kernel ``r^2m (A ln r - B)``."""
    a, b = 1.0, 0.0
    for j in range(1, m + 1):
        a, b = a / (4.0 * j * j), (b + a / j) / (4.0 * j * j)
    return a, b


def eval_laplace(n: float, m: int, r, C: float = 0.0) -> KernelValue:
    """Laplace kernel of order ``m`` in dimension ``n``.

    ``m = 0`` accepts any real ``n > 0`` and adds the completeness shift
    ``-C / S_n``. ``m >= 1`` is defined for ``n`` in {2, 3} only and is
    regular at the origin.
    """
    r = _radius(r)
    n = float(n)
    if n <= 0:
        raise KernelError("eval_laplace: n must be positive")
    if m < 0:
        raise KernelError("eval_laplace: order must be non-negative")
    safe = np.where(r > 0, r, 1.0)
    if m == 0:
        sn = unit_sphere_area(n)
        if n == 1:
            val = -r / sn
            singular = np.zeros_like(r, dtype=bool)
        elif n == 2:
            val = -np.log(safe) / sn
            singular = r == 0
        else:
            val = -safe ** (2.0 - n) / ((n - 2.0) * sn)
            singular = (r == 0) & (n > 2)
            if n < 2:
                val = np.where(r > 0, val, 0.0)
        return _pack(val - C / sn, singular)
    if n == 2:
        a, b = laplace_ladder_coefficients(m)
        val = -(safe ** (2 * m)) * (a * np.log(safe) - b) / (2.0 * math.pi)
        val = np.where(r > 0, val, 0.0)
    elif n == 3:
        val = -(r ** (2 * m - 1)) / (4.0 * math.pi * math.factorial(2 * m))
    else:
        raise KernelError(f"eval_laplace: order {m} supported only for n in (2, 3), got n={n:g}")
    return _pack(val, np.zeros_like(r, dtype=bool))


def eval_laplace_radial_derivative(n: float, r):
    """``1 / (S_n r^(n-1))``: the flux magnitude of the Laplace kernel."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise KernelError("radial derivative requires r > 0")
    if n <= 0:
        raise KernelError("n must be positive")
    out = 1.0 / (unit_sphere_area(n) * r ** (n - 1.0))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Helmholtz family


def helmholtz_ladder_coefficient(m: int, lam: float) -> float:
    a = 1.0
    for j in range(1, m + 1):
        a /= 2.0 * j * lam * lam
    return a


def eval_helmholtz(n: float, m: int, lam: float, r, kind: Kind | str = Kind.GENERAL) -> KernelValue:
    """Order-``m`` Helmholtz kernel ``A_m r^(m+1-n/2) Z_{n/2-1+m}(lam r)``.

    ``Z`` is ``J`` for GENERAL and ``H^(1)`` for FUNDAMENTAL. With
    ``A_m = A_{m-1} / (2 m lam^2)`` the ladder obeys
    ``(lap + lam^2) u_m = u_{m-1} / lam``.
    """
    kind = Kind(kind)
    if not lam > 0:
        raise KernelError("eval_helmholtz: lambda must be positive")
    if m < 0:
        raise KernelError("eval_helmholtz: order must be non-negative")
    r = _radius(r)
    n = float(n)
    nu = n / 2.0 - 1.0 + m
    amp = helmholtz_ladder_coefficient(m, lam)
    safe = np.where(r > 0, r, 1.0)
    power = safe ** (m + 1.0 - n / 2.0)
    if kind is Kind.GENERAL:
        val = amp * power * bessel_j(nu, lam * safe)
        if m == 0:
            at_zero = (lam / 2.0) ** nu / math.gamma(nu + 1.0)
        else:
            at_zero = 0.0
        val = np.where(r > 0, val, amp * at_zero)
        return _pack(val, np.zeros_like(r, dtype=bool))
    val = amp * power * hankel1(nu, lam * safe)
    return _pack(val, r == 0)


def helmholtz_fundamental_normalized(n: float, lam: float, r, kind: Kind | str = Kind.FUNDAMENTAL) -> KernelValue:
    """Unit-source Helmholtz kernel ``(i/4) (lam/(2 pi r))^(n/2-1) H_{n/2-1}(lam r)``.

    GENERAL replaces ``i H`` by ``J`` (real), which is regular at the origin.
    """
    kind = Kind(kind)
    if n < 2:
        raise KernelError("normalized Helmholtz kernel requires n >= 2")
    r = _radius(r)
    nu = n / 2.0 - 1.0
    safe = np.where(r > 0, r, 1.0)
    pref = 0.25 * (lam / (2.0 * math.pi * safe)) ** nu
    if kind is Kind.GENERAL:
        val = pref * bessel_j(nu, lam * safe)
        at_zero = 0.25 * (lam / (2.0 * math.pi)) ** nu * (lam / 2.0) ** nu / math.gamma(nu + 1.0)
        return _pack(np.where(r > 0, val, at_zero), np.zeros_like(r, dtype=bool))
    return _pack(1j * pref * hankel1(nu, lam * safe), r == 0)


def eval_mod_helmholtz(n: float, mu: float, r, kind: Kind | str = Kind.FUNDAMENTAL,
                       normalization: Normalization | str = Normalization.PLAIN) -> KernelValue:
    """Modified-Helmholtz kernels ``(lap - mu^2) u = 0`` away from the source."""
    kind, normalization = Kind(kind), Normalization(normalization)
    if not mu > 0:
        raise KernelError("eval_mod_helmholtz: mu must be positive")
    r = _radius(r)
    n = float(n)
    sign = -1.0 if kind is Kind.FUNDAMENTAL else 1.0
    if n == 1:
        base = np.exp(sign * mu * r)
        pref = math.sqrt(mu) / 2.0 if normalization is Normalization.SCALED else 1.0 / (2.0 * mu)
        return _pack(pref * base, np.zeros_like(r, dtype=bool))
    nu = n / 2.0 - 1.0
    safe = np.where(r > 0, r, 1.0)
    z = mu * safe
    if kind is Kind.FUNDAMENTAL:
        val = (2.0 * math.pi * z) ** (-nu) * bessel_k(nu, z) / (2.0 * math.pi)
        singular = (r == 0) & (n >= 2)
        if n < 2:
            # (2 pi z)^|nu| K_|nu|(z) -> (2 pi)^|nu| 2^(|nu|-1) Gamma(|nu|)
            a = -nu
            at_zero = (2.0 * math.pi) ** a * 2.0 ** (a - 1.0) * math.gamma(a) / (2.0 * math.pi)
            val = np.where(r > 0, val, at_zero)
    else:
        val = (2.0 * math.pi * z) ** (-nu) * bessel_i(nu, z) / (2.0 * math.pi)
        at_zero = (4.0 * math.pi) ** (-nu) / math.gamma(nu + 1.0) / (2.0 * math.pi)
        val = np.where(r > 0, val, at_zero)
        singular = np.zeros_like(r, dtype=bool)
    if normalization is Normalization.SCALED:
        val = val * mu ** (n - 0.5)
    return _pack(val, singular)


def convdiff_rho(D: float, v, k: float) -> float:
    """``sqrt((|v|/2D)^2 + k/D)``."""
    if not D > 0:
        raise KernelError("diffusivity D must be positive")
    if k < 0:
        raise KernelError("reaction k must be non-negative")
    speed = float(np.linalg.norm(np.asarray(v, dtype=float)))
    return math.sqrt((speed / (2.0 * D)) ** 2 + k / D)


def _convdiff_parts(n, D, v, k, x, center, exp_sign):
    v = np.asarray(v, dtype=float)
    rho = convdiff_rho(D, v, k)
    if rho == 0:
        raise KernelError("convection-diffusion kernel degenerates for v = 0, k = 0")
    delta = geometry.difference(x, center)
    if delta.shape[-1] != v.shape[-1]:
        raise geometry.DimensionError("velocity vector dimension mismatch")
    r = np.linalg.norm(delta, axis=-1)
    drift = np.exp(exp_sign * (delta @ v) / (2.0 * D))
    return rho, r, drift


def eval_conv_diff(n: float, D: float, v, k: float, x, center,
                   kind: Kind | str = Kind.FUNDAMENTAL, exp_sign: float = -1.0) -> KernelValue:
    """Convection-diffusion kernel ``e^{-v.(x-x_k)/2D} phi(rho r)``.

    ``phi`` is the PLAIN modified-Helmholtz kernel with ``mu = rho``, so the
    result solves ``D lap u + v.grad u - k u = 0`` off the source. Set
    ``exp_sign=+1`` to flip the drift exponent.
    """
    rho, r, drift = _convdiff_parts(n, D, v, k, x, center, exp_sign)
    base = eval_mod_helmholtz(n, rho, r, kind, Normalization.PLAIN)
    return _pack(drift * np.asarray(base.re), base.singular)


def eval_composite_cd_laplace(n: float, D: float, v, k: float, x, center,
                              exp_sign: float = -1.0) -> KernelValue:
    """Fundamental solution of the Laplace / convection-diffusion composite.

    Equals ``eval_laplace(n, 0, r) - eval_conv_diff(..., FUNDAMENTAL)`` for
    every ``n``; in 2D this is ``-(ln r + e^{...} K0(rho r)) / 2pi``.
    """
    if not (n == 2 or n >= 3):
        raise KernelError("composite kernel defined for n = 2 or n >= 3")
    rho, r, drift = _convdiff_parts(n, D, v, k, x, center, exp_sign)
    lap = eval_laplace(n, 0, r)
    cd = eval_mod_helmholtz(n, rho, r, Kind.FUNDAMENTAL, Normalization.PLAIN)
    val = np.asarray(lap.re) - drift * np.asarray(cd.re)
    return _pack(val, np.asarray(lap.singular) | np.asarray(cd.singular))


# ---------------------------------------------------------------------------
# time-space kernels


def eval_heat(n: float, kappa: float, r, dt) -> KernelValue:
    """Causal heat kernel; zero for ``dt <= 0``."""
    if not kappa > 0:
        raise KernelError("heat kernel: conductivity must be positive")
    r = _radius(r)
    dt = np.asarray(dt, dtype=float)
    live = dt > 0
    tau = np.where(live, dt, 1.0)
    val = np.exp(-(r * r) / (4.0 * kappa * tau)) / (4.0 * math.pi * kappa * tau) ** (n / 2.0)
    return _pack(np.where(live, val, 0.0), np.zeros(np.broadcast(r, dt).shape, dtype=bool))


def eval_schrodinger(n: float, mass: float, hbar: float, r, dt) -> KernelValue:
    """Free-particle Schrodinger kernel (complex); zero for ``dt <= 0``."""
    if not (mass > 0 and hbar > 0):
        raise KernelError("Schrodinger kernel: mass and hbar must be positive")
    r = _radius(r)
    dt = np.asarray(dt, dtype=float)
    live = dt > 0
    tau = np.where(live, dt, 1.0)
    amp = -(1.0 + 1.0j) / (hbar * math.sqrt(2.0)) * (mass / (2.0 * math.pi * hbar * tau)) ** (n / 2.0)
    val = amp * np.exp(1j * mass * r * r / (2.0 * hbar * tau))
    return _pack(np.where(live, val, 0.0), np.zeros(np.broadcast(r, dt).shape, dtype=bool))


def eval_timespace(kind: Family | str, n: float, x, xi, *, kappa: float = 1.0,
                   mass: float = 1.0, hbar: float = 1.0, t_x=None, t_xi=None) -> KernelValue:
    kind = Family(kind)
    r = geometry.euclidean(x, xi)
    dt = geometry._time(x, t_x) - geometry._time(xi, t_xi)
    if kind is Family.HEAT:
        return eval_heat(n, kappa, r, dt)
    if kind is Family.SCHRODINGER:
        return eval_schrodinger(n, mass, hbar, r, dt)
    raise KernelError(f"eval_timespace: unsupported kind {kind.value}")


# ---------------------------------------------------------------------------
# shape-parameter kernels


def poisson_constant(n: float) -> float:
    """``Gamma((n+1)/2) / pi^((n+1)/2)``: gives the Poisson kernel unit mass."""
    return math.gamma((n + 1.0) / 2.0) / math.pi ** ((n + 1.0) / 2.0)


def eval_mq_family(kind: MQKind | str, n: float, shape: float, r, C: float = 0.0):
    """Shape-parameter kernels (all real and regular).

    ``shape`` is ``s`` (Poisson), ``beta`` (Gaussian heat) or ``alpha``
    (diffusion RBF). INFINITE_DIFFUSION uses ``C`` and ignores ``shape``.
    """
    kind = MQKind(kind)
    r = _radius(r)
    if kind is MQKind.INFINITE_DIFFUSION:
        if not C > 0:
            raise KernelError("infinite-domain kernel requires C > 0")
        out = (2.0 * C - r) / (r + C) ** 4
    else:
        if not shape > 0:
            raise KernelError("shape parameter must be positive")
        if kind in (MQKind.POISSON, MQKind.POISSON_TRUNCATED):
            out = poisson_constant(n) * shape / (r * r + shape * shape) ** ((n + 1.0) / 2.0)
            if kind is MQKind.POISSON_TRUNCATED:
                out = np.where(r < shape, out, 0.0)
        elif kind is MQKind.GAUSS_HEAT:
            out = np.exp(-r * r / (4.0 * shape)) / (2.0 * math.sqrt(math.pi * shape))
        else:
            out = np.exp(-shape * r)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# anisotropic kernels


def eval_geodesic(kind: Family | str, n: float, kappa: AnisotropyMatrix, x, xi, *,
                  lam: float = 1.0, t_x=None, t_xi=None) -> KernelValue:
    """Laplace / heat / Helmholtz kernels on the geodesic distance.

    The scalar prefactor is ``det(kappa)^(-1/2)``.
    """
    kind = Family(kind)
    R = geometry.geodesic(x, xi, kappa)
    scale = kappa.det ** -0.5
    if kind is Family.GEODESIC_LAPLACE:
        base = eval_laplace(n, 0, R)
        return _pack(scale * np.asarray(base.re), base.singular)
    if kind is Family.GEODESIC_HEAT:
        dt = np.asarray(geometry._time(x, t_x) - geometry._time(xi, t_xi), dtype=float)
        base = eval_heat(n, 1.0, R, dt)
        return _pack(scale * np.asarray(base.re), base.singular)
    if kind is Family.GEODESIC_HELMHOLTZ:
        if not lam > 0:
            raise KernelError("lambda must be positive")
        base = helmholtz_fundamental_normalized(n, lam, R)
        return _pack(scale * base.value, base.singular)
    raise KernelError(f"eval_geodesic: unsupported kind {kind.value}")


# ---------------------------------------------------------------------------
# miscellaneous


def axisym_parameters(x_i, y_i, x_k, y_k):
    p = np.asarray(x_i) ** 2 + np.asarray(x_k) ** 2 + (np.asarray(y_i) - np.asarray(y_k)) ** 2
    q = 2.0 * np.asarray(x_i) * np.asarray(x_k)
    return p, q


def eval_axisym_laplace(x_i, y_i, x_k, y_k):
    """Axisymmetric Laplace kernel ``4 K(s) / sqrt(p + q)``, ``s = 2q/(p+q)``.

    Radial coordinates must be positive; ``K`` uses the parameter
    convention. Returns NaN (and a singular flag) at coincident points.
    """
    if np.any(np.asarray(x_i) <= 0) or np.any(np.asarray(x_k) <= 0):
        raise KernelError("axisymmetric kernel: radial coordinates must be positive")
    p, q = axisym_parameters(x_i, y_i, x_k, y_k)
    s = 2.0 * q / (p + q)
    singular = s >= 1.0
    val = 4.0 * special.ellipk(np.where(singular, 0.0, s)) / np.sqrt(p + q)
    return _pack(val, singular)


def eval_translate_harmonic(variant: HarmonicVariant | str, alpha: float, x, y, x_k, y_k) -> KernelValue:
    """Translation-invariant harmonic functions of ``z = dx + i dy``."""
    variant = HarmonicVariant(variant)
    dz = (np.asarray(x, dtype=float) - x_k) + 1j * (np.asarray(y, dtype=float) - y_k)
    if variant is HarmonicVariant.GAUSSIAN:
        val = np.exp(-alpha * dz * dz)
    else:
        val = np.exp(alpha * dz)
    return _pack(val, np.zeros(np.shape(val), dtype=bool))


def eval_hartley_basis(n: float, lam: float, r) -> KernelValue:
    """``(lam^(n-1/2)/4) (2 pi lam r)^(1-n/2) [J + Y]_{n/2-1}(lam r)``."""
    if n < 2:
        raise KernelError("Hartley basis requires n >= 2")
    if not lam > 0:
        raise KernelError("lambda must be positive")
    r = _radius(r)
    nu = n / 2.0 - 1.0
    safe = np.where(r > 0, r, 1.0)
    z = lam * safe
    val = lam ** (n - 0.5) / 4.0 * (2.0 * math.pi * z) ** (-nu) * (bessel_j(nu, z) + bessel_y(nu, z))
    return _pack(val, r == 0)


# ---------------------------------------------------------------------------
# KernelSpec


_ALLOWED_KINDS = {
    Family.LAPLACE: (Kind.FUNDAMENTAL,),
    Family.HELMHOLTZ: (Kind.GENERAL, Kind.FUNDAMENTAL),
    Family.MOD_HELMHOLTZ: (Kind.FUNDAMENTAL, Kind.GENERAL),
    Family.CONV_DIFF: (Kind.FUNDAMENTAL, Kind.GENERAL),
    Family.COMPOSITE_CD_LAPLACE: (Kind.FUNDAMENTAL,),
    Family.HEAT: (Kind.FUNDAMENTAL,),
    Family.SCHRODINGER: (Kind.FUNDAMENTAL,),
    Family.POISSON: (Kind.GENERAL,),
    Family.POISSON_TRUNCATED: (Kind.GENERAL,),
    Family.GAUSS_HEAT: (Kind.GENERAL,),
    Family.DIFFUSION_RBF: (Kind.GENERAL,),
    Family.TRANSLATE_HARMONIC: (Kind.GENERAL,),
    Family.HARTLEY: (Kind.GENERAL,),
    Family.GEODESIC_LAPLACE: (Kind.FUNDAMENTAL,),
    Family.GEODESIC_HEAT: (Kind.FUNDAMENTAL,),
    Family.GEODESIC_HELMHOLTZ: (Kind.FUNDAMENTAL,),
    Family.AXISYM_LAPLACE: (Kind.FUNDAMENTAL,),
    Family.INFINITE_DIFFUSION: (Kind.GENERAL,),
}

_RADIAL = {
    Family.LAPLACE, Family.HELMHOLTZ, Family.MOD_HELMHOLTZ, Family.POISSON,
    Family.POISSON_TRUNCATED, Family.GAUSS_HEAT, Family.DIFFUSION_RBF,
    Family.HARTLEY, Family.INFINITE_DIFFUSION,
}
_TIMED = {Family.HEAT, Family.SCHRODINGER, Family.GEODESIC_HEAT}
_SCALED = {Family.HELMHOLTZ, Family.MOD_HELMHOLTZ, Family.HARTLEY, Family.GEODESIC_HELMHOLTZ,
           Family.POISSON, Family.POISSON_TRUNCATED, Family.GAUSS_HEAT, Family.DIFFUSION_RBF,
           Family.TRANSLATE_HARMONIC}


class DistanceKind(str, Enum):
    EUCLIDEAN = "EUCLIDEAN"
    FRACTIONAL = "FRACTIONAL"
    WAVE_CONE = "WAVE_CONE"
    PSEUDO_EUCLIDEAN = "PSEUDO_EUCLIDEAN"


@dataclass(frozen=True)
class DistanceMode:
    kind: DistanceKind = DistanceKind.EUCLIDEAN
    param: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DistanceKind(self.kind))
        if self.kind is not DistanceKind.EUCLIDEAN and not self.param > 0:
            raise KernelError("distance-mode parameter must be positive")

    def __str__(self) -> str:
        if self.kind is DistanceKind.EUCLIDEAN:
            return "EUCLIDEAN"
        return f"{self.kind.value}:{self.param!r}"

    @classmethod
    def parse(cls, text: str) -> "DistanceMode":
        head, _, tail = text.partition(":")
        kind = DistanceKind(head.strip().upper())
        if kind is DistanceKind.EUCLIDEAN:
            return cls()
        if not tail:
            raise KernelError(f"distance mode {kind.value} needs a parameter, e.g. {kind.value}:1.5")
        return cls(kind, float(tail))


@dataclass(frozen=True)
class KernelSpec:
    """Everything needed to evaluate one catalog kernel between two points.

    ``scale`` is lambda (Helmholtz, Hartley), mu (modified Helmholtz), the
    shape parameter (Poisson ``s``, Gaussian ``beta``, diffusion ``alpha``,
    translate-harmonic ``alpha``), kappa (heat) or the particle mass
    (Schrodinger), depending on the family.
    """

    family: Family
    kind: Kind | None = None
    n: float = 2.0
    m: int = 0
    scale: float = 1.0
    v: tuple[float, ...] | None = None
    D: float = 1.0
    k: float = 0.0
    c: float = 1.0
    C: float = 0.0
    anisotropy: AnisotropyMatrix | None = None
    distance_mode: DistanceMode = field(default_factory=DistanceMode)
    normalization: Normalization = Normalization.PLAIN
    variant: HarmonicVariant = HarmonicVariant.GAUSSIAN
    hbar: float = 1.0
    exp_sign: float = -1.0

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        allowed = _ALLOWED_KINDS[fam]
        kind = allowed[0] if self.kind is None else Kind(self.kind)
        if kind not in allowed:
            raise KernelError(f"{fam.value} has no {kind.value} kernel")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        object.__setattr__(self, "variant", HarmonicVariant(self.variant))
        if isinstance(self.distance_mode, str):
            object.__setattr__(self, "distance_mode", DistanceMode.parse(self.distance_mode))
        if self.v is not None:
            object.__setattr__(self, "v", tuple(float(x) for x in np.atleast_1d(self.v)))
        if self.anisotropy is not None and not isinstance(self.anisotropy, AnisotropyMatrix):
            object.__setattr__(self, "anisotropy", AnisotropyMatrix(self.anisotropy))
        object.__setattr__(self, "n", float(self.n))
        object.__setattr__(self, "m", int(self.m))
        if not self.n > 0:
            raise KernelError("dimension n must be positive")
        if self.m < 0:
            raise KernelError("order m must be non-negative")
        if self.m >= 1:
            if fam is Family.LAPLACE and self.n not in (2.0, 3.0):
                raise KernelError("high-order Laplace kernels exist for n in (2, 3) only")
            if fam not in (Family.LAPLACE, Family.HELMHOLTZ):
                raise KernelError(f"{fam.value} has no high-order kernels")
        if fam in _SCALED and not self.scale > 0:
            raise KernelError(f"{fam.value}: scale must be positive")
        if fam in (Family.CONV_DIFF, Family.COMPOSITE_CD_LAPLACE) and self.v is None:
            raise KernelError(f"{fam.value} requires a velocity vector v")
        if fam.value.startswith("GEODESIC") and self.anisotropy is None:
            raise KernelError(f"{fam.value} requires an anisotropy matrix")
        if fam is Family.HEAT and not self.scale > 0:
            raise KernelError("HEAT: conductivity (scale) must be positive")
        if self.distance_mode.kind is not DistanceKind.EUCLIDEAN and fam not in _RADIAL:
            raise KernelError(f"{fam.value} only supports EUCLIDEAN distance")

    # -- evaluation ---------------------------------------------------------

    @property
    def needs_time(self) -> bool:
        return self.family in _TIMED or self.distance_mode.kind in (
            DistanceKind.WAVE_CONE, DistanceKind.PSEUDO_EUCLIDEAN)

    @property
    def is_complex(self) -> bool:
        return self.family in (Family.SCHRODINGER, Family.GEODESIC_HELMHOLTZ, Family.TRANSLATE_HARMONIC) or (
            self.family is Family.HELMHOLTZ and self.kind is Kind.FUNDAMENTAL)

    def radial(self, r) -> KernelValue:
        """Evaluate a radial family at distances ``r``."""
        fam = self.family
        if fam is Family.LAPLACE:
            return eval_laplace(self.n, self.m, r, self.C)
        if fam is Family.HELMHOLTZ:
            return eval_helmholtz(self.n, self.m, self.scale, r, self.kind)
        if fam is Family.MOD_HELMHOLTZ:
            return eval_mod_helmholtz(self.n, self.scale, r, self.kind, self.normalization)
        if fam is Family.HARTLEY:
            return eval_hartley_basis(self.n, self.scale, r)
        if fam in _RADIAL:
            val = np.asarray(eval_mq_family(MQKind(fam.value), self.n, self.scale, r, self.C))
            return _pack(val, np.zeros(val.shape, dtype=bool))
        raise KernelError(f"{fam.value} is not a radial family")

    def evaluate(self, x, centers, t_x=None, t_c=None) -> KernelValue:
        """Kernel matrix between points ``x`` (N, d) and ``centers`` (M, d).

        Scalar-point inputs (1-D arrays) give a scalar result. Time arrays are
        required for time-space families and cone/pseudo-Euclidean modes.
        """
        x = np.asarray(x, dtype=float)
        centers = np.asarray(centers, dtype=float)
        scalar = x.ndim == 1 and centers.ndim == 1
        X = np.atleast_2d(x)[:, None, :]
        Cc = np.atleast_2d(centers)[None, :, :]
        if X.shape[-1] != Cc.shape[-1]:
            raise geometry.DimensionError("point and center dimensions differ")
        tX = tC = None
        if self.needs_time:
            if t_x is None or t_c is None:
                raise geometry.MissingTimeError(f"{self.family.value} requires time coordinates")
            tX = np.atleast_1d(np.asarray(t_x, dtype=float))[:, None]
            tC = np.atleast_1d(np.asarray(t_c, dtype=float))[None, :]
        out = self._evaluate(X, Cc, tX, tC)
        if scalar:
            return KernelValue(float(out.re[0, 0]), float(out.im[0, 0]), bool(out.singular[0, 0]))
        return out

    def _evaluate(self, X, Cc, tX, tC) -> KernelValue:
        fam = self.family
        if fam in _RADIAL:
            mode = self.distance_mode
            if mode.kind is DistanceKind.EUCLIDEAN:
                return self.radial(geometry.euclidean(X, Cc))
            if mode.kind is DistanceKind.FRACTIONAL:
                return self.radial(geometry.fractional_distance(X, Cc, mode.param))
            if mode.kind is DistanceKind.WAVE_CONE:
                r, inside = geometry.wave_cone_argument(X, Cc, mode.param, tX, tC)
            else:
                r = geometry.pseudo_euclidean(X, Cc, mode.param, tX, tC)
                inside = np.isfinite(r)
            val = self.radial(np.where(inside, r, 1.0))
            z = np.where(inside, val.value, 0.0)
            return _pack(z, np.asarray(val.singular) & inside)
        if fam in (Family.CONV_DIFF, Family.COMPOSITE_CD_LAPLACE):
            v = np.asarray(self.v)
            if fam is Family.CONV_DIFF:
                return eval_conv_diff(self.n, self.D, v, self.k, X, Cc, self.kind, self.exp_sign)
            return eval_composite_cd_laplace(self.n, self.D, v, self.k, X, Cc, self.exp_sign)
        if fam is Family.HEAT:
            return eval_heat(self.n, self.scale, geometry.euclidean(X, Cc), tX - tC)
        if fam is Family.SCHRODINGER:
            return eval_schrodinger(self.n, self.scale, self.hbar, geometry.euclidean(X, Cc), tX - tC)
        if fam in (Family.GEODESIC_LAPLACE, Family.GEODESIC_HEAT, Family.GEODESIC_HELMHOLTZ):
            return eval_geodesic(fam, self.n, self.anisotropy, X, Cc, lam=self.scale, t_x=tX, t_xi=tC)
        if fam is Family.AXISYM_LAPLACE:
            _require_dim(X, 2, fam)
            return eval_axisym_laplace(X[..., 0], X[..., 1], Cc[..., 0], Cc[..., 1])
        if fam is Family.TRANSLATE_HARMONIC:
            _require_dim(X, 2, fam)
            return eval_translate_harmonic(self.variant, self.scale, X[..., 0], X[..., 1],
                                           Cc[..., 0], Cc[..., 1])
        raise KernelError(f"no evaluator for {fam.value}")  # pragma: no cover

    def replace(self, **changes) -> "KernelSpec":
        return dataclasses.replace(self, **changes)

    # -- key=value serialization ---------------------------------------------

    def to_config(self) -> dict[str, str]:
        cfg = {
            "family": self.family.value,
            "kind": self.kind.value,
            "n": repr(self.n),
            "m": str(self.m),
            "scale": repr(float(self.scale)),
            "D": repr(float(self.D)),
            "k": repr(float(self.k)),
            "c": repr(float(self.c)),
            "C": repr(float(self.C)),
            "distance_mode": str(self.distance_mode),
            "normalization": self.normalization.value,
            "variant": self.variant.value,
            "hbar": repr(float(self.hbar)),
            "exp_sign": repr(float(self.exp_sign)),
        }
        if self.v is not None:
            cfg["v"] = ",".join(repr(x) for x in self.v)
        if self.anisotropy is not None:
            cfg["kappa"] = ",".join(repr(float(x)) for x in self.anisotropy.kappa.ravel())
        return cfg

    @classmethod
    def from_config(cls, cfg: dict[str, str]) -> "KernelSpec":
        cfg = dict(cfg)
        if "family" not in cfg:
            raise KernelError("kernel config requires 'family'")
        unknown = set(cfg) - SPEC_KEYS
        if unknown:
            raise KernelError(f"unknown kernel keys: {', '.join(sorted(unknown))}")
        kw: dict = {"family": cfg["family"].upper()}
        if "kind" in cfg:
            kw["kind"] = cfg["kind"].upper()
        for key in ("n", "scale", "D", "k", "c", "C", "hbar", "exp_sign"):
            if key in cfg:
                kw[key] = float(cfg[key])
        if "m" in cfg:
            kw["m"] = int(cfg["m"])
        if "v" in cfg:
            kw["v"] = tuple(float(x) for x in cfg["v"].split(","))
        if "kappa" in cfg:
            vals = np.array([float(x) for x in cfg["kappa"].split(",")])
            side = int(round(math.sqrt(vals.size)))
            if side * side != vals.size:
                raise KernelError("kappa must have a square number of entries (row-major)")
            kw["anisotropy"] = AnisotropyMatrix(vals.reshape(side, side))
        if "distance_mode" in cfg:
            kw["distance_mode"] = DistanceMode.parse(cfg["distance_mode"])
        if "normalization" in cfg:
            kw["normalization"] = cfg["normalization"].upper()
        if "variant" in cfg:
            kw["variant"] = cfg["variant"].upper()
        return cls(**kw)


SPEC_KEYS = {"family", "kind", "n", "m", "scale", "v", "D", "k", "c", "C", "kappa",
             "distance_mode", "normalization", "variant", "hbar", "exp_sign"}


def _require_dim(X, d, fam):
    if X.shape[-1] != d:
        raise geometry.DimensionError(f"{fam.value} requires {d}-D points")
