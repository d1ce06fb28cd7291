"""Kernel sigmoidal transfer functions and multidimensional hyperbolic
functions built from modified-Helmholtz kernels.

``phi#`` and ``phi*`` below are the general (I-Bessel) and fundamental
(K-Bessel) modified-Helmholtz kernels with ``mu = s``, evaluated at
distance ``r``. In 1-D they reduce to ``e^{+-s r} / 2s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kernels import (Kind, KernelError, Normalization, eval_heat, eval_mod_helmholtz,
                      helmholtz_fundamental_normalized)
from .specfun import unit_sphere_area


class SigmoidDomainError(ValueError):
    pass


class HyperbolicKind(str, Enum):
    SING = "sing"
    COSG = "cosg"
    TANG = "tang"
    CSCG = "cscg"
    SECG = "secg"
    COTHG = "cothg"


class SigmoidFamily(str, Enum):
    LOGISTIC = "LOGISTIC"
    MODHELM_FUND = "MODHELM_FUND"
    MODHELM_GEN = "MODHELM_GEN"
    CONVDIFF_FUND = "CONVDIFF_FUND"
    CONVDIFF_GEN = "CONVDIFF_GEN"
    HEAT_TS = "HEAT_TS"
    LAPLACE_CHEAP = "LAPLACE_CHEAP"
    HELMHOLTZ_FUND = "HELMHOLTZ_FUND"
    HELMHOLTZ_GEN = "HELMHOLTZ_GEN"


# families whose kernel is singular at A = 0
_SINGULAR_AT_ZERO = {SigmoidFamily.MODHELM_FUND, SigmoidFamily.LAPLACE_CHEAP,
                     SigmoidFamily.HELMHOLTZ_FUND, SigmoidFamily.CONVDIFF_FUND}


def _phi(n: float, s: float, r, general: bool):
    kind = Kind.GENERAL if general else Kind.FUNDAMENTAL
    return eval_mod_helmholtz(n, s, r, kind, Normalization.PLAIN)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def hyperbolic_g(kind: HyperbolicKind | str, n: float, s: float, r):
    """Multidimensional hyperbolic functions.

    ``sing = phi# - phi*``, ``cosg = phi# + phi*``, ``tang = sing / cosg``,
    ``cscg = 1 / sing``, ``secg = 1 / cosg``, ``cothg = cosg / sing``.
    In 1-D, ``sing = sinh(s r) / s`` and ``cosg = cosh(s r) / s``.

    Raises
    ------
    SigmoidDomainError
        ``r = 0`` for ``n >= 2`` (the fundamental kernel is singular), or a
        vanishing denominator.
    """
    kind = HyperbolicKind(kind)
    if not s > 0:
        raise SigmoidDomainError("slope s must be positive")
    if n < 1:
        raise SigmoidDomainError("n must be at least 1")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise SigmoidDomainError("r must be non-negative")
    gen = _phi(n, s, r, True)
    fund = _phi(n, s, r, False)
    if np.any(fund.singular):
        raise SigmoidDomainError(f"fundamental kernel singular at r = 0 for n = {n:g}")
    a, b = np.asarray(gen.re), np.asarray(fund.re)
    sing, cosg = a - b, a + b
    if kind is HyperbolicKind.SING:
        return _scalar(sing)
    if kind is HyperbolicKind.COSG:
        return _scalar(cosg)
    den = {HyperbolicKind.TANG: cosg, HyperbolicKind.SECG: cosg,
           HyperbolicKind.CSCG: sing, HyperbolicKind.COTHG: sing}[kind]
    if np.any(den == 0):
        raise SigmoidDomainError(f"{kind.value}: denominator vanishes")
    num = {HyperbolicKind.TANG: sing, HyperbolicKind.COTHG: cosg}.get(kind, 1.0)
    return _scalar(num / den)


@dataclass(frozen=True)
class SigmoidSpec:
    """Sigmoid family and parameters.

    ``w`` is the direction vector of the convection-diffusion families,
    ``D`` their diffusivity; ``alpha`` scales the time lag of HEAT_TS.
    """

    family: SigmoidFamily
    n: float = 1.0
    s: float = 1.0
    w: tuple[float, ...] | None = None
    D: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        fam = SigmoidFamily(self.family)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "n", float(self.n))
        if self.w is not None:
            object.__setattr__(self, "w", tuple(float(x) for x in np.atleast_1d(self.w)))
        if not self.n >= 1:
            raise SigmoidDomainError("n must be at least 1")
        if not self.s > 0:
            raise SigmoidDomainError("slope s must be positive")
        if fam is SigmoidFamily.LAPLACE_CHEAP and self.n < 3:
            raise SigmoidDomainError("LAPLACE_CHEAP requires n >= 3")
        if fam in (SigmoidFamily.HELMHOLTZ_FUND, SigmoidFamily.HELMHOLTZ_GEN) and self.n < 2:
            raise SigmoidDomainError("Helmholtz sigmoids require n >= 2")
        if fam in (SigmoidFamily.CONVDIFF_FUND, SigmoidFamily.CONVDIFF_GEN) and not self.D > 0:
            raise SigmoidDomainError("D must be positive")
        if fam is SigmoidFamily.HEAT_TS and not self.alpha > 0:
            raise SigmoidDomainError("alpha must be positive")


def sigmoid(spec: SigmoidSpec, A, *, projection=0.0, dt=1.0):
    """Sigmoid value at activation ``A``.

    LOGISTIC        ``1 / (1 + e^{-s A})``
    MODHELM_FUND    ``1 / (1 + phi*(A))``
    MODHELM_GEN     ``(phi#(A) - 1) / (phi#(A) + 1)``
    CONVDIFF_*      as MODHELM_* with the kernel multiplied by
                    ``exp(-projection / 2D)``; ``projection`` is ``w . x``
                    and ``A`` the distance input
    HEAT_TS         ``1 / (1 + u(s A, alpha dt))`` with the unit-conductivity
                    heat kernel ``u``
    LAPLACE_CHEAP   ``1 / (1 + (s A)^(2-n) / ((n-2) S_n))``
    HELMHOLTZ_FUND  ``1 / (1 + |H*(A)|)``
    HELMHOLTZ_GEN   ``(1 - |H#(A)|) / (1 + |H#(A)|)``

    The Helmholtz kernels are the unit-source kernels with wavenumber ``s``;
    their magnitude oscillates, so these sigmoids are not monotone.
    """
    fam = spec.family
    A = np.asarray(A, dtype=float)
    s, n = spec.s, spec.n
    if fam is SigmoidFamily.LOGISTIC:
        with np.errstate(over="ignore"):
            return _scalar(1.0 / (1.0 + np.exp(-s * A)))
    if np.any(A < 0) or (fam in _SINGULAR_AT_ZERO and np.any(A == 0) and not (
            fam in (SigmoidFamily.MODHELM_FUND, SigmoidFamily.CONVDIFF_FUND) and n < 2)):
        raise SigmoidDomainError(f"{fam.value}: activation outside the kernel's domain")
    if fam in (SigmoidFamily.MODHELM_FUND, SigmoidFamily.MODHELM_GEN,
               SigmoidFamily.CONVDIFF_FUND, SigmoidFamily.CONVDIFF_GEN):
        general = fam in (SigmoidFamily.MODHELM_GEN, SigmoidFamily.CONVDIFF_GEN)
        try:
            k = np.asarray(_phi(n, s, A, general).re)
        except KernelError as exc:
            raise SigmoidDomainError(str(exc)) from None
        if fam in (SigmoidFamily.CONVDIFF_FUND, SigmoidFamily.CONVDIFF_GEN):
            k = k * np.exp(-np.asarray(projection, dtype=float) / (2.0 * spec.D))
        with np.errstate(over="ignore", invalid="ignore"):
            out = (k - 1.0) / (k + 1.0) if general else 1.0 / (1.0 + k)
        if general:
            out = np.where(np.isinf(k), 1.0, out)
        return _scalar(out)
    if fam is SigmoidFamily.HEAT_TS:
        dt = np.asarray(dt, dtype=float)
        u = np.asarray(eval_heat(n, 1.0, s * A, spec.alpha * dt).re)
        return _scalar(1.0 / (1.0 + u))
    if fam is SigmoidFamily.LAPLACE_CHEAP:
        u = (s * A) ** (2.0 - n) / ((n - 2.0) * unit_sphere_area(n))
        return _scalar(1.0 / (1.0 + u))
    general = fam is SigmoidFamily.HELMHOLTZ_GEN
    h = helmholtz_fundamental_normalized(n, s, A, Kind.GENERAL if general else Kind.FUNDAMENTAL)
    mag = np.abs(np.asarray(h.value))
    return _scalar((1.0 - mag) / (1.0 + mag) if general else 1.0 / (1.0 + mag))


def modhelm_fund_simplified(n: float, s: float, A):
    """Cheap closed-form stand-in for MODHELM_FUND,
    ``1 / (1 + e^{-sA} / ((sA)^(n/2-1) ln A))``.

    Only meaningful for ``A > 1`` (``ln A`` vanishes at ``A = 1``); smaller
    activations are rejected. Never used by :func:`sigmoid`.
    """
    A = np.asarray(A, dtype=float)
    if np.any(A <= 1):
        raise SigmoidDomainError("simplified form is valid for A > 1 only")
    z = s * A
    return _scalar(1.0 / (1.0 + np.exp(-z) / (z ** (n / 2.0 - 1.0) * np.log(A))))


def sigmoid_range(spec: SigmoidSpec) -> tuple[float, float]:
    """Open interval the family maps into."""
    if spec.family in (SigmoidFamily.MODHELM_GEN, SigmoidFamily.CONVDIFF_GEN, SigmoidFamily.HELMHOLTZ_GEN):
        return (-1.0, 1.0)
    return (0.0, 1.0)

