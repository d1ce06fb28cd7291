"""Special functions used by the kernel catalog.

Production evaluation is delegated to :mod:`scipy.special` (AMOS / Cephes).
Each function also has an *oracle* that shares no code with the production
path: ascending power series and Hankel large-argument expansions summed in
extended precision with :mod:`mpmath` arithmetic, a shifted Stirling series
for the gamma function, and adaptive quadrature for the elliptic integral.
The oracles are slow and exist for verification only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np
from scipy import integrate, special

MAX_ORDER = 60.0
MAX_ARGUMENT = 1.0e4
SEAM = 30.0

_EPS = np.finfo(float).eps


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class RangeError(ValueError):
    """Argument outside the supported evaluation box."""


class BesselKind(str, Enum):
    J = "J"
    Y = "Y"
    I = "I"  # noqa: E741
    K = "K"
    H1 = "H1"


@dataclass(frozen=True)
class SpecFunResult:
    """Value plus a conservative absolute error estimate.

    ``value`` is real, or complex for the Hankel function.
    """

    value: float | complex | np.ndarray
    est_abs_error: float | np.ndarray


# ---------------------------------------------------------------------------
# gamma and sphere area


def gamma(x: float) -> float:
    """Gamma function for real ``x`` off the poles."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("gamma: argument must be finite")
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"gamma: pole at non-positive integer {x:g}")
    return math.gamma(x)


def unit_sphere_area(n: float) -> float:
    """Surface area ``2 pi^(n/2) / Gamma(n/2)`` of the unit sphere in R^n."""
    n = float(n)
    if not n > 0:
        raise DomainError("unit_sphere_area: n must be positive")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


# ---------------------------------------------------------------------------
# Bessel functions (production path)


def _check_bessel(kind: BesselKind, nu: float, x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError("bessel: non-finite argument")
    if abs(nu) > MAX_ORDER or np.any(x > MAX_ARGUMENT):
        raise RangeError(
            f"bessel: (nu={nu:g}, max x={np.max(x):g}) outside supported box "
            f"|nu| <= {MAX_ORDER:g}, x <= {MAX_ARGUMENT:g}"
        )
    if kind in (BesselKind.Y, BesselKind.K, BesselKind.H1):
        if np.any(x <= 0):
            raise DomainError(f"bessel {kind.value}: requires x > 0")
    elif np.any(x < 0):
        raise DomainError(f"bessel {kind.value}: requires x >= 0")


def _is_int(nu: float) -> bool:
    return float(nu) == math.floor(nu)


def bessel_j(nu: float, x):
    """J_nu(x) for x >= 0, any real order (negative orders via reflection)."""
    x = np.asarray(x, dtype=float)
    if nu >= 0:
        return special.jv(nu, x)
    a = -nu
    if _is_int(a):
        return (-1.0) ** int(a) * special.jv(a, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        return math.cos(a * math.pi) * special.jv(a, x) - math.sin(a * math.pi) * special.yv(a, x)


def bessel_y(nu: float, x):
    x = np.asarray(x, dtype=float)
    if nu >= 0:
        return special.yv(nu, x)
    a = -nu
    if _is_int(a):
        return (-1.0) ** int(a) * special.yv(a, x)
    return math.sin(a * math.pi) * special.jv(a, x) + math.cos(a * math.pi) * special.yv(a, x)


def bessel_i(nu: float, x):
    x = np.asarray(x, dtype=float)
    if nu >= 0 or _is_int(nu):
        return special.iv(abs(nu), x)
    a = -nu
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(x > 0, special.kv(a, np.where(x > 0, x, 1.0)), np.inf)
    return special.iv(a, x) + (2.0 / math.pi) * math.sin(a * math.pi) * k


def bessel_k(nu: float, x):
    x = np.asarray(x, dtype=float)
    return special.kv(abs(nu), x)


def hankel1(nu: float, x):
    x = np.asarray(x, dtype=float)
    if nu >= 0:
        return special.hankel1(nu, x)
    a = -nu
    return np.exp(1j * math.pi * a) * special.hankel1(a, x)


_BESSEL = {
    BesselKind.J: bessel_j,
    BesselKind.Y: bessel_y,
    BesselKind.I: bessel_i,
    BesselKind.K: bessel_k,
    BesselKind.H1: hankel1,
}


def bessel(kind: BesselKind | str, nu: float, x) -> SpecFunResult:
    """Evaluate a Bessel-family function with an error estimate.

    Parameters
    ----------
    kind : {"J", "Y", "I", "K", "H1"}
    nu : float
        Real order, ``|nu| <= 60``.
    x : float or array_like
        Argument, ``x > 0`` for Y, K, H1 and ``x >= 0`` otherwise,
        ``x <= 1e4``.

    Raises
    ------
    DomainError
        Argument outside the function's domain.
    RangeError
        Argument outside the supported box, or result overflows double
        precision (``I`` grows like ``e^x``).
    """
    kind = BesselKind(kind)
    nu = float(nu)
    xa = np.asarray(x, dtype=float)
    _check_bessel(kind, nu, xa)
    value = _BESSEL[kind](nu, xa)
    if not np.all(np.isfinite(value)):
        raise RangeError(f"bessel {kind.value}: result overflows at nu={nu:g}")
    if kind in (BesselKind.J, BesselKind.Y, BesselKind.H1):
        # oscillatory: the error scales with the modulus sqrt(J^2 + Y^2), not |value|
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            ya = special.yv(abs(nu), np.where(xa > 0, xa, 1.0))
            mod = np.hypot(special.jv(abs(nu), xa), np.where(xa > 0, ya, 0.0))
        scale = np.where(np.isfinite(mod), mod, np.abs(value)) + np.abs(value)
    else:
        scale = np.abs(value)
    err = 64.0 * _EPS * scale
    if np.ndim(value) == 0:
        value = value.item()
        err = float(err)
    return SpecFunResult(value, err)


# ---------------------------------------------------------------------------
# elliptic integral


def elliptic_complete_first(s: float) -> float:
    """Complete elliptic integral of the first kind, parameter convention.

    ``K(s) = int_0^{pi/2} dtheta / sqrt(1 - s sin^2 theta)``, ``0 <= s < 1``.
    """
    s = float(s)
    if not (0.0 <= s < 1.0):
        raise DomainError("elliptic_complete_first: requires 0 <= s < 1")
    return float(special.ellipk(s))


# ---------------------------------------------------------------------------
# oracles


def gamma_oracle(x: float, dps: int = 40) -> float:
    """Gamma via the Stirling series after shifting the argument above 30."""
    with mpmath.workdps(dps):
        z = mpmath.mpf(x)
        shift = mpmath.mpf(1)
        while z < 30:
            shift *= z
            z += 1
        # Bernoulli terms B_{2k} / (2k (2k-1) z^{2k-1})
        bern = [mpmath.mpf(1) / 6, mpmath.mpf(-1) / 30, mpmath.mpf(1) / 42,
                mpmath.mpf(-1) / 30, mpmath.mpf(5) / 66, mpmath.mpf(-691) / 2730,
                mpmath.mpf(7) / 6, mpmath.mpf(-3617) / 510, mpmath.mpf(43867) / 798,
                mpmath.mpf(-174611) / 330]
        lg = (z - mpmath.mpf(1) / 2) * mpmath.log(z) - z + mpmath.log(2 * mpmath.pi) / 2
        for k, b in enumerate(bern, start=1):
            lg += b / (2 * k * (2 * k - 1) * z ** (2 * k - 1))
        return float(mpmath.exp(lg) / shift)


def _series_dps(x: float) -> int:
    # terms grow like e^x before cancelling
    return 30 + int(x / 2.0) + 10


def _mp_jv_series(nu, x, sign):
    """sum_k sign^k (x/2)^(2k+nu) / (k! Gamma(k+nu+1)) in current precision."""
    half = x / 2
    q = half * half * sign
    if nu < 0 and nu == mpmath.floor(nu):
        # J_{-n} = (-1)^n J_n ; I_{-n} = I_n
        n = -nu
        base = _mp_jv_series(n, x, sign)
        return base * ((-1) ** int(n) if sign < 0 else 1)
    term = half ** nu / mpmath.gamma(nu + 1)
    total = term
    k = 0
    tiny = mpmath.mpf(10) ** (-mpmath.mp.dps - 5)
    while True:
        k += 1
        term = term * q / (k * (k + nu))
        total += term
        if abs(term) <= tiny * abs(total) and k > abs(x):
            break
    return total


def _mp_int_second_kind(n, x, modified):
    """Y_n or K_n for integer n >= 0 from the logarithmic ascending series."""
    half = x / 2
    q = half * half
    euler = mpmath.euler

    def harmonic(k):
        return mpmath.fsum(mpmath.mpf(1) / j for j in range(1, k + 1))

    finite = mpmath.mpf(0)
    for k in range(n):
        t = mpmath.factorial(n - k - 1) / mpmath.factorial(k) * half ** (2 * k - n)
        finite += t * ((-1) ** k if modified else 1)
    tail = mpmath.mpf(0)
    k = 0
    tiny = mpmath.mpf(10) ** (-mpmath.mp.dps - 5)
    hk, hnk = mpmath.mpf(0), harmonic(n)
    term = half ** n / mpmath.factorial(n)
    while True:
        psi_sum = (-euler + hk) + (-euler + hnk)
        tail += psi_sum * term
        k += 1
        term = term * (q if modified else -q) / (k * (n + k))
        hk += mpmath.mpf(1) / k
        hnk += mpmath.mpf(1) / (n + k)
        if abs(term) <= tiny and k > abs(x):
            break
    if modified:
        i_n = _mp_jv_series(n, x, +1)
        return (finite / 2 + (-1) ** (n + 1) * mpmath.log(half) * i_n
                + (-1) ** n * tail / 2)
    j_n = _mp_jv_series(n, x, -1)
    return (2 / mpmath.pi) * j_n * mpmath.log(half) - finite / mpmath.pi - tail / mpmath.pi


def bessel_series_oracle(kind: BesselKind | str, nu: float, x: float) -> complex | float:
    """Ascending-series oracle in extended precision (any x, slow for large x)."""
    kind = BesselKind(kind)
    with mpmath.workdps(_series_dps(float(x))):
        nu_m = mpmath.mpf(nu)
        xm = mpmath.mpf(x)
        integer = float(nu) == math.floor(nu)
        if kind is BesselKind.J:
            return float(_mp_jv_series(nu_m, xm, -1))
        if kind is BesselKind.I:
            return float(_mp_jv_series(nu_m, xm, +1))
        n_abs = abs(nu_m)
        if kind in (BesselKind.Y, BesselKind.H1):
            if integer:
                y = _mp_int_second_kind(int(n_abs), xm, modified=False)
                if nu < 0:
                    y *= (-1) ** int(n_abs)
            else:
                jp = _mp_jv_series(nu_m, xm, -1)
                jm = _mp_jv_series(-nu_m, xm, -1)
                y = (jp * mpmath.cos(nu_m * mpmath.pi) - jm) / mpmath.sin(nu_m * mpmath.pi)
            if kind is BesselKind.Y:
                return float(y)
            return complex(float(_mp_jv_series(nu_m, xm, -1)), float(y))
        # K, even in nu
        if float(n_abs) == math.floor(n_abs):
            return float(_mp_int_second_kind(int(n_abs), xm, modified=True))
        ip = _mp_jv_series(n_abs, xm, +1)
        im = _mp_jv_series(-n_abs, xm, +1)
        return float(mpmath.pi / 2 * (im - ip) / mpmath.sin(n_abs * mpmath.pi))


def _hankel_coeffs(nu, x):
    """Partial sums of a_k(nu)/x^k with optimal truncation."""
    mu = 4 * nu * nu
    terms = [mpmath.mpf(1)]
    k = 0
    while k < 200:
        k += 1
        nxt = terms[-1] * (mu - (2 * k - 1) ** 2) / (k * 8 * x)
        if abs(nxt) >= abs(terms[-1]) and k > 1:
            break
        terms.append(nxt)
        if abs(nxt) < mpmath.mpf(10) ** (-mpmath.mp.dps):
            break
    return terms


def bessel_asymptotic_oracle(kind: BesselKind | str, nu: float, x: float) -> complex | float:
    """Hankel large-argument expansions, optimally truncated.

    Accurate to ~1e-12 or better once ``x`` is well above ``nu**2``.
    """
    kind = BesselKind(kind)
    with mpmath.workdps(40):
        nu_m = mpmath.mpf(abs(nu)) if kind is BesselKind.K else mpmath.mpf(nu)
        xm = mpmath.mpf(x)
        a = _hankel_coeffs(nu_m, xm)
        if kind is BesselKind.K:
            s = mpmath.fsum(a)
            return float(mpmath.sqrt(mpmath.pi / (2 * xm)) * mpmath.exp(-xm) * s)
        if kind is BesselKind.I:
            s = mpmath.fsum((-1) ** k * t for k, t in enumerate(a))
            return float(mpmath.exp(xm) / mpmath.sqrt(2 * mpmath.pi * xm) * s)
        p = mpmath.fsum((-1) ** (k // 2) * t for k, t in enumerate(a) if k % 2 == 0)
        q = mpmath.fsum((-1) ** (k // 2) * t for k, t in enumerate(a) if k % 2 == 1)
        w = xm - nu_m * mpmath.pi / 2 - mpmath.pi / 4
        amp = mpmath.sqrt(2 / (mpmath.pi * xm))
        j = amp * (p * mpmath.cos(w) - q * mpmath.sin(w))
        y = amp * (p * mpmath.sin(w) + q * mpmath.cos(w))
        if kind is BesselKind.J:
            return float(j)
        if kind is BesselKind.Y:
            return float(y)
        return complex(float(j), float(y))


def bessel_oracle(kind: BesselKind | str, nu: float, x: float) -> complex | float:
    """Series below the seam (x <= 30), Hankel asymptotics above.

    Above the seam the asymptotic branch is only used while ``x > nu**2``;
    otherwise the series is summed at higher precision.
    """
    if x <= SEAM or x <= nu * nu:
        return bessel_series_oracle(kind, nu, x)
    return bessel_asymptotic_oracle(kind, nu, x)


def elliptic_oracle(s: float) -> float:
    """Adaptive quadrature of the defining integral."""
    val, _ = integrate.quad(
        lambda t: 1.0 / math.sqrt(1.0 - s * math.sin(t) ** 2), 0.0, math.pi / 2,
        epsabs=0.0, epsrel=1e-13, limit=200,
    )
    return val
