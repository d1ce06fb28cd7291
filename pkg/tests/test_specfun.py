import math

import numpy as np
import pytest
from scipy import integrate

from dfwkit import specfun
from dfwkit.specfun import (BesselKind, DomainError, RangeError, bessel, bessel_asymptotic_oracle,
                            bessel_oracle, bessel_series_oracle, elliptic_complete_first, elliptic_oracle,
                            gamma, gamma_oracle, unit_sphere_area)

GRID = np.geomspace(0.05, 100.0, 50)
ORDERS = (0.0, 0.5, 1.0, 2.5)


def rel_err(kind, nu, x):
    got = bessel(kind, nu, x).value
    want = bessel_oracle(kind, nu, x)
    if kind in (BesselKind.J, BesselKind.Y, BesselKind.H1):
        j = bessel_oracle("J", nu, x)
        y = bessel_oracle("Y", nu, x)
        scale = math.hypot(j, y)
    else:
        scale = abs(want)
    return abs(got - want) / scale


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (0.5, math.sqrt(math.pi)), (5.0, 24.0)])
def test_gamma_examples(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-14)


def test_gamma_poles():
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(DomainError):
            gamma(x)


def test_gamma_matches_oracle():
    for x in np.linspace(0.5, 30.0, 50):
        assert abs(gamma(x) / gamma_oracle(x) - 1) < 1e-12


def test_gamma_recurrence():
    for x in np.linspace(0.5, 20.0, 40):
        assert abs(gamma(x + 1) / (x * gamma(x)) - 1) < 1e-12


@pytest.mark.parametrize("n, expected", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi)])
def test_unit_sphere_area(n, expected):
    assert unit_sphere_area(n) == pytest.approx(expected, rel=1e-14)


def test_unit_sphere_area_fractal_dimension():
    assert unit_sphere_area(2.5) == pytest.approx(2 * math.pi ** 1.25 / math.gamma(1.25), rel=1e-14)
    with pytest.raises(DomainError):
        unit_sphere_area(0.0)


def test_bessel_examples():
    assert bessel("J", 0, 0.0).value == 1.0
    assert bessel("I", 0, 0.0).value == 1.0
    assert bessel("K", 0, 1.0).value == pytest.approx(0.42102443824070834, rel=1e-12)
    assert bessel("J", 0, 1.0).value == pytest.approx(0.7651976865579666, rel=1e-12)


def test_k0_against_integral_representation():
    val, _ = integrate.quad(lambda t: math.exp(-math.cosh(t)), 0, 10.0, epsabs=0, epsrel=1e-13)
    assert bessel("K", 0, 1.0).value == pytest.approx(val, rel=1e-12)


def test_j0_truncated_power_series():
    s = sum((-1) ** k * 0.25 ** k / math.factorial(k) ** 2 for k in range(30))
    assert bessel("J", 0, 1.0).value == pytest.approx(s, rel=1e-14)


@pytest.mark.parametrize("kind", list(BesselKind))
@pytest.mark.parametrize("nu", ORDERS)
def test_bessel_matches_oracle_on_log_grid(kind, nu):
    worst = max(rel_err(kind, nu, x) for x in GRID)
    assert worst < 1e-9


def test_series_and_asymptotic_agree_at_seam():
    x = specfun.SEAM
    for kind in ("J", "Y", "K"):
        for nu in (0.0, 0.5, 1.0, 2.0):
            s = bessel_series_oracle(kind, nu, x)
            a = bessel_asymptotic_oracle(kind, nu, x)
            scale = abs(s) if kind == "K" else math.hypot(bessel_series_oracle("J", nu, x),
                                                          bessel_series_oracle("Y", nu, x))
            assert abs(s - a) / scale < 1e-9


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 5.0])
def test_wronskian(nu, x):
    i0, i1 = bessel("I", nu, x).value, bessel("I", nu + 1, x).value
    k0, k1 = bessel("K", nu, x).value, bessel("K", nu + 1, x).value
    assert abs(i0 * k1 + i1 * k0 - 1 / x) < 1e-9


def test_half_integer_closed_forms():
    for x in np.linspace(0.1, 10.0, 40):
        k = bessel("K", 0.5, x).value
        i = bessel("I", 0.5, x).value
        assert abs(k - math.sqrt(math.pi / (2 * x)) * math.exp(-x)) <= 1e-10 * abs(k)
        assert abs(i - math.sqrt(2 / (math.pi * x)) * math.sinh(x)) <= 1e-10 * abs(i)


def test_hankel_is_j_plus_iy():
    for x in (0.3, 4.0, 50.0):
        h = bessel("H1", 1.5, x).value
        assert h.real == pytest.approx(bessel("J", 1.5, x).value, rel=1e-14)
        assert h.imag == pytest.approx(bessel("Y", 1.5, x).value, rel=1e-14)


def test_negative_order_reflection():
    x = 2.3
    assert bessel("J", -2, x).value == pytest.approx(bessel("J", 2, x).value, rel=1e-14)
    assert bessel("J", -0.5, x).value == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.cos(x), rel=1e-12)
    assert bessel("K", -1.5, x).value == pytest.approx(bessel("K", 1.5, x).value, rel=1e-14)
    assert bessel("I", -0.5, x).value == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.cosh(x), rel=1e-12)
    assert bessel("Y", -0.5, x).value == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sin(x), rel=1e-12)


def test_bessel_vectorized_and_error_estimate():
    x = np.array([0.5, 1.0, 2.0])
    res = bessel("J", 1, x)
    assert res.value.shape == (3,)
    assert np.all(res.est_abs_error >= 0)
    assert np.all(np.abs(res.value - [bessel_oracle("J", 1, v) for v in x]) <= res.est_abs_error)


@pytest.mark.parametrize("kind", ["Y", "K", "H1"])
def test_bessel_domain_errors(kind):
    with pytest.raises(DomainError):
        bessel(kind, 0, 0.0)
    with pytest.raises(DomainError):
        bessel("J", 0, -1.0)


def test_bessel_range_errors():
    with pytest.raises(RangeError):
        bessel("J", 61, 1.0)
    with pytest.raises(RangeError):
        bessel("J", 0, 2e4)
    with pytest.raises(RangeError):
        bessel("I", 0, 1e4)  # overflows double precision


@pytest.mark.parametrize("s, expected", [(0.0, math.pi / 2), (0.5, 1.8540746773013719),
                                         (0.9, 2.5780921133481733)])
def test_elliptic_examples(s, expected):
    assert elliptic_complete_first(s) == pytest.approx(expected, rel=1e-12)


def test_elliptic_matches_quadrature_oracle():
    for s in np.linspace(0.0, 0.99, 50):
        assert abs(elliptic_complete_first(s) / elliptic_oracle(s) - 1) < 1e-10


def test_elliptic_domain():
    for s in (1.0, 1.5, -0.1):
        with pytest.raises(DomainError):
            elliptic_complete_first(s)
