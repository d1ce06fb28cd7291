import math

import numpy as np
import pytest

from dfwkit.sigmoid import (HyperbolicKind, SigmoidDomainError, SigmoidFamily, SigmoidSpec,
                            hyperbolic_g, modhelm_fund_simplified, sigmoid, sigmoid_range)

A_GRID = np.linspace(0.01, 30.0, 600)

MONOTONE = [
    SigmoidSpec("LOGISTIC", s=1.3),
    SigmoidSpec("MODHELM_FUND", n=1, s=0.7),
    SigmoidSpec("MODHELM_FUND", n=2, s=1.0),
    SigmoidSpec("MODHELM_FUND", n=3, s=2.0),
    SigmoidSpec("MODHELM_GEN", n=1, s=0.5),
    SigmoidSpec("MODHELM_GEN", n=3, s=1.0),
    SigmoidSpec("LAPLACE_CHEAP", n=3, s=1.0),
    SigmoidSpec("LAPLACE_CHEAP", n=4.5, s=0.3),
    SigmoidSpec("HEAT_TS", n=1, s=1.0),
    SigmoidSpec("CONVDIFF_FUND", n=2, s=1.0, w=(1.0, 0.0), D=0.5),
]


def _check_monotone(values):
    d = np.diff(values)
    assert np.all(d >= 0)
    live = values[1:] < 1.0 - 1e-12  # below this, steps are resolvable in double precision
    assert np.all(d[live] > 0)


@pytest.mark.parametrize("spec", MONOTONE, ids=lambda s: f"{s.family.value}-n{s.n:g}")
def test_range_and_monotone(spec):
    lo, hi = sigmoid_range(spec)
    vals = np.asarray(sigmoid(spec, A_GRID))
    assert np.all(vals > lo) and np.all(vals <= hi)
    _check_monotone(vals)


def test_values():
    assert sigmoid(SigmoidSpec("LOGISTIC"), 0.0) == 0.5
    assert sigmoid(SigmoidSpec("MODHELM_FUND", n=1, s=1.0), 1.0) == pytest.approx(0.8446375965030364, rel=1e-14)
    # 1-D general: phi# = e^{sA} / 2s
    s, A = 0.5, 2.0
    k = math.exp(s * A) / (2 * s)
    assert sigmoid(SigmoidSpec("MODHELM_GEN", n=1, s=s), A) == pytest.approx((k - 1) / (k + 1), rel=1e-14)


def test_limits():
    big = 1e6
    assert sigmoid(SigmoidSpec("MODHELM_FUND", n=3, s=1.0), big) == pytest.approx(1.0, abs=1e-12)
    assert sigmoid(SigmoidSpec("MODHELM_GEN", n=2, s=1.0), 800.0) == 1.0
    assert sigmoid(SigmoidSpec("LAPLACE_CHEAP", n=3, s=1.0), big) > 1 - 1e-6
    assert sigmoid(SigmoidSpec("MODHELM_FUND", n=3, s=1.0), 1e-6) < 1e-3
    # n = 2 diverges only logarithmically at the origin
    two = [sigmoid(SigmoidSpec("MODHELM_FUND", n=2, s=1.0), 10.0 ** -k) for k in (2, 4, 6, 8)]
    assert all(b < a for a, b in zip(two, two[1:]))


def test_convdiff_projection_shifts():
    spec = SigmoidSpec("CONVDIFF_FUND", n=3, s=1.0, D=0.5)
    base = sigmoid(SigmoidSpec("MODHELM_FUND", n=3, s=1.0), 0.8)
    assert sigmoid(spec, 0.8, projection=0.0) == pytest.approx(base, rel=1e-14)
    assert sigmoid(spec, 0.8, projection=1.0) > base


def test_helmholtz_families_bounded():
    fund = np.asarray(sigmoid(SigmoidSpec("HELMHOLTZ_FUND", n=2, s=1.0), A_GRID))
    gen = np.asarray(sigmoid(SigmoidSpec("HELMHOLTZ_GEN", n=3, s=1.0), A_GRID))
    assert np.all((fund > 0) & (fund < 1))
    assert np.all((gen > -1) & (gen <= 1))


def test_heat_time_dependence():
    spec = SigmoidSpec("HEAT_TS", n=1, s=1.0, alpha=2.0)
    assert sigmoid(spec, 0.5, dt=-1.0) == 1.0
    assert sigmoid(spec, 0.5, dt=1.0) < 1.0


@pytest.mark.parametrize("kind", list(HyperbolicKind))
def test_hyperbolic_1d_degeneration(kind):
    s = 1.7
    r = np.linspace(0.05, 3.0, 40)
    sinh, cosh = np.sinh(s * r) / s, np.cosh(s * r) / s
    expected = {
        HyperbolicKind.SING: sinh, HyperbolicKind.COSG: cosh, HyperbolicKind.TANG: sinh / cosh,
        HyperbolicKind.CSCG: 1 / sinh, HyperbolicKind.SECG: 1 / cosh, HyperbolicKind.COTHG: cosh / sinh,
    }[kind]
    got = hyperbolic_g(kind, 1, s, r)
    assert np.allclose(got, expected, rtol=1e-12, atol=0)


def test_hyperbolic_higher_dimensions():
    # tang stays in (0, 1) and cosg > sing > 0 for n = 3
    r = np.linspace(0.2, 4.0, 30)
    t = hyperbolic_g("tang", 3, 1.0, r)
    assert np.all((t > -1) & (t < 1))
    assert np.all(hyperbolic_g("cosg", 3, 1.0, r) > hyperbolic_g("sing", 3, 1.0, r))
    with pytest.raises(SigmoidDomainError):
        hyperbolic_g("sing", 3, 1.0, 0.0)
    with pytest.raises(SigmoidDomainError):
        hyperbolic_g("cscg", 1, 1.0, 0.0)
    with pytest.raises(SigmoidDomainError):
        hyperbolic_g("sing", 1, 0.0, 1.0)


def test_domain_errors():
    with pytest.raises(SigmoidDomainError):
        SigmoidSpec("LAPLACE_CHEAP", n=2)
    with pytest.raises(SigmoidDomainError):
        SigmoidSpec("HELMHOLTZ_FUND", n=1)
    with pytest.raises(SigmoidDomainError):
        SigmoidSpec("LOGISTIC", s=0.0)
    with pytest.raises(SigmoidDomainError):
        SigmoidSpec("CONVDIFF_GEN", D=0.0)
    with pytest.raises(SigmoidDomainError):
        sigmoid(SigmoidSpec("MODHELM_FUND", n=3), 0.0)
    with pytest.raises(SigmoidDomainError):
        sigmoid(SigmoidSpec("MODHELM_GEN", n=3), -1.0)
    assert sigmoid(SigmoidSpec("MODHELM_FUND", n=1), 0.0) == pytest.approx(1 / 1.5)


def test_simplified_form():
    exact = sigmoid(SigmoidSpec("MODHELM_FUND", n=3, s=1.0), 5.0)
    approx = modhelm_fund_simplified(3, 1.0, 5.0)
    assert 0 < approx < 1 and 0 < exact < 1
    with pytest.raises(SigmoidDomainError):
        modhelm_fund_simplified(3, 1.0, 1.0)


def test_family_enum():
    assert SigmoidFamily("HEAT_TS") is SigmoidFamily.HEAT_TS
    assert sigmoid_range(SigmoidSpec("MODHELM_GEN")) == (-1.0, 1.0)
