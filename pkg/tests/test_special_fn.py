import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcnormal import special_fn as sf
from mcnormal.errors import DomainError, NumericError, UnsupportedOrderError

mp.mp.dps = 40
shapes = st.floats(min_value=0.05, max_value=50.0)
unit = st.floats(min_value=1e-6, max_value=1 - 1e-6)


@pytest.mark.parametrize("a,b", [(0.3, 0.7), (2.0, 5.0), (1e15, 3.0), (1e-3, 1e-3)])
def test_ln_beta_matches_mpmath(a, b):
    ref = float(mp.log(mp.beta(a, b)))
    assert sf.ln_beta(a, b) == pytest.approx(ref, rel=1e-13, abs=1e-13)


def test_ln_beta_rejects_bad_shapes():
    with pytest.raises(DomainError):
        sf.ln_beta(-1.0, 2.0)


@pytest.mark.parametrize("x,a,b", [(0.3, 2.0, 3.0), (0.9, 0.5, 0.5), (1e-5, 0.3, 5.0), (0.999, 5.0, 0.3), (0.5, 200.0, 150.0)])
def test_reg_inc_beta_matches_mpmath(x, a, b):
    ref = float(mp.betainc(a, b, 0, x, regularized=True))
    assert sf.reg_inc_beta(x, a, b) == pytest.approx(ref, rel=1e-12)


def test_reg_inc_beta_endpoints_and_domain():
    assert sf.reg_inc_beta(0.0, 2.0, 3.0) == 0.0
    assert sf.reg_inc_beta(1.0, 2.0, 3.0) == 1.0
    with pytest.raises(DomainError):
        sf.reg_inc_beta(1.5, 2.0, 3.0)


def test_log_reg_inc_beta_deep_tails():
    # x = 1e-200: I_x is far below the smallest double
    lx = -200 * math.log(10)
    li, lu = sf.log_reg_inc_beta(lx, math.log1p(-1e-200), 3.0, 2.0)
    ref = mp.log(mp.betainc(3, 2, 0, mp.mpf("1e-200"), regularized=True))
    assert li == pytest.approx(float(ref), rel=1e-12)
    assert lu == pytest.approx(0.0, abs=1e-300)
    # complement side, 1 - x = 1e-30
    li, lu = sf.log_reg_inc_beta(math.log1p(-1e-30), -30 * math.log(10), 2.0, 4.0)
    # 1 - I_x(a, b) = I_{1-x}(b, a), integrated from 0 to avoid cancellation in the oracle
    ref = mp.log(mp.betainc(4, 2, 0, mp.mpf("1e-30"), regularized=True))
    assert lu == pytest.approx(float(ref), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(u=unit, a=shapes, b=shapes)
def test_inverse_incomplete_beta_round_trip(u, a, b):
    x = sf.inv_reg_inc_beta(u, a, b)
    if 0.0 < x < 1.0:
        assert sf.reg_inc_beta(x, a, b) == pytest.approx(u, rel=1e-9, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(x1=unit, x2=unit, a=shapes, b=shapes)
def test_reg_inc_beta_monotone(x1, x2, a, b):
    lo, hi = sorted((x1, x2))
    assert sf.reg_inc_beta(lo, a, b) <= sf.reg_inc_beta(hi, a, b) + 1e-15


@pytest.mark.parametrize("a,b,c,z", [(1.0, 1.0, 2.0, 0.5), (0.7, -2.3, 1.4, 0.9), (2.5, 3.0, 4.5, 0.99), (-3, 2.0, 1.5, 0.7)])
def test_gauss_2F1_matches_mpmath(a, b, c, z):
    assert sf.gauss_2F1(a, b, c, z) == pytest.approx(float(mp.hyp2f1(a, b, c, z)), rel=1e-12)


def test_gauss_2F1_domain():
    with pytest.raises(DomainError):
        sf.gauss_2F1(1.0, 1.0, -2.0, 0.5)
    with pytest.raises(DomainError):
        sf.gauss_2F1(1.0, 1.0, 2.0, 1.0)


@pytest.mark.parametrize("a,b,x", [(0.5, 1.5, 2.0), (1.0, 2.0, -30.0), (-4, 1.5, -3.0), (2.3, 0.7, 15.0)])
def test_hyp1f1_matches_mpmath(a, b, x):
    assert sf.hyp1f1(a, b, x) == pytest.approx(float(mp.hyp1f1(a, b, x)), rel=1e-12)


@pytest.mark.parametrize("k,m,x", [(0.25, 0.25, 1.0), (-1.0, 0.75, 4.0), (-4.25, 4.25, 2.0)])
def test_whittaker_M_matches_mpmath(k, m, x):
    assert sf.whittaker_M(k, m, x) == pytest.approx(float(mp.whitm(k, m, x)), rel=1e-12)


def test_whittaker_M_domain():
    with pytest.raises(DomainError):
        sf.whittaker_M(0.1, 0.2, 0.0)


def test_lauricella_one_variable_is_2F1():
    # inside the series region and on the unit-negative continuation
    assert sf.lauricella_FA(1, 0.8, (0.5,), (1.5,), (0.3,)) == pytest.approx(float(mp.hyp2f1(0.8, 0.5, 1.5, 0.3)), rel=1e-10)
    assert sf.lauricella_FA(1, 1.5, (0.5,), (1.5,), (-1.0,)) == pytest.approx(float(mp.hyp2f1(1.5, 0.5, 1.5, -1.0)), rel=1e-10)


def test_lauricella_two_variables_is_appell_F2():
    ref = float(mp.appellf2(1.2, 0.5, 0.5, 1.5, 1.5, 0.2, 0.3))
    assert sf.lauricella_FA(2, 1.2, (0.5, 0.5), (1.5, 1.5), (0.2, 0.3)) == pytest.approx(ref, rel=1e-10)


def test_lauricella_limits():
    assert sf.lauricella_FA(0, 1.0) == 1.0
    with pytest.raises(UnsupportedOrderError):
        sf.lauricella_FA(sf.LAURICELLA_MAX_VARS + 1, 1.0, (0.5,) * 5, (1.5,) * 5)
    with pytest.raises(DomainError):
        sf.lauricella_FA(2, 1.0, (0.5,), (1.5, 1.5))


@pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 3.7, 12.0, 250.0])
def test_polygamma_matches_mpmath(x):
    assert sf.digamma(x) == pytest.approx(float(mp.digamma(x)), rel=1e-13, abs=1e-14)
    assert sf.trigamma(x) == pytest.approx(float(mp.psi(1, x)), rel=1e-13)


def test_digamma_domain():
    with pytest.raises(DomainError):
        sf.digamma(0.0)


@pytest.mark.parametrize("z", [-40.0, -8.0, -1.0, 0.0, 2.0, 9.0])
def test_std_normal_log_tails(z):
    cdf = mp.ncdf(z)
    assert sf.std_normal_logcdf(z) == pytest.approx(float(mp.log(cdf)), rel=1e-13, abs=1e-300)
    assert sf.std_normal_logsf(z) == pytest.approx(float(mp.log(1 - cdf)), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("log_u", [-2000.0, -50.0, -0.7, -1e-3, -1e-20])
def test_std_normal_quantile_log(log_u):
    z = sf.std_normal_quantile_log(log_u)
    assert float(sf.std_normal_logcdf(z)) == pytest.approx(log_u, rel=1e-12)
    arr = sf.std_normal_quantile_log(np.array([log_u, log_u]))
    assert arr[0] == pytest.approx(z, rel=1e-12)


def test_series_config_validation():
    assert sf.SeriesConfig().max_terms_k > 0
    with pytest.raises(DomainError):
        sf.SeriesConfig(max_terms_k=0)
    with pytest.raises(DomainError):
        sf.SeriesConfig(rel_tol=-1.0)


def test_numeric_error_carries_diagnostics():
    with pytest.raises(NumericError) as info:
        sf.gauss_2F1(1.0, 1.0, 2.0, 0.999999, max_terms=10)
    assert info.value.diagnostics["terms"] == 10
