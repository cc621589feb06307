import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from mcnormal import core
from mcnormal import inference as inf
from mcnormal.core import McNParams, ModelKind
from mcnormal.data import Dataset
from mcnormal.errors import DomainError, ParameterError

THETA = McNParams(2, 3, 1.5, 1, 2)


@pytest.fixture(scope="module")
def sample200():
    return core.sample(McNParams(2, 0.5, 1.5, 50, 10), 200, seed=7)


def test_loglik_is_sum_of_log_densities():
    x = np.array([-1.0, 0.5, 2.0, 4.0])
    assert inf.loglik(THETA, x) == pytest.approx(np.sum(core.log_pdf(THETA, x)), rel=1e-14)
    assert inf.loglik(THETA, Dataset.from_values(x)) == inf.loglik(THETA, x)


def test_normal_score_closed_form():
    x = np.array([0.3, 1.1, 2.5, -0.4])
    p = McNParams(1, 1, 1, 0.5, 1.3)
    U = inf.score(p, x)
    z = (x - p.mu) / p.sigma
    assert U[3] == pytest.approx(np.sum(z) / p.sigma, rel=1e-12)
    assert U[4] == pytest.approx(np.sum(z * z - 1) / p.sigma, rel=1e-12)


@pytest.mark.parametrize("theta", [(2, 3, 1.5, 1, 2), (0.4, 0.7, 2.5, -1, 0.8), (1, 1, 1, 0, 1)])
def test_score_matches_finite_differences(theta, sample200):
    p = McNParams(*theta)
    x = (sample200 - 50) / 10
    U = inf.score(p, x)
    th = np.array(theta, dtype=float)
    for i in range(5):
        h = 1e-6 * max(abs(th[i]), 1.0)
        e = np.zeros(5)
        e[i] = h
        fd = (inf.loglik(McNParams(*(th + e)), x) - inf.loglik(McNParams(*(th - e)), x)) / (2 * h)
        assert U[i] == pytest.approx(fd, rel=1e-5, abs=1e-5)


def test_analytic_hessian_matches_numeric(sample200):
    x = (sample200 - 50) / 10
    oi = inf.observed_info(McNParams(0.8, 1.7, 1.2, 0.2, 1.1), x)
    assert oi.all_validated
    assert np.allclose(oi.matrix, oi.matrix.T)


def test_observed_info_normal_at_mle():
    x = stats.norm.rvs(size=300, random_state=3) * 2 + 1
    mu, sigma = x.mean(), x.std()
    n = x.size
    I = np.asarray(inf.observed_info(McNParams(1, 1, 1, mu, sigma), x))
    assert I[3, 3] == pytest.approx(n / sigma ** 2, rel=1e-10)
    assert I[4, 4] == pytest.approx(2 * n / sigma ** 2, rel=1e-10)
    assert I[3, 4] == pytest.approx(0.0, abs=1e-8 * n)
    # observed information is the negative Hessian
    assert I[0, 1] == pytest.approx(-n * special.polygamma(1, 2.0), rel=1e-10)


def test_fit_normal_closed_form():
    r = inf.fit(ModelKind.NORMAL, [1.0, 2.0, 3.0])
    assert r.estimates["mu"] == pytest.approx(2.0)
    assert r.estimates["sigma"] == pytest.approx(math.sqrt(2 / 3))
    assert r.converged and r.k == 2
    assert r.aic == pytest.approx(-2 * r.loglik + 4)
    assert r.bic == pytest.approx(-2 * r.loglik + 2 * math.log(3))
    with pytest.raises(DomainError):
        inf.fit(ModelKind.BN, [1.0, 2.0, 3.0])


def test_fit_options_validation():
    with pytest.raises(DomainError):
        inf.FitOptions(starts=0)
    with pytest.raises(DomainError):
        inf.FitOptions(gtol=0.0)


@pytest.fixture(scope="module")
def nested_fits(sample200):
    models = [ModelKind.NORMAL, ModelKind.EN, ModelKind.BN, ModelKind.KWN, ModelKind.MCN]
    return inf.fit_models(models, sample200, inf.FitOptions(starts=4))


def test_nested_loglik_monotone(nested_fits):
    ll = {m: r.loglik for m, r in nested_fits.items()}
    tol = 1e-4
    assert ll[ModelKind.EN] >= ll[ModelKind.NORMAL] - tol
    assert ll[ModelKind.BN] >= ll[ModelKind.EN] - tol
    assert ll[ModelKind.KWN] >= ll[ModelKind.EN] - tol
    assert ll[ModelKind.MCN] >= max(ll[ModelKind.BN], ll[ModelKind.KWN]) - tol


def test_fit_optimum_is_stationary_and_beats_starts(nested_fits, sample200):
    r = nested_fits[ModelKind.BN]
    U = inf.score(r.theta_hat, sample200)
    # only the free coordinates a, b, mu, sigma are stationary
    free = U[[0, 1, 3, 4]] * np.array([r.theta_hat.a, r.theta_hat.b, 1.0, r.theta_hat.sigma])
    assert np.max(np.abs(free)) < 1e-3
    starts = [s["initial_loglik"] for s in r.diagnostics["starts"] if "initial_loglik" in s]
    assert starts and r.loglik >= max(starts) - 1e-9
    assert set(r.estimates) == {"a", "b", "mu", "sigma"}


def test_reparametrized_and_raw_fits_agree(sample200):
    a = inf.fit(ModelKind.BN, sample200, inf.FitOptions(starts=4, reparam=True))
    b = inf.fit(ModelKind.BN, sample200, inf.FitOptions(starts=4, reparam=False))
    assert a.loglik == pytest.approx(b.loglik, abs=1e-3)


def test_lr_tests(nested_fits):
    mcn = nested_fits[ModelKind.MCN]
    same = inf.lr_test(mcn, mcn)
    assert same.w == 0.0 and same.p_value == 1.0 and same.df == 0
    t = inf.lr_test(nested_fits[ModelKind.NORMAL], mcn)
    assert t.df == 3
    assert t.p_value == pytest.approx(stats.chi2.sf(t.w, 3))
    with pytest.raises(ParameterError):
        inf.lr_test(nested_fits[ModelKind.BN], nested_fits[ModelKind.KWN])
    rows = inf.standard_lr_tests(nested_fits)
    assert [r.null_model for r in rows] == [ModelKind.BN, ModelKind.KWN, ModelKind.EN, ModelKind.NORMAL]


def test_skew_normal_loglik_matches_scipy():
    x = np.array([-1.2, 0.1, 0.7, 2.4])
    ref = np.sum(stats.skewnorm.logpdf(x, 2.5, loc=0.3, scale=1.4))
    assert inf.skew_normal_loglik(2.5, 0.3, 1.4, x) == pytest.approx(ref, rel=1e-12)


def test_skew_normal_fit_matches_scipy_mle():
    x = stats.skewnorm.rvs(4.0, loc=1, scale=2, size=400, random_state=11)
    r = inf.fit(ModelKind.SKEW_NORMAL, x)
    ref = stats.skewnorm.fit(x)
    assert r.loglik >= np.sum(stats.skewnorm.logpdf(x, *ref)) - 1e-6


def test_descriptive_stats():
    x = [1.0, 2.0, 2.0, 3.0, 7.0]
    d = inf.descriptive_stats(x)
    assert d.sd == pytest.approx(np.std(x, ddof=1))
    assert d.modes == (2.0,) and d.median == 2.0
    assert d.skewness == pytest.approx(stats.skew(x, bias=False))
    assert d.kurtosis == pytest.approx(stats.kurtosis(x, bias=False))
    c = inf.descriptive_stats([4.0, 4.0, 4.0])
    assert c.sd == 0.0 and c.skewness is None and c.kurtosis is None
    with pytest.raises(DomainError):
        inf.descriptive_stats([1.0])


def test_bn_fit_recovers_truth_roughly():
    truth = McNParams(3, 0.6, 1, 10, 2)
    x = core.sample(truth, 3000, seed=5)
    r = inf.fit(ModelKind.BN, x, inf.FitOptions(starts=4))
    assert r.loglik >= inf.loglik(truth, x)
    dens = core.pdf(r.theta_hat, np.linspace(5, 25, 9))
    assert np.allclose(dens, core.pdf(truth, np.linspace(5, 25, 9)), atol=0.01)


@settings(max_examples=15, deadline=None)
@given(a=st.floats(0.3, 5), b=st.floats(0.3, 5), c=st.floats(0.3, 5),
       mu=st.floats(-3, 3), sigma=st.floats(0.3, 3))
def test_score_matches_finite_differences_property(a, b, c, mu, sigma):
    p = McNParams(a, b, c, mu, sigma)
    x = core.sample(p, 30, seed=1)
    U = inf.score(p, x)
    th = np.array(p.as_tuple())
    for i in range(5):
        h = 1e-6 * max(abs(th[i]), 1.0)
        e = np.zeros(5)
        e[i] = h
        fd = (inf.loglik(McNParams(*(th + e)), x) - inf.loglik(McNParams(*(th - e)), x)) / (2 * h)
        assert U[i] == pytest.approx(fd, rel=1e-4, abs=1e-4 * max(1.0, abs(fd)))
