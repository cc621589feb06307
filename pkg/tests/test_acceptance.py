"""Acceptance criteria 1-13.  Each check prints one PASS/FAIL line and the
session summary aggregates them per criterion."""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import integrate, special, stats

from mcnormal import core, inference, order_stats, series, shape
from mcnormal.core import McNParams, ModelKind
from mcnormal.data import Dataset, ingest

from conftest import ais_path, record

GRID = (0.3, 1.0, 2.0, 5.0)
TRIPLES = list(itertools.product(GRID, GRID, GRID))
PIECES = ((-np.inf, -5.0), (-5.0, 0.0), (0.0, 5.0), (5.0, np.inf))


def _integral(f, pieces=PIECES):
    return sum(integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)[0] for lo, hi in pieces)


# --------------------------------------------------------------------- 1
def test_c01_normalization():
    t0 = time.perf_counter()
    worst = max(abs(_integral(lambda x, p=McNParams(*t): core.pdf(p, x)) - 1.0) for t in TRIPLES)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 10.0
    record(1, "integral of pdf = 1 on 64 triples", ok, f"max |err| {worst:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-8
    assert elapsed < 10.0


# --------------------------------------------------------------------- 2
def test_c02_cdf_consistency():
    xs = np.linspace(-6.0, 6.0, 25)
    w_quad = w_hyp = 0.0
    n_hyp = 0
    for t in TRIPLES:
        p = McNParams(*t)
        f = lambda s: core.pdf(p, s)
        for x in xs:
            lo = min(x, -5.0)
            ref = _integral(f, ((-np.inf, lo), (lo, x)))
            w_quad = max(w_quad, abs(core.cdf(p, x) - ref))
            if special.ndtr(x) ** p.c <= core.HYPERGEOMETRIC_GATE:
                n_hyp += 1
                w_hyp = max(w_hyp, abs(core.cdf(p, x, route="hypergeometric") - core.cdf(p, x)))
    record(2, "beta-route cdf vs quadrature of pdf", w_quad <= 1e-8, f"max |err| {w_quad:.2e}")
    record(2, "hypergeometric cdf vs beta route (gated)", w_hyp <= 1e-9,
           f"max |err| {w_hyp:.2e} over {n_hyp} points")
    assert w_quad <= 1e-8
    assert w_hyp <= 1e-9


# --------------------------------------------------------------------- 3
def test_c03_quantile_round_trip():
    us = np.round(np.arange(1, 1000) / 1000.0, 3)
    worst = max(np.max(np.abs(core.cdf(p, core.quantile(p, us)) - us))
                for p in (McNParams(*t) for t in TRIPLES))
    record(3, "cdf(quantile(u)) = u, u = 0.001..0.999, 64 triples", worst <= 1e-9, f"max |err| {worst:.2e}")
    assert worst <= 1e-9


# --------------------------------------------------------------------- 4
def test_c04_moment_routes():
    counts = {"quantile": [0, 0], "pwm": [0, 0]}
    silent = []
    for t in TRIPLES:
        p = McNParams(*t)
        for n in range(1, 5):
            ref = series.moment_quadrature(p, n)
            for name, fn in (("quantile", series.moment_quantile_route), ("pwm", series.moment_pwm_route)):
                r = fn(p, n)
                counts[name][1] += 1
                if r.converged:
                    counts[name][0] += 1
                    if abs(r.value - ref) > 1e-3:
                        silent.append((name, t, n, r.value, ref))
            # the public entry point never returns an unflagged divergent value
            m = series.moment(p, n)
            if abs(m.value - ref) > 1e-3:
                silent.append(("moment", t, n, m.value, ref))
    detail = ", ".join(f"{k} converged {c}/{tot}" for k, (c, tot) in counts.items())
    record(4, "series moments vs quadrature (n <= 4), divergence flagged", not silent,
           f"{detail}; silently wrong {len(silent)}")
    assert not silent, silent[:5]
    assert counts["quantile"][0] > 0 and counts["pwm"][0] > 0


# --------------------------------------------------------------------- 5
DEV_TRIPLES = [(2, 1, 1), (1, 2, 1), (1, 1, 2), (2, 3, 1.5), (0.5, 2, 0.75), (0.5, 0.5, 1), (3, 0.3, 2), (5, 2, 0.3)]


def test_c05_mean_deviations_and_entropy():
    worst_dev = worst_h = 0.0
    series_dev = series_h = 0
    for t in DEV_TRIPLES:
        p = McNParams(*t)
        d = series.mean_deviations(p)
        dq = series.mean_deviations_quadrature(p)
        for r, ref in zip(d, dq):
            worst_dev = max(worst_dev, abs(r.value - ref))
            series_dev += r.method == "series"
        h = series.shannon_entropy(p)
        series_h += h.method == "series"
        worst_h = max(worst_h, abs(h.value - series.entropy_quadrature(p)))
    ok = worst_dev <= 1e-3 and worst_h <= 1e-3
    record(5, "mean deviations and entropy vs quadrature", ok,
           f"dev err {worst_dev:.1e} ({series_dev} by series), entropy err {worst_h:.1e} ({series_h} by series)")
    assert ok
    assert series_dev > 0 and series_h > 0

    normal = McNParams(1, 1, 1)
    d1, d2 = series.mean_deviations(normal)
    h = series.shannon_entropy(normal)
    target_d, target_h = math.sqrt(2 / math.pi), 0.5 * math.log(2 * math.pi * math.e)
    exact = all(r.method == "series" for r in (d1, d2, h))
    errs = (abs(d1.value - target_d), abs(d2.value - target_d), abs(h.value - target_h))
    ok = exact and max(errs) <= 1e-6
    record(5, "normal sub-model: sqrt(2/pi) and 1.41894 by series", ok, f"errors {max(errs):.1e}")
    assert exact
    assert max(errs) <= 1e-6


# --------------------------------------------------------------------- 6
def test_c06_whittaker_vs_incomplete_gamma():
    worst = 0.0
    for j in range(9):
        for q in (0.5, 1.0, 2.0, 4.0):
            worst = max(worst, abs(series.H_whittaker(j, q) - series.H_incgamma(j, q)))
    record(6, "H(j,q) Whittaker form = incomplete-gamma form", worst <= 1e-9, f"max |diff| {worst:.1e}")
    assert worst <= 1e-9


# --------------------------------------------------------------------- 7
def test_c07_bimodality():
    cps = shape.critical_points(0.15, 0.18, 0.75)
    kinds = [cp.kind for cp in cps]
    ok = len(cps) == 3 and kinds.count("mode") == 2 and all(cp.confirmed for cp in cps)
    record(7, "(0.15, 0.18, 0.75): 3 critical points, 2 modes", ok, f"kinds {kinds}")
    assert ok

    table = {(1, 1, 1): (True, True), (0.5, 0.5, 1): (True, True), (0.1, 0.1, 1): (False, False)}
    got = {t: shape.proposition1_check(*t) for t in table}
    ok = got == table
    record(7, "zero-mode condition truth table", ok, str(got))
    assert ok
    # the failing example has z = 0 as an antimode
    zero = [cp for cp in shape.critical_points(0.1, 0.1, 1) if abs(cp.z) < 1e-8]
    assert zero and zero[0].kind == "antimode"

    branches = {
        "b=1, c=1, a in {1,2,4,8}": ([1, 2, 4, 8], 1.0, 1.0),
        "b=0.18, c=0.75, a in [0.1, 0.3]": (np.linspace(0.1, 0.3, 41), 0.18, 0.75),
    }
    for label, (grid, b, c) in branches.items():
        mono = shape.mode_monotonicity_check(grid, b, c)
        record(7, f"mode monotone in a, {label}", mono)
        assert mono
    zs = [shape.modes(McNParams(a, 1, 1))[0] for a in (1, 2, 4, 8)]
    assert all(z2 > z1 for z1, z2 in zip(zs, zs[1:]))


# --------------------------------------------------------------------- 8
@pytest.mark.parametrize("triple", [(1, 1, 1), (2, 3, 1.5), (0.5, 2, 0.75)])
def test_c08_hazard_asymptotics(triple):
    p = McNParams(*triple)
    right = core.right_tail_hazard_ratio(p, 8.0)
    left = core.left_tail_hazard_ratio(p, -8.0)
    ok = 0.95 <= right <= 1.05 and 0.95 <= left <= 1.05
    record(8, f"hazard tail ratios {triple}", ok, f"right {right:.4f}, left {left:.4f}")
    assert 0.95 <= right <= 1.05
    assert 0.95 <= left <= 1.05


# --------------------------------------------------------------------- 9
OS_TRIPLES = [(1, 1, 1), (2, 3, 1.5), (0.5, 2, 0.75), (0.3, 0.3, 5)]
OS_SERIES_TRIPLES = [(1, 1, 1), (1, 2, 1), (2, 2, 1), (2, 3, 1), (2, 3, 1.5), (0.5, 2, 0.75)]


def test_c09_order_statistics():
    worst = 0.0
    for t in OS_TRIPLES:
        p = McNParams(*t)
        for n in range(1, 7):
            for i in range(1, n + 1):
                worst = max(worst, abs(_integral(lambda x: order_stats.os_density_exact(p, i, n, x)) - 1.0))
    record(9, "exact order-statistic densities integrate to 1 (n <= 6)", worst <= 1e-8, f"max |err| {worst:.1e}")
    assert worst <= 1e-8

    conv = total = 0
    worst_s = 0.0
    for t in OS_SERIES_TRIPLES:
        p = McNParams(*t)
        for n in range(1, 5):
            for i in range(1, n + 1):
                for x in (-1.5, 0.0, 0.7, 2.0):
                    r = order_stats.os_density_series(p, i, n, x)
                    total += 1
                    if r.converged:
                        conv += 1
                        worst_s = max(worst_s, abs(r.value - order_stats.os_density_exact(p, i, n, x)))
    ok = conv > 0 and worst_s <= 1e-3
    record(9, "series order-statistic density vs exact", ok, f"{conv}/{total} converged, max |err| {worst_s:.1e}")
    assert ok

    m = order_stats.os_moment(McNParams(1, 1, 1), 2, 2, 1)
    err = abs(m.value - 1 / math.sqrt(math.pi))
    record(9, "E[X_{2:2}] = 1/sqrt(pi) for the normal", err <= 1e-6, f"|err| {err:.1e} via {m.method}")
    assert err <= 1e-6


# --------------------------------------------------------------------- 10
@pytest.mark.parametrize("theta", [(2, 3, 1.5, 1, 2), (0.5, 2, 0.75, 0, 1), (1.5, 0.7, 2.5, -3, 0.5)])
def test_c10_score_and_information(theta):
    th = McNParams(*theta)
    x = core.sample(th, 500, seed=11)
    U = inference.score(th, x)
    fd = np.empty(5)
    base = np.array(th.as_tuple())
    for k in range(5):
        h = 1e-6 * max(1.0, abs(base[k]))
        up, dn = base.copy(), base.copy()
        up[k] += h
        dn[k] -= h
        fd[k] = (inference.loglik(McNParams(*up), x) - inference.loglik(McNParams(*dn), x)) / (2 * h)
    rel = float(np.max(np.abs(U - fd) / np.abs(fd)))
    record(10, f"score vs finite differences {theta}", rel <= 1e-6, f"max rel {rel:.1e}")
    assert rel <= 1e-6

    info = inference.observed_info(th, x)
    ok = info.all_validated and info.max_rel_dev <= 1e-3
    record(10, f"observed information vs numeric Hessian {theta}", ok,
           f"validated {int(info.validated.sum())}/25, max rel {info.max_rel_dev:.1e}")
    assert ok


# --------------------------------------------------------------------- 11
def test_c11_normal_closed_form():
    x = core.sample(McNParams(1, 1, 1, 4.0, 3.0), 137, seed=3)
    r = inference.fit(ModelKind.NORMAL, Dataset.from_values(x))
    mu, sd = x.mean(), math.sqrt(np.mean((x - x.mean()) ** 2))
    ll = float(np.sum(stats.norm.logpdf(x, mu, sd)))
    aic = -2 * ll + 4
    errs = (abs(r.estimates["mu"] - mu), abs(r.estimates["sigma"] - sd), abs(r.aic - aic))
    ok = max(errs) <= 1e-10 and r.iterations == 0
    record(11, "normal fit closed form and AIC", ok, f"max err {max(errs):.1e}")
    assert max(errs) <= 1e-10
    assert r.iterations == 0


# --------------------------------------------------------------------- 12
REFERENCE_MCN_AIC = {"ferr": 2071.4, "ssf": 1925.4, "lbm": 1608.6}
REFERENCE_LR_NORMAL = {"ferr": 70.6, "ssf": 64.1}


@pytest.fixture(scope="module")
def ais_fits():
    path = ais_path()
    if path is None:
        print("[criterion 12] SKIP  AIS dataset not found; place it at data/ais.csv or set MCNORMAL_AIS")
        pytest.skip("AIS dataset not placed (data/ais.csv or $MCNORMAL_AIS)")
    models = [ModelKind.MCN, ModelKind.BN, ModelKind.KWN, ModelKind.EN, ModelKind.NORMAL]
    out = {}
    for col in ("ferr", "ssf", "lbm"):
        ds = ingest(path, col)
        out[col] = (ds, inference.fit_models(models, ds))
    return out


def test_c12_plasma_descriptive(ais_fits):
    ds, _ = ais_fits["ferr"]
    d = inference.descriptive_stats(ds)
    ok = ds.n == 202 and round(d.mean, 2) == 76.88 and round(d.skewness, 2) == 1.29
    record(12, "plasma descriptive row", ok, f"n {ds.n}, mean {d.mean:.4f}, skewness {d.skewness:.4f}")
    assert ok


def test_c12_plasma_normal_fit(ais_fits):
    r = ais_fits["ferr"][1][ModelKind.NORMAL]
    errs = (abs(r.estimates["mu"] - 76.8762), abs(r.estimates["sigma"] - 47.3835))
    ok = max(errs) <= 0.01 and abs(r.aic - 2136.0) <= 0.5
    record(12, "plasma normal-fit row", ok,
           f"mu {r.estimates['mu']:.4f}, sigma {r.estimates['sigma']:.4f}, AIC {r.aic:.2f}")
    assert ok


@pytest.mark.parametrize("col", ["ferr", "ssf", "lbm"])
def test_c12_mcn_aic(ais_fits, col):
    r = ais_fits[col][1][ModelKind.MCN]
    ok = r.aic <= REFERENCE_MCN_AIC[col] + 1.0
    record(12, f"McN AIC <= reference + 1 ({col})", ok, f"AIC {r.aic:.2f} vs {REFERENCE_MCN_AIC[col]}")
    assert ok


@pytest.mark.parametrize("col", ["ferr", "ssf"])
def test_c12_lr_mcn_vs_normal(ais_fits, col):
    fits = ais_fits[col][1]
    t = inference.lr_test(fits[ModelKind.NORMAL], fits[ModelKind.MCN])
    target = REFERENCE_LR_NORMAL[col]
    ok = abs(t.w - target) <= 1.0
    record(12, f"LR McN vs Normal = {target} +/- 1 ({col})", ok, f"w {t.w:.2f}, df {t.df}")
    assert ok, (f"w = {t.w:.3f}: the McN loglik found here exceeds the reference optimum, "
                f"so the reference statistic is not reproducible at the maximum")


def test_c12_mass_mcn_vs_en_flagged(ais_fits):
    fits = ais_fits["lbm"][1]
    t = inference.lr_test(fits[ModelKind.EN], fits[ModelKind.MCN])
    own_consistent = abs(t.p_value - stats.chi2.sf(t.w, t.df)) <= 1e-12
    # a statistic of 0 forces p = 1, so the reference pair (w = 0, p = 0.0351) is flagged
    reference_flagged = abs(stats.chi2.sf(0.0, t.df) - 0.0351) > 1e-3
    ok = own_consistent and reference_flagged
    record(12, "mass McN vs EN row flagged as inconsistent", ok, f"own w {t.w:.2f}, p {t.p_value:.4f}")
    assert ok


# --------------------------------------------------------------------- 13
def test_c13_sampler():
    t0 = time.perf_counter()
    worst_p = 1.0
    for t in TRIPLES:
        p = McNParams(*t)
        x = core.sample(p, 100_000, seed=7)
        worst_p = min(worst_p, stats.kstest(x, lambda v: core.cdf(p, v)).pvalue)
    record(13, "KS test at 1% on 64 triples, n = 1e5", worst_p > 0.01,
           f"min p {worst_p:.3f}, {time.perf_counter() - t0:.1f} s")
    assert worst_p > 0.01

    p = McNParams(0.5, 2, 0.75, 1, 2)
    same = core.sample(p, 1000, seed=42).tobytes() == core.sample(p, 1000, seed=42).tobytes()
    record(13, "seed determinism byte-exact", same)
    assert same
