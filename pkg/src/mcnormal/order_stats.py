"""Order statistics of McN samples.

The exact route works directly from the pdf and cdf.  The series route
writes the density of X_{i:n} as phi(x) sum_{p,r} g_{i:n}(p, r) Phi(x)^(p+r),
built from the power-series coefficients v_p of F in Phi and their powers
d_{N,p}.  For non-integer exponents those coefficients come from
rearranged binomial series that need not converge, so every series answer
is checked by re-evaluating at half the truncation and reported as
unconverged when the two disagree.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import core
from . import series as sr
from . import special_fn as sf
from .core import McNParams
from .errors import DomainError
from .special_fn import DEFAULT_CONFIG, SeriesConfig

__all__ = [
    "OS_MAX_POWER",
    "OsCoeffs",
    "v_coefficients",
    "d_recurrence",
    "os_coeffs",
    "os_density_exact",
    "os_density_series",
    "os_cdf",
    "os_moment",
    "os_moment_quadrature",
    "os_mgf",
    "os_mgf_quadrature",
]

OS_MAX_POWER = 200


def _check_index(i: int, n: int):
    if int(i) != i or int(n) != n or not (1 <= i <= n):
        raise DomainError("order statistic index must satisfy 1 <= i <= n")


def _terminating_b(b: float) -> bool:
    return abs(b - round(b)) < 1e-12 and round(b) >= 1


def v_coefficients(a: float, b: float, c: float, p_max: int,
                   cfg: SeriesConfig = DEFAULT_CONFIG) -> np.ndarray:
    """v_p with F(z) = sum_p v_p Phi(z)^p:

    v_p = (1/B(a,b)) sum_m (1-b)_m s_p((a+m)c) / ((a+m) m!).

    The m-sum stops at b - 1 for integer b and at ``cfg.max_terms_k`` otherwise.
    """
    m_max = int(round(b)) - 1 if _terminating_b(b) else cfg.max_terms_k
    inv_B = math.exp(-sf.ln_beta(a, b))
    v = np.zeros(p_max + 1)
    q = 1.0  # (1-b)_m / m!
    for m in range(m_max + 1):
        if m > 0:
            q *= (m - b) / m
        if q == 0.0:
            break
        v += q / (a + m) * sr.s_r_table((a + m) * c, p_max)
    return v * inv_B


def d_recurrence(v, n: int, p_max: int) -> np.ndarray:
    """d_{n,p}: coefficients of (sum_p v_p x^p)^n.

    d_{n,0} = v_0^n and d_{n,p} = (1/(p v_0)) sum_{m=1}^p [m(n+1) - p] v_m d_{n,p-m}.
    """
    v = np.asarray(v, dtype=float)
    if n == 0:
        out = np.zeros(p_max + 1)
        out[0] = 1.0
        return out
    return sr.power_series_pow(v, n, p_max)


def _power_with_shift(v: np.ndarray, n: int, p_max: int) -> np.ndarray:
    """Coefficients of (sum v_p x^p)^n when leading v_p vanish: factor x^l out first."""
    if n == 0:
        return d_recurrence(v, 0, p_max)
    nz = np.nonzero(v)[0]
    out = np.zeros(p_max + 1)
    if nz.size == 0:
        return out
    lead = int(nz[0])
    shift = n * lead
    if shift > p_max:
        return out
    with np.errstate(all="ignore"):
        out[shift:] = d_recurrence(v[lead:], n, p_max - shift)
    return out


@dataclass(frozen=True)
class OsCoeffs:
    """Coefficient tables of the series density of X_{i:n}."""

    i: int
    n: int
    v: np.ndarray          # F = sum v_p Phi^p
    u: np.ndarray          # f / phi = sum u_r Phi^r
    e: np.ndarray          # sum_j (-1)^j C(n-i, j) d_{i+j-1, p}
    g: np.ndarray          # g_{i:n}(p, r)
    h: np.ndarray          # h_q = sum_{p+r=q} g(p, r)

    def d(self, power: int) -> np.ndarray:
        return _power_with_shift(self.v, power, len(self.v) - 1)


@functools.lru_cache(maxsize=64)
def _os_coeffs_cached(a, b, c, i, n, p_max, cfg):
    v = v_coefficients(a, b, c, p_max, cfg)
    weights = sr.expansion_weights(a, b, c, cfg)
    inv_B = math.exp(-sf.ln_beta(i, n - i + 1))
    with np.errstate(all="ignore"):
        u = np.zeros(p_max + 1)
        for tk, beta in zip(weights.t, weights.powers - 1.0):
            u += tk * sr.s_r_table(beta, p_max)
        e = np.zeros(p_max + 1)
        for j in range(n - i + 1):
            e += (-1) ** j * math.comb(n - i, j) * _power_with_shift(v, i + j - 1, p_max)
        g = np.outer(e, u) * inv_B
        h = np.zeros(p_max + 1)
        for q in range(p_max + 1):
            h[q] = np.trace(np.fliplr(g[: q + 1, : q + 1]))
    for arr in (v, u, e, g, h):
        arr.flags.writeable = False
    return OsCoeffs(i, n, v, u, e, g, h)


def os_coeffs(p: McNParams, i: int, n: int, cfg: SeriesConfig = DEFAULT_CONFIG,
              p_max: int = OS_MAX_POWER) -> OsCoeffs:
    _check_index(i, n)
    sr._require_standard(p)
    return _os_coeffs_cached(p.a, p.b, p.c, int(i), int(n), int(p_max), cfg)


def os_density_exact(p: McNParams, i: int, n: int, x, form: str = "binomial"):
    """Density of the i-th order statistic of n.

    ``form="binomial"``: f/B(i, n-i+1) sum_j (-1)^j C(n-i, j) F^(i+j-1).
    ``form="classical"``: f F^(i-1) (1-F)^(n-i) / B(i, n-i+1), in log space.
    """
    _check_index(i, n)
    x = np.asarray(x, dtype=float)
    lB = sf.ln_beta(i, n - i + 1)
    if form == "binomial":
        F = core.cdf(p, x)
        acc = sum((-1) ** j * math.comb(n - i, j) * F ** (i + j - 1) for j in range(n - i + 1))
        out = core.pdf(p, x) * acc / math.exp(lB)
    elif form == "classical":
        with np.errstate(divide="ignore", invalid="ignore"):
            lf = core.log_pdf(p, x)
            terms = lf - lB
            if i > 1:
                terms = terms + (i - 1) * core.log_cdf(p, x)
            if n > i:
                terms = terms + (n - i) * core.log_sf(p, x)
            out = np.exp(terms)
    else:
        raise DomainError("form must be 'binomial' or 'classical'")
    return float(out) if np.ndim(out) == 0 else out


def os_cdf(p: McNParams, i: int, n: int, x):
    """P(X_{i:n} <= x) = I_{F(x)}(i, n - i + 1)."""
    _check_index(i, n)
    lF = np.asarray(core.log_cdf(p, x), dtype=float)
    lS = np.asarray(core.log_sf(p, x), dtype=float)
    out = np.exp(sf.log_reg_inc_beta(lF, lS, float(i), float(n - i + 1))[0])
    return float(out) if out.ndim == 0 else out


def _two_level(fn, cfg, tol):
    """Evaluate ``fn(p_max)`` at full and half truncation; agreement means converged."""
    full = fn(OS_MAX_POWER)
    half = fn(OS_MAX_POWER // 2)
    diff = abs(full - half)
    ok = math.isfinite(full) and math.isfinite(half) and diff <= tol * (1.0 + abs(full))
    return full, ok, (diff if math.isfinite(diff) else math.inf)


def os_density_series(p: McNParams, i: int, n: int, x: float,
                      cfg: SeriesConfig = DEFAULT_CONFIG) -> sr.SeriesResult:
    """phi(x) sum_q h_q Phi(x)^q with h_q = sum_{p+r=q} g_{i:n}(p, r)."""
    _check_index(i, n)
    sr._require_standard(p)
    z = float(x)
    log_Phi = float(special.log_ndtr(z))
    phi = math.exp(float(sf.std_normal_logpdf(z)))

    def at(P):
        h = _os_coeffs_cached(p.a, p.b, p.c, int(i), int(n), P, cfg).h
        with np.errstate(all="ignore"):
            return float(phi * np.sum(h * np.exp(np.arange(P + 1) * log_Phi)))

    val, ok, err = _two_level(at, cfg, 1e-10)
    return sr.SeriesResult(val, OS_MAX_POWER, math.nan, ok, err if ok else math.inf)


def os_moment_quadrature(p: McNParams, i: int, n: int, k: int) -> float:
    """Oracle: int x^k f_{i:n}(x) dx."""
    _check_index(i, n)
    def f(x):
        return x ** k * os_density_exact(p, i, n, x, form="classical")
    lo, hi = p.mu - 40 * p.sigma, p.mu + 40 * p.sigma
    pts = [p.mu + p.sigma * z for z in (-8, -3, 0, 3, 8)]
    return integrate.quad(f, lo, hi, points=pts, epsabs=1e-13, epsrel=1e-12, limit=400)[0]


def _os_moment_pwm(p, i, n, k, cfg):
    def at(P):
        h = _os_coeffs_cached(p.a, p.b, p.c, int(i), int(n), P, cfg).h
        tau = (-1) ** k * sr._tau_tilde_table(k, P)
        with np.errstate(all="ignore"):
            return float(np.dot(h, tau))
    val, ok, err = _two_level(at, cfg, 1e-8)
    return sr.SeriesResult(val, OS_MAX_POWER, math.nan, ok and err <= cfg.accept_tol,
                           err if ok else math.inf, diagnostics={"route": "pwm"})


def _os_moment_quantile(p, i, n, k, cfg):
    N = cfg.max_terms_q

    def at(P):
        h = _os_coeffs_cached(p.a, p.b, p.c, int(i), int(n), P, cfg).h
        nz = np.nonzero(h)[0]
        if nz.size == 0:
            return 0.0
        terms = sr.quantile_power_integral_terms(k, nz + 1.0, N)
        partial = np.cumsum(terms, axis=1)
        lv = sr._levels(N, count=4, floor=16)
        with np.errstate(all="ignore"):
            totals = [float(np.dot(h[nz], partial[:, m])) for m in lv]
        val, e = sr._richardson(totals, 1.0, max_cols=2)
        at.err = e + 1e-14 * float(np.dot(np.abs(h[nz]), np.abs(terms).sum(axis=1)))
        return val

    at.err = 0.0
    val, ok, err = _two_level(at, cfg, 1e-8)
    err = max(err, at.err) if ok else math.inf
    return sr.SeriesResult(val, N, math.nan, ok and err <= cfg.accept_tol, err,
                           diagnostics={"route": "quantile"})


def os_moment(p: McNParams, i: int, n: int, k: int, cfg: SeriesConfig = DEFAULT_CONFIG,
              route: str = "auto") -> sr.SeriesResult:
    """E(X_{i:n}^k).

    ``route`` is "pwm" (linear in the normal PWMs), "quantile" (quantile
    power series), "quadrature", or "auto", which returns the first
    converged series route and otherwise falls back to quadrature with
    ``method = "quadrature"``.
    """
    _check_index(i, n)
    if int(k) != k or k < 1:
        raise DomainError("moment order must be a positive integer")
    k = int(k)
    if route == "quadrature" or (route == "auto" and not p.is_standard):
        return sr.SeriesResult(os_moment_quadrature(p, i, n, k), 0, math.nan, True, math.nan,
                               method="quadrature")
    if route == "pwm":
        return _os_moment_pwm(p, i, n, k, cfg)
    if route == "quantile":
        return _os_moment_quantile(p, i, n, k, cfg)
    if route != "auto":
        raise DomainError(f"unknown route {route!r}")
    tried = {}
    for name, fn in (("pwm", _os_moment_pwm), ("quantile", _os_moment_quantile)):
        res = fn(p, i, n, k, cfg)
        if res.converged:
            return res
        tried[name] = res
    return sr.SeriesResult(os_moment_quadrature(p, i, n, k), 0, math.nan, True, math.nan,
                           method="quadrature", diagnostics=tried)


def os_mgf_quadrature(p: McNParams, i: int, n: int, s: float) -> float:
    """Oracle: E[exp(-s X_{i:n})] by quadrature."""
    def f(x):
        return math.exp(-s * x) * os_density_exact(p, i, n, x, form="classical")
    lo, hi = p.mu - 40 * p.sigma, p.mu + 40 * p.sigma
    pts = [p.mu + p.sigma * z for z in (-8, -3, 0, 3, 8)]
    return integrate.quad(f, lo, hi, points=pts, epsabs=1e-14, epsrel=1e-12, limit=400)[0]


def os_mgf(p: McNParams, i: int, n: int, s: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> sr.SeriesResult:
    """M_{i:n}(-s) = (2 pi)^{-1/2} sum_q h_q sum_j c_{q,j} J(s, j).

    Falls back to quadrature (``method = "quadrature"``) when any inner
    j-series fails to converge.
    """
    _check_index(i, n)
    if abs(s) > sr.MGF_S_BOUND:
        raise DomainError(f"|s| must not exceed {sr.MGF_S_BOUND}")
    if not p.is_standard:
        return sr.SeriesResult(os_mgf_quadrature(p, i, n, s), 0, math.nan, True, math.nan,
                               method="quadrature")
    jmax = cfg.max_terms_j
    Jv = (np.array([(-1.0) ** j for j in range(jmax + 1)])
          * sr._hermite_like_polys(s, jmax) * math.exp(0.5 * s * s))

    def at(P):
        h = _os_coeffs_cached(p.a, p.b, p.c, int(i), int(n), P, cfg).h
        total, ok = 0.0, True
        for q in np.nonzero(h)[0]:
            val, conv, _, _, _ = sr._sum_with_diagnostics(sr._phi_power_coeffs(int(q), jmax) * Jv,
                                                          cfg.rel_tol * 1e3)
            ok = ok and conv
            total += h[q] * val
        return total if ok else math.nan

    val, ok, err = _two_level(at, cfg, 1e-8)
    if ok:
        return sr.SeriesResult(val, jmax, math.nan, True, err)
    return sr.SeriesResult(os_mgf_quadrature(p, i, n, s), 0, math.nan, True, math.nan,
                           method="quadrature", diagnostics={"series": "not converged"})
