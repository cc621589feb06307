"""Special-function kernel.

Beta and incomplete beta (with inverse), digamma/trigamma, Gauss and
confluent hypergeometric series, the Whittaker M function, a truncated
Lauricella F_A, and standard-normal helpers with log-space tails.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError, UnsupportedOrderError

__all__ = [
    "SeriesConfig",
    "ln_beta",
    "reg_inc_beta",
    "log_reg_inc_beta",
    "inv_reg_inc_beta",
    "gauss_2F1",
    "hyp1f1",
    "whittaker_M",
    "lauricella_FA",
    "std_normal",
    "std_normal_logpdf",
    "std_normal_logcdf",
    "std_normal_logsf",
    "std_normal_quantile",
    "std_normal_quantile_log",
    "digamma",
    "trigamma",
    "EULER_GAMMA",
    "LAURICELLA_MAX_VARS",
]

EULER_GAMMA = 0.57721566490153286061
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
LAURICELLA_MAX_VARS = 4

_TINY = 1e-300
_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation orders and tolerances for every infinite expansion.

    ``max_terms_k`` bounds the outer binomial index (weights t_k / w_k),
    ``max_terms_r`` the binomial expansion of powers of Phi (s_r and the
    PWM index), ``max_terms_j`` inner power-series indices (Phi Taylor
    series, F_A multi-sums), and ``max_terms_q`` the quantile-series index
    b_k used by the quantile moment route.  ``accept_tol`` is the largest
    estimated truncation error for which a result is reported converged.
    """

    max_terms_k: int = 200
    max_terms_r: int = 1024
    max_terms_j: int = 80
    max_terms_q: int = 2048
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    accept_tol: float = 1e-4

    def __post_init__(self):
        for name in ("max_terms_k", "max_terms_r", "max_terms_j", "max_terms_q"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
        for name in ("abs_tol", "rel_tol", "accept_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and non-negative, got {v!r}")


DEFAULT_CONFIG = SeriesConfig()


def _check_shape(name, v):
    if not (np.all(np.isfinite(v)) and np.all(np.asarray(v) > 0)):
        raise DomainError(f"{name} must be positive and finite, got {v!r}")


def _scalar_or_array(out, like):
    if np.ndim(like) == 0:
        return float(out)
    return out


# --------------------------------------------------------------------------
# Beta family
# --------------------------------------------------------------------------


def ln_beta(a, b):
    """Logarithm of the complete beta function B(a, b)."""
    _check_shape("a", a)
    _check_shape("b", b)
    # betaln avoids the cancellation in lgamma(a) - lgamma(a + b) when a >> b
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return float(special.betaln(a, b))
    return special.betaln(a, b)


def _betacf(a, b, x, max_iter=20000):
    """Modified Lentz evaluation of the incomplete-beta continued fraction.

    Vectorised over broadcast arrays; returns the fraction value h with
    I_x(a, b) = x^a (1-x)^b h / (a B(a, b)).
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(done, h, h * d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < 4 * _EPS
        if done.all():
            return h
    raise NumericError("incomplete beta continued fraction did not converge",
                       iterations=max_iter)


def log_reg_inc_beta(log_x, log1m_x, a, b):
    """Return ``(log I_x(a,b), log(1 - I_x(a,b)))`` from ``log x`` and ``log(1-x)``.

    Taking both logarithms lets callers pass arguments such as
    ``x = Phi(z)**c`` whose complement would cancel catastrophically in
    linear space.  The fraction is evaluated on whichever side of
    ``(a+1)/(a+b+2)`` converges fastest, and the complementary log is then
    formed without cancellation.
    """
    log_x, log1m_x, a, b = np.broadcast_arrays(
        np.asarray(log_x, float), np.asarray(log1m_x, float),
        np.asarray(a, float), np.asarray(b, float))
    log_x = log_x.copy()
    log1m_x = log1m_x.copy()
    x = np.exp(log_x)
    lower = x < (a + 1.0) / (a + b + 2.0)
    at0 = np.isneginf(log_x)
    at1 = np.isneginf(log1m_x)
    safe = ~(at0 | at1)

    lbeta = special.betaln(a, b)
    out_l = np.empty(x.shape)
    out_u = np.empty(x.shape)

    sel = safe & lower
    if sel.any():
        aa, bb = a[sel], b[sel]
        h = _betacf(aa, bb, x[sel])
        li = aa * log_x[sel] + bb * log1m_x[sel] - lbeta[sel] + np.log(h / aa)
        out_l[sel] = li
        out_u[sel] = np.log1p(-np.exp(li))
    sel = safe & ~lower
    if sel.any():
        aa, bb = a[sel], b[sel]
        h = _betacf(bb, aa, np.exp(log1m_x[sel]))
        lj = aa * log_x[sel] + bb * log1m_x[sel] - lbeta[sel] + np.log(h / bb)
        out_u[sel] = lj
        out_l[sel] = np.log1p(-np.exp(lj))
    out_l[at0] = -np.inf
    out_u[at0] = 0.0
    out_l[at1 & ~at0] = 0.0
    out_u[at1 & ~at0] = -np.inf
    if out_l.ndim == 0:
        return float(out_l), float(out_u)
    return out_l, out_u


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta function I_x(a, b)."""
    _check_shape("a", a)
    _check_shape("b", b)
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa < 0) or np.any(xa > 1):
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    with np.errstate(divide="ignore"):
        li, _ = log_reg_inc_beta(np.log(xa), np.log1p(-xa), a, b)
    return _scalar_or_array(np.exp(li), x)


def _beta_log_density(log_x, log1m_x, a, b, lbeta):
    return (a - 1.0) * log_x + (b - 1.0) * log1m_x - lbeta


def _solve_lower_tail(p, a, b, t_hi, max_iter=300, t_guess=None):
    """Solve log I_x(a,b) = log p for t = log x on (-inf, t_hi].

    Safeguarded Newton in log-log coordinates, where I_x ~ C x^a is nearly
    linear; the bracket is expanded downward until it straddles the root.
    A ``t_guess`` that already satisfies the equation is returned after a
    single evaluation.
    """
    lbeta = ln_beta(a, b)
    logp = math.log(p)

    def g(t):
        li, _ = log_reg_inc_beta(t, math.log1p(-math.exp(t)) if t < -1e-300 else -np.inf, a, b)
        return li - logp

    if t_guess is not None and math.isfinite(t_guess) and t_guess <= t_hi:
        if abs(g(t_guess)) <= 1e-14:
            return t_guess

    # leading-order guess I_x ~ x^a / (a B)
    t = min((logp + math.log(a) + lbeta) / a, t_hi)
    hi = t_hi
    g_hi = g(hi)
    if g_hi < 0:
        # the split point sits on the root up to rounding in the two log evaluations
        if g_hi > -1e-12:
            return hi
        raise NumericError("target probability above the bracket", bracket=(None, hi))
    lo = min(t, hi) - 1.0
    g_lo = g(lo)
    while g_lo > 0:
        lo = lo - 2.0 * max(1.0, abs(lo))
        if lo < -1e5:
            raise NumericError("failed to bracket incomplete-beta root", bracket=(lo, hi))
        g_lo = g(lo)
    t = min(max(t, lo), hi)
    for _ in range(max_iter):
        gt = g(t)
        if abs(gt) <= 1e-14:
            return t
        if gt > 0:
            hi = t
        else:
            lo = t
        log1m = math.log1p(-math.exp(t))
        li = gt + logp
        # d(log I)/dt = x f(x) / I
        slope = math.exp(t + _beta_log_density(t, log1m, a, b, lbeta) - li)
        t_new = t - gt / slope if slope > 0 and math.isfinite(slope) else 0.5 * (lo + hi)
        if not (lo < t_new < hi):
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= 1e-15 * max(1.0, abs(t)):
            return t_new
        t = t_new
    raise NumericError("inverse incomplete beta did not converge", bracket=(lo, hi))


def _inv_reg_inc_beta_logpair(u, a, b, uc=None):
    """Return ``(log x, log(1 - x))`` with I_x(a,b) = u.

    Logs keep deep-tail roots such as x ~ 1e-1000 representable.  ``uc``
    optionally supplies ``1 - u`` computed without cancellation.
    """
    if uc is None:
        uc = 1.0 - u
    if u <= 0.0:
        return -math.inf, 0.0
    if uc <= 0.0:
        return 0.0, -math.inf
    xm = (a + 1.0) / (a + b + 2.0)
    um, _ = log_reg_inc_beta(math.log(xm), math.log1p(-xm), a, b)
    # scipy's inverse only seeds the search; the root is confirmed against our own I_x
    if math.log(u) <= um:
        t = _solve_lower_tail(u, a, b, math.log(xm), t_guess=_log_guess(u, a, b))
        return t, math.log1p(-math.exp(t))
    t = _solve_lower_tail(uc, b, a, math.log1p(-xm), t_guess=_log_guess(uc, b, a))
    return math.log1p(-math.exp(t)), t


def _inv_reg_inc_beta_pair(u, a, b, uc=None):
    """Return ``(x, 1 - x)`` with I_x(a,b) = u, both accurate in their tails."""
    lx, l1mx = _inv_reg_inc_beta_logpair(u, a, b, uc)
    return math.exp(lx), math.exp(l1mx)


def _log_guess(p, a, b):
    with np.errstate(all="ignore"):
        x = float(special.betaincinv(a, b, p))
    return math.log(x) if 0.0 < x < 1.0 else None


def inv_reg_inc_beta(u, a, b):
    """Inverse of the regularized incomplete beta function in its first argument."""
    _check_shape("a", a)
    _check_shape("b", b)
    ua = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(ua)) or np.any(ua < 0) or np.any(ua > 1):
        raise DomainError(f"u must lie in [0, 1], got {u!r}")
    if ua.ndim == 0:
        return _inv_reg_inc_beta_pair(float(ua), float(a), float(b))[0]
    aa, bb = np.broadcast_to(a, ua.shape), np.broadcast_to(b, ua.shape)
    out = np.empty(ua.shape)
    for idx in np.ndindex(ua.shape):
        out[idx] = _inv_reg_inc_beta_pair(float(ua[idx]), float(aa[idx]), float(bb[idx]))[0]
    return out


# --------------------------------------------------------------------------
# Hypergeometric family
# --------------------------------------------------------------------------


def _is_nonpositive_int(v):
    return v <= 0 and float(v).is_integer()


def gauss_2F1(a, b, c, z, rel_tol=1e-15, max_terms=200000):
    """Gauss hypergeometric function 2F1(a, b; c; z) for z in [0, 1) by its power series."""
    if _is_nonpositive_int(c):
        raise DomainError(f"c must not be a non-positive integer, got {c}")
    if not (0.0 <= z < 1.0):
        raise DomainError(f"z must lie in [0, 1), got {z}")
    total = 1.0
    term = 1.0
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) <= rel_tol * abs(total) and k > abs(a * b / c):
            return total
    raise NumericError("2F1 series did not converge", partial_sum=total,
                       last_term=term, terms=max_terms)


def _hyp1f1_series(a, b, x, rel_tol, max_terms):
    total = 1.0
    term = 1.0
    for k in range(max_terms):
        term *= (a + k) / ((b + k) * (k + 1.0)) * x
        total += term
        if term == 0.0:
            return total
        if abs(term) <= rel_tol * abs(total) and k > abs(x):
            return total
    raise NumericError("1F1 series did not converge", partial_sum=total,
                       last_term=term, terms=max_terms)


def hyp1f1(a, b, x, rel_tol=1e-16, max_terms=100000):
    """Confluent hypergeometric function 1F1(a; b; x) with rising factorials.

    Negative arguments go through Kummer's transformation
    1F1(a; b; x) = e^x 1F1(b-a; b; -x) unless the direct series terminates.
    """
    if _is_nonpositive_int(b):
        raise DomainError(f"b must not be a non-positive integer, got {b}")
    if x < 0 and not _is_nonpositive_int(a):
        return math.exp(x) * _hyp1f1_series(b - a, b, -x, rel_tol, max_terms)
    return _hyp1f1_series(a, b, x, rel_tol, max_terms)


def whittaker_M(k, m, x):
    """Whittaker function M_{k,m}(x) = e^{-x/2} x^{m+1/2} 1F1(1/2+m-k; 1+2m; x)."""
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    if _is_nonpositive_int(1 + 2 * m):
        raise DomainError(f"1+2m must not be a non-positive integer, got {1 + 2 * m}")
    with np.errstate(over="raise"):
        try:
            f = hyp1f1(0.5 + m - k, 1.0 + 2.0 * m, x)
            out = math.exp(-0.5 * x + (m + 0.5) * math.log(x)) * f
        except (OverflowError, FloatingPointError) as exc:
            raise NumericError("Whittaker M overflowed", k=k, m=m, x=x) from exc
    if not math.isfinite(out):
        raise NumericError("Whittaker M overflowed", k=k, m=m, x=x)
    return out


def _pochhammer_seq(a, n):
    out = np.empty(n + 1)
    out[0] = 1.0
    for i in range(n):
        out[i + 1] = out[i] * (a + i)
    return out


def lauricella_FA(n_vars, a, b_list=(), c_list=(), x_list=None, config=None):
    """Lauricella function F_A^{(n)}(a; b_1..b_n; c_1..c_n; x_1..x_n).

    Inside the convergence region (sum |x_i| < 1) the multiple series is
    truncated per index at ``config.max_terms_j``.  Outside it, including the
    unit-negative arguments that appear in normal PWMs, the Laplace-integral
    continuation (1/Gamma(a)) int_0^inf t^{a-1} e^{-t} prod 1F1(b_i; c_i; x_i t) dt
    is used, which needs a > 0.
    """
    cfg = config or DEFAULT_CONFIG
    if n_vars == 0:
        return 1.0
    if n_vars > LAURICELLA_MAX_VARS:
        raise UnsupportedOrderError(
            f"F_A with {n_vars} variables exceeds the cap of {LAURICELLA_MAX_VARS}",
            n_vars=n_vars)
    if x_list is None:
        x_list = (-1.0,) * n_vars
    if not (len(b_list) == len(c_list) == len(x_list) == n_vars):
        raise DomainError("b_list, c_list and x_list must each have n_vars entries")

    if sum(abs(x) for x in x_list) < 1.0:
        nmax = cfg.max_terms_j
        # per-variable coefficient sequences, then convolve by total order
        total = np.array([1.0])
        for b, c, x in zip(b_list, c_list, x_list):
            m = np.arange(nmax + 1)
            seq = (_pochhammer_seq(b, nmax) / _pochhammer_seq(c, nmax)
                   / special.factorial(m) * float(x) ** m)
            total = np.convolve(total, seq)[: nmax * n_vars + 1]
        terms = _pochhammer_seq(a, len(total) - 1) * total
        val = terms.sum()
        tail = np.abs(terms[-5:]).max()
        if tail > cfg.abs_tol + cfg.rel_tol * abs(val):
            raise NumericError("F_A multi-series not converged", partial_sum=val,
                               last_term=tail)
        return float(val)

    if not a > 0:
        raise DomainError("Laplace-integral continuation of F_A needs a > 0")

    def integrand(t):
        if t == 0.0:
            prod = 1.0
        else:
            prod = 1.0
            for b, c, x in zip(b_list, c_list, x_list):
                prod *= hyp1f1(b, c, x * t)
        return math.exp((a - 1.0) * math.log(t) - t - math.lgamma(a)) * prod if t > 0 else (
            prod / math.gamma(a) if a == 1.0 else 0.0)

    upper = a + 40.0 * math.sqrt(a) + 120.0
    val, err = integrate.quad(integrand, 0.0, upper, epsabs=1e-15, epsrel=1e-13, limit=500)
    return float(val)


# --------------------------------------------------------------------------
# Standard normal
# --------------------------------------------------------------------------


def std_normal_logpdf(x):
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(-0.5 * x * x - LOG_SQRT_2PI, x)


def std_normal_logcdf(x):
    """log Phi(x), accurate in both tails."""
    return _scalar_or_array(special.log_ndtr(np.asarray(x, dtype=float)), x)


def std_normal_logsf(x):
    """log(1 - Phi(x)), accurate in both tails."""
    return _scalar_or_array(special.log_ndtr(-np.asarray(x, dtype=float)), x)


def std_normal(x):
    """Return ``(pdf, cdf)`` of the standard normal at x."""
    xa = np.asarray(x, dtype=float)
    pdf = np.exp(-0.5 * xa * xa) / math.sqrt(2.0 * math.pi)
    cdf = special.ndtr(xa)
    return _scalar_or_array(pdf, x), _scalar_or_array(cdf, x)


def std_normal_quantile(u):
    """Standard normal quantile Phi^{-1}(u) for u strictly inside (0, 1)."""
    ua = np.asarray(u, dtype=float)
    if np.any(~(ua > 0)) or np.any(~(ua < 1)):
        raise DomainError(f"u must lie strictly inside (0, 1), got {u!r}")
    return _scalar_or_array(special.ndtri(ua), u)


def _quantile_log_scalar(lu):
    if lu >= 0.0:
        return math.inf if lu == 0.0 else math.nan
    if lu > -0.6931471805599453:
        return -float(special.ndtri(-math.expm1(lu)))
    if lu > -700.0:
        return float(special.ndtri(math.exp(lu)))
    # deep left tail: asymptotic start, Newton on log Phi
    y = -2.0 * lu
    z = -math.sqrt(y - math.log(y) - math.log(2.0 * math.pi))
    for _ in range(50):
        lp = float(special.log_ndtr(z))
        slope = math.exp(-0.5 * z * z - LOG_SQRT_2PI - lp)
        step = (lp - lu) / slope
        z -= step
        if abs(step) < 1e-15 * abs(z):
            break
    return z


def std_normal_quantile_log(log_u):
    """Quantile from a log-probability: z with log Phi(z) = log_u.

    Reaches the far left tail (log_u << -700) where Phi^{-1} of the linear
    probability would underflow, and keeps full relative accuracy in
    1 - Phi when log_u is close to zero.
    """
    la = np.asarray(log_u, dtype=float)
    if la.ndim == 0:
        return _quantile_log_scalar(float(la))
    out = np.empty(la.shape)
    upper = la > -0.6931471805599453
    mid = ~upper & (la > -700.0)
    deep = ~upper & ~mid
    with np.errstate(invalid="ignore"):
        out[upper] = -special.ndtri(-np.expm1(la[upper]))
    out[mid] = special.ndtri(np.exp(la[mid]))
    for idx in zip(*np.nonzero(deep)):
        out[idx] = _quantile_log_scalar(float(la[idx]))
    out[la == 0.0] = np.inf
    out[la > 0.0] = np.nan
    return out


# --------------------------------------------------------------------------
# Polygamma
# --------------------------------------------------------------------------

_DIGAMMA_ASYM = (1.0 / 12, -1.0 / 120, 1.0 / 252, -1.0 / 240, 1.0 / 132,
                 -691.0 / 32760, 1.0 / 12)
_TRIGAMMA_ASYM = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66,
                  -691.0 / 2730, 7.0 / 6)


def digamma(x):
    """psi(x) for x > 0 via upward recurrence to x >= 10 and the asymptotic series."""
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"digamma needs a positive finite argument, got {x}")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    poly = 0.0
    for coef in reversed(_DIGAMMA_ASYM):
        poly = poly * inv2 + coef
    return acc + math.log(x) - 0.5 / x - poly * inv2


def trigamma(x):
    """psi'(x) for x > 0 via upward recurrence to x >= 10 and the asymptotic series."""
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"trigamma needs a positive finite argument, got {x}")
    acc = 0.0
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv2 = 1.0 / (x * x)
    poly = 0.0
    for coef in reversed(_TRIGAMMA_ASYM):
        poly = poly * inv2 + coef
    return acc + 1.0 / x + 0.5 * inv2 + poly * inv2 / x
