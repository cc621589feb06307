"""Maximum likelihood for the McN family: likelihood, score, observed
information, multi-start fitting, information criteria and LR tests.

All derivatives are taken of the per-observation log density

    log c - log B(a,b) - log sigma + log phi(z) + (ac-1) log Phi(z) + (b-1) log(1 - Phi(z)^c)

with z = (x - mu)/sigma, and checked against finite differences in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from . import core
from . import special_fn as sf
from .core import McNParams, ModelKind, make_submodel
from .data import Dataset, as_values
from .errors import DomainError, NumericError, ParameterError

__all__ = [
    "PARAM_NAMES",
    "loglik",
    "score",
    "hessian",
    "numeric_hessian",
    "ObservedInfo",
    "observed_info",
    "FitOptions",
    "FitResult",
    "fit",
    "fit_models",
    "LrTest",
    "lr_test",
    "standard_lr_tests",
    "DescriptiveStats",
    "descriptive_stats",
    "skew_normal_loglik",
]

PARAM_NAMES = ("a", "b", "c", "mu", "sigma")


# --------------------------------------------------------------------------
# Likelihood and derivatives
# --------------------------------------------------------------------------


def loglik(theta: McNParams, data) -> float:
    """Sum of log densities; -inf if any observation has zero density."""
    x = as_values(data)
    with np.errstate(all="ignore"):
        val = float(np.sum(core.log_pdf(theta, x)))
    return val if not math.isnan(val) else -math.inf


def _pieces(theta: McNParams, x):
    z = (x - theta.mu) / theta.sigma
    L = sf.std_normal_logcdf(z)
    cL = theta.c * L
    P = np.exp(cL)
    omP = -np.expm1(cL)                                # 1 - Phi^c
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = np.exp(sf.std_normal_logpdf(z) - L)      # phi / Phi
        D = np.where(cL > -math.log(2.0), np.log(omP), np.log1p(-P))
        W = P / omP                                    # Phi^c / (1 - Phi^c)
    return z, L, r, P, omP, D, W


def _per_obs_derivs(theta: McNParams, x):
    """First and second derivatives of the log density in (a, b, c, z)."""
    a, b, c = theta.a, theta.b, theta.c
    z, L, r, P, omP, D, W = _pieces(theta, x)
    dr = -r * (z + r)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # L / (1 - Phi^c) tends to -1/c as Phi^c -> 1
        LoverOmP = np.where(omP > 0, L / np.where(omP > 0, omP, 1.0), -1.0 / c)
        g = {
            "a": -sf.digamma(a) + sf.digamma(a + b) + c * L,
            "b": -sf.digamma(b) + sf.digamma(a + b) + D,
            "c": 1.0 / c + a * L - (b - 1.0) * P * LoverOmP,
            "z": -z + (a * c - 1.0) * r - (b - 1.0) * c * W * r,
        }
        tab = sf.trigamma(a + b)
        W2 = P / omP ** 2
        h = {
            ("a", "a"): -sf.trigamma(a) + tab + 0 * z,
            ("a", "b"): tab + 0 * z,
            ("b", "b"): -sf.trigamma(b) + tab + 0 * z,
            ("a", "c"): L,
            ("a", "z"): c * r,
            ("b", "c"): -P * LoverOmP,
            ("b", "z"): -c * W * r,
            ("c", "c"): -1.0 / c ** 2 - (b - 1.0) * P * LoverOmP ** 2,
            ("c", "z"): a * r - (b - 1.0) * (c * W * r * LoverOmP + W * r),
            ("z", "z"): -1.0 + (a * c - 1.0) * dr - (b - 1.0) * c * (c * W2 * r * r + W * dr),
        }
    return z, g, h


def score(theta: McNParams, data) -> np.ndarray:
    """Analytic score (U_a, U_b, U_c, U_mu, U_sigma)."""
    x = as_values(data)
    z, g, _ = _per_obs_derivs(theta, x)
    s = theta.sigma
    return np.array([
        np.sum(g["a"]), np.sum(g["b"]), np.sum(g["c"]),
        np.sum(-g["z"]) / s,
        np.sum(-1.0 - z * g["z"]) / s,
    ])


def hessian(theta: McNParams, data) -> np.ndarray:
    """Analytic 5x5 Hessian of the log-likelihood in (a, b, c, mu, sigma)."""
    x = as_values(data)
    z, g, h = _per_obs_derivs(theta, x)
    s = theta.sigma
    zm = -1.0 / s            # dz/dmu
    zs = -z / s              # dz/dsigma

    def hh(i, j):
        return h[(i, j)] if (i, j) in h else h[(j, i)]

    H = np.zeros((5, 5))
    shapes = ("a", "b", "c")
    for i, pi in enumerate(shapes):
        for j, pj in enumerate(shapes):
            H[i, j] = np.sum(hh(pi, pj))
        H[i, 3] = H[3, i] = np.sum(hh(pi, "z") * zm)
        H[i, 4] = H[4, i] = np.sum(hh(pi, "z") * zs)
    hz, gz = h[("z", "z")], g["z"]
    H[3, 3] = np.sum(hz * zm * zm)
    H[3, 4] = H[4, 3] = np.sum(hz * zm * zs + gz / s ** 2)
    H[4, 4] = np.sum(1.0 / s ** 2 + hz * zs * zs + gz * 2.0 * z / s ** 2)
    return H


def numeric_hessian(theta: McNParams, data, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of :func:`loglik` with steps relative to each parameter."""
    x = as_values(data)
    th = np.array(theta.as_tuple(), dtype=float)
    steps = rel_step * np.maximum(np.abs(th), 1e-2)

    def f(v):
        return loglik(McNParams(*v), x)

    H = np.zeros((5, 5))
    f0 = f(th)
    for i in range(5):
        ei = np.zeros(5)
        ei[i] = steps[i]
        H[i, i] = (f(th + ei) - 2 * f0 + f(th - ei)) / steps[i] ** 2
        for j in range(i + 1, 5):
            ej = np.zeros(5)
            ej[j] = steps[j]
            H[i, j] = H[j, i] = (f(th + ei + ej) - f(th + ei - ej) - f(th - ei + ej)
                                 + f(th - ei - ej)) / (4 * steps[i] * steps[j])
    return H


@dataclass(frozen=True)
class ObservedInfo:
    """Observed information -H with per-entry validation against the numeric Hessian."""

    matrix: np.ndarray
    analytic: np.ndarray
    numeric: np.ndarray
    validated: np.ndarray  # bool 5x5; False where the numeric value was substituted
    max_rel_dev: float

    @property
    def all_validated(self) -> bool:
        return bool(self.validated.all())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def observed_info(theta: McNParams, data, rel_tol: float = 1e-3) -> ObservedInfo:
    """Observed information matrix, analytic where it agrees with the numeric Hessian.

    An entry validates when |analytic - numeric| <= rel_tol * max(|numeric|, floor),
    where the floor (rel_tol times the geometric mean of the two diagonal
    entries) keeps near-zero off-diagonals from failing on rounding alone.
    """
    A = -hessian(theta, data)
    N = -numeric_hessian(theta, data)
    diag = np.sqrt(np.abs(np.outer(np.diag(N), np.diag(N))))
    scale = np.maximum(np.abs(N), rel_tol * diag)
    dev = np.abs(A - N) / np.where(scale > 0, scale, 1.0)
    ok = dev <= rel_tol
    M = np.where(ok, A, N)
    M = 0.5 * (M + M.T)
    return ObservedInfo(M, A, N, ok, float(dev[ok].max()) if ok.any() else math.inf)


# --------------------------------------------------------------------------
# Fitting
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FitOptions:
    """Optimizer controls for :func:`fit`."""

    starts: int = 8
    reparam: bool = True          # optimize a* = ac instead of a
    gtol: float = 1e-6            # gradient norm in the optimizer's coordinates
    ftol: float = 1e-10           # relative loglik change between polish rounds
    max_iter: int = 2000
    min_n: int = 10
    log_bound: float = 25.0       # |log parameter| bound
    extra_starts: tuple = ()      # McNParams to add to the start list

    def __post_init__(self):
        if self.starts < 1 or self.max_iter < 1 or self.min_n < 1:
            raise DomainError("starts, max_iter and min_n must be positive")
        if not (self.gtol > 0 and self.ftol > 0 and self.log_bound > 0):
            raise DomainError("tolerances must be positive")


@dataclass(frozen=True)
class FitResult:
    """Outcome of a maximum likelihood fit of one model to one dataset."""

    model: ModelKind
    theta_hat: McNParams | None
    estimates: dict
    std_errors: dict
    loglik: float
    aic: float
    bic: float
    caic: float
    converged: bool
    iterations: int
    grad_norm: float
    starts_tried: int
    n: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.model.n_free

    def to_record(self) -> dict:
        return {
            "model": self.model.value,
            "estimates": {k: float(v) for k, v in self.estimates.items()},
            "std_errors": {k: (None if v is None else float(v)) for k, v in self.std_errors.items()},
            "loglik": float(self.loglik),
            "aic": float(self.aic),
            "bic": float(self.bic),
            "caic": float(self.caic),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "grad_norm": float(self.grad_norm),
            "starts_tried": int(self.starts_tried),
            "n": int(self.n),
        }


def _criteria(ll: float, k: int, n: int):
    return -2 * ll + 2 * k, -2 * ll + k * math.log(n), -2 * ll + k * (math.log(n) + 1.0)


class _Transform:
    """Maps unconstrained optimizer vectors to McNParams for one model.

    Shapes and sigma are optimized on the log scale; with ``reparam`` the
    free shape a is replaced by a* = ac whenever c is free.
    """

    def __init__(self, model: ModelKind, reparam: bool):
        self.model = model
        self.free = model.free_params
        self.reparam = reparam and "a" in self.free and "c" in self.free

    def to_params(self, v) -> McNParams:
        d = dict(zip(self.free, v))
        vals = {}
        for name in ("b", "c", "sigma"):
            if name in d:
                vals[name] = math.exp(d[name])
        if "a" in d:
            vals["a"] = math.exp(d["a"]) / (vals["c"] if self.reparam else 1.0)
        if "mu" in d:
            vals["mu"] = d["mu"]
        return make_submodel(self.model, **vals)

    def from_params(self, p: McNParams) -> np.ndarray:
        out = []
        for name in self.free:
            if name == "a":
                out.append(math.log(p.a * (p.c if self.reparam else 1.0)))
            elif name == "mu":
                out.append(p.mu)
            else:
                out.append(math.log(getattr(p, name)))
        return np.array(out)

    def grad(self, p: McNParams, U: np.ndarray) -> np.ndarray:
        """Chain rule from the natural score to the optimizer coordinates."""
        Ua, Ub, Uc, Um, Us = U
        if self.model is ModelKind.MCN_A_EQ_C:
            # a = c = exp(v_a): both move together
            return np.array([p.a * (Ua + Uc), p.b * Ub, Um, p.sigma * Us])
        out = []
        for name in self.free:
            if name == "a":
                out.append(p.a * Ua)
            elif name == "b":
                out.append(p.b * Ub)
            elif name == "c":
                out.append(p.c * Uc - (p.a * Ua if self.reparam else 0.0))
            elif name == "mu":
                out.append(Um)
            else:
                out.append(p.sigma * Us)
        return np.array(out)


def _std_moments(a, b, c):
    """Mean and sd of the standard McN variable, by quadrature."""
    p = McNParams(a, b, c)
    from .series import moment_quadrature
    m1 = moment_quadrature(p, 1)
    m2 = moment_quadrature(p, 2)
    return m1, math.sqrt(max(m2 - m1 * m1, 1e-300))


_SHAPE_STARTS = [(1, 1, 1), (0.5, 0.5, 0.5), (2, 2, 2), (0.5, 1, 2),
                 (2, 1, 0.5), (1, 0.5, 2), (2, 0.5, 1), (0.5, 2, 1),
                 (1, 2, 0.5), (2, 2, 0.5), (0.5, 0.5, 2), (1, 1, 2)]


def _starts(model: ModelKind, x: np.ndarray, opts: FitOptions) -> list[McNParams]:
    """Moment-matched starts: for each shape triple, (mu, sigma) reproduce the sample mean and sd."""
    mean, sd = float(np.mean(x)), float(np.std(x))
    out, seen = [], set()
    for shp in _SHAPE_STARTS:
        vals = dict(zip(("a", "b", "c"), map(float, shp)))
        vals.update(model.fixed)
        if model is ModelKind.MCN_A_EQ_C:
            vals["c"] = vals["a"]
        key = (vals["a"], vals["b"], vals["c"])
        if key in seen:
            continue
        seen.add(key)
        m, s = _std_moments(*key)
        sigma = sd / s
        out.append(McNParams(key[0], key[1], key[2], mean - sigma * m, sigma))
        if len(out) >= opts.starts:
            break
    for p in opts.extra_starts:
        try:
            q = make_submodel(model, **{k: getattr(p, k) for k in ("a", "b", "c", "mu", "sigma")
                                        if k not in model.fixed and not
                                        (model is ModelKind.MCN_A_EQ_C and k == "c")})
        except ParameterError:
            continue
        out.append(q)
    return out


def _fit_normal(x: np.ndarray, data_name: str) -> FitResult:
    n = x.size
    mu = float(np.mean(x))
    sigma = float(np.sqrt(np.mean((x - mu) ** 2)))
    if sigma <= 0:
        raise NumericError("zero-variance data cannot be fitted")
    p = McNParams(1.0, 1.0, 1.0, mu, sigma)
    ll = loglik(p, x)
    aic, bic, caic = _criteria(ll, 2, n)
    U = score(p, x)
    return FitResult(ModelKind.NORMAL, p, {"mu": mu, "sigma": sigma},
                     {"mu": sigma / math.sqrt(n), "sigma": sigma / math.sqrt(2 * n)},
                     ll, aic, bic, caic, True, 0, float(np.hypot(U[3], U[4] * sigma)), 0, n,
                     {"closed_form": True, "data": data_name})


def _run_start(tr: _Transform, xs: np.ndarray, p0: McNParams, opts: FitOptions):
    n = xs.size

    def obj(v):
        try:
            p = tr.to_params(v)
        except (ParameterError, OverflowError):
            return math.inf, np.zeros_like(v)
        ll = loglik(p, xs)
        if not math.isfinite(ll):
            return math.inf, np.zeros_like(v)
        g = tr.grad(p, score(p, xs))
        if not np.all(np.isfinite(g)):
            return math.inf, np.zeros_like(v)
        return -ll / n, -g / n

    bounds = [(None, None) if name == "mu" else (-opts.log_bound, opts.log_bound) for name in tr.free]
    v0 = tr.from_params(p0)
    v0 = np.clip(v0, [b[0] if b[0] is not None else -np.inf for b in bounds],
                 [b[1] if b[1] is not None else np.inf for b in bounds])
    f0 = obj(v0)[0]
    if not math.isfinite(f0):
        return None
    iters = 0
    v, f_prev = v0, f0
    for _ in range(6):
        res = optimize.minimize(obj, v, jac=True, method="L-BFGS-B", bounds=bounds,
                                options={"maxiter": opts.max_iter, "ftol": 1e-15, "gtol": 1e-12,
                                         "maxcor": 30})
        iters += int(res.nit)
        v = res.x
        f = float(res.fun)
        if abs(f - f_prev) <= opts.ftol * max(1.0, abs(f)):
            break
        f_prev = f
    p = tr.to_params(v)
    ll = loglik(p, xs)
    g = tr.grad(p, score(p, xs))
    at_bound = any(b[0] is not None and (abs(vi - b[0]) < 1e-6 or abs(vi - b[1]) < 1e-6)
                   for vi, b in zip(v, bounds))
    return p, ll, float(np.linalg.norm(g)), iters, -f0 * n, at_bound


def _natural_std_errors(model: ModelKind, p: McNParams, x: np.ndarray):
    """Standard errors of the free natural parameters from the inverse observed information."""
    info = observed_info(p, x)
    names = list(PARAM_NAMES)
    if model is ModelKind.MCN_A_EQ_C:
        # a = c: collapse the a and c rows/columns onto one parameter
        T = np.zeros((5, 4))
        T[0, 0] = T[2, 0] = 1.0
        T[1, 1] = T[3, 2] = T[4, 3] = 1.0
        M = T.T @ info.matrix @ T
        free = ["a", "b", "mu", "sigma"]
    else:
        idx = [names.index(f) for f in model.free_params]
        M = info.matrix[np.ix_(idx, idx)]
        free = list(model.free_params)
    diag = {"info_validated": info.all_validated}
    try:
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > 1e14:
            raise np.linalg.LinAlgError("ill-conditioned")
        cov = np.linalg.inv(M)
        d = np.diag(cov)
        if np.any(d <= 0):
            raise np.linalg.LinAlgError("information not positive definite")
        return {f: float(math.sqrt(v)) for f, v in zip(free, d)}, diag
    except np.linalg.LinAlgError as exc:
        diag["se_unavailable"] = str(exc)
        return {f: None for f in free}, diag


def fit(model: ModelKind, data, options: FitOptions | None = None) -> FitResult:
    """Maximum likelihood fit of ``model``.

    The data are standardized internally, positive parameters are optimized
    on the log scale (with a* = ac when both are free), and L-BFGS-B with the
    analytic gradient is run from every start; the best optimum is returned.
    The Normal model uses its closed form.
    """
    opts = options or FitOptions()
    x = as_values(data)
    name = data.name if isinstance(data, Dataset) else "data"
    n = x.size
    if model is ModelKind.SKEW_NORMAL:
        return _fit_skew_normal(x, opts, name)
    if model is ModelKind.NORMAL:
        return _fit_normal(x, name)
    if n < opts.min_n:
        raise DomainError(f"need at least {opts.min_n} observations, got {n}")
    loc, scale = float(np.mean(x)), float(np.std(x))
    if scale <= 0:
        raise NumericError("zero-variance data cannot be fitted")
    xs = (x - loc) / scale
    tr = _Transform(model, opts.reparam)

    def to_std(p):
        return McNParams(p.a, p.b, p.c, (p.mu - loc) / scale, p.sigma / scale)

    std_opts = FitOptions(**{**opts.__dict__, "extra_starts": tuple(to_std(p) for p in opts.extra_starts)})
    results, per_start = [], []
    for p0 in _starts(model, xs, std_opts):
        try:
            out = _run_start(tr, xs, p0, opts)
        except (NumericError, FloatingPointError, ValueError) as exc:
            per_start.append({"start": p0.as_tuple(), "error": str(exc)})
            continue
        if out is None:
            per_start.append({"start": p0.as_tuple(), "error": "non-finite start"})
            continue
        p, ll, gn, it, ll0, at_bound = out
        per_start.append({"start": p0.as_tuple(), "loglik": ll - n * math.log(scale), "grad_norm": gn,
                          "at_bound": at_bound, "initial_loglik": ll0 - n * math.log(scale)})
        results.append((ll, -len(results), p, gn, it, at_bound))
    if not results:
        raise NumericError(f"no start produced a finite likelihood for {model.value}", starts=per_start)
    ll_best, _, p_std, gn, it, at_bound = max(results, key=lambda t: (t[0], t[1]))
    p_hat = McNParams(p_std.a, p_std.b, p_std.c, loc + scale * p_std.mu, scale * p_std.sigma)
    ll = loglik(p_hat, x)
    k = model.n_free
    aic, bic, caic = _criteria(ll, k, n)
    ses, diag = _natural_std_errors(model, p_hat, x)
    est = {f: getattr(p_hat, f) for f in model.free_params}
    converged = gn <= opts.gtol * max(1.0, math.sqrt(n)) and not at_bound
    diag.update({"starts": per_start, "at_bound": at_bound, "data": name,
                 "grad_norm_scale": "optimizer coordinates, standardized data"})
    return FitResult(model, p_hat, est, ses, ll, aic, bic, caic, bool(converged), it, gn,
                     len(per_start), n, diag)


_NESTED_ORDER = [ModelKind.NORMAL, ModelKind.SKEW_NORMAL_UNIT, ModelKind.EN, ModelKind.BN,
                 ModelKind.KWN, ModelKind.MCN_A_EQ_C, ModelKind.MCN, ModelKind.SKEW_NORMAL]


def fit_models(models, data, options: FitOptions | None = None) -> dict:
    """Fit several models, smallest first, seeding each with the optima of its nested sub-models.

    Returns {ModelKind: FitResult or NumericError}.
    """
    opts = options or FitOptions()
    wanted = list(dict.fromkeys(models))
    order = [m for m in _NESTED_ORDER if m in wanted]
    out: dict = {}
    for m in order:
        seeds = tuple(r.theta_hat for k, r in out.items()
                      if isinstance(r, FitResult) and r.theta_hat is not None and _nested(k, m))
        try:
            out[m] = fit(m, data, FitOptions(**{**opts.__dict__, "extra_starts": opts.extra_starts + seeds}))
        except (NumericError, DomainError) as exc:
            out[m] = exc
    return {m: out[m] for m in wanted}


# --------------------------------------------------------------------------
# Skew-normal comparator
# --------------------------------------------------------------------------


def skew_normal_loglik(lam: float, mu: float, sigma: float, data) -> float:
    """log-likelihood of the skew-normal 2/sigma phi(z) Phi(lam z)."""
    x = as_values(data)
    z = (x - mu) / sigma
    return float(np.sum(math.log(2.0) - math.log(sigma) + sf.std_normal_logpdf(z)
                        + sf.std_normal_logcdf(lam * z)))


def _skew_normal_score(lam, mu, sigma, x):
    z = (x - mu) / sigma
    w = np.exp(sf.std_normal_logpdf(lam * z) - sf.std_normal_logcdf(lam * z))
    U_lam = np.sum(w * z)
    U_mu = np.sum(z - lam * w) / sigma
    U_sigma = np.sum(-1.0 + z * z - lam * w * z) / sigma
    return np.array([U_lam, U_mu, U_sigma])


def _fit_skew_normal(x: np.ndarray, opts: FitOptions, name: str) -> FitResult:
    n = x.size
    loc, scale = float(np.mean(x)), float(np.std(x))
    if scale <= 0:
        raise NumericError("zero-variance data cannot be fitted")
    xs = (x - loc) / scale

    def obj(v):
        lam, mu, ls = v
        s = math.exp(ls)
        ll = skew_normal_loglik(lam, mu, s, xs)
        U = _skew_normal_score(lam, mu, s, xs)
        return -ll / n, -np.array([U[0], U[1], s * U[2]]) / n

    best, per_start = None, []
    for lam0 in (-3.0, -1.0, -0.3, 0.3, 1.0, 3.0)[: max(opts.starts, 2)]:
        delta = lam0 / math.sqrt(1 + lam0 * lam0)
        m = delta * math.sqrt(2 / math.pi)
        s0 = 1.0 / math.sqrt(1 - m * m)
        v0 = np.array([lam0, -s0 * m, math.log(s0)])
        res = optimize.minimize(obj, v0, jac=True, method="L-BFGS-B",
                                bounds=[(-50, 50), (None, None), (-opts.log_bound, opts.log_bound)],
                                options={"maxiter": opts.max_iter, "ftol": 1e-15, "gtol": 1e-12})
        per_start.append({"start_lambda": lam0, "loglik": -res.fun * n - n * math.log(scale)})
        if best is None or res.fun < best.fun:
            best = res
    lam, mu_s, ls = best.x
    mu, sigma = loc + scale * mu_s, scale * math.exp(ls)
    ll = skew_normal_loglik(lam, mu, sigma, x)
    U = _skew_normal_score(lam, mu, sigma, x)
    gn = float(np.linalg.norm([U[0], U[1] * sigma, U[2] * sigma]))
    aic, bic, caic = _criteria(ll, 3, n)
    ses = {"lam": None, "mu": None, "sigma": None}
    try:
        def negll(v):
            return -skew_normal_loglik(v[0], v[1], v[2], x)
        v = np.array([lam, mu, sigma])
        h = 1e-4 * np.maximum(np.abs(v), 1e-2)
        H = np.zeros((3, 3))
        for i in range(3):
            for j in range(3):
                ei, ej = np.eye(3)[i] * h[i], np.eye(3)[j] * h[j]
                H[i, j] = (negll(v + ei + ej) - negll(v + ei - ej) - negll(v - ei + ej)
                           + negll(v - ei - ej)) / (4 * h[i] * h[j])
        cov = np.linalg.inv(H)
        if np.all(np.diag(cov) > 0):
            ses = dict(zip(("lam", "mu", "sigma"), map(float, np.sqrt(np.diag(cov)))))
    except np.linalg.LinAlgError:
        pass
    converged = gn <= opts.gtol * max(1.0, math.sqrt(n)) * scale
    return FitResult(ModelKind.SKEW_NORMAL, None, {"lam": lam, "mu": mu, "sigma": sigma}, ses,
                     ll, aic, bic, caic, bool(converged), int(best.nit), gn, len(per_start), n,
                     {"starts": per_start, "data": name})


# --------------------------------------------------------------------------
# Likelihood ratio tests
# --------------------------------------------------------------------------

# direct nesting edges (null -> alternatives); closure is taken below
_EDGES = {
    ModelKind.NORMAL: {ModelKind.EN},
    ModelKind.SKEW_NORMAL_UNIT: {ModelKind.EN},
    ModelKind.EN: {ModelKind.BN, ModelKind.KWN},
    ModelKind.BN: {ModelKind.MCN},
    ModelKind.KWN: {ModelKind.MCN},
    ModelKind.MCN_A_EQ_C: {ModelKind.MCN},
    ModelKind.MCN: set(),
    ModelKind.SKEW_NORMAL: set(),
}


def _nested(null: ModelKind, alt: ModelKind) -> bool:
    if null is alt:
        return True
    frontier, seen = [null], set()
    while frontier:
        m = frontier.pop()
        for nxt in _EDGES.get(m, ()):
            if nxt is alt:
                return True
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False


@dataclass(frozen=True)
class LrTest:
    """Likelihood ratio test of a nested null model against an alternative."""

    null_model: ModelKind
    alt_model: ModelKind
    w: float
    df: int
    p_value: float
    clamped: bool = False

    def to_record(self) -> dict:
        return {"null": self.null_model.value, "alt": self.alt_model.value, "w": self.w,
                "df": self.df, "p_value": self.p_value, "clamped": self.clamped}


def lr_test(null: FitResult, alt: FitResult) -> LrTest:
    """w = 2 (loglik_alt - loglik_null) against chi-square with the difference in free parameters."""
    if not _nested(null.model, alt.model):
        raise ParameterError(f"{null.model.value} is not nested in {alt.model.value}")
    if null.n != alt.n:
        raise ParameterError("fits must come from the same dataset")
    df = alt.model.n_free - null.model.n_free
    w = 2.0 * (alt.loglik - null.loglik)
    clamped = w < 0
    w = max(w, 0.0)
    p = 1.0 if df == 0 or w == 0 else float(stats.chi2.sf(w, df))
    return LrTest(null.model, alt.model, w, df, p, clamped)


def standard_lr_tests(fits: dict) -> list[LrTest]:
    """McN against BN, KwN (a = 1), McN(a = c), EN and Normal, for whichever fits are present."""
    alt = fits.get(ModelKind.MCN)
    if not isinstance(alt, FitResult):
        return []
    out = []
    for m in (ModelKind.BN, ModelKind.KWN, ModelKind.MCN_A_EQ_C, ModelKind.EN, ModelKind.NORMAL):
        r = fits.get(m)
        if isinstance(r, FitResult):
            out.append(lr_test(r, alt))
    return out


# --------------------------------------------------------------------------
# Descriptive statistics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DescriptiveStats:
    """Sample summary: SD with denominator n - 1, bias-adjusted skewness and excess kurtosis."""

    n: int
    mean: float
    median: float
    modes: tuple
    sd: float
    variance: float
    skewness: float | None
    kurtosis: float | None
    minimum: float
    maximum: float

    def to_record(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def descriptive_stats(data) -> DescriptiveStats:
    """Mean, median, most frequent value(s), SD, variance, skewness, excess kurtosis, range.

    Skewness and kurtosis are the bias-adjusted sample coefficients; they are
    None for constant data or samples too small to define them.
    """
    x = as_values(data)
    n = x.size
    if n < 2:
        raise DomainError("descriptive statistics need at least two values")
    vals, counts = np.unique(x, return_counts=True)
    modes = tuple(float(v) for v in vals[counts == counts.max()])
    var = float(np.var(x, ddof=1))
    skew = kurt = None
    if var > 0:
        if n >= 3:
            skew = float(stats.skew(x, bias=False))
        if n >= 4:
            kurt = float(stats.kurtosis(x, fisher=True, bias=False))
    return DescriptiveStats(n, float(np.mean(x)), float(np.median(x)), modes, math.sqrt(var), var,
                            skew, kurt, float(x.min()), float(x.max()))
