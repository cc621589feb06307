"""Exact evaluation of the McDonald-normal distribution.

The density is

    f(x) = c / (sigma B(a, b)) phi(z) Phi(z)^(ac-1) (1 - Phi(z)^c)^(b-1),

with z = (x - mu) / sigma, and the cdf is I_{Phi(z)^c}(a, b).  Everything
tail-sensitive is computed from log Phi(z) so that shapes with ac >> 1 or
arguments at |z| ~ 8 and beyond keep their relative precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import special_fn as sf
from .errors import DomainError, ParameterError

__all__ = [
    "McNParams",
    "ModelKind",
    "log_pdf",
    "pdf",
    "cdf",
    "cdf_hypergeometric",
    "log_cdf",
    "log_sf",
    "survival",
    "quantile",
    "sample",
    "hazard",
    "log_hazard",
    "make_submodel",
    "right_tail_hazard_ratio",
    "left_tail_hazard_ratio",
    "HYPERGEOMETRIC_GATE",
]

HYPERGEOMETRIC_GATE = 0.95
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class McNParams:
    """The five McN parameters.  Shapes and scale must be positive and finite."""

    a: float
    b: float
    c: float
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "c", "sigma"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer))
                    and math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive and finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not (isinstance(self.mu, (int, float, np.floating, np.integer))
                and math.isfinite(self.mu)):
            raise ParameterError(f"mu must be finite, got {self.mu!r}")
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def is_standard(self) -> bool:
        return self.mu == 0.0 and self.sigma == 1.0

    def standard(self) -> McNParams:
        """Same shapes at mu = 0, sigma = 1."""
        return McNParams(self.a, self.b, self.c)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.a, self.b, self.c, self.mu, self.sigma)

    @property
    def ln_beta(self) -> float:
        return sf.ln_beta(self.a, self.b)


class ModelKind(enum.Enum):
    """Model tags.  All but SKEW_NORMAL are constrained McN sub-models.

    ``MCN_A_EQ_C`` ties a = c (one fewer free parameter than McN) and exists
    so that nested tests under that constraint can be run.  ``SKEW_NORMAL`` is
    the three-parameter Azzalini skew-normal, fitted as an outside comparator.
    """

    MCN = "McN"
    BN = "BN"
    KWN = "KwN"
    EN = "EN"
    NORMAL = "Normal"
    SKEW_NORMAL_UNIT = "SkewNormalUnitShape"
    MCN_A_EQ_C = "McN(a=c)"
    SKEW_NORMAL = "SkewNormal"

    @property
    def fixed(self) -> dict[str, float]:
        """Shape parameters held at fixed values."""
        return dict(_FIXED[self])

    @property
    def free_params(self) -> tuple[str, ...]:
        if self is ModelKind.SKEW_NORMAL:
            return ("lam", "mu", "sigma")
        if self is ModelKind.MCN_A_EQ_C:
            return ("a", "b", "mu", "sigma")
        return tuple(n for n in ("a", "b", "c", "mu", "sigma") if n not in _FIXED[self])

    @property
    def n_free(self) -> int:
        return len(self.free_params)

    @property
    def is_mcn_family(self) -> bool:
        return self is not ModelKind.SKEW_NORMAL

    @classmethod
    def parse(cls, text: str) -> ModelKind:
        key = text.strip().lower().replace("-", "").replace("_", "")
        for kind in cls:
            names = {kind.value.lower().replace("-", "").replace("_", ""),
                     kind.name.lower().replace("_", "")}
            if key in names:
                return kind
        aliases = {"sn": cls.SKEW_NORMAL, "skewnormal": cls.SKEW_NORMAL,
                   "mcnac": cls.MCN_A_EQ_C, "sn1": cls.SKEW_NORMAL_UNIT}
        if key in aliases:
            return aliases[key]
        raise ParameterError(f"unknown model {text!r}")


_FIXED = {
    ModelKind.MCN: {},
    ModelKind.BN: {"c": 1.0},
    ModelKind.KWN: {"a": 1.0},
    ModelKind.EN: {"b": 1.0, "c": 1.0},
    ModelKind.NORMAL: {"a": 1.0, "b": 1.0, "c": 1.0},
    ModelKind.SKEW_NORMAL_UNIT: {"a": 2.0, "b": 1.0, "c": 1.0},
    ModelKind.MCN_A_EQ_C: {},
    ModelKind.SKEW_NORMAL: {},
}


def make_submodel(kind: ModelKind, **free) -> McNParams:
    """Build the constrained McNParams for ``kind`` from its free parameters.

    Constrained parameters may be passed only if they equal their fixed value.
    """
    if not kind.is_mcn_family:
        raise ParameterError(f"{kind.value} is not an McN sub-model")
    vals = {"mu": 0.0, "sigma": 1.0}
    for name, v in kind.fixed.items():
        if name in free and free[name] != v:
            raise ParameterError(f"{kind.value} requires {name} = {v}, got {free[name]}")
        vals[name] = v
    if kind is ModelKind.MCN_A_EQ_C:
        if "c" in free and "a" in free and free["c"] != free["a"]:
            raise ParameterError("McN(a=c) requires a = c")
        if "a" not in free and "c" in free:
            free = {**free, "a": free["c"]}
        free = {**free, "c": free.get("a")}
    unknown = set(free) - {"a", "b", "c", "mu", "sigma"}
    if unknown:
        raise ParameterError(f"unknown parameters {sorted(unknown)}")
    for name in ("a", "b", "c", "mu", "sigma"):
        if name in free and name not in kind.fixed:
            vals[name] = free[name]
    missing = [n for n in ("a", "b", "c") if n not in vals]
    if missing:
        raise ParameterError(f"{kind.value} needs values for {missing}")
    return McNParams(vals["a"], vals["b"], vals["c"], vals["mu"], vals["sigma"])


def _out(v, x):
    return float(v) if np.ndim(x) == 0 else v


def _log_pieces(p: McNParams, x):
    """z, log Phi(z), log Phi^c and log(1 - Phi^c), all without cancellation."""
    z = (np.asarray(x, dtype=float) - p.mu) / p.sigma
    log_phi_cdf = special.log_ndtr(z)
    log_pc = p.c * log_phi_cdf
    with np.errstate(divide="ignore"):
        log1m_pc = np.where(log_pc > -_LN2,
                            np.log(-np.expm1(log_pc)),
                            np.log1p(-np.exp(log_pc)))
        # once log Phi rounds to zero, 1 - Phi^c ~ c (1 - Phi)
        log1m_pc = np.where(log_pc > -1e-200,
                            math.log(p.c) + special.log_ndtr(-z), log1m_pc)
    return z, log_phi_cdf, log_pc, log1m_pc


def _xlogy(coef, logv):
    # coef * logv with the convention 0 * (-inf) = 0
    if coef == 0.0:
        return np.zeros_like(logv)
    return coef * logv


def log_pdf(p: McNParams, x):
    """Log density, assembled from log phi, log Phi and log(1 - Phi^c)."""
    z, lphi, _, l1m = _log_pieces(p, x)
    with np.errstate(over="ignore", invalid="ignore"):
        out = (math.log(p.c) - p.ln_beta - math.log(p.sigma)
               - 0.5 * z * z - sf.LOG_SQRT_2PI
               + _xlogy(p.a * p.c - 1.0, lphi) + _xlogy(p.b - 1.0, l1m))
    # beyond |z| ~ 1e10 every factor combination has underflowed; avoid inf - inf
    out = np.where(np.abs(z) > 1e10, -np.inf, out)
    return _out(out, x)


def pdf(p: McNParams, x):
    return _out(np.exp(log_pdf(p, x)), x)


def _log_cdf_pair(p: McNParams, x):
    _, _, lpc, l1m = _log_pieces(p, x)
    return sf.log_reg_inc_beta(lpc, l1m, p.a, p.b)


def log_cdf(p: McNParams, x):
    return _out(_log_cdf_pair(p, x)[0], x)


def log_sf(p: McNParams, x):
    """Log survival log(1 - F(x)), accurate deep into the right tail."""
    return _out(_log_cdf_pair(p, x)[1], x)


def survival(p: McNParams, x):
    return _out(np.exp(_log_cdf_pair(p, x)[1]), x)


def cdf_hypergeometric(p: McNParams, x):
    """Cdf through the Gauss hypergeometric form.

    F = Phi^{ac} / (a B(a,b)) 2F1(a, 1-b; a+1; Phi^c).  Only defined here for
    Phi(z)^c <= 0.95, where the power series converges at a useful rate.
    """
    _, _, lpc, _ = _log_pieces(p, x)
    lpc_arr = np.atleast_1d(lpc)
    out = np.empty(lpc_arr.shape)
    for idx, lv in np.ndenumerate(lpc_arr):
        w = math.exp(lv)
        if w > HYPERGEOMETRIC_GATE:
            raise DomainError(
                f"hypergeometric cdf route is gated to Phi^c <= {HYPERGEOMETRIC_GATE}, got {w:.6g}")
        if w == 0.0:
            out[idx] = 0.0
            continue
        h = sf.gauss_2F1(p.a, 1.0 - p.b, p.a + 1.0, w)
        out[idx] = math.exp(p.a * lv - math.log(p.a) - p.ln_beta) * h
    return _out(out.reshape(np.shape(lpc)), x)


def cdf(p: McNParams, x, route: str = "beta"):
    """Distribution function.

    ``route="beta"`` (default) evaluates I_{Phi^c}(a, b); ``route="hypergeometric"``
    uses the 2F1 form and is meant as a cross-check.
    """
    if route == "hypergeometric":
        return cdf_hypergeometric(p, x)
    if route != "beta":
        raise DomainError(f"unknown cdf route {route!r}")
    return _out(np.exp(_log_cdf_pair(p, x)[0]), x)


def quantile(p: McNParams, u):
    """Quantile function mu + sigma Phi^{-1}(I^{-1}_u(a, b)^{1/c})."""
    ua = np.asarray(u, dtype=float)
    if np.any(~(ua > 0)) or np.any(~(ua < 1)):
        raise DomainError(f"u must lie strictly inside (0, 1), got {u!r}")
    flat = np.atleast_1d(ua).ravel()
    log_v = np.array([sf._inv_reg_inc_beta_logpair(float(ui), p.a, p.b)[0] for ui in flat])
    z = sf.std_normal_quantile_log(log_v / p.c)
    out = (p.mu + p.sigma * z).reshape(ua.shape)
    return _out(out, u)


def _log_gamma_variates(rng, shape, n):
    # log of Gamma(shape) draws; shapes below 1 use G(k) = G(k+1) U^(1/k)
    # so that tiny variates do not underflow to zero
    if shape >= 1.0:
        return np.log(rng.standard_gamma(shape, n))
    g = rng.standard_gamma(shape + 1.0, n)
    u = rng.random(n)
    return np.log(g) + np.log(u) / shape


def sample(p: McNParams, n: int, seed: int | None = None) -> np.ndarray:
    """Draw n variates: V ~ Beta(a, b) from two gamma variates, then X = mu + sigma Phi^{-1}(V^{1/c}).

    Each call owns a fresh generator seeded with ``seed``, so equal seeds
    give identical arrays.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise DomainError(f"n must be a positive integer, got {n!r}")
    rng = np.random.default_rng(seed)
    lg1 = _log_gamma_variates(rng, p.a, n)
    lg2 = _log_gamma_variates(rng, p.b, n)
    log_v = -np.logaddexp(0.0, lg2 - lg1)
    log_vc = -np.logaddexp(0.0, lg1 - lg2)
    v = np.exp(log_v)
    vc = np.exp(log_vc)
    with np.errstate(divide="ignore"):
        log_v = np.where(v > 0.5, np.log1p(-vc), log_v)
    z = sf.std_normal_quantile_log(log_v / p.c)
    return p.mu + p.sigma * z


def log_hazard(p: McNParams, x):
    """log h(x) = log f(x) - log(1 - F(x)), in log space throughout."""
    _, lsf = _log_cdf_pair(p, x)
    return _out(np.asarray(log_pdf(p, x)) - lsf, x)


def hazard(p: McNParams, x):
    return _out(np.exp(log_hazard(p, x)), x)


def right_tail_hazard_ratio(p: McNParams, z: float = 8.0) -> float:
    """h(x) / ((b / sigma^2) x) at x = mu + sigma z; tends to 1 as z grows.

    With mu != 0 the asymptote applies to x itself, so the check is most
    meaningful at mu = 0.
    """
    x = p.mu + p.sigma * z
    return math.exp(log_hazard(p, x) - math.log(p.b * x / p.sigma ** 2))


def left_tail_hazard_ratio(p: McNParams, z: float = -8.0) -> float:
    """h(x) over c/(sigma B) (-z)^(1-ac) phi(z)^(ac) at x = mu + sigma z; tends to 1 as z -> -inf."""
    if z >= 0:
        raise DomainError("left-tail ratio needs z < 0")
    x = p.mu + p.sigma * z
    ac = p.a * p.c
    log_ref = (math.log(p.c) - math.log(p.sigma) - p.ln_beta
               + (1.0 - ac) * math.log(-z) + ac * float(sf.std_normal_logpdf(z)))
    return math.exp(log_hazard(p, x) - log_ref)
