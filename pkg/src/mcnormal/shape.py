"""Shape of the standard McN density: critical points, modes and modality boundaries.

Writing the derivative of the standardized density as a positive factor
times s(z), the critical points are the roots of

    s(z) = (ac - 1) phi (1 - Phi^c) - c (b - 1) phi Phi^c - z Phi (1 - Phi^c)

and the sign of ds/dz at a root classifies it (negative: mode).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import core
from . import special_fn as sf
from .core import McNParams
from .errors import DomainError

__all__ = [
    "ROOT_TOL",
    "CriticalPoint",
    "s_fn",
    "ds_dz",
    "critical_points",
    "modes",
    "mode_count",
    "proposition1_check",
    "mode_monotonicity_check",
    "track_modes",
    "a_curve",
    "b_curve",
    "BoundaryCurve",
    "boundary_curves",
]

ROOT_TOL = 1e-10
_CLASSIFY_TOL = 1e-9  # on (log f)'' at the root


def _pieces(z, c):
    z = np.asarray(z, dtype=float)
    log_Phi = sf.std_normal_logcdf(z)
    Phi = np.exp(log_Phi)
    phi = np.exp(sf.std_normal_logpdf(z))
    P = np.exp(c * log_Phi)
    one_m_P = -np.expm1(c * log_Phi)
    return z, phi, Phi, P, one_m_P, log_Phi


def s_fn(z, a: float, b: float, c: float):
    """The bracketed factor s(z) of the density derivative; zero exactly at critical points."""
    z, phi, Phi, P, omP, _ = _pieces(z, c)
    out = (a * c - 1.0) * phi * omP - c * (b - 1.0) * phi * P - z * Phi * omP
    return float(out) if out.ndim == 0 else out


def ds_dz(z, a: float, b: float, c: float):
    """Derivative of s(z):

    -Phi (1 - Phi^c) - c z phi [a - (a+b) Phi^c] + c [1 - c(a+b-1)] phi^2 Phi^(c-1).
    """
    z, phi, Phi, P, omP, log_Phi = _pieces(z, c)
    Pcm1 = np.exp((c - 1.0) * log_Phi)
    out = (-Phi * omP - c * z * phi * (a - (a + b) * P)
           + c * (1.0 - c * (a + b - 1.0)) * phi * phi * Pcm1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CriticalPoint:
    """A root of s(z), classified by the sign of ds/dz."""

    z: float
    s_value: float
    ds_dz: float
    kind: str  # "mode", "antimode" or "degenerate"
    confirmed: bool = True  # density check agrees with the classification


def _log_slope(z, a: float, b: float, c: float):
    """(log f)'(z) = s(z) / (Phi (1 - Phi^c)), evaluated in log space.

    Same roots as s, but it stays O(|z|) far into the left tail where s
    itself underflows.
    """
    z = np.asarray(z, dtype=float)
    log_Phi = sf.std_normal_logcdf(z)
    log_phi = sf.std_normal_logpdf(z)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        log_omP = np.log(-np.expm1(c * log_Phi))
        out = ((a * c - 1.0) * np.exp(log_phi - log_Phi)
               - c * (b - 1.0) * np.exp(log_phi + (c - 1.0) * log_Phi - log_omP) - z)
    return float(out) if out.ndim == 0 else out


def _curvature(z: float, a: float, b: float, c: float) -> float:
    """(log f)'' at a root of s: ds/dz divided by Phi (1 - Phi^c).

    s carries that factor, which is tiny deep in either tail, so the sign
    test is made on the quotient rather than on ds/dz itself.
    """
    _, _, _, _, omP, log_Phi = _pieces(z, c)
    with np.errstate(divide="ignore"):
        log_scale = float(log_Phi + np.log(omP))
    return ds_dz(z, a, b, c) * math.exp(-log_scale) if math.isfinite(log_scale) else math.nan


def _classify(d: float) -> str:
    if d < -_CLASSIFY_TOL:
        return "mode"
    if d > _CLASSIFY_TOL:
        return "antimode"
    return "degenerate"


def _density_confirms(a, b, c, z, kind, h=1e-4) -> bool:
    p = McNParams(a, b, c)
    f0, fl, fr = (core.log_pdf(p, v) for v in (z, z - h, z + h))
    if kind == "mode":
        return f0 >= fl and f0 >= fr
    if kind == "antimode":
        return f0 <= fl and f0 <= fr
    return True


def critical_points(a: float, b: float, c: float, z_range=(-10.0, 10.0),
                    grid: int = 2001) -> list[CriticalPoint]:
    """All critical points of the standard density inside ``z_range``.

    Sign changes on a uniform grid are refined with Brent's method and a
    Newton polish; each root is then classified and checked against the
    density itself.  The scan uses (log f)', which has the roots of s but
    does not underflow in the left tail, so a wide ``z_range`` is usable.
    A density on the real line always has a mode, so finding none inside
    ``z_range`` raises a RuntimeWarning; widen the range in that case.
    """
    for v, name in ((a, "a"), (b, "b"), (c, "c")):
        if not (v > 0 and math.isfinite(v)):
            raise DomainError(f"{name} must be positive and finite")
    lo, hi = map(float, z_range)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError("z_range must be a finite increasing pair")
    if grid < 200:
        raise DomainError("grid must be at least 200")
    zs = np.linspace(lo, hi, grid)
    sv = _log_slope(zs, a, b, c)
    roots = []
    for i in range(grid - 1):
        s0, s1 = sv[i], sv[i + 1]
        if s0 == 0.0:
            roots.append(zs[i])
        elif s0 * s1 < 0:
            r = optimize.brentq(_log_slope, zs[i], zs[i + 1], args=(a, b, c), xtol=1e-15, rtol=1e-15)
            for _ in range(2):
                d = ds_dz(r, a, b, c)
                if d == 0:
                    break
                step = s_fn(r, a, b, c) / d
                cand = r - step
                if zs[i] <= cand <= zs[i + 1] and abs(s_fn(cand, a, b, c)) < abs(s_fn(r, a, b, c)):
                    r = cand
                else:
                    break
            roots.append(r)
    if sv[-1] == 0.0:
        roots.append(zs[-1])
    out = []
    for r in roots:
        d = ds_dz(r, a, b, c)
        kind = _classify(_curvature(r, a, b, c))
        out.append(CriticalPoint(float(r), s_fn(r, a, b, c), float(d), kind,
                                 _density_confirms(a, b, c, r, kind)))
    if not any(cp.kind == "mode" for cp in out):
        warnings.warn(f"no mode of McN({a:g}, {b:g}, {c:g}) in z_range {tuple(z_range)}",
                      RuntimeWarning, stacklevel=2)
    return out


def modes(p: McNParams, **kw) -> list[float]:
    """Mode locations on the original scale, mu + sigma z."""
    return [p.mu + p.sigma * cp.z for cp in critical_points(p.a, p.b, p.c, **kw) if cp.kind == "mode"]


def mode_count(a: float, b: float, c: float, **kw) -> int:
    return sum(cp.kind == "mode" for cp in critical_points(a, b, c, **kw))


def proposition1_check(a: float, b: float, c: float) -> tuple[bool, bool]:
    """Sufficient condition for z = 0 to be a mode.

    Returns (condition_holds, zero_is_mode) where the condition is
    c(1-b) = (2^c - 1)(1 - ac) together with a > pi/(2c^2) (2^-c - 1) + 1/c,
    and zero_is_mode is decided directly from s(0) and ds/dz(0).
    """
    eq = abs(c * (1.0 - b) - (2.0 ** c - 1.0) * (1.0 - a * c)) <= 1e-9
    bound = math.pi / (2.0 * c * c) * (2.0 ** -c - 1.0) + 1.0 / c
    holds = eq and a > bound
    zero_is_mode = abs(s_fn(0.0, a, b, c)) <= ROOT_TOL and ds_dz(0.0, a, b, c) < 0
    return bool(holds), bool(zero_is_mode)


def track_modes(a_grid, b: float, c: float, jump: float = 0.5, **kw) -> list[list[tuple[float, float]]]:
    """Follow mode locations across an increasing grid of a.

    Returns segments of (a, z) pairs.  A mode at the next a continues the
    nearest unclaimed segment if it lies within ``jump``; otherwise it starts
    a new segment (mode birth), and unmatched segments end (mode death).
    """
    a_grid = list(map(float, a_grid))
    if any(x2 <= x1 for x1, x2 in zip(a_grid, a_grid[1:])):
        raise DomainError("a_grid must be strictly increasing")
    segments: list[list[tuple[float, float]]] = []
    open_idx: list[int] = []
    for a in a_grid:
        zs = [cp.z for cp in critical_points(a, b, c, **kw) if cp.kind == "mode"]
        pairs = sorted(((abs(z - segments[k][-1][1]), j, k) for j, z in enumerate(zs) for k in open_idx))
        used_z, used_k, new_open = set(), set(), []
        for dist, j, k in pairs:
            if dist > jump or j in used_z or k in used_k:
                continue
            segments[k].append((a, zs[j]))
            used_z.add(j)
            used_k.add(k)
            new_open.append(k)
        for j, z in enumerate(zs):
            if j not in used_z:
                segments.append([(a, z)])
                new_open.append(len(segments) - 1)
        open_idx = new_open
    return segments


def mode_monotonicity_check(a_grid, b: float, c: float, tol: float = 1e-8, **kw) -> bool:
    """Whether every tracked mode location is non-decreasing in a."""
    for seg in track_modes(a_grid, b, c, **kw):
        zs = [z for _, z in seg]
        if any(z2 < z1 - tol for z1, z2 in zip(zs, zs[1:])):
            return False
    return True


def _guard(z, c):
    z, phi, Phi, P, omP, log_Phi = _pieces(z, c)
    if np.any(omP < 1e-12):
        raise DomainError("z lies where Phi(z)^c rounds to 1; the curve is not computable there")
    return z, phi, Phi, P, omP, log_Phi


def a_curve(z, b: float, c: float):
    """a_{b,c}(z): the value of a making z a critical point for fixed (b, c)."""
    z, phi, Phi, P, omP, log_Phi = _guard(z, c)
    # z Phi / phi through logs to stay finite in the left tail
    ratio = z * np.exp(log_Phi - sf.std_normal_logpdf(z))
    out = ratio / c - ((1.0 - b + 1.0 / c) * P - 1.0 / c) / omP
    return float(out) if out.ndim == 0 else out


def b_curve(z, a: float, c: float):
    """b_{a,c}(z): the value of b making z a critical point for fixed (a, c)."""
    z, phi, Phi, P, omP, log_Phi = _guard(z, c)
    t = z * omP * np.exp(-sf.std_normal_logpdf(z) - (c - 1.0) * log_Phi) / c
    out = (a - 1.0 / c) / P - t + 1.0 - a + 1.0 / c
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BoundaryCurve:
    """Samples of a_{b,c}(z) or b_{a,c}(z) and the local maxima found on them."""

    which: str  # "a" or "b"
    fixed: dict
    z: np.ndarray
    values: np.ndarray
    local_maxima: list = field(default_factory=list)  # (z*, value*) pairs

    @property
    def star(self):
        """Largest local maximum (z*, value*), or None when the curve has none."""
        if not self.local_maxima:
            return None
        return max(self.local_maxima, key=lambda t: t[1])

    def records(self) -> list[dict]:
        return [{"z": float(z), self.which: float(v)} for z, v in zip(self.z, self.values)]


def boundary_curves(z_grid, *, c: float, b: float | None = None, a: float | None = None) -> BoundaryCurve:
    """Sample a_{b,c} (give ``b``) or b_{a,c} (give ``a``) and locate its local maxima.

    Interior local maxima of the samples are refined by golden-section search.
    """
    if (a is None) == (b is None):
        raise DomainError("give exactly one of a or b")
    z = np.asarray(z_grid, dtype=float)
    if z.ndim != 1 or z.size < 3 or np.any(np.diff(z) <= 0):
        raise DomainError("z_grid must be a strictly increasing sequence of at least 3 points")
    if b is not None:
        which, fixed, fn = "a", {"b": b, "c": c}, (lambda t: a_curve(t, b, c))
    else:
        which, fixed, fn = "b", {"a": a, "c": c}, (lambda t: b_curve(t, a, c))
    vals = np.asarray(fn(z), dtype=float)
    maxima = []
    for i in range(1, z.size - 1):
        if vals[i] > vals[i - 1] and vals[i] >= vals[i + 1]:
            res = optimize.minimize_scalar(lambda t: -fn(t), bracket=(z[i - 1], z[i], z[i + 1]),
                                           method="golden", tol=1e-10)
            maxima.append((float(res.x), float(-res.fun)))
    return BoundaryCurve(which, fixed, z, vals, maxima)
