"""The uniform-negative-binomial (UNB) count distribution and comparators.

A UNB variate is drawn uniformly on {0, ..., N} with N negative binomial:
pmf(x) = q^x p^r / (1+x) * C(r+x-1, x) * 2F1(1, r+x; 2+x; q), q = 1 - p.

Everything is assembled in log space.  Three evaluation routes cover the
whole parameter square (see ``_log_2f1_pmf``):

* q <= 0.75: direct hypergeometric series;
* q > 0.75, r < 2: Euler-transformed series, whose numerator parameter
  2 - r keeps terms decaying;
* q > 0.75, r >= 2: the subtractive probability recurrence, which needs
  no hypergeometric evaluation at all (for x beyond 100 the direct
  series takes over again, because the recurrence accumulates absolute
  rounding noise of order 1e-15 * pmf(0)).

Comparator laws (negative binomial with pmf C(r+n-1, n) p^r q^n, the
geometric, and the uniform-Poisson mixture) live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special as _sps

from .errors import DomainError
from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    confluent_1f1,
    gauss_2f1,
    series_2f1_raw,
)

__all__ = [
    "UnbParams",
    "NbParams",
    "UpParams",
    "GeomParams",
    "unb_pmf",
    "unb_logpmf",
    "unb_pmf_vector",
    "unb_cdf",
    "unb_mean",
    "unb_variance",
    "unb_dispersion_index",
    "unb_mgf",
    "unb_pgf",
    "unb_sample",
    "up_pmf",
    "up_logpmf",
    "nb_pmf",
    "nb_logpmf",
    "nb_cdf",
    "nb_tail_cutoff",
    "geom_pmf",
]


@dataclass(frozen=True)
class UnbParams:
    """Shape r > 0 of the latent negative binomial and success probability p."""

    r: float
    p: float

    def __post_init__(self):
        if not (self.r > 0.0 and math.isfinite(self.r)):
            raise DomainError(f"r must be a positive finite real, got {self.r}")
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"p must lie in (0, 1), got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p


@dataclass(frozen=True)
class NbParams:
    r: float
    p: float

    def __post_init__(self):
        if not (self.r > 0.0 and math.isfinite(self.r)):
            raise DomainError(f"r must be a positive finite real, got {self.r}")
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"p must lie in (0, 1), got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p


@dataclass(frozen=True)
class UpParams:
    """Rate of the latent Poisson variable in the uniform-Poisson mixture."""

    lam: float

    def __post_init__(self):
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise DomainError(f"lam must be a positive finite real, got {self.lam}")


@dataclass(frozen=True)
class GeomParams:
    p: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"p must lie in (0, 1), got {self.p}")


def _check_count(x) -> int:
    xi = int(x)
    if xi != x or xi < 0:
        raise DomainError(f"x must be a non-negative integer, got {x}")
    return xi


def _pmf_zero(r: float, p: float) -> float:
    """pmf at x = 0: (p - p^r) / ((1-p)(r-1)), with the analytic r = 1 limit.

    Written through expm1 so the r -> 1 cancellation never materialises.
    """
    q = 1.0 - p
    if r == 1.0:
        return -p * math.log(p) / q
    return -p * math.expm1((r - 1.0) * math.log(p)) / (q * (r - 1.0))


def _dpmf_zero_dp(r: float, p: float) -> float:
    """d/dp of the pmf at x = 0."""
    q = 1.0 - p
    if r == 1.0:
        lp = math.log(p)
        return (-lp - 1.0) / q - p * lp / (q * q)
    prm1 = math.exp((r - 1.0) * math.log(p))
    num = p - p * prm1  # p - p^r
    return (1.0 - r * prm1) / (q * (r - 1.0)) + num / (q * q * (r - 1.0))


def _log_2f1_pmf(r: float, p: float, x: int,
                 ctrl: SeriesControl) -> float:
    """log 2F1(1, r+x; 2+x; q) by direct or Euler-transformed series."""
    q = 1.0 - p
    if q <= 0.75 or r >= 2.0:
        return math.log(series_2f1_raw(1.0, r + x, 2.0 + x, q, ctrl).value)
    # Euler: (1-q)^(1-r) * 2F1(1+x, 2-r; 2+x; q)
    inner = series_2f1_raw(1.0 + x, 2.0 - r, 2.0 + x, q, ctrl).value
    return (1.0 - r) * math.log(p) + math.log(inner)


def _logpmf_recurrence(r: float, p: float, x: int) -> float:
    """logpmf via the subtractive recurrence, valid for small x."""
    q = 1.0 - p
    lp, lq = math.log(p), math.log(q)
    val = _pmf_zero(r, p)
    lg_r = math.lgamma(r)
    for k in range(x):
        logdelta = (r * lp + k * lq + math.lgamma(r + k) - lg_r
                    - math.lgamma(k + 1.0) - math.log(k + 1.0))
        val -= math.exp(logdelta)
    if val <= 0.0:
        return -math.inf
    return math.log(val)


def unb_logpmf(params: UnbParams, x, ctrl: Optional[SeriesControl] = None) -> float:
    """Natural log of the UNB pmf at a non-negative integer x."""
    ctrl = ctrl or DEFAULT_CONTROL
    x = _check_count(x)
    r, p = params.r, params.p
    q = 1.0 - p
    if q > 0.75 and r >= 2.0 and x <= 100:
        return _logpmf_recurrence(r, p, x)
    base = (x * math.log(q) + r * math.log(p) - math.log(1.0 + x)
            + math.lgamma(r + x) - math.lgamma(r) - math.lgamma(x + 1.0))
    return base + _log_2f1_pmf(r, p, x, ctrl)


def unb_pmf(params: UnbParams, x, ctrl: Optional[SeriesControl] = None) -> float:
    """UNB probability mass at x."""
    return math.exp(unb_logpmf(params, x, ctrl))


def _unb_pmf_hyp(params: UnbParams, x,
                 ctrl: Optional[SeriesControl] = None) -> float:
    """pmf forced through the hypergeometric route (no recurrence).

    Kept as the second leg of the dual-route check against
    :func:`unb_pmf_vector`.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    x = _check_count(x)
    r, p = params.r, params.p
    q = 1.0 - p
    base = (x * math.log(q) + r * math.log(p) - math.log(1.0 + x)
            + math.lgamma(r + x) - math.lgamma(r) - math.lgamma(x + 1.0))
    if q > 0.75 and r < 2.0:
        ln_f = _log_2f1_pmf(r, p, x, ctrl)
    else:
        ln_f = math.log(series_2f1_raw(1.0, r + x, 2.0 + x, q, ctrl).value)
    return math.exp(base + ln_f)


def unb_pmf_vector(params: UnbParams, x_max) -> np.ndarray:
    """pmf values at 0..x_max through the subtractive recurrence.

    p(0) has the closed form (p - p^r)/((1-p)(r-1)) (its analytic limit at
    r = 1), and p(x+1) = p(x) - p^r q^x C(r+x-1, r-1)/(x+1).  No
    hypergeometric series is evaluated.
    """
    x_max = _check_count(x_max)
    r, p = params.r, params.p
    q = 1.0 - p
    lp, lq = math.log(p), math.log(q)
    lg_r = math.lgamma(r)
    out = np.empty(x_max + 1)
    out[0] = _pmf_zero(r, p)
    for k in range(x_max):
        logdelta = (r * lp + k * lq + math.lgamma(r + k) - lg_r
                    - math.lgamma(k + 1.0) - math.log(k + 1.0))
        out[k + 1] = out[k] - math.exp(logdelta)
    return out


def unb_cdf(params: UnbParams, x, ctrl: Optional[SeriesControl] = None) -> float:
    """P(X <= x) = F_NB(x) + ((r+x)/(x+2)) C(r+x-1, x) p^r q^(x+1)
    2F1(1, r+x+1; x+3; q)."""
    ctrl = ctrl or DEFAULT_CONTROL
    x = _check_count(x)
    r, p = params.r, params.p
    q = 1.0 - p
    f_nb = nb_cdf(NbParams(r, p), x)
    log_coef = (math.log(r + x) - math.log(x + 2.0)
                + math.lgamma(r + x) - math.lgamma(r) - math.lgamma(x + 1.0)
                + r * math.log(p) + (x + 1.0) * math.log(q))
    f2 = gauss_2f1(1.0, r + x + 1.0, x + 3.0, q, ctrl)
    return min(f_nb + math.exp(log_coef + math.log(f2)), 1.0)


def unb_mean(params: UnbParams) -> float:
    return 0.5 * params.r * params.q / params.p


def unb_variance(params: UnbParams) -> float:
    r, p, q = params.r, params.p, params.q
    return (r * q / (12.0 * p)) * (6.0 + 4.0 * q / p + r * q / p)


def unb_dispersion_index(params: UnbParams) -> float:
    r, p, q = params.r, params.p, params.q
    return 1.0 + 4.0 * q / (6.0 * p) + r * q / (6.0 * p)


def _one_minus_pow_over(u: float, r: float) -> float:
    """(1 - u^(1-r)) / (r - 1), continuous through r = 1 where it is log u."""
    lu = math.log(u)
    if r == 1.0:
        return lu
    return -math.expm1((1.0 - r) * lu) / (r - 1.0)


def _mgf_series(params: UnbParams, w: float) -> float:
    """E[w^X] by direct summation, used near the removable singularity w = 1."""
    cutoff = nb_tail_cutoff(NbParams(params.r, params.p), tail=1e-14)
    pmf = unb_pmf_vector(params, cutoff)
    x = np.arange(cutoff + 1, dtype=float)
    return float(np.sum(pmf * w ** x))


def unb_mgf(params: UnbParams, t: float) -> float:
    """Moment generating function E[e^(tX)], defined for t < -log q.

    Closed form p^r [g(p) - g(1 - q e^t)] / (q (e^t - 1)) with
    g(u) = (1 - u^(1-r))/(r - 1); the printed source formula carries a
    spurious e^(-t) factor and fails M(0) = 1, so the form here is
    re-derived from the mixture and pinned by the moment tests.
    """
    r, p, q = params.r, params.p, params.q
    if not t < -math.log(q):
        raise DomainError(f"mgf requires t < -log(q) = {-math.log(q)}, got {t}")
    w = math.exp(t)
    if abs(w - 1.0) < 1e-6:
        return _mgf_series(params, w)
    g_p = _one_minus_pow_over(p, r)
    g_w = _one_minus_pow_over(1.0 - q * w, r)
    return math.exp(r * math.log(p)) * (g_p - g_w) / (q * (w - 1.0))


def unb_pgf(params: UnbParams, s: float) -> float:
    """Probability generating function E[s^X] for |s| < 1/q."""
    r, p, q = params.r, params.p, params.q
    if not abs(s) < 1.0 / q:
        raise DomainError(f"pgf requires |s| < 1/q = {1.0 / q}, got {s}")
    if abs(s - 1.0) < 1e-6:
        return _mgf_series(params, s)
    g_p = _one_minus_pow_over(p, r)
    g_s = _one_minus_pow_over(1.0 - q * s, r)
    return math.exp(r * math.log(p)) * (g_p - g_s) / (q * (s - 1.0))


def unb_sample(params: UnbParams, n: int, seed: int) -> np.ndarray:
    """Draw n variates: N from the negative binomial via its gamma-Poisson
    mixture (exact for non-integer r), then X uniform on {0, ..., N}."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    r, p, q = params.r, params.p, params.q
    lam = rng.gamma(shape=r, scale=q / p, size=n)
    latent = rng.poisson(lam)
    return rng.integers(0, latent + 1)


def up_logpmf(params: UpParams, x) -> float:
    """log pmf of the uniform-Poisson law, via the Poisson survival identity
    pmf(x) = P(N >= x + 1) / lam with N Poisson(lam)."""
    x = _check_count(x)
    lam = params.lam
    surv = float(_sps.gammainc(x + 1.0, lam))
    if surv <= 0.0:
        return -math.inf
    return math.log(surv) - math.log(lam)


def up_pmf(params: UpParams, x, ctrl: Optional[SeriesControl] = None) -> float:
    """Uniform-Poisson pmf lam^x e^(-lam)/(x+1)! * 1F1(1; x+2; lam)."""
    ctrl = ctrl or DEFAULT_CONTROL
    x = _check_count(x)
    lam = params.lam
    log_base = x * math.log(lam) - lam - math.lgamma(x + 2.0)
    return math.exp(log_base) * confluent_1f1(1.0, x + 2.0, lam, ctrl)


def nb_logpmf(params: NbParams, x) -> float:
    x = _check_count(x)
    r, p, q = params.r, params.p, params.q
    return (math.lgamma(r + x) - math.lgamma(r) - math.lgamma(x + 1.0)
            + r * math.log(p) + x * math.log(q))


def nb_pmf(params: NbParams, x) -> float:
    return math.exp(nb_logpmf(params, x))


def nb_cdf(params: NbParams, x) -> float:
    """P(N <= x) by direct summation of the pmf."""
    x = _check_count(x)
    r, p, q = params.r, params.p, params.q
    term = math.exp(r * math.log(p))  # pmf at 0
    total = term
    for k in range(x):
        term *= q * (r + k) / (k + 1.0)
        total += term
    return min(total, 1.0)


def nb_tail_cutoff(params: NbParams, tail: float = 1e-12) -> int:
    """Smallest x with negative-binomial survival P(N >= x) < tail."""
    r, p, q = params.r, params.p, params.q
    term = math.exp(r * math.log(p))
    cum = term
    x = 0
    while 1.0 - cum >= tail:
        term *= q * (r + x) / (x + 1.0)
        cum += term
        x += 1
        if x > 100_000_000:
            raise DomainError("tail cutoff search did not terminate")
    return x + 1


def geom_pmf(params: GeomParams, x) -> float:
    x = _check_count(x)
    return params.p * (1.0 - params.p) ** x


# ---------------------------------------------------------------------------
# Vectorised kernels shared by the fitting code.  `p` and `x` broadcast
# against each other; `r` is scalar.  Values are exact to ~1e-13 relative
# inside the test domain and never produce -inf: probabilities below
# `floor` are clipped (callers count the clips as a diagnostic).


def _kernel_series_log2f1(r, p, x, max_terms):
    """log 2F1(1, r+x; 2+x; q) elementwise by direct series (q <= 0.75)."""
    q = 1.0 - p
    b = r + x
    c = 2.0 + x
    term = np.ones_like(q)
    total = np.ones_like(q)
    for n in range(max_terms):
        term = term * q * (b + n) / (c + n)
        total += term
        if n % 8 == 7 and np.all((term <= 1e-16 * total) | (total >= 1e300)):
            break
    return np.log(np.minimum(total, 1e300))


def _kernel_recurrence_pmf(r, p, x):
    """pmf elementwise by the subtractive recurrence (q > 0.75, small x)."""
    q = 1.0 - p
    lp = np.log(p)
    lq = np.log(q)
    if r == 1.0:
        cur = -p * lp / q
    else:
        cur = -p * np.expm1((r - 1.0) * lp) / (q * (r - 1.0))
    out = np.where(x == 0, cur, 0.0)
    x_top = int(np.max(x))
    lg_r = math.lgamma(r)
    for k in range(x_top):
        log_c = math.lgamma(r + k) - lg_r - math.lgamma(k + 1.0) - math.log(k + 1.0)
        cur = cur - np.exp(r * lp + k * lq + log_c)
        out = np.where(x == k + 1, cur, out)
    return out


def unb_logpmf_kernel(r: float, p, x, floor: float = 1e-300,
                      max_terms: int = 100_000):
    """Vectorised log pmf; returns (logpmf array, number of floored entries)."""
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    p, x = np.broadcast_arrays(p, x)
    q = 1.0 - p
    out = np.empty_like(p)
    floored = 0

    base = (x * np.log(q) + r * np.log(p) - np.log1p(x)
            + _sps.gammaln(r + x) - math.lgamma(r) - _sps.gammaln(x + 1.0))

    series = q <= 0.75
    if np.any(series):
        out[series] = base[series] + _kernel_series_log2f1(
            r, p[series], x[series], max_terms)
    rec = ~series
    if np.any(rec):
        pm = _kernel_recurrence_pmf(r, p[rec], x[rec])
        out[rec] = np.log(np.maximum(pm, floor))
    log_floor = math.log(floor)
    floored = int(np.count_nonzero(out < log_floor))
    out = np.maximum(out, log_floor)
    return out, floored


def unb_dlogpmf_dp_kernel(r: float, p, x, max_terms: int = 100_000):
    """Vectorised d logpmf / dp, matching the branches of the logpmf kernel."""
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    p, x = np.broadcast_arrays(p, x)
    q = 1.0 - p
    out = np.zeros_like(p)

    series = q <= 0.75
    if np.any(series):
        ps, xs = p[series], x[series]
        qs = 1.0 - ps
        b = r + xs
        c = 2.0 + xs
        t1 = np.ones_like(qs)
        s1 = np.ones_like(qs)
        t2 = np.ones_like(qs)
        s2 = np.ones_like(qs)
        for n in range(max_terms):
            t1 = t1 * qs * (b + n) / (c + n)
            s1 += t1
            t2 = t2 * qs * (2.0 + n) * (b + 1.0 + n) / ((c + 1.0 + n) * (1.0 + n))
            s2 += t2
            if n % 8 == 7 and np.all(
                ((t1 <= 1e-16 * s1) & (t2 <= 1e-16 * s2)) | (s1 >= 1e300)
            ):
                break
        ratio = s2 / np.minimum(s1, 1e300)
        out[series] = -xs / qs + r / ps - (b / c) * ratio
    rec = ~series
    if np.any(rec):
        pr, xr = p[rec], x[rec]
        qr = 1.0 - pr
        lp = np.log(pr)
        lq = np.log(qr)
        if r == 1.0:
            val = -pr * lp / qr
            der = (-lp - 1.0) / qr - pr * lp / (qr * qr)
        else:
            prm1 = np.exp((r - 1.0) * lp)
            num = pr - pr * prm1
            val = num / (qr * (r - 1.0))
            der = (1.0 - r * prm1) / (qr * (r - 1.0)) + num / (qr * qr * (r - 1.0))
        x_top = int(np.max(xr))
        lg_r = math.lgamma(r)
        res_v = np.where(xr == 0, val, 0.0)
        res_d = np.where(xr == 0, der, 0.0)
        for k in range(x_top):
            log_c = (math.lgamma(r + k) - lg_r - math.lgamma(k + 1.0)
                     - math.log(k + 1.0))
            delta = np.exp(r * lp + k * lq + log_c)
            val = val - delta
            der = der - delta * (r / pr - k / qr)
            res_v = np.where(xr == k + 1, val, res_v)
            res_d = np.where(xr == k + 1, der, res_d)
        safe = res_v > 0.0
        out[rec] = np.where(safe, res_d / np.where(safe, res_v, 1.0), 0.0)
    return out
