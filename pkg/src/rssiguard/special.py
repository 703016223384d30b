"""Chi-squared family distribution functions and Student-t tails.

The regularized incomplete gamma and beta functions come from
``scipy.special``; everything built on top of them (quantile polishing,
the Poisson-mixture series for the non-central chi-squared law, the
Marcum Q-function of arbitrary half-integer order) lives here.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

from .errors import ValidationError

POISSON_TAIL = 1e-13
NEGLIGIBLE = 1e-17


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def _check_dof(k) -> None:
    if np.any(np.asarray(k) <= 0):
        raise ValidationError("degrees of freedom must be positive")


def chi2_cdf(x, k):
    _check_dof(k)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return _scalar_or_array(sc.gammainc(np.asarray(k, dtype=float) / 2.0, x / 2.0))


def chi2_sf(x, k):
    _check_dof(k)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return _scalar_or_array(sc.gammaincc(np.asarray(k, dtype=float) / 2.0, x / 2.0))


def chi2_pdf(x, k):
    x = np.asarray(x, dtype=float)
    a = np.asarray(k, dtype=float) / 2.0
    with np.errstate(divide="ignore"):
        logp = sc.xlogy(a - 1.0, x / 2.0) - x / 2.0 - sc.gammaln(a) - math.log(2.0)
    return _scalar_or_array(np.where(x > 0, np.exp(logp), 0.0))


def chi2_quantile(p: float, k: int) -> float:
    """x with ``chi2_cdf(x, k) == p``, polished by Newton steps."""
    if not 0.0 < p < 1.0:
        raise ValidationError(f"probability must lie in (0, 1), got {p}")
    if int(k) != k or k < 1:
        raise ValidationError(f"degrees of freedom must be a positive integer, got {k}")
    x = 2.0 * float(sc.gammaincinv(k / 2.0, p))
    for _ in range(4):
        f = chi2_pdf(x, k)
        if not f > 0:
            break
        # Work on whichever tail is smaller to keep the residual well conditioned.
        resid = chi2_cdf(x, k) - p if p < 0.5 else (1.0 - p) - chi2_sf(x, k)
        step = resid / f
        x -= step
        if abs(step) <= 1e-15 * x:
            break
    return x


def _poisson_window(half: np.ndarray):
    """Index range [lo, hi] carrying all but POISSON_TAIL of Poisson(half)."""
    root = np.sqrt(half)
    mode = np.floor(half)
    c = 8.0
    while True:
        width = np.ceil(c * root + 2.0 * c + 10.0)
        lo = np.maximum(mode - width, 0.0)
        hi = mode + width
        # P[J < lo] = Q(lo, half) for lo > 0; P[J > hi] = P(hi + 1, half).
        below = np.where(lo > 0, sc.gammaincc(np.maximum(lo, 1.0), half), 0.0)
        above = sc.gammainc(hi + 1.0, half)
        if np.all(below + above < POISSON_TAIL):
            return lo.astype(np.int64), hi.astype(np.int64)
        c *= 1.5


def _poisson_mixture(x, k, nc, upper: bool):
    x = np.asarray(x, dtype=float)
    nc = np.asarray(nc, dtype=float)
    if np.any(x < 0) or np.any(nc < 0):
        raise ValidationError("x and non-centrality must be non-negative")
    if np.any(~np.isfinite(nc)):
        raise ValidationError("non-centrality must be finite")
    _check_dof(k)
    x, nc, k = np.broadcast_arrays(x, nc, np.asarray(k, dtype=float))
    # ||Z + mu|| >= ||mu|| - ||Z||, so P[X <= x] <= P[chi2_k >= (sqrt(nc) - sqrt(x))^2].
    # Where that bound is negligible the series (whose length grows like sqrt(nc)) is skipped.
    gap = np.sqrt(nc) - np.sqrt(x)
    settled = (gap > 0) & (sc.gammaincc(k / 2.0, np.square(np.maximum(gap, 0.0)) / 2.0) < NEGLIGIBLE)
    half = np.where(settled, 0.0, nc / 2.0)
    lo, hi = _poisson_window(half)
    total = np.zeros(x.shape)
    mass = np.zeros(x.shape)
    gamma_fn = sc.gammaincc if upper else sc.gammainc
    # Only the first weight comes from logs (its rounding error is shared by all
    # terms and removed by normalizing); the rest follow w_{j+1} = w_j * half / (j + 1).
    jf = lo.astype(float)
    w = np.exp(sc.xlogy(jf, half) - half - sc.gammaln(jf + 1.0))
    for offset in range(int(np.max(hi - lo)) + 1 if x.size else 0):
        jf = (lo + offset).astype(float)
        live = jf <= hi
        total += np.where(live, w * gamma_fn(k / 2.0 + jf, x / 2.0), 0.0)
        mass += np.where(live, w, 0.0)
        w = w * half / (jf + 1.0)
    total = np.where(settled, 1.0 if upper else 0.0, total / np.where(mass > 0, mass, 1.0))
    return _scalar_or_array(np.clip(total, 0.0, 1.0))


def noncentral_chi2_cdf(x, k, nc):
    """CDF of the non-central chi-squared law with ``k`` d.o.f.

    Evaluated as the Poisson(nc/2) mixture of central CDFs with ``k + 2j``
    degrees of freedom, truncated to a window around the Poisson mode whose
    excluded mass is below 1e-13.
    """
    return _poisson_mixture(x, k, nc, upper=False)


def noncentral_chi2_sf(x, k, nc):
    return _poisson_mixture(x, k, nc, upper=True)


def marcum_q(m, a, b):
    """Generalized Marcum Q-function ``Q_m(a, b)`` for real order ``m > 0``.

    Uses ``Q_m(a, b) = P[chi2'(2m, a^2) > b^2]``, summed directly on the
    upper tail so small probabilities keep their relative accuracy.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValidationError("Marcum Q arguments must be non-negative")
    if np.any(np.asarray(m) <= 0):
        raise ValidationError("Marcum Q order must be positive")
    return noncentral_chi2_sf(b * b, 2.0 * np.asarray(m, dtype=float), a * a)


def student_t_sf(t, df):
    """Upper tail P[T > t] of Student's t with ``df`` degrees of freedom."""
    t = np.asarray(t, dtype=float)
    if np.any(np.asarray(df) <= 0):
        raise ValidationError("degrees of freedom must be positive")
    df = np.asarray(df, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(np.isinf(t), 0.0, df / (df + t * t))
    tail = 0.5 * sc.betainc(df / 2.0, 0.5, z)
    return _scalar_or_array(np.where(t >= 0, tail, 1.0 - tail))


def student_t_two_sided(t, df):
    """Two-sided p-value ``P[|T| > |t|]``."""
    t = np.abs(np.asarray(t, dtype=float))
    return _scalar_or_array(2.0 * np.asarray(student_t_sf(t, df)))
