"""Closed-form detection rates for the standardized-Gaussian approximation.

With Gaussian RSSI noise of standard deviation ``sigma`` and a target area
reduced to its centroid ``t_in``, the standardized feature vector of an
object at ``t`` is a unit-variance Gaussian shifted by
``10*eta*lg(||t_in - a_i|| / ||t - a_i||) / sigma`` per AP.  A one-class
SVM trained at ``t_in`` behaves like the norm test ``||r||^2 <= delta``
with ``delta`` the ``1 - nu`` chi-squared quantile, so the probability of
flagging ``t`` as outside is a Marcum Q-function of order ``k/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularityError, ValidationError
from .geometry import Polygon
from .ocsvm import Verdict
from .propagation import Point, as_point
from .seeding import substream
from .special import chi2_quantile, marcum_q


def _ap_array(aps) -> np.ndarray:
    aps = np.asarray(aps, dtype=float).reshape(-1, 2)
    if len(aps) == 0:
        raise ValidationError("at least one AP is required")
    return aps


def _log_ratio_sq(t, t_in, aps: np.ndarray, allow_singular: bool = False) -> np.ndarray:
    """Sum over APs of ``lg(||t_in - a|| / ||t - a||)**2`` for each row of ``t``."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    d_in = np.hypot(aps[:, 0] - t_in[0], aps[:, 1] - t_in[1])
    if np.any(d_in == 0):
        raise SingularityError("target centroid coincides with an AP")
    d_t = np.hypot(aps[None, :, 0] - t[:, 0:1], aps[None, :, 1] - t[:, 1:2])
    if np.any(d_t == 0) and not allow_singular:
        raise SingularityError("probe position coincides with an AP")
    with np.errstate(divide="ignore"):
        return np.sum(np.log10(d_in / d_t) ** 2, axis=1)


def lambda_t(t, t_in, aps: Sequence, eta: float) -> float:
    """Non-centrality in dB^2 separating ``t`` from ``t_in`` across all APs."""
    aps = _ap_array(aps)
    return float((10.0 * eta) ** 2 * _log_ratio_sq(t, as_point(t_in), aps)[0])


@dataclass(frozen=True)
class RateQuery:
    t: Point
    t_in: Point
    aps: tuple
    eta: float = 2.0
    sigma: float = 5.57
    nu: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "t", as_point(self.t))
        object.__setattr__(self, "t_in", as_point(self.t_in))
        object.__setattr__(self, "aps", tuple(as_point(a) for a in self.aps))
        if not self.aps:
            raise ValidationError("at least one AP is required")
        if not self.sigma > 0:
            raise ValidationError("sigma must be > 0")
        if not 0 < self.nu < 1:
            raise ValidationError("nu must lie in (0, 1)")
        if not self.eta > 0:
            raise ValidationError("eta must be > 0")

    @property
    def k(self) -> int:
        return len(self.aps)


@dataclass(frozen=True)
class RateResult:
    lambda_t: float
    delta: float
    rate: float


def threshold(nu: float, k: int) -> float:
    """Squared-norm acceptance threshold ``delta`` for training-error fraction ``nu``."""
    if not 0 < nu < 1:
        raise ValidationError("nu must lie in (0, 1)")
    return chi2_quantile(1.0 - nu, k)


def detection_rate_point(q: RateQuery) -> RateResult:
    lam = lambda_t(q.t, q.t_in, q.aps, q.eta)
    delta = threshold(q.nu, q.k)
    rate = marcum_q(q.k / 2.0, np.sqrt(lam) / q.sigma, np.sqrt(delta))
    return RateResult(lam, delta, float(rate))


def detection_rates(points, t_in, aps, eta: float, sigma: float, nu: float) -> np.ndarray:
    """Vectorized point detection rate; probes on an AP get rate 1."""
    aps = _ap_array(aps)
    if not sigma > 0:
        raise ValidationError("sigma must be > 0")
    lam = (10.0 * eta) ** 2 * _log_ratio_sq(points, as_point(t_in), aps, allow_singular=True)
    finite = np.isfinite(lam)
    out = np.ones(len(lam))
    delta = threshold(nu, len(aps))
    if np.any(finite):
        out[finite] = marcum_q(len(aps) / 2.0, np.sqrt(lam[finite]) / sigma, np.sqrt(delta))
    return out


@dataclass(frozen=True)
class DomainRate:
    rate: float
    standard_error: float
    samples: int


def detection_rate_domain(
    domain,
    t_in,
    aps,
    eta: float,
    sigma: float,
    nu: float,
    samples: int,
    seed,
    batch: int = 8192,
) -> DomainRate:
    """Average point detection rate over points drawn uniformly from ``domain``.

    Points are drawn in batches of ``batch``; batch ``b`` uses the sub-stream
    keyed ``(b,)`` of ``seed``.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    poly = domain if isinstance(domain, Polygon) else Polygon(domain)
    rates = []
    remaining = samples
    b = 0
    while remaining > 0:
        n = min(batch, remaining)
        pts = poly.sample(n, substream(seed, b))
        rates.append(detection_rates(pts, t_in, aps, eta, sigma, nu))
        remaining -= n
        b += 1
    r = np.concatenate(rates)
    se = float(r.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("nan")
    return DomainRate(float(r.mean()), se, samples)


def surrogate_classify(r_hat, delta: float) -> Verdict:
    if not delta > 0:
        raise ValidationError("delta must be > 0")
    r_hat = np.asarray(r_hat, dtype=float)
    return Verdict.TARGET if float(r_hat @ r_hat) <= delta else Verdict.NON_TARGET


def surrogate_predict_target(features, delta: float) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    return np.sum(features * features, axis=1) <= delta
