"""RSSI channel models.

Two models are provided:

* ``FRIIS_GAUSSIAN``: log-distance path loss ``P_T - 10*eta*lg(d)`` plus
  zero-mean Gaussian noise in dB.
* ``NONSINGULAR_RAYLEIGH``: ``P_T - 10*lg(eps + d**eta)`` plus Rayleigh
  fading expressed in dB.  The power gain of a Rayleigh channel is
  exponential, so the fading term is ``10*lg(E)`` with ``E ~ Exp(rate)``;
  its density in dB is :func:`fading_pdf`.  With ``rate = 0.561`` the dB
  fading has (almost exactly) zero mean and a standard deviation of about
  5.57 dB.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import SingularityError, ValidationError
from .seeding import substream

LN10_OVER_10 = math.log(10.0) / 10.0


class Point(NamedTuple):
    x: float
    y: float


def as_point(value) -> Point:
    x, y = (float(v) for v in value)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"non-finite coordinates {value!r}")
    return Point(x, y)


def distance(a, b) -> float:
    return math.hypot(float(a[0]) - float(b[0]), float(a[1]) - float(b[1]))


class Variant(str, enum.Enum):
    FRIIS_GAUSSIAN = "friis"
    NONSINGULAR_RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class PropagationParams:
    variant: Variant = Variant.FRIIS_GAUSSIAN
    transmit_power: float = -30.0
    path_loss_exponent: float = 2.0
    sigma: float = 5.57
    epsilon: float = 0.1
    fade_rate: float = 0.561

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.path_loss_exponent > 0:
            raise ValidationError("path_loss_exponent must be > 0")
        if not self.sigma >= 0:
            raise ValidationError("sigma must be >= 0")
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be > 0")
        if not self.fade_rate > 0:
            raise ValidationError("fade_rate must be > 0")

    @classmethod
    def friis(cls, sigma: float = 5.57, transmit_power: float = -30.0, path_loss_exponent: float = 2.0):
        return cls(Variant.FRIIS_GAUSSIAN, transmit_power, path_loss_exponent, sigma=sigma)

    @classmethod
    def rayleigh(
        cls,
        epsilon: float = 0.1,
        fade_rate: float = 0.561,
        transmit_power: float = -30.0,
        path_loss_exponent: float = 2.0,
    ):
        return cls(
            Variant.NONSINGULAR_RAYLEIGH,
            transmit_power,
            path_loss_exponent,
            epsilon=epsilon,
            fade_rate=fade_rate,
        )


def _mean_from_distance(d: np.ndarray, p: PropagationParams) -> np.ndarray:
    if p.variant is Variant.FRIIS_GAUSSIAN:
        if np.any(d <= 0):
            raise SingularityError("Friis path loss is singular at zero distance")
        return p.transmit_power - 10.0 * p.path_loss_exponent * np.log10(d)
    return p.transmit_power - 10.0 * np.log10(p.epsilon + d**p.path_loss_exponent)


def mean_rssi(t, a, p: PropagationParams) -> float:
    """Deterministic part of the RSSI (dBm) received at ``a`` from ``t``."""
    return float(_mean_from_distance(np.asarray(distance(t, a)), p))


def mean_rssi_vector(t, aps: Sequence, p: PropagationParams) -> np.ndarray:
    aps = np.asarray(aps, dtype=float).reshape(-1, 2)
    d = np.hypot(aps[:, 0] - float(t[0]), aps[:, 1] - float(t[1]))
    return _mean_from_distance(d, p)


def fading_pdf(x, fade_rate: float = 0.561):
    """Density of ``10*lg(E)`` for ``E ~ Exp(fade_rate)``; ``x`` in dB."""
    if not fade_rate > 0:
        raise ValidationError("fade_rate must be > 0")
    # log u = ln(rate) + x ln10/10; working in logs avoids inf * 0 far in the tail
    log_u = math.log(fade_rate) + np.asarray(x, dtype=float) * LN10_OVER_10
    with np.errstate(over="ignore"):
        out = np.exp(log_u - np.exp(log_u)) * LN10_OVER_10
    return float(out) if np.ndim(out) == 0 else out


def sample_fading(rng: np.random.Generator, fade_rate: float = 0.561, size=None):
    # 10**(X/10) is exponential with the given rate, so invert directly.
    return 10.0 * np.log10(rng.exponential(1.0 / fade_rate, size=size))


def sample_noise(rng: np.random.Generator, p: PropagationParams, size=None):
    if p.variant is Variant.FRIIS_GAUSSIAN:
        if p.sigma == 0:
            return np.zeros(size) if size is not None else 0.0
        return rng.normal(0.0, p.sigma, size=size)
    return sample_fading(rng, p.fade_rate, size=size)


def sample_rssi(t, a, p: PropagationParams, rng: np.random.Generator) -> float:
    return mean_rssi(t, a, p) + float(sample_noise(rng, p))


@dataclass
class RssiDataset:
    """RSSI observations: one row per beacon, one column per AP."""

    positions: np.ndarray
    rssi: np.ndarray
    aps: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.rssi = np.asarray(self.rssi, dtype=float)
        if self.rssi.ndim != 2:
            raise ValidationError("rssi must be a 2-D matrix")
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        if len(self.positions) != len(self.rssi):
            raise ValidationError("positions and rssi must have the same number of rows")
        if self.aps is not None:
            self.aps = np.asarray(self.aps, dtype=float).reshape(-1, 2)
            if len(self.aps) != self.rssi.shape[1]:
                raise ValidationError("one AP position per RSSI column expected")

    def __len__(self) -> int:
        return len(self.rssi)

    @property
    def k(self) -> int:
        return self.rssi.shape[1]

    def runs(self) -> Iterator[np.ndarray]:
        """Row blocks of consecutive beacons sharing the same position."""
        if len(self) == 0:
            return
        change = np.any(np.diff(self.positions, axis=0) != 0, axis=1)
        bounds = np.concatenate(([0], np.flatnonzero(change) + 1, [len(self)]))
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            yield self.rssi[lo:hi]

    def at(self, point) -> np.ndarray:
        mask = np.all(self.positions == np.asarray(point, dtype=float), axis=1)
        return self.rssi[mask]

    def to_csv(self, path, decimals: int = 6) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["pos_x", "pos_y"] + [f"ap_{i + 1}" for i in range(self.k)])
            fmt = f"{{:.{decimals}f}}"
            for pos, row in zip(self.positions, self.rssi):
                writer.writerow([fmt.format(v) for v in (*pos, *row)])

    @classmethod
    def from_csv(cls, path) -> "RssiDataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            return cls(np.empty((0, 2)), np.empty((0, 0)))
        header = [h.strip() for h in rows[0]]
        if header[:2] != ["pos_x", "pos_y"] or len(header) < 3:
            raise ValidationError(f"{path}: expected header pos_x,pos_y,ap_1,...,ap_k")
        k = len(header) - 2
        body = [r for r in rows[1:] if any(c.strip() for c in r)]
        values = np.empty((len(body), k + 2))
        for n, row in enumerate(body, start=2):
            if len(row) != k + 2:
                raise ValidationError(f"{path}:{n}: expected {k + 2} fields, got {len(row)}")
            try:
                values[n - 2] = [float(c) if c.strip() else math.nan for c in row]
            except ValueError as exc:
                raise ValidationError(f"{path}:{n}: {exc}") from None
        return cls(values[:, :2], values[:, 2:])


def generate_dataset(
    positions: Sequence,
    aps: Sequence,
    p: PropagationParams,
    trials: int,
    seed,
) -> RssiDataset:
    """Simulate ``trials`` beacons at every position.

    Rows are grouped by position in input order.  Trial ``j`` at position
    ``i`` draws its noise from the sub-stream keyed ``(i, j)`` of ``seed``.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    aps = np.asarray(aps, dtype=float).reshape(-1, 2)
    if len(aps) == 0:
        raise ValidationError("at least one AP is required")
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    k = len(aps)
    rssi = np.empty((len(positions) * trials, k))
    for i, t in enumerate(positions):
        mean = mean_rssi_vector(t, aps, p)
        block = rssi[i * trials:(i + 1) * trials]
        for j in range(trials):
            block[j] = mean + sample_noise(substream(seed, i, j), p, size=k)
    return RssiDataset(np.repeat(positions, trials, axis=0), rssi, aps)
