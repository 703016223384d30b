"""Feature pipeline: window averaging and standardization."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def _as_matrix(raw, name: str = "data") -> np.ndarray:
    m = np.asarray(raw, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D matrix")
    bad = ~np.all(np.isfinite(m), axis=1)
    if np.any(bad):
        raise ValidationError(f"{name} has missing or non-finite entries in row {int(np.flatnonzero(bad)[0])}")
    return m


def average_windows(raw, n: int) -> np.ndarray:
    """Average non-overlapping blocks of ``n`` consecutive rows.

    A trailing remainder shorter than ``n`` is dropped.
    """
    m = _as_matrix(raw, "raw")
    if n < 1:
        raise ValidationError("window size N must be >= 1")
    if len(m) < n:
        raise ValidationError(f"need at least N={n} rows, got {len(m)}")
    if n == 1:
        return m.copy()
    full = (len(m) // n) * n
    return m[:full].reshape(-1, n, m.shape[1]).mean(axis=1)


@dataclass(frozen=True)
class StandardizerStats:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        std = np.asarray(self.std, dtype=float).ravel()
        if mean.shape != std.shape:
            raise ValidationError("mean and std must have the same length")
        if np.any(~(std > 0)):
            raise ValidationError("every feature std must be > 0")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def k(self) -> int:
        return len(self.mean)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "StandardizerStats":
        try:
            return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["std"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed standardizer: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def fit_standardizer(train) -> StandardizerStats:
    """Per-column mean and population standard deviation."""
    m = _as_matrix(train, "train")
    if len(m) < 2:
        raise ValidationError("need at least 2 training rows")
    std = m.std(axis=0)
    zero = np.flatnonzero(~(std > 0))
    if len(zero):
        raise ValidationError(f"AP column ap_{zero[0] + 1} has zero variance")
    return StandardizerStats(m.mean(axis=0), std)


def apply_standardizer(stats: StandardizerStats, data) -> np.ndarray:
    m = _as_matrix(data)
    if m.shape[1] != stats.k:
        raise ValidationError(f"expected {stats.k} feature columns, got {m.shape[1]}")
    return (m - stats.mean) / stats.std
