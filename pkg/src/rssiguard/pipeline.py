"""Training and detection pipeline: average, standardize, classify."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import surrogate_predict_target, threshold
from .errors import ValidationError
from .features import StandardizerStats, apply_standardizer, average_windows, fit_standardizer
from .ocsvm import OcSvmConfig, OcSvmModel, train


@dataclass(frozen=True)
class PipelineConfig:
    nu: float = 0.1
    gamma: float | str = "auto"
    n_avg: int = 1
    classifier: str = "ocsvm"  # or "surrogate"
    kkt_tolerance: float = 1e-6

    def __post_init__(self):
        if self.classifier not in ("ocsvm", "surrogate"):
            raise ValidationError(f"unknown classifier {self.classifier!r}")
        if self.n_avg < 1:
            raise ValidationError("n_avg must be >= 1")

    @property
    def svm(self) -> OcSvmConfig:
        return OcSvmConfig(nu=self.nu, gamma=self.gamma, kkt_tolerance=self.kkt_tolerance)


def average_sets(sets: Sequence, n_avg: int) -> np.ndarray:
    """Window-average each set separately so windows never straddle two sets."""
    blocks = [average_windows(s, n_avg) for s in sets]
    if not blocks:
        raise ValidationError("no data sets given")
    return np.vstack(blocks)


@dataclass(frozen=True)
class Detector:
    stats: StandardizerStats
    n_avg: int
    model: OcSvmModel | None = None
    delta: float | None = None

    def features(self, raw) -> np.ndarray:
        return apply_standardizer(self.stats, average_windows(raw, self.n_avg))

    def predict_target_features(self, features) -> np.ndarray:
        if self.model is not None:
            return self.model.predict_target(features)
        return surrogate_predict_target(features, self.delta)

    def predict_target(self, raw) -> np.ndarray:
        """One boolean per ``n_avg`` window of ``raw``; True means target."""
        return self.predict_target_features(self.features(raw))


def fit_detector(train_sets: Sequence, config: PipelineConfig) -> Detector:
    averaged = average_sets(train_sets, config.n_avg)
    stats = fit_standardizer(averaged)
    if config.classifier == "surrogate":
        return Detector(stats, config.n_avg, delta=threshold(config.nu, stats.k))
    model = train(apply_standardizer(stats, averaged), config.svm, standardizer=stats)
    return Detector(stats, config.n_avg, model=model)
