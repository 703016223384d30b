"""Leave-one-out evaluation, F-measure and correlation statistics."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import UndefinedCorrelationError, ValidationError
from .pipeline import PipelineConfig, fit_detector
from .special import student_t_two_sided


def f_measure(tp: int, fp: int, fn: int) -> float:
    """Harmonic mean of precision and recall; 0 when there is no true positive."""
    if min(tp, fp, fn) < 0:
        raise ValidationError("counts must be non-negative")
    if tp == 0:
        if fp + fn == 0:
            raise ValidationError("F-measure undefined: no positives predicted or present")
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def pearson(x, y) -> tuple[float, float]:
    """Sample correlation and its two-sided p-value from the t-transform."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValidationError("x and y must have equal length")
    n = len(x)
    if n < 3:
        raise ValidationError("need at least 3 pairs")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant input")
    r = max(-1.0, min(1.0, float(dx @ dy) / math.sqrt(sxx * syy)))
    return r, pearson_p_value(r, n)


def pearson_p_value(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt(n - 2) / math.sqrt(1.0 - r * r)
    return float(student_t_two_sided(t, n - 2))


def paired_t_test(a, b) -> tuple[float, float]:
    """Paired t statistic of ``a - b`` and its two-sided p-value."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    n = len(d)
    if n < 2:
        raise ValidationError("need at least 2 pairs")
    sd = float(d.std(ddof=1))
    mean = float(d.mean())
    if sd == 0:
        if mean == 0:
            raise UndefinedCorrelationError("paired differences are all zero")
        return math.copysign(math.inf, mean), 0.0
    t = mean / (sd / math.sqrt(n))
    return t, float(student_t_two_sided(t, n - 1))


@dataclass
class LabeledDatasets:
    """Raw RSSI sets for one target area plus negative sets keyed by zone."""

    target_sets: list
    negative_sets: dict

    def __post_init__(self):
        self.target_sets = [np.asarray(s, dtype=float) for s in self.target_sets]
        self.negative_sets = {z: [np.asarray(s, dtype=float) for s in v] for z, v in self.negative_sets.items()}
        ks = {s.shape[1] for s in self.target_sets}
        ks |= {s.shape[1] for v in self.negative_sets.values() for s in v}
        if len(ks) > 1:
            raise ValidationError(f"all sets must share the AP count, got {sorted(ks)}")


@dataclass
class FoldResult:
    fold: int
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f_measure: float
    detection_rate: float
    target_acceptance: float
    zone_detection: dict = field(default_factory=dict)


@dataclass
class EvalReport:
    precision: float
    recall: float
    f_measure: float
    detection_rate: float
    target_acceptance: float
    zone_detection: dict
    positive: str
    folds: list

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        lines = [f"{'fold':>5} {'precision':>10} {'recall':>8} {'F':>8} {'detect':>8} {'accept':>8}"]
        for f in self.folds:
            lines.append(
                f"{f.fold:>5} {f.precision:>10.4f} {f.recall:>8.4f} {f.f_measure:>8.4f} "
                f"{f.detection_rate:>8.4f} {f.target_acceptance:>8.4f}"
            )
        lines.append(
            f"{'all':>5} {self.precision:>10.4f} {self.recall:>8.4f} {self.f_measure:>8.4f} "
            f"{self.detection_rate:>8.4f} {self.target_acceptance:>8.4f}"
        )
        for zone, rate in self.zone_detection.items():
            lines.append(f"  detection in {zone}: {rate:.4f}")
        return "\n".join(lines)


def _scores(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return precision, recall, f_measure(tp, fp, fn) if tp + fp + fn else 0.0


def _counts(pos_target: np.ndarray, neg_target: np.ndarray, positive: str):
    """(tp, fp, fn, tn) from target flags on held-out positives and negatives."""
    accepted = int(np.count_nonzero(pos_target))
    rejected = len(pos_target) - accepted
    missed = int(np.count_nonzero(neg_target))
    caught = len(neg_target) - missed
    if positive == "non_target":
        return caught, rejected, missed, accepted
    return accepted, missed, rejected, caught


Trainer = Callable[[Sequence], Callable[[np.ndarray], np.ndarray]]


def loocv_detection_rate(
    data: LabeledDatasets,
    config: PipelineConfig = PipelineConfig(),
    positive: str = "non_target",
    trainer: Trainer | None = None,
) -> EvalReport:
    """Leave-one-set-out evaluation over the target sets.

    Each fold trains on all target sets but one (the standardizer is fitted
    on those sets only), then classifies the held-out set and every negative
    set.  ``trainer`` may replace the default pipeline; it receives the
    training sets and returns a function mapping a raw set to per-window
    target flags.
    """
    if positive not in ("non_target", "target"):
        raise ValidationError("positive must be 'non_target' or 'target'")
    s = len(data.target_sets)
    if s < 2:
        raise ValidationError("LOOCV needs at least 2 target sets")
    if trainer is None:
        def trainer(sets):
            return fit_detector(sets, config).predict_target

    folds = []
    zone_hits: dict = {z: [0, 0] for z in data.negative_sets}
    for f in range(s):
        train_sets = [d for i, d in enumerate(data.target_sets) if i != f]
        try:
            predict = trainer(train_sets)
        except (ValidationError, ArithmeticError) as exc:
            exc.fold = f
            if exc.args:
                exc.args = (f"LOOCV fold {f}: {exc.args[0]}",) + exc.args[1:]
            raise
        pos_target = np.asarray(predict(data.target_sets[f]), dtype=bool)
        neg_flags = []
        zone_detection = {}
        for zone, sets in data.negative_sets.items():
            flags = np.concatenate([np.asarray(predict(m), dtype=bool) for m in sets]) if sets else np.empty(0, bool)
            neg_flags.append(flags)
            if len(flags):
                zone_detection[zone] = float(1.0 - flags.mean())
            zone_hits[zone][0] += int(len(flags) - np.count_nonzero(flags))
            zone_hits[zone][1] += len(flags)
        neg_target = np.concatenate(neg_flags) if neg_flags else np.empty(0, bool)
        tp, fp, fn, tn = _counts(pos_target, neg_target, positive)
        precision, recall, fm = _scores(tp, fp, fn)
        folds.append(
            FoldResult(
                fold=f,
                tp=tp,
                fp=fp,
                fn=fn,
                tn=tn,
                precision=precision,
                recall=recall,
                f_measure=fm,
                detection_rate=float(1.0 - neg_target.mean()) if len(neg_target) else float("nan"),
                target_acceptance=float(pos_target.mean()) if len(pos_target) else float("nan"),
                zone_detection=zone_detection,
            )
        )

    tp = sum(f.tp for f in folds)
    fp = sum(f.fp for f in folds)
    fn = sum(f.fn for f in folds)
    tn = sum(f.tn for f in folds)
    precision, recall, fm = _scores(tp, fp, fn)
    n_neg = sum(h[1] for h in zone_hits.values())
    caught = sum(h[0] for h in zone_hits.values())
    n_pos_total = (tp + fn) if positive == "target" else (fp + tn)
    accepted = tp if positive == "target" else tn
    return EvalReport(
        precision=precision,
        recall=recall,
        f_measure=fm,
        detection_rate=caught / n_neg if n_neg else float("nan"),
        target_acceptance=accepted / n_pos_total if n_pos_total else float("nan"),
        zone_detection={z: h[0] / h[1] for z, h in zone_hits.items() if h[1]},
        positive=positive,
        folds=folds,
    )
