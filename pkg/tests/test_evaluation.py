import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rssiguard.errors import UndefinedCorrelationError, ValidationError
from rssiguard.evaluation import (
    LabeledDatasets,
    f_measure,
    loocv_detection_rate,
    paired_t_test,
    pearson,
    pearson_p_value,
)
from rssiguard.pipeline import PipelineConfig


def test_f_measure_examples():
    assert f_measure(10, 0, 0) == 1.0
    assert f_measure(5, 5, 5) == pytest.approx(0.5)
    assert f_measure(8, 2, 4) == pytest.approx(2 * 0.8 * (8 / 12) / (0.8 + 8 / 12))
    assert f_measure(0, 3, 2) == 0.0
    with pytest.raises(ValidationError):
        f_measure(0, 0, 0)
    with pytest.raises(ValidationError):
        f_measure(1, -1, 0)


@given(st.integers(1, 500), st.integers(0, 500), st.integers(0, 500))
def test_f_measure_properties(tp, fp, fn):
    f = f_measure(tp, fp, fn)
    p, r = tp / (tp + fp), tp / (tp + fn)
    assert min(p, r) - 1e-12 <= f <= max(p, r) + 1e-12
    assert f == pytest.approx(f_measure(tp, fn, fp))
    assert f == pytest.approx(2 * tp / (2 * tp + fp + fn))


def test_pearson_examples():
    x = np.arange(10.0)
    assert pearson(x, 3 * x + 1) == (1.0, 0.0)
    assert pearson(x, -x)[0] == -1.0
    with pytest.raises(UndefinedCorrelationError):
        pearson(x, np.ones(10))
    with pytest.raises(ValidationError):
        pearson([1, 2], [2, 1])


def test_pearson_reference_p_value():
    assert pearson_p_value(0.79, 12) == pytest.approx(2.2e-3, abs=2e-4)


@given(st.integers(0, 10_000), st.integers(3, 40))
def test_pearson_matches_scipy(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = 0.5 * x + rng.normal(size=n)
    r, p = pearson(x, y)
    ref = stats.pearsonr(x, y)
    assert r == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, rel=1e-8, abs=1e-14)


def test_paired_t_matches_scipy():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=10), rng.normal(size=10) + 0.3
    t, p = paired_t_test(a, b)
    ref = stats.ttest_rel(a, b)
    assert t == pytest.approx(ref.statistic) and p == pytest.approx(ref.pvalue)
    assert paired_t_test([2, 3], [1, 2]) == (math.inf, 0.0)
    with pytest.raises(UndefinedCorrelationError):
        paired_t_test([1, 2], [1, 2])


def _sets(rng, n_sets, center, size=40):
    return [rng.normal(center, 1.0, size=(size, 2)) for _ in range(n_sets)]


def test_loocv_sees_only_training_folds():
    rng = np.random.default_rng(0)
    data = LabeledDatasets(_sets(rng, 4, 0.0), {"away": _sets(rng, 2, 6.0)})
    seen = []

    def trainer(sets):
        seen.append({id(s) for s in sets})
        return lambda raw: np.ones(len(raw), dtype=bool)

    loocv_detection_rate(data, trainer=trainer)
    assert len(seen) == 4
    for f, ids in enumerate(seen):
        assert id(data.target_sets[f]) not in ids and len(ids) == 3


def test_loocv_degenerate_classifiers():
    rng = np.random.default_rng(1)
    data = LabeledDatasets(_sets(rng, 3, 0.0), {"a": _sets(rng, 2, 5.0), "b": _sets(rng, 1, -5.0)})
    always_target = loocv_detection_rate(data, trainer=lambda s: (lambda raw: np.ones(len(raw), bool)))
    assert always_target.detection_rate == 0.0 and always_target.f_measure == 0.0
    assert always_target.target_acceptance == 1.0
    never = loocv_detection_rate(data, trainer=lambda s: (lambda raw: np.zeros(len(raw), bool)))
    fold = never.folds[0]
    assert (fold.tp, fold.fp, fold.fn, fold.tn) == (120, 40, 0, 0)
    assert never.recall == 1.0 and never.precision == pytest.approx(120 / 160)
    flipped = loocv_detection_rate(data, positive="target", trainer=lambda s: (lambda raw: np.zeros(len(raw), bool)))
    assert (flipped.folds[0].tp, flipped.folds[0].fn) == (0, 40)


def test_loocv_with_pipeline_separates_clusters():
    rng = np.random.default_rng(2)
    data = LabeledDatasets(_sets(rng, 4, 0.0, 100), {"far": _sets(rng, 2, 8.0, 100)})
    report = loocv_detection_rate(data, PipelineConfig(nu=0.1))
    assert report.zone_detection["far"] > 0.95
    assert 0.8 < report.target_acceptance < 0.97
    assert report.f_measure > 0.85
    assert "all" in report.table()
    assert report.to_dict()["positive"] == "non_target"


def test_loocv_tags_failing_fold():
    rng = np.random.default_rng(3)
    bad = np.ones((40, 2))
    data = LabeledDatasets([bad, bad, rng.normal(size=(40, 2))], {"x": _sets(rng, 1, 3.0)})
    with pytest.raises(ValidationError) as info:
        loocv_detection_rate(data)
    assert info.value.fold == 2
    assert "fold 2" in str(info.value)


def test_loocv_input_checks():
    rng = np.random.default_rng(4)
    with pytest.raises(ValidationError):
        loocv_detection_rate(LabeledDatasets(_sets(rng, 1, 0.0), {}))
    with pytest.raises(ValidationError):
        LabeledDatasets([np.zeros((3, 2))], {"x": [np.zeros((3, 3))]})
    with pytest.raises(ValidationError):
        loocv_detection_rate(LabeledDatasets(_sets(rng, 2, 0.0), {}), positive="both")
