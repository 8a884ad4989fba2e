"""Threshold rules, strict counting and the evaluation/compare accounting."""

import numpy as np
import pytest

from frauddetect.detector import (
    EvaluationReport,
    Threshold,
    compare,
    count_above,
    count_below,
    derive_threshold,
    evaluate,
    format_comparison,
    format_report,
    report_key_values,
    threshold_manual,
    threshold_mean_std,
    threshold_percentile,
)
from frauddetect.errors import (
    ComparabilityError,
    DegenerateInputError,
    ParameterError,
)


def test_mean_std_threshold_trivials():
    t = threshold_mean_std([1.0, 1.0, 1.0, 1.0])
    assert t.value == 1.0  # zero spread
    assert t.method == "mean_plus_k_std"
    assert t.parameter == 1.0
    assert t.source_size == 4
    assert threshold_mean_std([5.0]).value == 5.0  # single score, spread 0


def test_mean_std_threshold_uses_sample_deviation():
    scores = np.array([0.0, 2.0, 4.0, 6.0])
    t = threshold_mean_std(scores, k=2.0)
    assert t.value == pytest.approx(3.0 + 2.0 * np.std(scores, ddof=1))


def test_percentile_threshold_interpolates():
    assert threshold_percentile([0.0, 10.0], 50.0).value == 5.0
    assert threshold_percentile([1.0, 2.0, 3.0, 4.0], 25.0).value == 1.75
    with pytest.raises(ParameterError):
        threshold_percentile([1.0], 0.0)
    with pytest.raises(ParameterError):
        threshold_percentile([1.0], 100.0)


def test_manual_threshold_must_be_finite():
    assert threshold_manual(0.25).value == 0.25
    with pytest.raises(ParameterError):
        threshold_manual(float("nan"))
    with pytest.raises(ParameterError):
        threshold_manual(float("inf"))


def test_empty_scores_cannot_derive_thresholds():
    with pytest.raises(DegenerateInputError):
        threshold_mean_std([])
    with pytest.raises(DegenerateInputError):
        threshold_percentile([], 50.0)


def test_derive_threshold_dispatch():
    scores = [1.0, 2.0, 3.0]
    assert derive_threshold(scores).method == "mean_plus_k_std"
    assert derive_threshold(scores).parameter == 1.0  # default k
    assert derive_threshold(scores, "mean_plus_k_std", 2.5).parameter == 2.5
    assert derive_threshold(scores, "percentile", 50.0).value == 2.0
    assert derive_threshold(scores, "manual", 9.0).value == 9.0
    with pytest.raises(ParameterError):
        derive_threshold(scores, "percentile")
    with pytest.raises(ParameterError):
        derive_threshold(scores, "manual")
    with pytest.raises(ParameterError):
        derive_threshold(scores, "otsu")


def test_counting_is_strict_on_both_sides():
    scores = [1.0, 2.0, 2.0, 3.0]
    assert count_below(scores, 2.0) == 1
    assert count_above(scores, 2.0) == 1
    assert count_below(scores, threshold_manual(2.0)) == 1


def test_evaluate_records_ties_separately():
    report = evaluate([1.0, 2.0, 3.0], [2.0, 4.0], 2.0)
    assert report.normal_total == 3
    assert report.normal_below == 1
    assert report.normal_ties == 1
    assert report.normal_above == 1
    assert report.anomaly_total == 2
    assert report.anomaly_above == 1
    assert report.anomaly_ties == 1
    assert report.anomaly_below == 0
    assert report.threshold.method == "manual"  # bare float was wrapped


def test_evaluate_requires_both_classes():
    with pytest.raises(DegenerateInputError):
        evaluate([], [1.0], 0.5)
    with pytest.raises(DegenerateInputError):
        evaluate([1.0], [], 0.5)


def test_report_rates_match_the_published_accounting():
    """The 2454-normal test set: 3 mislabels and exactly half captured."""
    report = EvaluationReport(
        threshold=threshold_manual(1.0),
        normal_total=2454,
        normal_below=2451,
        normal_ties=0,
        anomaly_total=2135,
        anomaly_above=1068,
        anomaly_ties=0,
    )
    assert report.normal_above == 3
    assert report.normal_accuracy == 2451 / 2454
    assert report.normal_mislabel_rate == pytest.approx(3 / 2454, abs=1e-12)
    assert report.normal_mislabel_rate < 0.0013
    assert report.fraud_capture_rate == 1068 / 2135
    assert report.fraud_capture_rate == pytest.approx(0.5002, abs=1e-4)
    assert report.anomaly_accuracy == report.fraud_capture_rate


def test_threshold_sweep_rates_are_monotone():
    rng = np.random.default_rng(60)
    normal = rng.gamma(2.0, 1.0, size=400)
    fraud = rng.gamma(2.0, 1.0, size=150) + 2.0
    lo = min(normal.min(), fraud.min())
    hi = max(normal.max(), fraud.max())
    captures, mislabels = [], []
    for t in np.linspace(lo, hi, 20):
        report = evaluate(normal, fraud, float(t))
        captures.append(report.fraud_capture_rate)
        mislabels.append(report.normal_mislabel_rate)
    assert all(a >= b for a, b in zip(captures, captures[1:]))
    assert all(a >= b for a, b in zip(mislabels, mislabels[1:]))


def test_compare_requires_matching_totals():
    a = evaluate([1.0, 2.0], [3.0], 1.5)
    b = evaluate([1.0, 2.0, 3.0], [3.0], 1.5)
    with pytest.raises(ComparabilityError):
        compare(a, b)
    summary = compare(a, evaluate([9.0, 9.5], [0.1], 1.5), "ae", "pca")
    assert summary.first_label == "ae"
    assert summary.delta_normal_accuracy == pytest.approx(0.5)
    assert summary.delta_normal_mislabel_rate == pytest.approx(-0.5)
    assert summary.delta_fraud_capture_rate == pytest.approx(1.0)


def test_describe_and_key_values():
    t = threshold_mean_std([1.0, 3.0], source="train-normal scores")
    assert "mean_plus_k_std(1.0)" in t.describe()
    assert "train-normal scores" in t.describe()
    assert threshold_manual(2.0).describe() == "manual(2.0)"
    report = evaluate([1.0, 2.0], [3.0], t)
    keys = dict(report_key_values(report))
    assert keys["threshold_method"] == "mean_plus_k_std"
    assert keys["normal_total"] == "2"
    assert float(keys["fraud_capture_rate"]) == report.fraud_capture_rate


def test_report_rendering():
    report = evaluate([0.1, 0.2, 0.9], [0.8, 1.5], 0.5)
    text = format_report(report, "test partition")
    assert text.startswith("test partition\n--------------")
    assert "normal" in text and "fraud" in text
    assert "normal_accuracy=" in text
    assert f"threshold={report.threshold.value!r}" in text

    summary = compare(report, report, "ae", "pca")
    rendered = format_comparison(summary)
    assert "comparison: ae vs pca" in rendered
    assert "ae_normal_accuracy=" in rendered
    assert "pca_fraud_capture_rate=" in rendered
    assert "delta_normal_accuracy=0.0" in rendered


def test_threshold_is_immutable_metadata():
    t = Threshold(value=1.0, method="manual")
    with pytest.raises(AttributeError):
        t.value = 2.0
