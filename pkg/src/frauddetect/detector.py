"""Threshold derivation and detection accounting on anomaly scores.

A score above the threshold flags a row as fraud.  Comparisons are strict on
both sides: a row scoring exactly the threshold is neither correctly normal
nor captured fraud, and every report carries explicit tie counts so that
boundary rows are visible instead of silently absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ComparabilityError, DegenerateInputError, ParameterError

THRESHOLD_METHODS = ("manual", "mean_plus_k_std", "percentile")


@dataclass(frozen=True)
class Threshold:
    """A decision boundary plus a record of how it was derived.

    Attributes:
        value: The boundary itself.
        method: One of ``THRESHOLD_METHODS``.
        parameter: The k of mean_plus_k_std, the p of percentile, or None
            for manual.
        source: Short description of the score set it was derived from.
        source_size: Number of scores in that set (0 for manual).
    """

    value: float
    method: str
    parameter: float | None = None
    source: str = "manual"
    source_size: int = 0

    def describe(self) -> str:
        if self.method == "manual":
            return f"manual({self.value!r})"
        return (
            f"{self.method}({self.parameter!r}) on {self.source} "
            f"(n={self.source_size})"
        )


def _as_scores(scores, name: str) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size and not np.isfinite(arr).all():
        raise DegenerateInputError(f"{name} contains non-finite values")
    return arr


def threshold_mean_std(scores, k: float = 1.0, source: str = "scores") -> Threshold:
    """Threshold at mean + k times the sample (n - 1) deviation of ``scores``.

    With a single score the deviation term is 0 and the threshold is the
    score itself.
    """
    arr = _as_scores(scores, "scores")
    if arr.size == 0:
        raise DegenerateInputError("cannot derive a threshold from zero scores")
    spread = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return Threshold(
        value=float(arr.mean()) + k * spread,
        method="mean_plus_k_std",
        parameter=float(k),
        source=source,
        source_size=int(arr.size),
    )


def threshold_percentile(scores, p: float, source: str = "scores") -> Threshold:
    """Linear-interpolation percentile threshold, p strictly inside (0, 100)."""
    if not 0.0 < p < 100.0:
        raise ParameterError(f"percentile must be in (0, 100), got {p}")
    arr = _as_scores(scores, "scores")
    if arr.size == 0:
        raise DegenerateInputError("cannot derive a threshold from zero scores")
    return Threshold(
        value=float(np.percentile(arr, p)),
        method="percentile",
        parameter=float(p),
        source=source,
        source_size=int(arr.size),
    )


def threshold_manual(value: float) -> Threshold:
    """Fixed threshold chosen by the caller."""
    value = float(value)
    if not np.isfinite(value):
        raise ParameterError(f"manual threshold must be finite, got {value}")
    return Threshold(value=value, method="manual")


def derive_threshold(
    scores,
    method: str = "mean_plus_k_std",
    parameter: float | None = None,
    source: str = "scores",
) -> Threshold:
    """Dispatch to one of the threshold rules by name.

    ``parameter`` defaults to 1.0 for mean_plus_k_std, is the percentile for
    percentile, and is the threshold itself for manual.
    """
    if method == "mean_plus_k_std":
        return threshold_mean_std(scores, 1.0 if parameter is None else parameter, source)
    if method == "percentile":
        if parameter is None:
            raise ParameterError("percentile threshold needs a percentile parameter")
        return threshold_percentile(scores, parameter, source)
    if method == "manual":
        if parameter is None:
            raise ParameterError("manual threshold needs a value parameter")
        return threshold_manual(parameter)
    raise ParameterError(
        f"unknown threshold method {method!r}, expected one of {THRESHOLD_METHODS}"
    )


def _threshold_value(threshold: Threshold | float) -> float:
    if isinstance(threshold, Threshold):
        return threshold.value
    return float(threshold)


def count_below(scores, threshold: Threshold | float) -> int:
    """Number of scores strictly below the threshold."""
    arr = _as_scores(scores, "scores")
    return int(np.sum(arr < _threshold_value(threshold)))


def count_above(scores, threshold: Threshold | float) -> int:
    """Number of scores strictly above the threshold."""
    arr = _as_scores(scores, "scores")
    return int(np.sum(arr > _threshold_value(threshold)))


@dataclass(frozen=True)
class EvaluationReport:
    """Detection counts of one score set pair against one threshold."""

    threshold: Threshold
    normal_total: int
    normal_below: int
    normal_ties: int
    anomaly_total: int
    anomaly_above: int
    anomaly_ties: int

    @property
    def normal_above(self) -> int:
        return self.normal_total - self.normal_below - self.normal_ties

    @property
    def anomaly_below(self) -> int:
        return self.anomaly_total - self.anomaly_above - self.anomaly_ties

    @property
    def normal_accuracy(self) -> float:
        """Fraction of normal rows strictly below the threshold."""
        return self.normal_below / self.normal_total

    @property
    def normal_mislabel_rate(self) -> float:
        return 1.0 - self.normal_accuracy

    @property
    def fraud_capture_rate(self) -> float:
        """Fraction of anomaly rows strictly above the threshold."""
        return self.anomaly_above / self.anomaly_total

    @property
    def anomaly_accuracy(self) -> float:
        return self.fraud_capture_rate


def evaluate(
    normal_scores, anomaly_scores, threshold: Threshold | float
) -> EvaluationReport:
    """Count how the two score sets fall against ``threshold``.

    Args:
        normal_scores: Scores of rows whose true class is normal.
        anomaly_scores: Scores of rows whose true class is fraud.
        threshold: Decision boundary.

    Returns:
        EvaluationReport with per-class counts and tie counts.

    Raises:
        DegenerateInputError: If either score set is empty.
    """
    normal = _as_scores(normal_scores, "normal_scores")
    anomaly = _as_scores(anomaly_scores, "anomaly_scores")
    if normal.size == 0 or anomaly.size == 0:
        raise DegenerateInputError(
            f"evaluation needs both classes, got {normal.size} normal and "
            f"{anomaly.size} anomaly scores"
        )
    if not isinstance(threshold, Threshold):
        threshold = threshold_manual(threshold)
    value = threshold.value
    return EvaluationReport(
        threshold=threshold,
        normal_total=int(normal.size),
        normal_below=int(np.sum(normal < value)),
        normal_ties=int(np.sum(normal == value)),
        anomaly_total=int(anomaly.size),
        anomaly_above=int(np.sum(anomaly > value)),
        anomaly_ties=int(np.sum(anomaly == value)),
    )


@dataclass(frozen=True)
class ComparisonSummary:
    """Side-by-side rates of two reports over the same evaluation rows.

    Deltas are first minus second.  Descriptive only: no claim of
    significance is attached.
    """

    first_label: str
    second_label: str
    first: EvaluationReport
    second: EvaluationReport

    @property
    def delta_normal_accuracy(self) -> float:
        return self.first.normal_accuracy - self.second.normal_accuracy

    @property
    def delta_fraud_capture_rate(self) -> float:
        return self.first.fraud_capture_rate - self.second.fraud_capture_rate

    @property
    def delta_normal_mislabel_rate(self) -> float:
        return self.first.normal_mislabel_rate - self.second.normal_mislabel_rate


def compare(
    first: EvaluationReport,
    second: EvaluationReport,
    first_label: str = "first",
    second_label: str = "second",
) -> ComparisonSummary:
    """Compare two reports that scored the same rows.

    Raises:
        ComparabilityError: If the class totals differ, meaning the reports
            do not describe the same evaluation set.
    """
    if (
        first.normal_total != second.normal_total
        or first.anomaly_total != second.anomaly_total
    ):
        raise ComparabilityError(
            f"reports cover different sets: {first.normal_total}/"
            f"{first.anomaly_total} vs {second.normal_total}/{second.anomaly_total}"
        )
    return ComparisonSummary(
        first_label=first_label, second_label=second_label, first=first, second=second
    )


def report_key_values(report: EvaluationReport) -> list[tuple[str, str]]:
    """Machine-readable (key, value) pairs of every metric in the report."""
    t = report.threshold
    pairs: list[tuple[str, str]] = [
        ("threshold", repr(t.value)),
        ("threshold_method", t.method),
    ]
    if t.parameter is not None:
        pairs.append(("threshold_parameter", repr(t.parameter)))
    pairs.extend(
        [
            ("threshold_source", t.source),
            ("threshold_source_size", str(t.source_size)),
            ("normal_total", str(report.normal_total)),
            ("normal_below", str(report.normal_below)),
            ("normal_ties", str(report.normal_ties)),
            ("normal_above", str(report.normal_above)),
            ("anomaly_total", str(report.anomaly_total)),
            ("anomaly_above", str(report.anomaly_above)),
            ("anomaly_ties", str(report.anomaly_ties)),
            ("anomaly_below", str(report.anomaly_below)),
            ("normal_accuracy", repr(report.normal_accuracy)),
            ("normal_mislabel_rate", repr(report.normal_mislabel_rate)),
            ("fraud_capture_rate", repr(report.fraud_capture_rate)),
        ]
    )
    return pairs


def format_report(report: EvaluationReport, title: str = "evaluation") -> str:
    """Plain-text table plus a key=value block, one metric per line."""
    lines = [
        title,
        "-" * len(title),
        f"threshold {report.threshold.value:.6g} via {report.threshold.describe()}",
        "",
        f"{'class':<8}{'total':>8}{'below':>8}{'ties':>6}{'above':>8}{'rate':>12}",
        (
            f"{'normal':<8}{report.normal_total:>8}{report.normal_below:>8}"
            f"{report.normal_ties:>6}{report.normal_above:>8}"
            f"{report.normal_accuracy:>12.6f}"
        ),
        (
            f"{'fraud':<8}{report.anomaly_total:>8}{report.anomaly_below:>8}"
            f"{report.anomaly_ties:>6}{report.anomaly_above:>8}"
            f"{report.fraud_capture_rate:>12.6f}"
        ),
        "",
    ]
    lines.extend(f"{key}={value}" for key, value in report_key_values(report))
    return "\n".join(lines) + "\n"


def format_comparison(summary: ComparisonSummary) -> str:
    """Both reports' metrics side by side, then the deltas."""
    lines = [
        f"comparison: {summary.first_label} vs {summary.second_label}",
        "",
    ]
    for label, report in (
        (summary.first_label, summary.first),
        (summary.second_label, summary.second),
    ):
        lines.extend(f"{label}_{key}={value}" for key, value in report_key_values(report))
        lines.append("")
    lines.extend(
        [
            f"delta_normal_accuracy={summary.delta_normal_accuracy!r}",
            f"delta_normal_mislabel_rate={summary.delta_normal_mislabel_rate!r}",
            f"delta_fraud_capture_rate={summary.delta_fraud_capture_rate!r}",
        ]
    )
    return "\n".join(lines) + "\n"
