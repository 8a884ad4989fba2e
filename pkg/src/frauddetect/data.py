"""Labeled transaction datasets: container, CSV round trip, synthetic generator.

The CSV layout follows the common card-fraud format: an optional ``Time``
column first, feature columns in order, and a ``Class`` column (0 = normal,
1 = fraud) last.  Floats are written with ``repr`` so a save/load round trip
reproduces every value bit for bit.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    FormatError,
    LabelDomainError,
    ParameterError,
    SchemaError,
    ShapeError,
)
from .linalg import as_matrix


def write_text_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and rename, never partially."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class LabeledDataset:
    """Feature matrix plus per-row class labels and an optional time column.

    Attributes:
        features: Matrix of shape (n_rows, n_features), float64, finite.
        labels: Integer vector of shape (n_rows,) with values in {0, 1},
            or None for unlabeled scoring data.
        time: Optional float vector of shape (n_rows,).
        feature_names: One name per feature column.
    """

    features: np.ndarray
    labels: np.ndarray | None = None
    time: np.ndarray | None = None
    feature_names: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.features = as_matrix(self.features, "features")
        n, d = self.features.shape
        if not self.feature_names:
            self.feature_names = tuple(f"F{j}" for j in range(d))
        self.feature_names = tuple(str(name) for name in self.feature_names)
        if len(self.feature_names) != d:
            raise SchemaError(
                f"{len(self.feature_names)} feature names for {d} columns"
            )
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (n,):
                raise ShapeError(
                    f"labels shape {self.labels.shape} does not match {n} rows"
                )
            bad = ~np.isin(self.labels, (0, 1))
            if bad.any():
                first = int(np.argmax(bad))
                raise LabelDomainError(
                    f"label {self.labels[first]} at row {first} is not 0 or 1"
                )
        if self.time is not None:
            self.time = np.asarray(self.time, dtype=np.float64)
            if self.time.shape != (n,):
                raise ShapeError(
                    f"time shape {self.time.shape} does not match {n} rows"
                )

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def select(self, indices) -> "LabeledDataset":
        """Dataset restricted to ``indices`` (any numpy fancy index), copied."""
        idx = np.asarray(indices)
        return LabeledDataset(
            features=self.features[idx].copy(),
            labels=None if self.labels is None else self.labels[idx].copy(),
            time=None if self.time is None else self.time[idx].copy(),
            feature_names=self.feature_names,
        )


def concat_datasets(a: LabeledDataset, b: LabeledDataset) -> LabeledDataset:
    """Row-wise concatenation of two datasets with identical schemas.

    Raises:
        SchemaError: If feature names differ, or one side has labels or a
            time column and the other does not.
    """
    if a.feature_names != b.feature_names:
        raise SchemaError(
            f"feature names differ: {a.feature_names} vs {b.feature_names}"
        )
    if (a.labels is None) != (b.labels is None):
        raise SchemaError("cannot concatenate labeled with unlabeled data")
    if (a.time is None) != (b.time is None):
        raise SchemaError("cannot concatenate datasets with and without time")
    return LabeledDataset(
        features=np.concatenate([a.features, b.features], axis=0),
        labels=None if a.labels is None else np.concatenate([a.labels, b.labels]),
        time=None if a.time is None else np.concatenate([a.time, b.time]),
        feature_names=a.feature_names,
    )


def _parse_float(cell: str, line: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise FormatError(
            f"line {line}, column {column!r}: cannot parse {cell!r} as a number"
        ) from None
    return value


def load_csv(
    path: str,
    has_header: bool = True,
    class_column: str | None = "Class",
    time_column: str | None = "Time",
) -> LabeledDataset:
    """Load a dataset from CSV.

    With a header row, the class and time columns are located by name; the
    remaining columns become features in file order.  Without a header the
    columns get synthetic names F0..F(d-1); the last column is taken as the
    class when ``class_column`` is set and the first as time when
    ``time_column`` is set.  Pass None to declare a column absent.

    Args:
        path: CSV file path.
        has_header: Whether the first line holds column names.
        class_column: Name of the label column, or None for unlabeled data.
        time_column: Name of the time column, or None if there is none.

    Returns:
        The parsed dataset.

    Raises:
        SchemaError: If a requested class column is missing.
        FormatError: On ragged rows or unparseable cells, with the file line.
        LabelDomainError: If a class value is not 0 or 1.
        DegenerateInputError: If the file is empty.
    """
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise DegenerateInputError(f"{path} is empty")

    if has_header:
        header = [name.strip() for name in rows[0]]
        body = rows[1:]
        first_line = 2
        if class_column is not None and class_column not in header:
            raise SchemaError(
                f"{path} has no {class_column!r} column (found {header})"
            )
        class_idx = header.index(class_column) if class_column is not None else None
        time_idx = (
            header.index(time_column)
            if time_column is not None and time_column in header
            else None
        )
    else:
        header = None
        body = rows
        first_line = 1
        width = len(rows[0])
        class_idx = width - 1 if class_column is not None else None
        time_idx = 0 if time_column is not None else None
        if class_idx is not None and time_idx == class_idx:
            raise SchemaError(f"{path} rows are too narrow for time and class")

    width = len(header) if header is not None else len(body[0]) if body else 0
    feature_idx = [
        j for j in range(width) if j not in (class_idx, time_idx)
    ]
    if header is not None:
        names = tuple(header[j] for j in feature_idx)
    else:
        names = tuple(f"F{j}" for j in range(len(feature_idx)))

    features = np.zeros((len(body), len(feature_idx)))
    labels = np.zeros(len(body), dtype=np.int64) if class_idx is not None else None
    time = np.zeros(len(body)) if time_idx is not None else None
    for r, row in enumerate(body):
        line = first_line + r
        if len(row) != width:
            raise FormatError(
                f"line {line}: expected {width} cells, found {len(row)}"
            )
        for k, j in enumerate(feature_idx):
            name = names[k] if header is not None else f"column {j}"
            features[r, k] = _parse_float(row[j].strip(), line, name)
        if class_idx is not None:
            raw = _parse_float(row[class_idx].strip(), line, class_column or "class")
            if raw not in (0.0, 1.0):
                raise LabelDomainError(
                    f"line {line}: class value {row[class_idx]!r} is not 0 or 1"
                )
            labels[r] = int(raw)
        if time_idx is not None:
            time[r] = _parse_float(row[time_idx].strip(), line, time_column or "time")

    return LabeledDataset(
        features=features, labels=labels, time=time, feature_names=names
    )


def save_csv(dataset: LabeledDataset, path: str) -> None:
    """Write ``dataset`` as CSV: Time first (if present), features, Class last.

    Floats are rendered with ``repr`` so loading the file back reproduces the
    dataset exactly.  The write is atomic.
    """
    columns: list[str] = []
    if dataset.time is not None:
        columns.append("Time")
    columns.extend(dataset.feature_names)
    if dataset.labels is not None:
        columns.append("Class")

    lines = [",".join(columns)]
    for r in range(dataset.n_rows):
        cells: list[str] = []
        if dataset.time is not None:
            cells.append(repr(float(dataset.time[r])))
        cells.extend(repr(float(v)) for v in dataset.features[r])
        if dataset.labels is not None:
            cells.append(str(int(dataset.labels[r])))
        lines.append(",".join(cells))
    write_text_atomic(path, "\n".join(lines) + "\n")


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of the synthetic transaction generator.

    Normal rows live near a ``latent_dim``-dimensional linear subspace of the
    ``feature_dim``-dimensional feature space; fraud rows are additionally
    displaced by ``fraud_shift`` along a fixed direction orthogonal to that
    subspace and carry ``fraud_noise_scale`` times the base noise.

    Attributes:
        n_normal: Number of normal rows (label 0).
        n_fraud: Number of fraud rows (label 1).
        feature_dim: Number of feature columns.
        latent_dim: Dimension of the normal subspace, < feature_dim.
        fraud_shift: Displacement of fraud rows off the subspace (0 disables
            the shift, giving a null dataset where both classes coincide when
            fraud_noise_scale is 1).
        noise_std: Standard deviation of the isotropic noise on normal rows.
        fraud_noise_scale: Noise multiplier for fraud rows.
        seed: RNG seed; the output is a pure function of this spec.
    """

    n_normal: int
    n_fraud: int
    feature_dim: int = 20
    latent_dim: int = 4
    fraud_shift: float = 6.0
    noise_std: float = 0.5
    fraud_noise_scale: float = 2.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_normal < 0 or self.n_fraud < 0:
            raise ParameterError(
                f"row counts must be non-negative, got {self.n_normal}/{self.n_fraud}"
            )
        if self.feature_dim < 2:
            raise ParameterError(f"feature_dim must be >= 2, got {self.feature_dim}")
        if not 1 <= self.latent_dim < self.feature_dim:
            raise ParameterError(
                f"latent_dim must be in [1, feature_dim), got {self.latent_dim} "
                f"with feature_dim {self.feature_dim}"
            )
        if self.fraud_shift < 0:
            raise ParameterError(f"fraud_shift must be >= 0, got {self.fraud_shift}")
        if self.noise_std <= 0:
            raise ParameterError(f"noise_std must be > 0, got {self.noise_std}")
        if self.fraud_noise_scale <= 0:
            raise ParameterError(
                f"fraud_noise_scale must be > 0, got {self.fraud_noise_scale}"
            )

    def as_dict(self) -> dict[str, float | int]:
        return {
            "n_normal": self.n_normal,
            "n_fraud": self.n_fraud,
            "feature_dim": self.feature_dim,
            "latent_dim": self.latent_dim,
            "fraud_shift": self.fraud_shift,
            "noise_std": self.noise_std,
            "fraud_noise_scale": self.fraud_noise_scale,
            "seed": self.seed,
        }


def _orthogonal_unit_vector(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Unit vector orthogonal to the column span of ``a``."""
    d = a.shape[0]
    basis: list[np.ndarray] = []
    for j in range(a.shape[1]):
        w = a[:, j].copy()
        for b in basis:
            w = w - (b @ w) * b
        norm = float(np.sqrt(w @ w))
        if norm > 1e-12:
            basis.append(w / norm)
    while True:
        u = rng.standard_normal(d)
        for b in basis:
            u = u - (b @ u) * b
        norm = float(np.sqrt(u @ u))
        if norm > 1e-9:
            return u / norm


def generate_synthetic(spec: GeneratorSpec) -> LabeledDataset:
    """Generate a labeled dataset from ``spec``, deterministically.

    All randomness comes from one generator seeded with ``spec.seed``, drawn
    in a fixed order: subspace map, fraud direction, normal latent block,
    normal noise, fraud latent block, fraud noise, row permutation.  The time
    column is a strictly increasing counter assigned after shuffling.

    Raises:
        ParameterError: If the spec is invalid.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    d, l = spec.feature_dim, spec.latent_dim

    subspace = rng.standard_normal((d, l))
    fraud_direction = _orthogonal_unit_vector(subspace, rng)

    latent_n = rng.standard_normal((spec.n_normal, l))
    noise_n = rng.standard_normal((spec.n_normal, d)) * spec.noise_std
    normal_rows = latent_n @ subspace.T + noise_n

    latent_f = rng.standard_normal((spec.n_fraud, l))
    noise_f = rng.standard_normal((spec.n_fraud, d)) * (
        spec.fraud_noise_scale * spec.noise_std
    )
    fraud_rows = latent_f @ subspace.T + spec.fraud_shift * fraud_direction + noise_f

    features = np.concatenate([normal_rows, fraud_rows], axis=0)
    labels = np.concatenate(
        [np.zeros(spec.n_normal, dtype=np.int64), np.ones(spec.n_fraud, dtype=np.int64)]
    )
    perm = rng.permutation(spec.n_normal + spec.n_fraud)
    features = features[perm]
    labels = labels[perm]
    time = np.arange(len(labels), dtype=np.float64)
    return LabeledDataset(features=features, labels=labels, time=time)
