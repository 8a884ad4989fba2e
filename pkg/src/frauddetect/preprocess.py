"""Scaling and partitioning of transaction data.

The split mirrors the usual shuffle-then-slice recipe: a seeded Fisher-Yates
shuffle of the row indices followed by a prefix cut.  Both scalers are
ordinary fit/transform estimators; unlike their scikit-learn namesakes the
standard scaler uses the n - 1 sample deviation, and both map columns that
were constant at fit time to exactly 0.0.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .data import LabeledDataset
from .errors import (
    DegenerateInputError,
    LabelDomainError,
    ParameterError,
    SchemaError,
    ShapeError,
)
from .linalg import as_matrix

DEFAULT_TEST_FRACTION = 0.2
DEFAULT_SPLIT_SEED = 111


def shuffled_indices(n: int, seed: int) -> np.ndarray:
    """Fisher-Yates permutation of range(n) driven by ``default_rng(seed)``.

    The draw order is part of the contract: for i = n-1 down to 1 the swap
    partner is ``integers(0, i + 1)``, so the permutation is reproducible
    from the seed alone.
    """
    rng = np.random.default_rng(seed)
    indices = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        indices[i], indices[j] = indices[j], indices[i]
    return indices


def train_test_split(
    dataset: LabeledDataset,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: int = DEFAULT_SPLIT_SEED,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Split ``dataset`` into train and test parts by seeded shuffle.

    The test part takes the first ``round(n * test_fraction)`` shuffled rows
    (round half up), the train part the rest.  There is no stratification:
    class balance of the parts is whatever the shuffle yields.

    Args:
        dataset: Dataset to split.
        test_fraction: Fraction of rows for the test part, in [0, 1).
        seed: Shuffle seed.

    Returns:
        (train, test) datasets; test is empty when ``test_fraction`` is 0.

    Raises:
        ParameterError: If ``test_fraction`` is outside [0, 1).
    """
    if not 0.0 <= test_fraction < 1.0:
        raise ParameterError(
            f"test_fraction must be in [0, 1), got {test_fraction}"
        )
    n = dataset.n_rows
    n_test = int(np.floor(n * test_fraction + 0.5))
    order = shuffled_indices(n, seed)
    return dataset.select(order[n_test:]), dataset.select(order[:n_test])


def split_by_class(dataset: LabeledDataset) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrices of the normal (label 0) and fraud (label 1) rows.

    Time and label columns are dropped; only features are returned.

    Raises:
        SchemaError: If the dataset has no labels.
        LabelDomainError: If any label is outside {0, 1}.
    """
    if dataset.labels is None:
        raise SchemaError("dataset has no class labels to split on")
    labels = np.asarray(dataset.labels)
    bad = ~np.isin(labels, (0, 1))
    if bad.any():
        first = int(np.argmax(bad))
        raise LabelDomainError(
            f"label {labels[first]} at row {first} is not 0 or 1"
        )
    return (
        dataset.features[labels == 0].copy(),
        dataset.features[labels == 1].copy(),
    )


class MinMaxScaler(BaseEstimator, TransformerMixin):
    """Column-wise map of the fitted range onto [0, 1].

    Transformed values of data outside the fitted range fall outside [0, 1];
    nothing is clipped.  A column with zero fitted range maps to 0.0
    everywhere.
    """

    def fit(self, X, y=None) -> "MinMaxScaler":
        X = as_matrix(X, "X")
        if X.shape[0] == 0:
            raise DegenerateInputError("cannot fit scaler on an empty matrix")
        self.n_features_in_ = X.shape[1]
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        self.range_ = self.data_max_ - self.data_min_
        return self

    def _check_ready(self, X) -> np.ndarray:
        if not hasattr(self, "range_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(
                f"X has {X.shape[1]} columns, scaler was fitted on "
                f"{self.n_features_in_}"
            )
        return X

    def transform(self, X) -> np.ndarray:
        X = self._check_ready(X)
        degenerate = self.range_ == 0.0
        safe_range = np.where(degenerate, 1.0, self.range_)
        out = (X - self.data_min_) / safe_range
        out[:, degenerate] = 0.0
        return out

    def inverse_transform(self, X) -> np.ndarray:
        """Undo the affine map; degenerate columns return the fitted minimum."""
        X = self._check_ready(X)
        out = X * self.range_ + self.data_min_
        out[:, self.range_ == 0.0] = self.data_min_[self.range_ == 0.0]
        return out


class StandardScaler(BaseEstimator, TransformerMixin):
    """Column-wise centring and division by the n - 1 sample deviation.

    A column with zero deviation maps to 0.0 everywhere.
    """

    def fit(self, X, y=None) -> "StandardScaler":
        X = as_matrix(X, "X")
        if X.shape[0] < 2:
            raise DegenerateInputError(
                f"standardization needs at least 2 rows, got {X.shape[0]}"
            )
        self.n_features_in_ = X.shape[1]
        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0, ddof=1)
        return self

    def _check_ready(self, X) -> np.ndarray:
        if not hasattr(self, "scale_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(
                f"X has {X.shape[1]} columns, scaler was fitted on "
                f"{self.n_features_in_}"
            )
        return X

    def transform(self, X) -> np.ndarray:
        X = self._check_ready(X)
        degenerate = self.scale_ == 0.0
        safe_scale = np.where(degenerate, 1.0, self.scale_)
        out = (X - self.mean_) / safe_scale
        out[:, degenerate] = 0.0
        return out

    def inverse_transform(self, X) -> np.ndarray:
        """Undo the affine map; degenerate columns return the fitted mean."""
        X = self._check_ready(X)
        out = X * self.scale_ + self.mean_
        out[:, self.scale_ == 0.0] = self.mean_[self.scale_ == 0.0]
        return out
