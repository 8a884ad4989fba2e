"""PCA reconstruction-residual anomaly detector.

Fit on normal rows: centre (optionally standardize), form the sample
covariance, eigendecompose it with the in-package Jacobi solver and keep the
leading eigenvectors.  A row's anomaly score is the squared norm of what the
retained components fail to reconstruct, so rows off the normal subspace
score high.
"""

from __future__ import annotations

import logging

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import DegenerateInputError, ParameterError, ShapeError
from .linalg import as_matrix, covariance_matrix, eigh_symmetric

logger = logging.getLogger(__name__)

# Relative eigenvalue cutoff used as the numerical rank when the variance
# target is exactly 1.0.
RANK_CUTOFF = 1e-10


class PcaDetector(BaseEstimator):
    """Anomaly detector scoring rows by squared PCA reconstruction residual.

    Exactly one of ``n_components`` (fixed count) or ``variance_target``
    (smallest count whose retained eigenvalues reach the target fraction of
    total variance) determines how many components are kept; a set
    ``n_components`` wins.  Higher scores mean more anomalous.

    Attributes set by :meth:`fit`:
        mean_: Per-feature mean of the fitted rows.
        scale_: Per-feature sample deviation (ones when ``standardize`` is
            False).  Zero-deviation columns keep their 0 here and are divided
            by 1 instead.
        components_: Matrix (n_features, k) of retained eigenvector columns.
        eigenvalues_: Retained eigenvalues, descending.
        total_variance_: Sum of all eigenvalues at fit time, the denominator
            of every explained-variance fraction.
        explained_variance_ratio_: ``eigenvalues_ / total_variance_``.
        n_components_: Number of retained components.
        n_features_in_: Number of feature columns seen at fit.
    """

    def __init__(
        self,
        n_components: int | None = None,
        variance_target: float = 0.95,
        standardize: bool = True,
    ) -> None:
        self.n_components = n_components
        self.variance_target = variance_target
        self.standardize = standardize

    def fit(self, X, y=None) -> "PcaDetector":
        """Fit the normal-row model.

        Args:
            X: Normal rows, shape (n_rows >= 2, n_features).

        Returns:
            self.

        Raises:
            DegenerateInputError: On fewer than 2 rows or zero total variance.
            ParameterError: If the component selection parameters are out of
                domain.
        """
        X = as_matrix(X, "X")
        n, d = X.shape
        if n < 2:
            raise DegenerateInputError(f"PCA needs at least 2 rows, got {n}")
        if self.n_components is not None:
            if not 1 <= int(self.n_components) <= d:
                raise ParameterError(
                    f"n_components must be in [1, {d}], got {self.n_components}"
                )
        elif not 0.0 < self.variance_target <= 1.0:
            raise ParameterError(
                f"variance_target must be in (0, 1], got {self.variance_target}"
            )

        self.mean_ = X.mean(axis=0)
        if self.standardize:
            self.scale_ = X.std(axis=0, ddof=1)
        else:
            self.scale_ = np.ones(d)
        working = self._to_working(X)

        decomposition = eigh_symmetric(covariance_matrix(working))
        eigenvalues = decomposition.eigenvalues
        total = float(np.sum(eigenvalues))
        if total <= 0.0:
            raise DegenerateInputError("fitted rows have zero total variance")

        if self.n_components is not None:
            k = int(self.n_components)
        elif self.variance_target == 1.0:
            # Numerical rank: components beyond it only hold rounding noise.
            k = int(np.sum(eigenvalues > RANK_CUTOFF * eigenvalues[0]))
            k = max(k, 1)
        else:
            fractions = np.cumsum(eigenvalues) / total
            k = int(np.argmax(fractions >= self.variance_target)) + 1

        self.components_ = decomposition.eigenvectors[:, :k].copy()
        self.eigenvalues_ = eigenvalues[:k].copy()
        self.total_variance_ = total
        self.explained_variance_ratio_ = self.eigenvalues_ / total
        self.n_components_ = k
        self.n_features_in_ = d
        logger.debug(
            "kept %d of %d components (%.4f of variance)",
            k, d, float(np.sum(self.explained_variance_ratio_)),
        )
        return self

    def _to_working(self, X: np.ndarray) -> np.ndarray:
        # Zero-deviation columns are divided by 1; their centred fitted
        # values are all zero anyway, and deviations in new data still count.
        safe = np.where(self.scale_ == 0.0, 1.0, self.scale_)
        return (X - self.mean_) / safe

    def _check_fitted(self) -> None:
        if not hasattr(self, "components_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    def score(self, X) -> np.ndarray:
        """Squared reconstruction residual per row, in the working space.

        Row i's score is ``sum((z_i - C @ C.T @ z_i) ** 2)`` where z_i is the
        centred (and optionally standardized) row and C the retained
        components.  Scores are row-local.
        """
        self._check_fitted()
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(
                f"X has {X.shape[1]} columns, model was fitted on "
                f"{self.n_features_in_}"
            )
        z = self._to_working(X)
        projected = z @ self.components_
        residual = z - projected @ self.components_.T
        return np.sum(residual * residual, axis=1)
