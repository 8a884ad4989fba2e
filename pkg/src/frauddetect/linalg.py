"""Dense linear algebra used by the PCA detector.

Everything here operates on plain float64 numpy arrays.  The symmetric
eigensolver is a cyclic Jacobi iteration written out in full rather than a
LAPACK call so that the whole PCA path, covariance included, is spelled out
in this package and deterministic down to the last bit on repeated runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateInputError, ShapeError

# Jacobi sweep budget and the off-diagonal norm at which a matrix counts as
# diagonal.  The tolerance is scaled by the matrix norm so large-variance
# covariance matrices (unscaled monetary features) still converge.
JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-12

# Input asymmetry accepted by eigh_symmetric before it refuses the matrix.
SYMMETRY_TOL = 1e-10


def as_matrix(x, name: str = "X") -> np.ndarray:
    """Validate and convert ``x`` to a 2-D float64 array with finite entries.

    Args:
        x: Array-like input.
        name: Name used in error messages.

    Returns:
        A float64 ndarray of shape (n_rows, n_cols).

    Raises:
        ShapeError: If ``x`` is not 2-D.
        DegenerateInputError: If ``x`` contains NaN or infinity.
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got {a.ndim}-D with shape {a.shape}")
    if a.size and not np.isfinite(a).all():
        raise DegenerateInputError(f"{name} contains non-finite entries")
    return a


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit inner-dimension check."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"matmul inner dimensions differ: {a.shape} by {b.shape}"
        )
    return a @ b


def transpose(a: np.ndarray) -> np.ndarray:
    """Transposed copy of ``a``."""
    return as_matrix(a, "a").T.copy()


def row_sub(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Subtract the vector ``v`` from every row of ``a``."""
    a = as_matrix(a, "a")
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != a.shape[1]:
        raise ShapeError(
            f"row_sub vector has shape {v.shape}, expected ({a.shape[1]},)"
        )
    return a - v


def covariance_matrix(x: np.ndarray) -> np.ndarray:
    """Sample covariance matrix of the rows of ``x``.

    Columns are centred on their means and cross products are divided by
    n - 1.  Only the upper triangle is computed; the lower triangle is a
    bitwise mirror, so the result is exactly symmetric.

    Args:
        x: Data matrix of shape (n_rows, n_features), n_rows >= 2.

    Returns:
        Covariance matrix of shape (n_features, n_features).

    Raises:
        DegenerateInputError: If ``x`` has fewer than 2 rows.
    """
    x = as_matrix(x, "x")
    n = x.shape[0]
    if n < 2:
        raise DegenerateInputError(
            f"covariance needs at least 2 rows, got {n}"
        )
    centered = row_sub(x, x.mean(axis=0))
    cross = matmul(transpose(centered), centered) / (n - 1)
    upper = np.triu(cross)
    return upper + np.triu(cross, 1).T


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (descending) and matching unit-norm eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_symmetric_square(s: np.ndarray) -> np.ndarray:
    s = as_matrix(s, "s")
    if s.shape[0] != s.shape[1]:
        raise ShapeError(f"matrix must be square, got shape {s.shape}")
    if s.size:
        asym = float(np.max(np.abs(s - s.T)))
        if asym > SYMMETRY_TOL:
            raise ShapeError(
                f"matrix is not symmetric: max|s - s.T| = {asym:.3e}"
            )
    return s


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def eigh_symmetric(s: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all (p, q) pairs in row order, rotating each off-diagonal
    entry to zero, until the off-diagonal Frobenius norm falls below
    ``JACOBI_TOL`` relative to the matrix norm.  Eigenvalues are returned in
    descending order.  Each eigenvector is oriented so its largest-magnitude
    entry is non-negative (first such entry on ties), which makes the
    decomposition fully deterministic.

    Args:
        s: Symmetric matrix, asymmetry at most ``SYMMETRY_TOL``.

    Returns:
        EigenDecomposition with ``eigenvalues`` of shape (n,) and
        ``eigenvectors`` of shape (n, n), eigenvector i in column i.

    Raises:
        ShapeError: If ``s`` is not square or not symmetric.
        ConvergenceError: If ``JACOBI_MAX_SWEEPS`` sweeps do not converge.
    """
    s = _check_symmetric_square(s)
    n = s.shape[0]
    if n == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0)))

    # Work on an exactly symmetric copy; small input asymmetry is discarded.
    a = np.triu(s) + np.triu(s, 1).T
    v = np.eye(n)
    tol = JACOBI_TOL * max(1.0, float(np.sqrt(np.sum(a * a))))

    converged = _off_diagonal_norm(a) <= tol
    for _ in range(JACOBI_MAX_SWEEPS):
        if converged:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                theta = diff / (2.0 * apq)
                if math.isinf(theta):
                    t = 0.0
                else:
                    t = math.copysign(1.0, theta) / (
                        abs(theta) + math.sqrt(theta * theta + 1.0)
                    )
                c = 1.0 / math.sqrt(t * t + 1.0)
                w = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - w * col_q
                a[:, q] = w * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - w * row_q
                a[q, :] = w * row_p + c * row_q
                # The rotation is chosen to annihilate this pair exactly.
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - w * vec_q
                v[:, q] = w * vec_p + c * vec_q
        converged = _off_diagonal_norm(a) <= tol
    if not converged:
        raise ConvergenceError(
            f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps "
            f"(off-diagonal norm {_off_diagonal_norm(a):.3e}, tolerance {tol:.3e})"
        )

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = v[:, order]
    for j in range(n):
        lead = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[lead, j] < 0.0:
            vectors[:, j] = -vectors[:, j]
    return EigenDecomposition(eigenvalues, vectors)
