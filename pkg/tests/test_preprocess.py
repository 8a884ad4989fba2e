"""Split and scaler checks against independently coded oracles."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from frauddetect.data import LabeledDataset
from frauddetect.errors import (
    DegenerateInputError,
    LabelDomainError,
    ParameterError,
    SchemaError,
    ShapeError,
)
from frauddetect.preprocess import (
    DEFAULT_SPLIT_SEED,
    DEFAULT_TEST_FRACTION,
    MinMaxScaler,
    StandardScaler,
    shuffled_indices,
    split_by_class,
    train_test_split,
)


def _fisher_yates_oracle(n: int, seed: int) -> list[int]:
    """The documented shuffle contract, re-coded from its description."""
    rng = np.random.default_rng(seed)
    out = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        out[i], out[j] = out[j], out[i]
    return out


def _dataset(n: int, d: int = 4, seed: int = 0) -> LabeledDataset:
    rng = np.random.default_rng(seed)
    return LabeledDataset(
        features=rng.standard_normal((n, d)),
        labels=rng.integers(0, 2, size=n),
        time=np.arange(n, dtype=np.float64),
    )


def test_shuffle_matches_documented_draw_order():
    for n, seed in [(1, 0), (2, 3), (10, 111), (57, 7), (200, 42)]:
        assert shuffled_indices(n, seed).tolist() == _fisher_yates_oracle(n, seed)


def test_shuffle_is_a_permutation_and_seed_sensitive():
    order = shuffled_indices(100, 5)
    assert sorted(order.tolist()) == list(range(100))
    assert not np.array_equal(order, shuffled_indices(100, 6))
    assert np.array_equal(order, shuffled_indices(100, 5))


def test_split_sizes_round_half_up():
    ds = _dataset(10)
    assert train_test_split(ds, 0.25, 0)[1].n_rows == 3  # 2.5 rounds up
    assert train_test_split(ds, 0.2, 0)[1].n_rows == 2
    assert train_test_split(ds, 0.05, 0)[1].n_rows == 1  # 0.5 rounds up
    assert train_test_split(ds, 0.0, 0)[1].n_rows == 0
    train, test = train_test_split(_dataset(4589), DEFAULT_TEST_FRACTION, DEFAULT_SPLIT_SEED)
    assert test.n_rows == 918 and train.n_rows == 3671


def test_split_takes_shuffled_prefix_as_test():
    ds = _dataset(23, seed=9)
    train, test = train_test_split(ds, 0.3, seed=13)
    order = shuffled_indices(23, 13)
    n_test = test.n_rows
    assert np.array_equal(test.features, ds.features[order[:n_test]])
    assert np.array_equal(train.features, ds.features[order[n_test:]])
    assert np.array_equal(test.labels, ds.labels[order[:n_test]])
    # disjoint cover of all rows
    covered = np.concatenate([test.time, train.time])
    assert sorted(covered.tolist()) == list(range(23))


def test_split_rejects_bad_fraction():
    ds = _dataset(5)
    with pytest.raises(ParameterError):
        train_test_split(ds, 1.0, 0)
    with pytest.raises(ParameterError):
        train_test_split(ds, -0.01, 0)


def test_split_by_class_partitions_features():
    ds = _dataset(40, seed=2)
    normal, fraud = split_by_class(ds)
    assert normal.shape[0] == int(np.sum(ds.labels == 0))
    assert fraud.shape[0] == int(np.sum(ds.labels == 1))
    assert np.array_equal(normal, ds.features[ds.labels == 0])
    # returned matrices are copies
    normal[:] = 0.0
    assert not np.array_equal(normal, ds.features[ds.labels == 0])


def test_split_by_class_errors():
    unlabeled = LabeledDataset(features=np.zeros((3, 2)))
    with pytest.raises(SchemaError):
        split_by_class(unlabeled)
    ds = _dataset(5)
    ds.labels = np.array([0, 1, 7, 0, 1])  # corrupt after construction
    with pytest.raises(LabelDomainError):
        split_by_class(ds)


def test_minmax_maps_fitted_columns_onto_unit_interval():
    rng = np.random.default_rng(50)
    x = rng.standard_normal((30, 5)) * [1, 10, 100, 0.1, 3] + [0, 5, -20, 1, 0]
    scaler = MinMaxScaler().fit(x)
    out = scaler.transform(x)
    assert np.allclose(out.min(axis=0), 0.0)
    assert np.allclose(out.max(axis=0), 1.0)
    assert np.allclose(scaler.inverse_transform(out), x, atol=1e-12)


def test_minmax_does_not_clip_new_data():
    x = np.array([[0.0], [10.0]])
    scaler = MinMaxScaler().fit(x)
    out = scaler.transform(np.array([[-5.0], [15.0]]))
    assert out[0, 0] == -0.5 and out[1, 0] == 1.5


def test_minmax_degenerate_column_maps_to_zero():
    x = np.array([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]])
    scaler = MinMaxScaler().fit(x)
    out = scaler.transform(x)
    assert np.array_equal(out[:, 1], np.zeros(3))
    # the degenerate column inverts to the fitted constant
    assert np.array_equal(scaler.inverse_transform(out)[:, 1], np.full(3, 7.0))


def test_minmax_errors_and_estimator_contract():
    with pytest.raises(NotFittedError):
        MinMaxScaler().transform(np.zeros((1, 2)))
    with pytest.raises(DegenerateInputError):
        MinMaxScaler().fit(np.zeros((0, 3)))
    scaler = MinMaxScaler().fit(np.zeros((2, 3)))
    with pytest.raises(ShapeError):
        scaler.transform(np.zeros((2, 4)))
    assert clone(scaler).get_params() == scaler.get_params()
    assert scaler.fit_transform(np.ones((2, 2))).shape == (2, 2)


def test_standard_scaler_moments_use_sample_deviation():
    rng = np.random.default_rng(51)
    x = rng.standard_normal((40, 3)) * [2, 5, 0.3] + [1, -4, 0]
    scaler = StandardScaler().fit(x)
    assert np.allclose(scaler.mean_, x.mean(axis=0))
    assert np.allclose(scaler.scale_, x.std(axis=0, ddof=1))
    out = scaler.transform(x)
    assert np.allclose(out.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(out.std(axis=0, ddof=1), 1.0)
    assert np.allclose(scaler.inverse_transform(out), x, atol=1e-12)


def test_standard_scaler_degenerate_and_errors():
    x = np.array([[1.0, 4.0], [2.0, 4.0], [3.0, 4.0]])
    scaler = StandardScaler().fit(x)
    out = scaler.transform(x)
    assert np.array_equal(out[:, 1], np.zeros(3))
    assert np.array_equal(scaler.inverse_transform(out)[:, 1], np.full(3, 4.0))
    with pytest.raises(DegenerateInputError):
        StandardScaler().fit(np.ones((1, 2)))
    with pytest.raises(NotFittedError):
        StandardScaler().transform(np.ones((1, 2)))
