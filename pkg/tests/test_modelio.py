"""Model file round trips and format/version guards."""

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from frauddetect.autoencoder import build_autoencoder
from frauddetect.errors import FormatError, VersionError
from frauddetect.modelio import (
    AutoencoderArtifact,
    PcaArtifact,
    load_model,
    save_autoencoder_model,
    save_pca_model,
)
from frauddetect.pca import PcaDetector
from frauddetect.preprocess import MinMaxScaler


def _ae_fixture(seed):
    rng = np.random.default_rng(seed)
    model = build_autoencoder(
        6, (4,), 2,
        hidden_activation=("relu", "linear")[seed % 2],
        output_activation=("sigmoid", "linear")[seed % 2],
        seed=seed,
    )
    data = rng.uniform(0.0, 1.0, size=(15, 6))
    scaler = MinMaxScaler().fit(data) if seed % 3 else None
    return model, scaler, data


def test_autoencoder_round_trip_is_bit_exact(tmp_path):
    for seed in range(5):
        model, scaler, data = _ae_fixture(seed)
        path = tmp_path / f"ae{seed}.model"
        save_autoencoder_model(str(path), model, "mae", scaler)
        artifact = load_model(str(path))

        assert isinstance(artifact, AutoencoderArtifact)
        assert artifact.kind == "autoencoder"
        assert artifact.loss == "mae"
        assert artifact.model.encoder_depth == model.encoder_depth
        for got, want in zip(artifact.model.layers, model.layers):
            assert got.weights.tobytes() == want.weights.tobytes()
            assert got.bias.tobytes() == want.bias.tobytes()
            assert got.activation == want.activation
        if scaler is None:
            assert artifact.scaler is None
        else:
            assert artifact.scaler.data_min_.tobytes() == scaler.data_min_.tobytes()
            assert artifact.scaler.data_max_.tobytes() == scaler.data_max_.tobytes()
        direct = AutoencoderArtifact(model=model, loss="mae", scaler=scaler)
        assert artifact.score_rows(data).tobytes() == direct.score_rows(data).tobytes()


def test_saved_file_is_stable_across_save_load_save(tmp_path):
    model, scaler, _ = _ae_fixture(1)
    first = tmp_path / "a.model"
    second = tmp_path / "b.model"
    save_autoencoder_model(str(first), model, "mse", scaler)
    loaded = load_model(str(first))
    save_autoencoder_model(str(second), loaded.model, loaded.loss, loaded.scaler)
    assert first.read_bytes() == second.read_bytes()


def test_pca_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(80)
    for seed in range(5):
        data = rng.standard_normal((40, 5)) * rng.uniform(0.5, 20.0)
        det = PcaDetector(n_components=2 + seed % 3, standardize=bool(seed % 2)).fit(data)
        path = tmp_path / f"pca{seed}.model"
        save_pca_model(str(path), det)
        artifact = load_model(str(path))

        assert isinstance(artifact, PcaArtifact)
        assert artifact.kind == "pca"
        back = artifact.detector
        assert back.components_.tobytes() == det.components_.tobytes()
        assert back.mean_.tobytes() == det.mean_.tobytes()
        assert back.scale_.tobytes() == det.scale_.tobytes()
        assert back.eigenvalues_.tobytes() == det.eigenvalues_.tobytes()
        assert back.total_variance_ == det.total_variance_
        assert back.n_components_ == det.n_components_
        assert back.standardize == det.standardize
        assert artifact.score_rows(data).tobytes() == det.score(data).tobytes()


def test_artifact_scoring_applies_the_scaler():
    model, _, data = _ae_fixture(2)
    scaler = MinMaxScaler().fit(data * 100.0)
    scaled_artifact = AutoencoderArtifact(model=model, loss="mae", scaler=scaler)
    bare_artifact = AutoencoderArtifact(model=model, loss="mae", scaler=None)
    raw = data * 100.0
    assert np.array_equal(
        scaled_artifact.score_rows(raw), bare_artifact.score_rows(scaler.transform(raw))
    )


def test_version_and_kind_guards(tmp_path):
    not_ours = tmp_path / "other.model"
    not_ours.write_text("someprogram 1\nkind autoencoder\n")
    with pytest.raises(VersionError):
        load_model(str(not_ours))

    future = tmp_path / "future.model"
    future.write_text("frauddetect-model 2\nkind pca\n")
    with pytest.raises(VersionError):
        load_model(str(future))

    unknown = tmp_path / "odd.model"
    unknown.write_text("frauddetect-model 1\nkind forest\n")
    with pytest.raises(FormatError):
        load_model(str(unknown))


def test_structural_errors(tmp_path):
    truncated = tmp_path / "cut.model"
    truncated.write_text("frauddetect-model 1\nkind autoencoder\nloss mae\n")
    with pytest.raises(FormatError):
        load_model(str(truncated))

    short_row = tmp_path / "short.model"
    short_row.write_text(
        "frauddetect-model 1\nkind autoencoder\nloss mae\n"
        "encoder_depth 1\nlayers 1\nlayer 1 2 linear\n0.5\n0.0\n"
    )
    with pytest.raises(FormatError, match="weight row"):
        load_model(str(short_row))

    bad_loss = tmp_path / "loss.model"
    bad_loss.write_text("frauddetect-model 1\nkind autoencoder\nloss huber\n")
    with pytest.raises(FormatError):
        load_model(str(bad_loss))


def test_save_guards(tmp_path):
    model, _, _ = _ae_fixture(0)
    with pytest.raises(FormatError):
        save_autoencoder_model(str(tmp_path / "x.model"), model, "huber")
    with pytest.raises(NotFittedError):
        save_pca_model(str(tmp_path / "y.model"), PcaDetector(n_components=1))
