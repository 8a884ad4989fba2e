"""Model files: versioned, self-describing flat text.

Both detectors serialize to the same envelope: a magic line with a format
version, a ``kind`` line, then kind-specific sections.  Every float is
written with ``repr`` (shortest round-trip decimal), so a loaded model
scores bit-identically to the one that was saved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autoencoder import Autoencoder, score as autoencoder_score
from .data import write_text_atomic
from .errors import FormatError, VersionError
from .nn import ACTIVATIONS, LOSSES, DenseLayer
from .pca import PcaDetector
from .preprocess import MinMaxScaler

MAGIC = "frauddetect-model"
FORMAT_VERSION = 1


def _floats_line(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


class _LineReader:
    """Sequential reader with line numbers for error messages."""

    def __init__(self, text: str, path: str) -> None:
        self.lines = text.splitlines()
        self.pos = 0
        self.path = path

    def next(self, what: str) -> str:
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line
        raise FormatError(f"{self.path}: unexpected end of file, expected {what}")

    def next_floats(self, count: int, what: str) -> np.ndarray:
        line = self.next(what)
        parts = line.split()
        if len(parts) != count:
            raise FormatError(
                f"{self.path} line {self.pos}: expected {count} values for "
                f"{what}, found {len(parts)}"
            )
        try:
            return np.array([float(p) for p in parts])
        except ValueError as exc:
            raise FormatError(f"{self.path} line {self.pos}: {exc}") from None

    def next_field(self, name: str) -> str:
        line = self.next(f"{name} line")
        key, _, value = line.partition(" ")
        if key != name or not value:
            raise FormatError(
                f"{self.path} line {self.pos}: expected {name!r} line, got {line!r}"
            )
        return value.strip()


@dataclass
class AutoencoderArtifact:
    """A trained autoencoder plus everything needed to score raw rows."""

    model: Autoencoder
    loss: str
    scaler: MinMaxScaler | None = None

    kind = "autoencoder"

    def score_rows(self, features: np.ndarray) -> np.ndarray:
        """Anomaly scores for raw feature rows, applying the stored scaler."""
        x = self.scaler.transform(features) if self.scaler is not None else features
        return autoencoder_score(self.model, x, self.loss)


@dataclass
class PcaArtifact:
    """A fitted PCA detector; scaling is internal to the detector."""

    detector: PcaDetector

    kind = "pca"

    def score_rows(self, features: np.ndarray) -> np.ndarray:
        return self.detector.score(features)


def save_autoencoder_model(
    path: str,
    model: Autoencoder,
    loss: str,
    scaler: MinMaxScaler | None = None,
) -> None:
    """Write an autoencoder (and optionally its input scaler) to ``path``.

    Layout: header fields, then per layer a ``layer <out> <in> <activation>``
    line followed by out_dim weight rows and one bias line, then an optional
    min-max scaler section.
    """
    if loss not in LOSSES:
        raise FormatError(f"cannot save model with unknown loss {loss!r}")
    lines = [
        f"{MAGIC} {FORMAT_VERSION}",
        "kind autoencoder",
        f"loss {loss}",
        f"encoder_depth {model.encoder_depth}",
        f"layers {len(model.layers)}",
    ]
    for layer in model.layers:
        lines.append(f"layer {layer.out_dim} {layer.in_dim} {layer.activation}")
        for row in layer.weights:
            lines.append(_floats_line(row))
        lines.append(_floats_line(layer.bias))
    if scaler is not None:
        lines.append(f"scaler minmax {scaler.n_features_in_}")
        lines.append(_floats_line(scaler.data_min_))
        lines.append(_floats_line(scaler.data_max_))
    write_text_atomic(path, "\n".join(lines) + "\n")


def save_pca_model(path: str, detector: PcaDetector) -> None:
    """Write a fitted PCA detector to ``path``, components one per line."""
    detector._check_fitted()
    d = detector.n_features_in_
    lines = [
        f"{MAGIC} {FORMAT_VERSION}",
        "kind pca",
        f"features {d}",
        f"components {detector.n_components_}",
        f"standardized {1 if detector.standardize else 0}",
        f"total_variance {detector.total_variance_!r}",
        "mean " + _floats_line(detector.mean_),
        "scale " + _floats_line(detector.scale_),
        "eigenvalues " + _floats_line(detector.eigenvalues_),
    ]
    for j in range(detector.n_components_):
        lines.append(_floats_line(detector.components_[:, j]))
    write_text_atomic(path, "\n".join(lines) + "\n")


def load_model(path: str) -> AutoencoderArtifact | PcaArtifact:
    """Load either model kind from ``path``.

    Raises:
        VersionError: If the magic line or format version is unknown.
        FormatError: On any structural problem in the file.
    """
    with open(path) as handle:
        reader = _LineReader(handle.read(), path)
    header = reader.next("magic line").split()
    if len(header) != 2 or header[0] != MAGIC:
        raise VersionError(f"{path} is not a {MAGIC} file")
    if header[1] != str(FORMAT_VERSION):
        raise VersionError(
            f"{path} has format version {header[1]}, this build reads "
            f"{FORMAT_VERSION}"
        )
    kind = reader.next_field("kind")
    if kind == "autoencoder":
        return _load_autoencoder(reader)
    if kind == "pca":
        return _load_pca(reader)
    raise FormatError(f"{path}: unknown model kind {kind!r}")


def _load_autoencoder(reader: _LineReader) -> AutoencoderArtifact:
    loss = reader.next_field("loss")
    if loss not in LOSSES:
        raise FormatError(f"{reader.path}: unknown loss {loss!r}")
    try:
        encoder_depth = int(reader.next_field("encoder_depth"))
        n_layers = int(reader.next_field("layers"))
    except ValueError as exc:
        raise FormatError(f"{reader.path}: {exc}") from None

    layers: list[DenseLayer] = []
    for i in range(n_layers):
        parts = reader.next(f"layer {i} header").split()
        if len(parts) != 4 or parts[0] != "layer":
            raise FormatError(
                f"{reader.path} line {reader.pos}: bad layer header {parts!r}"
            )
        try:
            out_dim, in_dim = int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise FormatError(f"{reader.path}: {exc}") from None
        activation = parts[3]
        if activation not in ACTIVATIONS:
            raise FormatError(f"{reader.path}: unknown activation {activation!r}")
        weights = np.vstack(
            [reader.next_floats(in_dim, f"layer {i} weight row") for _ in range(out_dim)]
        )
        bias = reader.next_floats(out_dim, f"layer {i} bias")
        layers.append(DenseLayer(weights=weights, bias=bias, activation=activation))

    scaler = None
    if reader.pos < len(reader.lines) and any(
        line.strip() for line in reader.lines[reader.pos :]
    ):
        parts = reader.next("scaler header").split()
        if len(parts) != 3 or parts[0] != "scaler" or parts[1] != "minmax":
            raise FormatError(
                f"{reader.path} line {reader.pos}: bad scaler header {parts!r}"
            )
        width = int(parts[2])
        scaler = MinMaxScaler()
        scaler.n_features_in_ = width
        scaler.data_min_ = reader.next_floats(width, "scaler minima")
        scaler.data_max_ = reader.next_floats(width, "scaler maxima")
        scaler.range_ = scaler.data_max_ - scaler.data_min_

    model = Autoencoder(layers=layers, encoder_depth=encoder_depth)
    return AutoencoderArtifact(model=model, loss=loss, scaler=scaler)


def _load_pca(reader: _LineReader) -> PcaArtifact:
    try:
        d = int(reader.next_field("features"))
        k = int(reader.next_field("components"))
        standardized = bool(int(reader.next_field("standardized")))
        total_variance = float(reader.next_field("total_variance"))
    except ValueError as exc:
        raise FormatError(f"{reader.path}: {exc}") from None

    mean_line = reader.next("mean line").split()
    if mean_line[0] != "mean" or len(mean_line) != d + 1:
        raise FormatError(f"{reader.path}: bad mean line")
    scale_line = reader.next("scale line").split()
    if scale_line[0] != "scale" or len(scale_line) != d + 1:
        raise FormatError(f"{reader.path}: bad scale line")
    eig_line = reader.next("eigenvalues line").split()
    if eig_line[0] != "eigenvalues" or len(eig_line) != k + 1:
        raise FormatError(f"{reader.path}: bad eigenvalues line")
    try:
        mean = np.array([float(v) for v in mean_line[1:]])
        scale = np.array([float(v) for v in scale_line[1:]])
        eigenvalues = np.array([float(v) for v in eig_line[1:]])
        components = np.column_stack(
            [reader.next_floats(d, f"component {j}") for j in range(k)]
        )
    except ValueError as exc:
        raise FormatError(f"{reader.path}: {exc}") from None

    detector = PcaDetector(n_components=k, standardize=standardized)
    detector.mean_ = mean
    detector.scale_ = scale
    detector.components_ = components
    detector.eigenvalues_ = eigenvalues
    detector.total_variance_ = total_variance
    detector.explained_variance_ratio_ = eigenvalues / total_variance
    detector.n_components_ = k
    detector.n_features_in_ = d
    return PcaArtifact(detector=detector)
