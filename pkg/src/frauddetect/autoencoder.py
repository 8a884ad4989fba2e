"""Dense autoencoder: construction, training and anomaly scoring.

The network is a mirrored stack of dense layers with strictly decreasing
encoder widths down to a bottleneck.  It is trained only on rows believed to
be normal; at scoring time the per-row reconstruction loss is the anomaly
score, on the premise that a model fitted to normal traffic reconstructs
fraud poorly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import ArchitectureError, DegenerateInputError, DivergenceError, ParameterError
from .linalg import as_matrix
from .nn import (
    ACTIVATIONS,
    LOSSES,
    DenseLayer,
    backward,
    flatten_grads,
    forward,
    glorot_uniform,
    init_adam,
    mean_loss,
    adam_step,
    reconstruction,
    row_losses,
    trainable_params,
)

logger = logging.getLogger(__name__)


@dataclass
class Autoencoder:
    """A layer stack split into an encoder half and a decoder half.

    Attributes:
        layers: All layers, encoder first.
        encoder_depth: Number of layers belonging to the encoder; the output
            width of the last encoder layer is the bottleneck.
    """

    layers: list[DenseLayer]
    encoder_depth: int

    def __post_init__(self) -> None:
        if not 1 <= self.encoder_depth <= len(self.layers):
            raise ArchitectureError(
                f"encoder_depth {self.encoder_depth} out of range for "
                f"{len(self.layers)} layers"
            )

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def bottleneck_dim(self) -> int:
        return self.layers[self.encoder_depth - 1].out_dim

    @property
    def widths(self) -> list[int]:
        """Unit counts from input to output, length len(layers) + 1."""
        return [self.layers[0].in_dim] + [layer.out_dim for layer in self.layers]


def build_autoencoder(
    input_dim: int,
    hidden_widths: tuple[int, ...] = (16,),
    bottleneck: int = 8,
    hidden_activation: str = "relu",
    output_activation: str = "sigmoid",
    seed: int = 0,
) -> Autoencoder:
    """Build a mirrored autoencoder with Glorot-uniform weights, zero biases.

    The encoder runs input_dim -> hidden_widths... -> bottleneck with
    strictly decreasing widths; the decoder mirrors it back up.  All layers
    use ``hidden_activation`` except the final output layer.  Weights are
    drawn layer by layer from one generator seeded with ``seed``, so the
    initial network is a pure function of the arguments.

    Args:
        input_dim: Width of the input rows.
        hidden_widths: Encoder widths between input and bottleneck.
        bottleneck: Width of the central code layer.
        hidden_activation: Activation for every non-final layer.
        output_activation: Activation for the final layer.
        seed: Weight initialization seed.

    Returns:
        A freshly initialized Autoencoder.

    Raises:
        ArchitectureError: If widths are not strictly decreasing toward the
            bottleneck or any width is < 1.
        ParameterError: On unknown activation names.
    """
    encoder_widths = [int(input_dim), *(int(w) for w in hidden_widths), int(bottleneck)]
    if any(w < 1 for w in encoder_widths):
        raise ArchitectureError(f"all widths must be >= 1, got {encoder_widths}")
    for a, b in zip(encoder_widths, encoder_widths[1:]):
        if b >= a:
            raise ArchitectureError(
                f"encoder widths must strictly decrease, got {encoder_widths}"
            )
    for tag in (hidden_activation, output_activation):
        if tag not in ACTIVATIONS:
            raise ParameterError(
                f"unknown activation {tag!r}, expected one of {ACTIVATIONS}"
            )

    decoder_widths = encoder_widths[-2::-1]
    widths = encoder_widths + decoder_widths
    rng = np.random.default_rng(seed)
    layers: list[DenseLayer] = []
    for i, (w_in, w_out) in enumerate(zip(widths, widths[1:])):
        tag = output_activation if i == len(widths) - 2 else hidden_activation
        layers.append(
            DenseLayer(
                weights=glorot_uniform(rng, w_out, w_in),
                bias=np.zeros(w_out),
                activation=tag,
            )
        )
    return Autoencoder(layers=layers, encoder_depth=len(encoder_widths) - 1)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run.

    ``validation_fraction`` rows (rounded, at least one when non-zero) are
    held out from the shuffled training matrix and monitored for early
    stopping; 0.0 disables the holdout, in which case the training loss is
    monitored instead.
    """

    learning_rate: float = 1e-3
    epochs: int = 100
    batch_size: int = 32
    patience: int = 10
    min_delta: float = 0.0
    seed: int = 0
    loss: str = "mae"
    validation_fraction: float = 0.1

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ParameterError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise ParameterError(f"patience must be >= 1, got {self.patience}")
        if self.min_delta < 0:
            raise ParameterError(f"min_delta must be >= 0, got {self.min_delta}")
        if self.loss not in LOSSES:
            raise ParameterError(f"unknown loss {self.loss!r}, expected one of {LOSSES}")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ParameterError(
                f"validation_fraction must be in [0, 1), got {self.validation_fraction}"
            )


class EarlyStopping:
    """Signals a stop when the monitored loss stalls for ``patience`` epochs.

    An epoch improves when its loss is below the best seen minus
    ``min_delta``; any other epoch increments the wait counter.
    """

    def __init__(self, patience: int, min_delta: float = 0.0) -> None:
        self.patience = patience
        self.min_delta = min_delta
        self.best_loss = float("inf")
        self.best_epoch = 0
        self.wait = 0
        self.improved = False

    def update(self, loss: float, epoch: int) -> bool:
        """Record ``loss`` for ``epoch`` (1-based); True means stop now."""
        self.improved = loss < self.best_loss - self.min_delta
        if self.improved:
            self.best_loss = loss
            self.best_epoch = epoch
            self.wait = 0
            return False
        self.wait += 1
        return self.wait >= self.patience


@dataclass
class TrainHistory:
    """Per-epoch losses plus where early stopping landed.

    ``val_losses`` repeats the training loss when no rows were held out.
    """

    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    best_epoch: int = 0
    epochs_run: int = 0


def train(
    model: Autoencoder, x: np.ndarray, config: TrainConfig
) -> tuple[Autoencoder, TrainHistory]:
    """Train ``model`` to reconstruct ``x`` with mini-batch Adam.

    The rows of ``x`` are shuffled once (seeded); the tail
    ``validation_fraction`` of that shuffle is held out and its loss
    monitored for early stopping.  After every epoch the full training and
    holdout losses are recorded.  When training ends, parameters are
    restored to the epoch with the best monitored loss.  The whole run is a
    deterministic function of (model, x, config).

    Args:
        model: Network to train, modified in place.
        x: Training rows, already scaled to the range the output activation
            can produce.
        config: Hyperparameters.

    Returns:
        (model, history); ``model`` is the same object, holding the
        best-epoch parameters.

    Raises:
        DegenerateInputError: If no training rows remain after the holdout.
        DivergenceError: If a non-finite loss appears; the message names the
            epoch.
        ParameterError: If the config is invalid.
    """
    config.validate()
    x = as_matrix(x, "x")
    n = x.shape[0]
    if n == 0:
        raise DegenerateInputError("cannot train on an empty matrix")

    rng = np.random.default_rng(config.seed)
    carve = rng.permutation(n)
    n_val = 0
    if config.validation_fraction > 0.0:
        n_val = max(1, int(n * config.validation_fraction))
    if n - n_val < 1:
        raise DegenerateInputError(
            f"{n} rows leave no training data after holding out {n_val} "
            "validation rows"
        )
    train_rows = x[carve[: n - n_val]]
    val_rows = x[carve[n - n_val :]]

    params = trainable_params(model.layers)
    state = init_adam(params)
    stopper = EarlyStopping(config.patience, config.min_delta)
    history = TrainHistory()
    best_snapshot = [p.copy() for p in params]

    n_train = train_rows.shape[0]
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n_train)
        for start in range(0, n_train, config.batch_size):
            batch = train_rows[order[start : start + config.batch_size]]
            cache = forward(model.layers, batch)
            grads = flatten_grads(backward(model.layers, cache, batch, config.loss))
            adam_step(params, grads, state, config.learning_rate)

        out_train = reconstruction(model.layers, train_rows)
        if not np.isfinite(out_train).all():
            raise DivergenceError(
                f"training diverged at epoch {epoch}: non-finite reconstruction"
            )
        train_loss = mean_loss(train_rows, out_train, config.loss)
        if n_val:
            out_val = reconstruction(model.layers, val_rows)
            if not np.isfinite(out_val).all():
                raise DivergenceError(
                    f"training diverged at epoch {epoch}: non-finite reconstruction"
                )
            monitored = mean_loss(val_rows, out_val, config.loss)
        else:
            monitored = train_loss
        history.train_losses.append(train_loss)
        history.val_losses.append(monitored)
        history.epochs_run = epoch
        if not (np.isfinite(train_loss) and np.isfinite(monitored)):
            raise DivergenceError(
                f"training diverged at epoch {epoch}: "
                f"train loss {train_loss}, monitored loss {monitored}"
            )

        stop = stopper.update(monitored, epoch)
        if stopper.improved:
            best_snapshot = [p.copy() for p in params]
        if stop:
            logger.debug("early stop at epoch %d (best %d)", epoch, stopper.best_epoch)
            break

    for p, best in zip(params, best_snapshot):
        p[:] = best
    history.best_epoch = stopper.best_epoch
    return model, history


def score(model: Autoencoder, x: np.ndarray, kind: str = "mae") -> np.ndarray:
    """Per-row reconstruction loss of ``x`` under ``model``.

    Scores are row-local: each row's score depends on that row alone, so
    permuting input rows permutes the scores identically.
    """
    x = as_matrix(x, "x")
    return row_losses(x, reconstruction(model.layers, x), kind)


class AutoencoderDetector(BaseEstimator):
    """Anomaly detector scoring rows by autoencoder reconstruction loss.

    Fit on normal rows only, pre-scaled to match the output activation's
    range (for the default sigmoid output, min-max scaled to [0, 1]).
    Higher scores mean more anomalous.

    Attributes set by :meth:`fit`:
        model_: The trained Autoencoder.
        history_: TrainHistory of the run.
        n_features_in_: Number of feature columns seen at fit.
    """

    def __init__(
        self,
        hidden_widths: tuple[int, ...] = (16,),
        bottleneck: int = 8,
        hidden_activation: str = "relu",
        output_activation: str = "sigmoid",
        loss: str = "mae",
        learning_rate: float = 1e-3,
        epochs: int = 100,
        batch_size: int = 32,
        patience: int = 10,
        min_delta: float = 0.0,
        validation_fraction: float = 0.1,
        seed: int = 0,
    ) -> None:
        self.hidden_widths = hidden_widths
        self.bottleneck = bottleneck
        self.hidden_activation = hidden_activation
        self.output_activation = output_activation
        self.loss = loss
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.patience = patience
        self.min_delta = min_delta
        self.validation_fraction = validation_fraction
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            patience=self.patience,
            min_delta=self.min_delta,
            seed=self.seed,
            loss=self.loss,
            validation_fraction=self.validation_fraction,
        )

    def fit(self, X, y=None) -> "AutoencoderDetector":
        """Build a fresh network and train it to reconstruct ``X``."""
        X = as_matrix(X, "X")
        model = build_autoencoder(
            input_dim=X.shape[1],
            hidden_widths=tuple(self.hidden_widths),
            bottleneck=self.bottleneck,
            hidden_activation=self.hidden_activation,
            output_activation=self.output_activation,
            seed=self.seed,
        )
        self.model_, self.history_ = train(model, X, self._config())
        self.n_features_in_ = X.shape[1]
        return self

    def score(self, X) -> np.ndarray:
        """Anomaly scores (per-row reconstruction loss) for ``X``."""
        if not hasattr(self, "model_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")
        return score(self.model_, X, self.loss)
