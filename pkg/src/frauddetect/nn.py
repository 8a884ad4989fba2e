"""Dense feed-forward primitives: layers, losses, backprop and Adam.

The layers are plain numpy; the backward pass is the hand-derived chain rule
for a stack of affine maps with elementwise activations.  Losses are means
over every entry of the batch, so gradients carry a 1 / (rows * columns)
factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CacheError, ParameterError, ShapeError
from .linalg import as_matrix

ACTIVATIONS = ("relu", "sigmoid", "linear")
LOSSES = ("mae", "mse")


def activation_forward(tag: str, z: np.ndarray) -> np.ndarray:
    """Apply the activation named ``tag`` elementwise to ``z``."""
    if tag == "relu":
        return np.maximum(z, 0.0)
    if tag == "sigmoid":
        # Split by sign so exp never overflows.
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if tag == "linear":
        return z.copy()
    raise ParameterError(f"unknown activation {tag!r}, expected one of {ACTIVATIONS}")


def activation_gradient(tag: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Elementwise derivative of the activation given inputs ``z`` and outputs ``a``.

    The relu derivative at exactly 0 is taken as 0.
    """
    if tag == "relu":
        return (z > 0.0).astype(np.float64)
    if tag == "sigmoid":
        return a * (1.0 - a)
    if tag == "linear":
        return np.ones_like(z)
    raise ParameterError(f"unknown activation {tag!r}, expected one of {ACTIVATIONS}")


@dataclass
class DenseLayer:
    """Fully connected layer computing ``activation(x @ weights.T + bias)``.

    Attributes:
        weights: Matrix of shape (out_dim, in_dim).
        bias: Vector of shape (out_dim,).
        activation: One of ``ACTIVATIONS``.
    """

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self) -> None:
        self.weights = as_matrix(self.weights, "weights")
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.bias.shape != (self.weights.shape[0],):
            raise ShapeError(
                f"bias shape {self.bias.shape} does not match "
                f"{self.weights.shape[0]} output units"
            )
        if self.activation not in ACTIVATIONS:
            raise ParameterError(
                f"unknown activation {self.activation!r}, expected one of {ACTIVATIONS}"
            )

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


def glorot_uniform(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    """Weight matrix drawn from U[-a, a] with a = sqrt(6 / (in + out))."""
    limit = float(np.sqrt(6.0 / (in_dim + out_dim)))
    return rng.uniform(-limit, limit, size=(out_dim, in_dim))


@dataclass
class ForwardCache:
    """Intermediate values of one forward pass, consumed by ``backward``."""

    batch: np.ndarray
    pre_activations: list[np.ndarray] = field(default_factory=list)
    activations: list[np.ndarray] = field(default_factory=list)

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


def forward(layers: list[DenseLayer], x: np.ndarray) -> ForwardCache:
    """Run ``x`` through ``layers`` and keep every intermediate value.

    Args:
        layers: Layer stack; each layer's in_dim must match the previous
            layer's out_dim.
        x: Batch of shape (n_rows, layers[0].in_dim).

    Returns:
        ForwardCache whose ``output`` is the final activation.

    Raises:
        ShapeError: If ``x`` or a layer boundary has mismatched widths.
    """
    x = as_matrix(x, "x")
    cache = ForwardCache(batch=x)
    current = x
    for i, layer in enumerate(layers):
        if current.shape[1] != layer.in_dim:
            raise ShapeError(
                f"layer {i} expects {layer.in_dim} inputs, got {current.shape[1]}"
            )
        z = current @ layer.weights.T + layer.bias
        a = activation_forward(layer.activation, z)
        cache.pre_activations.append(z)
        cache.activations.append(a)
        current = a
    return cache


def reconstruction(layers: list[DenseLayer], x: np.ndarray) -> np.ndarray:
    """Final output of the stack without keeping intermediates."""
    return forward(layers, x).output


def mean_loss(target: np.ndarray, output: np.ndarray, kind: str) -> float:
    """Mean absolute or mean squared error over every entry of the batch."""
    diff = _loss_diff(target, output, kind)
    if kind == "mae":
        return float(np.mean(np.abs(diff)))
    return float(np.mean(diff * diff))


def row_losses(target: np.ndarray, output: np.ndarray, kind: str) -> np.ndarray:
    """Per-row mean absolute or squared error; row i depends on row i only."""
    diff = _loss_diff(target, output, kind)
    if kind == "mae":
        return np.mean(np.abs(diff), axis=1)
    return np.mean(diff * diff, axis=1)


def _loss_diff(target: np.ndarray, output: np.ndarray, kind: str) -> np.ndarray:
    if kind not in LOSSES:
        raise ParameterError(f"unknown loss {kind!r}, expected one of {LOSSES}")
    target = as_matrix(target, "target")
    output = as_matrix(output, "output")
    if target.shape != output.shape:
        raise ShapeError(
            f"target shape {target.shape} does not match output shape {output.shape}"
        )
    if target.shape[0] == 0:
        raise ShapeError("loss of an empty batch is undefined")
    return output - target


@dataclass
class LayerGrads:
    """Gradients of the loss for one layer's parameters."""

    weights: np.ndarray
    bias: np.ndarray


def backward(
    layers: list[DenseLayer],
    cache: ForwardCache,
    target: np.ndarray,
    kind: str,
) -> list[LayerGrads]:
    """Exact gradients of ``mean_loss(target, output, kind)`` for every layer.

    For the mae loss the subgradient at a zero residual is taken as 0.

    Args:
        layers: The stack that produced ``cache``.
        cache: Forward cache of the batch being trained on.
        target: Reconstruction target, same shape as the cache output.
        kind: "mae" or "mse".

    Returns:
        One ``LayerGrads`` per layer, in layer order.

    Raises:
        CacheError: If ``cache`` does not match ``layers`` or ``target``'s
            batch, e.g. when replayed against a different batch.
    """
    if kind not in LOSSES:
        raise ParameterError(f"unknown loss {kind!r}, expected one of {LOSSES}")
    target = as_matrix(target, "target")
    if len(cache.activations) != len(layers) or len(cache.pre_activations) != len(layers):
        raise CacheError(
            f"cache holds {len(cache.activations)} layers, model has {len(layers)}"
        )
    output = cache.output
    if output.shape != target.shape:
        raise CacheError(
            f"cache output shape {output.shape} does not match target {target.shape}"
        )
    for i, layer in enumerate(layers):
        if cache.pre_activations[i].shape[1] != layer.out_dim:
            raise CacheError(
                f"cache layer {i} width {cache.pre_activations[i].shape[1]} "
                f"does not match model width {layer.out_dim}"
            )

    n_entries = target.shape[0] * target.shape[1]
    diff = output - target
    if kind == "mae":
        upstream = np.sign(diff) / n_entries
    else:
        upstream = 2.0 * diff / n_entries

    grads: list[LayerGrads] = [None] * len(layers)  # type: ignore[list-item]
    for i in range(len(layers) - 1, -1, -1):
        layer = layers[i]
        z = cache.pre_activations[i]
        a = cache.activations[i]
        delta = upstream * activation_gradient(layer.activation, z, a)
        below = cache.activations[i - 1] if i > 0 else cache.batch
        grads[i] = LayerGrads(
            weights=delta.T @ below,
            bias=delta.sum(axis=0),
        )
        if i > 0:
            upstream = delta @ layer.weights
    return grads


def trainable_params(layers: list[DenseLayer]) -> list[np.ndarray]:
    """References to all parameter arrays, ordered [W0, b0, W1, b1, ...]."""
    params: list[np.ndarray] = []
    for layer in layers:
        params.append(layer.weights)
        params.append(layer.bias)
    return params


def flatten_grads(grads: list[LayerGrads]) -> list[np.ndarray]:
    """Gradient arrays in the same order as ``trainable_params``."""
    flat: list[np.ndarray] = []
    for g in grads:
        flat.append(g.weights)
        flat.append(g.bias)
    return flat


@dataclass
class AdamState:
    """First/second moment accumulators for one parameter list."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(
    params: list[np.ndarray],
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """Fresh all-zero Adam state shaped like ``params``."""
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        t=0,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    learning_rate: float,
) -> list[np.ndarray]:
    """One Adam update, in place, following the standard iteration exactly.

    With t incremented first and c1 = 1 - beta1**t, c2 = 1 - beta2**t:

        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * (g * g)
        p = p - lr * (m / c1) / (sqrt(v / c2) + eps)

    The expressions are evaluated in exactly this form, so an independent
    implementation of the same iteration reproduces the trajectory bit for
    bit.

    Returns:
        ``params``, updated in place.

    Raises:
        ShapeError: If ``grads`` does not mirror ``params``.
    """
    if len(params) != len(grads):
        raise ShapeError(
            f"{len(grads)} gradients for {len(params)} parameter arrays"
        )
    state.t += 1
    c1 = 1.0 - state.beta1 ** state.t
    c2 = 1.0 - state.beta2 ** state.t
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ShapeError(
                f"gradient {i} has shape {g.shape}, parameter has {p.shape}"
            )
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * (g * g)
        p -= learning_rate * (state.m[i] / c1) / (np.sqrt(state.v[i] / c2) + state.eps)
    return params
