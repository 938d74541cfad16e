"""Dense feed-forward network with ReLU, MSE loss, backprop and Adam, in numpy.

Weights are stored ``(out, in)`` so a layer maps a ``(batch, in)`` input to
``inputs @ W.T + b``. Everything is float64.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from classical_limit import _random
from classical_limit.dynamics import TimeGrid
from classical_limit.validation import ValidationError, check_finite_array, check_positive_int

FORMAT_VERSION = 1
ACTIVATIONS = ("relu", "identity")

# Defaults of the reference framework's Adam; epsilon differs from the 1e-8 of the original Adam paper.
ADAM_DEFAULTS = {"alpha": 0.001, "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-7}


@dataclass
class DenseLayer:
    weights: np.ndarray
    biases: np.ndarray
    activation: str = "identity"

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64, ndmin=2)
        self.biases = np.array(self.biases, dtype=np.float64).ravel()
        if self.weights.ndim != 2:
            raise ValidationError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.biases.size != self.weights.shape[0]:
            raise ValidationError(
                f"bias length {self.biases.size} != weight rows {self.weights.shape[0]}"
            )
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")

    @property
    def n_in(self):
        return self.weights.shape[1]

    @property
    def n_out(self):
        return self.weights.shape[0]


class Mlp:
    """Ordered stack of dense layers.

    ``time_grid`` is the grid the outputs are sampled on, when the network
    predicts trajectories. ``version`` increases on every optimizer update and
    is used to reject stale forward caches.
    """

    def __init__(self, layers, time_grid=None):
        layers = list(layers)
        if not layers:
            raise ValidationError("an Mlp needs at least one layer")
        for k in range(1, len(layers)):
            if layers[k].n_in != layers[k - 1].n_out:
                raise ValidationError(
                    f"layer {k} takes {layers[k].n_in} inputs but layer {k - 1} "
                    f"produces {layers[k - 1].n_out}"
                )
        if time_grid is not None and not isinstance(time_grid, TimeGrid):
            time_grid = TimeGrid(time_grid)
        if time_grid is not None and len(time_grid) != layers[-1].n_out:
            raise ValidationError(
                f"time grid has {len(time_grid)} points but the output layer has {layers[-1].n_out} units"
            )
        self.layers = layers
        self.time_grid = time_grid
        self.version = 0

    @property
    def dims(self):
        return [self.layers[0].n_in] + [layer.n_out for layer in self.layers]

    @property
    def activations(self):
        return [layer.activation for layer in self.layers]

    def parameters(self):
        """Parameter arrays in ``[W0, b0, W1, b1, ...]`` order (live references)."""
        out = []
        for layer in self.layers:
            out += [layer.weights, layer.biases]
        return out

    def n_parameters(self):
        return sum(p.size for p in self.parameters())

    def copy(self):
        layers = [DenseLayer(l.weights.copy(), l.biases.copy(), l.activation) for l in self.layers]
        return Mlp(layers, self.time_grid)

    def __repr__(self):
        return f"Mlp(dims={self.dims}, activations={self.activations})"


def init(layer_dims, activations, seed, time_grid=None):
    """Glorot-uniform weights in ``[-L, L]`` with ``L = sqrt(6 / (fan_in + fan_out))``, zero biases."""
    dims = [check_positive_int(d, "layer dim") for d in layer_dims]
    activations = list(activations)
    if len(dims) < 2:
        raise ValidationError("layer_dims needs at least an input and an output size")
    if len(activations) != len(dims) - 1:
        raise ValidationError(
            f"got {len(activations)} activations for {len(dims) - 1} layers"
        )
    rng = _random.substream(seed, _random.INIT_STREAM)
    layers = []
    for fan_in, fan_out, act in zip(dims[:-1], dims[1:], activations):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append(DenseLayer(w, np.zeros(fan_out), act))
    return Mlp(layers, time_grid)


@dataclass
class ForwardCache:
    inputs: list
    preacts: list
    owner: int
    version: int


def forward(mlp, inputs):
    """Return ``(outputs, cache)`` for a ``(batch, in)`` input matrix."""
    a = np.asarray(inputs, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] != mlp.layers[0].n_in:
        raise ValidationError(
            f"input has shape {a.shape}, expected (batch, {mlp.layers[0].n_in})"
        )
    layer_inputs, preacts = [], []
    for layer in mlp.layers:
        layer_inputs.append(a)
        z = a @ layer.weights.T + layer.biases
        preacts.append(z)
        a = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return a, ForwardCache(layer_inputs, preacts, id(mlp), mlp.version)


def predict(mlp, inputs):
    return forward(mlp, inputs)[0]


def mse_loss(pred, target):
    """Mean squared error over every entry, and its gradient w.r.t. ``pred``."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValidationError(f"pred shape {pred.shape} != target shape {target.shape}")
    if pred.size == 0:
        raise ValidationError("mse_loss of an empty batch")
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


@dataclass
class Gradients:
    weights: list
    biases: list

    def flat(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out


def backward(mlp, cache, loss_grad):
    """Reverse-mode gradients of the loss for every weight and bias.

    The ReLU derivative at exactly zero is taken as 0.
    """
    if cache.owner != id(mlp) or cache.version != mlp.version or len(cache.preacts) != len(mlp.layers):
        raise ValidationError("forward cache does not belong to this network state")
    delta = np.asarray(loss_grad, dtype=np.float64)
    if delta.shape != cache.preacts[-1].shape:
        raise ValidationError(
            f"loss gradient shape {delta.shape} != output shape {cache.preacts[-1].shape}"
        )
    grad_w = [None] * len(mlp.layers)
    grad_b = [None] * len(mlp.layers)
    for k in range(len(mlp.layers) - 1, -1, -1):
        layer = mlp.layers[k]
        if layer.activation == "relu":
            delta = delta * (cache.preacts[k] > 0.0)
        grad_w[k] = delta.T @ cache.inputs[k]
        grad_b[k] = delta.sum(axis=0)
        if k:
            delta = delta @ layer.weights
    return Gradients(grad_w, grad_b)


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0
    alpha: float = ADAM_DEFAULTS["alpha"]
    beta1: float = ADAM_DEFAULTS["beta1"]
    beta2: float = ADAM_DEFAULTS["beta2"]
    epsilon: float = ADAM_DEFAULTS["epsilon"]

    @classmethod
    def zeros_like(cls, mlp, **hyper):
        params = mlp.parameters()
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], **hyper)

    def hyperparameters(self):
        return {"alpha": self.alpha, "beta1": self.beta1, "beta2": self.beta2, "epsilon": self.epsilon}


def adam_step(mlp, grads, state):
    """One bias-corrected Adam update, applied in place. Returns ``(mlp, state)``."""
    params = mlp.parameters()
    flat = grads.flat()
    if len(flat) != len(params) or len(state.m) != len(params):
        raise ValidationError("gradient/state structure does not match the network")
    for p, g, m in zip(params, flat, state.m):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValidationError(f"shape mismatch: parameter {p.shape}, gradient {g.shape}, moment {m.shape}")

    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, flat, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= state.alpha * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
    mlp.version += 1
    return mlp, state


def save_checkpoint(mlp, metadata, path):
    """Write the network as JSON. Float ``repr`` keeps every value exact."""
    if mlp.time_grid is None:
        raise ValidationError("cannot checkpoint a network without a time grid")
    doc = {
        "format_version": FORMAT_VERSION,
        "dims": mlp.dims,
        "activations": mlp.activations,
        "weights": [layer.weights.tolist() for layer in mlp.layers],
        "biases": [layer.biases.tolist() for layer in mlp.layers],
        "time_grid": mlp.time_grid.points.tolist(),
        "metadata": metadata or {},
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")


def _require(doc, key):
    if key not in doc:
        raise ValidationError(f"checkpoint is missing field '{key}'")
    return doc[key]


def load_checkpoint(path):
    """Return ``(mlp, metadata)``; every field is checked against ``dims``."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed checkpoint ({exc})") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: checkpoint must be a JSON object")
    version = _require(doc, "format_version")
    if version != FORMAT_VERSION:
        raise ValidationError(f"field 'format_version': unsupported value {version!r}")
    dims = _require(doc, "dims")
    activations = _require(doc, "activations")
    weights = _require(doc, "weights")
    biases = _require(doc, "biases")
    grid_points = _require(doc, "time_grid")
    n_layers = len(dims) - 1
    if n_layers < 1 or len(activations) != n_layers:
        raise ValidationError(f"field 'dims': {dims} does not match {len(activations)} activations")
    if len(weights) != n_layers or len(biases) != n_layers:
        raise ValidationError(f"field 'dims': {dims} implies {n_layers} layers, weights/biases disagree")

    layers = []
    for k in range(n_layers):
        w = check_finite_array(weights[k], f"weights[{k}]")
        b = check_finite_array(biases[k], f"biases[{k}]")
        if w.shape != (dims[k + 1], dims[k]):
            raise ValidationError(f"field 'dims': weights[{k}] has shape {w.shape}, dims imply {(dims[k + 1], dims[k])}")
        if b.shape != (dims[k + 1],):
            raise ValidationError(f"field 'dims': biases[{k}] has length {b.size}, dims imply {dims[k + 1]}")
        layers.append(DenseLayer(w, b, activations[k]))
    try:
        grid = TimeGrid(grid_points)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"field 'time_grid': {exc}") from None
    if len(grid) != dims[-1]:
        raise ValidationError(f"field 'time_grid': {len(grid)} points but output dim is {dims[-1]}")
    return Mlp(layers, grid), doc.get("metadata", {})
