"""Layer arithmetic and exact reverse-mode input gradients.

Everything here is a pure function with a pinned floating-point order:
affine maps and dot products go through the kernel backend (left-to-right
accumulation), elementwise activations through shared numpy code, so the
same inputs produce bit-identical outputs on every run and backend.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DataError, ParameterError, ShapeError
from .metrics import MetricSpec, distance, distance_gradient

ACTIVATION_KINDS = ("relu", "sigmoid", "softmax", "identity")

DIRECTION_NORM_TOL = 1e-9


def as_vector(values, what="vector"):
    """Validate and freeze a 1-D float64 vector (finite, immutable)."""
    v = np.array(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ShapeError(f"{what} must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(v)):
        raise DataError(f"{what} contains non-finite values")
    v.flags.writeable = False
    return v


def as_matrix(values, rows=None, cols=None, what="matrix"):
    """Validate and freeze a 2-D float64 matrix."""
    m = np.array(values, dtype=np.float64)
    if rows is not None and cols is not None:
        m = m.reshape(rows, cols)
    if m.ndim != 2 or m.size == 0:
        raise ShapeError(f"{what} must be a nonempty 2-D array")
    if not np.all(np.isfinite(m)):
        raise DataError(f"{what} contains non-finite values")
    m.flags.writeable = False
    return m


def affine_forward(weights, bias, x):
    """W x + b; shape-checked entry point over the kernel."""
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    bias = np.ascontiguousarray(bias, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if weights.ndim != 2:
        raise ShapeError("weights must be 2-D")
    if weights.shape[1] != x.shape[0]:
        raise ShapeError(f"weights cols {weights.shape[1]} != input length {x.shape[0]}")
    if bias.shape[0] != weights.shape[0]:
        raise ShapeError(f"bias length {bias.shape[0]} != weights rows {weights.shape[0]}")
    return kernels.affine_forward(weights, bias, x)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z):
    # max-subtraction for overflow safety; normalization uses the pinned
    # left-to-right sum so both kernel backends agree bit for bit
    shifted = np.exp(z - np.max(z, axis=-1, keepdims=True))
    total = np.cumsum(shifted, axis=-1)[..., -1:]
    return shifted / total


def activation_forward(kind, z):
    """Elementwise relu/sigmoid, or a stable softmax over the vector."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise ShapeError("activation input must be a nonempty vector")
    return apply_activation(kind, z)


def apply_activation(kind, z):
    # shared with batched paths: softmax normalizes the last axis
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        return _sigmoid(z)
    if kind == "softmax":
        return _softmax(z)
    if kind == "identity":
        return z.copy() if isinstance(z, np.ndarray) else np.asarray(z, dtype=np.float64)
    raise ParameterError(f"unknown activation kind {kind!r}")


def activation_vjp(kind, z, post, grad_post):
    """Gradient w.r.t. pre-activation z given the gradient at the output.

    relu's subgradient at exactly 0 is pinned to 0.
    """
    if kind == "relu":
        return grad_post * (z > 0.0)
    if kind == "sigmoid":
        return grad_post * post * (1.0 - post)
    if kind == "softmax":
        return post * (grad_post - kernels.dot(grad_post, post))
    if kind == "identity":
        return grad_post
    raise ParameterError(f"unknown activation kind {kind!r}")


@dataclass(frozen=True, eq=False)
class ScalarObjective:
    """A differentiable scalar function of a network input.

    Kinds: "class_prob" (output-class probability), "hidden_unit"
    (single unit's post-activation), "direction" (dot of a layer's
    activations with a unit-norm direction), and "penalty"
    (lam * (p_target - target_prob)^2 + d(anchor, x), the soft form of
    the constrained search).
    """

    kind: str
    class_index: int = 0
    layer: int = -1
    unit: int = -1
    direction: np.ndarray | None = None
    target_prob: float = 0.0
    lam: float = 0.0
    metric: MetricSpec | None = None
    anchor: np.ndarray | None = None

    @classmethod
    def class_probability(cls, class_index):
        return cls("class_prob", class_index=int(class_index))

    @classmethod
    def hidden_unit(cls, layer, unit):
        return cls("hidden_unit", layer=int(layer), unit=int(unit))

    @classmethod
    def direction_activation(cls, layer, direction):
        direction = np.ascontiguousarray(direction, dtype=np.float64)
        norm = np.sqrt(kernels.ordered_sum(direction * direction))
        if abs(norm - 1.0) > DIRECTION_NORM_TOL:
            raise ParameterError(f"direction must have unit norm, got {norm!r}")
        return cls("direction", layer=int(layer), direction=direction)

    @classmethod
    def penalty(cls, class_index, target_prob, lam, metric, anchor):
        if lam < 0:
            raise ParameterError("penalty weight lam must be nonnegative")
        return cls(
            "penalty",
            class_index=int(class_index),
            target_prob=float(target_prob),
            lam=float(lam),
            metric=metric,
            anchor=np.ascontiguousarray(anchor, dtype=np.float64),
        )


def _layers_of(net):
    return getattr(net, "layers", net)


def run_layers(layers, x):
    """Forward pass: per-layer (pre-activation, post-activation) lists."""
    pres, posts = [], []
    a = np.ascontiguousarray(x, dtype=np.float64)
    for layer in layers:
        if layer.weights.shape[1] != a.shape[0]:
            raise ShapeError(
                f"layer expects width {layer.weights.shape[1]}, got {a.shape[0]}"
            )
        z = kernels.affine_forward(layer.weights, layer.bias, a)
        a = apply_activation(layer.activation, z)
        pres.append(z)
        posts.append(a)
    return pres, posts


def output_probabilities(layers, posts):
    """Class distribution from the final layer (softmax, or [1-s, s])."""
    last = layers[-1]
    out = posts[-1]
    if last.activation == "softmax":
        return out
    if last.activation == "sigmoid" and out.shape[0] == 1:
        return np.array([1.0 - out[0], out[0]])
    raise DataError("output layer must be softmax or a width-1 sigmoid")


def _class_count(layers):
    last = layers[-1]
    if last.activation == "sigmoid" and last.weights.shape[0] == 1:
        return 2
    return last.weights.shape[0]


def _check_objective(layers, obj):
    n_layers = len(layers)
    if obj.kind == "class_prob" or obj.kind == "penalty":
        if not 0 <= obj.class_index < _class_count(layers):
            raise IndexError(f"class index {obj.class_index} out of range")
    elif obj.kind == "hidden_unit":
        if not 0 <= obj.layer < n_layers:
            raise IndexError(f"layer index {obj.layer} out of range")
        if not 0 <= obj.unit < layers[obj.layer].weights.shape[0]:
            raise IndexError(f"unit index {obj.unit} out of range")
    elif obj.kind == "direction":
        if not 0 <= obj.layer < n_layers:
            raise IndexError(f"layer index {obj.layer} out of range")
        if obj.direction.shape[0] != layers[obj.layer].weights.shape[0]:
            raise ShapeError("direction length does not match layer width")
    else:
        raise ParameterError(f"unknown objective kind {obj.kind!r}")


def objective_value(net, x, obj) -> float:
    """Evaluate the scalar objective at x."""
    layers = _layers_of(net)
    _check_objective(layers, obj)
    pres, posts = run_layers(layers, x)
    if obj.kind == "class_prob":
        return float(output_probabilities(layers, posts)[obj.class_index])
    if obj.kind == "hidden_unit":
        return float(posts[obj.layer][obj.unit])
    if obj.kind == "direction":
        return kernels.dot(posts[obj.layer], obj.direction)
    p = float(output_probabilities(layers, posts)[obj.class_index])
    gap = p - obj.target_prob
    return obj.lam * gap * gap + distance(obj.metric, obj.anchor, x)


def _backprop_to_input(layers, pres, posts, grad, start_layer, at_pre):
    """Walk the layer stack top-down accumulating d(scalar)/d(input)."""
    g = grad
    for idx in range(start_layer, -1, -1):
        if not at_pre:
            g = activation_vjp(layers[idx].activation, pres[idx], posts[idx], g)
        at_pre = False
        g = kernels.matvec_transpose(layers[idx].weights, np.ascontiguousarray(g))
    return g


def _class_prob_grad_pre(layers, pres, posts, class_index):
    last = layers[-1]
    out = posts[-1]
    if last.activation == "softmax":
        p_c = out[class_index]
        g = -out * p_c
        g[class_index] = p_c * (1.0 - p_c)
        return g
    s = out[0]
    slope = s * (1.0 - s)
    return np.array([slope if class_index == 1 else -slope])


def grad_wrt_input(net, x, obj) -> np.ndarray:
    """Exact d(objective)/d(x) by reverse-mode accumulation."""
    layers = _layers_of(net)
    _check_objective(layers, obj)
    pres, posts = run_layers(layers, x)
    last = len(layers) - 1
    if obj.kind == "class_prob":
        g_pre = _class_prob_grad_pre(layers, pres, posts, obj.class_index)
        return _backprop_to_input(layers, pres, posts, g_pre, last, at_pre=True)
    if obj.kind == "hidden_unit":
        seed = np.zeros(posts[obj.layer].shape[0])
        seed[obj.unit] = 1.0
        return _backprop_to_input(layers, pres, posts, seed, obj.layer, at_pre=False)
    if obj.kind == "direction":
        return _backprop_to_input(
            layers, pres, posts, obj.direction.copy(), obj.layer, at_pre=False
        )
    # penalty: 2 lam (p - p') dp/dx + metric subgradient
    x = np.asarray(x, dtype=np.float64)
    p = float(output_probabilities(layers, posts)[obj.class_index])
    g_pre = _class_prob_grad_pre(layers, pres, posts, obj.class_index)
    dp_dx = _backprop_to_input(layers, pres, posts, g_pre, last, at_pre=True)
    return 2.0 * obj.lam * (p - obj.target_prob) * dp_dx + distance_gradient(
        obj.metric, obj.anchor, x
    )


def finite_difference_gradient(net, x, obj, h=1e-5) -> np.ndarray:
    """Central-difference gradient oracle: (f(x+h e_i) - f(x-h e_i)) / 2h."""
    if h <= 0:
        raise ParameterError("finite-difference step h must be positive")
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        bumped = x.copy()
        bumped[i] = x[i] + h
        up = objective_value(net, bumped, obj)
        bumped[i] = x[i] - h
        down = objective_value(net, bumped, obj)
        grad[i] = (up - down) / (2.0 * h)
    return grad
