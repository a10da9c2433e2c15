"""Feedforward classifier: definition, forward trace, training, I/O.

Binary models end in a single sigmoid unit (two class labels), multiclass
models in a softmax layer. Networks are immutable after construction;
training returns a new network. The model file is JSON with every number
written to 17 significant digits so a save/load round trip is bit-exact.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import kernels, numerics
from .errors import DataError, ParameterError, ParseError, ShapeError
from .numerics import apply_activation, as_matrix, as_vector, run_layers

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LayerSpec:
    """One affine map plus activation."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        object.__setattr__(self, "weights", as_matrix(self.weights, what="layer weights"))
        object.__setattr__(self, "bias", as_vector(self.bias, what="layer bias"))
        if self.activation not in numerics.ACTIVATION_KINDS:
            raise ParameterError(f"unknown activation {self.activation!r}")
        if self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError(
                f"bias length {self.bias.shape[0]} != weight rows {self.weights.shape[0]}"
            )

    @property
    def width(self):
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class Network:
    """Layer stack with class labels; the classifier under explanation."""

    layers: tuple
    input_width: int
    class_labels: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        labels = tuple(str(c) for c in self.class_labels)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "class_labels", labels)
        if not layers:
            raise ShapeError("network needs at least one layer")
        expected = self.input_width
        for i, layer in enumerate(layers):
            if layer.weights.shape[1] != expected:
                raise ShapeError(
                    f"layer {i} expects input width {layer.weights.shape[1]}, got {expected}"
                )
            expected = layer.width
        last = layers[-1]
        if last.activation == "softmax":
            n_classes = last.width
        elif last.activation == "sigmoid" and last.width == 1:
            n_classes = 2
        else:
            raise ParameterError(
                "final layer must be softmax or a width-1 sigmoid"
            )
        if len(labels) != n_classes:
            raise ShapeError(
                f"{len(labels)} class labels for {n_classes} classes"
            )

    @property
    def is_binary(self):
        return self.layers[-1].activation == "sigmoid"

    @property
    def n_classes(self):
        return len(self.class_labels)

    @property
    def n_layers(self):
        return len(self.layers)

    def layer_width(self, index):
        return self.layers[index].width


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    """Per-layer post-activations, final logits, class probabilities."""

    post_activations: tuple
    logits: np.ndarray
    probabilities: np.ndarray


@dataclass(frozen=True, eq=False)
class Dataset:
    """Row matrix with integer class labels and optional feature names."""

    rows: np.ndarray
    labels: np.ndarray
    feature_names: tuple | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if rows.ndim != 2:
            raise ShapeError("dataset rows must form a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != rows.shape[0]:
            raise ShapeError("labels must align 1:1 with rows")
        if not np.all(np.isfinite(rows)):
            raise DataError("dataset contains non-finite values")
        if labels.size and labels.min() < 0:
            raise DataError("labels must be nonnegative class indices")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self):
        return self.rows.shape[0]


def forward(net: Network, x) -> ForwardTrace:
    """Full forward pass with per-layer trace."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.input_width:
        raise ShapeError(f"input must have width {net.input_width}")
    pres, posts = run_layers(net.layers, x)
    probs = numerics.output_probabilities(net.layers, posts)
    return ForwardTrace(
        post_activations=tuple(posts), logits=pres[-1], probabilities=probs
    )


def _predict_from_sigmoid(s):
    # class 1 iff p >= 0.5, pinned boundary rule
    return 1 if s >= 0.5 else 0


def predict(net: Network, x):
    """(class index, label); argmax with lowest-index tie-break."""
    trace = forward(net, x)
    if net.is_binary:
        idx = _predict_from_sigmoid(trace.post_activations[-1][0])
    else:
        idx = int(np.argmax(trace.probabilities))
    return idx, net.class_labels[idx]


def forward_probs_batch(net: Network, xs) -> np.ndarray:
    """Class probabilities for many rows at once; same math as forward."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != net.input_width:
        raise ShapeError(f"rows must have width {net.input_width}")
    a = xs
    for layer in net.layers:
        z = kernels.affine_forward_batch(layer.weights, layer.bias, a)
        a = np.ascontiguousarray(apply_activation(layer.activation, z))
    if net.is_binary:
        s = a[:, 0]
        return np.column_stack([1.0 - s, s])
    return a


def layer_activations_batch(net: Network, xs, layer) -> np.ndarray:
    """Post-activations of one layer for many rows."""
    if not 0 <= layer < net.n_layers:
        raise IndexError(f"layer index {layer} out of range")
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    a = xs
    for spec in net.layers[: layer + 1]:
        z = kernels.affine_forward_batch(spec.weights, spec.bias, a)
        a = np.ascontiguousarray(apply_activation(spec.activation, z))
    return a


def predict_batch(net: Network, xs):
    """(probabilities, class indices) for many rows."""
    probs = forward_probs_batch(net, xs)
    if net.is_binary:
        classes = (probs[:, 1] >= 0.5).astype(np.int64)
    else:
        classes = np.argmax(probs, axis=1).astype(np.int64)
    return probs, classes


class LayerStack:
    """Prefix of a network: maps inputs to one hidden layer's activations."""

    def __init__(self, layers):
        self.layers = tuple(layers)

    def apply(self, x):
        _, posts = run_layers(self.layers, np.ascontiguousarray(x, dtype=np.float64))
        return posts[-1]


def split_at_layer(net: Network, layer):
    """(head, tail) with tail(head(x)) identical to forward(net, x).

    The tail is a real Network over the activation space of ``layer``.
    """
    if not 0 <= layer < net.n_layers - 1:
        raise IndexError(
            f"split layer must be in [0, {net.n_layers - 2}], got {layer}"
        )
    head = LayerStack(net.layers[: layer + 1])
    tail = Network(
        layers=net.layers[layer + 1 :],
        input_width=net.layer_width(layer),
        class_labels=net.class_labels,
    )
    return head, tail


def init_network(input_width, hidden_widths, class_labels, seed=0,
                 hidden_activation="relu") -> Network:
    """Seeded random network; binary gets a sigmoid head, else softmax."""
    class_labels = tuple(class_labels)
    if len(class_labels) < 2:
        raise ParameterError("need at least two class labels")
    rng = np.random.default_rng(seed)
    widths = [int(input_width)] + [int(w) for w in hidden_widths]
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        scale = 1.0 / np.sqrt(fan_in)
        layers.append(
            LayerSpec(
                weights=rng.normal(0.0, scale, size=(fan_out, fan_in)),
                bias=np.zeros(fan_out),
                activation=hidden_activation,
            )
        )
    fan_in = widths[-1]
    scale = 1.0 / np.sqrt(fan_in)
    if len(class_labels) == 2:
        head = LayerSpec(
            weights=rng.normal(0.0, scale, size=(1, fan_in)),
            bias=np.zeros(1),
            activation="sigmoid",
        )
    else:
        head = LayerSpec(
            weights=rng.normal(0.0, scale, size=(len(class_labels), fan_in)),
            bias=np.zeros(len(class_labels)),
            activation="softmax",
        )
    return Network(
        layers=tuple(layers) + (head,),
        input_width=int(input_width),
        class_labels=class_labels,
    )


def _sample_loss_and_delta(net, x, label):
    """Cross-entropy loss and d(loss)/d(final pre-activation)."""
    pres, posts = run_layers(net.layers, x)
    if net.is_binary:
        s = posts[-1][0]
        y = float(label)
        p = s if label == 1 else 1.0 - s
        loss = -np.log(max(p, 1e-12))
        delta = np.array([s - y])
    else:
        probs = posts[-1]
        loss = -np.log(max(probs[label], 1e-12))
        delta = probs.copy()
        delta[label] -= 1.0
    return float(loss), delta, pres, posts


def dataset_loss(net: Network, data: Dataset) -> float:
    """Mean cross-entropy over the dataset."""
    if len(data) == 0:
        raise DataError("empty dataset")
    total = 0.0
    for x, y in zip(data.rows, data.labels):
        loss, _, _, _ = _sample_loss_and_delta(net, x, int(y))
        total += loss
    return total / len(data)


def train(net: Network, data: Dataset, epochs, step_size, momentum=0.0,
          seed=0, batch_size=32) -> Network:
    """Mini-batch gradient descent on cross-entropy; deterministic per seed.

    Exists to build fixtures: no validation split, no early stopping.
    """
    if len(data) == 0:
        raise DataError("cannot train on an empty dataset")
    if step_size <= 0:
        raise ParameterError("step size must be positive")
    if not 0.0 <= momentum < 1.0:
        raise ParameterError("momentum must be in [0, 1)")
    if int(data.labels.max()) >= net.n_classes:
        raise DataError("dataset labels exceed the network's class count")
    if epochs == 0:
        return net

    weights = [layer.weights.copy() for layer in net.layers]
    biases = [layer.bias.copy() for layer in net.layers]
    acts = [layer.activation for layer in net.layers]
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    rng = np.random.default_rng(seed)
    n = len(data)

    def current():
        return Network(
            layers=tuple(
                LayerSpec(weights=w, bias=b, activation=a)
                for w, b, a in zip(weights, biases, acts)
            ),
            input_width=net.input_width,
            class_labels=net.class_labels,
        )

    for _ in range(int(epochs)):
        order = rng.permutation(n)
        snapshot = current()
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            grad_w = [np.zeros_like(w) for w in weights]
            grad_b = [np.zeros_like(b) for b in biases]
            for idx in batch:
                x = data.rows[idx]
                _, delta, pres, posts = _sample_loss_and_delta(
                    snapshot, x, int(data.labels[idx])
                )
                g_pre = delta
                for li in range(len(weights) - 1, -1, -1):
                    below = posts[li - 1] if li > 0 else x
                    grad_w[li] += np.outer(g_pre, below)
                    grad_b[li] += g_pre
                    if li > 0:
                        g_post = kernels.matvec_transpose(
                            snapshot.layers[li].weights, np.ascontiguousarray(g_pre)
                        )
                        g_pre = numerics.activation_vjp(
                            acts[li - 1], pres[li - 1], posts[li - 1], g_post
                        )
            scale = 1.0 / batch.shape[0]
            for li in range(len(weights)):
                vel_w[li] = momentum * vel_w[li] - step_size * scale * grad_w[li]
                vel_b[li] = momentum * vel_b[li] - step_size * scale * grad_b[li]
                weights[li] = weights[li] + vel_w[li]
                biases[li] = biases[li] + vel_b[li]
            snapshot = current()
    return snapshot


def _fmt(v):
    return format(float(v), ".17g")


def save_model(net: Network, path, feature_names=None):
    """Write the model JSON; numbers carry 17 significant digits."""
    lines = ["{"]
    lines.append(f'  "input_width": {net.input_width},')
    labels = ", ".join(json.dumps(c) for c in net.class_labels)
    lines.append(f'  "class_labels": [{labels}],')
    if feature_names is None:
        lines.append('  "feature_names": null,')
    else:
        names = ", ".join(json.dumps(str(n)) for n in feature_names)
        lines.append(f'  "feature_names": [{names}],')
    lines.append('  "layers": [')
    for i, layer in enumerate(net.layers):
        rows, cols = layer.weights.shape
        w = ", ".join(_fmt(v) for v in layer.weights.ravel())
        b = ", ".join(_fmt(v) for v in layer.bias)
        tail = "," if i < net.n_layers - 1 else ""
        lines.append("    {")
        lines.append(f'      "activation": {json.dumps(layer.activation)},')
        lines.append(f'      "rows": {rows},')
        lines.append(f'      "cols": {cols},')
        lines.append(f'      "weights": [{w}],')
        lines.append(f'      "bias": [{b}]')
        lines.append("    }" + tail)
    lines.append("  ]")
    lines.append("}")
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_model(path):
    """Read a model JSON; returns (Network, feature_names or None)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        raise ParseError(f"{path}: empty model file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    for field in ("input_width", "class_labels", "layers"):
        if field not in doc:
            raise ParseError(f"{path}: missing field {field!r}")
    raw_layers = doc["layers"]
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ParseError(f"{path}: 'layers' must be a nonempty array")
    layers = []
    for i, entry in enumerate(raw_layers):
        for field in ("activation", "rows", "cols", "weights", "bias"):
            if field not in entry:
                raise ParseError(f"{path}: layer {i}: missing field {field!r}")
        rows, cols = int(entry["rows"]), int(entry["cols"])
        w = entry["weights"]
        b = entry["bias"]
        if len(w) != rows * cols:
            raise ParseError(
                f"{path}: layer {i}: expected {rows * cols} weights, found {len(w)}"
            )
        if len(b) != rows:
            raise ParseError(
                f"{path}: layer {i}: bias length {len(b)} does not match rows {rows}"
            )
        try:
            layers.append(
                LayerSpec(
                    weights=as_matrix(w, rows=rows, cols=cols, what=f"layer {i} weights"),
                    bias=np.asarray(b, dtype=np.float64),
                    activation=str(entry["activation"]),
                )
            )
        except (ValueError, TypeError) as exc:
            raise ParseError(f"{path}: layer {i}: {exc}") from exc
    try:
        net = Network(
            layers=tuple(layers),
            input_width=int(doc["input_width"]),
            class_labels=tuple(doc["class_labels"]),
        )
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    names = doc.get("feature_names")
    return net, (tuple(names) if names else None)
