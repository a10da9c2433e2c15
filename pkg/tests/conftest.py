import numpy as np
import pytest

from cfxkit import fixtures as fx
from cfxkit.model import LayerSpec, Network


@pytest.fixture(scope="session")
def loan_data():
    return fx.make_loan_dataset(seed=0)


@pytest.fixture(scope="session")
def loan_net(loan_data):
    return fx.train_loan_model(loan_data, seed=0)


@pytest.fixture(scope="session")
def loan_catalog():
    return fx.loan_catalog()


@pytest.fixture(scope="session")
def blob_data():
    return fx.make_blob_images(seed=0)


@pytest.fixture(scope="session")
def blob_net(blob_data):
    return fx.train_blob_model(blob_data, seed=0)


@pytest.fixture(scope="session")
def bright_pixel_net():
    return fx.train_bright_pixel_model(seed=0)


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixtures")
    paths = fx.write_fixture_files(str(out), seed=0)
    return paths


@pytest.fixture
def diag_logistic():
    """sigma(x0 + x1): the 2-D fixture used against the grid oracle."""
    return Network(
        layers=(
            LayerSpec(weights=[[1.0, 1.0]], bias=[0.0], activation="sigmoid"),
        ),
        input_width=2,
        class_labels=("no", "yes"),
    )


@pytest.fixture
def zero_logistic():
    return Network(
        layers=(
            LayerSpec(weights=[[0.0, 0.0]], bias=[0.0], activation="sigmoid"),
        ),
        input_width=2,
        class_labels=("no", "yes"),
    )


def random_network(rng, input_width=None, n_layers=None, multiclass=None):
    """Seeded random fixture network for oracle cross-checks."""
    if input_width is None:
        input_width = int(rng.integers(2, 8))
    if n_layers is None:
        n_layers = int(rng.integers(1, 4))
    if multiclass is None:
        multiclass = bool(rng.integers(0, 2))
    widths = [input_width] + [int(rng.integers(2, 17)) for _ in range(n_layers - 1)]
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        act = ("relu", "sigmoid", "identity")[int(rng.integers(0, 3))]
        layers.append(
            LayerSpec(
                weights=rng.normal(0.0, 0.7, size=(fan_out, fan_in)),
                bias=rng.normal(0.0, 0.3, size=fan_out),
                activation=act,
            )
        )
    fan_in = widths[-1]
    if multiclass:
        n_out = int(rng.integers(2, 6))
        layers.append(
            LayerSpec(
                weights=rng.normal(0.0, 0.7, size=(n_out, fan_in)),
                bias=rng.normal(0.0, 0.3, size=n_out),
                activation="softmax",
            )
        )
        labels = tuple(f"c{i}" for i in range(n_out))
    else:
        layers.append(
            LayerSpec(
                weights=rng.normal(0.0, 0.7, size=(1, fan_in)),
                bias=rng.normal(0.0, 0.3, size=1),
                activation="sigmoid",
            )
        )
        labels = ("neg", "pos")
    return Network(layers=tuple(layers), input_width=input_width, class_labels=labels)


def min_abs_preactivation(net, x):
    """Distance of the nearest relu pre-activation to its kink."""
    from cfxkit.numerics import run_layers

    pres, _ = run_layers(net.layers, x)
    worst = np.inf
    for layer, z in zip(net.layers, pres):
        if layer.activation == "relu":
            worst = min(worst, float(np.min(np.abs(z))))
    return worst
