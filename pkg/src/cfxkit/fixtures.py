"""Seeded synthetic fixtures: a loan table and tiny image sets.

Everything below is deterministic in its seed, so shipped fixture files
can be regenerated bit-for-bit with `python -m cfxkit.fixtures`.
"""

import argparse
import os

import numpy as np

from . import kernels
from .data import save_dataset_csv
from .model import Dataset, LayerSpec, Network, init_network, save_model, train
from .semantics import FeatureCatalog, FeatureEntry, save_catalog

LOAN_CLASSES = ("denied", "offered")
LOAN_FEATURES = ("annual income", "age", "account balance", "employment years")
BLOB_CLASSES = ("dark blob", "bright blob")


def make_loan_dataset(seed=0, n=240) -> Dataset:
    """Synthetic loan applications with a known approximately linear rule.

    income ~ U(12k, 95k) rounded to 100, age ~ U{21..75},
    balance ~ U(-2k, 30k) rounded to cents, employment ~ U{0..35}.
    Offered iff 2.2*(income-55k)/25k + 0.9*(balance-14k)/9k
    + 0.5*(employment-18)/10 - 0.15*(age-48)/15 > 0.
    """
    rng = np.random.default_rng(seed)
    income = np.round(rng.uniform(12_000, 95_000, size=n) / 100.0) * 100.0
    age = rng.integers(21, 76, size=n).astype(np.float64)
    balance = np.round(rng.uniform(-2_000, 30_000, size=n), 2)
    employment = rng.integers(0, 36, size=n).astype(np.float64)
    score = (
        2.2 * (income - 55_000) / 25_000
        + 0.9 * (balance - 14_000) / 9_000
        + 0.5 * (employment - 18) / 10
        - 0.15 * (age - 48) / 15
    )
    labels = (score > 0).astype(np.int64)
    rows = np.column_stack([income, age, balance, employment])
    return Dataset(rows=rows, labels=labels, feature_names=LOAN_FEATURES)


def loan_catalog() -> FeatureCatalog:
    return FeatureCatalog(
        features=(
            FeatureEntry(
                name="annual income", unit="£", kind="integer-valued",
                precision=0, mutable=True, short_name="income",
            ),
            FeatureEntry(name="age", kind="integer-valued", precision=0, mutable=False),
            FeatureEntry(
                name="account balance", unit="£", kind="continuous",
                precision=2, mutable=True,
            ),
            FeatureEntry(
                name="employment years", kind="integer-valued", precision=0,
                mutable=True,
            ),
        ),
        decisions=("denied a loan", "offered a loan"),
    )


def train_standardized(data: Dataset, hidden, class_labels, *, seed=0,
                       epochs=200, step_size=0.5, momentum=0.9,
                       batch_size=32) -> Network:
    """Train on standardized features, then fold the scaling into layer 0.

    The returned network consumes raw feature units; the absorption
    W' = W/sd, b' = b - W (mu/sd) is exact affine algebra.
    """
    mu = data.rows.mean(axis=0)
    sd = data.rows.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    scaled = Dataset(
        rows=(data.rows - mu) / sd, labels=data.labels,
        feature_names=data.feature_names,
    )
    net0 = init_network(data.rows.shape[1], hidden, class_labels, seed=seed)
    trained = train(
        net0, scaled, epochs=epochs, step_size=step_size, momentum=momentum,
        seed=seed, batch_size=batch_size,
    )
    first = trained.layers[0]
    shift = kernels.affine_forward(
        first.weights, np.zeros(first.width), np.ascontiguousarray(mu / sd)
    )
    absorbed = LayerSpec(
        weights=first.weights / sd, bias=first.bias - shift,
        activation=first.activation,
    )
    return Network(
        layers=(absorbed,) + trained.layers[1:],
        input_width=trained.input_width,
        class_labels=trained.class_labels,
    )


def train_loan_model(data: Dataset | None = None, seed=0) -> Network:
    """Logistic model over the raw loan features.

    The short schedule is deliberate: it keeps decision probabilities
    away from saturation so input gradients stay alive for the search.
    """
    if data is None:
        data = make_loan_dataset(seed=seed)
    return train_standardized(
        data, hidden=(), class_labels=LOAN_CLASSES, seed=seed,
        epochs=15, step_size=0.1, momentum=0.9,
    )


def make_blob_images(seed=0, n=160, size=8) -> Dataset:
    """Dark-blob vs bright-blob grayscale images, label by construction.

    Bright-blob images have a dim background with one 3x3 brightened
    patch; dark-blob images invert that.
    """
    rng = np.random.default_rng(seed)
    rows = np.empty((n, size * size))
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        bright = i % 2 == 1
        if bright:
            img = rng.uniform(0.10, 0.45, size=(size, size))
        else:
            img = rng.uniform(0.55, 0.90, size=(size, size))
        r0 = int(rng.integers(0, size - 2))
        c0 = int(rng.integers(0, size - 2))
        bump = rng.uniform(0.35, 0.55, size=(3, 3))
        if bright:
            img[r0 : r0 + 3, c0 : c0 + 3] += bump
        else:
            img[r0 : r0 + 3, c0 : c0 + 3] -= bump
        rows[i] = np.clip(img, 0.0, 1.0).ravel()
        labels[i] = 1 if bright else 0
    names = tuple(f"p{r}_{c}" for r in range(size) for c in range(size))
    return Dataset(rows=rows, labels=labels, feature_names=names)


def train_blob_model(data: Dataset | None = None, seed=0) -> Network:
    """64 -> 12 relu -> sigmoid classifier for the 8x8 blob images."""
    if data is None:
        data = make_blob_images(seed=seed)
    net0 = init_network(data.rows.shape[1], (12,), BLOB_CLASSES, seed=seed)
    return train(
        net0, data, epochs=20, step_size=0.1, momentum=0.9, seed=seed,
    )


def make_bright_pixel_images(seed=0, n=20, size=4) -> Dataset:
    """4x4 images labelled by whether they contain one very bright pixel."""
    rng = np.random.default_rng(seed)
    rows = np.empty((n, size * size))
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        img = rng.uniform(0.05, 0.55, size=size * size)
        if i % 2 == 1:
            img[int(rng.integers(0, size * size))] = rng.uniform(0.85, 1.0)
            labels[i] = 1
        else:
            labels[i] = 0
        rows[i] = img
    names = tuple(f"p{r}_{c}" for r in range(size) for c in range(size))
    return Dataset(rows=rows, labels=labels, feature_names=names)


def train_bright_pixel_model(seed=0) -> Network:
    """16 -> 8 relu -> sigmoid bright-pixel detector for attack fixtures."""
    data = make_bright_pixel_images(seed=seed, n=160)
    net0 = init_network(16, (8,), ("plain", "bright"), seed=seed)
    return train(net0, data, epochs=200, step_size=0.5, momentum=0.9, seed=seed)


def single_pixel_logistic(size=4, pixel=6, gain=10.0, threshold=5.0) -> Network:
    """Hand-built net whose class depends on exactly one pixel.

    sigma(gain * x[pixel] - threshold): class flips to 1 exactly when
    x[pixel] >= threshold/gain.
    """
    weights = np.zeros((1, size * size))
    weights[0, pixel] = gain
    return Network(
        layers=(
            LayerSpec(weights=weights, bias=np.array([-threshold]),
                      activation="sigmoid"),
        ),
        input_width=size * size,
        class_labels=("plain", "marked"),
    )


def make_blobs_2d(seed=0, n=100) -> Dataset:
    """Two 2-D Gaussian clusters separable by the hand line x + y = 0."""
    rng = np.random.default_rng(seed)
    half = n // 2
    a = rng.normal(-2.0, 0.8, size=(half, 2))
    b = rng.normal(2.0, 0.8, size=(n - half, 2))
    rows = np.vstack([a, b])
    labels = np.array([0] * half + [1] * (n - half), dtype=np.int64)
    return Dataset(rows=rows, labels=labels, feature_names=("x0", "x1"))


def write_fixture_files(out_dir, seed=0):
    """Generate and write every shipped fixture file; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    loan = make_loan_dataset(seed=seed)
    paths["loan_csv"] = os.path.join(out_dir, "loan.csv")
    save_dataset_csv(loan, LOAN_CLASSES, paths["loan_csv"])
    paths["loan_catalog"] = os.path.join(out_dir, "loan_catalog.json")
    save_catalog(loan_catalog(), paths["loan_catalog"])
    loan_net = train_loan_model(loan, seed=seed)
    paths["loan_model"] = os.path.join(out_dir, "loan_model.json")
    save_model(loan_net, paths["loan_model"], feature_names=LOAN_FEATURES)

    blobs = make_blob_images(seed=seed)
    paths["blobs_csv"] = os.path.join(out_dir, "blobs.csv")
    save_dataset_csv(blobs, BLOB_CLASSES, paths["blobs_csv"])
    blob_net = train_blob_model(blobs, seed=seed)
    paths["blobs_model"] = os.path.join(out_dir, "blobs_model.json")
    save_model(blob_net, paths["blobs_model"], feature_names=blobs.feature_names)
    return paths


def main(argv=None):
    parser = argparse.ArgumentParser(description="Write the shipped fixture files.")
    parser.add_argument("--out", default="fixtures", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    paths = write_fixture_files(args.out, seed=args.seed)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
