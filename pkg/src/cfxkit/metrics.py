"""Distance functions between an input and its perturbed counterpart.

Supports the L0 changed-coordinate count (with tolerance), the standard
L1/L2/Linf norms of the difference, and the MAD-weighted L1 whose
per-feature weights are the inverse median absolute deviation of a
reference dataset. All reductions use the pinned left-to-right order.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DataError, ParameterError, ShapeError

METRIC_KINDS = ("l0", "l1", "l2", "linf", "madl1")

# Coordinate changes smaller than this are floating noise, not feature edits.
DEFAULT_L0_TOL = 1e-6

# Zero-MAD fallback: eps_j = MAD_EPS_SCALE * max(column range, MAD_EPS_FLOOR).
MAD_EPS_SCALE = 1e-4
MAD_EPS_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """Selector for one distance function plus its parameters."""

    kind: str
    tau: float = DEFAULT_L0_TOL
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ParameterError(f"unknown metric kind {self.kind!r}")
        if self.tau < 0 or not np.isfinite(self.tau):
            raise ParameterError("L0 tolerance must be a finite nonnegative real")
        if self.kind == "madl1":
            if self.weights is None:
                raise ParameterError("madl1 requires per-feature weights")
            w = np.asarray(self.weights, dtype=np.float64)
            if w.ndim != 1 or w.size == 0:
                raise ShapeError("madl1 weights must be a nonempty vector")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ParameterError("madl1 weights must be positive and finite")
            object.__setattr__(self, "weights", w)

    @classmethod
    def l0(cls, tau=DEFAULT_L0_TOL):
        return cls("l0", tau=tau)

    @classmethod
    def l1(cls):
        return cls("l1")

    @classmethod
    def l2(cls):
        return cls("l2")

    @classmethod
    def linf(cls):
        return cls("linf")

    @classmethod
    def madl1(cls, weights):
        return cls("madl1", weights=np.asarray(weights, dtype=np.float64))

    def to_json(self):
        doc = {"kind": self.kind, "tau": self.tau}
        doc["weights"] = None if self.weights is None else [float(w) for w in self.weights]
        return doc

    @classmethod
    def from_json(cls, doc):
        weights = doc.get("weights")
        return cls(
            doc["kind"],
            tau=doc.get("tau", DEFAULT_L0_TOL),
            weights=None if weights is None else np.asarray(weights, dtype=np.float64),
        )


@dataclass(frozen=True, eq=False)
class MadWeights:
    """Inverse-MAD feature weights with the dataset they came from."""

    weights: np.ndarray
    mad: np.ndarray
    provenance: str = ""

    def to_json(self):
        return {
            "weights": [float(w) for w in self.weights],
            "mad": [float(m) for m in self.mad],
            "provenance": self.provenance,
        }


def _rows_of(data):
    rows = getattr(data, "rows", data)
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ShapeError("expected a 2-D row matrix")
    return rows


def compute_mad(data, provenance=""):
    """Per-column median absolute deviation, inverted into L1 weights.

    MAD_j = median_i |x_ij - median_i(x_ij)|. Zero MAD (constant or
    half-constant columns) falls back to eps_j = 1e-4 * max(range_j, 1e-12)
    so the weight stays finite and scale-consistent. Even-length medians
    are the midpoint average.
    """
    rows = _rows_of(data)
    if rows.shape[0] == 0:
        raise DataError("cannot compute MAD of an empty dataset")
    med = np.median(rows, axis=0)
    mad = np.median(np.abs(rows - med), axis=0)
    col_range = rows.max(axis=0) - rows.min(axis=0)
    eps = MAD_EPS_SCALE * np.maximum(col_range, MAD_EPS_FLOOR)
    weights = 1.0 / np.maximum(mad, eps)
    return MadWeights(weights=weights, mad=mad, provenance=provenance)


def _check_pair(spec, x, x_prime):
    x = np.asarray(x, dtype=np.float64)
    x_prime = np.asarray(x_prime, dtype=np.float64)
    if x.shape != x_prime.shape or x.ndim != 1 or x.size == 0:
        raise ShapeError(
            f"distance operands must be equal-length nonempty vectors, got {x.shape} vs {x_prime.shape}"
        )
    if spec.kind == "madl1" and spec.weights.shape != x.shape:
        raise ShapeError(
            f"madl1 weights length {spec.weights.shape[0]} != vector length {x.shape[0]}"
        )
    return x, x_prime


def distance(spec: MetricSpec, x, x_prime) -> float:
    """d(x, x') under the given metric; always >= 0."""
    x, x_prime = _check_pair(spec, x, x_prime)
    delta = x_prime - x
    if spec.kind == "l0":
        return float(np.count_nonzero(np.abs(delta) > spec.tau))
    if spec.kind == "l1":
        return kernels.ordered_sum(np.abs(delta))
    if spec.kind == "l2":
        return float(np.sqrt(kernels.ordered_sum(delta * delta)))
    if spec.kind == "linf":
        return float(np.max(np.abs(delta)))
    return kernels.ordered_sum(spec.weights * np.abs(delta))


def distance_gradient(spec: MetricSpec, x, x_prime) -> np.ndarray:
    """Subgradient of d(x, x') with respect to x'.

    L1/MadL1 use the sign subgradient with 0 at ties; L2 is 0 at x' = x;
    Linf places the whole subgradient on the first coordinate attaining
    the max; L0 is piecewise constant, so 0 everywhere.
    """
    x, x_prime = _check_pair(spec, x, x_prime)
    delta = x_prime - x
    if spec.kind == "l0":
        return np.zeros_like(delta)
    if spec.kind == "l1":
        return np.sign(delta)
    if spec.kind == "l2":
        norm = np.sqrt(kernels.ordered_sum(delta * delta))
        if norm == 0.0:
            return np.zeros_like(delta)
        return delta / norm
    if spec.kind == "linf":
        g = np.zeros_like(delta)
        if np.any(delta != 0.0):
            j = int(np.argmax(np.abs(delta)))
            g[j] = np.sign(delta[j])
        return g
    return spec.weights * np.sign(delta)


def count_changed(x, x_prime, tau=DEFAULT_L0_TOL) -> int:
    """Number of coordinates differing by more than tau."""
    x = np.asarray(x, dtype=np.float64)
    x_prime = np.asarray(x_prime, dtype=np.float64)
    if x.shape != x_prime.shape:
        raise ShapeError("count_changed needs equal-length vectors")
    return int(np.count_nonzero(np.abs(x_prime - x) > tau))
