"""Hidden-unit semantics probes.

Four kinds of evidence about what a unit (or an arbitrary unit-norm
direction) responds to: its activation on a given input, the dataset
exemplars that activate it most, a synthesized input that maximizes it,
and the input-gradient saliency map.
"""

from dataclasses import dataclass

import numpy as np

from . import model as model_mod
from . import numerics
from .errors import ParameterError, ShapeError
from .numerics import ScalarObjective

STEP_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ProbeTarget:
    """A single unit, or a unit-norm direction over one layer's width."""

    layer: int
    unit: int | None = None
    direction: np.ndarray | None = None

    def __post_init__(self):
        if (self.unit is None) == (self.direction is None):
            raise ParameterError("probe target needs a unit index or a direction")

    @classmethod
    def for_unit(cls, layer, unit):
        return cls(layer=int(layer), unit=int(unit))

    @classmethod
    def for_direction(cls, layer, direction):
        return cls(layer=int(layer), direction=np.asarray(direction, dtype=np.float64))

    def objective(self) -> ScalarObjective:
        if self.unit is not None:
            return ScalarObjective.hidden_unit(self.layer, self.unit)
        return ScalarObjective.direction_activation(self.layer, self.direction)


def direction_activation(net, x, target: ProbeTarget) -> float:
    """Activation of the targeted unit/direction on input x."""
    return numerics.objective_value(net, x, target.objective())


@dataclass(frozen=True, eq=False)
class ExemplarList:
    """(row index, activation) pairs, activation descending."""

    entries: tuple

    def to_json(self):
        return [
            {"row": int(r), "activation": float(a)} for r, a in self.entries
        ]


def top_exemplars(net, data, target: ProbeTarget, k) -> ExemplarList:
    """Top-k dataset rows by activation; ties go to the lower row index."""
    if k <= 0:
        raise ParameterError("k must be positive")
    obj = target.objective()
    numerics._check_objective(net.layers, obj)
    acts = model_mod.layer_activations_batch(net, data.rows, target.layer)
    if target.unit is not None:
        vals = acts[:, target.unit]
    else:
        vals = np.cumsum(acts * obj.direction, axis=1)[:, -1]
    n = vals.shape[0]
    order = np.lexsort((np.arange(n), -vals))[: min(int(k), n)]
    entries = tuple((int(i), float(vals[i])) for i in order)
    return ExemplarList(entries=entries)


@dataclass(frozen=True, eq=False)
class MaximizeConfig:
    """Projected-ascent settings for activation maximization."""

    box: tuple
    seed_input: object = "zeros"  # "zeros" | "noise" | explicit vector
    step_size: float = 0.05
    iterations: int = 500
    seed: int = 0

    def __post_init__(self):
        lo = np.asarray(self.box[0], dtype=np.float64)
        hi = np.asarray(self.box[1], dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ParameterError("box must be a pair of equal-length bound vectors")
        if np.any(lo > hi) or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ParameterError("box bounds must be finite with lo <= hi")
        object.__setattr__(self, "box", (lo, hi))
        if self.step_size <= 0:
            raise ParameterError("step size must be positive")
        if self.iterations < 0:
            raise ParameterError("iteration budget must be nonnegative")


@dataclass(frozen=True, eq=False)
class MaximizationResult:
    """Best iterate found, the best-so-far trace, and a dead-unit flag."""

    x_star: np.ndarray
    trace: tuple
    zero_gradient: bool


def activation_maximization(net, target: ProbeTarget,
                            cfg: MaximizeConfig) -> MaximizationResult:
    """Projected gradient ascent on the target activation.

    Steps are clamped to the box; steps that fail to increase the
    activation are rejected with step halving (floor 1e-12). Returns the
    best iterate seen, so the final activation never drops below the
    seed's.
    """
    lo, hi = cfg.box
    obj = target.objective()
    if isinstance(cfg.seed_input, str):
        if cfg.seed_input == "zeros":
            x = np.clip(np.zeros(lo.shape[0]), lo, hi)
        elif cfg.seed_input == "noise":
            rng = np.random.default_rng(cfg.seed)
            x = rng.uniform(lo, hi)
        else:
            raise ParameterError(f"unknown seed input {cfg.seed_input!r}")
    else:
        x = np.clip(np.asarray(cfg.seed_input, dtype=np.float64), lo, hi)
    act = numerics.objective_value(net, x, obj)
    best_x, best_act = x.copy(), act
    trace = [best_act]
    if cfg.iterations == 0:
        return MaximizationResult(x_star=best_x, trace=tuple(trace), zero_gradient=False)
    grad = numerics.grad_wrt_input(net, x, obj)
    if not np.any(grad):
        return MaximizationResult(x_star=best_x, trace=tuple(trace), zero_gradient=True)
    step = cfg.step_size
    for _ in range(cfg.iterations):
        cand = np.clip(x + step * grad, lo, hi)
        if np.array_equal(cand, x):
            step *= 0.5
            if step < STEP_FLOOR:
                break
            trace.append(best_act)
            continue
        cand_act = numerics.objective_value(net, cand, obj)
        if cand_act > act:
            x, act = cand, cand_act
            grad = numerics.grad_wrt_input(net, x, obj)
            if act > best_act:
                best_x, best_act = x.copy(), act
        else:
            step *= 0.5
            if step < STEP_FLOOR:
                break
        trace.append(best_act)
    return MaximizationResult(x_star=best_x, trace=tuple(trace), zero_gradient=False)


def saliency_map(net, x, target: ProbeTarget) -> np.ndarray:
    """|d activation / d x_j| per input dimension."""
    return np.abs(numerics.grad_wrt_input(net, x, target.objective()))


def write_pgm(values, rows, cols, path, maxval=255):
    """Emit a row-major P2 (ASCII) graymap; values are clipped to [0, 1]."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (rows * cols,):
        raise ShapeError(
            f"expected {rows * cols} values for a {rows}x{cols} graymap"
        )
    levels = np.rint(np.clip(values, 0.0, 1.0) * maxval).astype(int)
    lines = ["P2", f"{cols} {rows}", str(maxval)]
    for r in range(rows):
        lines.append(" ".join(str(v) for v in levels[r * cols : (r + 1) * cols]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
