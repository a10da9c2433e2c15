"""The divide experiment: one generator, two input semantics.

Runs the identical counterfactual search over a semantically annotated
tabular model and a raw-pixel model, renders both results through the
same sentence templates, and reports the sparsity/semantics contrast.
The report is deterministic: (config, seed) -> byte-identical JSON and
Markdown.
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .data import load_dataset_csv
from .errors import BindingError, CfxkitError, ParameterError
from .generator import SearchConfig, evaluate_batch
from .metrics import MetricSpec, compute_mad
from .model import load_model
from .semantics import (
    FeatureCatalog,
    FeatureEntry,
    feature_diff,
    read_catalog,
    render_counterfactual,
)

SAMPLE_EXPLANATIONS = 2


class ExperimentError(CfxkitError):
    """Arm failure, carrying the arm name and the underlying error."""


def load_catalog(path, net=None) -> FeatureCatalog:
    """Read a catalog file, binding it against a model's input width."""
    catalog = read_catalog(path)
    if net is not None and catalog.width != net.input_width:
        raise BindingError(
            f"{path}: catalog does not match model input width: "
            f"expected {net.input_width}, found {catalog.width}"
        )
    return catalog


def pixel_catalog(rows, cols, class_labels) -> FeatureCatalog:
    """Per-pixel 'features', deliberately naming raw dimensions."""
    features = tuple(
        FeatureEntry(
            name=f"pixel ({r},{c}) channel value", kind="continuous", precision=3
        )
        for r in range(rows)
        for c in range(cols)
    )
    decisions = tuple(f'classified as "{label}"' for label in class_labels)
    return FeatureCatalog(features=features, decisions=decisions)


@dataclass(frozen=True)
class ExperimentConfig:
    """Paths and knobs for both arms of the divide experiment."""

    tabular_model: str
    tabular_data: str
    tabular_catalog: str
    pixel_model: str
    pixel_data: str
    out_dir: str
    seed: int = 0
    tabular_metric: str = "madl1"
    pixel_metric: str = "l2"
    tabular_target: str | None = None  # class label; default class 1
    pixel_target: str | None = None
    one_pixel: bool = False
    target_probability: float = 0.6
    sample_limit: int | None = 12

    def to_json(self):
        return {
            "tabular_model": self.tabular_model,
            "tabular_data": self.tabular_data,
            "tabular_catalog": self.tabular_catalog,
            "pixel_model": self.pixel_model,
            "pixel_data": self.pixel_data,
            "out_dir": self.out_dir,
            "seed": self.seed,
            "tabular_metric": self.tabular_metric,
            "pixel_metric": self.pixel_metric,
            "tabular_target": self.tabular_target,
            "pixel_target": self.pixel_target,
            "one_pixel": self.one_pixel,
            "target_probability": self.target_probability,
            "sample_limit": self.sample_limit,
        }


@dataclass(frozen=True, eq=False)
class DivideReport:
    """Everything the experiment produced, as one JSON-able document."""

    doc: dict

    def to_json(self):
        return self.doc


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _resolve_target(net, label):
    if label is None:
        return 1
    if label in net.class_labels:
        return net.class_labels.index(label)
    try:
        idx = int(label)
    except (TypeError, ValueError):
        raise ParameterError(
            f"unknown target class {label!r}; labels: {list(net.class_labels)}"
        ) from None
    if not 0 <= idx < net.n_classes:
        raise ParameterError(f"target class index {idx} out of range")
    return idx


def _resolve_metric(name, data):
    name = name.lower()
    if name == "madl1":
        return MetricSpec.madl1(compute_mad(data).weights)
    if name in ("l0", "l1", "l2", "linf"):
        return MetricSpec(name)
    raise ParameterError(f"unknown metric {name!r}")


def _arm_search_config(net, data, metric, target_class, seed, target_probability,
                       image_box):
    if image_box:
        # pixel arms operate on grayscale values: the box is [0, 1]
        lo = np.zeros(data.rows.shape[1])
        hi = np.ones(data.rows.shape[1])
    else:
        lo = data.rows.min(axis=0)
        hi = data.rows.max(axis=0)
    return SearchConfig(
        target_class=target_class,
        box=(lo, hi),
        target_probability=target_probability,
        metric=metric,
        seed=seed,
    )


def _limit(data, limit):
    if limit is None or len(data) <= limit:
        return data
    from .model import Dataset

    return Dataset(
        rows=data.rows[:limit], labels=data.labels[:limit],
        feature_names=data.feature_names,
    )


def _sample_texts(net, data, stats, catalog, target_class):
    samples = []
    for row_idx, res in stats.per_instance:
        if res.status != "converged":
            continue
        diff = feature_diff(data.rows[row_idx], res.x_prime, catalog)
        from_class = _first_class(net, data.rows[row_idx])
        exp = render_counterfactual(diff, catalog, from_class, target_class)
        samples.append({"row": int(row_idx), "explanation": exp.to_json()})
        if len(samples) >= SAMPLE_EXPLANATIONS:
            break
    if not samples:
        exp = render_counterfactual((), catalog, target_class, target_class)
        samples.append({"row": None, "explanation": exp.to_json()})
    return samples


def _first_class(net, x):
    from .model import predict

    idx, _ = predict(net, x)
    return idx


def _run_arm(name, *, model_path, data_path, catalog, metric_name, target_label,
             seed, target_probability, strategy, sample_limit):
    try:
        net, _ = load_model(model_path)
        data = load_dataset_csv(data_path, net.class_labels)
        if catalog is not None:
            catalog = load_catalog(catalog, net)
        else:
            side = math.isqrt(net.input_width)
            if side * side != net.input_width:
                raise ParameterError(
                    f"pixel arm input width {net.input_width} is not square"
                )
            catalog = pixel_catalog(side, side, net.class_labels)
        data = _limit(data, sample_limit)
        metric = _resolve_metric(metric_name, data)
        target_class = _resolve_target(net, target_label)
        cfg = _arm_search_config(
            net, data, metric, target_class, seed, target_probability,
            image_box=(name == "pixel"),
        )
        stats = evaluate_batch(net, data, cfg, strategy=strategy)
        samples = _sample_texts(net, data, stats, catalog, target_class)
        dims = net.input_width
        fractions = [
            res.l0_changed / dims
            for _, res in stats.per_instance
            if res.status == "converged"
        ]
        return {
            "name": name,
            "model_path": model_path,
            "data_path": data_path,
            "model_sha256": _sha256(model_path),
            "metric": metric.to_json(),
            "target_class": target_class,
            "target_label": net.class_labels[target_class],
            "dimensions": dims,
            "strategy": strategy,
            "stats": stats.to_json(),
            "fraction_changed_median": (
                float(np.median(fractions)) if fractions else None
            ),
            "samples": samples,
            "search_config": cfg.to_json(),
        }
    except ExperimentError:
        raise
    except OSError as exc:
        raise OSError(f"{name} arm: {exc}") from exc
    except Exception as exc:
        raise ExperimentError(f"{name} arm: {exc}") from exc


def run_divide_experiment(cfg: ExperimentConfig) -> DivideReport:
    """Run both arms through the same generator entry point and compare."""
    tabular = _run_arm(
        "tabular",
        model_path=cfg.tabular_model,
        data_path=cfg.tabular_data,
        catalog=cfg.tabular_catalog,
        metric_name=cfg.tabular_metric,
        target_label=cfg.tabular_target,
        seed=cfg.seed,
        target_probability=cfg.target_probability,
        strategy="penalty",
        sample_limit=cfg.sample_limit,
    )
    pixel = _run_arm(
        "pixel",
        model_path=cfg.pixel_model,
        data_path=cfg.pixel_data,
        catalog=None,
        metric_name=cfg.pixel_metric,
        target_label=cfg.pixel_target,
        seed=cfg.seed,
        target_probability=cfg.target_probability,
        strategy="one_pixel" if cfg.one_pixel else "penalty",
        sample_limit=cfg.sample_limit,
    )
    comparison = {
        "tabular_median_l0": tabular["stats"]["median_l0_changed"],
        "pixel_median_l0": pixel["stats"]["median_l0_changed"],
        "tabular_fraction_changed": tabular["fraction_changed_median"],
        "pixel_fraction_changed": pixel["fraction_changed_median"],
    }
    doc = {
        "arms": {"tabular": tabular, "pixel": pixel},
        "sparsity_comparison": comparison,
        "provenance": {
            "config": cfg.to_json(),
            "model_hashes": {
                "tabular": tabular["model_sha256"],
                "pixel": pixel["model_sha256"],
            },
            "seed": cfg.seed,
        },
    }
    return DivideReport(doc=doc)


def report_json_text(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _fmt_stat(value):
    if value is None:
        return "n/a"
    return repr(round(value, 6)) if isinstance(value, float) else str(value)


def report_markdown_text(doc) -> str:
    """Render the report document as Markdown; byte-stable per document."""
    lines = ["# Divide experiment report", ""]
    seed = doc["provenance"]["seed"]
    lines.append(f"Seed: {seed}")
    lines.append("")
    lines.append("## Sparsity comparison")
    lines.append("")
    lines.append(
        "| arm | metric | strategy | dimensions | attempted | skipped "
        "(already target) | converged | success rate | median L0 changed | "
        "median fraction changed | median distance |"
    )
    lines.append("|---|---|---|---|---|---|---|---|---|---|---|")
    for arm_name in ("tabular", "pixel"):
        arm = doc["arms"][arm_name]
        stats = arm["stats"]
        lines.append(
            "| {name} | {metric} | {strategy} | {dims} | {attempted} | "
            "{skipped} | {converged} | {rate} | {l0} | {frac} | {dist} |".format(
                name=arm_name,
                metric=arm["metric"]["kind"],
                strategy=arm["strategy"],
                dims=arm["dimensions"],
                attempted=stats["attempted"],
                skipped=stats["skipped_identity"],
                converged=stats["converged"],
                rate=_fmt_stat(stats["success_rate"]),
                l0=_fmt_stat(stats["median_l0_changed"]),
                frac=_fmt_stat(arm["fraction_changed_median"]),
                dist=_fmt_stat(stats["median_distance"]),
            )
        )
    comparison = doc["sparsity_comparison"]
    lines.append("")
    lines.append(
        "Tabular median L0: {t}; pixel median L0: {p}; "
        "pixel median fraction of dimensions changed: {f}.".format(
            t=_fmt_stat(comparison["tabular_median_l0"]),
            p=_fmt_stat(comparison["pixel_median_l0"]),
            f=_fmt_stat(comparison["pixel_fraction_changed"]),
        )
    )
    for arm_name in ("tabular", "pixel"):
        arm = doc["arms"][arm_name]
        lines.append("")
        lines.append(f"## {arm_name.capitalize()} arm sample explanations")
        lines.append("")
        for sample in arm["samples"]:
            row = sample["row"]
            prefix = f"Row {row}: " if row is not None else ""
            lines.append(f"> {prefix}{sample['explanation']['text']}")
            lines.append("")
    lines.append("## Provenance")
    lines.append("")
    hashes = doc["provenance"]["model_hashes"]
    lines.append(f"- tabular model sha256: `{hashes['tabular']}`")
    lines.append(f"- pixel model sha256: `{hashes['pixel']}`")
    config_json = json.dumps(doc["provenance"]["config"], sort_keys=True)
    lines.append(f"- config: `{config_json}`")
    lines.append("")
    return "\n".join(lines)


def emit_report(report, out_dir, formats=("json", "markdown")):
    """Write report.json / report.md; returns {format: path}."""
    doc = report.to_json() if isinstance(report, DivideReport) else report
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if "json" in formats:
        path = os.path.join(out_dir, "report.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report_json_text(doc))
        paths["json"] = path
    if "markdown" in formats or "md" in formats:
        path = os.path.join(out_dir, "report.md")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report_markdown_text(doc))
        paths["markdown"] = path
    return paths
