"""Command-line interface: one verb per capability.

Exit codes: 0 success, 1 search exhausted, 2 validation/parse error,
3 I/O error.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import generator, probe
from .data import load_dataset_csv
from .errors import CfxkitError, ParameterError
from .experiment import (
    ExperimentConfig,
    emit_report,
    load_catalog,
    report_json_text,
    report_markdown_text,
    run_divide_experiment,
    _resolve_target,
)
from .fixtures import train_standardized
from .generator import (
    DifferentialEvolutionConfig,
    SearchConfig,
    generate_counterfactual,
    hidden_layer_counterfactual,
    one_pixel_attack,
)
from .metrics import MetricSpec, compute_mad
from .model import (
    Dataset,
    init_network,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
)
from .semantics import (
    feature_diff,
    read_annotations,
    render_counterfactual,
    render_hidden_counterfactual,
)

EXIT_OK = 0
EXIT_EXHAUSTED = 1
EXIT_INVALID = 2
EXIT_IO = 3


def _add_common(parser, *flags):
    if "seed" in flags:
        parser.add_argument("--seed", type=int, default=0)
    if "model" in flags:
        parser.add_argument("--model", required=True, help="model JSON path")
    if "data" in flags:
        parser.add_argument("--data", required=True, help="dataset CSV path")
    if "catalog" in flags:
        parser.add_argument("--catalog", help="feature catalog JSON path")
    if "metric" in flags:
        parser.add_argument(
            "--metric", default=None,
            choices=["l0", "l1", "l2", "linf", "madl1"],
        )
    if "target" in flags:
        parser.add_argument("--target", help="target class label or index")
    if "out" in flags:
        parser.add_argument("--out", help="output directory")
    if "format" in flags:
        parser.add_argument(
            "--format", default="json,md",
            help="comma list of report formats (json, md)",
        )


def _metric_for(name, default, data):
    name = (name or default).lower()
    if name == "madl1":
        return MetricSpec.madl1(compute_mad(data).weights)
    return MetricSpec(name)


def _box_from_data(data):
    return data.rows.min(axis=0), data.rows.max(axis=0)


def _search_config(args, net, data, default_metric, box=None):
    metric = _metric_for(args.metric, default_metric, data)
    target = _resolve_target(net, args.target)
    if box is None:
        box = _box_from_data(data)
    return SearchConfig(
        target_class=target,
        box=box,
        target_probability=args.target_probability,
        metric=metric,
        seed=args.seed,
    )


def _emit_json(doc, out_dir, name):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def _cmd_train(args):
    if args.classes:
        class_labels = [c.strip() for c in args.classes.split(",") if c.strip()]
    else:
        with open(args.data, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if args.label_column not in header:
                raise ParameterError(
                    f"label column {args.label_column!r} not in {header}"
                )
            idx = header.index(args.label_column)
            class_labels = sorted(
                {row[idx].strip() for row in reader if row and row[idx].strip()}
            )
    data = load_dataset_csv(args.data, class_labels, label_column=args.label_column)
    hidden = [int(w) for w in args.hidden.split(",") if w.strip()] if args.hidden else []
    if args.standardize:
        net = train_standardized(
            data, hidden, class_labels, seed=args.seed, epochs=args.epochs,
            step_size=args.step_size, momentum=args.momentum,
            batch_size=args.batch_size,
        )
    else:
        net0 = init_network(data.rows.shape[1], hidden, class_labels, seed=args.seed)
        net = train(
            net0, data, epochs=args.epochs, step_size=args.step_size,
            momentum=args.momentum, seed=args.seed, batch_size=args.batch_size,
        )
    save_model(net, args.out_model, feature_names=data.feature_names)
    _, classes = predict_batch(net, data.rows)
    acc = float((classes == data.labels).mean())
    print(f"wrote {args.out_model} (training accuracy {acc:.3f})")
    return EXIT_OK


def _cmd_explain(args):
    net, _ = load_model(args.model)
    data = load_dataset_csv(args.data, net.class_labels)
    catalog = load_catalog(args.catalog, net)
    x = data.rows[args.row]
    cfg = _search_config(args, net, data, "madl1")
    result = generate_counterfactual(net, x, cfg)
    from_class, _ = predict(net, x)
    diff = feature_diff(x, result.x_prime, catalog)
    if args.style == "formal":
        probs_from = predict_batch(net, x[np.newaxis, :])[0][0]
        probs_to = predict_batch(net, result.x_prime[np.newaxis, :])[0][0]
        exp = render_counterfactual(
            diff, catalog, from_class, cfg.target_class, style="formal-template",
            score_from=float(probs_from[cfg.target_class]),
            score_to=float(probs_to[cfg.target_class]),
        )
    else:
        exp = render_counterfactual(diff, catalog, from_class, cfg.target_class)
    print(exp.text)
    if args.out:
        _emit_json(
            {"result": result.to_json(), "explanation": exp.to_json()},
            args.out, "explain.json",
        )
    return EXIT_OK if result.status == "converged" else EXIT_EXHAUSTED


def _cmd_attack(args):
    net, _ = load_model(args.model)
    data = load_dataset_csv(args.data, net.class_labels)
    x = data.rows[args.row]
    metric = _metric_for(args.metric, "l2", data)
    target = generator.ANY_OTHER if args.any_other else _resolve_target(net, args.target)
    if args.one_pixel:
        de = DifferentialEvolutionConfig(seed=args.seed)
        result = one_pixel_attack(net, x, target, k=args.k, de=de, metric=metric)
    else:
        if args.any_other:
            raise ParameterError("--any-other requires --one-pixel")
        lo = np.zeros(net.input_width)
        hi = np.ones(net.input_width)
        cfg = SearchConfig(
            target_class=target, box=(lo, hi),
            target_probability=args.target_probability, metric=metric,
            seed=args.seed,
        )
        result = generate_counterfactual(net, x, cfg)
    print(
        f"status={result.status} achieved={net.class_labels[result.achieved_class]} "
        f"distance={result.distance:.6g} l0_changed={result.l0_changed}"
    )
    if args.out:
        _emit_json({"result": result.to_json()}, args.out, "attack.json")
    return EXIT_OK if result.status == "converged" else EXIT_EXHAUSTED


def _cmd_hidden(args):
    net, _ = load_model(args.model)
    data = load_dataset_csv(args.data, net.class_labels)
    x = data.rows[args.row]
    metric = _metric_for(args.metric, "l2", data)
    box = generator.activation_box(net, data, args.layer)
    cfg = SearchConfig(
        target_class=_resolve_target(net, args.target), box=box,
        target_probability=args.target_probability, metric=metric,
        seed=args.seed,
    )
    hidden = hidden_layer_counterfactual(net, args.layer, x, cfg)
    annotations = read_annotations(args.annotations) if args.annotations else ()
    from_class, from_label = predict(net, x)
    exp = render_hidden_counterfactual(
        hidden.deltas, annotations,
        from_label, net.class_labels[cfg.target_class],
        layer=args.layer, subject=args.subject,
    )
    print(exp.text)
    if args.out:
        _emit_json(
            {
                "result": hidden.result.to_json(),
                "layer": hidden.layer,
                "deltas": [list(d) for d in hidden.deltas],
                "explanation": exp.to_json(),
            },
            args.out, "hidden.json",
        )
    return EXIT_OK if hidden.result.status == "converged" else EXIT_EXHAUSTED


def _parse_shape(text):
    rows, _, cols = text.partition("x")
    return int(rows), int(cols)


def _cmd_probe(args):
    net, _ = load_model(args.model)
    data = load_dataset_csv(args.data, net.class_labels) if args.data else None
    if args.direction_file:
        with open(args.direction_file, "r", encoding="utf-8") as fh:
            direction = np.asarray(json.load(fh), dtype=np.float64)
        target = probe.ProbeTarget.for_direction(args.layer, direction)
    else:
        target = probe.ProbeTarget.for_unit(args.layer, args.unit)
    out_dir = args.out or "."
    doc = {"layer": args.layer, "unit": args.unit}
    if args.exemplars:
        if data is None:
            raise ParameterError("--exemplars needs --data")
        listing = probe.top_exemplars(net, data, target, args.exemplars)
        doc["exemplars"] = listing.to_json()
        print(json.dumps(doc["exemplars"], indent=2))
    if args.maximize:
        if data is not None:
            box = _box_from_data(data)
        else:
            box = (np.zeros(net.input_width), np.ones(net.input_width))
        cfg = probe.MaximizeConfig(
            box=box, seed_input=args.seed_input, step_size=args.step_size,
            iterations=args.iterations, seed=args.seed,
        )
        res = probe.activation_maximization(net, target, cfg)
        doc["maximization"] = {
            "x_star": [float(v) for v in res.x_star],
            "activation": res.trace[-1],
            "zero_gradient": res.zero_gradient,
        }
        print(
            f"maximized activation {res.trace[-1]:.6g}"
            + (" (zero gradient)" if res.zero_gradient else "")
        )
        if args.image_shape:
            rows, cols = _parse_shape(args.image_shape)
            os.makedirs(out_dir, exist_ok=True)
            pgm = os.path.join(out_dir, f"maximize_l{args.layer}_u{args.unit}.pgm")
            probe.write_pgm(res.x_star, rows, cols, pgm)
            print(f"wrote {pgm}")
    if args.saliency is not None:
        if data is None:
            raise ParameterError("--saliency needs --data")
        x = data.rows[args.saliency]
        sal = probe.saliency_map(net, x, target)
        doc["saliency"] = [float(v) for v in sal]
        if args.image_shape:
            rows, cols = _parse_shape(args.image_shape)
            os.makedirs(out_dir, exist_ok=True)
            peak = sal.max()
            pgm = os.path.join(out_dir, f"saliency_l{args.layer}_u{args.unit}.pgm")
            probe.write_pgm(sal / peak if peak > 0 else sal, rows, cols, pgm)
            print(f"wrote {pgm}")
        else:
            print(json.dumps(doc["saliency"]))
    if args.out:
        _emit_json(doc, args.out, "probe.json")
    return EXIT_OK


def _cmd_divide(args):
    formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
    cfg = ExperimentConfig(
        tabular_model=args.tabular_model,
        tabular_data=args.tabular_data,
        tabular_catalog=args.catalog,
        pixel_model=args.pixel_model,
        pixel_data=args.pixel_data,
        out_dir=args.out,
        seed=args.seed,
        tabular_target=args.tabular_target,
        pixel_target=args.pixel_target,
        one_pixel=args.one_pixel,
        sample_limit=args.sample_limit,
    )
    report = run_divide_experiment(cfg)
    paths = emit_report(report, args.out, formats=formats)
    for fmt, path in sorted(paths.items()):
        print(f"{fmt}: {path}")
    return EXIT_OK


def _cmd_report(args):
    with open(args.input, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
    os.makedirs(args.out, exist_ok=True)
    paths = {}
    if "json" in formats:
        path = os.path.join(args.out, "report.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report_json_text(doc))
        paths["json"] = path
    if "md" in formats or "markdown" in formats:
        path = os.path.join(args.out, "report.md")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report_markdown_text(doc))
        paths["markdown"] = path
    for fmt, path in sorted(paths.items()):
        print(f"{fmt}: {path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cfxkit",
        description="Counterfactual explanations and adversarial examples "
        "from one search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a fixture model from a CSV")
    _add_common(p, "seed", "data")
    p.add_argument("--label-column", default="label")
    p.add_argument("--classes", help="comma list of class labels (else inferred)")
    p.add_argument("--hidden", default="", help="comma list of hidden widths")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--step-size", type=float, default=0.5)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--out-model", required=True, help="model JSON to write")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("explain", help="tabular counterfactual explanation")
    _add_common(p, "seed", "model", "data", "catalog", "metric", "target", "out")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--style", choices=["plain", "formal"], default="plain")
    p.add_argument("--target-probability", type=float, default=0.6)
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("attack", help="pixel-space attack (dense or one-pixel)")
    _add_common(p, "seed", "model", "data", "metric", "target", "out")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--one-pixel", action="store_true")
    p.add_argument("--any-other", action="store_true",
                   help="flip to any other class (one-pixel only)")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--target-probability", type=float, default=0.6)
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("hidden", help="counterfactual in a hidden layer")
    _add_common(p, "seed", "model", "data", "metric", "target", "out")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--layer", type=int, required=True)
    p.add_argument("--annotations", help="unit annotation JSON path")
    p.add_argument("--subject", default="input")
    p.add_argument("--target-probability", type=float, default=0.6)
    p.set_defaults(func=_cmd_hidden)

    p = sub.add_parser("probe", help="exemplars / maximization / saliency")
    _add_common(p, "seed", "model", "out")
    p.add_argument("--data", help="dataset CSV path")
    p.add_argument("--layer", type=int, required=True)
    p.add_argument("--unit", type=int)
    p.add_argument("--direction-file", help="JSON array, unit-norm direction")
    p.add_argument("--exemplars", type=int, default=0, help="top-k exemplar scan")
    p.add_argument("--maximize", action="store_true")
    p.add_argument("--saliency", type=int, default=None, metavar="ROW")
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--seed-input", default="zeros", choices=["zeros", "noise"])
    p.add_argument("--image-shape", help="RxC, emit PGM files")
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("divide", help="run the full divide experiment")
    _add_common(p, "seed", "catalog", "format")
    p.add_argument("--tabular-model", required=True)
    p.add_argument("--tabular-data", required=True)
    p.add_argument("--pixel-model", required=True)
    p.add_argument("--pixel-data", required=True)
    p.add_argument("--tabular-target")
    p.add_argument("--pixel-target")
    p.add_argument("--one-pixel", action="store_true")
    p.add_argument("--sample-limit", type=int, default=12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_divide)

    p = sub.add_parser("report", help="re-emit a report from its JSON")
    _add_common(p, "format")
    p.add_argument("--input", required=True, help="report.json path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (CfxkitError, IndexError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        code = EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
