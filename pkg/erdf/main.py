#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.main
~~~~~~~~~

Provides the `erdf` command line interface: training, evaluation, prediction,
ablation, diagnostics export and synthetic data generation.

Examples:
    basic usage::

        $ erdf synth data.csv --n-samples 500 --n-features 20 --n-labels 5
        $ erdf train data.csv --model model.json --layers-max 5
        $ erdf eval data.csv --repeats 3 --baselines
        $ erdf ablate data.csv --repeats 3
"""
import logging
import os
import sys

from argparse import ArgumentParser, BooleanOptionalAction

import numpy as np
import pygogo as gogo

from . import (
    __version__,
    baselines,
    cascade,
    convert as cv,
    diagnostics as dg,
    enhancement,
    fntools as ft,
    io,
    process as pr,
    trees,
)
from .cascade import DEFAULTS, VARIANTS, CascadeConfig, fit_cascade
from .core import (
    ErdfError,
    IoError,
    MetricKind,
    ConfigInvalid,
    EmptyInput,
    ParseError,
    SchemaError,
    evaluate_batch,
)

hdlr = gogo.handlers.stderr_hdlr()
logger = gogo.Gogo(__name__, low_hdlr=hdlr, low_level="info", monolog=True).logger

LOGGED = [trees, enhancement, cascade, io]
DESCRIPTION = "Label distribution learning with an enhanced deep forest"
ALGORITHMS = ["erdf", "aaknn", "mean"]
CONFIG_HELP = {
    "layers_max": "Maximum cascade layers",
    "early_stop_tolerance": "Extra non-improving layers allowed before stopping",
    "min_delta": "Smallest change of the stop metric counted as improvement",
    "n_rf": "Random forests per layer",
    "n_erf": "Extremely randomized forests per layer",
    "n_trees": "Trees per forest",
    "max_depth": "Maximum tree depth",
    "min_leaf": "Minimum samples per leaf",
    "feature_subsample": "Features tried per node (sqrt or all)",
    "bagging": "Bootstrap rows for random forests and enhancers",
    "k_patterns": "Label relationship patterns",
    "enhancer_trees": "Trees per enhancer forest",
    "reuse_metric": "Metric deciding which samples reuse features",
    "stop_metric": "Metric used for early stopping and the best layer",
    "reuse_inference": "Reuse rule for unseen samples (surrogate or off)",
    "oof_folds": "Folds of the out-of-fold predictions",
    "rng_seed": "Seed of the cascade (defaults to --seed)",
    "n_jobs": "Parallel workers (defaults to $ERDF_THREADS or 1)",
    "enable_enhancement": "Enhance features with label correlation",
    "enable_reuse": "Reuse features of degraded samples",
}


def set_verbosity(verbose=False):
    level = logging.DEBUG if verbose else logging.INFO

    for module in LOGGED + [sys.modules[__name__]]:
        module.logger.setLevel(level)

        for handler in module.logger.handlers:
            handler.setLevel(level)


def fmt(value, digits=4):
    return "{:.{}f}".format(value, digits)


def format_table(records, header):
    """Renders records as a left aligned text table

    Examples:
        >>> print(format_table([{'a': '1', 'b': 'xyz'}], ['a', 'b']))
        a  b
        1  xyz
    """
    rows = [header] + [[str(r.get(h, "")) for h in header] for r in records]
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join(line.rstrip() for line in lines)


def emit(records, header, output=None):
    """Prints a table and optionally writes it as a delimited file"""
    print(format_table(records, header))

    if output:
        content = cv.records2csv(records, ft.get_delimiter(output), header=header)
        io.write(output, content)


def get_config(args, seed=None):
    """Merges the config file, the flag overrides and the variant"""
    content = io.read_config(args.config) if args.config else {}
    overrides = ft.remove_nones({key: getattr(args, key, None) for key in DEFAULTS})
    config = CascadeConfig(**dict(content, **overrides))

    if seed is not None and "rng_seed" not in overrides:
        config = config.replace(rng_seed=seed)

    variant = getattr(args, "variant", None)
    return config.variant(variant) if variant else config


def get_seeds(args, config):
    base = config.rng_seed if args.seed is None else args.seed
    return [base + i for i in range(args.repeats)]


def get_metrics(args):
    kinds = [MetricKind.parse(m) for m in ft.listize(args.metric)]
    return kinds or list(MetricKind)


def get_parts(args, seed):
    dataset = io.load_dataset(args.data, args.renormalize)

    if args.no_split:
        return dataset, None

    spec = io.SplitSpec(args.train_fraction, seed)
    return io.split(dataset, spec)


def score_run(model, train, test, metrics, algorithms):
    """Scores every algorithm on the test part (the train part with --no-split)"""
    target = train if test is None else test
    predictions = {}

    if "erdf" in algorithms:
        predictions["erdf"] = model.predict(target.features)

    if "aaknn" in algorithms:
        knn = baselines.aaknn_predict(train, target.features)
        predictions["aaknn"] = knn

    if "mean" in algorithms:
        mean = np.asarray(baselines.mean_predictor(train))
        predictions["mean"] = np.tile(mean, (target.n_samples, 1))

    for name in algorithms:
        for kind in metrics:
            value = evaluate_batch(kind, target.labels, predictions[name])[1]
            yield {"algorithm": name, "metric": kind.key, "value": value}


def comparison_table(results, metrics, columns, column_key):
    """Builds the metric x column table of `mean ± std` cells plus ranks"""
    summary = pr.summarize(results, ["metric", column_key])
    ranked = pr.add_ranks(summary) if len(columns) > 1 else summary
    cells = {(r["metric"], r[column_key]): r for r in ranked}
    records = []

    for kind in metrics:
        record = {"metric": "{} {}".format(kind.title, kind.arrow)}

        for column in columns:
            cell = cells[(kind.key, column)]
            text = "{} ± {}".format(fmt(cell["mean"]), fmt(cell["std"]))

            if len(columns) > 1:
                text += " ({:g})".format(cell["rank"])

            record[column] = text

        records.append(record)

    if len(columns) > 1:
        averages = pr.average_ranks(ranked, column_key)
        record = {"metric": "Avg. rank"}
        record.update((c, fmt(averages[c], 2)) for c in columns)
        records.append(record)

    return records


def cmd_train(args):
    dataset, _ = get_parts(args, args.seed or 0)
    config = get_config(args, args.seed)
    model, _ = fit_cascade(dataset, config)
    io.save_model(model, args.model)
    logger.info("wrote %s (sha1 %s)", args.model, io.hash_file(args.model))
    records = []

    for layer, record in enumerate(model.layers):
        tau = "-" if record.tau is None else fmt(record.tau)

        records.append(
            {
                "layer": str(layer),
                config.stop_metric.key: fmt(record.mean_stop_metric),
                "reused": str(record.reuse_set_size),
                "tau": tau,
                "best": "*" if layer == model.best_layer else "",
            }
        )

    header = ["layer", config.stop_metric.key, "reused", "tau", "best"]
    emit(records, header)


def cmd_eval(args):
    metrics = get_metrics(args)

    if args.model:
        if args.baselines:
            raise ConfigInvalid("`--baselines` trains models, drop `--model`.")

        model = io.load_model(args.model)
        dataset = io.load_dataset(args.data, args.renormalize)
        results = list(score_run(model, dataset, None, metrics, ["erdf"]))
        columns = ["erdf"]
    else:
        config = get_config(args)
        columns = ALGORITHMS if args.baselines else ["erdf"]
        results = []

        for seed in get_seeds(args, config):
            train, test = get_parts(args, seed)
            model, _ = fit_cascade(train, config.replace(rng_seed=seed))
            results.extend(score_run(model, train, test, metrics, columns))

    records = comparison_table(results, metrics, columns, "algorithm")
    emit(records, ["metric"] + columns, args.output)


def cmd_predict(args):
    model = io.load_model(args.model)
    delimiter = ft.get_delimiter(args.data)
    records = list(io.read_csv(args.data, delimiter=delimiter))
    fields = ["f%i" % i for i in range(model.input_dim)]

    if not records:
        raise EmptyInput("`{}` has no rows.".format(args.data))

    missing = [f for f in fields if f not in records[0]]

    if missing:
        msg = "Missing feature columns: `{}`.".format("`, `".join(missing))
        raise SchemaError(msg)

    try:
        X = cv.records2array(records, fields)
    except ValueError as err:
        raise ParseError(str(err))

    predictions = model.predict(X)
    header = ["y%i" % j for j in range(model.n_labels)]
    rows = ([cv.format_float(x) for x in row] for row in predictions)
    records = cv.array2records(rows, header)
    content = cv.records2csv(records, ft.get_delimiter(args.output), header=header)
    io.write(args.output, content)
    logger.info("wrote %s predictions to %s", len(predictions), args.output)


def cmd_ablate(args):
    metrics = get_metrics(args)
    config = get_config(args)
    variants = ft.listize(args.variants) or list(VARIANTS)
    results = []

    for seed in get_seeds(args, config):
        train, test = get_parts(args, seed)

        for name in variants:
            variant = config.variant(name).replace(rng_seed=seed)
            model, _ = fit_cascade(train, variant)

            for record in score_run(model, train, test, metrics, ["erdf"]):
                results.append(dict(record, variant=name))

    records = comparison_table(results, metrics, variants, "variant")
    emit(records, ["metric"] + variants, args.output)


def write_records(records, path, header=None):
    formatted = [
        {k: cv.format_float(v) if isinstance(v, float) else v for k, v in r.items()}
        for r in records
    ]

    content = cv.records2csv(formatted, ft.get_delimiter(path), header=header)
    io.write(path, content)


def cmd_diagnostics(args):
    seed = args.seed or 0
    train, test = get_parts(args, seed)
    config = get_config(args, seed)

    try:
        os.makedirs(args.outdir, exist_ok=True)
    except OSError as err:
        raise IoError("Unable to create `{}`: {}".format(args.outdir, err))

    model, layers = fit_cascade(train, config)
    heatmap = dg.enhanced_correlation(layers)
    header = ["layer"] + ["l%i" % i for i in range(len(heatmap))]
    rows = ([str(i)] + [cv.format_float(x) for x in row] for i, row in enumerate(heatmap))
    heatmap_path = os.path.join(args.outdir, "heatmap.csv")
    io.write(heatmap_path, cv.records2csv(cv.array2records(rows, header)))
    write_records(dg.enhancer_error(layers), os.path.join(args.outdir, "radar.csv"))
    write_records(
        dg.trajectory(model, layers, test), os.path.join(args.outdir, "trajectory.csv")
    )

    if args.compare_reuse:
        model, layers = fit_cascade(train, config.variant("wo_fr"))
        path = os.path.join(args.outdir, "trajectory_wo_fr.csv")
        write_records(dg.trajectory(model, layers, test), path)

    print("wrote diagnostics for {} layers to {}".format(len(heatmap), args.outdir))


def cmd_synth(args):
    kwargs = {"noise_sigma": args.noise_sigma, "seed": args.seed or 0}
    shape = (args.n_samples, args.n_features, args.n_labels, args.k_true)
    dataset = io.generate_synthetic(io.SyntheticSpec(*shape, **kwargs))
    io.save_dataset(dataset, args.output)
    msg = "wrote {} samples ({} features, {} labels) to {}"
    print(msg.format(dataset.n_samples, dataset.n_features, dataset.n_labels, args.output))


def add_config_flags(parser):
    group = parser.add_argument_group("cascade settings")
    group.add_argument("--config", help="YAML file of cascade settings")

    for key, default in DEFAULTS.items():
        flag = "--" + key.replace("_", "-")
        kwargs = {"help": CONFIG_HELP[key], "default": None, "dest": key}

        if isinstance(default, bool):
            kwargs["action"] = BooleanOptionalAction
        elif key in {"reuse_metric", "stop_metric"}:
            kwargs["choices"] = [kind.key for kind in MetricKind]
        elif key == "feature_subsample":
            kwargs["choices"] = sorted(trees.SUBSAMPLES)
        elif key == "reuse_inference":
            kwargs["choices"] = ["surrogate", "off"]
        elif key == "min_delta":
            kwargs["type"] = float
        else:
            kwargs["type"] = int

        group.add_argument(flag, **kwargs)


def add_data_flags(parser, repeats=False):
    parser.add_argument("data", help="Dataset file (f0.., y0.. columns)")
    parser.add_argument("--seed", type=int, help="Split and cascade seed")
    parser.add_argument(
        "--no-split", action="store_true", help="Use the whole file for training"
    )
    parser.add_argument(
        "--train-fraction", type=float, default=0.8, help="Share of training rows"
    )
    parser.add_argument(
        "--renormalize",
        action="store_true",
        help="Rescale label rows whose sum is slightly off",
    )

    if repeats:
        parser.add_argument(
            "--repeats", type=int, default=1, help="Runs with seeds seed, seed+1, ..."
        )
        parser.add_argument(
            "--metric", action="append", help="Metric to report (repeatable)"
        )
        parser.add_argument("--output", help="Also write the table to this file")


def get_parser():
    parser = ArgumentParser(prog="erdf", description=DESCRIPTION)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log debug messages"
    )
    commands = parser.add_subparsers(dest="command", required=True)
    variants = sorted(VARIANTS)

    train = commands.add_parser("train", help="Train a model")
    add_data_flags(train)
    train.add_argument("--model", required=True, help="Model output file")
    train.add_argument("--variant", choices=variants, help="Ablation variant")
    add_config_flags(train)
    train.set_defaults(func=cmd_train)

    evaluate = commands.add_parser("eval", help="Evaluate a model or train and evaluate")
    add_data_flags(evaluate, True)
    evaluate.add_argument("--model", help="Evaluate this model on the whole file")
    evaluate.add_argument(
        "--baselines", action="store_true", help="Compare with AA-KNN and the mean"
    )
    evaluate.add_argument("--variant", choices=variants, help="Ablation variant")
    add_config_flags(evaluate)
    evaluate.set_defaults(func=cmd_eval)

    predict = commands.add_parser("predict", help="Predict label distributions")
    predict.add_argument("data", help="File with f0.. columns")
    predict.add_argument("--model", required=True, help="Model file")
    predict.add_argument("--output", required=True, help="Predictions file")
    predict.set_defaults(func=cmd_predict)

    ablate = commands.add_parser("ablate", help="Compare the ablation variants")
    add_data_flags(ablate, True)
    ablate.add_argument(
        "--variant",
        dest="variants",
        action="append",
        choices=variants,
        help="Variant to include (repeatable, default: all)",
    )
    add_config_flags(ablate)
    ablate.set_defaults(func=cmd_ablate, repeats=3)

    diagnose = commands.add_parser("diagnostics", help="Export diagnostic tables")
    add_data_flags(diagnose)
    diagnose.add_argument("--outdir", required=True, help="Output directory")
    diagnose.add_argument(
        "--compare-reuse",
        action="store_true",
        help="Also write the trajectory without feature reuse",
    )
    add_config_flags(diagnose)
    diagnose.set_defaults(func=cmd_diagnostics)

    synth = commands.add_parser("synth", help="Generate a synthetic dataset")
    synth.add_argument("output", help="Dataset output file")
    synth.add_argument("--n-samples", type=int, default=2000)
    synth.add_argument("--n-features", type=int, default=30)
    synth.add_argument("--n-labels", type=int, default=6)
    synth.add_argument("--k-true", type=int, default=3)
    synth.add_argument("--noise-sigma", type=float, default=0.5)
    synth.add_argument("--seed", type=int, help="Generator seed (default: 0)")
    synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    """Runs a command and returns the exit status"""
    args = get_parser().parse_args(argv)
    set_verbosity(args.verbose)

    try:
        args.func(args)
    except ErdfError as err:
        sys.stderr.write("{}: {}\n".format(err.category, err))
        return 1

    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
