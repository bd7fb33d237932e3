#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.cascade
~~~~~~~~~~~~

Provides cascade training and inference. Every layer fits random and extremely
randomized forests on its input, turns their out-of-fold predictions into new
features, enhances them with the label relationship patterns, swaps back the
previous layer's features for degraded samples and feeds the result (next to
the original features) to the following layer.

Examples:
    basic usage::

        >>> from erdf.cascade import CascadeConfig, fit_cascade, predict
        >>> from erdf.io import generate_synthetic, SyntheticSpec
        >>>
        >>> dataset = generate_synthetic(SyntheticSpec(40, 3, 3, seed=1))
        >>> config = CascadeConfig(layers_max=2, n_trees=3, enhancer_trees=2)
        >>> model, diagnostics = fit_cascade(dataset, config)
        >>> predict(model, dataset.features).shape
        (40, 3)

Attributes:
    DEFAULTS (dict): The configuration defaults.
    VARIANTS (dict): Ablation variant name to configuration overrides.
    IMPROVEMENT_FLOOR (float): Changes of the mean stop metric at or below
        this never count as improvements.
"""
from collections import namedtuple

import numpy as np
import pygogo as gogo

from joblib import Parallel, delayed
from sklearn.model_selection import KFold

from . import fntools as ft
from .core import (
    MetricKind,
    ConfigInvalid,
    DimMismatch,
    TooFewSamples,
    as_matrix,
    evaluate_batch,
)
from .enhancement import EnhancerSet, fit_enhancers, pattern_scores
from .reuse import (
    MODES,
    SURROGATE,
    apply_reuse,
    inference_reuse_set,
    select_reuse_set,
)
from .trees import RF, ERF, StructForest, StructTreeParams, fit_forest, regression_params

hdlr = gogo.handlers.stderr_hdlr()
logger = gogo.Gogo(__name__, low_hdlr=hdlr, low_level="info", monolog=True).logger

IMPROVEMENT_FLOOR = 1e-12
MAX_STATE = 2 ** 32

DEFAULTS = {
    "layers_max": 10,
    "early_stop_tolerance": 1,
    "min_delta": 0.0,
    "n_rf": 2,
    "n_erf": 2,
    "n_trees": 100,
    "max_depth": 10,
    "min_leaf": 2,
    "feature_subsample": "sqrt",
    "bagging": True,
    "k_patterns": 5,
    "enhancer_trees": 20,
    "reuse_metric": MetricKind.KL_DIVERGENCE,
    "stop_metric": MetricKind.KL_DIVERGENCE,
    "reuse_inference": SURROGATE,
    "oof_folds": 5,
    "rng_seed": 0,
    "n_jobs": None,
    "enable_enhancement": True,
    "enable_reuse": True,
}


def _to_bool(value):
    if isinstance(value, str):
        lowered = value.strip().lower()

        if lowered in {"true", "yes", "on", "1"}:
            return True
        elif lowered in {"false", "no", "off", "0"}:
            return False

        raise ConfigInvalid("Invalid boolean value: `{}`.".format(value))

    return bool(value)


CASTS = {
    "layers_max": int,
    "early_stop_tolerance": int,
    "min_delta": float,
    "n_rf": int,
    "n_erf": int,
    "n_trees": int,
    "max_depth": int,
    "min_leaf": int,
    "feature_subsample": str,
    "bagging": _to_bool,
    "k_patterns": int,
    "enhancer_trees": int,
    "reuse_metric": MetricKind.parse,
    "stop_metric": MetricKind.parse,
    "reuse_inference": str,
    "oof_folds": int,
    "rng_seed": int,
    "n_jobs": lambda x: x if x is None else int(x),
    "enable_enhancement": _to_bool,
    "enable_reuse": _to_bool,
}

MINIMUMS = {
    "layers_max": 1,
    "early_stop_tolerance": 0,
    "min_delta": 0,
    "n_rf": 0,
    "n_erf": 0,
    "k_patterns": 1,
    "enhancer_trees": 1,
    "oof_folds": 2,
}

VARIANTS = {
    "full": {},
    "wo_fe": {"enable_enhancement": False},
    "wo_fr": {"enable_reuse": False},
    "df": {"enable_enhancement": False, "enable_reuse": False},
}


class CascadeConfig(object):
    """Cascade hyper parameters and ablation switches.

    Every key of `DEFAULTS` may be passed as a keyword; None means the default.

    Examples:
        >>> config = CascadeConfig(layers_max=3, reuse_metric='cosine')
        >>> config.layers_max, config.reuse_metric.key, config.n_forests
        (3, 'cosine', 4)
        >>> CascadeConfig(oof_folds=1)
        Traceback (most recent call last):
        erdf.core.ConfigInvalid: `oof_folds` must be >= 2, got `1`.
        >>> CascadeConfig(depth=3)
        Traceback (most recent call last):
        erdf.core.ConfigInvalid: Unknown config keys: `depth`.
    """

    def __init__(self, **kwargs):
        unknown = sorted(set(kwargs).difference(DEFAULTS))

        if unknown:
            msg = "Unknown config keys: `{}`.".format("`, `".join(unknown))
            raise ConfigInvalid(msg)

        settings = dict(DEFAULTS, **ft.remove_nones(kwargs))

        for key, value in settings.items():
            try:
                value = CASTS[key](value)
            except (TypeError, ValueError) as err:
                if isinstance(err, ConfigInvalid):
                    raise

                msg = "Invalid value for `{}`: `{}`.".format(key, value)
                raise ConfigInvalid(msg)

            setattr(self, key, value)

        for key, minimum in MINIMUMS.items():
            if getattr(self, key) < minimum:
                msg = "`{}` must be >= {}, got `{}`."
                raise ConfigInvalid(msg.format(key, minimum, getattr(self, key)))

        if not self.n_forests:
            raise ConfigInvalid("A layer needs at least one forest.")

        if self.reuse_inference not in MODES:
            msg = "`reuse_inference` must be one of {}, got `{}`."
            raise ConfigInvalid(msg.format(sorted(MODES), self.reuse_inference))

        # validates the tree settings
        self.forest_params()

    @property
    def kinds(self):
        return [RF] * self.n_rf + [ERF] * self.n_erf

    @property
    def n_forests(self):
        return self.n_rf + self.n_erf

    def forest_params(self, seed=0):
        kwargs = {"n_trees": self.n_trees, "rng_seed": seed}
        args = (self.max_depth, self.min_leaf, self.feature_subsample)
        return StructTreeParams(*args, **kwargs)

    def enhancer_params(self, seed=0):
        return regression_params(n_trees=self.enhancer_trees, rng_seed=seed)

    def replace(self, **kwargs):
        return CascadeConfig(**dict(self.to_dict(), **kwargs))

    def variant(self, name):
        """The config of an ablation variant (`full`, `wo_fe`, `wo_fr`, `df`)"""
        try:
            overrides = VARIANTS[name]
        except KeyError:
            raise ConfigInvalid("Unknown variant: `{}`.".format(name))

        return self.replace(**overrides)

    def to_dict(self, portable=False):
        """The settings, with metrics as their keys.

        `portable` drops the runtime-only `n_jobs` setting.
        """
        content = {key: getattr(self, key) for key in DEFAULTS}
        content["reuse_metric"] = self.reuse_metric.key
        content["stop_metric"] = self.stop_metric.key
        return ft.dfilter(content, ["n_jobs"]) if portable else content

    @classmethod
    def from_dict(cls, content):
        return cls(**content)

    def __eq__(self, other):
        return self.to_dict(True) == other.to_dict(True)

    def __repr__(self):
        return "CascadeConfig({})".format(self.to_dict())


class LayerRecord(object):
    """Everything inference needs from one trained layer.

    `tau` is None when the layer did not reuse (layer 0, reuse disabled or no
    degraded sample).
    """

    def __init__(self, forests, enhancers=None, tau=None, **kwargs):
        self.forests = list(forests)
        self.enhancers = enhancers
        self.tau = tau if tau is None else float(tau)
        self.mean_stop_metric = float(kwargs.get("mean_stop_metric", np.nan))
        self.reuse_set_size = int(kwargs.get("reuse_set_size", 0))

    @property
    def input_dim(self):
        return self.forests[0].n_features

    def to_dict(self):
        enhancers = self.enhancers.to_dict() if self.enhancers else None

        return {
            "forests": [forest.to_dict() for forest in self.forests],
            "enhancers": enhancers,
            "tau": self.tau,
            "mean_stop_metric": self.mean_stop_metric,
            "reuse_set_size": self.reuse_set_size,
        }

    @classmethod
    def from_dict(cls, content):
        forests = map(StructForest.from_dict, content["forests"])
        enhancers = content["enhancers"]
        enhancers = EnhancerSet.from_dict(enhancers) if enhancers else None
        kwargs = ft.dfilter(content, ["forests", "enhancers", "tau"])
        return cls(forests, enhancers, content["tau"], **kwargs)


_Diagnostics = namedtuple(
    "LayerDiagnostics",
    [
        "layer",
        "input_width",
        "oof",
        "layer_eval",
        "enhanced",
        "ideal",
        "features",
        "metric_values",
        "decision",
        "means",
    ],
)


class LayerDiagnostics(_Diagnostics):
    """Training time by-products of one layer.

    Attributes:
        layer (int): The layer index.
        input_width (int): Columns of the layer input.
        oof (numpy.ndarray): N x (F*c) out-of-fold predictions.
        layer_eval (numpy.ndarray): N x c mean of the forest predictions.
        enhanced (numpy.ndarray): N x k enhanced features (N x 0 when
            enhancement is off).
        ideal (numpy.ndarray): N x k pattern scores of the true labels (None
            when enhancement is off).
        features (numpy.ndarray): The final new features after reuse.
        metric_values (numpy.ndarray): Per sample reuse metric values.
        decision (ReuseDecision): None on layers that skip reuse.
        means (dict): Metric key to mean value of `layer_eval`.
    """

    @property
    def reuse_set_size(self):
        return len(self.decision.reuse) if self.decision else 0


class CascadeModel(object):
    """A trained cascade; `best_layer` gives the predictions"""

    def __init__(self, initial_enhancers, layers, best_layer, config, **kwargs):
        self.initial_enhancers = initial_enhancers
        self.layers = list(layers)
        self.best_layer = int(best_layer)
        self.config = config
        self.input_dim = int(kwargs["input_dim"])
        self.n_labels = int(kwargs["n_labels"])

        if not 0 <= self.best_layer < len(self.layers):
            msg = "Best layer {} of a {} layer model."
            raise ConfigInvalid(msg.format(self.best_layer, len(self.layers)))

    @property
    def n_layers(self):
        return len(self.layers)

    def predict(self, X):
        return predict(self, X)

    def to_dict(self):
        initial = self.initial_enhancers
        initial = initial.to_dict() if initial else None

        return {
            "config": self.config.to_dict(portable=True),
            "input_dim": self.input_dim,
            "n_labels": self.n_labels,
            "best_layer": self.best_layer,
            "initial_enhancers": initial,
            "layers": [layer.to_dict() for layer in self.layers],
        }

    @classmethod
    def from_dict(cls, content):
        initial = content["initial_enhancers"]
        initial = EnhancerSet.from_dict(initial) if initial else None
        layers = map(LayerRecord.from_dict, content["layers"])
        config = CascadeConfig.from_dict(content["config"])
        kwargs = {"input_dim": content["input_dim"], "n_labels": content["n_labels"]}
        return cls(initial, layers, content["best_layer"], config, **kwargs)

    def __repr__(self):
        msg = "CascadeModel(layers={}, best_layer={}, input_dim={}, n_labels={})"
        args = (self.n_layers, self.best_layer, self.input_dim, self.n_labels)
        return msg.format(*args)


def _fit_slot(X, labels, kind, params, bagging):
    return fit_forest(X, labels, kind, params, bagging, n_jobs=1)


def _fold_prediction(X, labels, train, test, kind, params, bagging):
    forest = _fit_slot(X[train], labels[train], kind, params, bagging)
    return forest.predict(X[test])


def _slot_seeds(config, seed):
    # one seed per forest slot plus one for the fold assignment
    seeds = ft.derive_seeds(seed, config.n_forests + 1)
    return seeds[:-1], seeds[-1] % MAX_STATE


def _layer_eval(oof, n_forests):
    n, width = oof.shape
    return oof.reshape(n, n_forests, width // n_forests).mean(axis=1)


def oof_predictions(X, labels, config=None, seed=None):
    """Computes every forest slot's out-of-fold predictions.

    Each sample's prediction in a slot comes from the fold model that did not
    see it. Slots are ordered RF first, then ERF.

    Args:
        X (Seq[Seq[float]]): N x p layer input.
        labels (Seq[Seq[float]]): N x c label distributions.
        config (CascadeConfig): The settings (default: the defaults).
        seed (int): Seeds the fold assignment and the forests (default:
            `config.rng_seed`).

    Returns:
        Tuple(numpy.ndarray, numpy.ndarray): The N x (F*c) predictions and
            their N x c per slot mean.

    Examples:
        >>> config = CascadeConfig(n_trees=2, oof_folds=2)
        >>> H, layer_eval = oof_predictions(
        ...     [[0.0], [1.0], [2.0], [3.0]], [[0.25, 0.75]] * 4, config)
        >>> H.shape, layer_eval.round(12).tolist()[0]
        ((4, 8), [0.25, 0.75])
    """
    config = config or CascadeConfig()
    X, labels = as_matrix(X, "X"), as_matrix(labels, "labels")
    n, c = labels.shape

    if n < config.oof_folds:
        msg = "Need at least {} samples for {} folds, got {}."
        raise TooFewSamples(msg.format(config.oof_folds, config.oof_folds, n))

    seed = config.rng_seed if seed is None else seed
    seeds, state = _slot_seeds(config, seed)
    folds = list(KFold(config.oof_folds, shuffle=True, random_state=state).split(X))
    oof = np.zeros((n, config.n_forests * c))
    slots = list(enumerate(zip(config.kinds, seeds)))
    jobs = []

    for slot, (kind, slot_seed) in slots:
        params = config.forest_params(slot_seed)

        for train, test in folds:
            args = (X, labels, train, test, kind, params, config.bagging)
            jobs.append(delayed(_fold_prediction)(*args))

    n_jobs = ft.get_n_jobs(config.n_jobs)
    predictions = iter(Parallel(n_jobs=n_jobs)(jobs))

    for slot, _ in slots:
        for _, test in folds:
            oof[test, slot * c:(slot + 1) * c] = next(predictions)

    logger.debug("computed %s fold predictions on %s", len(jobs), X.shape)
    return oof, _layer_eval(oof, config.n_forests)


def _fit_layer_forests(X, labels, config, seed):
    seeds = _slot_seeds(config, seed)[0]
    args = zip(config.kinds, seeds)
    jobs = (
        delayed(_fit_slot)(X, labels, k, config.forest_params(s), config.bagging)
        for k, s in args
    )

    return Parallel(n_jobs=ft.get_n_jobs(config.n_jobs))(jobs)


def _improves(metric, score, best, min_delta=0.0):
    margin = max(min_delta, IMPROVEMENT_FLOOR)

    if best is None:
        improved = True
    elif metric.is_distance:
        improved = score < best - margin
    else:
        improved = score > best + margin

    return improved


def _enhance(X, H, enhancers):
    if enhancers:
        enhanced = enhancers.transform(np.hstack([X, H]))
    else:
        enhanced = np.zeros((X.shape[0], 0))

    return enhanced


def fit_cascade(dataset, config=None):
    """Trains a cascade on a label distribution dataset.

    Layer 0 sees the original features next to the initial enhancement. Each
    layer then computes out-of-fold predictions `H`, refits its forests on the
    whole layer input, enhances `[X, H]` and concatenates the result with `H`.
    From layer 1 on, the samples that degraded past the layer threshold take
    the previous layer's rows. Training halts once `early_stop_tolerance + 1`
    consecutive layers fail to improve the best mean stop metric.

    Args:
        dataset (LdlDataset): The training data.
        config (CascadeConfig): The settings (default: the defaults).

    Returns:
        Tuple(CascadeModel, List[LayerDiagnostics])

    Examples:
        >>> from erdf.core import LdlDataset
        >>> features = [[float(i)] for i in range(6)]
        >>> dataset = LdlDataset(features, [[0.3, 0.7]] * 6)
        >>> config = CascadeConfig(layers_max=1, n_trees=2, oof_folds=2)
        >>> model, diagnostics = fit_cascade(dataset, config)
        >>> model.n_layers, model.best_layer, diagnostics[0].input_width
        (1, 0, 3)
    """
    config = config or CascadeConfig()
    X, labels = dataset.features, dataset.labels
    n, d, c = dataset.n_samples, dataset.n_features, dataset.n_labels

    if n < config.oof_folds:
        msg = "Need at least {} samples for {} folds, got {}."
        raise TooFewSamples(msg.format(config.oof_folds, config.oof_folds, n))

    seeds = ft.derive_seeds(config.rng_seed, 2 * config.layers_max + 1)
    enhance = config.enable_enhancement
    kwargs = {"bagging": config.bagging, "n_jobs": config.n_jobs}

    if enhance:
        params = config.enhancer_params(seeds[0])
        initial = fit_enhancers(X, labels, config.k_patterns, params, **kwargs)
        inputs = np.hstack([X, initial.transform(X)])
    else:
        initial = None
        inputs = X

    layers, diagnostics = [], []
    best, best_layer, failures = None, 0, 0
    previous, prev_values = None, None

    for layer in range(config.layers_max):
        seed, enhancer_seed = seeds[2 * layer + 1], seeds[2 * layer + 2]
        oof, layer_eval = oof_predictions(inputs, labels, config, seed)
        forests = _fit_layer_forests(inputs, labels, config, seed)

        if enhance:
            params = config.enhancer_params(enhancer_seed)
            stacked = np.hstack([X, oof])
            args = (stacked, labels, config.k_patterns, params)
            enhancers = fit_enhancers(*args, **kwargs)
            enhanced = _enhance(X, oof, enhancers)
            ideal = pattern_scores(labels, enhancers.basis)
        else:
            enhancers, ideal = None, None
            enhanced = np.zeros((n, 0))

        new_features = np.hstack([oof, enhanced])
        values = evaluate_batch(config.reuse_metric, labels, layer_eval)[0]

        if layer and config.enable_reuse:
            decision = select_reuse_set(prev_values, values, config.reuse_metric)
            features = apply_reuse(new_features, previous, decision.reuse)

            if not decision.active:
                logger.warning("layer %s: no sample degraded, reuse skipped", layer)
        else:
            decision, features = None, new_features

        means = {
            kind.key: evaluate_batch(kind, labels, layer_eval)[1]
            for kind in MetricKind
        }

        score = means[config.stop_metric.key]
        tau = decision.tau if decision else None
        reuse_set_size = len(decision.reuse) if decision else 0
        record_kwargs = {"mean_stop_metric": score, "reuse_set_size": reuse_set_size}
        layers.append(LayerRecord(forests, enhancers, tau, **record_kwargs))

        args = (layer, inputs.shape[1], oof, layer_eval, enhanced, ideal)
        diagnostics.append(LayerDiagnostics(*args, features, values, decision, means))

        msg = "layer %s: mean %s %.6f, reused %s, tau %s"
        logger.info(msg, layer, config.stop_metric.key, score, reuse_set_size, tau)

        if _improves(config.stop_metric, score, best, config.min_delta):
            best, best_layer, failures = score, layer, 0
        else:
            failures += 1

        if failures > config.early_stop_tolerance:
            logger.info("no improvement for %s layers, stopping", failures)
            break

        previous, prev_values = features, values
        inputs = np.hstack([X, features])

    kwargs = {"input_dim": d, "n_labels": c}
    model = CascadeModel(initial, layers, best_layer, config, **kwargs)
    logger.info("trained %s layers, best layer %s", model.n_layers, best_layer)
    return model, diagnostics


def predict_layers(model, X, last=None):
    """Runs unseen samples through the cascade.

    Args:
        model (CascadeModel): The trained model.
        X (Seq[Seq[float]]): M x d features.
        last (int): Index of the final layer to run (default: the last
            trained layer).

    Returns:
        List[numpy.ndarray]: The M x c prediction of every layer up to `last`.
    """
    X = np.asarray(X, dtype=float)

    if X.ndim != 2 or X.shape[1] != model.input_dim:
        msg = "Expected {} features, got shape {}."
        raise DimMismatch(msg.format(model.input_dim, X.shape))

    config = model.config
    last = model.n_layers - 1 if last is None else last
    initial = model.initial_enhancers
    inputs = np.hstack([X, initial.transform(X)]) if initial else X
    previous, prev_eval, predictions = None, None, []

    for layer, record in enumerate(model.layers[:last + 1]):
        blocks = [forest.predict(inputs) for forest in record.forests]
        oof = np.hstack(blocks)
        layer_eval = np.mean(blocks, axis=0)
        new_features = np.hstack([oof, _enhance(X, oof, record.enhancers)])

        if layer and config.enable_reuse:
            args = (prev_eval, layer_eval, record.tau, config.reuse_metric)
            reuse = inference_reuse_set(*args, mode=config.reuse_inference)
            features = apply_reuse(new_features, previous, reuse)
        else:
            features = new_features

        predictions.append(layer_eval)
        previous, prev_eval = features, layer_eval
        inputs = np.hstack([X, features])

    return predictions


def predict(model, X):
    """Predicts label distributions with the best layer.

    Args:
        model (CascadeModel): The trained model.
        X (Seq[Seq[float]]): M x d features.

    Returns:
        numpy.ndarray: M x c label distributions.
    """
    return predict_layers(model, X, model.best_layer)[-1]


def evaluate_model(model, dataset, metrics=None):
    """Scores the model's predictions on a dataset.

    Args:
        model (CascadeModel): The trained model.
        dataset (LdlDataset): The data to score.
        metrics (Seq[MetricKind]): The metrics (default: all six).

    Returns:
        List[dict]: One record per metric with keys `metric`, `mean` and
            `per_sample`.
    """
    predictions = predict(model, dataset.features)
    kinds = [MetricKind.parse(m) for m in ft.listize(metrics)] or list(MetricKind)
    records = []

    for kind in kinds:
        per_sample, mean = evaluate_batch(kind, dataset.labels, predictions)
        records.append({"metric": kind, "mean": mean, "per_sample": per_sample})

    return records
