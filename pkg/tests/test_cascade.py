# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab
"""
tests.test_cascade
~~~~~~~~~~~~~~~~~~

Provides cascade training and inference unit tests.
"""
import nose.tools as nt
import numpy as np

from erdf.core import (
    MetricKind,
    ConfigInvalid,
    DimMismatch,
    TooFewSamples,
    evaluate_batch,
)
from erdf.cascade import (
    CascadeConfig,
    CascadeModel,
    evaluate_model,
    fit_cascade,
    oof_predictions,
    predict,
    predict_layers,
)
from erdf.io import SyntheticSpec, generate_synthetic
from . import fast_config, homogeneous_dataset

D, C, K = 4, 3, 3


def setup_module():
    """trains the shared cascade"""
    global dataset, config, model, diagnostics
    dataset = generate_synthetic(SyntheticSpec(60, D, C, k_true=2, seed=3))
    config = fast_config(layers_max=3, early_stop_tolerance=2)
    model, diagnostics = fit_cascade(dataset, config)
    print("Site Module Setup\n")


class TestConfig:
    def test_defaults(self):
        config = CascadeConfig()
        nt.assert_equal(10, config.layers_max)
        nt.assert_equal(4, config.n_forests)
        nt.assert_equal(MetricKind.KL_DIVERGENCE, config.reuse_metric)
        nt.assert_equal("surrogate", config.reuse_inference)
        nt.assert_equal(["rf", "rf", "erf", "erf"], config.kinds)

    def test_casts(self):
        config = CascadeConfig(layers_max="4", bagging="no", stop_metric="cosine")
        nt.assert_equal(4, config.layers_max)
        nt.assert_false(config.bagging)
        nt.assert_equal(MetricKind.COSINE, config.stop_metric)

    def test_invalid(self):
        with nt.assert_raises(ConfigInvalid):
            CascadeConfig(depth=3)

        with nt.assert_raises(ConfigInvalid):
            CascadeConfig(layers_max=0)

        with nt.assert_raises(ConfigInvalid):
            CascadeConfig(n_rf=0, n_erf=0)

        with nt.assert_raises(ConfigInvalid):
            CascadeConfig(layers_max="many")

        with nt.assert_raises(ConfigInvalid):
            CascadeConfig(reuse_inference="oracle")

        with nt.assert_raises(ConfigInvalid):
            CascadeConfig(feature_subsample="log2")

    def test_round_trip(self):
        config = CascadeConfig(n_rf=1, reuse_metric="clark", n_jobs=2)
        nt.assert_equal(config, CascadeConfig.from_dict(config.to_dict()))
        nt.assert_not_in("n_jobs", config.to_dict(portable=True))
        nt.assert_equal("clark", config.to_dict()["reuse_metric"])

    def test_variants(self):
        config = CascadeConfig()
        df = config.variant("df")
        nt.assert_false(df.enable_enhancement)
        nt.assert_false(df.enable_reuse)
        nt.assert_true(config.variant("wo_fe").enable_reuse)
        nt.assert_false(config.variant("wo_fr").enable_reuse)

        with nt.assert_raises(ConfigInvalid):
            config.variant("w/o-fe")


class TestOutOfFold:
    def test_blocks(self):
        X = dataset.features
        H, layer_eval = oof_predictions(X, dataset.labels, config, 5)
        nt.assert_equal((60, config.n_forests * C), H.shape)

        for block in np.split(H, config.n_forests, axis=1):
            nt.assert_true(np.allclose(block.sum(axis=1), 1, atol=1e-9))

        blocks = np.split(H, config.n_forests, axis=1)
        nt.assert_true(np.allclose(layer_eval, np.mean(blocks, axis=0)))

    def test_seeded(self):
        first = oof_predictions(dataset.features, dataset.labels, config, 5)[0]
        second = oof_predictions(dataset.features, dataset.labels, config, 5)[0]
        nt.assert_true(np.array_equal(first, second))

    def test_too_few(self):
        with nt.assert_raises(TooFewSamples):
            oof_predictions([[0.0]], [[0.5, 0.5]], config)


class TestFit:
    def test_layers(self):
        nt.assert_equal(3, model.n_layers)
        nt.assert_equal(3, len(diagnostics))
        nt.assert_equal(D, model.input_dim)
        nt.assert_equal(C, model.n_labels)

    def test_widths(self):
        nt.assert_equal(D + K, diagnostics[0].input_width)

        for layer in diagnostics[1:]:
            nt.assert_equal(D + config.n_forests * C + K, layer.input_width)

        for layer in diagnostics:
            nt.assert_equal((60, config.n_forests * C + K), layer.features.shape)
            nt.assert_equal((60, K), layer.enhanced.shape)

    def test_simplex(self):
        for layer in diagnostics:
            nt.assert_true(np.allclose(layer.layer_eval.sum(axis=1), 1, atol=1e-9))

        for prediction in predict_layers(model, dataset.features):
            nt.assert_true(np.allclose(prediction.sum(axis=1), 1, atol=1e-9))
            nt.assert_true((prediction >= 0).all())

    def test_reused_rows(self):
        nt.assert_is_none(diagnostics[0].decision)

        for previous, layer in zip(diagnostics, diagnostics[1:]):
            for row in layer.decision.reuse:
                expected = previous.features[row].tolist()
                nt.assert_equal(expected, layer.features[row].tolist())

    def test_reuse_subset_of_degraded(self):
        for layer in diagnostics[1:]:
            decision = layer.decision
            nt.assert_true(set(decision.reuse).issubset(decision.degraded))
            nt.assert_equal(layer.reuse_set_size, len(decision.reuse))

    def test_records(self):
        for record, layer in zip(model.layers, diagnostics):
            nt.assert_equal(layer.means["kl"], record.mean_stop_metric)
            tau = layer.decision.tau if layer.decision else None
            nt.assert_equal(tau, record.tau)
            nt.assert_equal(config.n_forests, len(record.forests))
            nt.assert_equal(layer.input_width, record.input_dim)

    def test_metric_values(self):
        for layer in diagnostics:
            args = ("kl", dataset.labels, layer.layer_eval)
            nt.assert_true(np.array_equal(evaluate_batch(*args)[0], layer.metric_values))

    def test_best_layer(self):
        scores = [record.mean_stop_metric for record in model.layers]
        nt.assert_equal(int(np.argmin(scores)), model.best_layer)
        nt.assert_true(scores[model.best_layer] <= scores[0])

    def test_deterministic(self):
        again, _ = fit_cascade(dataset, config)
        first = predict(model, dataset.features)
        nt.assert_true(np.array_equal(first, predict(again, dataset.features)))

    def test_predict(self):
        predictions = model.predict(dataset.features[:5])
        layers = predict_layers(model, dataset.features[:5], model.best_layer)
        nt.assert_equal((5, C), predictions.shape)
        nt.assert_true(np.array_equal(layers[-1], predictions))

    def test_dim_mismatch(self):
        with nt.assert_raises(DimMismatch):
            predict(model, np.zeros((2, D + 1)))

    def test_to_dict(self):
        rebuilt = CascadeModel.from_dict(model.to_dict())
        original = predict(model, dataset.features)
        nt.assert_true(np.array_equal(original, predict(rebuilt, dataset.features)))

    def test_evaluate(self):
        records = evaluate_model(model, dataset)
        nt.assert_equal(6, len(records))
        predictions = predict(model, dataset.features)

        for record in records:
            expected = evaluate_batch(record["metric"], dataset.labels, predictions)[1]
            nt.assert_equal(expected, record["mean"])

        records = evaluate_model(model, dataset, ["cosine"])
        nt.assert_equal([MetricKind.COSINE], [r["metric"] for r in records])


class TestVariants:
    def test_without_enhancement(self):
        variant = config.variant("wo_fe")
        trained, layers = fit_cascade(dataset, variant)
        nt.assert_is_none(trained.initial_enhancers)
        nt.assert_equal(D, layers[0].input_width)
        nt.assert_equal(D + config.n_forests * C, layers[1].input_width)
        nt.assert_equal((60, 0), layers[1].enhanced.shape)
        nt.assert_is_none(layers[1].ideal)

    def test_without_reuse(self):
        trained, layers = fit_cascade(dataset, config.variant("wo_fr"))

        for record, layer in zip(trained.layers, layers):
            nt.assert_is_none(record.tau)
            nt.assert_is_none(layer.decision)
            nt.assert_equal(0, record.reuse_set_size)

    def test_single_forest(self):
        trained, layers = fit_cascade(dataset, config.replace(n_rf=1, n_erf=0))
        nt.assert_equal(D + C + K, layers[1].input_width)

    def test_similarity_stop_metric(self):
        variant = config.replace(stop_metric="intersection", reuse_metric="cosine")
        trained, _ = fit_cascade(dataset, variant)
        scores = [record.mean_stop_metric for record in trained.layers]
        nt.assert_equal(int(np.argmax(scores)), trained.best_layer)


class TestEarlyStop:
    def test_plateau(self):
        variant = fast_config(layers_max=10, early_stop_tolerance=1)
        trained, layers = fit_cascade(homogeneous_dataset(), variant)
        nt.assert_equal(3, trained.n_layers)
        nt.assert_equal(0, trained.best_layer)

    def test_zero_tolerance(self):
        variant = fast_config(layers_max=10, early_stop_tolerance=0)
        trained, _ = fit_cascade(homogeneous_dataset(), variant)
        nt.assert_equal(2, trained.n_layers)

    def test_single_layer(self):
        trained, layers = fit_cascade(homogeneous_dataset(), fast_config(layers_max=1))
        nt.assert_equal(1, trained.n_layers)
        nt.assert_equal(0, trained.best_layer)

    def test_too_few(self):
        with nt.assert_raises(TooFewSamples):
            fit_cascade(homogeneous_dataset(n=2), fast_config(oof_folds=3))
