# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab
"""
tests.test_core
~~~~~~~~~~~~~~~

Provides distribution, dataset and metric unit tests.
"""
import math

import nose.tools as nt
import numpy as np

from erdf import EPSILON
from erdf.core import (
    MetricKind,
    LabelDistribution,
    LdlDataset,
    clip_and_renormalize,
    evaluate,
    evaluate_batch,
    validate_distribution,
    ConfigInvalid,
    EmptyInput,
    LengthMismatch,
    NegativeEntry,
    NonFinite,
    ShapeMismatch,
    SumOutOfTolerance,
)
from . import random_simplex


def setup_module():
    """site initialization"""
    global initialized
    initialized = True
    print("Site Module Setup\n")


def _clip(values):
    floor = [max(v, EPSILON) for v in values]
    total = sum(floor)
    return [v / total for v in floor]


def _oracle(key, truth, pred):
    """Straight from the formulas, one pair at a time"""
    pairs = list(zip(truth, pred))

    if key == "chebyshev":
        value = max(abs(a - b) for a, b in pairs)
    elif key == "clark":
        value = math.sqrt(sum((a - b) ** 2 / (a + b) ** 2 for a, b in pairs if a + b))
    elif key == "canberra":
        value = sum(abs(a - b) / (a + b) for a, b in pairs if a + b)
    elif key == "kl":
        clipped = zip(_clip(truth), _clip(pred))
        value = sum(a * math.log(a / b) for a, b in clipped)
    elif key == "cosine":
        dot = sum(a * b for a, b in pairs)
        norms = math.sqrt(sum(a * a for a in truth) * sum(b * b for b in pred))
        value = dot / norms
    else:
        value = sum(min(a, b) for a, b in pairs)

    return value


class TestLabelDistribution:
    def test_valid(self):
        dist = validate_distribution([0.03, 0.24, 0.21, 0.4, 0.03, 0.09])
        nt.assert_equal(6, len(dist))
        nt.assert_almost_equal(1.0, sum(dist))

    def test_rejects(self):
        with nt.assert_raises(SumOutOfTolerance):
            validate_distribution([0.5, 0.6])

        with nt.assert_raises(NegativeEntry):
            validate_distribution([1.5, -0.5])

        with nt.assert_raises(NonFinite):
            validate_distribution([float("nan"), 1.0])

        with nt.assert_raises(LengthMismatch):
            validate_distribution([1.0])

    def test_renormalize_window(self):
        dist = validate_distribution([0.5, 0.5009], renormalize=True)
        nt.assert_almost_equal(1.0, sum(dist), places=12)

        with nt.assert_raises(SumOutOfTolerance):
            validate_distribution([0.5, 0.502], renormalize=True)

    def test_immutable(self):
        dist = LabelDistribution([0.5, 0.5])

        with nt.assert_raises(ValueError):
            dist.values[0] = 1.0

    def test_error_category(self):
        try:
            validate_distribution([0.6, 0.6])
        except SumOutOfTolerance as err:
            nt.assert_equal("SumOutOfTolerance", err.category)
            nt.assert_equal(0, err.row)


class TestDataset:
    def test_shape(self):
        dataset = LdlDataset([[1.0, 2.0], [3.0, 4.0]], [[1, 0], [0.5, 0.5]])
        nt.assert_equal((2, 2, 2), (dataset.n_samples, dataset.n_features, dataset.n_labels))
        nt.assert_equal(2, len(dataset))

    def test_mismatch(self):
        with nt.assert_raises(ShapeMismatch):
            LdlDataset([[1.0], [2.0]], [[0.5, 0.5]])

        with nt.assert_raises(ShapeMismatch):
            LdlDataset([[1.0]], [[1.0]])

    def test_empty(self):
        with nt.assert_raises(EmptyInput):
            LdlDataset(np.zeros((1, 0)), [[0.5, 0.5]])

    def test_non_finite_features(self):
        with nt.assert_raises(NonFinite):
            LdlDataset([[float("inf")]], [[0.5, 0.5]])

    def test_subset(self):
        dataset = LdlDataset([[0.0], [1.0], [2.0]], [[1, 0], [0, 1], [0.5, 0.5]])
        subset = dataset.subset([2, 0])
        nt.assert_equal([[2.0], [0.0]], subset.features.tolist())
        nt.assert_equal(["y0", "y1"], subset.label_names)


class TestClip:
    def test_invariants(self):
        rng = np.random.default_rng(3)
        rows = random_simplex(rng, 50, 6)
        rows[rows < 0.1] = 0
        clipped = clip_and_renormalize(rows)
        nt.assert_true((clipped >= EPSILON - 1e-18).all())
        nt.assert_true(np.allclose(clipped.sum(axis=1), 1, atol=1e-12))

    def test_small_mass_rows(self):
        rng = np.random.default_rng(9)
        scales = rng.choice([1, 1e-3, 1e-9], size=(40, 1))
        rows = rng.uniform(0, 1, size=(40, 5)) * scales
        rows[rows < 0.2 * rows.max(axis=1, keepdims=True)] = 0
        rows = np.vstack([rows, [[1e-8] * 5], [[3e-9, 0, 1e-9, 0, 0]]])
        clipped = clip_and_renormalize(rows)
        nt.assert_true((clipped >= EPSILON).all())
        nt.assert_true((np.abs(clipped.sum(axis=1) - 1) <= 1e-12).all())

    def test_tiny_uniform_row(self):
        nt.assert_equal([0.5, 0.5], clip_and_renormalize([1e-8, 1e-8]).tolist())

    def test_untouched(self):
        nt.assert_equal([0.25, 0.75], clip_and_renormalize([0.25, 0.75]).tolist())

    def test_zero_row(self):
        nt.assert_equal([0.5, 0.5], clip_and_renormalize([0.0, 0.0]).tolist())

    def test_bad_epsilon(self):
        with nt.assert_raises(ValueError):
            clip_and_renormalize([0.5, 0.5], epsilon=0.01)


class TestMetrics:
    def test_parse(self):
        nt.assert_equal(MetricKind.KL_DIVERGENCE, MetricKind.parse("KL-divergence"))
        nt.assert_equal(MetricKind.INTERSECTION, MetricKind.parse("intersection"))

        with nt.assert_raises(ConfigInvalid):
            MetricKind.parse("euclidean")

    def test_identical(self):
        dist = [0.1, 0.2, 0.3, 0.4]

        for kind in MetricKind:
            expected = 0.0 if kind.is_distance else 1.0
            nt.assert_almost_equal(expected, evaluate(kind, dist, dist), places=12)

    def test_known_values(self):
        nt.assert_equal(0.5, evaluate("chebyshev", [1, 0], [0.5, 0.5]))
        nt.assert_almost_equal(1.2, evaluate("canberra", [0.8, 0.2], [0.2, 0.8]))
        nt.assert_almost_equal(0.5, evaluate("intersection", [1, 0], [0.5, 0.5]))

    def test_oracle(self):
        rng = np.random.default_rng(11)

        for c in (2, 5, 9):
            truths = random_simplex(rng, 120, c)
            preds = random_simplex(rng, 120, c)

            for kind in MetricKind:
                per_sample, mean = evaluate_batch(kind, truths, preds)

                for truth, pred, value in zip(truths, preds, per_sample):
                    expected = _oracle(kind.key, truth.tolist(), pred.tolist())
                    nt.assert_almost_equal(expected, value, delta=1e-9)

                nt.assert_almost_equal(float(per_sample.mean()), mean)

    def test_kl_with_zeros(self):
        value = evaluate("kl", [1, 0], [0, 1])
        nt.assert_true(np.isfinite(value))
        nt.assert_true(value > 10)

    def test_length_mismatch(self):
        with nt.assert_raises(LengthMismatch):
            evaluate("kl", [0.5, 0.5], [0.2, 0.3, 0.5])

        with nt.assert_raises(ShapeMismatch):
            evaluate_batch("kl", [[0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]])

    def test_direction(self):
        nt.assert_true(MetricKind.CLARK.better(0.1, 0.2))
        nt.assert_true(MetricKind.INTERSECTION.better(0.9, 0.8))
        nt.assert_equal("↑", MetricKind.COSINE.arrow)

    def test_symmetry(self):
        rng = np.random.default_rng(13)
        first, second = random_simplex(rng, 100, 5), random_simplex(rng, 100, 5)

        for kind in MetricKind:
            if kind is not MetricKind.KL_DIVERGENCE:
                forward = evaluate_batch(kind, first, second)[0]
                backward = evaluate_batch(kind, second, first)[0]
                nt.assert_true(np.allclose(forward, backward, rtol=0, atol=1e-12))

    def test_kl_asymmetric(self):
        forward = evaluate("kl", [0.9, 0.1], [0.5, 0.5])
        backward = evaluate("kl", [0.5, 0.5], [0.9, 0.1])
        nt.assert_almost_equal(0.3681, forward, places=4)
        nt.assert_almost_equal(0.5108, backward, places=4)

    def test_kl_nonnegative(self):
        nt.assert_true(evaluate("kl", [0.9, 0.1], [0.9 + 1e-16, 0.1 - 1e-16]) >= 0)

        rng = np.random.default_rng(17)
        truths = random_simplex(rng, 1000, 6)
        nudged = truths * (1 + rng.normal(0, 1e-15, size=truths.shape))
        predictions = nudged / nudged.sum(axis=1, keepdims=True)
        per_sample = evaluate_batch("kl", truths, predictions)[0]
        nt.assert_true(per_sample.min() >= 0)

    def test_cosine_batch(self):
        per_sample, mean = evaluate_batch("cosine", [[0.9, 0.1]], [[0.1, 0.9]])
        nt.assert_almost_equal(0.18 / 0.82, mean, places=12)
        nt.assert_almost_equal(0.2195, per_sample[0], places=4)
