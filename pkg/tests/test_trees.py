# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab
"""
tests.test_trees
~~~~~~~~~~~~~~~~

Provides tree and forest unit tests.
"""
import nose.tools as nt
import numpy as np

from erdf.core import (
    LabelDistribution,
    ConfigInvalid,
    LengthMismatch,
    ShapeMismatch,
    evaluate_batch,
)
from erdf.trees import (
    RF,
    ERF,
    LeafNode,
    SplitNode,
    StructTreeParams,
    Tree,
    fit_forest,
    fit_regression_forest,
    fit_struct_tree,
    node_impurity,
    predict_forest,
    predict_regression_forest,
    predict_tree,
    regression_params,
)
from . import random_simplex


def setup_module():
    """site initialization"""
    global initialized
    initialized = True
    print("Site Module Setup\n")


class TestStructTree:
    def setUp(self):
        rng = np.random.default_rng(5)
        self.X = rng.uniform(-1, 1, size=(60, 4))
        self.labels = random_simplex(rng, 60, 3)

    def test_single_split(self):
        params = StructTreeParams(min_leaf=1)
        tree = fit_struct_tree([[0.0], [1.0]], [[1, 0], [0, 1]], params)
        nodes = list(tree.nodes())
        nt.assert_equal(3, len(nodes))
        nt.assert_is_instance(nodes[0], SplitNode)
        nt.assert_equal(0.5, nodes[0].threshold)
        nt.assert_equal(LabelDistribution([1, 0]), predict_tree(tree, [0.0]))
        nt.assert_equal(LabelDistribution([0, 1]), predict_tree(tree, [1.0]))

    def test_pure_node_is_leaf(self):
        tree = fit_struct_tree([[0.0], [1.0], [2.0]], [[0.3, 0.7]] * 3)
        nodes = list(tree.nodes())
        nt.assert_equal(1, len(nodes))
        nt.assert_is_instance(nodes[0], LeafNode)
        nt.assert_equal(3, nodes[0].sample_count)

    def test_leaves_are_distributions(self):
        tree = fit_struct_tree(self.X, self.labels, StructTreeParams(min_leaf=3))
        sums = tree.values.sum(axis=1)
        nt.assert_true(np.allclose(sums, 1, atol=1e-9))

    def test_structure_limits(self):
        params = StructTreeParams(max_depth=3, min_leaf=4)
        tree = fit_struct_tree(self.X, self.labels, params)
        nt.assert_true(tree.depths().max() <= 3)

        for node in tree.nodes():
            if isinstance(node, LeafNode):
                nt.assert_true(node.sample_count >= 4)

    def test_deterministic(self):
        params = StructTreeParams(rng_seed=9)
        first = fit_struct_tree(self.X, self.labels, params)
        second = fit_struct_tree(self.X, self.labels, params)
        nt.assert_equal(first.thresholds.tolist(), second.thresholds.tolist())
        nt.assert_equal(first.features.tolist(), second.features.tolist())

    def test_dimension_mismatch(self):
        tree = fit_struct_tree([[0.0], [1.0]], [[1, 0], [0, 1]])

        with nt.assert_raises(LengthMismatch):
            predict_tree(tree, [0.0, 1.0])

    def test_to_dict(self):
        tree = fit_struct_tree(self.X, self.labels)
        rebuilt = Tree.from_dict(tree.to_dict())
        nt.assert_true(np.array_equal(tree.predict(self.X), rebuilt.predict(self.X)))

    def test_impurity(self):
        nt.assert_equal(0.0, node_impurity([[0.2, 0.8], [0.2, 0.8]]))
        nt.assert_almost_equal(np.log(2), node_impurity([[1, 0], [0, 1]]), places=5)

    def test_params(self):
        with nt.assert_raises(ConfigInvalid):
            StructTreeParams(max_depth=0)

        with nt.assert_raises(ConfigInvalid):
            StructTreeParams(feature_subsample="log2")

        nt.assert_equal(2, StructTreeParams().n_candidates(5))
        nt.assert_equal(5, StructTreeParams(feature_subsample="all").n_candidates(5))


class TestForest:
    def setUp(self):
        rng = np.random.default_rng(7)
        self.X = rng.uniform(-1, 1, size=(40, 3))
        self.labels = random_simplex(rng, 40, 4)
        self.params = StructTreeParams(n_trees=4, max_depth=4)

    def test_predictions_are_distributions(self):
        for kind in (RF, ERF):
            forest = fit_forest(self.X, self.labels, kind, self.params)
            predictions = predict_forest(forest, self.X)
            nt.assert_equal((40, 4), predictions.shape)
            nt.assert_true(np.allclose(predictions.sum(axis=1), 1, atol=1e-9))
            nt.assert_true((predictions >= 0).all())

    def test_erf_never_bootstraps(self):
        forest = fit_forest(self.X, self.labels, ERF, self.params, bagging=True)
        nt.assert_false(forest.bagging)

        for tree in forest.trees:
            nt.assert_equal(40, tree.counts[0])

    def test_rf_bootstraps(self):
        forest = fit_forest(self.X, self.labels, RF, self.params, bagging=True)
        nt.assert_true(forest.bagging)

    def test_seeded(self):
        first = fit_forest(self.X, self.labels, ERF, self.params)
        second = fit_forest(self.X, self.labels, ERF, self.params)
        other = fit_forest(self.X, self.labels, ERF, self.params.replace(rng_seed=1))
        nt.assert_true(np.array_equal(first.predict(self.X), second.predict(self.X)))
        nt.assert_false(np.array_equal(first.predict(self.X), other.predict(self.X)))

    def test_unknown_kind(self):
        with nt.assert_raises(ConfigInvalid):
            fit_forest(self.X, self.labels, "gbdt", self.params)

    def test_shape_mismatch(self):
        forest = fit_forest(self.X, self.labels, RF, self.params)

        with nt.assert_raises(ShapeMismatch):
            forest.predict(np.zeros((2, 5)))

    def test_regression(self):
        targets = self.X[:, 0] * 2
        forest = fit_regression_forest(self.X, targets, self.params)
        predictions = predict_regression_forest(forest, self.X)
        nt.assert_equal((40,), predictions.shape)
        nt.assert_true(np.abs(predictions - targets).mean() < np.abs(targets).mean())

    def test_regression_step_recovery(self):
        targets = np.where(self.X[:, 0] > 0.2, 3.0, -1.0)
        params = regression_params(n_trees=3, min_leaf=1, feature_subsample="all")
        forest = fit_regression_forest(self.X, targets, params, bagging=False)
        predictions = predict_regression_forest(forest, self.X)
        nt.assert_true(np.abs(predictions - targets).max() < 1e-9)

    def test_rf_step_function(self):
        low, high = [0.7, 0.2, 0.1], [0.1, 0.3, 0.6]
        labels = np.where(self.X[:, [1]] <= 0.0, low, high)
        params = StructTreeParams(n_trees=3, min_leaf=1, feature_subsample="all")
        forest = fit_forest(self.X, labels, RF, params, bagging=False)
        mean = evaluate_batch("kl", labels, forest.predict(self.X))[1]
        nt.assert_true(mean <= 1e-6)


class TestTies:
    def test_lowest_feature_wins(self):
        column = np.arange(10.0)
        X = np.column_stack([column, column])
        labels = [[0.9, 0.1]] * 5 + [[0.2, 0.8]] * 5
        params = StructTreeParams(min_leaf=1, feature_subsample="all")
        root = next(fit_struct_tree(X, labels, params).nodes())
        nt.assert_equal(0, root.feature_index)
        nt.assert_equal(4.5, root.threshold)

    def test_lowest_feature_wins_reversed(self):
        column = np.arange(10.0)
        X = np.column_stack([column, column, column[::-1]])
        labels = [[0.9, 0.1]] * 5 + [[0.2, 0.8]] * 5
        params = StructTreeParams(min_leaf=1, feature_subsample="all")
        root = next(fit_struct_tree(X, labels, params).nodes())
        nt.assert_equal(0, root.feature_index)
