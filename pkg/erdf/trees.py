#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.trees
~~~~~~~~~~

Provides decision trees whose leaves predict whole label distributions (grown
with a KL divergence impurity), random and extremely randomized forests of
them, and scalar regression forests

Examples:
    basic usage::

        >>> from erdf.trees import StructTreeParams, fit_struct_tree
        >>>
        >>> params = StructTreeParams(min_leaf=1)
        >>> tree = fit_struct_tree([[0.0], [1.0]], [[1, 0], [0, 1]], params)
        >>> tree.predict([[0.0], [1.0]]).tolist()
        [[1.0, 0.0], [0.0, 1.0]]

Attributes:
    RF (str): Random forest kind (exhaustive thresholds, bootstrapped rows).
    ERF (str): Extremely randomized forest kind (one random threshold per
        sampled feature, no bootstrap).
    MIN_GAIN (float): Impurity decreases at or below this are not splits.
"""
from collections import namedtuple

import numpy as np
import pygogo as gogo

from joblib import Parallel, delayed

from . import fntools as ft
from .core import (
    LabelDistribution,
    EmptyInput,
    ShapeMismatch,
    LengthMismatch,
    ConfigInvalid,
    as_matrix,
    clip_and_renormalize,
    evaluate_batch,
    MetricKind,
)

RF = "rf"
ERF = "erf"
EXHAUSTIVE = "exhaustive"
RANDOM = "random"
SUBSAMPLES = {"sqrt", "all"}
MIN_GAIN = 1e-12
LEAF = -1

SplitNode = namedtuple("SplitNode", ["feature_index", "threshold", "left", "right"])
LeafNode = namedtuple("LeafNode", ["distribution", "sample_count"])

hdlr = gogo.handlers.stderr_hdlr()
logger = gogo.Gogo(__name__, low_hdlr=hdlr, low_level="info", monolog=True).logger


class KLCriterion(object):
    """Mean KL divergence of a node's label rows to the node's mean row.

    Each sample contributes the statistics `[d, clip(d), sum(clip(d) ln
    clip(d))]`, so the impurity of any set of samples follows from the sums of
    their statistics.
    """

    name = "kl"

    def __init__(self, n_outputs):
        self.n_outputs = n_outputs

    def statistics(self, targets):
        clipped = clip_and_renormalize(targets)
        entropy = (clipped * np.log(clipped)).sum(axis=1, keepdims=True)
        return np.hstack([targets, clipped, entropy])

    def impurity(self, sums, counts):
        c = self.n_outputs
        counts = np.asarray(np.maximum(counts, 1), dtype=float)[..., None]
        means = clip_and_renormalize(sums[..., :c] / counts)
        clipped_means = sums[..., c : 2 * c] / counts
        cross = (clipped_means * np.log(means)).sum(axis=-1)
        return sums[..., 2 * c] / counts[..., 0] - cross

    def value(self, sums, count):
        return sums[: self.n_outputs] / count


class VarianceCriterion(object):
    """Variance of a node's scalar targets"""

    name = "variance"
    n_outputs = 1

    def statistics(self, targets):
        return np.hstack([targets, targets ** 2])

    def impurity(self, sums, counts):
        counts = np.maximum(counts, 1)
        means = sums[..., 0] / counts
        return np.maximum(sums[..., 1] / counts - means ** 2, 0.0)

    def value(self, sums, count):
        return sums[:1] / count


class StructTreeParams(object):
    """Tree and forest hyper parameters.

    Args:
        max_depth (int): Maximum number of splits on a root to leaf path
            (default: 10).
        min_leaf (int): Minimum samples per leaf (default: 2).
        feature_subsample (str): Features tried per node, `sqrt` or `all`
            (default: 'sqrt').
        split_mode (str): `exhaustive` scans every midpoint, `random` draws one
            threshold per feature (default: 'exhaustive').
        rng_seed (int): The seed (default: 0).
        n_trees (int): Trees per forest (default: 100).

    Examples:
        >>> params = StructTreeParams(max_depth=3)
        >>> params.to_dict()['max_depth']
        3
        >>> StructTreeParams(min_leaf=0)
        Traceback (most recent call last):
        erdf.core.ConfigInvalid: `min_leaf` must be >= 1, got `0`.
    """

    def __init__(self, max_depth=10, min_leaf=2, feature_subsample="sqrt", **kwargs):
        self.max_depth = int(max_depth)
        self.min_leaf = int(min_leaf)
        self.feature_subsample = feature_subsample
        self.split_mode = kwargs.get("split_mode", EXHAUSTIVE)
        self.rng_seed = int(kwargs.get("rng_seed", 0))
        self.n_trees = int(kwargs.get("n_trees", 100))

        if self.max_depth < 1:
            msg = "`max_depth` must be >= 1, got `{}`."
            raise ConfigInvalid(msg.format(self.max_depth))

        if self.min_leaf < 1:
            msg = "`min_leaf` must be >= 1, got `{}`."
            raise ConfigInvalid(msg.format(self.min_leaf))

        if self.n_trees < 1:
            msg = "`n_trees` must be >= 1, got `{}`."
            raise ConfigInvalid(msg.format(self.n_trees))

        if self.feature_subsample not in SUBSAMPLES:
            msg = "`feature_subsample` must be one of {}, got `{}`."
            raise ConfigInvalid(msg.format(sorted(SUBSAMPLES), feature_subsample))

        if self.split_mode not in {EXHAUSTIVE, RANDOM}:
            msg = "Unknown `split_mode`: `{}`."
            raise ConfigInvalid(msg.format(self.split_mode))

    def replace(self, **kwargs):
        return StructTreeParams(**dict(self.to_dict(), **kwargs))

    def n_candidates(self, n_features):
        if self.feature_subsample == "all":
            return n_features

        return max(1, int(np.sqrt(n_features)))

    def to_dict(self):
        return {
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "feature_subsample": self.feature_subsample,
            "split_mode": self.split_mode,
            "rng_seed": self.rng_seed,
            "n_trees": self.n_trees,
        }

    def __eq__(self, other):
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return "StructTreeParams({})".format(self.to_dict())


class Tree(object):
    """A fitted tree stored as flat node arrays.

    Node `i` is a leaf when `features[i] == -1`. Samples with
    `x[features[i]] <= thresholds[i]` go to `children_left[i]`.
    """

    def __init__(self, children_left, children_right, features, thresholds, values, counts, n_features):
        self.children_left = np.asarray(children_left, dtype=np.int64)
        self.children_right = np.asarray(children_right, dtype=np.int64)
        self.features = np.asarray(features, dtype=np.int64)
        self.thresholds = np.asarray(thresholds, dtype=float)
        self.values = as_matrix(values, "values")
        self.counts = np.asarray(counts, dtype=np.int64)
        self.n_features = int(n_features)

    @property
    def n_nodes(self):
        return len(self.features)

    @property
    def n_outputs(self):
        return self.values.shape[1]

    def depths(self):
        depths = np.zeros(self.n_nodes, dtype=np.int64)

        # parents always precede their children
        for node in range(self.n_nodes):
            if self.features[node] != LEAF:
                depths[self.children_left[node]] = depths[node] + 1
                depths[self.children_right[node]] = depths[node] + 1

        return depths

    def nodes(self):
        """Yields a SplitNode or LeafNode per node, in storage order"""
        for node in range(self.n_nodes):
            if self.features[node] == LEAF:
                yield LeafNode(self.values[node], int(self.counts[node]))
            else:
                args = (self.children_left[node], self.children_right[node])
                feature = int(self.features[node])
                yield SplitNode(feature, float(self.thresholds[node]), *map(int, args))

    def apply(self, X):
        """Finds the leaf reached by each row of X"""
        X = as_matrix(X, "X")

        if X.shape[1] != self.n_features:
            msg = "Expected {} features, got {}."
            raise ShapeMismatch(msg.format(self.n_features, X.shape[1]))

        leaves = np.zeros(X.shape[0], dtype=np.int64)

        while True:
            rows = np.flatnonzero(self.features[leaves] != LEAF)

            if not len(rows):
                break

            nodes = leaves[rows]
            go_left = X[rows, self.features[nodes]] <= self.thresholds[nodes]
            left, right = self.children_left[nodes], self.children_right[nodes]
            leaves[rows] = np.where(go_left, left, right)

        return leaves

    def predict(self, X):
        return self.values[self.apply(X)]

    def to_dict(self):
        return {
            "n_features": self.n_features,
            "children_left": self.children_left,
            "children_right": self.children_right,
            "features": self.features,
            "thresholds": self.thresholds,
            "values": self.values,
            "counts": self.counts,
        }

    @classmethod
    def from_dict(cls, content):
        keys = ["children_left", "children_right", "features", "thresholds"]
        args = [content[k] for k in keys + ["values", "counts", "n_features"]]
        return cls(*args)


class _Grower(object):
    """Greedy top-down growth of one tree"""

    def __init__(self, X, stats, criterion, params, rng):
        self.X = X
        self.stats = stats
        self.criterion = criterion
        self.params = params
        self.rng = rng
        self.nodes = []

    def grow(self):
        self._grow(np.arange(self.X.shape[0]), 0)
        columns = list(zip(*self.nodes))
        left, right, features, thresholds, values, counts = columns
        args = (left, right, features, thresholds, np.vstack(values), counts)
        return Tree(*args, n_features=self.X.shape[1])

    def _add(self, value, count):
        self.nodes.append([LEAF, LEAF, LEAF, 0.0, value, count])
        return len(self.nodes) - 1

    def _grow(self, rows, depth):
        sums = self.stats[rows].sum(axis=0)
        count = len(rows)
        node = self._add(self.criterion.value(sums, count), count)
        impurity = float(self.criterion.impurity(sums, count))

        too_deep = depth >= self.params.max_depth
        too_small = count < 2 * self.params.min_leaf

        if too_deep or too_small or impurity <= MIN_GAIN:
            return node

        split = self._best_split(rows, sums, impurity)

        if split is None:
            return node

        feature, threshold = split
        goes_left = self.X[rows, feature] <= threshold
        left = self._grow(rows[goes_left], depth + 1)
        right = self._grow(rows[~goes_left], depth + 1)
        self.nodes[node][:4] = [left, right, feature, threshold]
        return node

    def _candidates(self, rows):
        X = self.X[rows]
        varying = np.flatnonzero(X.max(axis=0) > X.min(axis=0))
        size = min(len(varying), self.params.n_candidates(self.X.shape[1]))

        if size < len(varying):
            varying = np.sort(self.rng.choice(varying, size=size, replace=False))

        return varying

    def _best_split(self, rows, sums, impurity):
        features = self._candidates(rows)

        if not len(features):
            return None

        if self.params.split_mode == RANDOM:
            gains, thresholds = self._random_gains(rows, features, sums, impurity)
        else:
            gains, thresholds = self._exhaustive_gains(rows, features, sums, impurity)

        best = gains.max()

        if not best > MIN_GAIN:
            return None

        # ties: lowest feature index, then lowest threshold
        ties = (gains == best).T
        column, position = np.unravel_index(np.argmax(ties), ties.shape)
        return int(features[column]), float(thresholds[position, column])

    def _gains(self, impurity, left_sums, left_counts, right_sums, right_counts):
        n = left_counts + right_counts
        left = self.criterion.impurity(left_sums, left_counts)
        right = self.criterion.impurity(right_sums, right_counts)
        gains = impurity - (left_counts * left + right_counts * right) / n
        min_leaf = self.params.min_leaf
        valid = (left_counts >= min_leaf) & (right_counts >= min_leaf)
        return np.where(valid, gains, -np.inf)

    def _exhaustive_gains(self, rows, features, sums, impurity):
        X = self.X[np.ix_(rows, features)]
        order = np.argsort(X, axis=0, kind="stable")
        ordered = np.take_along_axis(X, order, axis=0)
        cumulative = np.cumsum(self.stats[rows][order], axis=0)[:-1]
        left_counts = np.arange(1, len(rows))[:, None] * np.ones(len(features))
        right_counts = len(rows) - left_counts
        args = (impurity, cumulative, left_counts, sums - cumulative, right_counts)
        gains = self._gains(*args)
        lower, upper = ordered[:-1], ordered[1:]
        gains[~(lower < upper)] = -np.inf
        midpoints = (lower + upper) / 2
        thresholds = np.where(midpoints < upper, midpoints, lower)
        return gains, thresholds

    def _random_gains(self, rows, features, sums, impurity):
        X = self.X[np.ix_(rows, features)]
        low, high = X.min(axis=0), X.max(axis=0)
        thresholds = self.rng.uniform(low, high)[None, :]
        goes_left = (X <= thresholds).astype(float)
        left_sums = goes_left.T @ self.stats[rows]
        left_counts = goes_left.sum(axis=0)
        right_counts = len(rows) - left_counts
        args = (impurity, left_sums, left_counts, sums - left_sums, right_counts)
        return self._gains(*args)[None, :], thresholds


def _check_inputs(X, targets):
    X = as_matrix(X, "X")
    targets = np.asarray(targets, dtype=float)

    if not X.shape[0]:
        raise EmptyInput("Cannot fit a tree on 0 samples.")

    if X.shape[0] != targets.shape[0]:
        msg = "{} feature rows but {} target rows."
        raise ShapeMismatch(msg.format(X.shape[0], targets.shape[0]))

    return X, targets


def _fit_tree(X, targets, criterion, params, seed, bootstrap=False):
    rng = np.random.default_rng(seed)

    if bootstrap:
        rows = rng.integers(0, X.shape[0], size=X.shape[0])
        X, targets = X[rows], targets[rows]

    return _Grower(X, criterion.statistics(targets), criterion, params, rng).grow()


def node_impurity(label_rows):
    """Computes the mean KL divergence of label rows to their mean row.

    Args:
        label_rows (Seq[Seq[float]]): m x c label distributions (m >= 1).

    Returns:
        float: The impurity.

    Examples:
        >>> node_impurity([[0.2, 0.8], [0.2, 0.8]])
        0.0
        >>> round(node_impurity([[1, 0], [0, 1]]), 4)
        0.6931
    """
    rows = as_matrix(label_rows, "label_rows")

    if not rows.shape[0]:
        raise ShapeMismatch("Cannot compute the impurity of 0 rows.")

    means = np.repeat(rows.mean(axis=0, keepdims=True), rows.shape[0], axis=0)
    return evaluate_batch(MetricKind.KL_DIVERGENCE, rows, means)[1]


def fit_struct_tree(X, labels, params=None, seed=None):
    """Grows a tree whose leaves hold the mean label distribution of their
    samples, choosing splits that maximize the KL impurity decrease.

    Args:
        X (Seq[Seq[float]]): m x p features.
        labels (Seq[Seq[float]]): m x c label distributions.
        params (StructTreeParams): Hyper parameters (default: the defaults).
        seed (int): Overrides `params.rng_seed`.

    Returns:
        Tree

    Examples:
        >>> tree = fit_struct_tree([[0.0], [1.0]], [[0.3, 0.7], [0.3, 0.7]])
        >>> tree.n_nodes
        1
    """
    params = params or StructTreeParams()
    X, labels = _check_inputs(X, as_matrix(labels, "labels"))
    criterion = KLCriterion(labels.shape[1])
    seed = params.rng_seed if seed is None else seed
    return _fit_tree(X, labels, criterion, params, seed)


def predict_tree(tree, x):
    """Routes a single feature vector to its leaf

    Examples:
        >>> tree = fit_struct_tree([[0.0], [1.0]], [[1, 0], [0, 1]],
        ...                        StructTreeParams(min_leaf=1))
        >>> predict_tree(tree, [1.0])
        LabelDistribution([0.0, 1.0])
    """
    x = np.asarray(x, dtype=float).ravel()

    if len(x) != tree.n_features:
        msg = "Expected {} features, got {}.".format(tree.n_features, len(x))
        raise LengthMismatch(msg)

    return LabelDistribution(tree.predict(x[None, :])[0])


class _Forest(object):
    def __init__(self, trees, params, kind, bagging=False):
        self.trees = list(trees)
        self.params = params
        self.kind = kind
        self.bagging = bagging

    @property
    def n_features(self):
        return self.trees[0].n_features

    def _predict(self, X):
        X = as_matrix(X, "X")

        if X.shape[1] != self.n_features:
            msg = "Expected {} features, got {}."
            raise ShapeMismatch(msg.format(self.n_features, X.shape[1]))

        predictions = np.zeros((X.shape[0], self.trees[0].n_outputs))

        for tree in self.trees:
            predictions += tree.predict(X)

        return predictions / len(self.trees)

    def to_dict(self):
        return {
            "kind": self.kind,
            "bagging": self.bagging,
            "params": self.params.to_dict(),
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, content):
        trees = map(Tree.from_dict, content["trees"])
        params = StructTreeParams(**content["params"])
        return cls(trees, params, content["kind"], content["bagging"])


class StructForest(_Forest):
    """An ensemble of label distribution trees (RF or ERF)"""

    @property
    def n_labels(self):
        return self.trees[0].n_outputs

    def predict(self, X):
        return self._predict(X)


class RegressionForest(_Forest):
    """An ensemble of scalar regression trees"""

    def predict(self, X):
        return self._predict(X)[:, 0]


def _fit_trees(X, targets, criterion, params, bootstrap, n_jobs=None):
    seeds = ft.derive_seeds(params.rng_seed, params.n_trees)
    n_jobs = ft.get_n_jobs(n_jobs)
    jobs = (delayed(_fit_tree)(X, targets, criterion, params, s, bootstrap) for s in seeds)
    return Parallel(n_jobs=n_jobs)(jobs)


def fit_forest(X, labels, kind=RF, params=None, bagging=True, n_jobs=None):
    """Trains a forest of label distribution trees.

    RF forests scan every midpoint and bootstrap rows when `bagging` is set;
    ERF forests draw one random threshold per sampled feature and always train
    on the full sample.

    Args:
        X (Seq[Seq[float]]): m x p features.
        labels (Seq[Seq[float]]): m x c label distributions.
        kind (str): `rf` or `erf` (default: 'rf').
        params (StructTreeParams): Hyper parameters (default: the defaults).
        bagging (bool): Bootstrap rows for RF forests (default: True).
        n_jobs (int): joblib workers (default: THREADS_ENV or 1).

    Returns:
        StructForest

    Examples:
        >>> params = StructTreeParams(n_trees=3, min_leaf=1)
        >>> forest = fit_forest([[0.0], [1.0]], [[1, 0], [0, 1]], RF, params,
        ...                     bagging=False)
        >>> forest.predict([[0.0]]).tolist()
        [[1.0, 0.0]]
    """
    if kind not in {RF, ERF}:
        raise ConfigInvalid("Unknown forest kind: `{}`.".format(kind))

    params = params or StructTreeParams()
    split_mode = EXHAUSTIVE if kind == RF else RANDOM
    params = params.replace(split_mode=split_mode)
    bootstrap = bool(bagging) and kind == RF
    X, labels = _check_inputs(X, as_matrix(labels, "labels"))
    criterion = KLCriterion(labels.shape[1])
    logger.debug("fitting %s %s trees on %s", params.n_trees, kind, X.shape)
    trees = _fit_trees(X, labels, criterion, params, bootstrap, n_jobs)
    return StructForest(trees, params, kind, bootstrap)


def predict_forest(forest, X):
    """Averages the trees' label distributions row by row

    Examples:
        >>> forest = fit_forest([[0.0], [1.0]], [[0.5, 0.5], [0.5, 0.5]], ERF,
        ...                     StructTreeParams(n_trees=2))
        >>> predict_forest(forest, [[3.0]]).tolist()
        [[0.5, 0.5]]
    """
    return forest.predict(X)


def regression_params(**kwargs):
    """The enhancer forest defaults: 20 trees, depth 10, leaves of 2"""
    defaults = {"n_trees": 20, "max_depth": 10, "min_leaf": 2}
    return StructTreeParams(**dict(defaults, **kwargs))


def fit_regression_forest(X, targets, params=None, bagging=True, n_jobs=None):
    """Trains a forest of variance-reduction regression trees.

    Args:
        X (Seq[Seq[float]]): m x p features.
        targets (Seq[float]): m scalar targets.
        params (StructTreeParams): Hyper parameters (default:
            `regression_params()`).
        bagging (bool): Bootstrap rows per tree (default: True).
        n_jobs (int): joblib workers (default: THREADS_ENV or 1).

    Returns:
        RegressionForest

    Examples:
        >>> forest = fit_regression_forest([[0.0], [1.0], [2.0]], [4, 4, 4])
        >>> forest.predict([[7.0]]).tolist()
        [4.0]
    """
    params = (params or regression_params()).replace(split_mode=EXHAUSTIVE)
    targets = np.asarray(targets, dtype=float)

    if targets.ndim != 1:
        raise ShapeMismatch("Regression targets must be a vector.")

    X, targets = _check_inputs(X, targets[:, None])
    trees = _fit_trees(X, targets, VarianceCriterion(), params, bagging, n_jobs)
    return RegressionForest(trees, params, "regression", bool(bagging))


def predict_regression_forest(forest, X):
    """Averages the trees' scalar predictions row by row"""
    return forest.predict(X)
