#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.enhancement
~~~~~~~~~~~~~~~~

Provides feature enhancement from label correlation: relationship patterns are
the leading eigenvectors of the label correlation matrix, and enhancers are
regression forests that predict each sample's score against every pattern

Examples:
    basic usage::

        >>> from erdf.enhancement import correlation_matrix
        >>>
        >>> labels = [[0.1, 0.9], [0.5, 0.5], [0.9, 0.1]]
        >>> correlation_matrix(labels).values.round(12).tolist()
        [[1.0, -1.0], [-1.0, 1.0]]
"""
import numpy as np
import pygogo as gogo

from scipy.linalg import eigh, LinAlgError

from . import fntools as ft
from .core import (
    as_matrix,
    ConfigInvalid,
    DimMismatch,
    NumericalFailure,
    ShapeMismatch,
    TooFewSamples,
)
from .trees import RegressionForest, fit_regression_forest, regression_params

hdlr = gogo.handlers.stderr_hdlr()
logger = gogo.Gogo(__name__, low_hdlr=hdlr, low_level="info", monolog=True).logger


class CorrelationMatrix(object):
    """Symmetric c x c matrix of Pearson coefficients with a unit diagonal"""

    def __init__(self, values):
        self.values = as_matrix(values, "correlation")
        self.values.setflags(write=False)

    @property
    def n_labels(self):
        return self.values.shape[0]

    def __repr__(self):
        return "CorrelationMatrix({})".format(self.values.tolist())


class PatternBasis(object):
    """The k leading eigenvectors (as columns) and their eigenvalues"""

    def __init__(self, vectors, eigenvalues):
        self.vectors = as_matrix(vectors, "vectors")
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)

        if self.vectors.shape[1] != len(self.eigenvalues):
            raise ShapeMismatch("Need one eigenvalue per pattern vector.")

    @property
    def k(self):
        return self.vectors.shape[1]

    @property
    def n_labels(self):
        return self.vectors.shape[0]

    def to_dict(self):
        return {"vectors": self.vectors, "eigenvalues": self.eigenvalues}

    @classmethod
    def from_dict(cls, content):
        return cls(content["vectors"], content["eigenvalues"])


class EnhancerSet(object):
    """A pattern basis plus one fitted regression forest per pattern"""

    def __init__(self, basis, enhancers, input_dim):
        self.basis = basis
        self.enhancers = list(enhancers)
        self.input_dim = int(input_dim)

        if len(self.enhancers) != basis.k:
            msg = "{} enhancers for {} patterns."
            raise ShapeMismatch(msg.format(len(self.enhancers), basis.k))

    @property
    def k(self):
        return self.basis.k

    def transform(self, X):
        return transform(X, self)

    def to_dict(self):
        return {
            "input_dim": self.input_dim,
            "basis": self.basis.to_dict(),
            "enhancers": [e.to_dict() for e in self.enhancers],
        }

    @classmethod
    def from_dict(cls, content):
        basis = PatternBasis.from_dict(content["basis"])
        enhancers = map(RegressionForest.from_dict, content["enhancers"])
        return cls(basis, enhancers, content["input_dim"])


def correlation_matrix(labels):
    """Computes the Pearson correlation between every pair of label columns.

    Constant label columns get zero correlation with every other column.

    Args:
        labels (Seq[Seq[float]]): N x c label distributions (N >= 2).

    Returns:
        CorrelationMatrix

    Examples:
        >>> C = correlation_matrix([[0.2, 0.2, 0.6], [0.4, 0.4, 0.2]])
        >>> C.values.round(12).tolist()
        [[1.0, 1.0, -1.0], [1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
        >>> correlation_matrix([[0.5, 0.5]])
        Traceback (most recent call last):
        erdf.core.TooFewSamples: Need at least 2 samples, got 1.
    """
    labels = as_matrix(labels, "labels")

    if labels.shape[0] < 2:
        msg = "Need at least 2 samples, got {}.".format(labels.shape[0])
        raise TooFewSamples(msg)

    centered = labels - labels.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    constant = norms <= 1e-12

    if constant.any():
        logger.warning("label columns %s are constant", np.flatnonzero(constant))

    safe = np.where(constant, 1.0, norms)
    values = (centered.T @ centered) / np.outer(safe, safe)
    values[constant, :] = 0.0
    values[:, constant] = 0.0
    values = np.clip((values + values.T) / 2, -1.0, 1.0)
    np.fill_diagonal(values, 1.0)
    return CorrelationMatrix(values)


def extract_patterns(correlation, k):
    """Extracts the k most representative relationship patterns.

    Eigenvectors are ranked by descending (signed) eigenvalue, ties keep the
    solver's order, and each vector is signed so its largest magnitude entry
    (the first one on ties) is positive.

    Args:
        correlation (CorrelationMatrix): The label correlation matrix.
        k (int): Number of patterns, clamped to c.

    Returns:
        PatternBasis

    Examples:
        >>> basis = extract_patterns(CorrelationMatrix([[1, 0.5], [0.5, 1]]), 2)
        >>> basis.eigenvalues.round(12).tolist()
        [1.5, 0.5]
        >>> (basis.vectors * np.sqrt(2)).round(12).tolist()
        [[1.0, 1.0], [1.0, -1.0]]
    """
    values = getattr(correlation, "values", correlation)
    values = as_matrix(values, "correlation")
    c = values.shape[0]

    if values.shape != (c, c):
        raise ShapeMismatch("The correlation matrix must be square.")

    k = int(k)

    if k < 1:
        raise ConfigInvalid("`k` must be >= 1, got `{}`.".format(k))
    elif k > c:
        logger.warning("k=%s exceeds the %s labels, using k=%s", k, c, c)
        k = c

    try:
        eigenvalues, vectors = eigh(values)
    except (LinAlgError, ValueError) as err:
        raise NumericalFailure("Eigendecomposition failed: {}".format(err))

    order = np.argsort(-eigenvalues, kind="stable")[:k]
    eigenvalues, vectors = eigenvalues[order], vectors[:, order]
    magnitudes = np.abs(vectors)
    pivots = np.argmax(magnitudes >= magnitudes.max(axis=0) - 1e-12, axis=0)
    signs = np.where(vectors[pivots, np.arange(k)] < 0, -1.0, 1.0)
    return PatternBasis(vectors * signs, eigenvalues)


def pattern_scores(labels, basis):
    """Scores every sample against every pattern (`labels @ vectors`).

    Examples:
        >>> basis = PatternBasis([[2 ** -0.5], [2 ** -0.5]], [1.0])
        >>> round(float(pattern_scores([[0.5, 0.5]], basis)[0, 0]), 5)
        0.70711
    """
    labels = as_matrix(labels, "labels")

    if labels.shape[1] != basis.n_labels:
        msg = "Labels have {} columns but the patterns have {}."
        raise ShapeMismatch(msg.format(labels.shape[1], basis.n_labels))

    return labels @ basis.vectors


def fit_enhancers(X, labels, k=5, params=None, bagging=True, n_jobs=None):
    """Learns relationship patterns from the labels and trains one enhancer
    per pattern mapping the features to the pattern scores.

    Args:
        X (Seq[Seq[float]]): N x p features.
        labels (Seq[Seq[float]]): N x c label distributions.
        k (int): Number of patterns (default: 5).
        params (StructTreeParams): Enhancer forest parameters (default:
            `regression_params()`).
        bagging (bool): Bootstrap rows per enhancer tree (default: True).
        n_jobs (int): joblib workers (default: THREADS_ENV or 1).

    Returns:
        EnhancerSet
    """
    X = as_matrix(X, "X")
    params = params or regression_params()
    basis = extract_patterns(correlation_matrix(labels), k)
    scores = pattern_scores(labels, basis)
    seeds = ft.derive_seeds(params.rng_seed, basis.k)
    enhancers = []

    for j, seed in enumerate(seeds):
        kwargs = {"bagging": bagging, "n_jobs": n_jobs}
        forest = fit_regression_forest(
            X, scores[:, j], params.replace(rng_seed=seed), **kwargs
        )
        enhancers.append(forest)

    logger.debug("fitted %s enhancers on %s", basis.k, X.shape)
    return EnhancerSet(basis, enhancers, X.shape[1])


def transform(X, enhancers):
    """Predicts the pattern scores of unseen samples (labels not needed)

    Args:
        X (Seq[Seq[float]]): M x p features.
        enhancers (EnhancerSet): The fitted enhancers.

    Returns:
        numpy.ndarray: M x k enhanced features.
    """
    X = np.asarray(X, dtype=float)

    if X.ndim != 2 or X.shape[1] != enhancers.input_dim:
        msg = "Expected {} features, got shape {}."
        raise DimMismatch(msg.format(enhancers.input_dim, X.shape))

    columns = [e.predict(X) for e in enhancers.enhancers]
    return np.column_stack(columns) if len(X) else np.zeros((0, enhancers.k))
