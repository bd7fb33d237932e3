#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.baselines
~~~~~~~~~~~~~~

Provides reference predictors: algorithm adapted k nearest neighbors (the mean
label distribution of the k closest training rows) and the global mean

Examples:
    basic usage::

        >>> from erdf.core import LdlDataset
        >>> from erdf.baselines import KnnParams, aaknn_predict
        >>>
        >>> train = LdlDataset([[0.0], [1.0], [5.0]], [[1, 0], [0, 1], [0.5, 0.5]])
        >>> aaknn_predict(train, [[0.2]], KnnParams(k_neighbors=2)).tolist()
        [[0.5, 0.5]]
"""
import numpy as np

from joblib import Parallel, delayed

from . import fntools as ft
from .core import (
    LabelDistribution,
    ConfigInvalid,
    DimMismatch,
    KTooLarge,
)

CHUNKSIZE = 256


class KnnParams(object):
    """Neighbor count and Minkowski order

    Examples:
        >>> KnnParams(p=0.5)
        Traceback (most recent call last):
        erdf.core.ConfigInvalid: `p` must be >= 1, got `0.5`.
    """

    def __init__(self, k_neighbors=5, p=2):
        self.k_neighbors = int(k_neighbors)
        self.p = float(p)

        if self.k_neighbors < 1:
            msg = "`k_neighbors` must be >= 1, got `{}`."
            raise ConfigInvalid(msg.format(self.k_neighbors))

        if self.p < 1:
            raise ConfigInvalid("`p` must be >= 1, got `{}`.".format(self.p))


def minkowski_dist(features, query, p=2):
    """Distances from every row of `features` to a single query row

    Examples:
        >>> minkowski_dist(np.array([[0.0, 0.0], [3.0, 4.0]]), [0, 0]).tolist()
        [0.0, 5.0]
        >>> minkowski_dist(np.array([[3.0, 4.0]]), [0, 0], p=1).tolist()
        [7.0]
    """
    diffs = np.abs(features - np.asarray(query, dtype=float))

    if np.isinf(p):
        return diffs.max(axis=1)

    return (diffs ** p).sum(axis=1) ** (1 / p)


def _predict_chunk(features, labels, queries, params):
    predictions = np.empty((len(queries), labels.shape[1]))

    for row, query in enumerate(queries):
        dist = minkowski_dist(features, query, params.p)

        # stable sort keeps the lower training index on ties
        nearest = np.argsort(dist, kind="stable")[: params.k_neighbors]
        predictions[row] = labels[nearest].mean(axis=0)

    return predictions


def aaknn_predict(train, X_query, params=None, n_jobs=None):
    """Predicts the mean label distribution of each query's k nearest
    training rows.

    Args:
        train (LdlDataset): The training data.
        X_query (Seq[Seq[float]]): M x d query features.
        params (KnnParams): Neighbor count and order (default: k=5, p=2).
        n_jobs (int): joblib workers (default: THREADS_ENV or 1).

    Returns:
        numpy.ndarray: M x c label distributions.

    Raises:
        DimMismatch: If the queries don't have d columns.
        KTooLarge: If k exceeds the training rows.
    """
    params = params or KnnParams()
    X_query = np.asarray(X_query, dtype=float)

    if X_query.ndim != 2 or X_query.shape[1] != train.n_features:
        msg = "Expected {} features, got shape {}."
        raise DimMismatch(msg.format(train.n_features, X_query.shape))

    if params.k_neighbors > train.n_samples:
        msg = "k={} exceeds the {} training samples."
        raise KTooLarge(msg.format(params.k_neighbors, train.n_samples))

    chunks = [X_query[i:i + CHUNKSIZE] for i in range(0, len(X_query), CHUNKSIZE)]
    args = (train.features, train.labels)
    jobs = (delayed(_predict_chunk)(*args, chunk, params) for chunk in chunks)
    predictions = Parallel(n_jobs=ft.get_n_jobs(n_jobs))(jobs)

    if predictions:
        return np.vstack(predictions)

    return np.zeros((0, train.n_labels))


def mean_predictor(train):
    """The column mean of the training labels

    Examples:
        >>> from erdf.core import LdlDataset
        >>> mean_predictor(LdlDataset([[0.0], [1.0]], [[1, 0], [0, 1]]))
        LabelDistribution([0.5, 0.5])
    """
    return LabelDistribution(train.labels.mean(axis=0))
