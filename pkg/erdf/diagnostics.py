#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.diagnostics
~~~~~~~~~~~~~~~~

Provides plot ready data about a trained cascade: how similar the enhanced
features of different layers are, how far the enhancers are from the ideal
pattern scores, and how the mean KL divergence evolves layer by layer
"""
import numpy as np

from . import stats
from .cascade import predict_layers
from .core import MetricKind, EmptyInput, evaluate_batch


def _enhanced(diagnostics):
    enhanced = [d for d in diagnostics if d.ideal is not None]

    if not enhanced:
        raise EmptyInput("No layer has enhanced features.")

    return enhanced


def enhanced_correlation(diagnostics):
    """Correlates the flattened enhanced features of every pair of layers.

    Args:
        diagnostics (Seq[LayerDiagnostics]): Output of `fit_cascade`.

    Returns:
        numpy.ndarray: L x L symmetric matrix with a unit diagonal.
    """
    flattened = [d.enhanced.ravel() for d in _enhanced(diagnostics)]
    size = len(flattened)
    matrix = np.eye(size)

    for i in range(size):
        for j in range(i + 1, size):
            matrix[i, j] = matrix[j, i] = stats.pearson(flattened[i], flattened[j])

    return matrix


def enhancer_error(diagnostics):
    """Mean absolute gap between enhancer outputs and ideal pattern scores.

    Args:
        diagnostics (Seq[LayerDiagnostics]): Output of `fit_cascade`.

    Returns:
        List[dict]: One record per pattern dimension with keys `dimension`,
            `first` (first layer error) and `last` (last layer error).
    """
    enhanced = _enhanced(diagnostics)
    first, last = enhanced[0], enhanced[-1]
    errors = [np.abs(d.enhanced - d.ideal).mean(axis=0) for d in (first, last)]

    return [
        {"dimension": "s%i" % j, "first": float(a), "last": float(b)}
        for j, (a, b) in enumerate(zip(*errors))
    ]


def trajectory(model, diagnostics, test=None):
    """Per layer mean KL divergence on the training (out-of-fold) and test data.

    Args:
        model (CascadeModel): The trained model.
        diagnostics (Seq[LayerDiagnostics]): Output of `fit_cascade`.
        test (LdlDataset): Held out data (default: None).

    Returns:
        List[dict]: One record per layer with keys `layer`, `train`, `best`
            and, given `test`, `test`.
    """
    key = MetricKind.KL_DIVERGENCE.key
    records = [
        {"layer": d.layer, "train": d.means[key], "best": d.layer == model.best_layer}
        for d in diagnostics
    ]

    if test is not None:
        predictions = predict_layers(model, test.features)
        kind = MetricKind.KL_DIVERGENCE

        for record, prediction in zip(records, predictions):
            record["test"] = evaluate_batch(kind, test.labels, prediction)[1]

    return records
