#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.reuse
~~~~~~~~~~

Provides measure-aware feature reuse: samples whose layer metric degraded past
the layer threshold get their previous layer's new features back

Examples:
    basic usage::

        >>> from erdf.core import MetricKind
        >>> from erdf.reuse import select_reuse_set
        >>>
        >>> prev, curr = [0.1, 0.2, 0.3, 0.4], [0.15, 0.1, 0.5, 0.35]
        >>> decision = select_reuse_set(prev, curr, MetricKind.KL_DIVERGENCE)
        >>> decision.degraded.tolist(), decision.reuse.tolist()
        ([0, 2], [2])
        >>> round(decision.tau, 12)
        0.325

Attributes:
    SURROGATE (str): Screen unseen samples by the divergence between
        consecutive layer predictions.
    OFF (str): Never reuse at inference.
"""
from collections import namedtuple

import numpy as np

from .core import (
    MetricKind,
    LengthMismatch,
    ShapeMismatch,
    IndexOutOfRange,
    ConfigInvalid,
    as_matrix,
    evaluate_batch,
)

SURROGATE = "surrogate"
OFF = "off"
MODES = {SURROGATE, OFF}

_Decision = namedtuple("ReuseDecision", ["degraded", "reuse", "tau", "metric"])


class ReuseDecision(_Decision):
    """The degraded set, the reuse set and the threshold of one layer.

    `tau` is None when no sample degraded, which disables reuse for the layer.
    """

    @property
    def active(self):
        return self.tau is not None


def _worse(metric, values, reference):
    values, reference = np.asarray(values), np.asarray(reference)
    return values > reference if metric.is_distance else values < reference


def select_reuse_set(m_prev, m_curr, metric=MetricKind.KL_DIVERGENCE):
    """Finds the samples whose new features should be replaced.

    A sample degraded when its current metric value is worse than its previous
    one. The threshold is the mean current value over the degraded samples and
    only degraded samples strictly worse than it are reused. For similarity
    metrics every comparison is reversed.

    Args:
        m_prev (Seq[float]): Per sample metric values of the previous layer.
        m_curr (Seq[float]): Per sample metric values of the current layer.
        metric (MetricKind): The metric both were computed with.

    Returns:
        ReuseDecision

    Examples:
        >>> decision = select_reuse_set([0.9, 0.8], [0.85, 0.9], 'cosine')
        >>> decision.degraded.tolist(), decision.reuse.tolist(), decision.tau
        ([0], [], 0.85)
        >>> select_reuse_set([0.3, 0.3], [0.1, 0.2]).active
        False
    """
    m_prev = np.asarray(m_prev, dtype=float).ravel()
    m_curr = np.asarray(m_curr, dtype=float).ravel()
    metric = MetricKind.parse(metric)

    if len(m_prev) != len(m_curr):
        msg = "Lengths differ: {} vs {}.".format(len(m_prev), len(m_curr))
        raise LengthMismatch(msg)

    degraded = np.flatnonzero(_worse(metric, m_curr, m_prev))

    if not len(degraded):
        return ReuseDecision(degraded, degraded, None, metric)

    tau = float(m_curr[degraded].mean())
    reuse = degraded[_worse(metric, m_curr[degraded], tau)]
    return ReuseDecision(degraded, reuse, tau, metric)


def apply_reuse(new_features, previous, reuse_set):
    """Replaces the rows in `reuse_set` with the previous layer's rows

    Args:
        new_features (Seq[Seq[float]]): N x q new features of this layer.
        previous (Seq[Seq[float]]): N x q final new features of the previous
            layer.
        reuse_set (Seq[int]): Row indices to take from `previous`.

    Returns:
        numpy.ndarray: A new N x q matrix (the inputs are left unmodified).

    Examples:
        >>> new, old = np.zeros((3, 2)), np.ones((3, 2))
        >>> apply_reuse(new, old, [1]).tolist()
        [[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]
    """
    new_features = as_matrix(new_features, "new_features")
    previous = as_matrix(previous, "previous")

    if new_features.shape != previous.shape:
        msg = "Shapes differ: {} vs {}."
        raise ShapeMismatch(msg.format(new_features.shape, previous.shape))

    reuse_set = np.asarray(reuse_set, dtype=np.int64).ravel()
    n = new_features.shape[0]

    if len(reuse_set) and (reuse_set.min() < 0 or reuse_set.max() >= n):
        msg = "Reuse indices must lie in [0, {}).".format(n)
        raise IndexOutOfRange(msg)

    combined = np.array(new_features)
    combined[reuse_set] = previous[reuse_set]
    return combined


def inference_reuse_set(h_prev, h_curr, tau, metric=MetricKind.KL_DIVERGENCE, mode=SURROGATE):
    """Screens unseen samples with a layer's stored threshold.

    Ground truth is unavailable at inference, so each sample is scored by
    comparing its current prediction against its previous layer prediction
    (the previous one acting as the reference). Samples scoring worse than
    `tau` are reused.

    Args:
        h_prev (Seq[Seq[float]]): M x c predictions of the previous layer.
        h_curr (Seq[Seq[float]]): M x c predictions of the current layer.
        tau (float): The layer's training threshold (None when inactive).
        metric (MetricKind): The reuse metric.
        mode (str): `surrogate` or `off` (default: 'surrogate').

    Returns:
        numpy.ndarray: The reused row indices.

    Examples:
        >>> same = [[0.5, 0.5], [0.2, 0.8]]
        >>> inference_reuse_set(same, same, 0.1).tolist()
        []
        >>> inference_reuse_set(same, [[0.9, 0.1], [0.2, 0.8]], 0.1).tolist()
        [0]
        >>> inference_reuse_set(same, [[0.9, 0.1], [0.2, 0.8]], None).tolist()
        []
    """
    if mode not in MODES:
        raise ConfigInvalid("Unknown reuse mode: `{}`.".format(mode))

    h_prev = as_matrix(h_prev, "h_prev")
    h_curr = as_matrix(h_curr, "h_curr")

    if h_prev.shape != h_curr.shape:
        msg = "Shapes differ: {} vs {}.".format(h_prev.shape, h_curr.shape)
        raise ShapeMismatch(msg)

    if tau is None or mode == OFF or not len(h_prev):
        return np.zeros(0, dtype=np.int64)

    metric = MetricKind.parse(metric)
    scores = evaluate_batch(metric, h_prev, h_curr)[0]
    return np.flatnonzero(_worse(metric, scores, tau))
