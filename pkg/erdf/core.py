#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.core
~~~~~~~~~

Provides the domain types, simplex handling and the six label distribution
evaluation metrics

Examples:
    basic usage::

        >>> from erdf.core import MetricKind, evaluate
        >>>
        >>> round(evaluate(MetricKind.INTERSECTION, [0.7, 0.3], [0.4, 0.6]), 12)
        0.7
"""
from enum import Enum

import numpy as np

from . import EPSILON, SUM_TOLERANCE, RENORM_WINDOW


class ErdfError(ValueError):
    """Base class of every error raised by erdf.

    Keyword arguments are stored as attributes so callers can report where
    the error happened (e.g., `line`, `column` or `row`).

    Examples:
        >>> err = ParseError('Invalid float value: `spam`.', line=3, column='f0')
        >>> (err.category, err.line, err.column)
        ('ParseError', 3, 'f0')
    """

    def __init__(self, message="", **kwargs):
        super(ErdfError, self).__init__(message)
        self.message = message

        for key, value in kwargs.items():
            setattr(self, key, value)

    @property
    def category(self):
        return type(self).__name__


class NegativeEntry(ErdfError):
    pass


class SumOutOfTolerance(ErdfError):
    pass


class NonFinite(ErdfError):
    pass


class LengthMismatch(ErdfError):
    pass


class ShapeMismatch(ErdfError):
    pass


class DimMismatch(ErdfError):
    pass


class IndexOutOfRange(ErdfError):
    pass


class EmptyInput(ErdfError):
    pass


class TooFewSamples(ErdfError):
    pass


class NumericalFailure(ErdfError):
    pass


class ConfigInvalid(ErdfError):
    pass


class ParseError(ErdfError):
    pass


class SchemaError(ErdfError):
    pass


class InvalidDistribution(ErdfError):
    pass


class IoError(ErdfError):
    pass


class VersionMismatch(ErdfError):
    pass


class CorruptModel(ErdfError):
    pass


class KTooLarge(ErdfError):
    pass


class MetricKind(Enum):
    """The six label distribution metrics.

    Each member carries its command line `key`, its display `title` and
    whether it is a distance (lower is better) or a similarity.

    Examples:
        >>> MetricKind.parse('kl') is MetricKind.KL_DIVERGENCE
        True
        >>> MetricKind.parse('Cosine').is_distance
        False
        >>> MetricKind.CHEBYSHEV.better(0.1, 0.2)
        True
        >>> MetricKind.COSINE.better(0.1, 0.2)
        False
    """

    CHEBYSHEV = ("chebyshev", "Chebyshev", True)
    CLARK = ("clark", "Clark", True)
    CANBERRA = ("canberra", "Canberra", True)
    KL_DIVERGENCE = ("kl", "KL div", True)
    COSINE = ("cosine", "Cosine", False)
    INTERSECTION = ("intersection", "Intersection", False)

    def __init__(self, key, title, is_distance):
        self.key = key
        self.title = title
        self.is_distance = is_distance

    @classmethod
    def parse(cls, name):
        """Looks up a metric by key, member name or title (case insensitive)"""
        if isinstance(name, cls):
            return name

        wanted = str(name).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"kl_divergence": "kl", "kldivergence": "kl", "kl_div": "kl"}
        wanted = aliases.get(wanted, wanted)

        for kind in cls:
            if wanted in {kind.key, kind.name.lower()}:
                return kind

        raise ConfigInvalid("Unknown metric: `{}`.".format(name))

    @property
    def arrow(self):
        return "↓" if self.is_distance else "↑"

    def better(self, value, other):
        """Whether `value` is strictly better than `other`"""
        return value < other if self.is_distance else value > other


def as_matrix(content, name="matrix", dtype=float):
    """Coerces content into a 2-D float array"""
    matrix = np.asarray(content, dtype=dtype)

    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    elif matrix.ndim != 2:
        msg = "`{}` must be 2-dimensional, got shape {}."
        raise ShapeMismatch(msg.format(name, matrix.shape))

    return matrix


def check_rows(rows, renormalize=False, tolerance=SUM_TOLERANCE):
    """Checks that every row of a matrix is a label distribution.

    Args:
        rows (Seq[Seq[float]]): The candidate distributions.
        renormalize (bool): Divide rows by their sum when it deviates from 1 by
            at most `RENORM_WINDOW` (default: False).
        tolerance (float): Allowed deviation of a row sum from 1.

    Returns:
        numpy.ndarray: The (possibly renormalized) rows.

    Raises:
        NonFinite: If a row contains nan or inf.
        NegativeEntry: If a row contains a negative entry.
        SumOutOfTolerance: If a row does not sum to 1.

    Examples:
        >>> check_rows([[0.5, 0.5], [0.25, 0.75]]).shape
        (2, 2)
        >>> check_rows([[0.6, 0.5]])
        Traceback (most recent call last):
        erdf.core.SumOutOfTolerance: Row 0 sums to `1.1`.
        >>> float(check_rows([[0.5, 0.5005]], renormalize=True).sum())
        1.0
    """
    rows = np.array(as_matrix(rows, "labels"))
    finite = np.isfinite(rows).all(axis=1)

    if not finite.all():
        row = int(np.argmin(finite))
        raise NonFinite("Row {} has a non-finite entry.".format(row), row=row)

    positive = (rows >= 0).all(axis=1)

    if not positive.all():
        row = int(np.argmin(positive))
        raise NegativeEntry("Row {} has a negative entry.".format(row), row=row)

    sums = rows.sum(axis=1)
    deviation = np.abs(sums - 1)
    window = RENORM_WINDOW if renormalize else tolerance
    bad = deviation > max(window, tolerance)

    if bad.any():
        row = int(np.argmax(bad))
        msg = "Row {} sums to `{}`.".format(row, round(float(sums[row]), 12))
        raise SumOutOfTolerance(msg, row=row)

    if renormalize:
        rows /= sums[:, None]

    return rows


class LabelDistribution(object):
    """An immutable vector of description degrees.

    Examples:
        >>> dist = LabelDistribution([0.03, 0.24, 0.21, 0.4, 0.03, 0.09])
        >>> len(dist)
        6
        >>> dist[3]
        0.4
        >>> LabelDistribution([0.5, 0.5]) == LabelDistribution([0.5, 0.5])
        True
    """

    def __init__(self, values, renormalize=False):
        values = np.asarray(values, dtype=float)

        if values.ndim != 1 or len(values) < 2:
            msg = "A label distribution needs at least 2 entries, got shape {}."
            raise LengthMismatch(msg.format(values.shape))

        self.values = check_rows(values, renormalize)[0]
        self.values.setflags(write=False)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values.tolist())

    def __getitem__(self, index):
        return float(self.values[index])

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other):
        return np.array_equal(self.values, np.asarray(other, dtype=float))

    def __hash__(self):
        return hash(self.values.tobytes())

    def __repr__(self):
        return "LabelDistribution({})".format(self.values.tolist())


class LdlDataset(object):
    """An immutable N x d feature matrix paired with N x c label distributions.

    Examples:
        >>> data = LdlDataset([[0.0], [1.0]], [[1, 0], [0, 1]])
        >>> (data.n_samples, data.n_features, data.n_labels)
        (2, 1, 2)
        >>> data.feature_names, data.label_names
        (['f0'], ['y0', 'y1'])
        >>> data.subset([1]).labels.tolist()
        [[0.0, 1.0]]
    """

    def __init__(self, features, labels, feature_names=None, label_names=None, **kwargs):
        features = np.array(as_matrix(features, "features"))
        labels = check_rows(labels, kwargs.get("renormalize", False))

        if not np.isfinite(features).all():
            raise NonFinite("Features contain non-finite values.")

        if not (features.shape[0] and features.shape[1]):
            raise EmptyInput("A dataset needs at least 1 sample and 1 feature.")

        if labels.shape[1] < 2:
            raise ShapeMismatch("A dataset needs at least 2 labels.")

        if features.shape[0] != labels.shape[0]:
            msg = "{} feature rows but {} label rows."
            raise ShapeMismatch(msg.format(features.shape[0], labels.shape[0]))

        self.features = features
        self.labels = labels
        self.features.setflags(write=False)
        self.labels.setflags(write=False)
        self.feature_names = list(
            feature_names or ["f%i" % i for i in range(features.shape[1])]
        )
        self.label_names = list(
            label_names or ["y%i" % i for i in range(labels.shape[1])]
        )

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_labels(self):
        return self.labels.shape[1]

    def subset(self, indices):
        """Selects rows by index"""
        indices = np.asarray(indices, dtype=int)
        names = {"feature_names": self.feature_names, "label_names": self.label_names}
        return LdlDataset(self.features[indices], self.labels[indices], **names)

    def __len__(self):
        return self.n_samples

    def __repr__(self):
        msg = "LdlDataset(n_samples={}, n_features={}, n_labels={})"
        return msg.format(self.n_samples, self.n_features, self.n_labels)


def validate_distribution(values, renormalize=False):
    """Validates a vector of description degrees.

    Args:
        values (Seq[float]): The description degrees (at least 2).
        renormalize (bool): Accept and rescale a vector whose sum deviates from
            1 by at most 1e-3 (default: False).

    Returns:
        LabelDistribution

    Examples:
        >>> validate_distribution([0.5, 0.5])
        LabelDistribution([0.5, 0.5])
        >>> validate_distribution([0.6, 0.5])
        Traceback (most recent call last):
        erdf.core.SumOutOfTolerance: Row 0 sums to `1.1`.
        >>> validate_distribution([0.5, -0.5])
        Traceback (most recent call last):
        erdf.core.NegativeEntry: Row 0 has a negative entry.
    """
    return LabelDistribution(values, renormalize)


def clip_and_renormalize(values, epsilon=EPSILON):
    """Lifts entries below `epsilon` to `epsilon` and rescales the rest so
    that the entries sum to 1.

    Works on a single vector or row-wise on a matrix. Each row is first scaled
    to unit sum; entries that are then at least `epsilon` are only multiplied
    by their row's rescaling factor.

    Args:
        values (Seq[float]): Nonnegative vector (or matrix of row vectors).
        epsilon (float): The floor, in (0, 1e-3] (default: EPSILON).

    Returns:
        numpy.ndarray: Same shape as `values`.

    Examples:
        >>> clip_and_renormalize([1.0, 0.0]).tolist() == [1 - 1e-7, 1e-7]
        True
        >>> clip_and_renormalize([0.5, 0.5]).tolist()
        [0.5, 0.5]
        >>> clip_and_renormalize([1e-8, 1e-8]).tolist()
        [0.5, 0.5]
    """
    if not 0 < epsilon <= RENORM_WINDOW:
        raise ValueError("`epsilon` must be in (0, 1e-3], got `{}`.".format(epsilon))

    values = np.asarray(values, dtype=float)

    if not np.isfinite(values).all():
        raise NonFinite("Cannot clip non-finite values.")

    rows = values.reshape(-1, values.shape[-1]) if values.ndim else values
    totals = rows.sum(axis=-1, keepdims=True)

    with np.errstate(divide="ignore", invalid="ignore"):
        rows = np.where(totals > 0, rows / totals, rows)

    lifted = rows < epsilon
    clipped = rows

    for _ in range(rows.shape[-1]):
        kept = np.where(lifted, 0.0, rows)
        kept_mass = kept.sum(axis=-1, keepdims=True)
        free_mass = 1 - epsilon * lifted.sum(axis=-1, keepdims=True)

        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(kept_mass > 0, free_mass / kept_mass, 0.0)

        clipped = np.where(lifted, epsilon, rows * scale)
        newly = ~lifted & (clipped < epsilon)

        if not newly.any():
            break

        lifted = lifted | newly

    # nothing left to rescale, e.g. all-zero rows
    empty = lifted.all(axis=-1)

    if empty.any():
        clipped[empty] = 1 / rows.shape[-1]

    return clipped.reshape(values.shape)


def _chebyshev(truths, predictions):
    return np.abs(truths - predictions).max(axis=1)


def _ratio_terms(truths, predictions):
    numer = np.abs(truths - predictions)
    denom = truths + predictions

    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denom > 0, numer / denom, 0.0)


def _clark(truths, predictions):
    return np.sqrt((_ratio_terms(truths, predictions) ** 2).sum(axis=1))


def _canberra(truths, predictions):
    return _ratio_terms(truths, predictions).sum(axis=1)


def _kl_divergence(truths, predictions):
    truths = clip_and_renormalize(truths)
    predictions = clip_and_renormalize(predictions)
    divergences = (truths * np.log(truths / predictions)).sum(axis=1)
    return np.maximum(divergences, 0.0)


def _cosine(truths, predictions):
    dots = (truths * predictions).sum(axis=1)
    norms = np.linalg.norm(truths, axis=1) * np.linalg.norm(predictions, axis=1)
    return dots / norms


def _intersection(truths, predictions):
    return np.minimum(truths, predictions).sum(axis=1)


METRICS = {
    MetricKind.CHEBYSHEV: _chebyshev,
    MetricKind.CLARK: _clark,
    MetricKind.CANBERRA: _canberra,
    MetricKind.KL_DIVERGENCE: _kl_divergence,
    MetricKind.COSINE: _cosine,
    MetricKind.INTERSECTION: _intersection,
}


def evaluate(kind, truth, prediction):
    """Compares a predicted label distribution against the truth.

    Args:
        kind (MetricKind): The metric (or its key).
        truth (Seq[float]): The ground truth distribution (the left argument
            of the KL divergence).
        prediction (Seq[float]): The predicted distribution.

    Returns:
        float: The metric value.

    Raises:
        LengthMismatch: If the distributions differ in length.

    Examples:
        >>> evaluate('chebyshev', [1, 0], [0.5, 0.5])
        0.5
        >>> round(evaluate('canberra', [0.8, 0.2], [0.2, 0.8]), 12)
        1.2
        >>> evaluate('kl', [0.2, 0.3, 0.5], [0.2, 0.3, 0.5])
        0.0
        >>> evaluate('kl', [0.5, 0.5], [0.5, 0.25, 0.25])
        Traceback (most recent call last):
        erdf.core.LengthMismatch: Lengths differ: 2 vs 3.
    """
    truth = np.asarray(truth, dtype=float).ravel()
    prediction = np.asarray(prediction, dtype=float).ravel()

    if len(truth) != len(prediction):
        msg = "Lengths differ: {} vs {}.".format(len(truth), len(prediction))
        raise LengthMismatch(msg)

    kind = MetricKind.parse(kind)
    return float(METRICS[kind](truth[None, :], prediction[None, :])[0])


def evaluate_batch(kind, truths, predictions):
    """Compares predictions against the truth row by row.

    Args:
        kind (MetricKind): The metric (or its key).
        truths (Seq[Seq[float]]): N x c ground truth distributions.
        predictions (Seq[Seq[float]]): N x c predicted distributions.

    Returns:
        Tuple(numpy.ndarray, float): The per sample values and their mean.

    Raises:
        ShapeMismatch: If the matrices differ in shape.

    Examples:
        >>> per_sample, mean = evaluate_batch(
        ...     'chebyshev', [[1, 0], [0, 1]], [[0.5, 0.5], [0.5, 0.5]])
        >>> per_sample.tolist(), mean
        ([0.5, 0.5], 0.5)
    """
    truths = as_matrix(truths, "truths")
    predictions = as_matrix(predictions, "predictions")

    if truths.shape != predictions.shape:
        msg = "Shapes differ: {} vs {}.".format(truths.shape, predictions.shape)
        raise ShapeMismatch(msg)

    kind = MetricKind.parse(kind)
    per_sample = METRICS[kind](truths, predictions)
    mean = float(per_sample.mean()) if len(per_sample) else float("nan")
    return per_sample, mean
