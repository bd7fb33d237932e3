#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.io
~~~~~~~

Provides methods for reading and writing datasets, configs and models, for
splitting datasets and for generating synthetic label distribution data

Examples:
    basic usage::

        >>> from erdf.io import load_dataset
        >>>
        >>> dataset = load_dataset(p.join(DATA_DIR, 'sample.csv'))
        >>> dataset.n_samples, dataset.n_features, dataset.n_labels
        (12, 3, 4)

Attributes:
    FEATURE (str): Feature column name prefix.
    LABEL (str): Label column name prefix.
"""
import csv
import hashlib
import json
import re

from io import StringIO
from math import ceil
from os import path as p

import numpy as np
import pygogo as gogo
import yaml

from scipy.special import softmax

from . import convert as cv, fntools as ft, ENCODING, FORMAT_VERSION, DATA_DIR
from .cascade import CascadeModel
from .core import (
    LdlDataset,
    ConfigInvalid,
    CorruptModel,
    InvalidDistribution,
    IoError,
    ParseError,
    SchemaError,
    TooFewSamples,
    VersionMismatch,
    NegativeEntry,
    NonFinite,
    SumOutOfTolerance,
    check_rows,
    SUM_TOLERANCE,
)

hdlr = gogo.handlers.stderr_hdlr()
logger = gogo.Gogo(__name__, low_hdlr=hdlr, low_level="info", monolog=True).logger

FEATURE = "f"
LABEL = "y"
COLUMN = re.compile(r"^([fy])(0|[1-9][0-9]*)$")


class SplitSpec(object):
    """How to split a dataset into train and test rows

    Examples:
        >>> SplitSpec(train_fraction=1.0)
        Traceback (most recent call last):
        erdf.core.ConfigInvalid: `train_fraction` must be in (0, 1), got `1.0`.
    """

    def __init__(self, train_fraction=0.8, seed=0):
        self.train_fraction = float(train_fraction)
        self.seed = int(seed)

        if not 0 < self.train_fraction < 1:
            msg = "`train_fraction` must be in (0, 1), got `{}`."
            raise ConfigInvalid(msg.format(self.train_fraction))


class SyntheticSpec(object):
    """The shape and noise level of a synthetic dataset.

    Args:
        n_samples (int): Rows.
        n_features (int): Feature columns.
        n_labels (int): Label columns.
        k_true (int): Latent label groups, at most `n_labels` (default: 2).
        noise_sigma (float): Standard deviation of the logit noise
            (default: 0.1).
        seed (int): The seed (default: 0).
    """

    def __init__(self, n_samples, n_features, n_labels, k_true=2, **kwargs):
        self.n_samples = int(n_samples)
        self.n_features = int(n_features)
        self.n_labels = int(n_labels)
        self.k_true = int(k_true)
        self.noise_sigma = float(kwargs.get("noise_sigma", 0.1))
        self.seed = int(kwargs.get("seed", 0))

        if self.n_samples < 1 or self.n_features < 1:
            raise ConfigInvalid("Need at least 1 sample and 1 feature.")

        if self.n_labels < 2:
            raise ConfigInvalid("Need at least 2 labels.")

        if not 1 <= self.k_true <= self.n_labels:
            msg = "`k_true` must be in [1, {}], got `{}`."
            raise ConfigInvalid(msg.format(self.n_labels, self.k_true))

        if self.noise_sigma < 0:
            msg = "`noise_sigma` must be >= 0, got `{}`."
            raise ConfigInvalid(msg.format(self.noise_sigma))


def read_any(filepath, reader, mode="r", *args, **kwargs):
    """Reads a file or filepath

    Args:
        filepath (str): The file path or file like object.
        reader (func): The processing function.
        mode (Optional[str]): The file open mode (default: 'r').
        kwargs (dict): Keyword arguments that are passed to the reader.

    Yields:
        scalar: Result of applying the reader func to the file.

    Examples:
        >>> filepath = p.join(DATA_DIR, 'sample.csv')
        >>> reader = lambda f, **kw: (l.strip().split(',') for l in f)
        >>> next(read_any(filepath, reader, 'r'))[:4]
        ['f0', 'f1', 'f2', 'y0']
    """
    if hasattr(filepath, "read"):
        for line in reader(filepath, *args, **kwargs):
            yield line
    else:
        encoding = None if "b" in mode else kwargs.pop("encoding", ENCODING)

        try:
            f = open(filepath, mode, encoding=encoding)
        except OSError as err:
            raise IoError("Unable to open `{}`: {}".format(filepath, err))

        with f:
            for line in reader(f, *args, **kwargs):
                yield line


def read_csv(filepath, mode="r", **kwargs):
    """Reads a delimited file with a header row.

    Args:
        filepath (str): The csv file path or file like object.
        mode (Optional[str]): The file open mode (default: 'r').
        kwargs (dict): Keyword arguments that are passed to the csv reader.

    Kwargs:
        delimiter (str): Field delimiter (default: ',').
        encoding (str): File encoding.

    Yields:
        dict: A row of data whose keys are the field names. Missing cells are
            None and surplus cells are listed under the None key.

    Examples:
        >>> records = read_csv(StringIO('f0,y0,y1\\n1.5,0.5,0.5\\n'))
        >>> next(records) == {'f0': '1.5', 'y0': '0.5', 'y1': '0.5'}
        True
    """
    def reader(f, **kwargs):
        """File reader"""
        records = csv.DictReader(f, **kwargs)

        # blank lines are skipped
        for record in records:
            yield record

    return read_any(filepath, reader, mode, **kwargs)


def write(filepath, content, mode="w", **kwargs):
    """Writes content to a file path or file like object.

    Args:
        filepath (str): The file path or file like object to write to.
        content (obj): File like object or str.
        mode (Optional[str]): The file open mode (default: 'w').

    Kwargs:
        encoding (str): The file encoding.

    Returns:
        int: characters written

    Examples:
        >>> write(StringIO(), StringIO('Hello World'))
        11
        >>> write(StringIO(), 'Iñtërnâtiônàližætiøn')
        20
    """
    text = content.read() if hasattr(content, "read") else content

    if hasattr(filepath, "write"):
        return filepath.write(text)

    encoding = None if "b" in mode else kwargs.get("encoding", ENCODING)

    try:
        with open(filepath, mode, encoding=encoding, newline="") as f:
            return f.write(text)
    except OSError as err:
        raise IoError("Unable to write `{}`: {}".format(filepath, err))


def hash_file(filepath, algo="sha1", chunksize=0, verbose=False):
    """Hashes a file path or file like object.

    Args:
        filepath (str): The file path or file like object to hash.
        algo (str): The hashlib hashing algorithm to use (default: sha1).
        chunksize (Optional[int]): Number of bytes to read at a time
            (default: 0, i.e., all).
        verbose (Optional[bool]): Log the hash (default: False).

    Returns:
        str: File hash.

    Examples:
        >>> from tempfile import TemporaryFile
        >>> resp = 'da39a3ee5e6b4b0d3255bfef95601890afd80709'
        >>> hash_file(TemporaryFile()) == resp
        True
    """

    def reader(f, hasher, **kwargs):  # pylint: disable=W0613
        """File hasher"""
        if chunksize:
            while True:
                data = f.read(chunksize)

                if not data:
                    break

                hasher.update(data)
        else:
            hasher.update(f.read())

        yield hasher.hexdigest()

    args = [getattr(hashlib, algo)()]
    file_hash = next(read_any(filepath, reader, "rb", *args))

    if verbose:
        logger.info("File %s hash is %s.", filepath, file_hash)

    return file_hash


def _check_header(names):
    if not names:
        raise SchemaError("The file has no header row.")

    matches = [COLUMN.match(name) for name in names]
    unknown = [n for n, m in zip(names, matches) if not m]

    if unknown:
        msg = "Unexpected columns: `{}`.".format("`, `".join(unknown))
        raise SchemaError(msg)

    if len(set(names)) != len(names):
        raise SchemaError("Duplicate column names.")

    indices = {FEATURE: [], LABEL: []}

    for match in matches:
        indices[match.group(1)].append(int(match.group(2)))

    for prefix, minimum in [(FEATURE, 1), (LABEL, 2)]:
        found = sorted(indices[prefix])

        if len(found) < minimum:
            msg = "Need at least {} `{}` columns, got {}."
            raise SchemaError(msg.format(minimum, prefix, len(found)))

        if found != list(range(len(found))):
            msg = "`{}` columns must be numbered 0 to {}."
            raise SchemaError(msg.format(prefix, len(found) - 1))

    features = ["%s%i" % (FEATURE, i) for i in range(len(indices[FEATURE]))]
    labels = ["%s%i" % (LABEL, i) for i in range(len(indices[LABEL]))]
    return features, labels


def _read_table(f, **kwargs):
    """Yields the header, then (line number, record) pairs"""
    records = csv.DictReader(f, **kwargs)
    yield records.fieldnames or []

    for record in records:
        yield records.line_num, record


def _parse_rows(rows, header, names):
    positions = {name: names.index(name) + 1 for name in header}
    parsed = []

    for line, record in rows:
        if None in record:
            column = len(names) + 1
            msg = "Line {} has {} surplus cells.".format(line, len(record[None]))
            raise ParseError(msg, line=line, column=column)

        row = []

        for name in header:
            cell, column = record[name], positions[name]

            if cell is None or not cell.strip():
                msg = "Line {} is missing column {} (`{}`).".format(line, column, name)
                raise ParseError(msg, line=line, column=column)

            try:
                row.append(cv.to_float(cell, warn=True))
            except ValueError:
                msg = "Line {}, column {}: invalid real `{}`."
                raise ParseError(msg.format(line, column, cell), line=line, column=column)

        parsed.append(row)

    return np.array(parsed, dtype=float).reshape(len(parsed), len(header))


def load_dataset(path, renormalize=False, **kwargs):
    """Reads a label distribution dataset.

    The header names feature columns `f0`...`f{d-1}` and label columns
    `y0`...`y{c-1}`; every other cell is a decimal point real.

    Args:
        path (str): The file path or file like object.
        renormalize (bool): Rescale label rows whose sum is off by at most 1e-3
            instead of rejecting them (default: False).

    Kwargs:
        delimiter (str): Field delimiter (default: implied by the extension).

    Returns:
        LdlDataset

    Raises:
        ParseError: If a cell is missing or not a real.
        SchemaError: If the header doesn't describe features and labels.
        InvalidDistribution: If a label row isn't a distribution.

    Examples:
        >>> content = 'f0,y0,y1\\n1,0.5,0.51\\n'
        >>> load_dataset(StringIO(content))
        Traceback (most recent call last):
        erdf.core.InvalidDistribution: Row 0 is not a label distribution: Row 0 sums to `1.01`.
        >>> labels = load_dataset(StringIO(content), renormalize=True).labels
        >>> round(float(labels.sum()), 12)
        1.0
    """
    name = getattr(path, "name", path)
    default = ft.get_delimiter(name) if isinstance(name, str) else ","
    delimiter = kwargs.get("delimiter") or default
    rows = read_any(path, _read_table, delimiter=delimiter)
    names = list(next(rows))
    features, labels = _check_header(names)
    data = _parse_rows(rows, features + labels, names)
    d = len(features)

    try:
        label_rows = check_rows(data[:, d:], renormalize)
    except (NegativeEntry, NonFinite, SumOutOfTolerance) as err:
        msg = "Row {} is not a label distribution: {}".format(err.row, err)
        raise InvalidDistribution(msg, row=err.row)

    if renormalize:
        off = np.abs(data[:, d:].sum(axis=1) - 1) > SUM_TOLERANCE

        if off.any():
            logger.warning("renormalized %s label rows", int(off.sum()))

    return LdlDataset(data[:, :d], label_rows, features, labels)


def dataset2records(dataset):
    """Converts a dataset into records of 17 significant digit strings"""
    header = dataset.feature_names + dataset.label_names
    rows = np.hstack([dataset.features, dataset.labels])
    formatted = ([cv.format_float(x) for x in row] for row in rows)
    return cv.array2records(formatted, header)


def save_dataset(dataset, path, **kwargs):
    """Writes a dataset in the format `load_dataset` reads.

    Args:
        dataset (LdlDataset): The data.
        path (str): The file path or file like object.

    Kwargs:
        delimiter (str): Field delimiter (default: implied by the extension).

    Returns:
        int: characters written

    Examples:
        >>> from erdf.core import LdlDataset
        >>> f = StringIO()
        >>> save_dataset(LdlDataset([[1.5]], [[0.25, 0.75]]), f)
        23
        >>> f.getvalue().splitlines()
        ['f0,y0,y1', '1.5,0.25,0.75']
    """
    name = getattr(path, "name", path)
    default = ft.get_delimiter(name) if isinstance(name, str) else ","
    delimiter = kwargs.get("delimiter") or default
    header = dataset.feature_names + dataset.label_names
    content = cv.records2csv(dataset2records(dataset), delimiter, header=header)
    return write(path, content)


def split(dataset, spec=None):
    """Shuffles a dataset and cuts it into train and test parts.

    The first `ceil(train_fraction * N)` shuffled rows train, kept between 1
    and N - 1.

    Args:
        dataset (LdlDataset): The data (at least 2 rows).
        spec (SplitSpec): The fraction and seed (default: 0.8 and 0).

    Returns:
        Tuple(LdlDataset, LdlDataset): The train and test parts.

    Examples:
        >>> from erdf.core import LdlDataset
        >>> dataset = LdlDataset([[i] for i in range(10)], [[0.5, 0.5]] * 10)
        >>> train, test = split(dataset, SplitSpec(seed=3))
        >>> train.n_samples, test.n_samples
        (8, 2)
    """
    spec = spec or SplitSpec()
    n = dataset.n_samples

    if n < 2:
        raise TooFewSamples("Need at least 2 samples to split, got {}.".format(n))

    order = np.random.default_rng(spec.seed).permutation(n)
    n_train = ceil(round(spec.train_fraction * n, 9))
    n_train = min(max(n_train, 1), n - 1)
    return dataset.subset(order[:n_train]), dataset.subset(order[n_train:])


def generate_synthetic(spec):
    """Draws a dataset whose labels form `k_true` correlated groups.

    Features are uniform on [-1, 1]. A seeded linear map turns them into
    `k_true` latent scores, every label loads on the score of its group
    (`label % k_true`) and the labels are the softmax of those logits plus
    gaussian noise.

    Args:
        spec (SyntheticSpec): The shape, noise and seed.

    Returns:
        LdlDataset

    Examples:
        >>> spec = SyntheticSpec(5, 2, 3, seed=4)
        >>> dataset = generate_synthetic(spec)
        >>> dataset.labels.shape
        (5, 3)
        >>> bool(np.allclose(dataset.labels.sum(axis=1), 1))
        True
        >>> bool((generate_synthetic(spec).features == dataset.features).all())
        True
    """
    rng = np.random.default_rng(spec.seed)
    n, d, c, k = spec.n_samples, spec.n_features, spec.n_labels, spec.k_true
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    hidden = rng.normal(0.0, 3.0 / np.sqrt(d), size=(d, k))
    groups = np.arange(c) % k
    mixing = np.zeros((k, c))
    mixing[groups, np.arange(c)] = rng.uniform(0.5, 1.5, size=c)
    bias = rng.normal(0.0, 0.5, size=c)
    noise = rng.normal(0.0, 1.0, size=(n, c)) * spec.noise_sigma
    labels = softmax(X @ hidden @ mixing + bias + noise, axis=1)
    return LdlDataset(X, labels / labels.sum(axis=1, keepdims=True))


def read_config(path):
    """Reads a YAML mapping of cascade settings.

    Args:
        path (str): The file path or file like object.

    Returns:
        dict: The settings.

    Examples:
        >>> read_config(StringIO('layers_max: 3\\nreuse_metric: kl\\n')) == {
        ...     'layers_max': 3, 'reuse_metric': 'kl'}
        True
    """
    try:
        content = next(read_any(path, lambda f: iter([yaml.safe_load(f)])))
    except yaml.YAMLError as err:
        raise ConfigInvalid("Invalid YAML in `{}`: {}".format(path, err))

    if content is None:
        content = {}
    elif not isinstance(content, dict):
        raise ConfigInvalid("The config must be a mapping of settings.")

    return content


def save_model(model, path):
    """Writes a model as versioned JSON with keys in sorted order.

    Reals are written in their shortest exact form, so a reloaded model
    predicts bit for bit like the saved one.

    Args:
        model (CascadeModel): The trained model.
        path (str): The file path or file like object.

    Returns:
        int: characters written
    """
    content = {"format_version": FORMAT_VERSION, "model": model}
    kwargs = {"cls": ft.CustomEncoder, "sort_keys": True, "separators": (",", ":")}
    return write(path, json.dumps(content, **kwargs) + "\n")


def load_model(path):
    """Reads a model written by `save_model`.

    Args:
        path (str): The file path or file like object.

    Returns:
        CascadeModel

    Raises:
        IoError: If the file can't be read.
        VersionMismatch: If the file has another format version.
        CorruptModel: If the file isn't a complete model.

    Examples:
        >>> load_model(StringIO('{"format_version": 99, "model": {}}'))
        Traceback (most recent call last):
        erdf.core.VersionMismatch: Model format version `99` (expected `1`).
        >>> load_model(StringIO('{"format_version": 1, "mod'))
        Traceback (most recent call last):
        erdf.core.CorruptModel: The model file is not valid JSON.
    """
    text = next(read_any(path, lambda f: iter([f.read()])))

    try:
        content = json.loads(text)
    except ValueError:
        raise CorruptModel("The model file is not valid JSON.")

    if not isinstance(content, dict) or "format_version" not in content:
        raise CorruptModel("The model file has no `format_version`.")

    version = content["format_version"]

    if version != FORMAT_VERSION:
        msg = "Model format version `{}` (expected `{}`)."
        raise VersionMismatch(msg.format(version, FORMAT_VERSION))

    try:
        return CascadeModel.from_dict(content["model"])
    except (KeyError, TypeError, IndexError, ValueError) as err:
        raise CorruptModel("Incomplete model: {}".format(err))
