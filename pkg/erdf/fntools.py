#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.fntools
~~~~~~~~~~~~

Provides small functional helpers shared by the io, cascade and cli modules

Examples:
    basic usage::

        >>> from erdf.fntools import dfilter
        >>>
        >>> dfilter({'keep': 1, 'strip': None}, ['strip']) == {'keep': 1}
        True

Attributes:
    DELIMITERS (dict): File extension to field delimiter lookup table
    MAX_SEED (int): Upper bound (exclusive) of derived seeds
"""
import os

from json import JSONEncoder
from os import path as p
from itertools import filterfalse

import numpy as np

from . import THREADS_ENV

DELIMITERS = {"csv": ",", "tsv": "\t", "txt": ","}
MAX_SEED = 2 ** 63 - 1


class CustomEncoder(JSONEncoder):
    """JSON encoder that understands numpy arrays and scalars as well as
    objects exposing a `to_dict` method.

    Examples:
        >>> from json import dumps
        >>> dumps({'a': np.arange(3)}, cls=CustomEncoder)
        '{"a": [0, 1, 2]}'
        >>> dumps(np.float64(0.1), cls=CustomEncoder)
        '0.1'
    """

    def default(self, obj):
        if hasattr(obj, "to_dict"):
            encoded = obj.to_dict()
        elif isinstance(obj, np.ndarray):
            encoded = obj.tolist()
        elif isinstance(obj, np.integer):
            encoded = int(obj)
        elif isinstance(obj, np.floating):
            encoded = float(obj)
        elif isinstance(obj, np.bool_):
            encoded = bool(obj)
        elif hasattr(obj, "union"):
            encoded = sorted(obj)
        else:
            encoded = super(CustomEncoder, self).default(obj)

        return encoded


def get_ext(path):
    """Gets a file's extension

    Args:
        path (str): the file path

    Returns:
        str: the lower cased extension (without the dot)

    Examples:
        >>> get_ext('file.csv') == 'csv'
        True
        >>> get_ext('out/TABLE.TSV') == 'tsv'
        True
    """
    return p.splitext(path)[1].lstrip(".").lower()


def get_delimiter(path, default=","):
    """Picks the field delimiter implied by a file's extension

    Examples:
        >>> get_delimiter('table.tsv') == '\\t'
        True
        >>> get_delimiter('table.dat')
        ','
    """
    return DELIMITERS.get(get_ext(path), default)


def dfilter(content, blacklist=None, inverse=False):
    """Filters content

    Args:
        content (dict): The content to filter
        blacklist (Seq[str]): The fields to remove (default: None)
        inverse (bool): Keep fields instead of removing them (default: False)

    Returns:
        dict: The filtered content

    Examples:
        >>> content = {'keep': 'Hello', 'strip': 'World'}
        >>> dfilter(content) == {'keep': 'Hello', 'strip': 'World'}
        True
        >>> dfilter(content, ['strip']) == {'keep': 'Hello'}
        True
        >>> dfilter(content, ['strip'], True) == {'strip': 'World'}
        True
    """
    blackset = set(blacklist or [])
    func = filterfalse if inverse else filter
    return dict(func(lambda x: x[0] not in blackset, content.items()))


def remove_nones(content):
    """Drops the keys whose value is None

    Examples:
        >>> remove_nones({'a': 1, 'b': None, 'c': False}) == {'a': 1, 'c': False}
        True
    """
    return dfilter(content, [k for k, v in content.items() if v is None])


def listize(item):
    """Create a listlike object from an item

    Args:
        item (dict): The object to convert

    Returns:
        Seq: Item as a listlike object

    Examples:
        >>> listize('kl')
        ['kl']
        >>> listize(['kl', 'cosine'])
        ['kl', 'cosine']
        >>> listize(None)
        []
    """
    if item is None:
        listlike = []
    elif isinstance(item, (str, bytes)) or not hasattr(item, "__iter__"):
        listlike = [item]
    else:
        listlike = list(item)

    return listlike


def derive_seeds(seed, count):
    """Derives `count` independent seeds from a parent seed

    Examples:
        >>> derive_seeds(7, 3) == derive_seeds(7, 3)
        True
        >>> len(set(derive_seeds(7, 50)))
        50
    """
    rng = np.random.default_rng(seed)
    return [int(s) for s in rng.integers(0, MAX_SEED, size=count)]


def get_n_jobs(n_jobs=None):
    """Resolves the worker count, falling back to the THREADS_ENV environment
    variable and then to 1

    Examples:
        >>> get_n_jobs(4)
        4
    """
    if n_jobs is None:
        n_jobs = int(os.environ.get(THREADS_ENV) or 1)

    return n_jobs
