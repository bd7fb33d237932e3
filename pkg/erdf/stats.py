#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.stats
~~~~~~~~~~

Statistics functions
"""
import numpy as np


def mean(values):
    """
    Example:
    >>> mean([1, 2, 3, 4, 4])
    2.8
    >>> mean([1, None, 3])
    2.0
    """
    non_nones = [x for x in values if x is not None]
    return sum(non_nones) / len(non_nones)


def std(values):
    """Population standard deviation of the non-null values

    Example:
    >>> std([2, 4, 4, 4, 5, 5, 7, 9])
    2.0
    >>> std([0.5])
    0.0
    """
    non_nones = [x for x in values if x is not None]
    return float(np.std(non_nones))


def pearson(x, y):
    """Pearson correlation of two equally long sequences (0 when either is
    constant)

    Example:
    >>> pearson([1, 2, 3], [2, 4, 6])
    1.0
    >>> pearson([1, 2, 3], [3, 2, 1])
    -1.0
    >>> pearson([1, 1, 1], [1, 2, 3])
    0.0
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    dx, dy = x - x.mean(), y - y.mean()
    norm = np.sqrt((dx ** 2).sum() * (dy ** 2).sum())

    if norm <= 1e-12:
        return 0.0

    return float(np.clip((dx * dy).sum() / norm, -1.0, 1.0))
