#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.process
~~~~~~~~~~~~

Provides methods for processing result `records`, i.e., rows of experiment
results such as `{'variant': 'full', 'metric': 'kl', 'seed': 0, 'value': 0.1}`.

Examples:
    basic usage::

        >>> from erdf.process import summarize
        >>>
        >>> records = [
        ...     {'metric': 'kl', 'value': 0.25}, {'metric': 'kl', 'value': 0.75}]
        >>> summarize(records, ['metric']) == [
        ...     {'metric': 'kl', 'mean': 0.5, 'std': 0.25, 'count': 2}]
        True
"""
import itertools as it

from operator import itemgetter

import numpy as np

from . import stats
from .core import MetricKind


def aggregate(records, key, op, default=0):
    """Aggregates `records` on a specified key.

    Args:
        records (Iter[dict]): Rows of results.
        key (str): The field to aggregate
        op (func): Aggregation function. Receives a list of all non-null values
            and should return the combined value, e.g., `stats.mean`.
        default (int or str): default value to use in `op` for missing keys
            (default: 0).

    Returns:
        dict: The first record with an aggregated value for `key`

    Examples:
        >>> records = [
        ...     {'metric': 'kl', 'value': 0.2},
        ...     {'metric': 'kl', 'value': 0.4}]
        ...
        >>> round(aggregate(records, 'value', stats.mean)['value'], 12)
        0.3
    """
    records = iter(records)
    first = next(records)
    values = (r.get(key, default) for r in it.chain([first], records))
    value = op([x for x in values if x is not None])
    return dict(it.chain(first.items(), [(key, value)]))


def group(records, keyfunc, tupled=True, aggregator=list, **kwargs):
    """Groups records by keyfunc

    Args:
        records (Iter[dict]): Rows of results.
        keyfunc (func): Either a fieldname or function which receives a record
            and selects which value to sort/group by.
        tupled (bool): Return the key, group tuples (default: True)
        aggregator (func): A post processing function to call on each resulting
            group (default: list).
        kwargs (dict): Keyword args passed to the aggregator.

    Returns:
        Iter(tuple[key, group]): Generator of tuples

    Examples:
        >>> records = [
        ...     {'variant': 'full', 'value': 0.1},
        ...     {'variant': 'df', 'value': 0.3},
        ...     {'variant': 'full', 'value': 0.2}]
        ...
        >>> key, grp = next(group(records, 'variant'))
        >>> key, len(grp)
        ('df', 1)
    """
    keyfunc = keyfunc if callable(keyfunc) else itemgetter(keyfunc)
    sorted_records = sorted(records, key=keyfunc)
    grouped = it.groupby(sorted_records, keyfunc)

    if tupled:
        result = ((key, aggregator(group, **kwargs)) for key, group in grouped)
    else:
        result = (aggregator(group, **kwargs) for key, group in grouped)

    return result


def summarize(records, keys, field="value"):
    """Collapses repeated runs into mean and (population) standard deviation.

    Groups keep the order in which their key first appears.

    Args:
        records (Iter[dict]): Rows of results.
        keys (Seq[str]): The fields identifying a group.
        field (str): The field to summarize (default: 'value').

    Returns:
        List[dict]: One record per group with the `keys` fields plus `mean`,
            `std` and `count`.
    """
    records = list(records)
    keyfunc = lambda r: tuple(r[k] for k in keys)
    order = {k: i for i, k in reversed(list(enumerate(map(keyfunc, records))))}
    summary = []

    for key, grp in group(records, lambda r: order[keyfunc(r)]):
        values = [r[field] for r in grp]
        content = dict(zip(keys, keyfunc(grp[0])))
        content.update(mean=stats.mean(values), std=stats.std(values))
        content["count"] = len(values)
        summary.append(content)

    return summary


def rank(values, higher_is_better=False):
    """Ranks values starting at 1; ties share their mean rank

    Args:
        values (Seq[float]): The scores.
        higher_is_better (bool): Rank the largest value first (default: False).

    Returns:
        List[float]: The rank of each value.

    Examples:
        >>> rank([0.3, 0.1, 0.2])
        [3.0, 1.0, 2.0]
        >>> rank([0.5, 0.5, 0.1], higher_is_better=True)
        [1.5, 1.5, 3.0]
    """
    values = np.asarray(values, dtype=float)
    keyed = -values if higher_is_better else values
    order = np.argsort(keyed, kind="stable")
    ranks = np.empty(len(values))
    position = 0

    while position < len(order):
        end = position

        while end + 1 < len(order) and keyed[order[end + 1]] == keyed[order[position]]:
            end += 1

        ranks[order[position:end + 1]] = (position + end) / 2 + 1
        position = end + 1

    return ranks.tolist()


def add_ranks(summary, within="metric", field="mean"):
    """Ranks the records of every `within` group by their `field` value.

    The `within` field must hold a metric key so the direction is known.

    Examples:
        >>> summary = [
        ...     {'metric': 'kl', 'variant': 'full', 'mean': 0.1},
        ...     {'metric': 'kl', 'variant': 'df', 'mean': 0.2},
        ...     {'metric': 'cosine', 'variant': 'full', 'mean': 0.9},
        ...     {'metric': 'cosine', 'variant': 'df', 'mean': 0.9}]
        >>> [r['rank'] for r in add_ranks(summary)]
        [1.0, 2.0, 1.5, 1.5]
    """
    ranked = [dict(r) for r in summary]

    for metric, grp in group(ranked, within):
        similarity = not MetricKind.parse(metric).is_distance
        ranks = rank([r[field] for r in grp], similarity)

        for record, value in zip(grp, ranks):
            record["rank"] = value

    return ranked


def average_ranks(ranked, among="variant"):
    """Averages each `among` entry's rank over all groups

    Examples:
        >>> ranked = [
        ...     {'variant': 'full', 'rank': 1.0}, {'variant': 'df', 'rank': 2.0},
        ...     {'variant': 'full', 'rank': 1.5}, {'variant': 'df', 'rank': 1.5}]
        >>> average_ranks(ranked) == {'full': 1.25, 'df': 1.75}
        True
    """
    grouped = group(ranked, among, aggregator=aggregate, key="rank", op=stats.mean)
    return {key: record["rank"] for key, record in grouped}
