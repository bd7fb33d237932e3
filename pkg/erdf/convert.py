#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf.convert
~~~~~~~~~~~~

Provides methods for converting between cells, matrices and records

Examples:
    basic usage::

        >>> from erdf.convert import to_float
        >>>
        >>> to_float(' 0.25 ')
        0.25
"""
import csv
import itertools as it

from io import StringIO

import numpy as np

from . import DIGITS


def to_float(content, warn=False):
    """Parses a decimal point real.

    Args:
        content (str): The number to parse.
        warn (bool): raise error if content can't be safely converted
            (default: False)

    Returns:
        float: The parsed number (nan when unparseable and `warn` is False).

    Examples:
        >>> to_float('1e-3')
        0.001
        >>> to_float('spam')
        nan
        >>> to_float('1,5', warn=True)
        Traceback (most recent call last):
        ValueError: Invalid float value: `1,5`.
    """
    try:
        value = float(str(content).strip())
    except ValueError:
        if warn:
            raise ValueError("Invalid float value: `{}`.".format(content))

        value = float("nan")

    return value


def format_float(value, digits=DIGITS):
    """Formats a real with enough significant digits to read it back exactly

    Examples:
        >>> format_float(0.1)
        '0.10000000000000001'
        >>> format_float(0.1, 4)
        '0.1'
        >>> float(format_float(1 / 3)) == 1 / 3
        True
    """
    return "{:.{}g}".format(float(value), digits)


def array2records(data, header=None):
    """Converts a 2-D array into records

    Args:
        data (Seq[Seq]): The rows.
        header (Seq[str]): The field names (default: `column_1`, `column_2`,
            ...).

    Returns:
        Iter[dict]

    Examples:
        >>> next(array2records(np.array([[1, 2]]))) == {
        ...     'column_1': 1, 'column_2': 2}
        True
        >>> next(array2records([[0.5, 0.5]], ['y0', 'y1'])) == {
        ...     'y0': 0.5, 'y1': 0.5}
        True
    """
    rows = iter(data.tolist() if hasattr(data, "tolist") else data)

    if not header:
        first_row = next(rows)
        header = ["column_%i" % (n + 1) for n in range(len(first_row))]
        rows = it.chain([first_row], rows)

    return (dict(zip(header, row)) for row in rows)


def records2array(records, fields, warn=True):
    """Collects record fields into a float matrix

    Examples:
        >>> records2array([{'a': '1', 'b': 2}], ['b', 'a']).tolist()
        [[2.0, 1.0]]
    """
    rows = [[to_float(r[f], warn) for f in fields] for r in records]
    return np.array(rows, dtype=float).reshape(len(rows), len(fields))


def records2csv(records, delimiter=",", skip_header=False, header=None):
    """Converts records into a csv file like object.

    Args:
        records (Iter[dict]): Rows of data whose keys are the field names.
        delimiter (str): The field delimiter (default: ',').
        skip_header (bool): Don't write the header (default: False)
        header (Seq[str]): The field order (default: the first record's keys).

    Returns:
        obj: io.StringIO instance

    Examples:
        >>> records = [{'metric': 'kl', 'mean': '0.1234'}]
        >>> csv_obj = records2csv(records)
        >>> next(csv_obj).strip().split(',')
        ['metric', 'mean']
        >>> next(csv_obj).strip().split(',')
        ['kl', '0.1234']
    """
    f = StringIO()
    irecords = iter(records)
    row = next(irecords)
    kwargs = {"delimiter": delimiter, "lineterminator": "\n"}
    w = csv.DictWriter(f, header or list(row.keys()), **kwargs)
    None if skip_header else w.writeheader()
    w.writerow(row)
    w.writerows(irecords)
    f.seek(0)
    return f
