#!/usr/bin/env python
# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab

"""
erdf
~~~~

Provides a deep forest for label distribution learning that enhances features
with label correlation patterns and reuses features of degraded samples

Attributes:
    ENCODING (str): Default file encoding.
    EPSILON (float): Floor applied to distributions before taking logarithms.
    SUM_TOLERANCE (float): Allowed absolute deviation of a distribution's sum
        from 1.
    RENORM_WINDOW (float): Largest sum deviation that may be renormalized away.
    FORMAT_VERSION (int): Model file format version.
    THREADS_ENV (str): Environment variable overriding the worker count.
    DIGITS (int): Significant digits used when writing reals to text.
"""

from os import path as p

__version__ = "0.1.0"
__title__ = "erdf"
__package_name__ = "erdf"
__author__ = "Reuben Cummings"
__description__ = "Enhanced and reused feature deep forest for label distribution learning"
__email__ = "reubano@gmail.com"
__license__ = "MIT"
__copyright__ = "Copyright 2026 Reuben Cummings"

ENCODING = "utf-8"
EPSILON = 1e-7
SUM_TOLERANCE = 1e-6
RENORM_WINDOW = 1e-3
FORMAT_VERSION = 1
THREADS_ENV = "ERDF_THREADS"
DIGITS = 17
PARENT_DIR = p.abspath(p.dirname(p.dirname(__file__)))
DATA_DIR = p.join(PARENT_DIR, "data", "test")
