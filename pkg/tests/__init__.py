# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab
"""
tests
~~~~~

Provides application unit tests
"""
import numpy as np

from erdf.core import LdlDataset
from erdf.cascade import CascadeConfig

# small forests keep the cascade tests fast
FAST = {
    "n_trees": 3,
    "enhancer_trees": 2,
    "oof_folds": 2,
    "max_depth": 4,
    "k_patterns": 3,
}


def fast_config(**kwargs):
    return CascadeConfig(**dict(FAST, **kwargs))


def random_simplex(rng, n, c):
    rows = rng.gamma(1.0, size=(n, c))
    return rows / rows.sum(axis=1, keepdims=True)


def homogeneous_dataset(n=12, d=2):
    features = np.arange(n * d, dtype=float).reshape(n, d)
    return LdlDataset(features, [[0.2, 0.3, 0.5]] * n)


def setup_package():
    """test context creation"""
    global initialized
    initialized = True
    print("Test Package Setup\n")


def teardown_package():
    """test context removal"""
    global initialized
    initialized = False
    print("Test Package Teardown\n")
