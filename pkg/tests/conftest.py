# -*- coding: utf-8 -*-
"""pytest wiring for the nose-style test suite (pytest>=8 dropped nose support)"""
import unittest

import pytest


@pytest.fixture(autouse=True)
def _nose_setup(request):
    """call nose-style ``setUp`` on plain (non-unittest) test classes"""
    instance = request.instance

    if instance is not None and not isinstance(instance, unittest.TestCase):
        setup = getattr(instance, "setUp", None)

        if callable(setup):
            setup()

    yield
