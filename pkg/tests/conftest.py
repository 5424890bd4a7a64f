from functools import lru_cache

import numpy as np
import pytest

from wavica.wavelets import WaveletSpec, build_table, make_filter


@lru_cache(maxsize=None)
def cached_table(order, depth=12):
    return build_table(make_filter(order), depth)


@pytest.fixture
def haar():
    return cached_table(1)


@pytest.fixture
def d4():
    return cached_table(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def spec_and_table(order, level):
    return WaveletSpec(order, level), cached_table(order)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
