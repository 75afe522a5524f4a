import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from oracles import random_market  # noqa: E402
from refprice import MarketParams, PriceState  # noqa: E402

settings.register_profile("repo", max_examples=60, deadline=None)
settings.load_profile("repo")

EX1 = dict(alpha=(5, 6), beta=(2, 3), delta=(0.4, 0.7), gamma=(0.1, 0.5),
           theta=(0.8, 0.2), a=0.4, p_lo=1, p_hi=2)


@pytest.fixture
def ex1():
    return MarketParams(**EX1)


@pytest.fixture
def start():
    return PriceState(1.0, 1.0, 1.5)


def seeded_markets(n, seed=20240607):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        spec = random_market(rng)
        if spec is not None:
            out.append(MarketParams(**spec))
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
