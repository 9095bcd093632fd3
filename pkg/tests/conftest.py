import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from stratpol.core import Instance  # noqa: E402


@st.composite
def instances(draw, max_m=6, inf_prob=0.3, quantum=None):
    m = draw(st.integers(1, max_m))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_instance(np.random.default_rng(seed), m, inf_prob, quantum)


def random_instance(rng, m, inf_prob=0.3, quantum=None):
    p = rng.uniform(0.05, 1.0, m)
    p /= p.sum()
    q = rng.uniform(0, 1, m)
    gamma = float(rng.uniform(0.05, 0.95))
    cost = rng.uniform(0.01, 1.0, (m, m))
    if quantum:
        cost = np.ceil(cost / quantum) * quantum
    cost[rng.random((m, m)) < inf_prob] = np.inf
    np.fill_diagonal(cost, 0.0)
    return Instance(p=p, q=q, gamma=gamma, cost=cost)


def random_policy(rng, m, grid=None):
    if grid:
        return rng.integers(0, grid + 1, m) / grid
    return rng.uniform(0, 1, m)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
