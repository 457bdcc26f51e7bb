from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from skirental.corpus import builtin_corpus, builtin_families
from skirental.dist import FiniteDistribution


@st.composite
def distributions(draw, max_n=40, max_atoms=None, min_n=1):
    """Random valid distributions; ``max_atoms`` limits the support size."""
    N = draw(st.integers(min_n, max_n))
    k_max = N if max_atoms is None else min(N, max_atoms)
    days = draw(st.lists(st.integers(1, N), min_size=1, max_size=k_max, unique=True))
    weights = draw(st.lists(st.floats(0.01, 1.0), min_size=len(days), max_size=len(days)))
    mass = np.zeros(N)
    mass[np.array(days) - 1] = weights
    return FiniteDistribution(mass / mass.sum())


def exact_cost(d, K, b):
    """Expected cost by summing per-horizon costs in exact rational arithmetic."""
    total = Fraction(0)
    for t, m in d.atoms():
        paid = t if t <= K else K + b
        total += Fraction(m) * paid
    return total


@pytest.fixture(scope="session")
def corpus():
    return builtin_corpus()


@pytest.fixture(scope="session")
def families():
    return builtin_families()


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
