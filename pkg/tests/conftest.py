import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from arrowlab.operations import Operation, Permutation, all_tuples  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def random_operation(rng: np.random.Generator, n: int, r: int, conservative: bool = False) -> Operation:
    if not conservative:
        return Operation(n, r, rng.integers(0, n, size=n**r))
    t = all_tuples(n, r)
    pick = rng.integers(0, r, size=len(t))
    return Operation(n, r, t[np.arange(len(t)), pick])


def random_permutation(rng: np.random.Generator, n: int) -> Permutation:
    return Permutation(tuple(int(x) for x in rng.permutation(n)))


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
