from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from ctinfer import VariableSpec, load_table, new_table

DATA = Path(__file__).parent / "data"

EXAMPLE_CELLS = [0.05, 0.10, 0.20, 0.10, 0.10, 0.15, 0.25, 0.05]
BINARY = ("false", "true")


@pytest.fixture
def example():
    """Worked-example table in layout order e1, e2, c (c fastest)."""
    specs = [VariableSpec(n, BINARY) for n in ("e1", "e2", "c")]
    # EXAMPLE_CELLS lists the table row by row: e1 slowest, then c, then e2
    cells = np.array(EXAMPLE_CELLS).reshape(2, 2, 2)
    return new_table(specs, np.transpose(cells, (0, 2, 1)))


@pytest.fixture
def example_text():
    return (DATA / "example.kb").read_text()


@pytest.fixture
def example_kb(example_text):
    return load_table(example_text)[0]


def random_table(rng, max_card=3, n_vars=None, low=0.02):
    """Strictly positive random table with up to three variables."""
    n_vars = n_vars or int(rng.integers(2, 4))
    specs = [
        VariableSpec(f"v{i}", [f"s{j}" for j in range(int(rng.integers(2, max_card + 1)))])
        for i in range(n_vars)
    ]
    shape = tuple(s.cardinality for s in specs)
    cells = rng.uniform(low, 1.0, size=shape)
    return new_table(specs, cells / cells.sum())


def random_dist(rng, k, low=0.02):
    d = rng.uniform(low, 1.0, size=k)
    return d / d.sum()


@st.composite
def positive_tables(draw, max_vars=3, max_card=3):
    n = draw(st.integers(2, max_vars))
    cards = [draw(st.integers(2, max_card)) for _ in range(n)]
    size = int(np.prod(cards))
    raw = draw(
        st.lists(st.floats(0.01, 1.0), min_size=size, max_size=size)
    )
    specs = [VariableSpec(f"v{i}", [f"s{j}" for j in range(k)]) for i, k in enumerate(cards)]
    cells = np.array(raw)
    return new_table(specs, cells / cells.sum())


@st.composite
def distributions(draw, k, low=0.01):
    raw = np.array(draw(st.lists(st.floats(low, 1.0), min_size=k, max_size=k)))
    return raw / raw.sum()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
