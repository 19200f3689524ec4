import numpy as np
import pytest

from latmech import BondParams, LatticeGraph
from latmech import unit_cell

ROW1 = dict(x0=-0.1, x1=0.1, x2=0.3, x3=0.4, f0=-0.1, f1=0.1)

_acceptance_lines: list[str] = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    _acceptance_lines.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def cell():
    return unit_cell.graph()


@pytest.fixture
def cell_params():
    return unit_cell.params()


def bond(length=1.0, direction=(1.0, 0.0, 0.0), **law):
    """Two-node graph with one bond of the given length; law defaults to row 1."""
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    g = LatticeGraph(np.array([[0.0, 0.0, 0.0], length * d]), [[1, 0]])
    p = BondParams.uniform(g.reference_lengths, **{**ROW1, **law})
    return g, p


def chain(n=3, spacing=1.0):
    pos = np.zeros((n, 3))
    pos[:, 0] = spacing * np.arange(n)
    return LatticeGraph(pos, [[i + 1, i] for i in range(n - 1)])
