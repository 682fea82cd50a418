import numpy as np
import pytest

from fairlabel.model import Instance, LabelConstraints, Objective

CENTERS = np.array([[0.5], [4.5]])
POINTS = np.array([[0.0], [1.0], [4.0], [5.0]])


def make_t1(objective=Objective.KMEDIAN):
    # colors alternate, so the nearest assignment is already balanced
    return Instance(POINTS, np.array([0, 1, 0, 1]), CENTERS, objective)


def make_t2(objective=Objective.KMEDIAN):
    # each cluster is monochromatic
    return Instance(POINTS, np.array([0, 0, 1, 1]), CENTERS, objective)


def t2_constraints():
    """Label 0 exactly half of each color, both labels of size two."""
    return LabelConstraints([[0.5, 0.5], [0, 0]], [[0.5, 0.5], [1, 1]], (2, 2), (2, 2))


@pytest.fixture
def t1():
    return make_t1()


@pytest.fixture
def t2():
    return make_t2()


def random_instance(rng, n, k, c, objective, dim=2, grid=None):
    """Points and centers on a coarse grid keep ties and scaled costs honest."""
    if grid:
        coords = rng.integers(0, grid, size=(n, dim)).astype(float)
        centers = rng.integers(0, grid, size=(k, dim)).astype(float)
    else:
        coords = rng.uniform(0, 10, size=(n, dim))
        centers = rng.uniform(0, 10, size=(k, dim))
    colors = rng.integers(c, size=n)
    return Instance(coords, colors, centers, objective, num_colors=c)


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
