import numpy as np
import pytest

from ndpressure import builtin_system
from ndpressure.space import MetricSpace
from ndpressure.systems import MapSequence, Potential, System


@pytest.fixture(scope="session")
def single_point():
    return builtin_system({"family": "single-point", "potential": 0.3})


@pytest.fixture(scope="session")
def two_point():
    return builtin_system({"family": "two-point"})


@pytest.fixture(scope="session")
def funnel():
    # a -> b, b -> b
    return builtin_system({"family": "two-point", "map": "collapse"})


@pytest.fixture(scope="session")
def shift8():
    return builtin_system({"family": "cyclic-shift", "length": 8, "alphabet": 2})


@pytest.fixture(scope="session")
def shift12():
    return builtin_system({"family": "cyclic-shift", "length": 12, "alphabet": 2})


@pytest.fixture(scope="session")
def three_cycle():
    return builtin_system({"family": "n-cycle", "n": 3, "potential": [1.0, 2.0, 4.0]})


@pytest.fixture(scope="session")
def line4():
    # four points on a line, spacing 1, identity dynamics
    m = np.abs(np.arange(4)[:, None] - np.arange(4)[None, :]).astype(float)
    space = MetricSpace.from_matrix(m)
    maps = MapSequence.constant(np.arange(4), name="identity")
    return System(space, maps, Potential.zero(4), name="line4")


@pytest.fixture(scope="session")
def alternating():
    # g at odd times, h at even times, on three points
    m = np.ones((3, 3)) - np.eye(3)
    space = MetricSpace.from_matrix(m)
    g = np.array([1, 2, 0])
    h = np.array([2, 0, 1])
    maps = MapSequence.cycle([g, h], name="alternating")
    return System(space, maps, Potential.zero(3), name="alternating"), g, h
