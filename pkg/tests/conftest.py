"""Make the repository root importable and provide shared graphs."""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from chimera_dyn.config import Settings  # noqa: E402
from chimera_dyn.hamiltonian import Scaling, build_hamiltonian  # noqa: E402
from chimera_dyn.topology import QubitGraph, experiment_graph, generate_chimera  # noqa: E402

CYCLE = [3, 7, 15, 11, 27, 31, 23, 19]


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def chimera():
    return generate_chimera(2, 2, 4)


@pytest.fixture
def cycle(settings):
    return experiment_graph(settings)


@pytest.fixture
def constant_h(cycle):
    return build_hamiltonian(cycle, Scaling.constant())


@pytest.fixture
def dipole_h(cycle):
    return build_hamiltonian(cycle, Scaling.dipole())


def line_graph(values, lengths=None):
    """Path graph 0-1-...-(n-1) with nodes on the x axis, one node per cell."""
    n = len(values)
    nodes = tuple(range(n))
    edges = tuple((i, i + 1) for i in range(n - 1))
    coords = {i: (float(x), 0.0) for i, x in enumerate(values)}
    overrides = dict(zip(edges, lengths)) if lengths else {}
    return QubitGraph(nodes, edges, coords, {i: i for i in nodes}, overrides)


def random_graph(rng, n, p=0.3):
    """Connected random graph: a spanning path plus random chords."""
    edges = {(i, i + 1) for i in range(n - 1)}
    for a in range(n):
        for b in range(a + 2, n):
            if rng.random() < p:
                edges.add((a, b))
    coords = {i: (float(rng.uniform(0, 10)), float(rng.uniform(0, 10))) for i in range(n)}
    return QubitGraph(tuple(range(n)), tuple(sorted(edges)), coords, {i: i // 8 for i in range(n)})
