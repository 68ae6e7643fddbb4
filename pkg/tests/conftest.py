import random

import pytest

from coverdiam.metric_graph import MetricGraph


@pytest.fixture(scope="session")
def unit_triangle():
    return MetricGraph(
        ["v0", "v1", "v2"],
        [("e0", "v0", "v1", 1.0), ("e1", "v1", "v2", 1.0), ("e2", "v2", "v0", 1.0)],
    )


@pytest.fixture(scope="session")
def loop6():
    return MetricGraph(["v0"], [("e0", "v0", "v0", 6.0)])


@pytest.fixture(scope="session")
def theta():
    return MetricGraph(
        ["u", "v"],
        [("a", "u", "v", 1.0), ("b", "u", "v", 1.0), ("c", "u", "v", 2.0)],
    )


@pytest.fixture(scope="session")
def figure_eight():
    return MetricGraph(["v"], [("a", "v", "v", 1.0), ("b", "v", "v", 1.0)])


@pytest.fixture(scope="session")
def path_graph():
    return MetricGraph(
        ["p0", "p1", "p2"], [("e0", "p0", "p1", 1.0), ("e1", "p1", "p2", 2.0)]
    )


def random_connected_graph(rng: random.Random, max_vertices=8, max_edges=12) -> MetricGraph:
    """Random connected multigraph: a spanning tree plus extra edges (loops allowed)."""
    nv = rng.randint(1, max_vertices)
    vertices = [f"v{i}" for i in range(nv)]
    edges = []
    for i in range(1, nv):
        p = rng.randint(0, i - 1)
        edges.append((f"e{len(edges)}", f"v{p}", f"v{i}", round(rng.uniform(0.2, 2.0), 6)))
    extra_budget = max_edges - len(edges)
    n_extra = rng.randint(1 if nv == 1 else 0, extra_budget)
    for _ in range(n_extra):
        u = rng.randrange(nv)
        v = rng.randrange(nv)
        edges.append((f"e{len(edges)}", f"v{u}", f"v{v}", round(rng.uniform(0.2, 2.0), 6)))
    return MetricGraph(vertices, edges)
