"""Shared fixtures and hypothesis strategies for the coarsegraph test suite."""

import networkx as nx
import pytest
from hypothesis import strategies as st

from coarsegraph.config import get_settings
from coarsegraph.constructions import GadgetParams, build_n_gadget
from coarsegraph.graph import Graph, cycle_graph, path_graph


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance grids, deselect with -m 'not slow'")


@pytest.fixture(autouse=True)
def fresh_settings():
    """Settings are cached per process; tests that touch the environment must not leak."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def c18():
    return cycle_graph(18)


@pytest.fixture
def c18_model_parts():
    """A 3-fat K_3 in C_18: arcs of four vertices, consecutive arcs sharing an end."""
    branch = {0: {0, 1, 2, 3}, 1: {6, 7, 8, 9}, 2: {12, 13, 14, 15}}
    connector = {(0, 1): {3, 4, 5, 6}, (1, 2): {9, 10, 11, 12}, (0, 2): {15, 16, 17, 0}}
    return branch, connector


@pytest.fixture
def small_gadget():
    return build_n_gadget(GadgetParams(2, 2))


@pytest.fixture
def p5():
    return path_graph(5)


# ============================================================
# HYPOTHESIS STRATEGIES
# ============================================================

@st.composite
def graphs(draw, min_vertices=1, max_vertices=8, connected=False):
    """Random simple graphs; with ``connected`` a random spanning tree is laid first."""
    n = draw(st.integers(min_vertices, max_vertices))
    edges = set()
    if connected:
        for v in range(1, n):
            parent = draw(st.integers(0, v - 1))
            edges.add((parent, v))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if pairs:
        extra = draw(st.lists(st.sampled_from(pairs), max_size=2 * n, unique=True))
        edges.update(extra)
    return Graph.from_edges(n, sorted(edges))


@st.composite
def weighted_graphs(draw, min_vertices=2, max_vertices=8):
    g = draw(graphs(min_vertices, max_vertices, connected=True))
    lengths = draw(st.lists(
        st.fractions(min_value=1, max_value=5, max_denominator=4),
        min_size=g.edge_count, max_size=g.edge_count,
    ))
    return Graph.from_edges(g.vertex_count, g.edges, lengths)


@st.composite
def connected_sets(draw, g, max_sets=5):
    """Connected vertex sets of g: prefixes of breadth-first orders grown from drawn seeds."""
    nxg = g.to_networkx()
    out = []
    for _ in range(draw(st.integers(1, max_sets))):
        seed = draw(st.integers(0, g.vertex_count - 1))
        order = [seed] + [v for _, v in nx.bfs_edges(nxg, seed)]
        out.append(set(order[:draw(st.integers(1, len(order)))]))
    return out
