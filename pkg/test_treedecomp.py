"""Tests for tree decompositions and the treewidth oracles."""

import networkx as nx
import pytest
from hypothesis import given, settings

from conftest import graphs
from coarsegraph.constructions import GadgetParams, build_n_gadget, build_tree_leaf_path
from coarsegraph.errors import DecompositionError, ResourceLimitError
from coarsegraph.graph import complete_graph, cycle_graph, empty_graph, path_graph, star_graph
from coarsegraph.treedecomp import (
    DecompositionViolationKind,
    TreeDecomposition,
    decompose_n_gadget,
    decompose_tree_leaf_path,
    decomposition_from_order,
    exact_treewidth,
    optimal_elimination_order,
    treewidth_by_orderings,
    validate,
    width,
)

P3 = path_graph(3)


# ============================================================
# VALIDATION
# ============================================================

def test_valid_path_decomposition():
    td = TreeDecomposition.from_parts([(0, 1)], [(0, 1), (1, 2)])
    assert validate(P3, td) is None
    assert width(td) == 1


def test_bag_out_of_range():
    td = TreeDecomposition.from_parts([], [(0, 1, 2, 5)])
    violation = validate(P3, td)
    assert violation.kind is DecompositionViolationKind.BAG_OUT_OF_RANGE
    assert violation.vertices == (5,) and violation.nodes == (0,)


def test_missing_vertex():
    violation = validate(P3, TreeDecomposition.from_parts([], [(0, 1)]))
    assert violation.kind is DecompositionViolationKind.VERTEX_MISSING
    assert violation.vertices == (2,)


def test_disconnected_occurrences():
    td = TreeDecomposition.from_parts([(0, 1), (1, 2)], [(0, 1), (1, 2), (0,)])
    violation = validate(P3, td)
    assert violation.kind is DecompositionViolationKind.VERTEX_DISCONNECTED
    assert violation.vertices == (0,)
    assert violation.nodes == (0, 2)
    assert "disconnected" in violation.describe()


def test_uncovered_edge():
    td = TreeDecomposition.from_parts([(0, 1), (1, 2)], [(0,), (1,), (2,)])
    violation = validate(P3, td)
    assert violation.kind is DecompositionViolationKind.EDGE_UNCOVERED
    assert violation.to_json() == {"kind": "edge-uncovered", "vertices": [0, 1], "nodes": []}


def test_index_structure_must_be_a_tree():
    with pytest.raises(DecompositionError):
        TreeDecomposition.from_parts([(0, 1), (1, 2), (0, 2)], [(0,), (1,), (2,)])
    with pytest.raises(DecompositionError):
        TreeDecomposition.from_parts([(0, 1)], [(0,), (1,), (2,)])
    with pytest.raises(DecompositionError):
        TreeDecomposition.from_parts([], [])


# ============================================================
# EXPLICIT DECOMPOSITIONS
# ============================================================

@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_tree_leaf_path_has_width_at_most_three(d):
    td = decompose_tree_leaf_path(d)
    assert validate(build_tree_leaf_path(d).graph, td) is None
    assert width(td) <= 3


def test_tree_leaf_path_decomposition_is_near_optimal():
    g = build_tree_leaf_path(2).graph
    assert 2 <= exact_treewidth(g) <= width(decompose_tree_leaf_path(2))


def test_tree_leaf_path_depth_checked():
    with pytest.raises(DecompositionError):
        decompose_tree_leaf_path(0)


@pytest.mark.parametrize("d,s", [(1, 1), (1, 3), (2, 1), (2, 2), (3, 3), (4, 2)])
def test_gadget_has_width_at_most_seven(d, s):
    ng = build_n_gadget(GadgetParams(d, s))
    td = decompose_n_gadget(ng)
    assert validate(ng.graph, td) is None
    assert width(td) <= 7


def test_gadget_fixture_decomposition(small_gadget):
    td = decompose_n_gadget(small_gadget)
    assert validate(small_gadget.graph, td) is None


# ============================================================
# TREEWIDTH ORACLES
# ============================================================

@pytest.mark.parametrize("g,expected", [
    (empty_graph(0), -1),
    (empty_graph(3), 0),
    (path_graph(6), 1),
    (star_graph(5), 1),
    (cycle_graph(6), 2),
    (complete_graph(5), 4),
])
def test_exact_treewidth_of_named_graphs(g, expected):
    assert exact_treewidth(g) == expected


def test_exact_treewidth_cap():
    with pytest.raises(ResourceLimitError):
        exact_treewidth(path_graph(13))
    assert exact_treewidth(path_graph(13), cap=13) == 1
    with pytest.raises(ResourceLimitError):
        treewidth_by_orderings(path_graph(9))


@settings(max_examples=40, deadline=None)
@given(graphs(max_vertices=6))
def test_dynamic_programme_matches_orderings(g):
    assert exact_treewidth(g) == treewidth_by_orderings(g)


@settings(max_examples=40, deadline=None)
@given(graphs(max_vertices=9))
def test_optimal_order_yields_an_optimal_decomposition(g):
    tw, order = optimal_elimination_order(g)
    td = decomposition_from_order(g, order)
    assert validate(g, td) is None
    assert width(td) == tw
    if g.edge_count:
        heuristic, _ = nx.algorithms.approximation.treewidth_min_degree(g.to_networkx())
        assert tw <= heuristic


def test_decomposition_from_order_rejects_bad_orders():
    with pytest.raises(DecompositionError):
        decomposition_from_order(P3, [0, 1])
    with pytest.raises(DecompositionError):
        decomposition_from_order(P3, [0, 1, 1])
