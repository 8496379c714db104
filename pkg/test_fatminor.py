"""Tests for fat minor models: verification, search, oracle, merging and inflation."""

from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import connected_sets, graphs, weighted_graphs
from coarsegraph.corpus import connected_corpus
from coarsegraph.errors import GraphError, ModelError, ResourceLimitError
from coarsegraph.fatminor import (
    MinorModel,
    PartRef,
    ViolationKind,
    collapse_model,
    exhaustive_oracle,
    find_fat_minor,
    inflate_model,
    merge_close_sets,
    model_fatness,
    separation_profile,
    verify_model,
)
from coarsegraph.graph import (
    INFINITY,
    Graph,
    complete_graph,
    cycle_graph,
    empty_graph,
    is_connected_set,
    neighborhood,
    path_graph,
    pattern_by_name,
    power_graph,
    scale_weights,
    set_distance,
)
from coarsegraph.search import SearchBudget, VerdictKind

K3 = complete_graph(3)


def c6_model(fatness=1):
    return MinorModel(
        {0: {0, 1}, 1: {2, 3}, 2: {4, 5}},
        {(0, 1): {1, 2}, (1, 2): {3, 4}, (0, 2): {5, 0}},
        fatness,
    )


# ============================================================
# VERIFICATION
# ============================================================

def test_c18_model_is_three_fat(c18, c18_model_parts):
    branch, connector = c18_model_parts
    model = MinorModel(branch, connector, 3)
    assert verify_model(c18, K3, model) is None
    assert model_fatness(c18, K3, model) == 3


def test_c18_model_fails_at_four(c18, c18_model_parts):
    model = MinorModel(*c18_model_parts, 3)
    violation = verify_model(c18, K3, model, 4)
    assert violation.kind is ViolationKind.SEPARATION_TOO_SMALL
    assert violation.parts == (PartRef("branch", 0), PartRef("branch", 1))
    assert violation.distance == 3
    assert violation.required == 4
    assert "B[0]" in violation.describe()


def test_disconnected_branch_reported(c18, c18_model_parts):
    branch, connector = c18_model_parts
    branch = dict(branch)
    branch[0] = {0, 2}
    violation = verify_model(c18, K3, MinorModel(branch, connector, 3))
    assert violation.kind is ViolationKind.DISCONNECTED_PART
    assert violation.parts == (PartRef("branch", 0),)


def test_missing_incidence_reported(c18, c18_model_parts):
    branch, connector = c18_model_parts
    connector = dict(connector)
    connector[(0, 1)] = {4, 5}
    violation = verify_model(c18, K3, MinorModel(branch, connector, 3))
    assert violation.kind is ViolationKind.MISSING_INCIDENCE
    assert violation.parts == (PartRef("connector", (0, 1)), PartRef("branch", 0))


def test_empty_part_reported(c18, c18_model_parts):
    branch, connector = c18_model_parts
    connector = dict(connector)
    connector[(1, 2)] = set()
    violation = verify_model(c18, K3, MinorModel(branch, connector, 3))
    assert violation.kind is ViolationKind.MISSING_PART
    assert violation.to_json()["parts"] == [{"kind": "connector", "index": [1, 2]}]


def test_mismatched_indices_raise(c18, c18_model_parts):
    branch, connector = c18_model_parts
    with pytest.raises(ModelError):
        verify_model(c18, path_graph(3), MinorModel(branch, connector, 3))
    with pytest.raises(ModelError):
        verify_model(path_graph(3), K3, MinorModel(branch, connector, 3))


def test_negative_fatness_rejected():
    with pytest.raises(ModelError):
        c6_model(-1)


def test_threads_do_not_change_the_answer(c18, c18_model_parts):
    model = MinorModel(*c18_model_parts, 3)
    assert verify_model(c18, K3, model, 4, threads=4) == verify_model(c18, K3, model, 4, threads=1)


def test_separation_profile_skips_incident_pairs():
    g = cycle_graph(6)
    pairs = separation_profile(g, K3, c6_model())
    # 6 parts, 15 pairs, 6 branch/connector incidences excused
    assert len(pairs) == 9
    assert min(p.distance for p in pairs) == 1
    assert all(p.distance <= 1 for p in separation_profile(g, K3, c6_model(), cutoff=1))


def test_profile_reports_infinite_distances():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    model = MinorModel({0: {0}, 1: {3}}, {}, 0)
    pairs = separation_profile(g, Graph(2, ()), model)
    assert pairs[0].distance == INFINITY
    assert model_fatness(g, Graph(2, ()), model) == INFINITY


def test_weighted_host_uses_lengths():
    g = scale_weights(cycle_graph(6), Fraction(5, 2))
    assert verify_model(g, K3, c6_model(), Fraction(5, 2)) is None
    assert verify_model(g, K3, c6_model(), 3) is not None


@settings(max_examples=60, deadline=None)
@given(
    weighted_graphs(min_vertices=5, max_vertices=9),
    st.sampled_from(["p3", "k3"]),
    st.fractions(min_value=Fraction(1, 4), max_value=5, max_denominator=5),
)
def test_scaling_lengths_scales_fatness(g, pattern, factor):
    h = pattern_by_name(pattern)
    skeleton = Graph.from_edges(g.vertex_count, g.edges)
    verdict = find_fat_minor(skeleton, h, 1)
    assume(verdict.is_found)
    model = verdict.witness
    fatness = model_fatness(g, h, model)
    assert fatness > 0
    assert verify_model(g, h, model, fatness) is None
    scaled = scale_weights(g, factor)
    assert model_fatness(scaled, h, model) == fatness * factor
    assert verify_model(scaled, h, model, fatness * factor) is None
    assert verify_model(scaled, h, model, fatness * factor + Fraction(1, 100)) is not None


def test_collapse_model_is_zero_fat():
    g = path_graph(2)
    model = collapse_model(g, complete_graph(4))
    assert verify_model(g, complete_graph(4), model) is None
    with pytest.raises(ModelError):
        collapse_model(empty_graph(0), K3)


# ============================================================
# SEARCH
# ============================================================

@pytest.mark.parametrize("k,n,expected", [
    (1, 6, VerdictKind.FOUND),
    (1, 5, VerdictKind.NONE_EXHAUSTIVE),
    (2, 12, VerdictKind.FOUND),
    (2, 11, VerdictKind.NONE_EXHAUSTIVE),
    (3, 18, VerdictKind.FOUND),
])
def test_cycles_hold_fat_triangles_from_six_k(k, n, expected):
    verdict = find_fat_minor(cycle_graph(n), K3, k, 2_000_000)
    assert verdict.kind is expected
    if verdict.is_found:
        assert verify_model(cycle_graph(n), K3, verdict.witness, k) is None


@pytest.mark.slow
def test_c17_has_no_three_fat_triangle():
    verdict = find_fat_minor(cycle_graph(17), K3, 3, 20_000_000)
    assert verdict.kind is VerdictKind.NONE_EXHAUSTIVE


def test_fatness_zero_collapses():
    verdict = find_fat_minor(path_graph(1), complete_graph(5), 0)
    assert verdict.is_found
    assert find_fat_minor(empty_graph(0), K3, 0).kind is VerdictKind.NONE_EXHAUSTIVE


def test_tiny_budget_is_inconclusive():
    verdict = find_fat_minor(cycle_graph(12), K3, 2, SearchBudget(5))
    assert verdict.kind is VerdictKind.INCONCLUSIVE
    assert verdict.exit_code == 2


def test_weighted_host_never_claims_exhaustion():
    g = scale_weights(cycle_graph(5), 1)
    assert find_fat_minor(g, K3, 1).kind is VerdictKind.INCONCLUSIVE


def test_pattern_must_be_non_empty():
    with pytest.raises(ModelError):
        find_fat_minor(cycle_graph(6), empty_graph(0), 1)


def test_path_pattern_in_path_host():
    verdict = find_fat_minor(path_graph(9), path_graph(3), 2)
    assert verdict.is_found
    assert find_fat_minor(path_graph(4), path_graph(3), 2).kind is VerdictKind.NONE_EXHAUSTIVE


# ============================================================
# ORACLE
# ============================================================

@pytest.mark.parametrize("n", range(5, 11))
def test_oracle_on_cycles(n):
    verdict = exhaustive_oracle(cycle_graph(n), K3, 1)
    assert verdict.is_found == (n >= 6)
    if verdict.is_found:
        assert verify_model(cycle_graph(n), K3, verdict.witness) is None


def test_oracle_two_fat_triangle_needs_twelve():
    assert exhaustive_oracle(cycle_graph(8), K3, 2).kind is VerdictKind.NONE_EXHAUSTIVE


@pytest.mark.slow
def test_oracle_c10_two_fat():
    assert exhaustive_oracle(cycle_graph(10), K3, 2).kind is VerdictKind.NONE_EXHAUSTIVE


def test_oracle_cap():
    with pytest.raises(ResourceLimitError):
        exhaustive_oracle(cycle_graph(11), K3, 1)
    assert exhaustive_oracle(cycle_graph(11), K3, 1, cap=11).is_found


def _agree(pattern, k, max_vertices, min_vertices=1):
    h = pattern_by_name(pattern)
    for name, g in connected_corpus(max_vertices, min_vertices):
        search = find_fat_minor(g, h, k)
        oracle = exhaustive_oracle(g, h, k)
        assert search.kind is not VerdictKind.INCONCLUSIVE, name
        assert search.is_found == oracle.is_found, name
        if oracle.is_found:
            assert verify_model(g, h, oracle.witness, k) is None, name


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("pattern", ["k3", "p3"])
def test_search_agrees_with_oracle(pattern, k):
    _agree(pattern, k, 6)


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 2, 3])
def test_search_agrees_with_oracle_on_four_cycles(k):
    _agree("c4", k, 6)


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("pattern", ["k3", "p3", "c4"])
def test_search_agrees_with_oracle_up_to_eight_vertices(pattern, k):
    _agree(pattern, k, 8, 7)


# ============================================================
# MERGING
# ============================================================

def test_merge_close_sets_on_a_path():
    g = path_graph(10)
    result = merge_close_sets(g, [{0}, {2}, {9}], 3)
    assert len(result.sets) == 2
    assert result.index_map == (0, 0, 1)
    assert result.sets[0] == frozenset({0, 1, 2, 3})
    assert result.radius_used == 3
    assert set_distance(g, result.sets[0], result.sets[1]) >= 3


def test_merge_keeps_far_sets_untouched():
    result = merge_close_sets(path_graph(10), [{0}, {5}], 2)
    assert result.sets == [frozenset({0}), frozenset({5})]
    assert result.radius_used == 0


@settings(max_examples=150, deadline=None)
@given(graphs(max_vertices=50, connected=True), st.integers(1, 4), st.data())
def test_merged_sets_are_far_apart_and_nearby(g, eps, data):
    xs = data.draw(connected_sets(g, max_sets=6))
    result = merge_close_sets(g, xs, eps)
    for a, b in combinations(result.sets, 2):
        assert set_distance(g, a, b) >= eps
    assert all(is_connected_set(g, part) for part in result.sets)
    before = frozenset().union(*xs)
    after = frozenset().union(*result.sets)
    radius = (len(xs) - len(result.sets)) * eps
    assert result.radius_used == radius
    assert before <= after <= neighborhood(g, before, radius)
    for i, x in enumerate(xs):
        assert x <= result.sets[result.index_map[i]]


def test_merge_rejects_bad_input(p5):
    with pytest.raises(GraphError):
        merge_close_sets(p5, [{0, 2}], 1)
    with pytest.raises(GraphError):
        merge_close_sets(p5, [{0}], 0)
    with pytest.raises(GraphError):
        merge_close_sets(p5, [], 1)


# ============================================================
# INFLATION
# ============================================================

def _arc(start, stop, n):
    return {v % n for v in range(start, stop + 1)}


@pytest.mark.parametrize("k", [2, 3])
def test_inflate_three_fat_power_model(k):
    _check_inflation(cycle_graph(18 * k), 18 * k, k)


@st.composite
def decorated_cycles(draw, k):
    """A cycle of length at least 18k with pendant trees hung off it."""
    n = 18 * k + draw(st.integers(0, 5))
    edges = list(cycle_graph(n).edges)
    total = n + draw(st.integers(0, 8))
    for leaf in range(n, total):
        edges.append((draw(st.integers(0, leaf - 1)), leaf))
    return Graph.from_edges(total, sorted(edges)), n


def _check_inflation(g, n, k):
    step, half = 6 * k, 3 * k
    m3 = MinorModel(
        {i: _arc(step * i, step * i + half, n) for i in range(3)},
        {
            (0, 1): _arc(half, step, n),
            (1, 2): _arc(step + half, 2 * step, n),
            (0, 2): _arc(2 * step + half, n, n),
        },
        3,
    )
    power = power_graph(g, k)
    assert verify_model(power, K3, m3) is None
    inflated = inflate_model(g, k, m3, K3)
    assert inflated.fatness == k
    assert verify_model(g, K3, inflated, k) is None

    verdict = find_fat_minor(power, K3, 3, 20_000)
    assert verdict.kind is not VerdictKind.NONE_EXHAUSTIVE
    if verdict.is_found:
        assert verify_model(g, K3, inflate_model(g, k, verdict.witness, K3), k) is None


@settings(max_examples=8, deadline=None)
@given(st.data())
def test_inflation_on_decorated_cycles(data):
    g, n = data.draw(decorated_cycles(3))
    _check_inflation(g, n, 3)


@pytest.mark.slow
@pytest.mark.parametrize("k", [4, 5])
@settings(max_examples=5, deadline=None)
@given(data=st.data())
def test_inflation_on_larger_decorated_cycles(k, data):
    g, n = data.draw(decorated_cycles(k))
    _check_inflation(g, n, k)


def test_search_threads_do_not_change_the_model():
    g = cycle_graph(12)
    assert find_fat_minor(g, K3, 2, threads=4) == find_fat_minor(g, K3, 2, threads=1)


def test_inflate_searched_power_model():
    g = cycle_graph(12)
    verdict = find_fat_minor(power_graph(g, 2), K3, 3, 2_000_000)
    if verdict.is_found:
        assert verify_model(g, K3, inflate_model(g, 2, verdict.witness, K3), 2) is None
    else:
        assert verdict.kind is VerdictKind.NONE_EXHAUSTIVE


def test_inflate_rejects_non_model(c18, c18_model_parts):
    model = MinorModel(*c18_model_parts, 3)
    with pytest.raises(ModelError):
        inflate_model(c18, 2, model)
    with pytest.raises(ModelError):
        inflate_model(c18, 0, model)
