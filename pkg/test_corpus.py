"""Tests for the graph corpora, the power-graph pipeline report and sweep summaries."""

from itertools import combinations

import networkx as nx
import pandas as pd
import pytest

from coarsegraph.corpus import (
    CORPUS_MAX_VERTICES,
    Agreement,
    PipelineReport,
    connected_corpus,
    connected_of_order,
    power_pipeline,
    random_corpus,
    summarize,
    sweep_power_pipeline,
    sweep_qi,
)
from coarsegraph.errors import ResourceLimitError
from coarsegraph.fatminor import MinorModel
from coarsegraph.graph import complete_graph, cycle_graph
from coarsegraph.search import SearchVerdict, VerdictKind

K3 = complete_graph(3)

# connected graphs on n vertices, up to isomorphism
CONNECTED_COUNTS = {1: 1, 2: 1, 3: 2, 4: 6, 5: 21, 6: 112, 7: 853, 8: 11117}


# ============================================================
# CORPORA
# ============================================================

@pytest.mark.parametrize("n", range(1, 8))
def test_atlas_orders_are_complete(n):
    graphs = connected_of_order(n)
    assert len(graphs) == CONNECTED_COUNTS[n]
    assert all(g.number_of_nodes() == n and nx.is_connected(g) for g in graphs)


def test_growing_past_the_atlas_matches_it(monkeypatch):
    import coarsegraph.corpus as corpus

    monkeypatch.setattr(corpus, "ATLAS_MAX_VERTICES", 4)
    corpus.connected_of_order.cache_clear()
    try:
        grown = corpus.connected_of_order(5)
        assert len(grown) == CONNECTED_COUNTS[5]
        for a, b in combinations(grown, 2):
            assert not nx.is_isomorphic(a, b)
    finally:
        corpus.connected_of_order.cache_clear()


@pytest.mark.slow
def test_every_connected_graph_on_eight_vertices():
    graphs = connected_of_order(8)
    assert len(graphs) == CONNECTED_COUNTS[8]
    assert all(nx.is_connected(g) for g in graphs)


def test_connected_corpus_ranges():
    corpus = connected_corpus(4)
    assert len(corpus) == 1 + 1 + 2 + 6
    assert corpus[0][0] == "conn1-0"
    assert [g.vertex_count for _, g in connected_corpus(4, 4)] == [4] * 6


def test_connected_corpus_refuses_nine_vertices():
    with pytest.raises(ResourceLimitError, match=str(CORPUS_MAX_VERTICES)):
        connected_corpus(CORPUS_MAX_VERTICES + 1)


def test_random_corpus_is_seeded_and_connected():
    first = random_corpus(5, 9, 10, seed=3)
    again = random_corpus(5, 9, 10, seed=3)
    assert [g for _, g in first] == [g for _, g in again]
    assert all(9 <= g.vertex_count <= 10 for _, g in first)
    assert all(nx.is_connected(g.to_networkx()) for _, g in first)


# ============================================================
# PIPELINE AGREEMENT
# ============================================================

def _report(host, power, inflated=None):
    return PipelineReport(K3, 3, host, power, inflated, None)


FOUND = SearchVerdict.found(MinorModel(
    {0: {0, 1}, 1: {2, 3}, 2: {4, 5}},
    {(0, 1): {1, 2}, (1, 2): {3, 4}, (0, 2): {5, 0}},
    1,
))
NONE = SearchVerdict.none_exhaustive()
UNKNOWN = SearchVerdict.inconclusive()


@pytest.mark.parametrize("host,power,expected", [
    (NONE, NONE, Agreement.CONSISTENT),
    (FOUND, NONE, Agreement.CONSISTENT),
    (UNKNOWN, NONE, Agreement.CONSISTENT),
    (NONE, UNKNOWN, Agreement.UNDECIDED),
    (NONE, FOUND, Agreement.INCONSISTENT),
])
def test_pipeline_agreement(host, power, expected):
    inflated = FOUND.witness if power.is_found else None
    report = _report(host, power, inflated)
    assert report.agreement is expected
    assert report.consistent == (expected is Agreement.CONSISTENT)
    assert report.to_json()["agreement"] == expected.value


def test_failed_inflation_is_inconsistent():
    report = _report(FOUND, FOUND, None)
    assert report.inflated_ok is False
    assert report.agreement is Agreement.INCONSISTENT


def test_pipeline_on_a_long_cycle():
    report = power_pipeline(cycle_graph(12), K3, 2, 200_000)
    assert report.host.is_found
    assert report.agreement is not Agreement.INCONSISTENT


def test_summary_counts_undecided_runs():
    table = pd.DataFrame({
        "graph": ["a", "a", "b"],
        "host_verdict": ["none-exhaustive", "found", "none-exhaustive"],
        "power_verdict": ["inconclusive", "none-exhaustive", "none-exhaustive"],
        "agreement": ["undecided", "consistent", "consistent"],
    })
    summary = summarize("theorem13", table)
    assert summary["undecided"] == 1
    assert summary["inconsistent"] == 0
    assert summary["inconclusive"] == 1
    assert summary["graphs"] == 2


def test_pipeline_sweep_columns():
    table = sweep_power_pipeline(connected_corpus(3), ["k3"], [2])
    assert list(table["agreement"].unique()) == ["consistent"]
    assert summarize("theorem13", table)["runs"] == 4


# ============================================================
# FULL SWEEPS
# ============================================================

@pytest.mark.slow
def test_qi_sweep_on_every_graph_up_to_eight_vertices():
    table = sweep_qi(connected_corpus())
    summary = summarize("qi", table)
    assert summary["runs"] == 3 * sum(CONNECTED_COUNTS.values())
    assert summary["failures"] == 0


@pytest.mark.slow
def test_pipeline_sweep_on_eight_vertex_graphs():
    table = sweep_power_pipeline(connected_corpus(8, 8))
    summary = summarize("theorem13", table)
    assert summary["graphs"] == CONNECTED_COUNTS[8]
    assert summary["inconsistent"] == 0
