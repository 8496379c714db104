"""Tests for the file formats, certificates and bundles."""

from fractions import Fraction

import pytest

from coarsegraph.certificates import (
    VERDICT_OK,
    bundle_from_json,
    decomposition_from_json,
    decomposition_to_json,
    distance_to_json,
    dump_json,
    format_graph,
    format_rational,
    graph_from_inline,
    label_set,
    make_bundle,
    map_from_json,
    map_to_json,
    model_from_json,
    model_to_json,
    parse_graph,
    parse_json,
    parse_labels,
    parse_rational,
    paths_from_json,
    query_from_json,
    query_to_json,
    read_graph,
    read_text,
    recheck_bundle,
    write_graph,
)
from coarsegraph.errors import FormatError
from coarsegraph.fatminor import MinorModel
from coarsegraph.graph import INFINITY, Graph, complete_graph, cycle_graph, path_graph
from coarsegraph.menger import SpreadPathQuery, SpreadPathWitness
from coarsegraph.quasiiso import VertexMap, identity_into_power
from coarsegraph.treedecomp import decompose_tree_leaf_path

K3 = complete_graph(3)


# ============================================================
# GRAPH TEXT
# ============================================================

def test_parse_plain_graph_with_comments():
    text = "# a path\n3 2 0\n\n0 1\n# middle\n1 2\n"
    assert parse_graph(text) == path_graph(3)


def test_parse_weighted_graph():
    g = parse_graph("3 2 1\n0 1 3/2\n1 2 4\n")
    assert g.weights == (Fraction(3, 2), Fraction(4))
    assert format_graph(g) == "3 2 1\n0 1 3/2\n1 2 4/1\n"


def test_format_is_canonical():
    text = "4 3 0\n0 1\n0 3\n1 2\n"
    assert format_graph(parse_graph(text)) == text


@pytest.mark.parametrize("text,line", [
    ("3 2\n0 1\n", 1),
    ("3 2 2\n0 1\n", 1),
    ("3 2 0\n0 1 5\n1 2\n", 2),
    ("3 2 0\n0 1\n1 3\n", 3),
    ("3 2 0\n1 0\n", 2),
    ("3 2 0\n1 2\n0 1\n", 3),
    ("3 2 0\n0 1\n0 1\n", 3),
    ("3 1 0\n0 1\n1 2\n", 3),
    ("3 1 0\n0 x\n", 2),
    ("2 1 1\n0 1 0\n", 2),
    ("2 1 1\n0 1 1.5\n", 2),
])
def test_malformed_lines_are_located(text, line):
    with pytest.raises(FormatError) as info:
        parse_graph(text, source="g.txt")
    assert info.value.line == line
    assert info.value.source == "g.txt"
    assert str(info.value).startswith(f"g.txt:{line}:")


def test_count_mismatch_and_missing_header():
    with pytest.raises(FormatError, match="announces 3 edges"):
        parse_graph("3 3 0\n0 1\n")
    with pytest.raises(FormatError, match="header"):
        parse_graph("# nothing here\n")


def test_graph_files(tmp_path):
    path = tmp_path / "c5.txt"
    write_graph(cycle_graph(5), path)
    assert read_graph(path) == cycle_graph(5)
    with pytest.raises(FormatError):
        read_text(tmp_path / "missing.txt")


def test_binary_graph_file_is_a_format_error(tmp_path):
    path = tmp_path / "c5.bin"
    path.write_bytes(b"5 5 0\n\xc3\x28\n")
    with pytest.raises(FormatError, match="not UTF-8 text") as info:
        read_graph(path)
    assert info.value.source == str(path)


def test_inline_graphs_are_validated():
    assert graph_from_inline({"n": 3, "edges": [[0, 1]]}).edge_count == 1
    with pytest.raises(FormatError):
        graph_from_inline({"n": 2, "edges": [[0, 0]]})
    with pytest.raises(FormatError):
        graph_from_inline({"n": -1, "edges": []})


# ============================================================
# SCALARS AND LABELS
# ============================================================

@pytest.mark.parametrize("text,value", [("3/4", Fraction(3, 4)), ("5", 5), ("0", 0), ("0/1", 0), (7, 7)])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["-1", "1/0", "1.5", "01", "", True, 2.0])
def test_parse_rational_rejects(text):
    with pytest.raises(FormatError):
        parse_rational(text)


def test_format_rational_always_has_a_denominator():
    assert format_rational(2) == "2/1"
    assert format_rational(Fraction(6, 4)) == "3/2"


def test_json_errors_carry_the_line():
    with pytest.raises(FormatError) as info:
        parse_json('{\n  "a": 1,\n  oops\n}', source="x.json")
    assert info.value.line == 3


def test_dump_json_is_stable():
    assert dump_json({"b": 1, "a": [1, 2]}) == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'


def test_labels_widen_single_ids():
    labels = parse_labels({"S": [0, 1], "root": 3})
    assert labels == {"S": [0, 1], "root": [3]}
    assert label_set(labels, "root") == frozenset({3})
    with pytest.raises(FormatError):
        label_set(labels, "T")
    with pytest.raises(FormatError):
        parse_labels({"S": "zero"})
    with pytest.raises(FormatError):
        parse_labels([0, 1])


@pytest.mark.parametrize("d,expected", [
    (None, None), (INFINITY, "inf"), (3, 3), (Fraction(3, 2), "3/2"), (Fraction(4, 2), 2),
])
def test_distance_to_json(d, expected):
    assert distance_to_json(d) == expected


# ============================================================
# CERTIFICATES
# ============================================================

def test_model_certificate_layout(c18_model_parts):
    model = MinorModel(*c18_model_parts, 3)
    obj = model_to_json(K3, model)
    assert obj["fatness"] == "3/1"
    assert obj["branch"]["0"] == [0, 1, 2, 3]
    assert obj["connector"]["0-2"] == [0, 15, 16, 17]
    pattern, parsed = model_from_json(obj)
    assert pattern == K3 and parsed == model


@pytest.mark.parametrize("mutate", [
    lambda obj: obj.pop("fatness"),
    lambda obj: obj.update(fatness="-3"),
    lambda obj: obj["connector"].update({"0_1": [1]}),
    lambda obj: obj["branch"].update({"x": [1]}),
    lambda obj: obj["branch"].update({"0": [1.5]}),
])
def test_bad_model_certificates(c18_model_parts, mutate):
    obj = model_to_json(K3, MinorModel(*c18_model_parts, 3))
    mutate(obj)
    with pytest.raises(FormatError):
        model_from_json(obj)


def test_map_certificate():
    m = identity_into_power(path_graph(4), 2)
    obj = map_to_json(m)
    assert obj == {"q": "2/1", "map": [0, 1, 2, 3]}
    assert map_from_json(obj, m.domain, m.codomain) == m
    with pytest.raises(FormatError):
        map_from_json({"q": "1/2", "map": [0, 1, 2, 3]}, m.domain, m.codomain)
    with pytest.raises(FormatError):
        map_from_json({"q": "1", "map": [0, 1]}, m.domain, m.codomain)


def test_decomposition_certificate():
    td = decompose_tree_leaf_path(2)
    assert decomposition_from_json(decomposition_to_json(td)) == td
    with pytest.raises(FormatError):
        decomposition_from_json({"tree_edges": [[0, 1], [1, 2], [0, 2]], "bags": [[0], [1], [2]]})
    with pytest.raises(FormatError):
        decomposition_from_json({"tree_edges": [[0, 1, 2]], "bags": [[0], [1]]})


def test_path_certificates():
    witness = paths_from_json({"paths": [[0, 1], [5, 6]], "min_pairwise_distance": "inf"})
    assert witness == SpreadPathWitness(((0, 1), (5, 6)), INFINITY)
    assert paths_from_json({"paths": [[0]], "min_pairwise_distance": None}).min_pairwise_distance is None
    with pytest.raises(FormatError):
        paths_from_json({"paths": [[0]], "min_pairwise_distance": 1.5})


def test_query_certificate():
    query = SpreadPathQuery({0, 2}, {5}, 2, Fraction(3, 2))
    obj = query_to_json(query)
    assert obj == {"sources": [0, 2], "targets": [5], "k": 2, "dist": "3/2"}
    assert query_from_json(obj) == query
    with pytest.raises(FormatError):
        query_from_json(dict(obj, k=0))
    with pytest.raises(FormatError):
        query_from_json(dict(obj, sources=[]))


# ============================================================
# BUNDLES
# ============================================================

@pytest.fixture
def c18_file(tmp_path, c18):
    path = tmp_path / "c18.txt"
    write_graph(c18, path)
    return path


def test_model_bundle_round_trip(c18_file, c18_model_parts):
    payload = model_to_json(K3, MinorModel(*c18_model_parts, 3))
    bundle = make_bundle("model", payload, {"host": c18_file})
    assert bundle.verdict == VERDICT_OK
    document = bundle.to_json()
    assert set(document) == {"kind", "tool_version", "inputs", "payload", "parameters", "verdict"}
    assert "time" not in dump_json(document)
    assert recheck_bundle(bundle_from_json(document)) == VERDICT_OK
    again = make_bundle("model", payload, {"host": c18_file})
    assert dump_json(again.to_json()) == dump_json(document)


def test_bundle_records_a_violation(c18_file, c18_model_parts):
    payload = model_to_json(K3, MinorModel(*c18_model_parts, 4))
    assert make_bundle("model", payload, {"host": c18_file}).verdict == "separation-too-small"


def test_modified_input_is_detected(c18_file, c18_model_parts):
    bundle = make_bundle("model", model_to_json(K3, MinorModel(*c18_model_parts, 3)), {"host": c18_file})
    write_graph(cycle_graph(19), c18_file)
    with pytest.raises(FormatError, match="changed"):
        recheck_bundle(bundle)


def test_qi_bundle(tmp_path):
    domain, codomain = tmp_path / "p5.txt", tmp_path / "pt.txt"
    write_graph(path_graph(5), domain)
    write_graph(path_graph(1), codomain)
    payload = map_to_json(VertexMap(path_graph(5), path_graph(1), (0,) * 5, 1))
    bundle = make_bundle("qi-map", payload, {"domain": domain, "codomain": codomain})
    assert bundle.verdict == "lower-bound"


def test_tree_decomposition_bundle(tmp_path):
    from coarsegraph.constructions import build_tree_leaf_path

    path = tmp_path / "tlp.txt"
    write_graph(build_tree_leaf_path(3).graph, path)
    bundle = make_bundle("tree-decomposition", decomposition_to_json(decompose_tree_leaf_path(3)), {"graph": path})
    assert bundle.verdict == VERDICT_OK


def test_spread_path_bundle(tmp_path):
    path = tmp_path / "c8.txt"
    write_graph(cycle_graph(8), path)
    query = SpreadPathQuery({0}, {4}, 2, 0)
    witness = SpreadPathWitness(((0, 1, 2, 3, 4), (0, 7, 6, 5, 4)), 0)
    bundle = make_bundle("spread-paths", witness.to_json(), {"graph": path}, query_to_json(query))
    assert bundle.verdict == VERDICT_OK
    assert bundle.parameters["dist"] == "0/1"


def test_unknown_bundle_kind(c18_file):
    with pytest.raises(FormatError):
        make_bundle("proof", {}, {"graph": c18_file})
    with pytest.raises(FormatError):
        bundle_from_json({"kind": "proof", "payload": {}, "verdict": "ok", "inputs": {}})
    with pytest.raises(FormatError):
        recheck_bundle(bundle_from_json({"kind": "model", "payload": {}, "verdict": "ok", "inputs": {}}))


def test_empty_graph_text():
    assert parse_graph(format_graph(Graph(0, ()))) == Graph(0, ())
