"""Tests for the certificate verification service."""

import pytest

from coarsegraph import __version__
from coarsegraph.certificates import format_graph, model_to_json
from coarsegraph.config import Settings
from coarsegraph.fatminor import MinorModel
from coarsegraph.graph import complete_graph, cycle_graph, path_graph
from coarsegraph.service import create_app

C18_TEXT = format_graph(cycle_graph(18))


@pytest.fixture
def client():
    app = create_app(Settings(max_content_length=64 * 1024))
    app.config["TESTING"] = True
    with app.test_client() as client:
        yield client


@pytest.fixture
def c18_certificate(c18_model_parts):
    return model_to_json(complete_graph(3), MinorModel(*c18_model_parts, 3))


# ============================================================
# HEALTH
# ============================================================

def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.get_json() == {"status": "healthy", "service": "coarsegraph"}


def test_status_reports_limits(client):
    body = client.get("/api/status").get_json()
    assert body["version"] == __version__
    assert body["limits"]["max_content_length"] == 64 * 1024


# ============================================================
# VERIFIERS
# ============================================================

def test_verify_model_ok(client, c18_certificate):
    response = client.post("/api/verify-model", json={"host": C18_TEXT, "certificate": c18_certificate})
    assert response.status_code == 200
    assert response.get_json() == {"verdict": "ok", "violation": None, "success": True}


def test_verify_model_at_higher_fatness(client, c18_certificate):
    body = client.post(
        "/api/verify-model", json={"host": C18_TEXT, "certificate": c18_certificate, "k": "4/1"}
    ).get_json()
    assert body["verdict"] == "violation"
    assert body["violation"]["kind"] == "separation-too-small"
    assert body["violation"]["distance"] == 3


def test_check_qi(client):
    payload = {
        "domain": format_graph(path_graph(5)),
        "codomain": format_graph(path_graph(1)),
        "certificate": {"q": "1", "map": [0] * 5},
    }
    body = client.post("/api/check-qi", json=payload).get_json()
    assert body["verdict"] == "violation"
    assert body["violation"]["kind"] == "lower-bound"
    payload["certificate"]["q"] = "2"
    assert client.post("/api/check-qi", json=payload).get_json()["verdict"] == "ok"


def test_validate_decomposition(client):
    payload = {
        "graph": format_graph(path_graph(3)),
        "certificate": {"tree_edges": [[0, 1]], "bags": [[0, 1], [1, 2]]},
    }
    body = client.post("/api/tree-decomp/validate", json=payload).get_json()
    assert body["verdict"] == "ok"
    assert body["width"] == 1


def test_verify_spread_paths(client):
    payload = {
        "graph": format_graph(cycle_graph(8)),
        "query": {"sources": [0], "targets": [4], "k": 2, "dist": "1"},
        "certificate": {"paths": [[0, 1, 2, 3, 4], [0, 7, 6, 5, 4]], "min_pairwise_distance": 0},
    }
    body = client.post("/api/spread-paths/verify", json=payload).get_json()
    assert body["verdict"] == "violation"
    assert body["violation"] == {"kind": "too-close", "paths": [0, 1], "distance": 0}


# ============================================================
# ERRORS
# ============================================================

def test_missing_body(client):
    response = client.post("/api/verify-model", data="not json", content_type="text/plain")
    assert response.status_code == 400
    assert response.get_json() == {"error": "No JSON object provided", "success": False}


def test_missing_field(client):
    response = client.post("/api/check-qi", json={"domain": "1 0 0\n"})
    assert response.status_code == 400
    assert "codomain" in response.get_json()["error"]


def test_graph_must_be_text(client, c18_certificate):
    response = client.post("/api/verify-model", json={"host": {"n": 18}, "certificate": c18_certificate})
    assert response.status_code == 400


def test_malformed_graph_is_located(client, c18_certificate):
    response = client.post("/api/verify-model", json={"host": "3 2 0\n0 1\n0 1\n", "certificate": c18_certificate})
    body = response.get_json()
    assert response.status_code == 400
    assert body["kind"] == "FormatError"
    assert body["error"].startswith("host:3:")


def test_mismatched_certificate(client, c18_certificate):
    response = client.post("/api/verify-model", json={"host": format_graph(path_graph(3)), "certificate": c18_certificate})
    assert response.status_code == 400
    assert response.get_json()["kind"] == "ModelError"


def test_unknown_route_and_method(client):
    assert client.get("/api/nothing").status_code == 404
    response = client.get("/api/verify-model")
    assert response.status_code == 405
    assert response.get_json()["success"] is False


def test_body_too_large(client):
    response = client.post("/api/verify-model", data="x" * (65 * 1024), content_type="application/json")
    assert response.status_code == 413
