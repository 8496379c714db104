"""
Certificate Verification Service
================================
A small Flask app that re-checks certificates sent over HTTP, so scripts
can verify results without the command line.

Endpoints:
- GET  /health                    : Liveness check
- GET  /api/status                : Version and active limits
- POST /api/verify-model          : Fat minor model against a host
- POST /api/check-qi              : Vertex map against domain and codomain
- POST /api/tree-decomp/validate  : Tree decomposition against a graph
- POST /api/spread-paths/verify   : Spread path witness against a query

Graphs travel inline in the graph text format; certificates as the JSON
objects the command line writes.
"""

from __future__ import annotations

import logging

from flask import Flask, jsonify, request
from flask_cors import CORS

from coarsegraph import __version__
from coarsegraph.certificates import (
    decomposition_from_json,
    map_from_json,
    model_from_json,
    parse_graph,
    parse_rational,
    paths_from_json,
    query_from_json,
)
from coarsegraph.config import Settings, get_settings
from coarsegraph.errors import CoarseGraphError
from coarsegraph.fatminor import verify_model
from coarsegraph.menger import verify_spread_paths
from coarsegraph.quasiiso import check_quasi_isometry
from coarsegraph.treedecomp import validate, width

logger = logging.getLogger(__name__)


class BadRequest(Exception):
    """The request body is missing a field or is not JSON."""


def _body(*fields: str) -> dict:
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise BadRequest("No JSON object provided")
    for name in fields:
        if name not in data:
            raise BadRequest(f"Missing field '{name}'")
    return data


def _graph(data: dict, name: str):
    if not isinstance(data[name], str):
        raise BadRequest(f"Field '{name}' must hold a graph in text format")
    return parse_graph(data[name], source=name)


def _result(violation, **extra):
    body = {
        "verdict": "ok" if violation is None else "violation",
        "violation": None if violation is None else violation.to_json(),
        "success": True,
    }
    body.update(extra)
    return jsonify(body), 200


def create_app(settings: Settings | None = None) -> Flask:
    """Build the verification app; ``settings`` defaults to the environment."""
    settings = settings or get_settings()

    # ============================================================
    # FLASK APPLICATION SETUP
    # ============================================================

    app = Flask(__name__)
    app.config["MAX_CONTENT_LENGTH"] = settings.max_content_length
    CORS(app)

    # ============================================================
    # ROUTES: HEALTH
    # ============================================================

    @app.route("/health")
    def health():
        return jsonify({"status": "healthy", "service": "coarsegraph"}), 200

    @app.route("/api/status")
    def api_status():
        """Version and the limits this instance runs with."""
        return jsonify({
            "status": "healthy",
            "version": __version__,
            "limits": {
                "max_vertices": settings.max_vertices,
                "all_pairs_cap": settings.all_pairs_cap,
                "max_content_length": settings.max_content_length,
            },
        }), 200

    # ============================================================
    # ROUTES: VERIFIERS
    # ============================================================

    @app.route("/api/verify-model", methods=["POST"])
    def api_verify_model():
        """
        Verify a fat minor model.

        Request JSON:
        {
            "host": "4 4 0\\n0 1\\n...",
            "certificate": {"pattern": ..., "fatness": "3/1", "branch": ..., "connector": ...},
            "k": "2/1"                      (optional, defaults to the certificate's fatness)
        }
        """
        data = _body("host", "certificate")
        host = _graph(data, "host")
        pattern, model = model_from_json(data["certificate"], source="certificate")
        k = parse_rational(data["k"], "k") if data.get("k") is not None else None
        return _result(verify_model(host, pattern, model, k, threads=settings.threads))

    @app.route("/api/check-qi", methods=["POST"])
    def api_check_qi():
        """Request JSON: {"domain": graph text, "codomain": graph text, "certificate": {"q": ..., "map": [...]}}"""
        data = _body("domain", "codomain", "certificate")
        domain = _graph(data, "domain")
        codomain = _graph(data, "codomain")
        vertex_map = map_from_json(data["certificate"], domain, codomain, source="certificate")
        return _result(check_quasi_isometry(vertex_map, threads=settings.threads))

    @app.route("/api/tree-decomp/validate", methods=["POST"])
    def api_validate_decomposition():
        """Request JSON: {"graph": graph text, "certificate": {"tree_edges": ..., "bags": ...}}"""
        data = _body("graph", "certificate")
        g = _graph(data, "graph")
        td = decomposition_from_json(data["certificate"], source="certificate")
        return _result(validate(g, td), width=width(td))

    @app.route("/api/spread-paths/verify", methods=["POST"])
    def api_verify_spread_paths():
        """
        Request JSON:
        {
            "graph": graph text,
            "query": {"sources": [...], "targets": [...], "k": 3, "dist": "3/1"},
            "certificate": {"paths": [[...]], "min_pairwise_distance": 4}
        }
        """
        data = _body("graph", "query", "certificate")
        g = _graph(data, "graph")
        query = query_from_json(data["query"], source="query")
        witness = paths_from_json(data["certificate"], source="certificate")
        return _result(verify_spread_paths(g, query, witness))

    # ============================================================
    # ERROR HANDLERS
    # ============================================================

    @app.errorhandler(BadRequest)
    def bad_request(error):
        return jsonify({"error": str(error), "success": False}), 400

    @app.errorhandler(CoarseGraphError)
    def invalid_input(error):
        return jsonify({"error": str(error), "kind": type(error).__name__, "success": False}), 400

    @app.errorhandler(404)
    def not_found(error):
        return jsonify({"error": "Endpoint not found", "success": False}), 404

    @app.errorhandler(405)
    def method_not_allowed(error):
        return jsonify({"error": "Method not allowed", "success": False}), 405

    @app.errorhandler(413)
    def too_large(error):
        return jsonify({"error": "Request body too large", "success": False}), 413

    @app.errorhandler(500)
    def internal_error(error):
        logger.error("Unhandled error on %s", request.path, exc_info=getattr(error, "original_exception", None) or True)
        return jsonify({"error": "Internal server error", "success": False}), 500

    return app
