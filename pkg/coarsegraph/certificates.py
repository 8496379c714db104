"""
Certificates and File Formats
=============================
Readers and writers for every on-disk format of the toolkit:

- graph text: ``n m w`` header, then one ``u v`` or ``u v num/den`` line per
  edge, ``0 <= u < v < n``, sorted; ``#`` starts a comment line
- label tables: JSON objects mapping names to a vertex id or an id array
- model, vertex-map, tree-decomposition and spread-path certificates (JSON)
- certificate bundles: a certificate together with the hashes of its
  inputs and the verdict it earned, re-checkable bit for bit

All JSON is written with sorted keys so identical inputs give identical bytes.
Parse failures raise ``FormatError`` with the offending line where one exists.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from coarsegraph import __version__
from coarsegraph.errors import CoarseGraphError, FormatError
from coarsegraph.fatminor import MinorModel, verify_model
from coarsegraph.graph import INFINITY, Graph
from coarsegraph.menger import SpreadPathQuery, SpreadPathWitness, verify_spread_paths
from coarsegraph.quasiiso import VertexMap, check_quasi_isometry
from coarsegraph.treedecomp import TreeDecomposition, validate

logger = logging.getLogger(__name__)

_INT = re.compile(r"^(0|[1-9][0-9]*)$")
_RATIONAL = re.compile(r"^(0|[1-9][0-9]*)(?:/([1-9][0-9]*))?$")

BUNDLE_KINDS = ("model", "qi-map", "tree-decomposition", "spread-paths", "witness-2fat")
VERDICT_OK = "ok"


# ============================================================
# SMALL HELPERS
# ============================================================

def format_rational(value) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str, what: str = "value", line: int | None = None, source: str | None = None) -> Fraction:
    """Parse ``num/den`` (or a bare integer) into a Fraction; zero is allowed."""
    if not isinstance(text, str):
        if isinstance(text, int) and not isinstance(text, bool):
            return Fraction(text)
        raise FormatError(f"{what} must be a 'num/den' string, got {text!r}", line, source)
    match = _RATIONAL.match(text.strip())
    if match is None:
        raise FormatError(f"{what} must be a non-negative 'num/den', got {text!r}", line, source)
    num, den = match.group(1), match.group(2) or "1"
    return Fraction(int(num), int(den))


def dump_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def parse_json(text: str, source: str | None = None) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e.msg}", e.lineno, source) from None


def read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"cannot read file: {e.strerror}", source=str(path)) from None
    except UnicodeDecodeError as e:
        raise FormatError(f"not UTF-8 text (byte {e.start})", source=str(path)) from None


def write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise FormatError(f"cannot write file: {e.strerror}", source=str(path)) from None


def read_json(path: str | Path) -> Any:
    return parse_json(read_text(path), str(path))


def file_sha256(path: str | Path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as e:
        raise FormatError(f"cannot read file: {e.strerror}", source=str(path)) from None


def _int_list(value, what: str, source: str | None) -> list[int]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise FormatError(f"{what} must be a list of vertex ids", source=source)
    return value


def _require(obj: Any, keys: tuple[str, ...], what: str, source: str | None) -> None:
    if not isinstance(obj, dict):
        raise FormatError(f"{what} must be a JSON object", source=source)
    for key in keys:
        if key not in obj:
            raise FormatError(f"{what} lacks the '{key}' field", source=source)


# ============================================================
# GRAPH TEXT FORMAT
# ============================================================

def parse_graph(text: str, source: str | None = None) -> Graph:
    """
    Parse the graph text format.

    Raises:
        FormatError: naming the line of the first malformed, out-of-range,
            unsorted or duplicate entry, or a header/edge count mismatch
    """
    header = None
    edges: list[tuple[int, int]] = []
    weights: list[Fraction] = []
    previous = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 3 or not all(_INT.match(f) for f in fields) or fields[2] not in ("0", "1"):
                raise FormatError("header must be 'n m w' with w in {0, 1}", lineno, source)
            header = (int(fields[0]), int(fields[1]), fields[2] == "1")
            continue
        n, m, weighted = header
        expected = 3 if weighted else 2
        if len(fields) != expected:
            shape = "'u v num/den'" if weighted else "'u v'"
            raise FormatError(f"edge line must be {shape}", lineno, source)
        if not (_INT.match(fields[0]) and _INT.match(fields[1])):
            raise FormatError("edge ends must be non-negative integers", lineno, source)
        u, v = int(fields[0]), int(fields[1])
        if not u < v < n:
            raise FormatError(f"edge ({u}, {v}) must satisfy 0 <= u < v < {n}", lineno, source)
        if previous is not None and (u, v) <= previous:
            raise FormatError(f"edge ({u}, {v}) is duplicate or out of order", lineno, source)
        previous = (u, v)
        edges.append((u, v))
        if weighted:
            weights.append(parse_rational(fields[2], "edge length", lineno, source))
            if weights[-1] <= 0:
                raise FormatError("edge lengths must be positive", lineno, source)
        if len(edges) > m:
            raise FormatError(f"more than the {m} edges announced in the header", lineno, source)
    if header is None:
        raise FormatError("missing 'n m w' header", source=source)
    n, m, weighted = header
    if len(edges) != m:
        raise FormatError(f"header announces {m} edges, found {len(edges)}", source=source)
    return Graph(n, tuple(edges), tuple(weights) if weighted else None)


def format_graph(g: Graph) -> str:
    lines = [f"{g.vertex_count} {g.edge_count} {1 if g.is_weighted else 0}"]
    if g.is_weighted:
        lines += [f"{u} {v} {format_rational(w)}" for (u, v), w in zip(g.edges, g.weights)]
    else:
        lines += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def read_graph(path: str | Path) -> Graph:
    graph = parse_graph(read_text(path), str(path))
    logger.info("Loaded %s: %d vertices, %d edges", path, graph.vertex_count, graph.edge_count)
    return graph


def write_graph(g: Graph, path: str | Path) -> None:
    write_text(path, format_graph(g))


def inline_graph(g: Graph) -> dict:
    """Unweighted graphs embedded in certificates (patterns)."""
    return {"n": g.vertex_count, "edges": [list(e) for e in g.edges]}


def graph_from_inline(obj: Any, source: str | None = None) -> Graph:
    _require(obj, ("n", "edges"), "inline graph", source)
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise FormatError("inline graph 'n' must be a non-negative integer", source=source)
    if not isinstance(obj["edges"], list):
        raise FormatError("inline graph 'edges' must be a list of pairs", source=source)
    pairs = []
    for pair in obj["edges"]:
        pair = _int_list(pair, "inline graph edge", source)
        if len(pair) != 2:
            raise FormatError("inline graph edges must be pairs", source=source)
        pairs.append(tuple(pair))
    try:
        return Graph.from_edges(n, pairs)
    except CoarseGraphError as e:
        raise FormatError(str(e), source=source) from None


# ============================================================
# LABEL TABLES
# ============================================================

def parse_labels(obj: Any, source: str | None = None) -> dict[str, list[int]]:
    """Label table with every entry widened to an id list."""
    if not isinstance(obj, dict):
        raise FormatError("label table must be a JSON object", source=source)
    out = {}
    for name, value in obj.items():
        if isinstance(value, int) and not isinstance(value, bool):
            out[name] = [value]
        else:
            out[name] = _int_list(value, f"label '{name}'", source)
    return out


def read_labels(path: str | Path) -> dict[str, list[int]]:
    return parse_labels(read_json(path), str(path))


def label_set(labels: Mapping[str, list[int]], name: str, source: str | None = None) -> frozenset[int]:
    if name not in labels:
        raise FormatError(f"label table has no entry '{name}'", source=source)
    return frozenset(labels[name])


# ============================================================
# CERTIFICATES
# ============================================================

def model_to_json(h: Graph, m: MinorModel) -> dict:
    return {
        "pattern": inline_graph(h),
        "fatness": format_rational(m.fatness),
        "branch": {str(v): sorted(part) for v, part in sorted(m.branch.items())},
        "connector": {f"{u}-{v}": sorted(part) for (u, v), part in sorted(m.connector.items())},
    }


def model_from_json(obj: Any, source: str | None = None) -> tuple[Graph, MinorModel]:
    """Pattern and model of a model certificate."""
    _require(obj, ("pattern", "fatness", "branch", "connector"), "model certificate", source)
    pattern = graph_from_inline(obj["pattern"], source)
    fatness = parse_rational(obj["fatness"], "fatness", source=source)
    if not isinstance(obj["branch"], dict) or not isinstance(obj["connector"], dict):
        raise FormatError("'branch' and 'connector' must be JSON objects", source=source)
    branch = {}
    for key, part in obj["branch"].items():
        if not _INT.match(key):
            raise FormatError(f"branch key {key!r} is not a vertex id", source=source)
        branch[int(key)] = frozenset(_int_list(part, f"branch set {key}", source))
    connector = {}
    for key, part in obj["connector"].items():
        ends = key.split("-")
        if len(ends) != 2 or not all(_INT.match(e) for e in ends):
            raise FormatError(f"connector key {key!r} is not 'u-v'", source=source)
        u, v = int(ends[0]), int(ends[1])
        connector[(min(u, v), max(u, v))] = frozenset(_int_list(part, f"connector set {key}", source))
    try:
        return pattern, MinorModel(branch, connector, fatness)
    except CoarseGraphError as e:
        raise FormatError(str(e), source=source) from None


def map_to_json(m: VertexMap) -> dict:
    return {"q": format_rational(m.q), "map": list(m.mapping)}


def map_from_json(obj: Any, domain: Graph, codomain: Graph, source: str | None = None) -> VertexMap:
    _require(obj, ("q", "map"), "map certificate", source)
    q = parse_rational(obj["q"], "q", source=source)
    mapping = _int_list(obj["map"], "map", source)
    try:
        return VertexMap(domain, codomain, tuple(mapping), q)
    except CoarseGraphError as e:
        raise FormatError(str(e), source=source) from None


def decomposition_to_json(td: TreeDecomposition) -> dict:
    return {"tree_edges": [list(e) for e in td.tree.edges], "bags": [list(b) for b in td.bags]}


def decomposition_from_json(obj: Any, source: str | None = None) -> TreeDecomposition:
    _require(obj, ("tree_edges", "bags"), "decomposition certificate", source)
    if not isinstance(obj["bags"], list) or not isinstance(obj["tree_edges"], list):
        raise FormatError("'tree_edges' and 'bags' must be lists", source=source)
    bags = [_int_list(b, "bag", source) for b in obj["bags"]]
    edges = [_int_list(e, "tree edge", source) for e in obj["tree_edges"]]
    if any(len(e) != 2 for e in edges):
        raise FormatError("tree edges must be pairs", source=source)
    try:
        return TreeDecomposition.from_parts(edges, bags)
    except CoarseGraphError as e:
        raise FormatError(str(e), source=source) from None


def paths_to_json(w: SpreadPathWitness) -> dict:
    return w.to_json()


def paths_from_json(obj: Any, source: str | None = None) -> SpreadPathWitness:
    _require(obj, ("paths", "min_pairwise_distance"), "spread-path certificate", source)
    if not isinstance(obj["paths"], list):
        raise FormatError("'paths' must be a list", source=source)
    paths = tuple(tuple(_int_list(p, "path", source)) for p in obj["paths"])
    raw = obj["min_pairwise_distance"]
    if raw == "inf":
        distance = INFINITY
    elif raw is None or (isinstance(raw, int) and not isinstance(raw, bool)):
        distance = raw
    else:
        raise FormatError("'min_pairwise_distance' must be an integer, 'inf' or null", source=source)
    return SpreadPathWitness(paths, distance)


def query_to_json(query: SpreadPathQuery) -> dict:
    return {
        "sources": sorted(query.sources),
        "targets": sorted(query.targets),
        "k": query.k,
        "dist": format_rational(query.dist),
    }


def query_from_json(obj: Any, source: str | None = None) -> SpreadPathQuery:
    _require(obj, ("sources", "targets", "k", "dist"), "path query", source)
    try:
        return SpreadPathQuery(
            frozenset(_int_list(obj["sources"], "sources", source)),
            frozenset(_int_list(obj["targets"], "targets", source)),
            obj["k"],
            parse_rational(obj["dist"], "dist", source=source),
        )
    except FormatError:
        raise
    except CoarseGraphError as e:
        raise FormatError(str(e), source=source) from None


# ============================================================
# BUNDLES
# ============================================================

@dataclass(frozen=True)
class CertificateBundle:
    """
    A certificate, the files it speaks about and the verdict it earned.

    ``inputs`` maps a role (``host``, ``domain``, ``codomain``, ``graph``)
    to ``{"path": ..., "sha256": ...}``. No timestamps are recorded, so
    the same inputs always give the same bytes.
    """

    kind: str
    payload: dict
    verdict: str
    inputs: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    tool_version: str = __version__

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "tool_version": self.tool_version,
            "inputs": self.inputs,
            "payload": self.payload,
            "parameters": self.parameters,
            "verdict": self.verdict,
        }


def make_bundle(
    kind: str,
    payload: dict,
    inputs: Mapping[str, str | Path],
    parameters: Mapping | None = None,
    threads: int | None = None,
) -> CertificateBundle:
    """Hash the inputs, verify the payload against them and record the verdict."""
    if kind not in BUNDLE_KINDS:
        raise FormatError(f"unknown certificate kind {kind!r}")
    recorded = {role: {"path": str(p), "sha256": file_sha256(p)} for role, p in sorted(inputs.items())}
    bundle = CertificateBundle(kind, payload, "", recorded, dict(parameters or {}))
    return CertificateBundle(kind, payload, recheck_bundle(bundle, threads), recorded, bundle.parameters)


def bundle_from_json(obj: Any, source: str | None = None) -> CertificateBundle:
    _require(obj, ("kind", "payload", "verdict", "inputs"), "certificate bundle", source)
    if obj["kind"] not in BUNDLE_KINDS:
        raise FormatError(f"unknown certificate kind {obj['kind']!r}", source=source)
    return CertificateBundle(
        obj["kind"],
        obj["payload"],
        obj["verdict"],
        obj["inputs"],
        obj.get("parameters", {}),
        obj.get("tool_version", __version__),
    )


def _input_graph(bundle: CertificateBundle, role: str) -> Graph:
    entry = bundle.inputs.get(role)
    if not isinstance(entry, dict) or "path" not in entry:
        raise FormatError(f"bundle lacks the '{role}' input")
    path = entry["path"]
    if entry.get("sha256") != file_sha256(path):
        raise FormatError(f"input '{role}' changed since the bundle was made", source=path)
    return read_graph(path)


def recheck_bundle(bundle: CertificateBundle, threads: int | None = None) -> str:
    """
    Re-run the verifier a bundle's kind calls for.

    Returns:
        ``"ok"`` or the kind of the first violation found

    Raises:
        FormatError: a missing or modified input, or a malformed payload
    """
    kind = bundle.kind
    if kind in ("model", "witness-2fat"):
        host = _input_graph(bundle, "host")
        pattern, model = model_from_json(bundle.payload)
        violation = verify_model(host, pattern, model, threads=threads)
    elif kind == "qi-map":
        domain = _input_graph(bundle, "domain")
        codomain = _input_graph(bundle, "codomain")
        violation = check_quasi_isometry(map_from_json(bundle.payload, domain, codomain), threads=threads)
    elif kind == "tree-decomposition":
        g = _input_graph(bundle, "graph")
        violation = validate(g, decomposition_from_json(bundle.payload))
    else:
        g = _input_graph(bundle, "graph")
        query = query_from_json(bundle.parameters)
        violation = verify_spread_paths(g, query, paths_from_json(bundle.payload))
    return VERDICT_OK if violation is None else violation.kind.value


def distance_to_json(d) -> Any:
    """Distances in reports: ints stay ints, other rationals become 'num/den', infinity 'inf'."""
    if d is None:
        return None
    if d == INFINITY:
        return "inf"
    d = Fraction(d)
    return d.numerator if d.denominator == 1 else format_rational(d)
