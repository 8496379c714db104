"""
Graph Corpora and Sweeps
========================
Small-graph corpora (every connected graph on up to eight vertices plus
seeded random connected graphs) and the acceptance sweeps run over them:

- the power-graph pipeline: search in G at fatness k, search in G^k at
  fatness 3, inflate what the power graph yields and cross-check both
  verdicts
- the identity-into-power quasi-isometry grid, including the exact
  ``dist_{G^k} = ceil(dist_G / k)`` comparison

Sweeps return pandas DataFrames, one row per (graph, pattern, k) run.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
import pandas as pd

from coarsegraph.certificates import model_to_json
from coarsegraph.errors import ModelError, ResourceLimitError
from coarsegraph.fatminor import MinorModel, find_fat_minor, inflate_model
from coarsegraph.graph import Graph, distance_matrix, pattern_by_name, power_graph
from coarsegraph.quasiiso import check_quasi_isometry, identity_into_power
from coarsegraph.search import SearchBudget, SearchVerdict, VerdictKind, coerce_budget

logger = logging.getLogger(__name__)

ATLAS_MAX_VERTICES = 7          # networkx's atlas stops at 7 vertices
CORPUS_MAX_VERTICES = 8
PIPELINE_PATTERNS = ("k3", "p4", "c4", "k4")
PIPELINE_POWERS = (3, 4, 5)
QI_POWERS = (2, 3, 5)


# ============================================================
# CORPORA
# ============================================================

@lru_cache(maxsize=None)
def connected_of_order(n: int) -> tuple[nx.Graph, ...]:
    """
    One graph per isomorphism class of connected graphs on exactly n vertices.

    Up to the atlas limit the classes come from the networkx atlas. Beyond
    it every class is grown from the classes one vertex smaller: a
    connected graph always has a vertex whose removal leaves it connected,
    so joining a new vertex to each non-empty vertex subset of each smaller
    class reaches them all. Candidates are bucketed by Weisfeiler-Lehman
    hash and kept only if no graph of their bucket is isomorphic.
    """
    if n < 1:
        return ()
    if n <= ATLAS_MAX_VERTICES:
        return tuple(nxg for nxg in nx.graph_atlas_g() if nxg.number_of_nodes() == n and nx.is_connected(nxg))
    buckets: dict[str, list[nx.Graph]] = {}
    found = []
    for smaller in connected_of_order(n - 1):
        for mask in range(1, 1 << (n - 1)):
            grown = smaller.copy()
            grown.add_edges_from((n - 1, v) for v in range(n - 1) if mask >> v & 1)
            bucket = buckets.setdefault(nx.weisfeiler_lehman_graph_hash(grown), [])
            if any(nx.is_isomorphic(grown, other) for other in bucket):
                continue
            bucket.append(grown)
            found.append(grown)
    logger.info("Grew %d connected graphs on %d vertices", len(found), n)
    return tuple(found)


def connected_corpus(max_vertices: int = CORPUS_MAX_VERTICES, min_vertices: int = 1) -> list[tuple[str, Graph]]:
    """Every connected graph within the vertex range, up to isomorphism.

    Raises:
        ResourceLimitError: max_vertices above CORPUS_MAX_VERTICES
    """
    if max_vertices > CORPUS_MAX_VERTICES:
        raise ResourceLimitError(
            f"exhaustive corpus stops at {CORPUS_MAX_VERTICES} vertices, got {max_vertices}; add random graphs instead"
        )
    out = []
    for n in range(max(min_vertices, 1), max_vertices + 1):
        out += [(f"conn{n}-{i}", Graph.from_networkx(nxg)) for i, nxg in enumerate(connected_of_order(n))]
    return out


def random_corpus(count: int, low: int, high: int, seed: int = 0, p: float | None = None) -> list[tuple[str, Graph]]:
    """
    ``count`` connected G(n, p) graphs with ``low <= n <= high``.

    Draws are rejected until connected; with ``p`` unset each draw uses
    p = 2 ln(n) / n, comfortably above the connectivity threshold.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(low, high)
        prob = p if p is not None else min(1.0, 2 * np.log(max(n, 2)) / n)
        nxg = nx.gnp_random_graph(n, prob, seed=rng.randrange(2 ** 32))
        if nx.is_connected(nxg):
            out.append((f"gnp{seed}-{len(out)}", Graph.from_networkx(nxg)))
    return out


def default_corpus(seed: int = 0, random_count: int = 200) -> list[tuple[str, Graph]]:
    return connected_corpus() + random_corpus(random_count, 9, 10, seed)


# ============================================================
# POWER-GRAPH PIPELINE
# ============================================================

class Agreement(str, Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class PipelineReport:
    """
    Both searches, the inflated model and how the two verdicts relate.

    Inconsistent: an inflated model fails at fatness k, or the host is
    declared free of k-fat models while the power graph holds a 3-fat one.
    Undecided: the host is free of k-fat models but the power graph search
    ran out of budget, so the implication between them went unchecked.
    """

    pattern: Graph
    k: int
    host: SearchVerdict[MinorModel]
    power: SearchVerdict[MinorModel]
    inflated: MinorModel | None
    inflation_error: str | None

    @property
    def inflated_ok(self) -> bool | None:
        if not self.power.is_found:
            return None
        return self.inflated is not None

    @property
    def agreement(self) -> Agreement:
        host_none = self.host.kind is VerdictKind.NONE_EXHAUSTIVE
        if self.inflated_ok is False or (host_none and self.power.is_found):
            return Agreement.INCONSISTENT
        if host_none and self.power.kind is VerdictKind.INCONCLUSIVE:
            return Agreement.UNDECIDED
        return Agreement.CONSISTENT

    @property
    def consistent(self) -> bool:
        return self.agreement is Agreement.CONSISTENT

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "host_verdict": self.host.kind.value,
            "power_verdict": self.power.kind.value,
            "inflated_ok": self.inflated_ok,
            "inflation_error": self.inflation_error,
            "inflated_model": model_to_json(self.pattern, self.inflated) if self.inflated else None,
            "agreement": self.agreement.value,
            "consistent": self.consistent,
        }


def power_pipeline(g: Graph, h: Graph, k: int, budget: SearchBudget | int | None = None) -> PipelineReport:
    """Run the G / G^k / inflation cross-check for one host, pattern and power."""
    budget = coerce_budget(budget)
    host = find_fat_minor(g, h, k, budget.fresh())
    power = find_fat_minor(power_graph(g, k), h, 3, budget.fresh())
    inflated, error = None, None
    if power.is_found:
        try:
            inflated = inflate_model(g, k, power.witness, h)
        except ModelError as e:
            error = str(e)
            logger.warning("Inflation failed at k=%d: %s", k, e)
    return PipelineReport(h, k, host, power, inflated, error)


def sweep_power_pipeline(
    graphs: Sequence[tuple[str, Graph]],
    patterns: Iterable[str] = PIPELINE_PATTERNS,
    powers: Iterable[int] = PIPELINE_POWERS,
    budget: int | None = None,
) -> pd.DataFrame:
    patterns, powers = list(patterns), list(powers)
    rows = []
    for i, (name, g) in enumerate(graphs):
        for pattern in patterns:
            h = pattern_by_name(pattern)
            for k in powers:
                report = power_pipeline(g, h, k, budget)
                rows.append({
                    "graph": name,
                    "vertices": g.vertex_count,
                    "pattern": pattern,
                    "k": k,
                    "host_verdict": report.host.kind.value,
                    "power_verdict": report.power.kind.value,
                    "inflated_ok": report.inflated_ok,
                    "agreement": report.agreement.value,
                })
        if (i + 1) % 100 == 0:
            logger.info("Pipeline sweep: %d / %d graphs", i + 1, len(graphs))
    return pd.DataFrame(rows, columns=[
        "graph", "vertices", "pattern", "k", "host_verdict", "power_verdict", "inflated_ok", "agreement",
    ])


# ============================================================
# QUASI-ISOMETRY GRID
# ============================================================

def power_distances_match(g: Graph, k: int) -> bool:
    """True iff every pair satisfies dist_{G^k} = ceil(dist_G / k)."""
    base = distance_matrix(g)
    power = distance_matrix(power_graph(g, k))
    expected = np.where(base < 0, base, (base + k - 1) // k)
    return bool(np.array_equal(expected, power))


def sweep_qi(graphs: Sequence[tuple[str, Graph]], powers: Iterable[int] = QI_POWERS) -> pd.DataFrame:
    powers = list(powers)
    rows = []
    for name, g in graphs:
        for k in powers:
            violation = check_quasi_isometry(identity_into_power(g, k), threads=1)
            rows.append({
                "graph": name,
                "vertices": g.vertex_count,
                "k": k,
                "qi_ok": violation is None,
                "violation": violation.describe() if violation else "",
                "ceil_ok": power_distances_match(g, k),
            })
    return pd.DataFrame(rows, columns=["graph", "vertices", "k", "qi_ok", "violation", "ceil_ok"])


def summarize(kind: str, table: pd.DataFrame) -> dict:
    """Counts for the JSON summary written next to a sweep's CSV."""
    if kind == "theorem13":
        agreement = table["agreement"].value_counts() if len(table) else pd.Series(dtype=int)
        return {
            "kind": kind,
            "runs": len(table),
            "graphs": int(table["graph"].nunique()) if len(table) else 0,
            "inconsistent": int(agreement.get(Agreement.INCONSISTENT.value, 0)),
            "undecided": int(agreement.get(Agreement.UNDECIDED.value, 0)),
            "power_found": int((table["power_verdict"] == VerdictKind.FOUND.value).sum()) if len(table) else 0,
            "inconclusive": int(
                ((table["host_verdict"] == VerdictKind.INCONCLUSIVE.value)
                 | (table["power_verdict"] == VerdictKind.INCONCLUSIVE.value)).sum()
            ) if len(table) else 0,
        }
    failures = int((~(table["qi_ok"] & table["ceil_ok"])).sum()) if len(table) else 0
    return {"kind": kind, "runs": len(table), "failures": failures}
