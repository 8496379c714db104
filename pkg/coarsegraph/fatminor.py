"""
Fat Minor Models
================
K-fat minor models: a connected branch set per pattern vertex and a
connected connector set per pattern edge, every connector meeting the
branch sets of its two ends, and every other pair of parts at host
distance at least K.

This module verifies models, searches for them (a budgeted normal-form
search and a brute-force oracle for tiny hosts), merges close clusters and
inflates 3-fat models found in a power graph back into the host.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from coarsegraph import bitsets
from coarsegraph.config import get_settings
from coarsegraph.errors import GraphError, ModelError, ResourceLimitError
from coarsegraph.graph import (
    INFINITY,
    Distance,
    Graph,
    as_rational,
    bounded_sweep,
    edge_key,
    is_connected_set,
    neighborhood,
    power_graph,
    set_distance,
    shortest_path,
)
from coarsegraph.search import BudgetExhausted, SearchBudget, SearchVerdict, coerce_budget

logger = logging.getLogger(__name__)


# ============================================================
# MODEL TYPES
# ============================================================

class PartRef(NamedTuple):
    """A part of a model: ``("branch", v)`` or ``("connector", (u, v))``."""

    kind: str
    index: int | tuple[int, int]

    def sort_key(self) -> tuple:
        return (0 if self.kind == "branch" else 1, self.index)

    def label(self) -> str:
        if self.kind == "branch":
            return f"B[{self.index}]"
        u, v = self.index
        return f"P[{u}-{v}]"

    def to_json(self) -> dict:
        index = self.index if self.kind == "branch" else list(self.index)
        return {"kind": self.kind, "index": index}


@dataclass(frozen=True)
class MinorModel:
    """
    Branch sets keyed by pattern vertex, connector sets keyed by pattern edge
    ``(u, v)`` with ``u < v``, and the fatness the model claims.
    """

    branch: Mapping[int, frozenset[int]]
    connector: Mapping[tuple[int, int], frozenset[int]]
    fatness: Fraction = Fraction(0)

    def __post_init__(self):
        branch = {int(v): frozenset(part) for v, part in sorted(self.branch.items())}
        connector = {}
        for (u, v), part in self.connector.items():
            key = edge_key(int(u), int(v))
            if key in connector:
                raise ModelError(f"connector {key} given twice")
            connector[key] = frozenset(part)
        fatness = as_rational(self.fatness)
        if fatness < 0:
            raise ModelError(f"fatness must be non-negative, got {fatness}")
        object.__setattr__(self, "branch", branch)
        object.__setattr__(self, "connector", dict(sorted(connector.items())))
        object.__setattr__(self, "fatness", fatness)

    def pattern(self) -> Graph:
        """The pattern graph this model is indexed by."""
        if sorted(self.branch) != list(range(len(self.branch))):
            raise ModelError("branch keys must be the pattern vertices 0..n-1")
        try:
            return Graph.from_edges(len(self.branch), list(self.connector))
        except GraphError as exc:
            raise ModelError(f"connector keys do not form a pattern graph: {exc}") from None

    def parts(self) -> list[PartRef]:
        refs = [PartRef("branch", v) for v in self.branch]
        refs += [PartRef("connector", e) for e in self.connector]
        return refs

    def part(self, ref: PartRef) -> frozenset[int]:
        return self.branch[ref.index] if ref.kind == "branch" else self.connector[ref.index]

    def with_fatness(self, k) -> "MinorModel":
        return MinorModel(self.branch, self.connector, k)

    def vertices(self) -> frozenset[int]:
        out: set[int] = set()
        for ref in self.parts():
            out |= self.part(ref)
        return frozenset(out)


class ViolationKind(str, Enum):
    MISSING_PART = "missing-part"
    DISCONNECTED_PART = "disconnected-part"
    MISSING_INCIDENCE = "missing-incidence"
    SEPARATION_TOO_SMALL = "separation-too-small"


@dataclass(frozen=True)
class ModelViolation:
    kind: ViolationKind
    parts: tuple[PartRef, ...]
    distance: Distance | None = None
    required: Fraction | None = None

    def describe(self) -> str:
        names = ", ".join(ref.label() for ref in self.parts)
        if self.kind is ViolationKind.SEPARATION_TOO_SMALL:
            return f"{self.kind.value}: {names} at distance {self.distance} < {self.required}"
        return f"{self.kind.value}: {names}"

    def to_json(self) -> dict:
        out = {"kind": self.kind.value, "parts": [ref.to_json() for ref in self.parts]}
        if self.distance is not None:
            out["distance"] = str(self.distance)
        if self.required is not None:
            out["required"] = str(self.required)
        return out


class SeparatedPair(NamedTuple):
    first: PartRef
    second: PartRef
    distance: Distance


# ============================================================
# VERIFICATION
# ============================================================

def _check_indices(g: Graph, h: Graph, m: MinorModel) -> None:
    if h.vertex_count == 0:
        raise ModelError("pattern graph must be non-empty")
    if set(m.branch) != set(range(h.vertex_count)):
        raise ModelError(
            f"branch sets are indexed by {sorted(m.branch)}, pattern has vertices 0..{h.vertex_count - 1}"
        )
    if set(m.connector) != set(h.edges):
        extra = sorted(set(m.connector) - set(h.edges))
        missing = sorted(set(h.edges) - set(m.connector))
        raise ModelError(f"connector keys do not match pattern edges (extra {extra}, missing {missing})")
    for ref in m.parts():
        for v in m.part(ref):
            if not 0 <= v < g.vertex_count:
                raise ModelError(f"{ref.label()} mentions vertex {v} outside the host")


def _excused(refs: Sequence[PartRef]) -> set[tuple[int, int]]:
    position = {ref: i for i, ref in enumerate(refs)}
    pairs = set()
    for ref in refs:
        if ref.kind == "connector":
            for end in ref.index:
                pairs.add((position[PartRef("branch", end)], position[ref]))
    return pairs


def _pair_distances(
    g: Graph,
    parts: Sequence[frozenset[int]],
    excused: set[tuple[int, int]],
    radius,
    strict: bool,
    threads: int,
) -> list[dict[int, Distance]]:
    """
    For every part i, the distances to later non-excused parts j that lie
    within the radius (strictly below it when ``strict``).
    """
    owners: dict[int, list[int]] = {}
    for idx, part in enumerate(parts):
        for v in part:
            owners.setdefault(v, []).append(idx)

    def scan(i: int) -> dict[int, Distance]:
        best: dict[int, Distance] = {}
        for v, d in bounded_sweep(g, parts[i], radius).items():
            if strict and d >= radius:
                continue
            for j in owners.get(v, ()):
                if j > i and (i, j) not in excused and (j not in best or d < best[j]):
                    best[j] = d
        return best

    if threads > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(scan, range(len(parts))))
    return [scan(i) for i in range(len(parts))]


def verify_model(
    g: Graph,
    h: Graph,
    m: MinorModel,
    k=None,
    threads: int | None = None,
) -> ModelViolation | None:
    """
    Check that a model is a k-fat minor model of h in g.

    Args:
        g: host graph
        h: pattern graph
        m: the model
        k: fatness to check; defaults to the model's own fatness
        threads: worker threads for the separation sweeps

    Returns:
        None when the model is valid, otherwise the first violation in part
        order (branch sets by vertex, then connectors by edge)

    Raises:
        ModelError: when the model's indices do not match the pattern
    """
    k = m.fatness if k is None else as_rational(k)
    if k < 0:
        raise ModelError(f"fatness must be non-negative, got {k}")
    _check_indices(g, h, m)
    refs = m.parts()
    parts = [m.part(ref) for ref in refs]

    for ref, part in zip(refs, parts):
        if not part:
            return ModelViolation(ViolationKind.MISSING_PART, (ref,))
    for ref, part in zip(refs, parts):
        if not is_connected_set(g, part):
            return ModelViolation(ViolationKind.DISCONNECTED_PART, (ref,))
    for (u, v), part in m.connector.items():
        for end in (u, v):
            if part.isdisjoint(m.branch[end]):
                return ModelViolation(
                    ViolationKind.MISSING_INCIDENCE,
                    (PartRef("connector", (u, v)), PartRef("branch", end)),
                )
    if k == 0:
        return None

    threads = get_settings().threads if threads is None else threads
    found = _pair_distances(g, parts, _excused(refs), k, strict=True, threads=threads)
    for i, best in enumerate(found):
        if best:
            j = min(best)
            return ModelViolation(
                ViolationKind.SEPARATION_TOO_SMALL, (refs[i], refs[j]), best[j], k
            )
    return None


def separation_profile(
    g: Graph,
    h: Graph,
    m: MinorModel,
    cutoff=None,
    threads: int | None = None,
) -> list[SeparatedPair]:
    """
    Distances between every pair of parts the fatness condition applies to.

    With a cutoff only pairs at distance <= cutoff are reported; without one
    every pair is reported (INFINITY when the parts are in different
    components). Pairs come in part order.
    """
    _check_indices(g, h, m)
    refs = m.parts()
    parts = [m.part(ref) for ref in refs]
    excused = _excused(refs)
    threads = get_settings().threads if threads is None else threads
    radius = INFINITY if cutoff is None else as_rational(cutoff)
    found = _pair_distances(g, parts, excused, radius, strict=False, threads=threads)
    pairs = []
    for i, best in enumerate(found):
        if cutoff is None:
            for j in range(i + 1, len(refs)):
                if (i, j) not in excused:
                    pairs.append(SeparatedPair(refs[i], refs[j], best.get(j, INFINITY)))
        else:
            pairs.extend(SeparatedPair(refs[i], refs[j], best[j]) for j in sorted(best))
    return pairs


def model_fatness(g: Graph, h: Graph, m: MinorModel) -> Distance:
    """Largest fatness the part sets verify at (INFINITY when nothing is separated)."""
    pairs = separation_profile(g, h, m)
    return min((pair.distance for pair in pairs), default=INFINITY)


def collapse_model(g: Graph, h: Graph) -> MinorModel:
    """The fatness-0 model placing every part on vertex 0."""
    if g.vertex_count == 0:
        raise ModelError("cannot collapse a pattern into an empty host")
    spot = frozenset({0})
    return MinorModel(
        {v: spot for v in range(h.vertex_count)},
        {e: spot for e in h.edges},
        0,
    )


# ============================================================
# CONNECTED SETS
# ============================================================

def _connected_subsets(adj: Sequence[int], allowed: int) -> Iterator[int]:
    """Every connected vertex set inside ``allowed``, each exactly once, smallest seed first."""
    for v in bitsets.bits(allowed):
        higher = allowed & ~((1 << (v + 1)) - 1)
        yield from _extend(1 << v, adj[v] & higher, adj[v] | (1 << v), higher, adj)


def _extend(sub: int, ext: int, closed: int, higher: int, adj: Sequence[int]) -> Iterator[int]:
    yield sub
    while ext:
        low = ext & -ext
        ext ^= low
        w = low.bit_length() - 1
        yield from _extend(sub | low, ext | (adj[w] & higher & ~closed), closed | adj[w], higher, adj)


def _non_cut_count(mask: int, adj: Sequence[int]) -> int:
    if mask & (mask - 1) == 0:
        return 1
    return sum(1 for v in bitsets.bits(mask) if bitsets.is_connected(mask & ~(1 << v), adj))


def _check_pattern(h: Graph) -> None:
    if h.vertex_count == 0:
        raise ModelError("pattern graph must be non-empty")
    if h.is_weighted:
        raise ModelError("pattern graph must be unweighted")


# ============================================================
# NORMAL-FORM SEARCH
# ============================================================

class _FatMinorSearch:
    """
    Backtracking over normal-form models.

    Branch sets are connected sets with at most max(deg, 1) non-cut vertices,
    placed in pattern-vertex order; connectors are chordless paths between
    their two branch sets whose interiors avoid every branch set, tried
    shortest first in edge order. Everything placed casts a zone of radius
    < k that unrelated parts must avoid.
    """

    def __init__(self, g: Graph, h: Graph, k: Fraction, budget: SearchBudget):
        self.g, self.h, self.k, self.budget = g, h, k, budget
        self.adj = bitsets.adjacency_masks(g)
        self.balls = bitsets.ball_masks(g, k)
        self.full = (1 << g.vertex_count) - 1
        self.edges = list(h.edges)
        self.branch: list[int] = []
        self.branch_zone: list[int] = []
        self.limits = [max(h.degree(v), 1) for v in range(h.vertex_count)]

    def run(self) -> MinorModel | None:
        connectors = self._place_branch(0)
        if connectors is None:
            return None
        return MinorModel(
            {v: bitsets.to_set(mask) for v, mask in enumerate(self.branch)},
            {e: bitsets.to_set(mask) for e, mask in zip(self.edges, connectors)},
            self.k,
        )

    def _corridor(self, e: tuple[int, int], connector_zone: int) -> int:
        """Vertices a connector for e may use as interior."""
        blocked = connector_zone
        for w, (mask, zone) in enumerate(zip(self.branch, self.branch_zone)):
            blocked |= mask if w in e else zone
        return self.full & ~blocked

    def _feasible(self, connector_zone: int, start_edge: int) -> bool:
        for e in self.edges[start_edge:]:
            u, v = e
            if u >= len(self.branch) or v >= len(self.branch):
                continue
            source = self.branch[u] & ~connector_zone
            target = self.branch[v] & ~connector_zone
            if not source or not target:
                return False
            reached = bitsets.spread(source, self._corridor(e, connector_zone), self.adj)
            if not bitsets.neighbours(reached, self.adj) & target:
                return False
        return True

    def _place_branch(self, v: int) -> list[int] | None:
        if v == self.h.vertex_count:
            return self._route(0, 0, [])
        taken = 0
        for zone in self.branch_zone:
            taken |= zone
        for cand in _connected_subsets(self.adj, self.full & ~taken):
            self.budget.charge()
            if _non_cut_count(cand, self.adj) > self.limits[v]:
                continue
            self.branch.append(cand)
            self.branch_zone.append(bitsets.zone(cand, self.balls))
            if self._feasible(0, 0):
                found = self._place_branch(v + 1)
                if found is not None:
                    return found
            self.branch.pop()
            self.branch_zone.pop()
        return None

    def _paths(self, e: tuple[int, int], connector_zone: int) -> list[int]:
        u, v = e
        source = self.branch[u] & ~connector_zone
        target = self.branch[v] & ~connector_zone
        corridor = self._corridor(e, connector_zone)
        adj = self.adj
        found: list[tuple[int, ...]] = []

        def walk(seq: list[int], used: int) -> None:
            self.budget.charge()
            last = seq[-1]
            last_bit = 1 << last
            for w in bitsets.bits(adj[last] & (corridor | target) & ~used):
                if adj[w] & used != last_bit:
                    continue
                if (1 << w) & target:
                    found.append((*seq, w))
                else:
                    seq.append(w)
                    walk(seq, used | (1 << w))
                    seq.pop()

        for a in bitsets.bits(source):
            walk([a], 1 << a)
        found.sort(key=lambda path: (len(path), path))
        return [bitsets.to_mask(path) for path in found]

    def _route(self, idx: int, connector_zone: int, placed: list[int]) -> list[int] | None:
        if idx == len(self.edges):
            return list(placed)
        for path in self._paths(self.edges[idx], connector_zone):
            zone = connector_zone | bitsets.zone(path, self.balls)
            placed.append(path)
            if self._feasible(zone, idx + 1):
                found = self._route(idx + 1, zone, placed)
                if found is not None:
                    return found
            placed.pop()
        return None


def find_fat_minor(
    g: Graph, h: Graph, k, budget: SearchBudget | int | None = None, threads: int | None = None
) -> SearchVerdict[MinorModel]:
    """
    Search for a k-fat minor model of h in g.

    Every Found model has passed verify_model. NoneExhaustive is only
    returned for unweighted hosts whose search space was exhausted; weighted
    hosts report Inconclusive instead.

    Args:
        g: host graph
        h: pattern graph
        k: fatness (non-negative rational)
        budget: node expansions (a SearchBudget, a count, or the configured default)
        threads: worker threads for the check of a found model
    """
    _check_pattern(h)
    k = as_rational(k)
    if k < 0:
        raise ModelError(f"fatness must be non-negative, got {k}")
    budget = coerce_budget(budget)
    start = budget.used
    if g.vertex_count == 0:
        return SearchVerdict.none_exhaustive(0)
    if k == 0:
        return SearchVerdict.found(collapse_model(g, h), 0)

    search = _FatMinorSearch(g, h, k, budget)
    try:
        model = search.run()
    except BudgetExhausted:
        logger.info("Fat-minor search ran out of budget after %d expansions", budget.used - start)
        return SearchVerdict.inconclusive(budget.used - start)
    spent = budget.used - start
    if model is None:
        if g.is_weighted:
            return SearchVerdict.inconclusive(spent)
        return SearchVerdict.none_exhaustive(spent)
    violation = verify_model(g, h, model, k, threads=threads)
    if violation is not None:
        raise AssertionError(f"search produced an invalid model: {violation.describe()}")
    return SearchVerdict.found(model, spent)


# ============================================================
# BRUTE-FORCE ORACLE
# ============================================================

def exhaustive_oracle(g: Graph, h: Graph, k, cap: int | None = None) -> SearchVerdict[MinorModel]:
    """
    Decide k-fat minor containment straight from the definition.

    Every part ranges over every connected vertex set of g; a part is
    checked against each earlier part as soon as it is assigned.

    Raises:
        ResourceLimitError: when g has more vertices than the oracle cap
    """
    _check_pattern(h)
    cap = get_settings().oracle_cap if cap is None else cap
    if g.vertex_count > cap:
        raise ResourceLimitError(f"oracle refused: {g.vertex_count} vertices exceed the cap of {cap}")
    k = as_rational(k)
    if k < 0:
        raise ModelError(f"fatness must be non-negative, got {k}")
    if g.vertex_count == 0:
        return SearchVerdict.none_exhaustive(0)

    adj = bitsets.adjacency_masks(g)
    balls = bitsets.ball_masks(g, k)
    candidates = list(_connected_subsets(adj, (1 << g.vertex_count) - 1))
    zones = {mask: bitsets.zone(mask, balls) for mask in candidates}

    refs = [PartRef("branch", v) for v in range(h.vertex_count)]
    refs += [PartRef("connector", e) for e in h.edges]
    position = {ref: i for i, ref in enumerate(refs)}
    incident = [set() for _ in refs]
    for i, ref in enumerate(refs):
        if ref.kind == "connector":
            incident[i] = {position[PartRef("branch", end)] for end in ref.index}

    chosen: list[int] = []
    tries = 0

    def assign(i: int) -> bool:
        nonlocal tries
        if i == len(refs):
            return True
        for cand in candidates:
            tries += 1
            ok = True
            for j in range(i):
                if j in incident[i]:
                    ok = bool(cand & chosen[j])
                else:
                    ok = not (zones[cand] & chosen[j])
                if not ok:
                    break
            if ok:
                chosen.append(cand)
                if assign(i + 1):
                    return True
                chosen.pop()
        return False

    if not assign(0):
        return SearchVerdict.none_exhaustive(tries)
    model = MinorModel(
        {v: bitsets.to_set(chosen[position[PartRef("branch", v)]]) for v in range(h.vertex_count)},
        {e: bitsets.to_set(chosen[position[PartRef("connector", e)]]) for e in h.edges},
        k,
    )
    return SearchVerdict.found(model, tries)


# ============================================================
# CLUSTER MERGING
# ============================================================

@dataclass(frozen=True)
class MergeResult:
    sets: list[frozenset[int]]
    index_map: tuple[int, ...]          # input position -> output position
    radius_used: Fraction = field(default=Fraction(0))


def merge_close_sets(g: Graph, xs: Sequence[Iterable[int]], eps) -> MergeResult:
    """
    Merge connected sets until they are pairwise at distance >= eps.

    While two clusters A, B (first such pair in index order) are closer
    than eps, A is replaced by N^eps[A] | B and B is dropped. Each merge
    widens the covered region by at most eps.

    Raises:
        GraphError: for an empty family, an empty or disconnected set, or eps <= 0
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise GraphError(f"eps must be positive, got {eps}")
    if not xs:
        raise GraphError("merge_close_sets needs at least one set")
    clusters: list[frozenset[int]] = []
    members: list[list[int]] = []
    for i, x in enumerate(xs):
        part = g.check_vertices(x)
        if not is_connected_set(g, part):
            raise GraphError(f"input set {i} is empty or disconnected")
        clusters.append(part)
        members.append([i])

    merges = 0
    while True:
        pair = next(
            (
                (i, j)
                for i in range(len(clusters))
                for j in range(i + 1, len(clusters))
                if set_distance(g, clusters[i], clusters[j]) < eps
            ),
            None,
        )
        if pair is None:
            break
        i, j = pair
        clusters[i] = neighborhood(g, clusters[i], eps) | clusters[j]
        members[i].extend(members.pop(j))
        del clusters[j]
        merges += 1

    index_map = [0] * len(xs)
    for new, olds in enumerate(members):
        for old in olds:
            index_map[old] = new
    logger.debug("Merged %d sets into %d", len(xs), len(clusters))
    return MergeResult(clusters, tuple(index_map), eps * merges)


# ============================================================
# INFLATION FROM THE POWER GRAPH
# ============================================================

def inflate_model(
    g: Graph, k: int, m3: MinorModel, pattern: Graph | None = None, threads: int | None = None
) -> MinorModel:
    """
    Turn a 3-fat model in the power graph G^k into a k-fat model in G.

    Branch sets grow to their floor(k/2)-neighbourhoods; each connector is
    rebuilt as a shortest path inside the floor(k/2)-neighbourhood of the
    old connector, between the two grown branch sets.

    Raises:
        ModelError: when m3 is not a 3-fat model in G^k, or the result fails
            to verify at fatness k
    """
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ModelError(f"inflation power must be a positive integer, got {k!r}")
    h = m3.pattern() if pattern is None else pattern
    gk = power_graph(g, k)
    violation = verify_model(gk, h, m3, 3, threads=threads)
    if violation is not None:
        raise ModelError(f"not a 3-fat model in the {k}-th power: {violation.describe()}")

    r = k // 2
    branch = {v: neighborhood(g, part, r) for v, part in m3.branch.items()}
    connector = {}
    for (u, v), part in m3.connector.items():
        corridor = neighborhood(g, part, r)
        path = shortest_path(g, branch[u] & corridor, branch[v] & corridor, within=corridor)
        if path is None:
            raise ModelError(f"no path for connector {(u, v)} inside its corridor")
        connector[(u, v)] = frozenset(path)

    inflated = MinorModel(branch, connector, k)
    violation = verify_model(g, h, inflated, k, threads=threads)
    if violation is not None:
        raise ModelError(f"inflated model fails at fatness {k}: {violation.describe()}")
    return inflated
