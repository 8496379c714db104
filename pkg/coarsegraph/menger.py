"""
Spread Path Packings
====================
Search for k (S,T)-paths that are pairwise at distance at least D.

An (S,T)-path is a simple path with one end in S and the other in T; a
vertex of S and T together is a one-vertex (S,T)-path. Paths are written
from their S end, and a path that could be read from either end is written
from its smaller end. The search backtracks over path prefixes, path after
path, each path avoiding the distance-D zone of the paths already chosen;
``triple_oracle`` is an independent brute force over the (S,T)-paths of a
tiny host.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

from coarsegraph import bitsets
from coarsegraph.config import get_settings
from coarsegraph.errors import GraphError, ResourceLimitError
from coarsegraph.graph import INFINITY, Distance, Graph, as_rational, bounded_sweep, set_distance
from coarsegraph.search import BudgetExhausted, SearchBudget, SearchVerdict, coerce_budget

logger = logging.getLogger(__name__)

Path = tuple[int, ...]


def _json_distance(d: Distance | None):
    return "inf" if d == INFINITY else d


# ============================================================
# TYPES
# ============================================================

@dataclass(frozen=True)
class SpreadPathQuery:
    """k pairwise-far (S,T)-paths: every two chosen paths at distance >= dist."""

    sources: frozenset[int]
    targets: frozenset[int]
    k: int
    dist: Fraction

    def __post_init__(self):
        sources = frozenset(int(v) for v in self.sources)
        targets = frozenset(int(v) for v in self.targets)
        if not sources or not targets:
            raise GraphError("both end sets of a path query must be non-empty")
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise GraphError(f"path count must be a positive integer, got {self.k!r}")
        dist = as_rational(self.dist)
        if dist < 0:
            raise GraphError(f"path distance must be non-negative, got {dist}")
        object.__setattr__(self, "sources", sources)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "dist", dist)


@dataclass(frozen=True)
class SpreadPathWitness:
    paths: tuple[Path, ...]
    min_pairwise_distance: Distance | None = None   # None for a single path

    def to_json(self) -> dict:
        return {"paths": [list(p) for p in self.paths], "min_pairwise_distance": _json_distance(self.min_pairwise_distance)}


def pairwise_distances(g: Graph, paths: Sequence[Path]) -> list[list[Distance]]:
    """Symmetric matrix of set distances between the paths; zero diagonal."""
    out: list[list[Distance]] = [[0] * len(paths) for _ in paths]
    for i, j in combinations(range(len(paths)), 2):
        out[i][j] = out[j][i] = set_distance(g, paths[i], paths[j])
    return out


def _witness(g: Graph, paths: Sequence[Path]) -> SpreadPathWitness:
    if len(paths) < 2:
        return SpreadPathWitness(tuple(paths), None)
    matrix = pairwise_distances(g, paths)
    smallest = min(matrix[i][j] for i, j in combinations(range(len(paths)), 2))
    return SpreadPathWitness(tuple(paths), smallest)


class PathViolationKind(str, Enum):
    WRONG_COUNT = "wrong-count"
    NOT_A_PATH = "not-a-path"
    BAD_ENDPOINTS = "bad-endpoints"
    DUPLICATE = "duplicate"
    TOO_CLOSE = "too-close"
    WRONG_DISTANCE = "wrong-distance"


@dataclass(frozen=True)
class PathViolation:
    kind: PathViolationKind
    paths: tuple[int, ...] = ()
    distance: Distance | None = None

    def describe(self) -> str:
        detail = f" (distance {self.distance})" if self.distance is not None else ""
        return f"{self.kind.value}: paths {list(self.paths)}{detail}"

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "paths": list(self.paths), "distance": _json_distance(self.distance)}


def _require_unweighted(g: Graph, query: SpreadPathQuery) -> None:
    if g.is_weighted:
        raise GraphError("spread path packing is defined on unweighted graphs only")
    g.check_vertices(query.sources, "source set")
    g.check_vertices(query.targets, "target set")


def _is_st_path(query: SpreadPathQuery, path: Path) -> bool:
    sources, targets = query.sources, query.targets
    return (path[0] in sources and path[-1] in targets) or (path[0] in targets and path[-1] in sources)


def _canonical(query: SpreadPathQuery, path: Path) -> bool:
    """False for the S-first reading of a path that is also S-first when reversed, from its larger end."""
    return not (path[-1] in query.sources and path[0] in query.targets and path[-1] < path[0])


# ============================================================
# VERIFICATION
# ============================================================

def verify_spread_paths(g: Graph, query: SpreadPathQuery, witness: SpreadPathWitness) -> PathViolation | None:
    """
    Re-check a witness against the query from scratch.

    Order of checks: path count, then each path in turn (a simple walk of
    g, then its end placement), then duplicates (a path and its reversal
    are the same path), then every pair against the required distance, and
    last the recorded minimum distance.

    Returns:
        None if the witness answers the query, otherwise the first violation
    """
    _require_unweighted(g, query)
    paths = witness.paths
    if len(paths) != query.k:
        return PathViolation(PathViolationKind.WRONG_COUNT, tuple(range(len(paths))))
    for i, path in enumerate(paths):
        simple = len(path) > 0 and len(set(path)) == len(path)
        if not simple or any(not 0 <= v < g.vertex_count for v in path):
            return PathViolation(PathViolationKind.NOT_A_PATH, (i,))
        if not all(g.has_edge(a, b) for a, b in zip(path, path[1:])):
            return PathViolation(PathViolationKind.NOT_A_PATH, (i,))
        if not _is_st_path(query, path):
            return PathViolation(PathViolationKind.BAD_ENDPOINTS, (i,))
    for i, j in combinations(range(len(paths)), 2):
        if paths[i] == paths[j] or paths[i] == paths[j][::-1]:
            return PathViolation(PathViolationKind.DUPLICATE, (i, j))

    matrix = pairwise_distances(g, paths)
    for i, j in combinations(range(len(paths)), 2):
        if matrix[i][j] < query.dist:
            return PathViolation(PathViolationKind.TOO_CLOSE, (i, j), matrix[i][j])
    expected = _witness(g, paths).min_pairwise_distance
    if witness.min_pairwise_distance != expected:
        return PathViolation(PathViolationKind.WRONG_DISTANCE, (), witness.min_pairwise_distance)
    return None


# ============================================================
# BUDGETED SEARCH
# ============================================================

class _SpreadPathSearch:
    """
    Backtracking over path prefixes in lexicographic order.

    The chosen paths are kept in strictly increasing order, which loses no
    packing. For a positive distance the paths are disjoint, and each one
    can be cut down to a subpath meeting S and T only at its ends and then
    shortcut along its chords without moving it closer to the others: only
    those minimal chordless paths are explored then. With distance zero
    distinct paths may cut down to the same one, so every simple path is
    explored.
    """

    def __init__(self, g: Graph, query: SpreadPathQuery, budget: SearchBudget):
        self.g = g
        self.query = query
        self.budget = budget
        self.adj = g.adjacency
        self.minimal = query.dist > 0
        self.live_reachability = g.vertex_count <= get_settings().all_pairs_cap
        self.chosen: list[Path] = []

    def run(self) -> list[Path] | None:
        return list(self.chosen) if self._place(frozenset()) else None

    def _zone(self, path: Path) -> frozenset[int]:
        dist = self.query.dist
        if dist == 0:
            return frozenset()
        return frozenset(v for v, d in bounded_sweep(self.g, path, dist).items() if d < dist)

    def _place(self, zone: frozenset[int]) -> bool:
        if len(self.chosen) == self.query.k:
            return True
        previous = self.chosen[-1] if self.chosen else None
        for path in self._paths(zone, previous):
            self.chosen.append(path)
            if self._place(zone | self._zone(path)):
                return True
            self.chosen.pop()
        return False

    def _can_finish(self, zone: frozenset[int]) -> frozenset[int]:
        """Vertices from which a target outside the zone is reachable along an allowed path."""
        sources, targets = self.query.sources, self.query.targets
        seen = {t for t in targets if t not in zone}
        queue = deque(sorted(seen))
        while queue:
            v = queue.popleft()
            for w in self.adj[v]:
                if w in seen or w in zone or (self.minimal and w in targets):
                    continue
                seen.add(w)
                if not (self.minimal and w in sources):
                    queue.append(w)
        return frozenset(seen)

    def _reaches_target(self, start: int, used: set[int], zone: frozenset[int]) -> bool:
        targets, sources = self.query.targets, self.query.sources
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in self.adj[v]:
                if w in seen or w in used or w in zone or (self.minimal and w in sources):
                    continue
                if w in targets:
                    return True
                seen.add(w)
                queue.append(w)
        return False

    def _fresh(self, path: Path, previous: Path | None) -> bool:
        return _canonical(self.query, path) and (previous is None or path > previous)

    def _paths(self, zone: frozenset[int], previous: Path | None) -> Iterator[Path]:
        """(S,T)-paths avoiding the zone, in lexicographic order, beyond ``previous``."""
        sources, targets = self.query.sources, self.query.targets
        live = self._can_finish(zone)
        for s in sorted(sources):
            if s in zone or s not in live:
                continue
            if previous is not None and self.minimal and s <= previous[0]:
                continue
            self.budget.charge()
            if s in targets:
                if self._fresh((s,), previous):
                    yield (s,)
                if self.minimal:
                    continue
            seq = [s]
            used = {s}
            stack = [iter(self.adj[s])]
            while stack:
                w = next(stack[-1], None)
                if w is None:
                    stack.pop()
                    used.discard(seq.pop())
                    continue
                if w in used or w in zone or w not in live:
                    continue
                if self.minimal and (w in sources or sum(1 for x in self.adj[w] if x in used) != 1):
                    continue
                self.budget.charge()
                if w in targets:
                    path = (*seq, w)
                    if self._fresh(path, previous):
                        yield path
                    if self.minimal:
                        continue
                if self.live_reachability and not self._reaches_target(w, used, zone):
                    continue
                seq.append(w)
                used.add(w)
                stack.append(iter(self.adj[w]))


def find_spread_paths(
    g: Graph, query: SpreadPathQuery, budget: SearchBudget | int | None = None
) -> SearchVerdict[SpreadPathWitness]:
    """
    Search for query.k (S,T)-paths pairwise at distance at least query.dist.

    Found witnesses have passed verify_spread_paths; NoneExhaustive means
    the whole (symmetry-reduced) space of path sequences was explored.

    Raises:
        GraphError: weighted host or end vertices outside the host
    """
    _require_unweighted(g, query)
    budget = coerce_budget(budget)
    start = budget.used
    search = _SpreadPathSearch(g, query, budget)
    try:
        paths = search.run()
    except BudgetExhausted:
        logger.info("Spread-path search ran out of budget after %d expansions", budget.used - start)
        return SearchVerdict.inconclusive(budget.used - start)
    spent = budget.used - start
    if paths is None:
        return SearchVerdict.none_exhaustive(spent)
    witness = _witness(g, paths)
    violation = verify_spread_paths(g, query, witness)
    if violation is not None:
        raise AssertionError(f"search produced an invalid witness: {violation.describe()}")
    return SearchVerdict.found(witness, spent)


# ============================================================
# BRUTE-FORCE ORACLE
# ============================================================

def st_paths(g: Graph, query: SpreadPathQuery, max_edges: int, minimal: bool = False) -> Iterator[Path]:
    """
    Every simple (S,T)-path with at most ``max_edges`` edges, in lexicographic order.

    With ``minimal`` only the paths meeting S and T just at their ends are listed.
    """
    sources, targets = query.sources, query.targets
    adj = g.adjacency

    def walk(seq: list[int], used: set[int]) -> Iterator[Path]:
        if len(seq) > max_edges:
            return
        for w in adj[seq[-1]]:
            if w in used or (minimal and w in sources):
                continue
            path = (*seq, w)
            if w in targets and _canonical(query, path):
                yield path
            if minimal and w in targets:
                continue
            seq.append(w)
            used.add(w)
            yield from walk(seq, used)
            used.discard(w)
            seq.pop()

    for s in sorted(sources):
        if s in targets:
            yield (s,)
            if minimal:
                continue
        yield from walk([s], {s})


def triple_oracle(
    g: Graph,
    query: SpreadPathQuery,
    path_length_cap: int | None = None,
    cap: int | None = None,
) -> SearchVerdict[SpreadPathWitness]:
    """
    Decide a spread path query by listing every short (S,T)-path and
    scanning k-sets of pairwise compatible paths.

    Args:
        g: unweighted host with at most ``cap`` vertices
        query: the paths sought
        path_length_cap: longest path considered, in edges (default: |V| - 1)
        cap: vertex cap (default: the configured triple oracle cap)

    Returns:
        Found with the lexicographically first packing; NoneExhaustive when
        the length cap admits every simple path, Inconclusive otherwise

    Raises:
        ResourceLimitError: host above the vertex cap
    """
    cap = get_settings().triple_oracle_cap if cap is None else cap
    if g.vertex_count > cap:
        raise ResourceLimitError(f"oracle refused: {g.vertex_count} vertices exceed the cap of {cap}")
    _require_unweighted(g, query)
    longest = max(g.vertex_count - 1, 0)
    limit = longest if path_length_cap is None else path_length_cap

    paths = list(st_paths(g, query, limit, minimal=query.dist > 0))
    balls = bitsets.ball_masks(g, query.dist)
    masks = [bitsets.to_mask(p) for p in paths]
    zones = [bitsets.zone(m, balls) for m in masks]
    compatible = []
    for i, zone in enumerate(zones):
        row = 0
        for j, mask in enumerate(masks):
            if j != i and not (zone & mask):
                row |= 1 << j
        compatible.append(row)
    logger.debug("Triple oracle: %d candidate paths", len(paths))

    picked: list[int] = []

    def extend(candidates: int) -> bool:
        if len(picked) == query.k:
            return True
        for i in bitsets.bits(candidates):
            picked.append(i)
            if extend(candidates & compatible[i] & ~((1 << (i + 1)) - 1)):
                return True
            picked.pop()
        return False

    if extend((1 << len(paths)) - 1):
        return SearchVerdict.found(_witness(g, [paths[i] for i in picked]), len(paths))
    if limit >= longest:
        return SearchVerdict.none_exhaustive(len(paths))
    return SearchVerdict.inconclusive(len(paths))
