"""
Finite Graphs and Distances
===========================
Immutable finite graphs on dense integer vertex ids, optionally carrying
exact positive rational edge lengths, together with the distance queries
and elementary transformations the rest of the toolkit is built on.

Unweighted distances come from breadth-first search, weighted ones from a
label-setting sweep over exact ``Fraction`` lengths. Unreachable vertices
sit at ``INFINITY``.
"""

from __future__ import annotations

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path as _csgraph_shortest_path

from coarsegraph.config import get_settings
from coarsegraph.errors import GraphError, ResourceLimitError

logger = logging.getLogger(__name__)

INFINITY = math.inf
UNREACHABLE = -1  # marker inside integer distance matrices only

Distance = Union[int, Fraction, float]
Edge = tuple[int, int]


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise GraphError(f"refusing inexact float {value!r}; pass a Fraction or 'num/den'")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise GraphError(f"not a rational number: {value!r}") from None


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


# ============================================================
# GRAPH TYPE
# ============================================================

@dataclass(frozen=True)
class Graph:
    """
    Finite simple undirected graph on vertices ``0..vertex_count-1``.

    ``edges`` is sorted lexicographically with ``u < v`` in every pair;
    ``weights`` (when present) is aligned with ``edges``. Build instances
    through :meth:`from_edges` unless the edge tuple is already normalised.
    """

    vertex_count: int
    edges: tuple[Edge, ...]
    weights: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        n = self.vertex_count
        if n < 0:
            raise GraphError(f"vertex_count must be non-negative, got {n}")
        previous = (-1, -1)
        for edge in self.edges:
            u, v = edge
            if not 0 <= u < v < n:
                raise GraphError(f"edge {edge} is a loop or out of range for {n} vertices")
            if edge <= previous:
                raise GraphError(f"edges must be sorted and unique; {edge} follows {previous}")
            previous = edge
        if self.weights is not None:
            if len(self.weights) != len(self.edges):
                raise GraphError("weights must align with edges")
            for edge, w in zip(self.edges, self.weights):
                if not isinstance(w, Fraction) or w <= 0:
                    raise GraphError(f"edge {edge} has non-positive or non-rational weight {w!r}")

    @classmethod
    def from_edges(
        cls,
        vertex_count: int,
        edges: Iterable[Sequence[int]],
        weights: Mapping[Edge, object] | Sequence[object] | None = None,
    ) -> "Graph":
        """
        Normalise an edge list into a Graph.

        Args:
            vertex_count: number of vertices
            edges: unordered vertex pairs, any orientation and order
            weights: either a mapping from edge to length or a sequence aligned
                with ``edges``; ``None`` for an unweighted graph

        Raises:
            GraphError: on loops, parallel edges, bad ids or bad weights
        """
        pairs = [tuple(e) for e in edges]
        normalised = []
        for pair in pairs:
            if len(pair) != 2:
                raise GraphError(f"edge {pair!r} is not a vertex pair")
            u, v = int(pair[0]), int(pair[1])
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            normalised.append(edge_key(u, v))

        lengths = None
        if weights is not None:
            if isinstance(weights, Mapping):
                lookup = {edge_key(*k): as_rational(w) for k, w in weights.items()}
                try:
                    lengths = [lookup[e] for e in normalised]
                except KeyError as exc:
                    raise GraphError(f"no weight given for edge {exc.args[0]}") from None
            else:
                if len(weights) != len(normalised):
                    raise GraphError("weights must align with edges")
                lengths = [as_rational(w) for w in weights]

        order = sorted(range(len(normalised)), key=normalised.__getitem__)
        sorted_edges = tuple(normalised[i] for i in order)
        for a, b in zip(sorted_edges, sorted_edges[1:]):
            if a == b:
                raise GraphError(f"parallel edge {a}")
        sorted_weights = None if lengths is None else tuple(lengths[i] for i in order)
        return cls(vertex_count, sorted_edges, sorted_weights)

    # --------------------------------------------------------
    # Structure
    # --------------------------------------------------------

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def vertices(self) -> range:
        return range(self.vertex_count)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Sorted neighbour tuples, indexed by vertex."""
        nbrs: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(adj)) for adj in nbrs)

    @cached_property
    def weighted_adjacency(self) -> tuple[tuple[tuple[int, Fraction], ...], ...]:
        nbrs: list[list[tuple[int, Fraction]]] = [[] for _ in range(self.vertex_count)]
        lengths = self.weights or (Fraction(1),) * len(self.edges)
        for (u, v), w in zip(self.edges, lengths):
            nbrs[u].append((v, w))
            nbrs[v].append((u, w))
        return tuple(tuple(sorted(adj)) for adj in nbrs)

    @cached_property
    def _edge_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self._edge_index

    def edge_weight(self, u: int, v: int) -> Fraction:
        try:
            i = self._edge_index[edge_key(u, v)]
        except KeyError:
            raise GraphError(f"no edge {edge_key(u, v)}") from None
        return Fraction(1) if self.weights is None else self.weights[i]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def check_vertices(self, vertices: Iterable[int], what: str = "vertex set") -> frozenset[int]:
        members = frozenset(vertices)
        for v in members:
            if not 0 <= v < self.vertex_count:
                raise GraphError(f"{what} mentions vertex {v} outside 0..{self.vertex_count - 1}")
        return members

    @cached_property
    def _apsp(self) -> np.ndarray:
        n = self.vertex_count
        if n == 0:
            return np.zeros((0, 0), dtype=np.int64)
        if self.edges:
            us, vs = np.array(self.edges, dtype=np.int64).T
        else:
            us = vs = np.zeros(0, dtype=np.int64)
        adj = csr_matrix(
            (np.ones(len(us), dtype=np.int8), (us, vs)), shape=(n, n)
        )
        raw = _csgraph_shortest_path(adj, directed=False, unweighted=True)
        table = np.full((n, n), UNREACHABLE, dtype=np.int64)
        finite = np.isfinite(raw)
        table[finite] = raw[finite].astype(np.int64)
        return table

    # --------------------------------------------------------
    # Interop
    # --------------------------------------------------------

    def to_networkx(self):
        import networkx as nx

        out = nx.Graph()
        out.add_nodes_from(range(self.vertex_count))
        if self.weights is None:
            out.add_edges_from(self.edges)
        else:
            out.add_weighted_edges_from((u, v, w) for (u, v), w in zip(self.edges, self.weights))
        return out

    @classmethod
    def from_networkx(cls, nxg, weight: str | None = None) -> "Graph":
        """Relabel a networkx graph's nodes (sorted when possible) onto ``0..n-1``."""
        nodes = list(nxg.nodes())
        try:
            nodes = sorted(nodes)
        except TypeError:
            pass
        index = {node: i for i, node in enumerate(nodes)}
        edges = [(index[a], index[b]) for a, b in nxg.edges()]
        weights = None
        if weight is not None:
            weights = [_exact(data[weight]) for _, _, data in nxg.edges(data=True)]
        return cls.from_edges(len(nodes), edges, weights)


def _exact(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(str(value))
    return as_rational(value)


# ============================================================
# DISTANCES
# ============================================================

@dataclass(frozen=True)
class DistanceTable:
    """Shortest-path distance from a source set to every vertex."""

    sources: frozenset[int]
    dist: tuple[Distance, ...]

    def __getitem__(self, v: int) -> Distance:
        return self.dist[v]

    def __len__(self) -> int:
        return len(self.dist)

    def within(self, radius) -> frozenset[int]:
        return frozenset(v for v, d in enumerate(self.dist) if d <= radius)

    def reachable(self) -> frozenset[int]:
        return frozenset(v for v, d in enumerate(self.dist) if d != INFINITY)


def _sources(g: Graph, sources: Iterable[int], what: str = "source set") -> frozenset[int]:
    members = g.check_vertices(sources, what)
    if not members:
        raise GraphError(f"{what} must be non-empty")
    return members


def _bfs(g: Graph, sources: Iterable[int], limit: float, allowed=None) -> dict[int, int]:
    adjacency = g.adjacency
    seen = {s: 0 for s in sorted(sources)}
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        du = seen[u]
        if du + 1 > limit:
            continue
        for w in adjacency[u]:
            if w not in seen and (allowed is None or w in allowed):
                seen[w] = du + 1
                queue.append(w)
    return seen


def _dijkstra(g: Graph, sources: Iterable[int], limit, allowed=None) -> dict[int, Fraction]:
    adjacency = g.weighted_adjacency
    best: dict[int, Fraction] = {}
    heap = [(Fraction(0), s) for s in sorted(sources)]
    heapq.heapify(heap)
    while heap:
        du, u = heapq.heappop(heap)
        if u in best:
            continue
        best[u] = du
        for w, length in adjacency[u]:
            if w in best or (allowed is not None and w not in allowed):
                continue
            dw = du + length
            if dw <= limit:
                heapq.heappush(heap, (dw, w))
    return best


def bounded_sweep(g: Graph, sources: Iterable[int], radius=INFINITY, allowed=None) -> dict[int, Distance]:
    """
    Distances from a source set, truncated at a radius.

    Args:
        g: host graph
        sources: non-empty source vertices
        radius: only vertices at distance <= radius are reported
        allowed: optional vertex set the sweep may not leave

    Returns:
        dict vertex -> distance for every vertex within the radius
    """
    members = _sources(g, sources)
    if radius < 0:
        raise GraphError(f"radius must be non-negative, got {radius}")
    if allowed is not None:
        members = members & frozenset(allowed)
        if not members:
            return {}
    if g.is_weighted:
        return _dijkstra(g, members, radius, allowed)
    return _bfs(g, members, radius, allowed)


def distances(g: Graph, sources: Iterable[int]) -> DistanceTable:
    """
    Multi-source shortest-path distances.

    Raises:
        GraphError: if the source set is empty or out of range
    """
    members = _sources(g, sources)
    reached = bounded_sweep(g, members)
    table = tuple(reached.get(v, INFINITY) for v in range(g.vertex_count))
    return DistanceTable(members, table)


def set_distance(g: Graph, x: Iterable[int], y: Iterable[int]) -> Distance:
    """Length of a shortest (X, Y)-path; 0 when the sets meet, INFINITY when none exists."""
    xs = _sources(g, x, "first set")
    ys = _sources(g, y, "second set")
    if not xs.isdisjoint(ys):
        return 0
    if len(ys) < len(xs):
        xs, ys = ys, xs
    if g.is_weighted:
        adjacency = g.weighted_adjacency
        best: set[int] = set()
        heap = [(Fraction(0), s) for s in sorted(xs)]
        heapq.heapify(heap)
        while heap:
            du, u = heapq.heappop(heap)
            if u in best:
                continue
            if u in ys:
                return du
            best.add(u)
            for w, length in adjacency[u]:
                if w not in best:
                    heapq.heappush(heap, (du + length, w))
        return INFINITY
    adjacency = g.adjacency
    seen = {s: 0 for s in xs}
    queue = deque(sorted(xs))
    while queue:
        u = queue.popleft()
        for w in adjacency[u]:
            if w not in seen:
                if w in ys:
                    return seen[u] + 1
                seen[w] = seen[u] + 1
                queue.append(w)
    return INFINITY


def neighborhood(g: Graph, y: Iterable[int], r) -> frozenset[int]:
    """The closed r-neighbourhood N^r[Y]: every vertex within distance r of Y."""
    return frozenset(bounded_sweep(g, y, r))


def is_connected_set(g: Graph, y: Iterable[int]) -> bool:
    """True iff Y is non-empty and induces a connected subgraph."""
    members = g.check_vertices(y)
    if not members:
        return False
    start = min(members)
    return len(_bfs(g, [start], INFINITY, members)) == len(members)


def components(g: Graph, within: Iterable[int] | None = None) -> list[frozenset[int]]:
    """Connected components of G (or of G[within]), ordered by smallest vertex."""
    pool = set(range(g.vertex_count)) if within is None else set(g.check_vertices(within))
    allowed = None if within is None else frozenset(pool)
    found = []
    for v in sorted(pool):
        if v in pool:
            comp = frozenset(_bfs(g, [v], INFINITY, allowed))
            pool -= comp
            found.append(comp)
    return found


def shortest_path(g: Graph, x: Iterable[int], y: Iterable[int], within: Iterable[int] | None = None) -> list[int] | None:
    """
    A shortest (X, Y)-path, optionally inside a vertex set.

    Ties are broken towards smaller vertex ids, so the result is deterministic.

    Returns:
        the vertex sequence from a vertex of X to a vertex of Y, or None
    """
    xs = _sources(g, x, "first set")
    ys = _sources(g, y, "second set")
    allowed = None if within is None else frozenset(within)
    if allowed is not None:
        xs = xs & allowed
        ys = ys & allowed
        if not xs or not ys:
            return None
    hit = sorted(xs & ys)
    if hit:
        return [hit[0]]

    parent: dict[int, int | None] = {}
    if g.is_weighted:
        adjacency = g.weighted_adjacency
        heap = [(Fraction(0), s, -1) for s in sorted(xs)]
        heapq.heapify(heap)
        end = None
        while heap:
            du, u, p = heapq.heappop(heap)
            if u in parent:
                continue
            parent[u] = None if p < 0 else p
            if u in ys:
                end = u
                break
            for w, length in adjacency[u]:
                if w not in parent and (allowed is None or w in allowed):
                    heapq.heappush(heap, (du + length, w, u))
    else:
        adjacency = g.adjacency
        for s in sorted(xs):
            parent[s] = None
        queue = deque(sorted(xs))
        end = None
        while queue and end is None:
            u = queue.popleft()
            for w in adjacency[u]:
                if w in parent or (allowed is not None and w not in allowed):
                    continue
                parent[w] = u
                if w in ys:
                    end = w
                    break
                queue.append(w)
    if end is None:
        return None
    path = [end]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def distance_matrix(g: Graph, cap: int | None = None) -> np.ndarray:
    """
    All-pairs hop distances as an int64 matrix (UNREACHABLE = -1).

    The matrix is computed once per graph and cached on it.

    Raises:
        GraphError: for weighted graphs
        ResourceLimitError: above the all-pairs cap
    """
    if g.is_weighted:
        raise GraphError("distance_matrix is defined for unweighted graphs only")
    cap = get_settings().all_pairs_cap if cap is None else cap
    if g.vertex_count > cap:
        raise ResourceLimitError(
            f"all-pairs table refused for {g.vertex_count} vertices (cap {cap})"
        )
    return g._apsp


def diameter(g: Graph) -> Distance:
    """Largest finite distance between two vertices (0 for graphs with < 2 vertices)."""
    best: Distance = 0
    for v in range(g.vertex_count):
        reach = bounded_sweep(g, [v])
        best = max(best, max(reach.values()))
    return best


# ============================================================
# TRANSFORMATIONS
# ============================================================

class Relabeled(NamedTuple):
    graph: Graph
    relabel: dict[int, int]   # old id -> new id


class Subdivision(NamedTuple):
    graph: Graph
    originals: tuple[int, ...]
    chains: dict[Edge, tuple[int, ...]]   # internal vertices, ordered from u to v


def induced_subgraph(g: Graph, z: Iterable[int]) -> Relabeled:
    """G[Z], relabelled onto ``0..|Z|-1`` in increasing order of the old ids."""
    members = sorted(g.check_vertices(z))
    relabel = {v: i for i, v in enumerate(members)}
    edges, lengths = [], []
    for idx, (u, v) in enumerate(g.edges):
        if u in relabel and v in relabel:
            edges.append((relabel[u], relabel[v]))
            if g.weights is not None:
                lengths.append(g.weights[idx])
    return Relabeled(Graph.from_edges(len(members), edges, lengths if g.is_weighted else None), relabel)


def subdivide(g: Graph, k: int) -> Subdivision:
    """
    The k-subdivision: every edge becomes a path with exactly k internal vertices.

    Original vertices keep their ids; internal vertices are numbered edge by
    edge in edge order, each chain running from the smaller endpoint.
    """
    if k < 1:
        raise GraphError(f"subdivision length must be at least 1, got {k}")
    if g.is_weighted:
        raise GraphError("subdivide expects an unweighted graph")
    next_id = g.vertex_count
    edges: list[Edge] = []
    chains: dict[Edge, tuple[int, ...]] = {}
    for u, v in g.edges:
        internal = tuple(range(next_id, next_id + k))
        next_id += k
        chains[(u, v)] = internal
        walk = (u, *internal, v)
        edges.extend(zip(walk, walk[1:]))
    return Subdivision(Graph.from_edges(next_id, edges), tuple(range(g.vertex_count)), chains)


def contract_edge(g: Graph, e: Sequence[int]) -> Graph:
    """
    Simple-graph contraction of one edge.

    The larger endpoint is merged into the smaller one and later ids shift
    down by one. Loops disappear; parallel edges collapse, keeping the
    smaller length.
    """
    u, v = edge_key(*e)
    if not g.has_edge(u, v):
        raise GraphError(f"cannot contract missing edge {(u, v)}")

    def image(w: int) -> int:
        if w == v:
            return u
        return w - 1 if w > v else w

    merged: dict[Edge, Fraction] = {}
    lengths = g.weights or (Fraction(1),) * len(g.edges)
    for (a, b), w in zip(g.edges, lengths):
        a2, b2 = image(a), image(b)
        if a2 == b2:
            continue
        key = edge_key(a2, b2)
        if key not in merged or w < merged[key]:
            merged[key] = w
    keys = list(merged)
    return Graph.from_edges(g.vertex_count - 1, keys, [merged[k] for k in keys] if g.is_weighted else None)


def power_graph(g: Graph, k: int) -> Graph:
    """
    The k-th power G^k: same vertices, uv an edge iff 1 <= dist_G(u, v) <= k.

    Raises:
        GraphError: for weighted input or k < 1
    """
    if g.is_weighted:
        raise GraphError("power_graph expects an unweighted graph")
    if k < 1:
        raise GraphError(f"power must be at least 1, got {k}")
    edges = []
    for u in range(g.vertex_count):
        for w, d in _bfs(g, [u], k).items():
            if w > u and d >= 1:
                edges.append((u, w))
    return Graph.from_edges(g.vertex_count, edges)


def scale_weights(g: Graph, factor) -> Graph:
    """Multiply every edge length by a positive rational (unit lengths when unweighted)."""
    factor = as_rational(factor)
    if factor <= 0:
        raise GraphError(f"scale factor must be positive, got {factor}")
    lengths = g.weights or (Fraction(1),) * len(g.edges)
    return Graph(g.vertex_count, g.edges, tuple(w * factor for w in lengths))


# ============================================================
# NAMED GRAPHS
# ============================================================

def empty_graph(n: int) -> Graph:
    return Graph(n, ())


def path_graph(n: int) -> Graph:
    """Path on n vertices 0-1-...-(n-1)."""
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError(f"a cycle needs at least 3 vertices, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    """Centre 0 joined to leaves 1..leaves."""
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


_FAMILIES = {"k": complete_graph, "p": path_graph, "c": cycle_graph, "s": star_graph}


def pattern_by_name(name: str) -> Graph:
    """
    Small named pattern graphs.

    ``k<n>`` complete, ``p<n>`` path on n vertices, ``c<n>`` cycle,
    ``s<n>`` star with n leaves, ``h<n>`` the two-clique graph H and
    ``ht<n>`` its twisted copy (e.g. ``k3``, ``p4``, ``c4``, ``h4``).
    """
    key = name.strip().lower()
    if key.startswith("ht") and key[2:].isdigit():
        from coarsegraph.constructions import build_h_twisted

        return build_h_twisted(int(key[2:])).graph
    family, digits = key[:1], key[1:]
    if family == "h" and digits.isdigit():
        from coarsegraph.constructions import build_h

        return build_h(int(digits)).graph
    if family not in _FAMILIES or not digits.isdigit():
        raise GraphError(f"unknown pattern name {name!r}")
    return _FAMILIES[family](int(digits))
