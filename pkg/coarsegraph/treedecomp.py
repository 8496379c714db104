"""
Tree Decompositions
===================
Validation and width of tree decompositions, the explicit small-width
decompositions of the binary-tree-with-leaf-path graph and of the N-gadget,
and two brute-force treewidth oracles for tiny graphs.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from coarsegraph import bitsets
from coarsegraph.config import get_settings
from coarsegraph.constructions import NGadget
from coarsegraph.errors import DecompositionError, ResourceLimitError
from coarsegraph.graph import Graph, is_connected_set

logger = logging.getLogger(__name__)

Bag = tuple[int, ...]


# ============================================================
# TYPES
# ============================================================

@dataclass(frozen=True)
class TreeDecomposition:
    """Bags indexed by the nodes of a tree; ``bags[x]`` is the bag of tree node x."""

    tree: Graph
    bags: tuple[Bag, ...]

    def __post_init__(self):
        bags = tuple(tuple(sorted(set(int(v) for v in bag))) for bag in self.bags)
        object.__setattr__(self, "bags", bags)
        nodes = self.tree.vertex_count
        if len(bags) != nodes:
            raise DecompositionError(f"{len(bags)} bags for a tree with {nodes} nodes")
        if nodes == 0:
            raise DecompositionError("a tree decomposition needs at least one node")
        if self.tree.edge_count != nodes - 1 or not is_connected_set(self.tree, range(nodes)):
            raise DecompositionError("decomposition index structure is not a tree")

    @classmethod
    def from_parts(cls, tree_edges: Iterable[Sequence[int]], bags: Sequence[Iterable[int]]) -> "TreeDecomposition":
        bag_list = [tuple(b) for b in bags]
        return cls(Graph.from_edges(len(bag_list), tree_edges), tuple(bag_list))


def width(td: TreeDecomposition) -> int:
    """Largest bag size minus one."""
    return max(len(bag) for bag in td.bags) - 1


class DecompositionViolationKind(str, Enum):
    BAG_OUT_OF_RANGE = "bag-out-of-range"
    VERTEX_MISSING = "vertex-missing"
    VERTEX_DISCONNECTED = "vertex-disconnected"
    EDGE_UNCOVERED = "edge-uncovered"


@dataclass(frozen=True)
class DecompositionViolation:
    kind: DecompositionViolationKind
    vertices: tuple[int, ...]
    nodes: tuple[int, ...] = ()

    def describe(self) -> str:
        what = {
            DecompositionViolationKind.BAG_OUT_OF_RANGE: "bag mentions vertex",
            DecompositionViolationKind.VERTEX_MISSING: "no bag contains vertex",
            DecompositionViolationKind.VERTEX_DISCONNECTED: "bags containing vertex are disconnected",
            DecompositionViolationKind.EDGE_UNCOVERED: "no bag contains edge",
        }[self.kind]
        nodes = f" (nodes {list(self.nodes)})" if self.nodes else ""
        return f"{self.kind.value}: {what} {self.vertices}{nodes}"

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "vertices": list(self.vertices), "nodes": list(self.nodes)}


# ============================================================
# VALIDATION
# ============================================================

def validate(g: Graph, td: TreeDecomposition) -> DecompositionViolation | None:
    """
    Check the tree-decomposition axioms.

    Order of checks: bags out of range, then every vertex in id order
    (missing before disconnected), then every edge in edge order.

    Returns:
        None if td is a tree decomposition of g, otherwise the first violation
    """
    n = g.vertex_count
    occurrences: list[list[int]] = [[] for _ in range(n)]
    for node, bag in enumerate(td.bags):
        for v in bag:
            if not 0 <= v < n:
                return DecompositionViolation(DecompositionViolationKind.BAG_OUT_OF_RANGE, (v,), (node,))
            occurrences[v].append(node)

    internal = [0] * n
    bag_sets = [frozenset(bag) for bag in td.bags]
    for a, b in td.tree.edges:
        small, large = (bag_sets[a], bag_sets[b]) if len(bag_sets[a]) <= len(bag_sets[b]) else (bag_sets[b], bag_sets[a])
        for v in small:
            if v in large:
                internal[v] += 1

    for v in range(n):
        if not occurrences[v]:
            return DecompositionViolation(DecompositionViolationKind.VERTEX_MISSING, (v,))
        if len(occurrences[v]) - internal[v] != 1:
            return DecompositionViolation(
                DecompositionViolationKind.VERTEX_DISCONNECTED, (v,), tuple(occurrences[v])
            )

    for u, v in g.edges:
        a, b = (u, v) if len(occurrences[u]) <= len(occurrences[v]) else (v, u)
        if not any(b in bag_sets[x] for x in occurrences[a]):
            return DecompositionViolation(DecompositionViolationKind.EDGE_UNCOVERED, (u, v))
    return None


# ============================================================
# EXPLICIT DECOMPOSITIONS
# ============================================================

class _BagTree:
    def __init__(self):
        self.bags: list[Bag] = []
        self.edges: list[tuple[int, int]] = []

    def add(self, bag: Iterable[int], attach: int | None = None) -> int:
        node = len(self.bags)
        self.bags.append(tuple(bag))
        if attach is not None:
            self.edges.append((attach, node))
        return node

    def build(self) -> TreeDecomposition:
        return TreeDecomposition.from_parts(self.edges, self.bags)


def _leaf_path_bags(depth: int, out: _BagTree) -> int:
    """
    Lay the width-3 decomposition of the depth-``depth`` tree with leaf path
    (heap-order ids) into ``out``; returns the node holding the root's top bag.

    For a node z with children a, b the bags are
        {z, a, lo(a), hi(a)} - {z, lo(a), hi(a), lo(b)} - {z, lo(a), lo(b), hi(b)}
        {z, b, lo(b), hi(b)} hanging off the third, and the top bag
        {z, lo(a), hi(b)} hanging off the third as well,
    where lo/hi are the extreme leaves below a vertex.
    """
    first_leaf = 2 ** depth - 1

    def lo(v: int) -> int:
        while v < first_leaf:
            v = 2 * v + 1
        return v

    def hi(v: int) -> int:
        while v < first_leaf:
            v = 2 * v + 2
        return v

    def lay(z: int) -> int:
        if z >= first_leaf:
            return out.add((z,))
        a, b = 2 * z + 1, 2 * z + 2
        top_a, top_b = lay(a), lay(b)
        x1 = out.add((z, a, lo(a), hi(a)), top_a)
        x2 = out.add((z, lo(a), hi(a), lo(b)), x1)
        x3 = out.add((z, lo(a), lo(b), hi(b)), x2)
        y = out.add((z, b, lo(b), hi(b)), x3)
        out.edges.append((y, top_b))
        return out.add((z, lo(z), hi(z)), x3)

    return lay(0)


def decompose_tree_leaf_path(d: int) -> TreeDecomposition:
    """Width-at-most-3 decomposition of ``build_tree_leaf_path(d)``."""
    if d < 1:
        raise DecompositionError(f"depth must be at least 1, got {d}")
    out = _BagTree()
    _leaf_path_bags(d, out)
    return out.build()


def decompose_n_gadget(ng: NGadget) -> TreeDecomposition:
    """
    Width-at-most-7 decomposition of an N-gadget.

    The gadget with every dotted path shortened to an edge, and the thick
    vertices paired as {p_1, p_2}, {p_3, p_4}, ..., is a contraction of the
    depth-(d+1) tree with leaf path: the two deep children of leaf i stand
    for the pairs holding p_(2i-1) and p_(2i+2). Its width-3 decomposition
    is mapped through the contraction with every pair restored (bags at
    most double), then each dotted path u..v gets a chain of bags
    {w_j, w_(j+1), v} hanging off a bag that holds both u and v.
    """
    labels = ng.labels
    d, s = ng.params.d, ng.params.s
    deep = _BagTree()
    _leaf_path_bags(d + 1, deep)

    first_deep_leaf = 2 ** (d + 1) - 1
    thick = labels.thick
    tree = labels.tree_vertices

    def image(v: int) -> tuple[int, ...]:
        if v < first_deep_leaf:
            return (tree[v],)
        j = v - first_deep_leaf + 1              # 1-based deep leaf
        m = (j + 1) // 2 if j % 2 else j // 2 + 1  # pair index holding the contact
        return thick[2 * m - 2], thick[2 * m - 1]

    out = _BagTree()
    out.bags = [tuple(sorted({w for v in bag for w in image(v)})) for bag in deep.bags]
    out.edges = list(deep.edges)

    if s >= 2:
        walks = [*labels.segments, *labels.pendants_left, *labels.pendants_right]
        wanted = {frozenset((walk[0], walk[-1])) for walk in walks}
        holder: dict[frozenset, int] = {}
        for node, bag in enumerate(out.bags):
            for u, v in itertools.combinations(bag, 2):
                key = frozenset((u, v))
                if key in wanted and key not in holder:
                    holder[key] = node
        for walk in walks:
            end = walk[-1]
            attach = holder[frozenset((walk[0], end))]
            for j in range(len(walk) - 2):
                attach = out.add((walk[j], walk[j + 1], end), attach)

    td = out.build()
    logger.info("Gadget decomposition (d=%d, s=%d): %d bags, width %d", d, s, len(td.bags), width(td))
    return td


# ============================================================
# TREEWIDTH ORACLES
# ============================================================

def _q_size(adj: Sequence[int], inner: int, v: int) -> int:
    """Vertices outside inner + v reachable from v through inner."""
    reached = 1 << v
    frontier = reached
    boundary = 0
    while frontier:
        grown = bitsets.neighbours(frontier, adj)
        boundary |= grown & ~inner & ~(1 << v)
        frontier = grown & inner & ~reached
        reached |= frontier
    return bin(boundary).count("1")


def optimal_elimination_order(g: Graph, cap: int | None = None) -> tuple[int, list[int]]:
    """
    Exact treewidth with an optimal elimination order, by dynamic
    programming over vertex subsets: TW(S) = min over v in S of
    max(TW(S - v), |Q(S - v, v)|).

    Raises:
        ResourceLimitError: above the treewidth cap
    """
    cap = get_settings().treewidth_cap if cap is None else cap
    n = g.vertex_count
    if n > cap:
        raise ResourceLimitError(f"exact treewidth refused: {n} vertices exceed the cap of {cap}")
    if n == 0:
        return -1, []
    adj = bitsets.adjacency_masks(g)
    size = 1 << n
    tw = [0] * size
    last = [0] * size
    tw[0] = -1
    for subset in range(1, size):
        best, arg = n, -1
        rest = subset
        while rest:
            low = rest & -rest
            rest ^= low
            v = low.bit_length() - 1
            prior = subset ^ low
            value = max(tw[prior], _q_size(adj, prior, v))
            if value < best:
                best, arg = value, v
        tw[subset], last[subset] = best, arg
    order = []
    subset = size - 1
    while subset:
        v = last[subset]
        order.append(v)
        subset ^= 1 << v
    order.reverse()
    return tw[size - 1], order


def exact_treewidth(g: Graph, cap: int | None = None) -> int:
    """Exact treewidth of a small graph (-1 for the empty graph)."""
    return optimal_elimination_order(g, cap)[0]


def _elimination_width(g: Graph, order: Sequence[int]) -> int:
    nbrs = [set(adj) for adj in g.adjacency]
    worst = -1
    for v in order:
        higher = nbrs[v]
        worst = max(worst, len(higher))
        for a in higher:
            nbrs[a].discard(v)
            nbrs[a].update(higher - {a})
        nbrs[v] = set()
    return worst


def treewidth_by_orderings(g: Graph, cap: int = 8) -> int:
    """Treewidth as the best elimination width over every vertex ordering."""
    if g.vertex_count > cap:
        raise ResourceLimitError(f"ordering oracle refused: {g.vertex_count} vertices exceed the cap of {cap}")
    if g.vertex_count == 0:
        return -1
    return min(_elimination_width(g, order) for order in itertools.permutations(range(g.vertex_count)))


def decomposition_from_order(g: Graph, order: Sequence[int]) -> TreeDecomposition:
    """
    The tree decomposition of an elimination order: the bag of v holds v and
    its later neighbours in the fill-in graph, hung below the earliest of them.
    """
    n = g.vertex_count
    if sorted(order) != list(range(n)):
        raise DecompositionError("elimination order must list every vertex exactly once")
    if n == 0:
        return TreeDecomposition.from_parts([], [()])
    position = {v: i for i, v in enumerate(order)}
    nbrs = [set(adj) for adj in g.adjacency]
    bags, edges = [], []
    for i, v in enumerate(order):
        higher = nbrs[v]
        bags.append((v, *sorted(higher)))
        if i + 1 < n:
            parent = min((position[w] for w in higher), default=i + 1)
            edges.append((i, parent))
        for a in higher:
            nbrs[a].discard(v)
            nbrs[a].update(higher - {a})
        nbrs[v] = set()
    return TreeDecomposition.from_parts(edges, bags)
