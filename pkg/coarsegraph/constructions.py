"""
Graph Constructions
===================
Builders for the counterexample family: the binary tree with a path through
its leaves, the N-gadget hung below it, the two-clique pattern H and the
full assembly G that wires two subdivided cliques into a gadget. Every
builder returns the graph together with a landmark table, and the module
also builds the explicit 2-fat model of H inside an assembly.

Vertex layout (all 1-based names below refer to the usual labels):

    tree       heap order, root 0, children 2i+1 and 2i+2
    leaves     2^d - 1 .. 2^(d+1) - 2, left to right
    thick      p_1 .. p_(2L+2) right after the tree (L = 2^d)
    bottom     s - 1 internal vertices per segment p_j .. p_(j+1)
    pendants   s - 1 internal vertices per pendant, leaf by leaf, left first
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb

from coarsegraph.config import get_settings
from coarsegraph.errors import GraphError, ResourceLimitError, WitnessError
from coarsegraph.graph import Graph, complete_graph, neighborhood, subdivide

logger = logging.getLogger(__name__)

Path = tuple[int, ...]


# ============================================================
# SHARED HELPERS
# ============================================================

class _Builder:
    """Accumulates vertices and edges; paths are laid down with fresh internals."""

    def __init__(self):
        self.count = 0
        self.edges: list[tuple[int, int]] = []

    def add_vertices(self, k: int) -> range:
        block = range(self.count, self.count + k)
        self.count += k
        return block

    def add_edge(self, u: int, v: int) -> None:
        self.edges.append((u, v))

    def add_path(self, a: int, b: int, length: int) -> Path:
        """Join a to b by a new path with ``length`` edges; returns the full walk a..b."""
        walk = (a, *self.add_vertices(length - 1), b)
        self.edges.extend(zip(walk, walk[1:]))
        return walk

    def build(self) -> Graph:
        return Graph.from_edges(self.count, self.edges)


def _guard(count: int, max_vertices: int | None, what: str) -> None:
    limit = get_settings().max_vertices if max_vertices is None else max_vertices
    if count > limit:
        raise ResourceLimitError(
            f"{what} would have {count} vertices, above the limit of {limit} "
            f"(raise COARSEGRAPH_MAX_VERTICES to allow it)"
        )
    if count > 100_000:
        logger.info("Building %s with %d vertices", what, count)


def _positive(**values: int) -> None:
    for name, value in values.items():
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise GraphError(f"{name} must be a positive integer, got {value!r}")


# ============================================================
# BINARY TREE WITH LEAF PATH
# ============================================================

@dataclass(frozen=True)
class TreeLeafPath:
    graph: Graph
    depth: int
    root: int
    leaves: Path

    def children(self, v: int) -> tuple[int, int] | None:
        if v >= 2 ** self.depth - 1:
            return None
        return 2 * v + 1, 2 * v + 2


def _lay_tree(builder: _Builder, d: int) -> tuple[range, Path]:
    tree = builder.add_vertices(2 ** (d + 1) - 1)
    internal = 2 ** d - 1
    for v in range(internal):
        builder.add_edge(tree[v], tree[2 * v + 1])
        builder.add_edge(tree[v], tree[2 * v + 2])
    return tree, tuple(tree[internal:])


def build_tree_leaf_path(d: int) -> TreeLeafPath:
    """
    Complete binary tree of depth d plus a path through its leaves in planar order.

    The result has 2^(d+1) - 1 vertices; d = 1 gives a triangle.
    """
    _positive(d=d)
    builder = _Builder()
    tree, leaves = _lay_tree(builder, d)
    for a, b in zip(leaves, leaves[1:]):
        builder.add_edge(a, b)
    return TreeLeafPath(builder.build(), d, tree[0], leaves)


# ============================================================
# N-GADGET
# ============================================================

@dataclass(frozen=True)
class GadgetParams:
    d: int
    s: int

    def __post_init__(self):
        _positive(d=self.d, s=self.s)

    @property
    def leaf_count(self) -> int:
        return 2 ** self.d


@dataclass(frozen=True)
class GadgetLabels:
    """
    Landmarks of an N-gadget, in host vertex ids.

    Lists are 0-based: ``leaves[i - 1]`` is leaf i and ``thick[j - 1]`` is p_j.
    ``segments[j - 1]`` walks p_j .. p_(j+1); pendant walks start at their leaf.
    """

    root: int
    tree_vertices: range
    leaves: Path
    mid_left: Path
    mid_right: Path
    thick: Path
    S: tuple[int, int, int]
    T: tuple[int, int, int]
    segments: tuple[Path, ...]
    pendants_left: tuple[Path, ...]
    pendants_right: tuple[Path, ...]

    def region(self) -> frozenset[int]:
        members = set(self.tree_vertices)
        for walk in (*self.segments, *self.pendants_left, *self.pendants_right):
            members.update(walk)
        return frozenset(members)

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "leaves": list(self.leaves),
            "thick": list(self.thick),
            "S": list(self.S),
            "T": list(self.T),
        }


@dataclass(frozen=True)
class NGadget:
    graph: Graph
    params: GadgetParams
    labels: GadgetLabels


def gadget_vertex_count(p: GadgetParams) -> int:
    """(2L - 1) tree + (2L + 2) thick + (2L + 1)(s - 1) bottom + 2L(s - 1) pendant vertices."""
    two_l = 2 * p.leaf_count
    return (two_l - 1) + (two_l + 2) + (two_l + 1) * (p.s - 1) + two_l * (p.s - 1)


def _lay_gadget(builder: _Builder, p: GadgetParams) -> GadgetLabels:
    L = p.leaf_count
    tree, leaves = _lay_tree(builder, p.d)
    thick = tuple(builder.add_vertices(2 * L + 2))
    segments = tuple(builder.add_path(a, b, p.s) for a, b in zip(thick, thick[1:]))
    lefts, rights = [], []
    for i, leaf in enumerate(leaves, start=1):
        lefts.append(builder.add_path(leaf, thick[2 * i - 2], p.s))     # to p_(2i-1)
        rights.append(builder.add_path(leaf, thick[2 * i + 1], p.s))    # to p_(2i+2)
    half = (p.s + 1) // 2
    root = tree[0]
    return GadgetLabels(
        root=root,
        tree_vertices=tree,
        leaves=leaves,
        mid_left=tuple(walk[half] for walk in lefts),
        mid_right=tuple(walk[half] for walk in rights),
        thick=thick,
        S=(root, thick[0], thick[1]),
        T=(root, thick[-1], thick[-2]),
        segments=segments,
        pendants_left=tuple(lefts),
        pendants_right=tuple(rights),
    )


def build_n_gadget(p: GadgetParams, max_vertices: int | None = None) -> NGadget:
    """
    Build the N-gadget N(d, s).

    Args:
        p: tree depth d and dotted-path length s
        max_vertices: resource guard; defaults to the configured limit

    Raises:
        ResourceLimitError: when the closed-form vertex count exceeds the guard
    """
    _guard(gadget_vertex_count(p), max_vertices, f"N-gadget (d={p.d}, s={p.s})")
    builder = _Builder()
    labels = _lay_gadget(builder, p)
    return NGadget(builder.build(), p, labels)


# ============================================================
# PATTERN H
# ============================================================

@dataclass(frozen=True)
class HGraph:
    graph: Graph
    n: int
    x: Path
    y: Path
    twisted: bool = False


def _cross_pairs(n: int, twisted: bool) -> list[tuple[int, int]]:
    pairs = [(0, 0), (1, 2), (2, 1)] if twisted else [(0, 0), (1, 1), (2, 2)]
    return [(i, n + j) for i, j in pairs]


def _build_h(n: int, twisted: bool) -> HGraph:
    if not isinstance(n, int) or n < 4:
        raise GraphError(f"H needs cliques of size at least 4, got {n!r}")
    x, y = tuple(range(n)), tuple(range(n, 2 * n))
    edges = [(side[i], side[j]) for side in (x, y) for i in range(n) for j in range(i + 1, n)]
    edges += _cross_pairs(n, twisted)
    return HGraph(Graph.from_edges(2 * n, edges), n, x, y, twisted)


def build_h(n: int) -> HGraph:
    """Two disjoint copies of K_n joined by x_1y_1, x_2y_2 and x_3y_3."""
    return _build_h(n, twisted=False)


def build_h_twisted(n: int) -> HGraph:
    """H with the crossings x_2y_3 and x_3y_2 in place of x_2y_2 and x_3y_3."""
    return _build_h(n, twisted=True)


def twist_isomorphism(n: int) -> tuple[int, ...]:
    """Vertex map H -> twisted H swapping y_2 and y_3 (an involution)."""
    image = list(range(2 * n))
    image[n + 1], image[n + 2] = n + 2, n + 1
    return tuple(image)


# ============================================================
# ASSEMBLY G
# ============================================================

@dataclass(frozen=True)
class AssemblyParams:
    n: int
    d: int
    s: int
    t: int
    c: int

    def __post_init__(self):
        _positive(n=self.n, d=self.d, s=self.s, t=self.t, c=self.c)
        if self.n < 3:
            raise GraphError(f"the assembly wires three hubs per side; n={self.n} is too small")

    @property
    def gadget(self) -> GadgetParams:
        return GadgetParams(self.d, self.s)


def paper_params(q: int) -> AssemblyParams:
    """(n, d, s, t, c) = (15, 13q^2, 14q^2, 16q^2, 16q^2)."""
    _positive(q=q)
    sq = q * q
    return AssemblyParams(15, 13 * sq, 14 * sq, 16 * sq, 16 * sq)


def assembly_vertex_count(p: AssemblyParams) -> int:
    star = p.n + comb(p.n, 2) * p.t
    return 2 * star + gadget_vertex_count(p.gadget) + 6 * (p.c - 1)


@dataclass(frozen=True)
class GAssembly:
    """
    The assembled graph G with its landmarks.

    ``left_chains[(i, j)]`` (0-based hubs, i < j) walks x_(i+1)* .. x_(j+1)*;
    ``x_connectors[a]`` walks x_(a+1)* .. S_(a+1), likewise for y and T.
    """

    graph: Graph
    params: AssemblyParams
    x_hubs: Path
    y_hubs: Path
    left_star: frozenset[int]
    right_star: frozenset[int]
    gadget_region: frozenset[int]
    gadget: GadgetLabels
    left_chains: dict[tuple[int, int], Path] = field(repr=False)
    right_chains: dict[tuple[int, int], Path] = field(repr=False)
    x_connectors: tuple[Path, Path, Path] = ()
    y_connectors: tuple[Path, Path, Path] = ()

    def labels(self) -> dict:
        out = self.gadget.to_json()
        out["x_hubs"] = list(self.x_hubs)
        out["y_hubs"] = list(self.y_hubs)
        return out


def _lay_star(builder: _Builder, n: int, t: int) -> tuple[Path, frozenset[int], dict]:
    sub = subdivide(complete_graph(n), t)
    block = builder.add_vertices(sub.graph.vertex_count)
    offset = block.start
    for u, v in sub.graph.edges:
        builder.add_edge(u + offset, v + offset)
    chains = {
        (i, j): (i + offset, *(w + offset for w in internal), j + offset)
        for (i, j), internal in sub.chains.items()
    }
    hubs = tuple(h + offset for h in sub.originals)
    return hubs, frozenset(block), chains


def build_g(p: AssemblyParams, max_vertices: int | None = None) -> GAssembly:
    """
    Build G: two t-subdivided copies of K_n and an N-gadget, joined by six
    connector paths of length c from x_i* to S_i and from y_i* to T_i (i = 1, 2, 3).

    Raises:
        ResourceLimitError: when the closed-form vertex count exceeds the guard
    """
    _guard(assembly_vertex_count(p), max_vertices, f"assembly {p}")
    builder = _Builder()
    x_hubs, left_star, left_chains = _lay_star(builder, p.n, p.t)
    y_hubs, right_star, right_chains = _lay_star(builder, p.n, p.t)
    gadget_start = builder.count
    labels = _lay_gadget(builder, p.gadget)
    gadget_region = frozenset(range(gadget_start, builder.count))
    x_connectors = tuple(builder.add_path(x_hubs[a], labels.S[a], p.c) for a in range(3))
    y_connectors = tuple(builder.add_path(y_hubs[a], labels.T[a], p.c) for a in range(3))
    graph = builder.build()
    logger.info("Assembly %s built: %d vertices, %d edges", p, graph.vertex_count, graph.edge_count)
    return GAssembly(
        graph=graph,
        params=p,
        x_hubs=x_hubs,
        y_hubs=y_hubs,
        left_star=left_star,
        right_star=right_star,
        gadget_region=gadget_region,
        gadget=labels,
        left_chains=left_chains,
        right_chains=right_chains,
        x_connectors=x_connectors,
        y_connectors=y_connectors,
    )


# ============================================================
# 2-FAT WITNESS
# ============================================================

@dataclass(frozen=True)
class TwoFatWitness:
    """
    A verified 2-fat model in an assembly.

    ``pattern`` is the twisted H the strands realise; ``tight_pairs`` lists
    the separated part pairs sitting at distance exactly 2.
    """

    pattern: HGraph
    model: "MinorModel"
    tight_pairs: tuple
    twisted: bool = True

    def as_model_of_h(self) -> "MinorModel":
        """The same part sets indexed by H instead of its twist."""
        from coarsegraph.fatminor import MinorModel

        sigma = twist_isomorphism(self.pattern.n)
        branch = {v: self.model.branch[sigma[v]] for v in self.model.branch}
        connector = {}
        for (u, v), part in self.model.connector.items():
            a, b = sigma[u], sigma[v]
            connector[(min(a, b), max(a, b))] = part
        return MinorModel(branch, connector, self.model.fatness)


def _strand(labels: GadgetLabels, first_leaf: int) -> set[int]:
    """
    Leapfrogging strand through leaves first_leaf, first_leaf + 2, ...

    Each leaf contributes both pendants; consecutive pieces are bridged by
    the bottom segment p_(2i+2) .. p_(2i+3). Odd strands leave through
    segment 2L, even strands enter through segment 2.
    """
    L = len(labels.leaves)
    members: set[int] = set()
    for i in range(first_leaf, L + 1, 2):
        members.update(labels.pendants_left[i - 1])
        members.update(labels.pendants_right[i - 1])
        if i + 2 <= L:
            members.update(labels.segments[2 * i + 1])     # p_(2i+2) .. p_(2i+3)
    if first_leaf == 1:
        members.update(labels.segments[2 * L - 1])        # p_(2L) .. p_(2L+1)
    else:
        members.update(labels.segments[1])                # p_2 .. p_3
    return members


def build_2fat_witness(a: GAssembly) -> TwoFatWitness:
    """
    Construct a 2-fat minor model of (twisted) H in the assembly G.

    Clique vertices get hub balls of radius r = ceil(t/4); clique edges get the
    middle of their subdivided chains; x_1y_1 runs through the tree root and
    the two remaining crossings are realised by two strands that alternate
    leaf by leaf along the bottom path.

    Raises:
        WitnessError: when the parameters are outside d >= 2, s >= 2, t >= 6,
            c >= 4, c > ceil(t/4), n >= 4, or if the model fails to verify
    """
    from coarsegraph.fatminor import MinorModel, separation_profile, verify_model

    p = a.params
    r = -(-p.t // 4)
    if p.d < 2 or p.s < 2 or p.t < 6 or p.c < 4 or p.n < 4 or p.c <= r:
        raise WitnessError(
            f"witness needs d>=2, s>=2, t>=6, c>=4, c>ceil(t/4), n>=4; got {p}"
        )
    g = a.graph
    n = p.n
    pattern = build_h_twisted(n)

    branch = {}
    for i in range(n):
        branch[i] = neighborhood(g, [a.x_hubs[i]], r)
        branch[n + i] = neighborhood(g, [a.y_hubs[i]], r)

    connector: dict[tuple[int, int], frozenset[int]] = {}
    for side, chains in ((0, a.left_chains), (n, a.right_chains)):
        for (i, j), walk in chains.items():
            connector[(side + i, side + j)] = frozenset(walk[r:len(walk) - r])

    def tail(walk: Path) -> set[int]:
        return set(walk[r:])

    labels = a.gadget
    connector[(0, n)] = frozenset(tail(a.x_connectors[0]) | tail(a.y_connectors[0]))
    odd = _strand(labels, 1) | tail(a.x_connectors[1]) | tail(a.y_connectors[2])
    even = _strand(labels, 2) | tail(a.x_connectors[2]) | tail(a.y_connectors[1])
    connector[(1, n + 2)] = frozenset(odd)
    connector[(2, n + 1)] = frozenset(even)

    model = MinorModel(branch, connector, 2)
    violation = verify_model(g, pattern.graph, model, 2)
    if violation is not None:
        raise WitnessError(f"witness failed self-verification: {violation.describe()}")
    tight = tuple(pair for pair in separation_profile(g, pattern.graph, model, cutoff=2) if pair.distance == 2)
    logger.info("2-fat witness verified; %d tight pair(s)", len(tight))
    return TwoFatWitness(pattern, model, tight)