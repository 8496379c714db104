"""Vertex sets as Python integers, for the small-host searches and oracles."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from coarsegraph.graph import Graph, bounded_sweep


def bits(mask: int) -> Iterator[int]:
    """Set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def to_set(mask: int) -> frozenset[int]:
    return frozenset(bits(mask))


def adjacency_masks(g: Graph) -> list[int]:
    return [to_mask(nbrs) for nbrs in g.adjacency]


def ball_masks(g: Graph, radius: Fraction) -> list[int]:
    """Per vertex, the vertices at distance strictly below the radius."""
    if radius <= 0:
        return [0] * g.vertex_count
    return [
        to_mask(w for w, d in bounded_sweep(g, [v], radius).items() if d < radius)
        for v in range(g.vertex_count)
    ]


def zone(mask: int, balls: Sequence[int]) -> int:
    out = 0
    for v in bits(mask):
        out |= balls[v]
    return out


def spread(source: int, through: int, adj: Sequence[int]) -> int:
    """``source`` plus the vertices of ``through`` reachable from it inside ``source | through``."""
    reached = source
    frontier = source
    while frontier:
        grown = 0
        for v in bits(frontier):
            grown |= adj[v]
        frontier = grown & through & ~reached
        reached |= frontier
    return reached


def neighbours(mask: int, adj: Sequence[int]) -> int:
    out = 0
    for v in bits(mask):
        out |= adj[v]
    return out


def is_connected(mask: int, adj: Sequence[int]) -> bool:
    if not mask:
        return False
    return spread(mask & -mask, mask, adj) == mask
