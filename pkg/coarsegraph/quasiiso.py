"""
Quasi-Isometry Certificates
===========================
Vertex maps between finite graphs with a claimed constant q, checked
exhaustively: for every vertex pair

    dist(x, y) / q - q  <=  dist(phi(x), phi(y))  <=  q * dist(x, y) + q

and every codomain vertex must lie within q of the image.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from coarsegraph.config import get_settings
from coarsegraph.errors import ModelError, QuasiIsometryError, ResourceLimitError
from coarsegraph.fatminor import MinorModel, PartRef, separation_profile, verify_model
from coarsegraph.graph import (
    INFINITY,
    UNREACHABLE,
    Distance,
    Graph,
    as_rational,
    bounded_sweep,
    distance_matrix,
    distances,
    is_connected_set,
    neighborhood,
    power_graph,
    set_distance,
)

logger = logging.getLogger(__name__)


# ============================================================
# TYPES
# ============================================================

@dataclass(frozen=True)
class VertexMap:
    """A total map from domain vertices to codomain vertices with constant q >= 1."""

    domain: Graph
    codomain: Graph
    mapping: tuple[int, ...]
    q: Fraction

    def __post_init__(self):
        q = as_rational(self.q)
        if q < 1:
            raise QuasiIsometryError(f"quasi-isometry constant must be at least 1, got {q}")
        object.__setattr__(self, "q", q)
        mapping = tuple(int(v) for v in self.mapping)
        if len(mapping) != self.domain.vertex_count:
            raise QuasiIsometryError(
                f"map has {len(mapping)} entries for {self.domain.vertex_count} domain vertices"
            )
        for x, image in enumerate(mapping):
            if not 0 <= image < self.codomain.vertex_count:
                raise QuasiIsometryError(f"vertex {x} maps to {image}, outside the codomain")
        object.__setattr__(self, "mapping", mapping)

    def image(self, xs: Iterable[int]) -> frozenset[int]:
        return frozenset(self.mapping[x] for x in xs)


class QIViolationKind(str, Enum):
    LOWER_BOUND = "lower-bound"
    UPPER_BOUND = "upper-bound"
    DENSITY = "density"


@dataclass(frozen=True)
class QIViolation:
    """
    A failed quasi-isometry condition.

    For pair violations ``vertices`` is the domain pair, ``achieved`` the
    codomain distance of the images and ``required`` the bound it broke.
    For density it is the uncovered codomain vertex and its distance to the image.
    """

    kind: QIViolationKind
    vertices: tuple[int, ...]
    achieved: Distance
    required: Distance
    domain_distance: Distance | None = None

    def describe(self) -> str:
        if self.kind is QIViolationKind.DENSITY:
            return (f"density: codomain vertex {self.vertices[0]} is {self.achieved} from the image, "
                    f"more than {self.required}")
        x, y = self.vertices
        relation = ">=" if self.kind is QIViolationKind.LOWER_BOUND else "<="
        return (f"{self.kind.value}: pair ({x}, {y}) at domain distance {self.domain_distance} "
                f"maps to distance {self.achieved}, needs {relation} {self.required}")

    def to_json(self) -> dict:
        out = {
            "kind": self.kind.value,
            "vertices": list(self.vertices),
            "achieved": str(self.achieved),
            "required": str(self.required),
        }
        if self.domain_distance is not None:
            out["domain_distance"] = str(self.domain_distance)
        return out


# ============================================================
# CHECKING
# ============================================================

def _hop_row(g: Graph, v: int, matrix: np.ndarray | None) -> np.ndarray:
    if matrix is not None:
        return matrix[v]
    row = np.full(g.vertex_count, UNREACHABLE, dtype=np.int64)
    for w, d in bounded_sweep(g, [v]).items():
        row[w] = d
    return row


def _matrix_or_none(g: Graph) -> np.ndarray | None:
    try:
        return distance_matrix(g)
    except ResourceLimitError:
        return None


def _pair_violation_unweighted(m: VertexMap, threads: int) -> QIViolation | None:
    a, b = m.q.numerator, m.q.denominator
    phi = np.asarray(m.mapping, dtype=np.int64)
    dom_matrix = _matrix_or_none(m.domain)
    cod_matrix = _matrix_or_none(m.codomain)
    n = m.domain.vertex_count

    def scan(x: int) -> QIViolation | None:
        dom = _hop_row(m.domain, x, dom_matrix)[x + 1:]
        cod = _hop_row(m.codomain, int(phi[x]), cod_matrix)[phi[x + 1:]]
        dom_inf = dom == UNREACHABLE
        cod_inf = cod == UNREACHABLE
        finite = ~dom_inf & ~cod_inf
        lower_bad = (dom_inf & ~cod_inf) | (finite & (dom * b * b - a * a > a * b * cod))
        upper_bad = (~dom_inf & cod_inf) | (finite & (b * cod > a * dom + a))
        bad = np.flatnonzero(lower_bad | upper_bad)
        if bad.size == 0:
            return None
        j = int(bad[0])
        y = x + 1 + j
        d = INFINITY if dom_inf[j] else int(dom[j])
        dh = INFINITY if cod_inf[j] else int(cod[j])
        if lower_bad[j]:
            return QIViolation(QIViolationKind.LOWER_BOUND, (x, y), dh, _lower(d, m.q), d)
        return QIViolation(QIViolationKind.UPPER_BOUND, (x, y), dh, _upper(d, m.q), d)

    return _first(scan, n, threads)


def _pair_violation_weighted(m: VertexMap, threads: int) -> QIViolation | None:
    q = m.q
    cache: dict[int, tuple] = {}

    def cod_row(v: int):
        if v not in cache:
            cache[v] = distances(m.codomain, [v]).dist
        return cache[v]

    def scan(x: int) -> QIViolation | None:
        dom = distances(m.domain, [x]).dist
        cod = cod_row(m.mapping[x])
        for y in range(x + 1, m.domain.vertex_count):
            d, dh = dom[y], cod[m.mapping[y]]
            if d == INFINITY and dh == INFINITY:
                continue
            if dh < _lower(d, q):
                return QIViolation(QIViolationKind.LOWER_BOUND, (x, y), dh, _lower(d, q), d)
            if dh > _upper(d, q):
                return QIViolation(QIViolationKind.UPPER_BOUND, (x, y), dh, _upper(d, q), d)
        return None

    if threads > 1:
        for v in sorted(set(m.mapping)):
            cod_row(v)
    return _first(scan, m.domain.vertex_count, threads)


def _lower(d: Distance, q: Fraction) -> Distance:
    return INFINITY if d == INFINITY else Fraction(d) / q - q


def _upper(d: Distance, q: Fraction) -> Distance:
    return INFINITY if d == INFINITY else q * d + q


def _first(scan, count: int, threads: int):
    if threads > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for found in pool.map(scan, range(count)):
                if found is not None:
                    return found
        return None
    for x in range(count):
        found = scan(x)
        if found is not None:
            return found
    return None


def check_quasi_isometry(m: VertexMap, threads: int | None = None) -> QIViolation | None:
    """
    Exhaustively check a claimed q-quasi-isometry.

    Pairs are visited in lexicographic order, the lower bound before the
    upper bound; density is checked last with one multi-source sweep from
    the image. Infinite distances on both sides count as equal.

    Returns:
        None when the map is a q-quasi-isometry, otherwise the first violation
    """
    threads = get_settings().threads if threads is None else threads
    if m.domain.is_weighted or m.codomain.is_weighted:
        violation = _pair_violation_weighted(m, threads)
    else:
        violation = _pair_violation_unweighted(m, threads)
    if violation is not None:
        return violation

    if m.codomain.vertex_count == 0:
        return None
    if not m.mapping:
        return QIViolation(QIViolationKind.DENSITY, (0,), INFINITY, m.q)
    covered = bounded_sweep(m.codomain, set(m.mapping), m.q)
    for v in range(m.codomain.vertex_count):
        if v not in covered:
            gap = set_distance(m.codomain, [v], set(m.mapping))
            return QIViolation(QIViolationKind.DENSITY, (v,), gap, m.q)
    return None


def identity_into_power(g: Graph, k: int) -> VertexMap:
    """The identity V(G) -> V(G^k), a k-quasi-isometry."""
    return VertexMap(g, power_graph(g, k), tuple(range(g.vertex_count)), k)


def compose_maps(first: VertexMap, second: VertexMap) -> VertexMap:
    """
    psi . phi for phi: X -> Y and psi: Y -> Z.

    The constant q1*q2 + q2 + max(q1, q2) covers both distance bounds and the
    density of the composed image.
    """
    if first.codomain != second.domain:
        raise QuasiIsometryError("maps do not compose: first codomain differs from second domain")
    q1, q2 = first.q, second.q
    mapping = tuple(second.mapping[y] for y in first.mapping)
    return VertexMap(first.domain, second.codomain, mapping, q1 * q2 + q2 + max(q1, q2))


# ============================================================
# IMAGES OF CONNECTED SETS AND MODELS
# ============================================================

def _require_qi(m: VertexMap) -> None:
    violation = check_quasi_isometry(m)
    if violation is not None:
        raise QuasiIsometryError(f"map is not a {m.q}-quasi-isometry: {violation.describe()}")


def expand_image(m: VertexMap, x: Iterable[int], assume_valid: bool = False) -> frozenset[int]:
    """
    N^(q+1)[phi(X)] in the codomain, which is connected whenever X is.

    Args:
        m: a checked quasi-isometry
        x: connected domain vertex set
        assume_valid: skip re-checking the map

    Raises:
        QuasiIsometryError: for disconnected input, a map that fails the
            check, or (never for valid input) a disconnected expansion
    """
    xs = m.domain.check_vertices(x)
    if not is_connected_set(m.domain, xs):
        raise QuasiIsometryError("expand_image needs a non-empty connected domain set")
    if not assume_valid:
        _require_qi(m)
    expanded = neighborhood(m.codomain, m.image(xs), m.q + 1)
    if not is_connected_set(m.codomain, expanded):
        raise QuasiIsometryError("expanded image is disconnected")
    return expanded


class PairBound(NamedTuple):
    first: PartRef
    second: PartRef
    domain_distance: Distance
    codomain_distance: Distance
    bound: Distance


@dataclass(frozen=True)
class PushforwardReport:
    """The pushed-forward model, the fatness it achieves and the per-pair bounds."""

    model: MinorModel
    achieved_fatness: Distance
    pairs: tuple[PairBound, ...]

    def to_json(self) -> dict:
        return {
            "achieved_fatness": str(self.achieved_fatness),
            "pairs": [
                {
                    "first": p.first.to_json(),
                    "second": p.second.to_json(),
                    "domain_distance": str(p.domain_distance),
                    "codomain_distance": str(p.codomain_distance),
                    "bound": str(p.bound),
                }
                for p in self.pairs
            ],
        }


def pushforward_model(
    m: VertexMap,
    mm: MinorModel,
    pattern: Graph | None = None,
    assume_valid: bool = False,
) -> PushforwardReport:
    """
    Push a model through a quasi-isometry by expanding every part.

    Each pair of parts at domain distance D lands at codomain distance at
    least D/q - q - 2(q + 1); the report records every pair with its bound
    and the largest fatness the pushed parts verify at.

    Raises:
        ModelError: when mm does not verify in the domain at its fatness
        QuasiIsometryError: when the map fails its check or a bound breaks
    """
    h = mm.pattern() if pattern is None else pattern
    violation = verify_model(m.domain, h, mm)
    if violation is not None:
        raise ModelError(f"model does not verify in the domain: {violation.describe()}")
    if not assume_valid:
        _require_qi(m)

    q = m.q
    pushed = MinorModel(
        {v: expand_image(m, part, assume_valid=True) for v, part in mm.branch.items()},
        {e: expand_image(m, part, assume_valid=True) for e, part in mm.connector.items()},
        0,
    )
    before = separation_profile(m.domain, h, mm)
    after = separation_profile(m.codomain, h, pushed)
    pairs = []
    for old, new in zip(before, after):
        bound = INFINITY if old.distance == INFINITY else Fraction(old.distance) / q - q - 2 * (q + 1)
        if new.distance < bound:
            raise QuasiIsometryError(
                f"{old.first.label()}/{old.second.label()}: pushed distance {new.distance} below {bound}"
            )
        pairs.append(PairBound(old.first, old.second, old.distance, new.distance, bound))

    achieved = min((p.codomain_distance for p in pairs), default=INFINITY)
    fatness = mm.fatness if achieved == INFINITY else achieved
    model = pushed.with_fatness(fatness)
    logger.debug("Pushed model forward; achieved fatness %s", achieved)
    return PushforwardReport(model, achieved, tuple(pairs))
