"""Three-edge rotations and their double-counting audits.

The (x,y,z)-switch removes the pairs at x, y, z and rotates their partners;
under the goodness conditions it maps a matching that shares k edges with the
deleted matching to one sharing k-1.  The auxiliary bipartite graph between
consecutive strata is never materialized: only degrees (good / reverse-good
triple counts) and their sums are computed, and the audits check that both
sides count the same edge set.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator

from . import oracle
from .model import (
    DegenerateTripleError,
    GeneralGraph,
    Host,
    LabeledMatching,
    MatchlabError,
    MultipartiteShape,
    VertexId,
    overlap,
)


class GoodnessMode(Enum):
    """Which condition set a switch must satisfy.

    MIN_DEGREE checks the three rotated pairs are host edges (any graph);
    MULTIPARTITE instead requires x, y, z in one part (complete multipartite
    hosts, where rotated pairs are then automatically edges).
    """

    MIN_DEGREE = "min_degree"
    MULTIPARTITE = "multipartite"


@dataclass(frozen=True)
class SwitchTriple:
    x: VertexId
    y: VertexId
    z: VertexId

    def __post_init__(self) -> None:
        if len({self.x, self.y, self.z}) != 3:
            raise DegenerateTripleError(f"triple {self} repeats a vertex")

    @classmethod
    def of(cls, x, y, z) -> "SwitchTriple":
        return cls(VertexId(*x), VertexId(*y), VertexId(*z))

    @property
    def reversed(self) -> "SwitchTriple":
        """The inverse rotation's triple."""
        return SwitchTriple(self.x, self.z, self.y)


def apply_switch(matching: LabeledMatching, triple: SwitchTriple) -> LabeledMatching:
    """Rotate the partners of x, y, z: pairs xP(x), yP(y), zP(z) become
    xP(y), yP(z), zP(x).  The result is a perfect matching of the same
    vertex set but not necessarily a subgraph of any particular host."""
    x, y, z = triple.x, triple.y, triple.z
    px, py, pz = matching.partner(x), matching.partner(y), matching.partner(z)
    six = {x, y, z, px, py, pz}
    if len(six) != 6:
        raise DegenerateTripleError(
            f"degenerate triple: {x},{y},{z} and partners are not six distinct vertices"
        )
    removed = {tuple(sorted(p)) for p in ((x, px), (y, py), (z, pz))}
    added = {tuple(sorted(p)) for p in ((x, py), (y, pz), (z, px))}
    return LabeledMatching((matching.pairs - removed) | added)


def is_good(
    matching: LabeledMatching,
    deleted: LabeledMatching,
    triple: SwitchTriple,
    mode: GoodnessMode,
    host: Host,
) -> bool:
    """True iff switching at the triple moves the matching one stratum down."""
    x, y, z = triple.x, triple.y, triple.z
    px, py, pz = matching.partner(x), matching.partner(y), matching.partner(z)
    in_m = deleted.pairs
    if mode is GoodnessMode.MULTIPARTITE:
        if not (host.part_of(x) == host.part_of(y) == host.part_of(z)):
            return False
    else:
        if not (host.has_edge(x, py) and host.has_edge(y, pz) and host.has_edge(z, px)):
            return False
    return (
        _pair(x, px) in in_m
        and _pair(y, py) not in in_m
        and _pair(z, pz) not in in_m
        and _pair(y, pz) not in in_m
    )


def is_reverse_good(
    matching: LabeledMatching,
    deleted: LabeledMatching,
    triple: SwitchTriple,
    mode: GoodnessMode,
    host: Host,
) -> bool:
    """True iff the matching is the (x,y,z)-switch of something one stratum up."""
    x, y, z = triple.x, triple.y, triple.z
    qx, qy, qz = matching.partner(x), matching.partner(y), matching.partner(z)
    in_m = deleted.pairs
    if mode is GoodnessMode.MULTIPARTITE:
        if not (host.part_of(x) == host.part_of(y) == host.part_of(z)):
            return False
        if _pair(z, qz) in in_m:
            return False
    else:
        if not (host.has_edge(x, qz) and host.has_edge(y, qx) and host.has_edge(z, qy)):
            return False
    return (
        _pair(x, qz) in in_m
        and _pair(y, qx) not in in_m
        and _pair(z, qy) not in in_m
        and _pair(y, qy) not in in_m
    )


def _pair(u: VertexId, v: VertexId):
    return (u, v) if u < v else (v, u)


def _ordered_triples(host: Host) -> Iterator[SwitchTriple]:
    verts = host.vertices()
    for x in verts:
        for y in verts:
            if y == x:
                continue
            for z in verts:
                if z == x or z == y:
                    continue
                yield SwitchTriple(x, y, z)


def good_triples(
    matching: LabeledMatching,
    deleted: LabeledMatching,
    mode: GoodnessMode,
    host: Host,
) -> Iterator[SwitchTriple]:
    """All ordered triples good for the matching.  x is prefiltered to
    vertices on shared edges; y, z stay within x's part in multipartite mode."""
    verts = host.vertices()
    shared = sorted(v for p in (matching.pairs & deleted.pairs) for v in p)
    for x in shared:
        if mode is GoodnessMode.MULTIPARTITE:
            pool = [v for v in verts if host.part_of(v) == host.part_of(x)]
        else:
            pool = list(verts)
        for y in pool:
            if y == x:
                continue
            for z in pool:
                if z == x or z == y:
                    continue
                t = SwitchTriple(x, y, z)
                if is_good(matching, deleted, t, mode, host):
                    yield t


def degree_in_H(
    host: Host,
    matching: LabeledMatching,
    deleted: LabeledMatching,
    k: int,
    side: str,
    mode: GoodnessMode,
) -> int:
    """Degree of a matching in the (implicit) stratum-switching graph between
    levels k and k-1: good-triple count on the upper side, reverse-good on
    the lower."""
    if side not in ("upper", "lower"):
        raise MatchlabError(f"side must be 'upper' or 'lower', got {side!r}")
    level = overlap(matching, deleted)
    want = k if side == "upper" else k - 1
    if level != want:
        raise MatchlabError(
            f"matching shares {level} edges with the deleted matching, "
            f"but the {side} side of the k={k} audit needs {want}"
        )
    if side == "upper":
        return sum(1 for _ in good_triples(matching, deleted, mode, host))
    count = 0
    for t in _reverse_candidates(host, matching, deleted, mode):
        if is_reverse_good(matching, deleted, t, mode, host):
            count += 1
    return count


def _reverse_candidates(
    host: Host,
    matching: LabeledMatching,
    deleted: LabeledMatching,
    mode: GoodnessMode,
) -> Iterator[SwitchTriple]:
    """Triples that can possibly be reverse good: xQ(z) in M forces
    z = Q(M(x)), so only (x, y) range freely."""
    verts = host.vertices()
    for x in verts:
        if not deleted.covers(x):
            continue
        mx = deleted.partner(x)
        if not matching.covers(mx):
            continue
        z = matching.partner(mx)
        if z == x:
            continue
        if mode is GoodnessMode.MULTIPARTITE:
            pool = [v for v in verts if host.part_of(v) == host.part_of(x)]
        else:
            pool = verts
        for y in pool:
            if y == x or y == z:
                continue
            yield SwitchTriple(x, y, z)


@dataclass(frozen=True)
class HandshakeReport:
    """Both-sided degree sums over a stratum pair, plus degree ranges."""

    k: int
    mode: GoodnessMode
    upper_size: int
    lower_size: int
    upper_degree_sum: int
    lower_degree_sum: int
    upper_degree_range: tuple[int, int] | None
    lower_degree_range: tuple[int, int] | None
    vacuous: bool

    @property
    def balanced(self) -> bool:
        return self.upper_degree_sum == self.lower_degree_sum

    def to_json_obj(self) -> dict:
        return {
            "k": self.k,
            "mode": self.mode.value,
            "upper_size": self.upper_size,
            "lower_size": self.lower_size,
            "upper_degree_sum": str(self.upper_degree_sum),
            "lower_degree_sum": str(self.lower_degree_sum),
            "upper_degree_range": list(self.upper_degree_range or ()) or None,
            "lower_degree_range": list(self.lower_degree_range or ()) or None,
            "balanced": self.balanced,
            "vacuous": self.vacuous,
        }


def handshake_audit(
    host: Host,
    deleted: LabeledMatching,
    k: int,
    mode: GoodnessMode,
    *,
    allow_large: bool = False,
) -> HandshakeReport:
    """Count the switching graph's edges from both sides and compare.

    The upper side sums good-triple counts over matchings sharing k edges
    with the deleted matching, the lower side sums reverse-good counts over
    those sharing k-1; the two sums must agree exactly.
    """
    if k < 1:
        raise MatchlabError("handshake audit needs k >= 1")
    upper_degs: list[int] = []
    lower_degs: list[int] = []
    for pm in oracle.enumerate_pm(host, allow_large=allow_large):
        level = overlap(pm, deleted)
        if level == k:
            upper_degs.append(degree_in_H(host, pm, deleted, k, "upper", mode))
        elif level == k - 1:
            lower_degs.append(degree_in_H(host, pm, deleted, k, "lower", mode))
    return HandshakeReport(
        k=k,
        mode=mode,
        upper_size=len(upper_degs),
        lower_size=len(lower_degs),
        upper_degree_sum=sum(upper_degs),
        lower_degree_sum=sum(lower_degs),
        upper_degree_range=(min(upper_degs), max(upper_degs)) if upper_degs else None,
        lower_degree_range=(min(lower_degs), max(lower_degs)) if lower_degs else None,
        vacuous=not upper_degs or not lower_degs,
    )


@dataclass(frozen=True)
class EdgeSwitchReport:
    """Single-edge switching audit around a fixed host edge."""

    edge: tuple[int, int]
    containing: int
    avoiding: int
    containing_degree_sum: int
    avoiding_degree_sum: int
    max_avoiding_degree: int
    probability: Fraction

    @property
    def balanced(self) -> bool:
        return self.containing_degree_sum == self.avoiding_degree_sum

    def to_json_obj(self) -> dict:
        return {
            "edge": list(self.edge),
            "containing": str(self.containing),
            "avoiding": str(self.avoiding),
            "containing_degree_sum": str(self.containing_degree_sum),
            "avoiding_degree_sum": str(self.avoiding_degree_sum),
            "max_avoiding_degree": self.max_avoiding_degree,
            "balanced": self.balanced,
            "probability": [
                str(self.probability.numerator),
                str(self.probability.denominator),
            ],
        }


def edge_switch_audit(
    host: GeneralGraph, e: tuple[int, int], *, allow_large: bool = False
) -> EdgeSwitchReport:
    """Audit the two-edge switch at a fixed edge e = xy.

    A matching P containing e is adjacent to Q = P - {uv, xy} + {uy, xv}
    for each oriented choice of a partner edge uv; any matching avoiding e
    has at most one such preimage.  Verifies the degree bound, the two-sided
    edge count, and the exact containment probability.
    """
    ex, ey = sorted(e)
    x, y = VertexId(ex, 0), VertexId(ey, 0)
    if not host.has_edge(x, y):
        raise MatchlabError(f"({ex},{ey}) is not an edge of the host")
    containing: list[LabeledMatching] = []
    avoiding: list[LabeledMatching] = []
    for pm in oracle.enumerate_pm(host, allow_large=allow_large):
        (containing if (x, y) in pm.pairs else avoiding).append(pm)

    # upper side: generate every neighbor explicitly and tally its degree
    edge_sum = 0
    tally: dict[frozenset, int] = {}
    for pm in containing:
        for u, v in pm.pairs:
            if (u, v) == (x, y):
                continue
            # oriented replacements {uy, xv} and {vy, xu}
            for a, b in ((u, v), (v, u)):
                if host.has_edge(a, y) and host.has_edge(x, b):
                    q = (pm.pairs - {(u, v), (x, y)}) | {_pair(a, y), _pair(x, b)}
                    edge_sum += 1
                    tally[frozenset(q)] = tally.get(frozenset(q), 0) + 1

    # lower side: the unique-preimage formula, cross-checked against the tally
    avoid_sum = 0
    max_avoid = 0
    for q in avoiding:
        u = q.partner(y)
        v = q.partner(x)
        deg = 1 if host.has_edge(u, v) else 0
        observed = tally.get(frozenset(q.pairs), 0)
        if observed != deg:
            raise AssertionError(
                "edge-switch degree mismatch: formula and brute force disagree"
            )
        avoid_sum += deg
        max_avoid = max(max_avoid, deg)

    total = len(containing) + len(avoiding)
    if total == 0:
        raise MatchlabError("host has no perfect matching")
    return EdgeSwitchReport(
        edge=(ex, ey),
        containing=len(containing),
        avoiding=len(avoiding),
        containing_degree_sum=edge_sum,
        avoiding_degree_sum=avoid_sum,
        max_avoiding_degree=max_avoid,
        probability=Fraction(len(containing), total),
    )
