"""Core value types shared across the engine.

Shapes, vertices, labeled matchings, deleted-matching profiles, edge-count
vectors, stratum tables, and general graphs.  Everything here is an immutable
value: exact counts are Python ints, probabilities stay rational, and the JSON
encodings render big integers as decimal strings so nothing is ever squeezed
through a float.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence, Union


class MatchlabError(ValueError):
    """Base class for domain errors; the CLI maps these to exit code 1."""


class NotMatchedError(MatchlabError):
    """A vertex was looked up in a matching that does not cover it."""


class DegenerateTripleError(MatchlabError):
    """A switch triple collides with itself or with its partner vertices."""


class ConstraintViolationError(MatchlabError):
    """An edge-count vector or profile breaks a row-sum constraint."""


class UnrealizableProfileError(MatchlabError):
    """A deleted-matching profile cannot be embedded in the shape."""


class BudgetExceededError(MatchlabError):
    """An enumeration or rejection budget ran out."""


class VertexBudgetError(MatchlabError):
    """Brute force was requested on a host above the vertex cap."""


class RegimeError(MatchlabError):
    """Cell-census configuration outside its supported regime."""


class VertexId(NamedTuple):
    """Part-major vertex label: ``part`` picks the part, ``slot`` the
    position inside it.  Tuple ordering gives a canonical vertex order."""

    part: int
    slot: int


Pair = tuple[VertexId, VertexId]


def _norm_pair(u: VertexId, v: VertexId) -> Pair:
    if u == v:
        raise MatchlabError(f"self-pair at vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class MultipartiteShape:
    """Part sizes of a complete multipartite graph.

    Vertices are labeled part-major: part ``i`` holds slots ``0..parts[i]-1``.
    Edges run exactly between distinct parts.
    """

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.parts, tuple):
            object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 1:
            raise MatchlabError("a shape needs at least one part")
        if any(not isinstance(p, int) or p < 1 for p in self.parts):
            raise MatchlabError(f"part sizes must be positive integers, got {self.parts!r}")

    @property
    def r(self) -> int:
        return len(self.parts)

    @property
    def total_vertices(self) -> int:
        return sum(self.parts)

    @cached_property
    def pair_types(self) -> tuple[tuple[int, int], ...]:
        r = self.r
        return tuple((i, j) for i in range(r) for j in range(i + 1, r))

    @cached_property
    def _offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for p in self.parts:
            out.append(acc)
            acc += p
        return tuple(out)

    def vertices(self) -> tuple[VertexId, ...]:
        return tuple(VertexId(i, s) for i, p in enumerate(self.parts) for s in range(p))

    def has_vertex(self, v: VertexId) -> bool:
        return 0 <= v.part < self.r and 0 <= v.slot < self.parts[v.part]

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        return self.has_vertex(u) and self.has_vertex(v) and u.part != v.part

    def part_of(self, v: VertexId) -> int:
        return v.part

    def flat_index(self, v: VertexId) -> int:
        return self._offsets[v.part] + v.slot

    def vertex_at(self, flat: int) -> VertexId:
        if not 0 <= flat < self.total_vertices:
            raise MatchlabError(f"flat index {flat} out of range")
        for i in range(self.r - 1, -1, -1):
            if flat >= self._offsets[i]:
                return VertexId(i, flat - self._offsets[i])
        raise AssertionError("unreachable")

    def require_even(self) -> None:
        if self.total_vertices % 2:
            raise MatchlabError(
                f"odd vertex count {self.total_vertices}: no perfect matching"
            )

    def label(self) -> str:
        return "x".join(str(p) for p in self.parts)

    def to_json_obj(self) -> list[int]:
        return list(self.parts)

    @classmethod
    def from_json_obj(cls, obj: Sequence[int]) -> "MultipartiteShape":
        return cls(tuple(int(p) for p in obj))

    @classmethod
    def of(cls, parts: Iterable[int]) -> "MultipartiteShape":
        return cls(tuple(parts))


@dataclass(frozen=True)
class GeneralGraph:
    """Simple undirected graph on flat vertices ``0..n_vertices-1``.

    Exposed through the same host interface as shapes: each flat vertex is
    its own singleton part, so matchings on general graphs reuse VertexId.
    """

    n_vertices: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise MatchlabError("graph needs at least one vertex")
        if not isinstance(self.edges, frozenset):
            object.__setattr__(
                self, "edges", frozenset(tuple(sorted(e)) for e in self.edges)
            )
        for u, v in self.edges:
            if u == v:
                raise MatchlabError(f"self-loop at {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise MatchlabError(f"edge ({u},{v}) out of range")
            if u > v:
                raise MatchlabError("edges must be stored as sorted pairs")

    @property
    def r(self) -> int:
        return self.n_vertices

    @property
    def total_vertices(self) -> int:
        return self.n_vertices

    @cached_property
    def _adj(self) -> tuple[frozenset[int], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.n_vertices)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    @property
    def min_degree(self) -> int:
        return min(len(s) for s in self._adj)

    @property
    def degree_deficiency(self) -> int:
        """Vertex count minus the true minimum degree."""
        return self.n_vertices - self.min_degree

    def vertices(self) -> tuple[VertexId, ...]:
        return tuple(VertexId(i, 0) for i in range(self.n_vertices))

    def has_vertex(self, v: VertexId) -> bool:
        return 0 <= v.part < self.n_vertices and v.slot == 0

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        if not (self.has_vertex(u) and self.has_vertex(v)):
            return False
        return v.part in self._adj[u.part]

    def part_of(self, v: VertexId) -> int:
        return v.part

    def label(self) -> str:
        return f"graph<{self.n_vertices}v,{len(self.edges)}e>"

    def to_json_obj(self) -> dict:
        return {"n": self.n_vertices, "edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "GeneralGraph":
        edges = frozenset(tuple(sorted((int(u), int(v)))) for u, v in obj["edges"])
        return cls(int(obj["n"]), edges)  # type: ignore[arg-type]

    @classmethod
    def complete(cls, n_vertices: int) -> "GeneralGraph":
        edges = frozenset(
            (u, v) for u in range(n_vertices) for v in range(u + 1, n_vertices)
        )
        return cls(n_vertices, edges)

    @classmethod
    def from_shape(cls, shape: MultipartiteShape) -> "GeneralGraph":
        verts = shape.vertices()
        edges = frozenset(
            (shape.flat_index(u), shape.flat_index(v))
            for a, u in enumerate(verts)
            for v in verts[a + 1 :]
            if u.part != v.part
        )
        return cls(shape.total_vertices, edges)


Host = Union[MultipartiteShape, GeneralGraph]


@dataclass(frozen=True)
class LabeledMatching:
    """A set of disjoint vertex pairs, each pair stored sorted."""

    pairs: frozenset[Pair]

    def __post_init__(self) -> None:
        if not isinstance(self.pairs, frozenset):
            object.__setattr__(self, "pairs", frozenset(self.pairs))
        seen: set[VertexId] = set()
        for u, v in self.pairs:
            if u >= v:
                raise MatchlabError("pairs must be sorted; build via LabeledMatching.of")
            if u in seen or v in seen:
                raise MatchlabError(f"vertex reused across pairs near {u} / {v}")
            seen.add(u)
            seen.add(v)

    @classmethod
    def of(cls, pairs: Iterable[tuple]) -> "LabeledMatching":
        return cls(frozenset(_norm_pair(VertexId(*u), VertexId(*v)) for u, v in pairs))

    @classmethod
    def empty(cls) -> "LabeledMatching":
        return cls(frozenset())

    @cached_property
    def _partner_map(self) -> dict[VertexId, VertexId]:
        out: dict[VertexId, VertexId] = {}
        for u, v in self.pairs:
            out[u] = v
            out[v] = u
        return out

    @cached_property
    def vertex_set(self) -> frozenset[VertexId]:
        return frozenset(self._partner_map)

    def __len__(self) -> int:
        return len(self.pairs)

    def covers(self, x: VertexId) -> bool:
        return x in self._partner_map

    def partner(self, x: VertexId) -> VertexId:
        try:
            return self._partner_map[x]
        except KeyError:
            raise NotMatchedError(f"vertex {x} is not matched") from None

    def is_perfect_on(self, host: Host) -> bool:
        return self.vertex_set == frozenset(host.vertices())

    def is_subgraph_of(self, host: Host) -> bool:
        return all(host.has_edge(u, v) for u, v in self.pairs)

    def union(self, other: "LabeledMatching") -> "LabeledMatching":
        return LabeledMatching(self.pairs | other.pairs)

    def to_json_obj(self) -> list:
        return [[list(u), list(v)] for u, v in sorted(self.pairs)]

    @classmethod
    def from_json_obj(cls, obj: Sequence) -> "LabeledMatching":
        return cls.of(
            (VertexId(int(u[0]), int(u[1])), VertexId(int(v[0]), int(v[1])))
            for u, v in obj
        )


def partner(matching: LabeledMatching, x: VertexId) -> VertexId:
    """The unique vertex paired with ``x``; an involution on covered vertices."""
    return matching.partner(x)


def overlap(
    first: LabeledMatching, second: LabeledMatching, host: Host | None = None
) -> int:
    """Number of shared pairs.  With ``host`` given, both matchings must
    live on the host's vertex set."""
    if host is not None:
        universe = frozenset(host.vertices())
        for m in (first, second):
            stray = m.vertex_set - universe
            if stray:
                raise MatchlabError(
                    f"matching uses vertices outside the host: {sorted(stray)[:3]}"
                )
    return len(first.pairs & second.pairs)


@dataclass(frozen=True)
class _PairCounts:
    """Shared storage for symmetric per-pair-type counts (i<j, zero-free)."""

    counts: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        seen = set()
        for i, j, m in self.counts:
            if i >= j or i < 0:
                raise MatchlabError(f"pair type ({i},{j}) must satisfy 0 <= i < j")
            if m < 0:
                raise MatchlabError(f"count for pair ({i},{j}) is negative")
            if (i, j) in seen:
                raise MatchlabError(f"duplicate pair type ({i},{j})")
            seen.add((i, j))

    @classmethod
    def _normalize(cls, data) -> tuple[tuple[int, int, int], ...]:
        acc: dict[tuple[int, int], int] = {}
        items = data.items() if isinstance(data, Mapping) else data
        for entry in items:
            if isinstance(data, Mapping):
                (i, j), m = entry
            else:
                i, j, m = entry
            if i == j:
                raise MatchlabError(f"pair type ({i},{j}) is within one part")
            if i > j:
                i, j = j, i
            acc[(i, j)] = acc.get((i, j), 0) + int(m)
        return tuple(
            (i, j, m) for (i, j), m in sorted(acc.items()) if m != 0
        )

    @cached_property
    def _lookup(self) -> dict[tuple[int, int], int]:
        return {(i, j): m for i, j, m in self.counts}

    def get(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return self._lookup.get((i, j), 0)

    @property
    def total(self) -> int:
        return sum(m for _, _, m in self.counts)

    def row_sum(self, i: int) -> int:
        return sum(m for a, b, m in self.counts if a == i or b == i)

    @property
    def max_index(self) -> int:
        return max((j for _, j, _ in self.counts), default=-1)

    def items(self) -> tuple[tuple[int, int, int], ...]:
        return self.counts

    def to_json_obj(self) -> list:
        return [[i, j, m] for i, j, m in self.counts]


@dataclass(frozen=True)
class MatchingProfile(_PairCounts):
    """Per-pair-type edge counts of a deleted matching.

    Two matchings with the same profile see identical strata, so the exact
    engine works on profiles instead of labeled matchings.
    """

    @classmethod
    def of(cls, data) -> "MatchingProfile":
        return cls(cls._normalize(data))

    @classmethod
    def from_json_obj(cls, obj: Sequence) -> "MatchingProfile":
        return cls.of([(int(i), int(j), int(m)) for i, j, m in obj])

    def validate_on(self, shape: MultipartiteShape) -> None:
        """Realizability: some matching on the shape has these counts."""
        if self.max_index >= shape.r:
            raise UnrealizableProfileError(
                f"profile mentions part {self.max_index} but shape has r={shape.r}"
            )
        for i, size in enumerate(shape.parts):
            used = self.row_sum(i)
            if used > size:
                raise UnrealizableProfileError(
                    f"profile uses {used} vertices of part {i} but it has {size}"
                )

    def is_perfect_on(self, shape: MultipartiteShape) -> bool:
        return all(self.row_sum(i) == s for i, s in enumerate(shape.parts))


@dataclass(frozen=True)
class EdgeCountVector(_PairCounts):
    """Inter-part edge counts of a perfect matching: one lattice point of
    the row-sum system (nonnegative entries, each part exactly consumed)."""

    @classmethod
    def of(cls, data) -> "EdgeCountVector":
        return cls(cls._normalize(data))

    @classmethod
    def from_json_obj(cls, obj: Sequence) -> "EdgeCountVector":
        return cls.of([(int(i), int(j), int(m)) for i, j, m in obj])

    def check_row_sums(self, shape: MultipartiteShape) -> None:
        if self.max_index >= shape.r:
            raise ConstraintViolationError(
                f"vector mentions part {self.max_index} but shape has r={shape.r}"
            )
        for i, size in enumerate(shape.parts):
            got = self.row_sum(i)
            if got != size:
                raise ConstraintViolationError(
                    f"row {i}: entries sum to {got}, part size is {size}"
                )

    def dense(self, shape: MultipartiteShape) -> tuple[int, ...]:
        return tuple(self.get(i, j) for i, j in shape.pair_types)


def profile_of(shape: MultipartiteShape, matching: LabeledMatching) -> MatchingProfile:
    """Collapse a labeled matching to its per-pair-type counts."""
    counts: dict[tuple[int, int], int] = {}
    for u, v in matching.pairs:
        if not (shape.has_vertex(u) and shape.has_vertex(v)):
            raise MatchlabError(f"pair ({u},{v}) leaves the shape")
        if u.part == v.part:
            raise MatchlabError(f"pair ({u},{v}) lies inside part {u.part}")
        key = (u.part, v.part) if u.part < v.part else (v.part, u.part)
        counts[key] = counts.get(key, 0) + 1
    return MatchingProfile.of(counts)


@dataclass(frozen=True)
class StratumTable:
    """Exact counts of perfect matchings by overlap with the deleted
    matching; ``strata[k]`` counts those sharing exactly ``k`` edges.

    ``shape``/``profile`` are None when the host is a general graph.
    """

    shape: MultipartiteShape | None
    profile: MatchingProfile | None
    strata: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.strata, tuple):
            object.__setattr__(self, "strata", tuple(int(x) for x in self.strata))
        if len(self.strata) < 1:
            raise MatchlabError("stratum table cannot be empty")
        if any(x < 0 for x in self.strata):
            raise MatchlabError("stratum counts must be nonnegative")

    @property
    def total(self) -> int:
        return sum(self.strata)

    def distribution(self) -> tuple[Fraction, ...]:
        t = self.total
        if t == 0:
            raise MatchlabError("no perfect matchings: the overlap distribution is undefined")
        return tuple(Fraction(x, t) for x in self.strata)

    def expected_overlap(self) -> Fraction:
        t = self.total
        if t == 0:
            raise MatchlabError("no perfect matchings")
        return Fraction(sum(k * x for k, x in enumerate(self.strata)), t)

    def to_json_obj(self) -> dict:
        return {
            "shape": self.shape.to_json_obj() if self.shape else None,
            "profile": self.profile.to_json_obj() if self.profile else None,
            "strata": [str(x) for x in self.strata],
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "StratumTable":
        shape = MultipartiteShape.from_json_obj(obj["shape"]) if obj.get("shape") else None
        profile = (
            MatchingProfile.from_json_obj(obj["profile"]) if obj.get("profile") else None
        )
        return cls(shape, profile, tuple(int(s) for s in obj["strata"]))
