"""Brute-force ground truth for small hosts.

Explicit enumeration of perfect matchings, overlap strata, and exact
edge-containment probabilities.  Everything is deterministic: matchings come
out in the canonical order "smallest uncovered vertex first, partners
ascending", so golden values stay stable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .model import (
    GeneralGraph,
    Host,
    LabeledMatching,
    MatchlabError,
    MatchingProfile,
    MultipartiteShape,
    StratumTable,
    VertexBudgetError,
    VertexId,
    overlap,
    profile_of,
)

VERTEX_CAP = 16


def _check_budget(host: Host, allow_large: bool) -> None:
    n = host.total_vertices
    if n > VERTEX_CAP and not allow_large:
        raise VertexBudgetError(
            f"host has {n} vertices, above the brute-force cap {VERTEX_CAP}; "
            "pass allow_large=True to override"
        )


def enumerate_pm(host: Host, *, allow_large: bool = False) -> Iterator[LabeledMatching]:
    """Yield every perfect matching of the host exactly once.

    Odd vertex counts yield an empty stream.  Recursion always matches the
    smallest uncovered vertex, trying partners in ascending order.
    """
    _check_budget(host, allow_large)
    verts = sorted(host.vertices())
    if len(verts) % 2:
        return
    for pairs in _recurse(host, verts):
        yield LabeledMatching(frozenset(pairs))


def _recurse(host: Host, free: list[VertexId]) -> Iterator[list]:
    if not free:
        yield []
        return
    u = free[0]
    rest = free[1:]
    for idx, v in enumerate(rest):
        if host.has_edge(u, v):
            remaining = rest[:idx] + rest[idx + 1 :]
            for tail in _recurse(host, remaining):
                yield [(u, v)] + tail


def count_pm(host: Host, *, allow_large: bool = False) -> int:
    return sum(1 for _ in enumerate_pm(host, allow_large=allow_large))


def strata_oracle(
    host: Host, deleted: LabeledMatching, *, allow_large: bool = False
) -> StratumTable:
    """Count perfect matchings by their overlap with ``deleted``."""
    if not deleted.is_subgraph_of(host):
        raise MatchlabError("deleted matching is not a subgraph of the host")
    buckets = [0] * (len(deleted) + 1)
    for pm in enumerate_pm(host, allow_large=allow_large):
        buckets[overlap(pm, deleted)] += 1
    shape = host if isinstance(host, MultipartiteShape) else None
    profile = profile_of(shape, deleted) if shape is not None else None
    return StratumTable(shape, profile, tuple(buckets))


def edge_probability(
    host: Host, e: tuple[VertexId, VertexId], *, allow_large: bool = False
) -> Fraction:
    """Probability that a uniform perfect matching contains the edge ``e``."""
    u, v = (VertexId(*e[0]), VertexId(*e[1]))
    if not host.has_edge(u, v):
        raise MatchlabError(f"({u},{v}) is not an edge of the host")
    target = (u, v) if u < v else (v, u)
    total = hits = 0
    for pm in enumerate_pm(host, allow_large=allow_large):
        total += 1
        if target in pm.pairs:
            hits += 1
    if total == 0:
        raise MatchlabError("host has no perfect matching")
    return Fraction(hits, total)


def random_min_degree_graph(n_half: int, t: int, seed: int) -> GeneralGraph:
    """Seeded test instance: a graph on 2*n_half vertices with minimum degree
    at least 2n-1-t that keeps the planted matching {0-1, 2-3, ...}.

    Each vertex ends up non-adjacent to at most ``t`` others.  ``t`` = 0
    returns the complete graph.
    """
    n = 2 * n_half
    if n > VERTEX_CAP:
        raise VertexBudgetError(f"2n={n} exceeds the oracle cap {VERTEX_CAP}")
    if not 0 <= t < n:
        raise MatchlabError(f"deficiency allowance t={t} must satisfy 0 <= t < 2n")
    planted = {(2 * i, 2 * i + 1) for i in range(n_half)}
    candidates = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if (u, v) not in planted
    ]
    rng = random.Random(seed)
    rng.shuffle(candidates)
    missing = [0] * n
    edges = set(planted)
    kept = set(candidates)
    for u, v in candidates:
        if missing[u] < t and missing[v] < t and rng.random() < 0.5:
            kept.discard((u, v))
            missing[u] += 1
            missing[v] += 1
    edges |= kept
    return GeneralGraph(n, frozenset(edges))


@dataclass(frozen=True)
class OracleReport:
    """Everything the brute-force pass knows about one host."""

    host_label: str
    total: int
    table: StratumTable
    edge_containment: tuple[tuple[tuple[int, int], int], ...] = field(default_factory=tuple)

    def to_json_obj(self) -> dict:
        obj = {
            "host": self.host_label,
            "total": str(self.total),
            "table": self.table.to_json_obj(),
        }
        if self.edge_containment:
            obj["edge_containment"] = [
                {"edge": list(e), "count": str(c)} for e, c in self.edge_containment
            ]
        return obj


def oracle_report(
    host: Host,
    deleted: LabeledMatching | None = None,
    *,
    with_edge_counts: bool = False,
    allow_large: bool = False,
) -> OracleReport:
    """Full brute-force report: totals, strata, optional per-edge counts."""
    deleted = deleted if deleted is not None else LabeledMatching.empty()
    table = strata_oracle(host, deleted, allow_large=allow_large)
    edge_counts: tuple = ()
    if with_edge_counts:
        counter: dict[tuple[int, int], int] = {}
        if isinstance(host, MultipartiteShape):
            flat = host.flat_index
        else:
            flat = lambda v: v.part  # noqa: E731  - general graphs are flat already
        for pm in enumerate_pm(host, allow_large=allow_large):
            for u, v in pm.pairs:
                key = tuple(sorted((flat(u), flat(v))))
                counter[key] = counter.get(key, 0) + 1
        edge_counts = tuple(sorted(counter.items()))
    return OracleReport(host.label(), table.total, table, edge_counts)
