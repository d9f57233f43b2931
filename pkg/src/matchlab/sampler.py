"""Random generation of perfect matchings.

The exact sampler is two-stage: draw an edge-count vector with probability
proportional to its matching count (one uniform big-integer draw against
cumulative exact weights), then a uniform matching realizing that vector.
A rejection wrapper conditions on the overlap with a deleted matching, and a
rotation-move Markov chain covers hosts where exact totals are unavailable.

Randomness comes from a single seeded ``random.Random`` (MT19937) per run;
worker streams derive their seeds with SplitMix64 so parallel runs stay
reproducible.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass
from typing import Iterator

from . import exact
from .model import (
    BudgetExceededError,
    EdgeCountVector,
    Host,
    LabeledMatching,
    MatchlabError,
    MultipartiteShape,
    VertexId,
    overlap,
    profile_of,
)


@dataclass(frozen=True)
class SamplerConfig:
    """Reproducibility contract: identical config, identical sample stream."""

    seed: int
    sample_count: int
    burn_in: int = 1000
    step_count: int = 1

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise MatchlabError("sample_count must be positive")
        if self.burn_in < 0 or self.step_count < 1:
            raise MatchlabError("burn_in must be >= 0 and step_count >= 1")


_SPLIT_GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def split_seed(seed: int, index: int) -> int:
    """SplitMix64 finalizer over seed + index*gamma: worker i gets
    split_seed(seed, i), independent-looking and documented."""
    z = (seed + (index + 1) * _SPLIT_GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


class VectorWeightTable:
    """Cumulative exact weights over the lattice points of one shape."""

    def __init__(self, shape: MultipartiteShape):
        shape.require_even()
        self.shape = shape
        self.vectors: list[EdgeCountVector] = list(exact.enumerate_vectors(shape))
        self.cumulative: list[int] = []
        acc = 0
        for v in self.vectors:
            acc += exact.weight(shape, v)
            self.cumulative.append(acc)
        self.total = acc
        if self.total == 0:
            raise MatchlabError(f"shape {shape.label()} has no perfect matching")

    def sample(self, rng: random.Random) -> EdgeCountVector:
        ticket = rng.randrange(self.total)
        return self.vectors[bisect.bisect_right(self.cumulative, ticket)]


_table_cache: dict[tuple[int, ...], VectorWeightTable] = {}


def _table_for(shape: MultipartiteShape) -> VectorWeightTable:
    tab = _table_cache.get(shape.parts)
    if tab is None:
        tab = VectorWeightTable(shape)
        _table_cache[shape.parts] = tab
    return tab


def sample_vector(
    shape: MultipartiteShape,
    rng: random.Random,
    table: VectorWeightTable | None = None,
) -> EdgeCountVector:
    """Draw an edge-count vector with its exact probability under a uniform
    perfect matching."""
    return (table or _table_for(shape)).sample(rng)


def sample_uniform_pm(
    shape: MultipartiteShape,
    rng: random.Random,
    table: VectorWeightTable | None = None,
) -> LabeledMatching:
    """Exactly uniform perfect matching: vector first, then per part a
    shuffled split into blocks, then a uniform bijection per pair type."""
    vector = sample_vector(shape, rng, table)
    r = shape.r
    order: list[list[int]] = []
    for i in range(r):
        slots = list(range(shape.parts[i]))
        rng.shuffle(slots)
        order.append(slots)
    # carve each part's shuffled slots into blocks, pair type order (i, j)
    blocks: dict[tuple[int, int], list[int]] = {}
    taken = [0] * r
    for i in range(r):
        for j in range(r):
            if j == i:
                continue
            m = vector.get(i, j)
            blocks[(i, j)] = order[i][taken[i] : taken[i] + m]
            taken[i] += m
    pairs = []
    for i, j, _ in vector.items():
        # sorted side i against still-shuffled side j: a uniform bijection
        for a, b in zip(sorted(blocks[(i, j)]), blocks[(j, i)]):
            pairs.append((VertexId(i, a), VertexId(j, b)))
    return LabeledMatching.of(pairs)


def sample_conditional_overlap(
    shape: MultipartiteShape,
    deleted: LabeledMatching,
    m_star: LabeledMatching,
    rng: random.Random,
    *,
    budget: int = 1_000_000,
) -> LabeledMatching:
    """Uniform perfect matching whose intersection with ``deleted`` is
    exactly ``m_star``: fix m_star, sample uniformly on the reduced shape,
    reject until the remainder avoids the rest of the deleted matching."""
    if not m_star.pairs <= deleted.pairs:
        raise MatchlabError("m_star must be a subset of the deleted matching")
    used = m_star.vertex_set
    remaining: list[list[int]] = []
    for i, size in enumerate(shape.parts):
        remaining.append([s for s in range(size) if VertexId(i, s) not in used])
    reduced_parts = tuple(len(x) for x in remaining)
    if sum(reduced_parts) == 0:
        return m_star
    rest = LabeledMatching(deleted.pairs - m_star.pairs)
    if any(p == 0 for p in reduced_parts):
        # empty parts vanish; remap indices and drop the deleted remainder
        keep = [i for i, p in enumerate(reduced_parts) if p > 0]
        if any(u.part not in keep or v.part not in keep for u, v in rest.pairs):
            raise AssertionError("deleted matching leaks into removed parts")
        index_of = {old: new for new, old in enumerate(keep)}
        reduced_shape = MultipartiteShape(tuple(reduced_parts[i] for i in keep))
    else:
        index_of = {i: i for i in range(shape.r)}
        reduced_shape = MultipartiteShape(reduced_parts)

    slot_of = [
        {orig: new for new, orig in enumerate(slots)} for slots in remaining
    ]
    rest_reduced = LabeledMatching.of(
        (
            VertexId(index_of[u.part], slot_of[u.part][u.slot]),
            VertexId(index_of[v.part], slot_of[v.part][v.slot]),
        )
        for u, v in rest.pairs
    )
    table = _table_for(reduced_shape)
    back = {i_new: i_old for i_old, i_new in index_of.items()}
    for _ in range(budget):
        cand = sample_uniform_pm(reduced_shape, rng, table)
        if overlap(cand, rest_reduced) == 0:
            pairs = [
                (
                    VertexId(back[u.part], remaining[back[u.part]][u.slot]),
                    VertexId(back[v.part], remaining[back[v.part]][v.slot]),
                )
                for u, v in cand.pairs
            ]
            return LabeledMatching.of(pairs).union(m_star)
    hint = ""
    if reduced_shape.r <= 6:
        count = exact.strata(
            reduced_shape, profile_of(reduced_shape, rest_reduced)
        ).strata[0]
        hint = f"; the conditioned event has exactly {count} matchings"
    raise BudgetExceededError(
        f"no accepted sample within {budget} rejection attempts{hint}"
    )


def overlap_statistic(sampled: LabeledMatching, deleted: LabeledMatching) -> int:
    """Shared-edge count recorded per sample."""
    return overlap(sampled, deleted)


def partner_part_census(
    sampled: LabeledMatching, deleted: LabeledMatching, shape: MultipartiteShape
) -> tuple[int, ...]:
    """For each part, how many of its vertices x have the sampled partner of
    their deleted partner back in the same part."""
    for name, m in (("sampled", sampled), ("deleted", deleted)):
        if not m.is_perfect_on(shape):
            raise MatchlabError(f"{name} matching is not perfect on the shape")
    counts = [0] * shape.r
    for v in shape.vertices():
        if sampled.partner(deleted.partner(v)).part == v.part:
            counts[v.part] += 1
    return tuple(counts)


def block_census(sampled: LabeledMatching, shape: MultipartiteShape) -> EdgeCountVector:
    """Inter-part edge counts of one sample."""
    counts: dict[tuple[int, int], int] = {}
    for u, v in sampled.pairs:
        key = (u.part, v.part) if u.part < v.part else (v.part, u.part)
        counts[key] = counts.get(key, 0) + 1
    return EdgeCountVector.of(counts)


def mcmc_switch_chain(
    host: Host, start: LabeledMatching, config: SamplerConfig
) -> Iterator[LabeledMatching]:
    """Rotation-move chain: propose a uniform ordered vertex triple, apply
    the three-edge switch when the result stays inside the host, hold
    otherwise.  Emits a state every ``step_count`` steps after burn-in."""
    if not (start.is_perfect_on(host) and start.is_subgraph_of(host)):
        raise MatchlabError("start must be a perfect matching of the host")
    rng = make_rng(config.seed)
    verts = list(host.vertices())
    # mutable partner map; a held proposal leaves it untouched
    pmap: dict[VertexId, VertexId] = {}
    for u, v in start.pairs:
        pmap[u] = v
        pmap[v] = u

    def step() -> None:
        x, y, z = rng.sample(verts, 3)
        px, py, pz = pmap[x], pmap[y], pmap[z]
        if len({x, y, z, px, py, pz}) != 6:
            return
        if host.has_edge(x, py) and host.has_edge(y, pz) and host.has_edge(z, px):
            pmap[x] = py
            pmap[py] = x
            pmap[y] = pz
            pmap[pz] = y
            pmap[z] = px
            pmap[px] = z

    for _ in range(config.burn_in):
        step()
    for _ in range(config.sample_count):
        for _ in range(config.step_count):
            step()
        yield LabeledMatching(
            frozenset((u, v) for u, v in pmap.items() if u < v)
        )
