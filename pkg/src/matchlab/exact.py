"""Exact big-integer counting.

Lattice-point enumeration of the row-sum system, the matching-count weight of
a lattice point, totals, overlap strata by inclusion-exclusion over
sub-profiles, closed forms for the bipartite and complete-graph cases, ratio
tables, and the cube-partition census of the lattice.

All counts are exact Python ints; ratios are Fractions reduced to lowest
terms.  Fast paths (r=2 closed form, r=3 unique lattice point, all-singleton
parts) dispatch automatically; ``force_generic`` routes everything through
the generic enumerator for cross-checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from ._parallel import map_chunks
from .model import (
    ConstraintViolationError,
    EdgeCountVector,
    LabeledMatching,
    MatchingProfile,
    MatchlabError,
    MultipartiteShape,
    RegimeError,
    StratumTable,
    UnrealizableProfileError,
    VertexId,
)


def derangements(n: int) -> int:
    """Number of fixed-point-free permutations of n letters."""
    if n < 0:
        raise MatchlabError(f"derangements undefined for n={n}")
    d_prev, d = 1, 0  # d_0, d_1
    if n == 0:
        return 1
    for m in range(2, n + 1):
        d_prev, d = d, (m - 1) * (d + d_prev)
    return d


def double_factorial_odd(k: int) -> int:
    """(2k-1)!! = number of perfect matchings of K_{2k}; the empty product is 1."""
    if k < 0:
        raise MatchlabError("double factorial needs k >= 0")
    out = 1
    for m in range(1, 2 * k, 2):
        out *= m
    return out


def weight(shape: MultipartiteShape, vector: EdgeCountVector) -> int:
    """Exact number of perfect matchings realizing the given inter-part
    edge counts: prod_i v_i! / prod_{i<j} v_{i,j}!.

    (Equivalently: a multinomial split of every part times a bijection per
    pair type; the division is always exact.)
    """
    vector.check_row_sums(shape)
    num = 1
    for size in shape.parts:
        num *= math.factorial(size)
    den = 1
    for _, _, m in vector.items():
        den *= math.factorial(m)
    return num // den


@lru_cache(maxsize=4096)
def _fact(n: int) -> int:
    return math.factorial(n)


@lru_cache(maxsize=512)
def _parts_factorial_product(parts: tuple[int, ...]) -> int:
    num = 1
    for size in parts:
        num *= _fact(size)
    return num


def _weight_dense(parts: tuple[int, ...], dense: tuple[int, ...]) -> int:
    den = 1
    for m in dense:
        den *= _fact(m)
    return _parts_factorial_product(parts) // den


def enumerate_vectors(shape: MultipartiteShape) -> Iterator[EdgeCountVector]:
    """Yield every solution of the row-sum system exactly once.

    Depth-first over pair types in lexicographic order, so the stream is
    lexicographically ascending in the dense entry tuple.  Bounds prune on
    remaining row capacity.
    """
    shape.require_even()
    yield from _enumerate_dense_as_vectors(shape)


def _enumerate_dense_as_vectors(shape: MultipartiteShape) -> Iterator[EdgeCountVector]:
    pair_types = shape.pair_types
    for dense in _enumerate_dense(shape.parts):
        yield EdgeCountVector.of(
            [(i, j, m) for (i, j), m in zip(pair_types, dense) if m]
            or []
        )


def _enumerate_dense(parts: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    r = len(parts)
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]
    rem = list(parts)
    entry: list[int] = []

    def rec(idx: int) -> Iterator[tuple[int, ...]]:
        if idx == len(pairs):
            if all(x == 0 for x in rem):
                yield tuple(entry)
            return
        i, j = pairs[idx]
        # capacity of the rest of row i: v_{i,j'} for j' > j
        future = sum(rem[jj] for jj in range(j + 1, r))
        lo = max(0, rem[i] - future)
        hi = min(rem[i], rem[j])
        for v in range(lo, hi + 1):
            rem[i] -= v
            rem[j] -= v
            entry.append(v)
            yield from rec(idx + 1)
            entry.pop()
            rem[i] += v
            rem[j] += v

    yield from rec(0)


def _pm_fast(parts: tuple[int, ...]) -> int | None:
    """Closed forms: r=2, all-singleton parts (complete graph), r=3 unique
    lattice point.  None means 'no fast path'."""
    r = len(parts)
    if r == 1:
        return 0
    if r == 2:
        a, b = parts
        return math.factorial(a) if a == b else 0
    if all(p == 1 for p in parts):
        return double_factorial_odd(r // 2) if r % 2 == 0 else 0
    if r == 3:
        a, b, c = parts
        # unique candidate: v12 = (a+b-c)/2 and cyclic
        twice = (a + b - c, a + c - b, b + c - a)
        if any(x < 0 or x % 2 for x in twice):
            return 0
        v12, v13, v23 = twice[0] // 2, twice[1] // 2, twice[2] // 2
        return _weight_dense(parts, (v12, v13, v23))
    return None


@lru_cache(maxsize=None)
def _pm_or_zero(sorted_parts: tuple[int, ...]) -> int:
    """pm of the complete multipartite graph; 0 for odd totals.  Keyed by
    the sorted part multiset since relabeling parts is an automorphism."""
    if sum(sorted_parts) % 2:
        return 0
    fast = _pm_fast(sorted_parts)
    if fast is not None:
        return fast
    return sum(
        _weight_dense(sorted_parts, dense) for dense in _enumerate_dense(sorted_parts)
    )


def _pm_chunk(job: tuple[tuple[int, ...], list[tuple[int, ...]]]) -> int:
    parts, chunk = job
    return sum(_weight_dense(parts, dense) for dense in chunk)


def pm_total(
    shape: MultipartiteShape, *, force_generic: bool = False, workers: int = 1
) -> int:
    """Number of perfect matchings of the complete multipartite graph."""
    shape.require_even()
    if not force_generic:
        fast = _pm_fast(shape.parts)
        if fast is not None:
            return fast
    dense_points = list(_enumerate_dense(shape.parts))
    partials = map_chunks(
        _pm_chunk, [(shape.parts, c) for c in _split(dense_points, workers)], workers
    )
    return sum(partials)


def _split(items: list, workers: int) -> list[list]:
    workers = max(1, workers)
    if workers == 1 or len(items) <= 1:
        return [items]
    size = -(-len(items) // workers)
    return [items[k : k + size] for k in range(0, len(items), size)]


def canonical_perfect_profile(shape: MultipartiteShape) -> MatchingProfile:
    """The deleted-matching profile of the first lattice point in enumeration
    order; exists iff the shape has any perfect matching."""
    shape.require_even()
    for dense in _enumerate_dense(shape.parts):
        return MatchingProfile.of(
            [(i, j, m) for (i, j), m in zip(shape.pair_types, dense) if m]
        )
    raise MatchlabError(f"shape {shape.label()} has no perfect matching")


def canonical_matching(
    shape: MultipartiteShape, profile: MatchingProfile
) -> LabeledMatching:
    """A concrete matching realizing the profile: consecutive free slots,
    pair types in lexicographic order."""
    profile.validate_on(shape)
    next_slot = [0] * shape.r
    pairs = []
    for i, j, m in profile.items():
        for _ in range(m):
            pairs.append((VertexId(i, next_slot[i]), VertexId(j, next_slot[j])))
            next_slot[i] += 1
            next_slot[j] += 1
    return LabeledMatching.of(pairs)


def _subprofile_chunk(
    job: tuple[tuple[int, ...], tuple[tuple[int, int, int], ...], list[tuple[int, ...]]]
) -> list[int]:
    """Partial forced-edge sums T_k over a chunk of sub-profiles."""
    parts, items, chunk = job
    total_edges = sum(m for _, _, m in items)
    partial = [0] * (total_edges + 1)
    for sub in chunk:
        k = sum(sub)
        ways = 1
        reduced = list(parts)
        for (i, j, m), s in zip(items, sub):
            ways *= math.comb(m, s)
            reduced[i] -= s
            reduced[j] -= s
        partial[k] += ways * _pm_or_zero(tuple(sorted(reduced)))
    return partial


def strata(
    shape: MultipartiteShape,
    profile: MatchingProfile,
    *,
    force_generic: bool = False,
    workers: int = 1,
) -> StratumTable:
    """Exact overlap strata via inclusion-exclusion over sub-profiles.

    For a sub-profile s <= m, the number of (S, P) pairs with S a forced
    s-typed subset of the deleted matching and P a perfect matching
    containing S is prod C(m_ij, s_ij) * pm(reduced shape); grouping by
    |s| = k and binomially inverting yields the exactly-k counts.  This
    works because removing matched vertices from a complete multipartite
    graph leaves a complete multipartite graph that depends only on how
    many vertices left each part.
    """
    profile.validate_on(shape)
    if not force_generic and shape.r == 2 and profile.is_perfect_on(shape):
        return strata_bipartite(shape.parts[0])
    if (
        not force_generic
        and all(p == 1 for p in shape.parts)
        and profile.is_perfect_on(shape)
    ):
        return StratumTable(shape, profile, strata_complete_graph(shape.r // 2).strata)

    items = profile.items()
    total_edges = profile.total
    subprofiles = list(_iter_subprofiles([m for _, _, m in items]))
    jobs = [(shape.parts, items, c) for c in _split(subprofiles, workers)]
    partials = map_chunks(_subprofile_chunk, jobs, workers)
    forced = [sum(p[k] for p in partials) for k in range(total_edges + 1)]

    counts = []
    for level in range(total_edges + 1):
        acc = 0
        for k in range(level, total_edges + 1):
            term = math.comb(k, level) * forced[k]
            acc += term if (k - level) % 2 == 0 else -term
        counts.append(acc)
    if any(c < 0 for c in counts):
        raise AssertionError("inclusion-exclusion produced a negative stratum")
    table = StratumTable(shape, profile, tuple(counts))
    if table.total != forced[0]:
        raise AssertionError("strata do not sum to the total matching count")
    return table


def _iter_subprofiles(maxima: Sequence[int]) -> Iterator[tuple[int, ...]]:
    yield from itertools.product(*(range(m + 1) for m in maxima))


def strata_bipartite(n: int) -> StratumTable:
    """Closed form for the two-part case with a perfect deleted matching:
    strata[k] = C(n,k) * d_{n-k}."""
    if n < 1:
        raise MatchlabError("bipartite strata need n >= 1")
    shape = MultipartiteShape((n, n))
    profile = MatchingProfile.of([(0, 1, n)])
    counts = tuple(math.comb(n, k) * derangements(n - k) for k in range(n + 1))
    return StratumTable(shape, profile, counts)


def strata_complete_graph(n_pairs: int) -> StratumTable:
    """Closed form for the complete graph on 2n vertices with a perfect
    deleted matching: strata[k] = C(n,k) * sum_j (-1)^j C(n-k,j) (2(n-k-j)-1)!!."""
    if n_pairs < 1:
        raise MatchlabError("complete-graph strata need n_pairs >= 1")
    n = n_pairs
    shape = MultipartiteShape((1,) * (2 * n))
    profile = MatchingProfile.of([(2 * i, 2 * i + 1, 1) for i in range(n)])
    counts = []
    for k in range(n + 1):
        rem = n - k
        acc = 0
        for j in range(rem + 1):
            term = math.comb(rem, j) * double_factorial_odd(rem - j)
            acc += term if j % 2 == 0 else -term
        counts.append(math.comb(n, k) * acc)
    return StratumTable(shape, profile, tuple(counts))


def strata_auto(
    shape: MultipartiteShape,
    profile: MatchingProfile | None = None,
    *,
    force_generic: bool = False,
    workers: int = 1,
) -> StratumTable:
    """Strata with the canonical perfect profile when none is given."""
    if profile is None:
        profile = canonical_perfect_profile(shape)
    return strata(shape, profile, force_generic=force_generic, workers=workers)


@dataclass(frozen=True)
class RatioRow:
    """One consecutive-stratum ratio next to its predicted value r/((2r-2)k)."""

    k: int
    actual: Fraction | None
    predicted: Fraction
    deviation: Fraction | None

    @property
    def defined(self) -> bool:
        return self.actual is not None


def ratio_table(table: StratumTable, r: int | None = None) -> list[RatioRow]:
    """Consecutive ratios strata[k]/strata[k-1] against the switching
    prediction.  Rows with an empty lower stratum are flagged undefined."""
    if r is None:
        if table.shape is None:
            raise MatchlabError("ratio_table needs r when the table has no shape")
        r = table.shape.r
    if r < 2:
        raise MatchlabError("ratio prediction needs r >= 2")
    rows = []
    for k in range(1, len(table.strata)):
        predicted = Fraction(r, (2 * r - 2) * k)
        if table.strata[k - 1] == 0:
            rows.append(RatioRow(k, None, predicted, None))
            continue
        actual = Fraction(table.strata[k], table.strata[k - 1])
        deviation = abs(actual / predicted - 1)
        rows.append(RatioRow(k, actual, predicted, deviation))
    return rows


@dataclass(frozen=True)
class LatticeCellConfig:
    """Cube-partition geometry: cells of half side ``d`` centered on the
    typical per-pair edge count ``c``."""

    n_scale: int
    c: int
    d: int

    @property
    def regime_ok(self) -> bool:
        # the nonemptiness argument wants the center cube fully nonnegative
        return self.c >= 3 * self.d

    @classmethod
    def for_shape(
        cls,
        shape: MultipartiteShape,
        n_scale: int | None = None,
        c: int | None = None,
        d: int | None = None,
    ) -> "LatticeCellConfig":
        if shape.r < 2:
            raise MatchlabError("cell census needs r >= 2")
        n = n_scale if n_scale is not None else max(shape.parts)
        if n < 1:
            raise MatchlabError("n_scale must be positive")
        if c is None:
            c = n // (shape.r - 1)
        if d is None:
            d = max(1, math.isqrt(int(n * math.log(n)))) if n > 1 else 1
        return cls(n, c, d)

    def cell_of(self, value: int) -> int:
        # value lies in (c + 2ud - d, c + 2ud + d]
        return -((-(value - self.c + self.d)) // (2 * self.d)) - 1

    def to_json_obj(self) -> dict:
        return {"n_scale": self.n_scale, "c": self.c, "d": self.d}


@dataclass(frozen=True)
class CellIndex:
    """Integer cube coordinates, one per pair type in lexicographic order."""

    entries: tuple[int, ...]

    @property
    def linf(self) -> int:
        return max((abs(x) for x in self.entries), default=0)

    @property
    def l1(self) -> int:
        return sum(abs(x) for x in self.entries)

    def label(self) -> str:
        return ",".join(str(x) for x in self.entries)


@dataclass(frozen=True)
class CellCensusReport:
    """Cube-partition census of all lattice points."""

    shape: MultipartiteShape
    config: LatticeCellConfig
    far_threshold: int
    cells: tuple[tuple[CellIndex, int, int], ...]  # (index, point count, weight sum)
    center_count: int
    center_weight: int
    all_cells_bounded: bool
    far_weight_ratio: Fraction | None  # max over far cells of phi(P_u)/phi(C)
    regime_ok: bool

    @property
    def total_points(self) -> int:
        return sum(c for _, c, _ in self.cells)

    def to_json_obj(self) -> dict:
        return {
            "shape": self.shape.to_json_obj(),
            "config": self.config.to_json_obj(),
            "far_threshold": self.far_threshold,
            "regime_ok": self.regime_ok,
            "center_count": self.center_count,
            "center_weight": str(self.center_weight),
            "all_cells_bounded": self.all_cells_bounded,
            "far_weight_ratio": (
                None
                if self.far_weight_ratio is None
                else [str(self.far_weight_ratio.numerator), str(self.far_weight_ratio.denominator)]
            ),
            "cells": [
                {"u": c.label(), "points": n, "weight": str(w)}
                for c, n, w in self.cells
            ],
        }


def lattice_cell_census(
    shape: MultipartiteShape,
    config: LatticeCellConfig | None = None,
    *,
    far_threshold: int = 4,
    require_regime: bool = False,
) -> CellCensusReport:
    """Partition every lattice point into its cube, then audit the census:
    every cell holds at most as many points as the center region (cells with
    all cube coordinates in {-1,0,1}), and far cells (l1 norm at or above the
    threshold) carry a vanishing share of the total matching weight.
    """
    shape.require_even()
    cfg = config if config is not None else LatticeCellConfig.for_shape(shape)
    if require_regime and not cfg.regime_ok:
        raise RegimeError(
            f"census regime violated: c={cfg.c} < 3d={3 * cfg.d}; "
            "increase n_scale (or drop require_regime to census anyway)"
        )
    buckets: dict[tuple[int, ...], list[int]] = {}
    for dense in _enumerate_dense(shape.parts):
        key = tuple(cfg.cell_of(v) for v in dense)
        entry = buckets.setdefault(key, [0, 0])
        entry[0] += 1
        entry[1] += _weight_dense(shape.parts, dense)

    cells = tuple(
        (CellIndex(k), n, w) for k, (n, w) in sorted(buckets.items())
    )
    center_count = sum(n for idx, n, _ in cells if idx.linf <= 1)
    center_weight = sum(w for idx, _, w in cells if idx.linf <= 1)
    bounded = all(n <= center_count for _, n, _ in cells)
    far_cells = [(idx, n, w) for idx, n, w in cells if idx.l1 >= far_threshold]
    if not far_cells or center_weight == 0:
        far_ratio = Fraction(0) if center_weight else None
    else:
        far_ratio = max(Fraction(w, center_weight) for _, _, w in far_cells)
    return CellCensusReport(
        shape=shape,
        config=cfg,
        far_threshold=far_threshold,
        cells=cells,
        center_count=center_count,
        center_weight=center_weight,
        all_cells_bounded=bounded,
        far_weight_ratio=far_ratio,
        regime_ok=cfg.regime_ok,
    )
