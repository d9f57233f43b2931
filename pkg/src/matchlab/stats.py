"""Distribution post-processing.

Poisson mass, exact and empirical total variation distance, convergence
tables, the factorial-ratio bound checker, and concentration summaries for
the Monte Carlo audits.  Probabilities coming from strata stay exact
rationals; the only inexact step is the exponential, taken in 50-digit
decimal arithmetic and rendered to 6 significant digits by default.
"""

from __future__ import annotations

import decimal
import math
import random
import time
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as scipy_stats

from . import exact
from .model import MatchlabError, MultipartiteShape, StratumTable

PRECISION = 50
RENDER_DIGITS = 6
# every Decimal op below is correctly rounded at PRECISION digits; with at
# most a few hundred terms the accumulated error stays far below this
TV_ERROR_BOUND = Decimal("1e-30")


def _ctx() -> decimal.Context:
    return decimal.Context(prec=PRECISION)


def to_decimal(x: Fraction | int | float | Decimal) -> Decimal:
    ctx = _ctx()
    if isinstance(x, Decimal):
        return ctx.plus(x)
    if isinstance(x, Fraction):
        return ctx.divide(Decimal(x.numerator), Decimal(x.denominator))
    if isinstance(x, int):
        return ctx.plus(Decimal(x))
    return ctx.plus(Decimal(repr(x)))


def render(x: Decimal | Fraction, digits: int = RENDER_DIGITS) -> str:
    """Fixed significant-digit rendering used by every artifact writer."""
    d = to_decimal(x)
    if d == 0:
        return "0"
    q = d.quantize(
        Decimal(1).scaleb(d.adjusted() - digits + 1),
        rounding=decimal.ROUND_HALF_EVEN,
    )
    return format(q, "f")


def _exp(x: Fraction | Decimal) -> Decimal:
    ctx = _ctx()
    return ctx.exp(to_decimal(x))


def default_lambda(r: int) -> Fraction:
    """Limit parameter of the overlap distribution: r/(2r-2)."""
    if r < 2:
        raise MatchlabError("lambda rule needs r >= 2")
    return Fraction(r, 2 * r - 2)


def poisson_pmf(lam: Fraction | int, k: int, *, precision: int = PRECISION) -> Decimal:
    """exp(-lam) lam^k / k! at the configured decimal precision."""
    lam = Fraction(lam)
    if lam <= 0:
        raise MatchlabError("poisson_pmf needs lambda > 0")
    if k < 0:
        raise MatchlabError("poisson_pmf needs k >= 0")
    ctx = decimal.Context(prec=precision)
    lam_d = ctx.divide(Decimal(lam.numerator), Decimal(lam.denominator))
    mass = ctx.exp(-lam_d)
    mass = ctx.multiply(mass, ctx.power(lam_d, k))
    return ctx.divide(mass, Decimal(math.factorial(k)))


@dataclass(frozen=True)
class DiscreteDistribution:
    """Masses over 0,1,2,... with an origin flag; sums to one exactly."""

    masses: tuple[Fraction, ...]
    provenance: str  # "exact-from-strata" | "empirical"

    def __post_init__(self) -> None:
        if not self.masses:
            raise MatchlabError("a distribution needs at least one mass")
        if any(m < 0 for m in self.masses):
            raise MatchlabError("negative mass")
        if sum(self.masses) != 1:
            raise MatchlabError("masses must sum to one exactly")

    @classmethod
    def from_strata(cls, table: StratumTable) -> "DiscreteDistribution":
        return cls(table.distribution(), "exact-from-strata")

    @classmethod
    def from_samples(cls, samples: Sequence[int]) -> "DiscreteDistribution":
        if not samples:
            raise MatchlabError("no samples")
        if any(s < 0 for s in samples):
            raise MatchlabError("samples must be nonnegative integers")
        top = max(samples)
        counts = [0] * (top + 1)
        for s in samples:
            counts[s] += 1
        n = len(samples)
        return cls(tuple(Fraction(c, n) for c in counts), "empirical")


@dataclass(frozen=True)
class TvResult:
    value: Decimal
    error_bound: Decimal
    lam: Fraction

    def to_json_obj(self) -> dict:
        return {
            "tv": render(self.value, 12),
            "error_bound": str(self.error_bound),
            "lambda": [str(self.lam.numerator), str(self.lam.denominator)],
        }


def _tv_against_poisson(dist: DiscreteDistribution, lam: Fraction) -> TvResult:
    """Half the l1 distance; the Poisson tail beyond the finite support is
    folded in exactly as 1 - cdf so truncation is never silent."""
    ctx = _ctx()
    acc = Decimal(0)
    cdf = Decimal(0)
    for k, p in enumerate(dist.masses):
        q = poisson_pmf(lam, k)
        cdf = ctx.add(cdf, q)
        acc = ctx.add(acc, abs(ctx.subtract(to_decimal(p), q)))
    tail = ctx.subtract(Decimal(1), cdf)
    acc = ctx.add(acc, abs(tail))
    value = ctx.divide(acc, Decimal(2))
    return TvResult(value, TV_ERROR_BOUND, lam)


def tv_exact(table: StratumTable, lam: Fraction | int) -> TvResult:
    """Distance between the exact overlap distribution and Poisson(lam)."""
    lam = Fraction(lam)
    return _tv_against_poisson(DiscreteDistribution.from_strata(table), lam)


def tv_empirical(samples: Sequence[int], lam: Fraction | int) -> Decimal:
    """Distance between the empirical overlap pmf and Poisson(lam)."""
    lam = Fraction(lam)
    return _tv_against_poisson(
        DiscreteDistribution.from_samples(samples), lam
    ).value


@dataclass(frozen=True)
class ConvergenceRow:
    shape_label: str
    r: int
    part_size: int
    p0_exact: Decimal | None
    p0_limit: Decimal
    tv: Decimal | None
    runtime_ms: int
    status: str  # "ok" or a skip reason

    def csv_values(self, *, with_timing: bool = False) -> list[str]:
        return [
            self.shape_label,
            str(self.r),
            str(self.part_size),
            render(self.p0_exact, 9) if self.p0_exact is not None else self.status,
            render(self.p0_limit, 9),
            render(self.tv, 9) if self.tv is not None else self.status,
            str(self.runtime_ms if with_timing else 0),
        ]


CONVERGENCE_CSV_COLUMNS = [
    "shape",
    "r",
    "part_size",
    "p0_exact",
    "p0_limit",
    "tv",
    "runtime_ms",
]


def convergence_table(
    shapes: Iterable[MultipartiteShape],
    lambda_rule: Callable[[int], Fraction] = default_lambda,
    *,
    workers: int = 1,
) -> list[ConvergenceRow]:
    """One row per shape: exact no-overlap probability, its limit, and the
    distance to the limiting Poisson.  Intractable shapes are flagged, not
    fatal."""
    rows = []
    for shape in shapes:
        lam = lambda_rule(shape.r)
        limit = _exp(-lam)
        start = time.perf_counter()
        try:
            table = exact.strata_auto(shape, workers=workers)
            dist = table.distribution()
            p0 = to_decimal(dist[0])
            tv = tv_exact(table, lam).value
            status = "ok"
        except MatchlabError as err:
            p0 = tv = None
            status = f"skipped: {err}"
        ms = int((time.perf_counter() - start) * 1000)
        rows.append(
            ConvergenceRow(
                shape.label(), shape.r, max(shape.parts), p0, limit, tv, ms, status
            )
        )
    return rows


@dataclass(frozen=True)
class BoundInstance:
    """Two nonincreasing nonnegative integer lists with a common sum.

    Derived quantities: c is the floor-average, k the largest deviation of
    x from c, delta the largest offset with y_1 >= c + 2*delta.
    """

    x: tuple[int, ...]
    y: tuple[int, ...]

    def __post_init__(self) -> None:
        for name, seq in (("x", self.x), ("y", self.y)):
            if not seq:
                raise MatchlabError(f"{name} must be nonempty")
            if any(v < 0 for v in seq):
                raise MatchlabError(f"{name} must be nonnegative")
            if any(seq[i] < seq[i + 1] for i in range(len(seq) - 1)):
                raise MatchlabError(f"{name} must be nonincreasing")
        if len(self.x) != len(self.y):
            raise MatchlabError("x and y must have the same length")
        if sum(self.x) != sum(self.y):
            raise MatchlabError("x and y must have the same sum")

    @property
    def t(self) -> int:
        return len(self.x)

    @property
    def total(self) -> int:
        return sum(self.x)

    @property
    def c(self) -> int:
        return self.total // self.t

    @property
    def k(self) -> int:
        return max(abs(v - self.c) for v in self.x)

    @property
    def delta(self) -> int:
        return max(0, (self.y[0] - self.c) // 2)


@dataclass(frozen=True)
class BoundCheckResult:
    ratio: Decimal
    bound: Decimal
    passed: bool
    instance: BoundInstance

    def to_json_obj(self) -> dict:
        return {
            "x": list(self.instance.x),
            "y": list(self.instance.y),
            "ratio": render(self.ratio, 12),
            "bound": render(self.bound, 12),
            "passed": self.passed,
        }


def factorial_ratio_bound_check(inst: BoundInstance) -> BoundCheckResult:
    """Check prod x_i!/y_i! <= exp(-delta(delta-1)/(c+delta) + 2k^2 t/(c-k)).

    The comparison itself is exact: the ratio is a rational and the decimal
    exponential is compared through its exact rational reading.
    """
    c, k, t, delta = inst.c, inst.k, inst.t, inst.delta
    if c <= k:
        raise MatchlabError(
            f"bound check needs c > k (floor-average {c}, deviation {k})"
        )
    num = den = 1
    for xv, yv in zip(inst.x, inst.y):
        num *= math.factorial(xv)
        den *= math.factorial(yv)
    ratio = Fraction(num, den)
    exponent = Fraction(-delta * (delta - 1), c + delta) + Fraction(
        2 * k * k * t, c - k
    )
    bound = _exp(exponent)
    passed = ratio <= Fraction(bound)
    return BoundCheckResult(to_decimal(ratio), bound, passed, inst)


def random_bound_instance(
    rng: random.Random, *, max_t: int = 6, max_sum: int = 400
) -> BoundInstance:
    """Random valid instance: x stays within c-1 of the floor-average so the
    checker's c > k precondition always holds; y is unconstrained."""
    while True:
        t = rng.randint(1, max_t)
        total = rng.randint(t, max_sum)
        c = total // t
        if c < 2 and total % t != 0:
            # an uneven split forces k >= 1, breaking the c > k precondition
            continue
        # x: start balanced, move units while respecting |x_i - c| <= c-1
        x = [c + 1] * (total - c * t) + [c] * (t - (total - c * t))
        for _ in range(rng.randint(0, 3 * t)):
            i, j = rng.randrange(t), rng.randrange(t)
            if i != j and x[i] - c < c - 1 and x[j] - c > -(c - 1) and x[j] > 0:
                x[i] += 1
                x[j] -= 1
        # y: uniform composition of the same total
        cuts = sorted(rng.randint(0, total) for _ in range(t - 1))
        y = [b - a for a, b in zip([0] + cuts, cuts + [total])]
        return BoundInstance(
            tuple(sorted(x, reverse=True)), tuple(sorted(y, reverse=True))
        )


@dataclass(frozen=True)
class ConcentrationReport:
    """Per-sample deviations of a census from its predicted center, in units
    of sqrt(n log n)."""

    center: Fraction
    noise_n: int
    constant: float
    sample_count: int
    max_normalized_deviation: float
    fraction_within: float

    @property
    def all_within(self) -> bool:
        return self.fraction_within == 1.0

    def passes(self, min_fraction: float = 1.0) -> bool:
        return self.fraction_within >= min_fraction

    def to_json_obj(self) -> dict:
        return {
            "center": [str(self.center.numerator), str(self.center.denominator)],
            "noise_n": self.noise_n,
            "constant": self.constant,
            "sample_count": self.sample_count,
            "max_normalized_deviation": round(self.max_normalized_deviation, 6),
            "fraction_within": round(self.fraction_within, 6),
        }


def concentration_summary(
    censuses: Sequence[Mapping | Sequence[int]],
    center: Fraction | int,
    noise_n: int,
    *,
    constant: float = 4.0,
) -> ConcentrationReport:
    """Summarize census streams against center +- constant*sqrt(n log n).

    Each census is either a mapping key -> count or a plain sequence of
    counts; every entry is compared to the same predicted center.
    """
    if not censuses:
        raise MatchlabError("no censuses to summarize")
    if noise_n < 2:
        raise MatchlabError("noise_n must be at least 2")
    center = Fraction(center)
    scale = math.sqrt(noise_n * math.log(noise_n))
    per_sample_max = []
    for census in censuses:
        values = list(census.values()) if isinstance(census, Mapping) else list(census)
        if not values:
            raise MatchlabError("empty census entry")
        dev = max(abs(Fraction(int(v)) - center) for v in values)
        per_sample_max.append(float(dev) / scale)
    arr = np.asarray(per_sample_max)
    return ConcentrationReport(
        center=center,
        noise_n=noise_n,
        constant=constant,
        sample_count=len(per_sample_max),
        max_normalized_deviation=float(arr.max()),
        fraction_within=float(np.mean(arr <= constant)),
    )


def uniformity_chisquare(observed_counts: Sequence[int]) -> tuple[float, float]:
    """Chi-square statistic and p-value of observed counts against the
    uniform distribution over the same support."""
    arr = np.asarray(observed_counts, dtype=float)
    if arr.size < 2:
        raise MatchlabError("chi-square needs at least two cells")
    stat, p = scipy_stats.chisquare(arr)
    return float(stat), float(p)
