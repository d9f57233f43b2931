import math
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest

from matchlab import MatchlabError, MultipartiteShape, StratumTable
from matchlab import exact, sampler, stats


class TestPoissonPmf:
    def test_reference_values(self):
        assert str(stats.poisson_pmf(Fraction(3, 4), 0))[:8] == "0.472366"
        assert str(stats.poisson_pmf(1, 0))[:8] == "0.367879"

    def test_masses_sum_to_one(self):
        for lam in (Fraction(1, 2), Fraction(3, 4), Fraction(1), Fraction(2)):
            total = sum(stats.poisson_pmf(lam, k) for k in range(201))
            assert abs(total - 1) < Decimal("1e-12")

    def test_partial_sums_monotone(self):
        import decimal

        # beyond k ~ 37 the tail drops under the 50-digit resolution
        with decimal.localcontext(decimal.Context(prec=stats.PRECISION)):
            acc = Decimal(0)
            prev = Decimal(-1)
            for k in range(30):
                acc += stats.poisson_pmf(Fraction(3, 4), k)
                assert prev < acc < 1
                prev = acc

    def test_invalid_inputs(self):
        with pytest.raises(MatchlabError):
            stats.poisson_pmf(Fraction(-1), 0)
        with pytest.raises(MatchlabError):
            stats.poisson_pmf(1, -2)


class TestTvExact:
    def test_2x2x2_value(self):
        table = exact.strata(
            MultipartiteShape((2, 2, 2)), exact.canonical_perfect_profile(MultipartiteShape((2, 2, 2)))
        )
        res = stats.tv_exact(table, Fraction(3, 4))
        assert stats.render(res.value) == "0.140145"
        assert res.error_bound <= Decimal("1e-12")

    def test_point_mass_at_zero(self):
        table = StratumTable(None, None, (7,))  # all mass at overlap 0
        res = stats.tv_exact(table, Fraction(1))
        expected = 1 - math.exp(-1)
        assert abs(float(res.value) - expected) < 1e-12

    def test_poisson_against_itself_truncated(self):
        # distribution equal to Poisson on a long prefix: distance is the
        # (astronomically small) tail beyond the prefix
        lam = Fraction(3, 4)
        masses = [stats.poisson_pmf(lam, k) for k in range(120)]
        fr = [Fraction(str(m)) for m in masses]
        fr[0] += 1 - sum(fr)  # renormalize the float-free masses exactly
        dist = stats.DiscreteDistribution(tuple(fr), "exact-from-strata")
        res = stats._tv_against_poisson(dist, lam)
        assert res.value < Decimal("1e-12")

    def test_empty_table_rejected(self):
        with pytest.raises(MatchlabError):
            stats.tv_exact(StratumTable(None, None, (0,)), Fraction(1))


class TestTvEmpirical:
    def test_all_zero_samples(self):
        got = stats.tv_empirical([0] * 1000, Fraction(1))
        assert abs(float(got) - (1 - math.exp(-1))) < 1e-12

    def test_single_zero_sample_vanishing_lambda(self):
        got = stats.tv_empirical([0], Fraction(1, 10**9))
        assert float(got) < 1e-6

    def test_empty_samples_rejected(self):
        with pytest.raises(MatchlabError):
            stats.tv_empirical([], Fraction(1))

    def test_poisson_draws_land_close(self):
        rng = np.random.default_rng(1234)
        samples = rng.poisson(0.75, size=100_000).tolist()
        assert float(stats.tv_empirical(samples, Fraction(3, 4))) <= 0.02

    def test_agrees_with_exact_on_sampled_strata(self):
        shape = MultipartiteShape((2, 2, 2))
        m = exact.canonical_matching(shape, exact.canonical_perfect_profile(shape))
        table = exact.strata(shape, exact.canonical_perfect_profile(shape))
        rng = sampler.make_rng(17)
        n = 10_000
        xs = [
            sampler.overlap_statistic(sampler.sample_uniform_pm(shape, rng), m)
            for _ in range(n)
        ]
        lam = Fraction(3, 4)
        emp = float(stats.tv_empirical(xs, lam))
        ex = float(stats.tv_exact(table, lam).value)
        assert abs(emp - ex) <= 2 / math.sqrt(n) + 1e-6


class TestConvergenceTable:
    def test_bipartite_column_is_derangement_ratio(self):
        shapes = [MultipartiteShape((m, m)) for m in range(2, 11)]
        rows = stats.convergence_table(shapes)
        for m, row in zip(range(2, 11), rows):
            assert row.status == "ok"
            expected = Fraction(exact.derangements(m), math.factorial(m))
            assert abs(float(row.p0_exact) - float(expected)) < 1e-15
        # approaching exp(-1)
        assert abs(float(rows[-1].p0_exact) - math.exp(-1)) < 1e-6

    def test_tripartite_trend(self):
        shapes = [MultipartiteShape((m, m, m)) for m in (2, 10, 50)]
        rows = stats.convergence_table(shapes)
        errs = [abs(float(r.p0_exact) - math.exp(-0.75)) for r in rows]
        assert errs == sorted(errs, reverse=True)
        assert errs[-1] < 0.01

    def test_complete_graph_trend(self):
        shapes = [MultipartiteShape((1,) * (2 * n)) for n in (2, 4, 8)]
        rows = stats.convergence_table(shapes)
        errs = [abs(float(r.p0_exact) - math.exp(-0.5)) for r in rows]
        assert errs == sorted(errs, reverse=True)

    def test_infeasible_shape_is_flagged(self):
        rows = stats.convergence_table([MultipartiteShape((3, 3, 3))])
        assert rows[0].status.startswith("skipped")
        assert rows[0].p0_exact is None


class TestBoundChecker:
    def test_example_3_3_vs_5_1(self):
        inst = stats.BoundInstance((3, 3), (5, 1))
        assert (inst.c, inst.k, inst.delta) == (3, 0, 1)
        res = stats.factorial_ratio_bound_check(inst)
        assert res.passed
        assert abs(float(res.ratio) - 0.3) < 1e-12
        assert abs(float(res.bound) - 1.0) < 1e-12

    def test_boundary_x_equals_y(self):
        inst = stats.BoundInstance((4, 4), (4, 4))
        res = stats.factorial_ratio_bound_check(inst)
        assert res.passed
        assert float(res.ratio) == 1.0
        assert float(res.bound) == 1.0

    def test_example_4s_vs_6_4_2(self):
        res = stats.factorial_ratio_bound_check(stats.BoundInstance((4, 4, 4), (6, 4, 2)))
        assert res.passed
        assert abs(float(res.ratio) - 0.4) < 1e-12

    def test_invariant_violations(self):
        with pytest.raises(MatchlabError):
            stats.BoundInstance((1, 3), (2, 2))  # not nonincreasing
        with pytest.raises(MatchlabError):
            stats.BoundInstance((3, 3), (4, 1))  # sums differ
        with pytest.raises(MatchlabError):
            stats.BoundInstance((3, -3), (0, 0))

    def test_precondition_c_greater_than_k(self):
        with pytest.raises(MatchlabError):
            stats.factorial_ratio_bound_check(stats.BoundInstance((2, 0), (1, 1)))

    def test_randomized_instances_hold(self):
        rng = sampler.make_rng(2024)
        for _ in range(2000):
            inst = stats.random_bound_instance(rng)
            res = stats.factorial_ratio_bound_check(inst)
            assert res.passed, inst


class TestConcentration:
    def test_unique_vector_means_zero_deviation(self):
        shape = MultipartiteShape((6, 6))
        m = exact.canonical_matching(shape, exact.canonical_perfect_profile(shape))
        rng = sampler.make_rng(0)
        censuses = [
            dict(
                ((i, j), v)
                for i, j, v in sampler.block_census(
                    sampler.sample_uniform_pm(shape, rng), shape
                ).items()
            )
            for _ in range(10)
        ]
        rep = stats.concentration_summary(censuses, Fraction(6, 1), 6)
        assert rep.max_normalized_deviation == 0.0
        assert rep.all_within

    def test_pass_fail_logic(self):
        rep = stats.concentration_summary([[10, 10], [30, 10]], Fraction(10), 100, constant=1.0)
        # sqrt(100 ln 100) ~ 21.5; deviation 20 is within, so both samples pass
        assert rep.fraction_within == 1.0
        tight = stats.concentration_summary([[10, 10], [30, 10]], Fraction(10), 100, constant=0.5)
        assert tight.fraction_within == 0.5
        assert not tight.all_within
        assert tight.passes(min_fraction=0.5)

    def test_empty_input_rejected(self):
        with pytest.raises(MatchlabError):
            stats.concentration_summary([], Fraction(1), 10)


class TestDistributions:
    def test_from_strata_is_exact(self):
        d = stats.DiscreteDistribution.from_strata(StratumTable(None, None, (4, 3, 0, 1)))
        assert sum(d.masses) == 1
        assert d.provenance == "exact-from-strata"

    def test_from_samples(self):
        d = stats.DiscreteDistribution.from_samples([0, 0, 1, 3])
        assert d.masses == (Fraction(1, 2), Fraction(1, 4), Fraction(0), Fraction(1, 4))

    def test_render_fixed_digits(self):
        assert stats.render(Fraction(1, 3)) == "0.333333"
        assert stats.render(Fraction(2, 3), 3) == "0.667"
        assert stats.render(Fraction(0)) == "0"
