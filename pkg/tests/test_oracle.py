import itertools

import pytest
from fractions import Fraction

from matchlab import (
    GeneralGraph,
    LabeledMatching,
    MatchlabError,
    MultipartiteShape,
    VertexBudgetError,
    VertexId,
    overlap,
)
from matchlab import exact, oracle


def flat(*ids):
    return LabeledMatching.of((((a, 0), (b, 0)) for a, b in ids))


class TestEnumerate:
    def test_k4(self):
        assert oracle.count_pm(GeneralGraph.complete(4)) == 3

    def test_single_edge(self):
        g = GeneralGraph(2, frozenset({(0, 1)}))
        assert list(oracle.enumerate_pm(g)) == [flat((0, 1))]

    def test_k33(self):
        assert oracle.count_pm(MultipartiteShape((3, 3))) == 6

    def test_odd_vertex_count_is_empty(self):
        assert list(oracle.enumerate_pm(GeneralGraph.complete(5))) == []

    def test_budget_guard(self):
        with pytest.raises(VertexBudgetError):
            list(oracle.enumerate_pm(GeneralGraph.complete(18)))
        # override allows it
        stream = oracle.enumerate_pm(GeneralGraph.complete(18), allow_large=True)
        next(stream)

    def test_deterministic_order(self):
        g = GeneralGraph.complete(6)
        first = list(oracle.enumerate_pm(g))
        assert first == list(oracle.enumerate_pm(g))
        # smallest vertex matched first, partners ascending
        assert first[0] == flat((0, 1), (2, 3), (4, 5))
        assert first[1] == flat((0, 1), (2, 4), (3, 5))

    @pytest.mark.parametrize("parts", [(2, 2), (2, 2, 2), (1, 1, 1, 1), (3, 3), (4, 2, 2)])
    def test_counts_match_exact_engine(self, parts):
        shape = MultipartiteShape(parts)
        assert oracle.count_pm(shape) == exact.pm_total(shape)


class TestStrataOracle:
    def test_k6_perfect(self):
        g = GeneralGraph.complete(6)
        assert oracle.strata_oracle(g, flat((0, 1), (2, 3), (4, 5))).strata == (8, 6, 0, 1)

    def test_k22_perfect(self):
        shape = MultipartiteShape((2, 2))
        m = LabeledMatching.of([((0, 0), (1, 0)), ((0, 1), (1, 1))])
        assert oracle.strata_oracle(shape, m).strata == (1, 0, 1)

    def test_empty_deleted_matching(self):
        g = GeneralGraph.complete(4)
        assert oracle.strata_oracle(g, LabeledMatching.empty()).strata == (3,)

    def test_non_subgraph_rejected(self):
        shape = MultipartiteShape((2, 2))
        intra = flat((0, 1))  # both endpoints in part 0 area of the shape labeling
        bad = LabeledMatching.of([((0, 0), (0, 1))])
        with pytest.raises(MatchlabError):
            oracle.strata_oracle(shape, bad)
        del intra

    def test_automorphism_invariance(self):
        # swapping the two slots of a part fixes the strata
        shape = MultipartiteShape((2, 2, 2))
        m1 = LabeledMatching.of([((0, 0), (1, 0)), ((0, 1), (2, 0)), ((1, 1), (2, 1))])
        m2 = LabeledMatching.of([((0, 1), (1, 0)), ((0, 0), (2, 0)), ((1, 1), (2, 1))])
        assert oracle.strata_oracle(shape, m1).strata == oracle.strata_oracle(shape, m2).strata


class TestEdgeProbability:
    def test_k4(self):
        g = GeneralGraph.complete(4)
        assert oracle.edge_probability(g, ((0, 0), (1, 0))) == Fraction(1, 3)

    def test_single_edge(self):
        g = GeneralGraph(2, frozenset({(0, 1)}))
        assert oracle.edge_probability(g, ((0, 0), (1, 0))) == 1

    def test_k22(self):
        shape = MultipartiteShape((2, 2))
        assert oracle.edge_probability(shape, ((0, 0), (1, 0))) == Fraction(1, 2)

    def test_not_an_edge(self):
        shape = MultipartiteShape((2, 2))
        with pytest.raises(MatchlabError):
            oracle.edge_probability(shape, ((0, 0), (0, 1)))

    def test_linearity_of_expectation(self):
        g = GeneralGraph.complete(8)
        m = flat((0, 1), (2, 3), (4, 5), (6, 7))
        table = oracle.strata_oracle(g, m)
        lhs = sum(oracle.edge_probability(g, pair) for pair in m.pairs)
        assert lhs == table.expected_overlap()


class TestRandomMinDegreeGraph:
    def test_t0_is_complete(self):
        g = oracle.random_min_degree_graph(4, 0, seed=1)
        assert g == GeneralGraph.complete(8)

    def test_planted_matching_and_degree_bound(self):
        for seed in range(5):
            g = oracle.random_min_degree_graph(5, 2, seed=seed)
            n = g.n_vertices
            assert g.min_degree >= n - 1 - 2
            planted = flat(*[(2 * i, 2 * i + 1) for i in range(5)])
            assert planted.is_subgraph_of(g)
            assert any(True for _ in oracle.enumerate_pm(g))

    def test_seed_determinism(self):
        a = oracle.random_min_degree_graph(5, 3, seed=42)
        b = oracle.random_min_degree_graph(5, 3, seed=42)
        c = oracle.random_min_degree_graph(5, 3, seed=43)
        assert a == b
        assert a != c  # astronomically unlikely to collide

    def test_bad_t(self):
        with pytest.raises(MatchlabError):
            oracle.random_min_degree_graph(4, 8, seed=0)


class TestOracleReport:
    def test_report_json(self):
        shape = MultipartiteShape((2, 2))
        m = LabeledMatching.of([((0, 0), (1, 0)), ((0, 1), (1, 1))])
        rep = oracle.oracle_report(shape, m, with_edge_counts=True)
        obj = rep.to_json_obj()
        assert obj["total"] == "2"
        assert obj["table"]["strata"] == ["1", "0", "1"]
        # every edge of K_{2,2} is in exactly one of the two matchings
        assert all(e["count"] == "1" for e in obj["edge_containment"])
