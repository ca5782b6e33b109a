"""Sessions (budget, cache, determinism) and the built-in classifiers."""

import numpy as np
import pytest

from graphcf import (
    BudgetExhaustedError,
    BackendFailureError,
    DatasetItem,
    EdgeCountThresholdClassifier,
    Graph,
    GraphError,
    KnnEditDistanceClassifier,
    LabeledDataset,
    LinearContrastClassifier,
    NondeterministicBackendError,
    OracleSession,
    VertexUniverse,
    audit_determinism,
    embed_contrast,
    induced_edge_count,
)

from conftest import random_graph


class FlakyBackend:
    """Deterministic for the first call per graph, then flips; for audits."""

    def __init__(self, universe):
        self.universe = universe
        self.seen = set()

    def classify(self, graph):
        key = graph.key()
        if key in self.seen:
            return 0
        self.seen.add(key)
        return 1


class TestOracleSession:
    def test_counts_distinct_queries_only(self, uni6):
        session = OracleSession(EdgeCountThresholdClassifier(uni6, 2))
        g = Graph(uni6, [(0, 1), (1, 2)])
        assert session.classify(g) == 1
        assert session.classify(g) == 1
        assert session.calls_used == 1
        assert session.cache_hits == 1

    def test_phase_budget_enforced(self, uni6):
        session = OracleSession(EdgeCountThresholdClassifier(uni6, 2), cache=False)
        g1, g2, g3 = (Graph(uni6, [(0, i)]) for i in (1, 2, 3))
        with session.phase("p", 2):
            session.classify(g1)
            session.classify(g2)
            with pytest.raises(BudgetExhaustedError):
                session.classify(g3)
        assert session.phase_calls("p") == 2

    def test_cache_hits_do_not_consume_budget(self, uni6):
        session = OracleSession(EdgeCountThresholdClassifier(uni6, 2))
        g = Graph(uni6, [(0, 1)])
        with session.phase("p", 1):
            session.classify(g)
            for _ in range(5):
                session.classify(g)  # hits, free
        assert session.phase_calls("p") == 1
        assert session.cache_hits == 5

    def test_audit_is_uncounted(self, uni6):
        session = OracleSession(EdgeCountThresholdClassifier(uni6, 2))
        g = Graph(uni6, [(0, 1)])
        with session.phase("p", 1):
            session.classify(g)
            assert session.audit(Graph(uni6, [(0, 2)])) == 0
        assert session.calls_used == 1

    def test_bad_label_is_backend_failure(self, uni6):
        class Bad:
            universe = uni6

            def classify(self, graph):
                return 2

        with pytest.raises(BackendFailureError, match="label 2"):
            OracleSession(Bad()).classify(Graph(uni6))

    def test_cross_check_catches_flips(self, uni6):
        session = OracleSession(FlakyBackend(uni6), cross_check=True)
        g = Graph(uni6, [(0, 1)])
        session.classify(g)
        with pytest.raises(NondeterministicBackendError):
            session.classify(g)

    def test_determinism_audit(self, uni6):
        rng = np.random.default_rng(0)
        graphs = [random_graph(rng, uni6) for _ in range(100)]
        audit_determinism(EdgeCountThresholdClassifier(uni6, 4), graphs)
        with pytest.raises(NondeterministicBackendError):
            audit_determinism(FlakyBackend(uni6), graphs)


class TestContrastEmbedding:
    def test_clique_counts(self):
        universe = VertexUniverse.anonymous(8)
        s1 = [0, 1, 2, 3]
        clique = Graph(universe, [(u, v) for u in s1 for v in s1 if u < v])
        assert embed_contrast(clique, s1, [4, 5, 6]) == (6, 0)
        assert embed_contrast(Graph(universe), s1, [4, 5, 6]) == (0, 0)

    def test_matches_exhaustive_pair_scan(self):
        universe = VertexUniverse.anonymous(12)
        rng = np.random.default_rng(23)
        s1, s2 = [0, 2, 4, 6], [1, 3, 5, 7, 9]
        for _ in range(20):
            g = random_graph(rng, universe, density=0.4)
            brute1 = sum((u, v) in g for u in s1 for v in s1 if u < v)
            brute2 = sum((u, v) in g for u in s2 for v in s2 if u < v)
            assert embed_contrast(g, s1, s2) == (brute1, brute2)
            assert induced_edge_count(g, s1) == brute1


class TestLinearContrastClassifier:
    def test_above_the_line_is_class_one(self):
        universe = VertexUniverse.anonymous(10)
        s1, s2 = [0, 1, 2, 3], [4, 5, 6]
        wb = LinearContrastClassifier(universe, s1, s2, m=1.0, c=0.0)
        # 5 edges inside s1 (the y axis), 1 inside s2 (the x axis): (1, 5)
        g = Graph(universe, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (4, 5)])
        assert wb.embed(g) == (1, 5)
        assert wb.classify(g) == 1

    def test_boundary_point_is_negative_class(self):
        universe = VertexUniverse.anonymous(10)
        wb = LinearContrastClassifier(universe, [0, 1, 2], [4, 5, 6], m=1.0, c=0.0)
        assert wb.classify_point(2, 2) == 0
        assert wb.classify_point(2, 2.0001) == 1
        below = LinearContrastClassifier(universe, [0, 1, 2], [4, 5, 6],
                                         m=1.0, c=0.0, positive_side="below")
        assert below.classify_point(2, 2) == 0
        assert below.classify_point(2, 1.999) == 1

    def test_rejects_degenerate_slope(self):
        universe = VertexUniverse.anonymous(6)
        with pytest.raises(GraphError):
            LinearContrastClassifier(universe, [0, 1], [2, 3], m=0.0, c=0.0)
        with pytest.raises(GraphError):
            LinearContrastClassifier(universe, [0, 1], [2, 3], m=float("inf"), c=0.0)


class TestKnnClassifier:
    def make_reference(self):
        universe = VertexUniverse.anonymous(6)
        items = [
            DatasetItem("p", Graph(universe, [(0, 1), (0, 2), (1, 2)]), 1),
            DatasetItem("q", Graph(universe, [(3, 4), (3, 5), (4, 5)]), 0),
            DatasetItem("r", Graph(universe, [(0, 1), (0, 2)]), 1),
        ]
        return LabeledDataset(universe, items)

    def test_exact_match_returns_its_label(self):
        ref = self.make_reference()
        knn = KnnEditDistanceClassifier(ref, k_neighbors=1)
        assert knn.classify(ref["p"].graph) == 1
        assert knn.classify(ref["q"].graph) == 0

    def test_majority_vote(self):
        ref = self.make_reference()
        knn = KnnEditDistanceClassifier(ref, k_neighbors=3)
        # any graph is voted on by all three references: labels 1, 0, 1
        assert knn.classify(Graph(ref.universe, [(0, 5)])) == 1

    def test_even_k_rejected(self):
        with pytest.raises(GraphError, match="odd"):
            KnnEditDistanceClassifier(self.make_reference(), k_neighbors=2)

    def test_k_larger_than_reference_rejected(self):
        with pytest.raises(GraphError, match="exceeds"):
            KnnEditDistanceClassifier(self.make_reference(), k_neighbors=5)
