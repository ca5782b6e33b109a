"""Contrastive text, local frequencies, global counters, and aggregations."""

import numpy as np
import pytest

from graphcf import (
    DatasetItem,
    EdgeCountThresholdClassifier,
    Graph,
    GraphError,
    GlobalCounters,
    LabeledDataset,
    LinearContrastClassifier,
    SearchConfig,
    VertexUniverse,
    all_pairs,
    contrastive_explanation,
    counter_mass_split,
    generate_synthetic,
    global_counters,
    local_explanation,
    pair_index,
    region_heatmap,
    roi_importance,
    symmetric_difference,
)

from conftest import random_graph


class TestContrastiveExplanation:
    def test_one_removal_one_addition_names_four_vertices(self):
        universe = VertexUniverse(("hub_left", "hub_right", "rim_a", "rim_b"))
        original = Graph(universe, [(0, 1), (2, 3)])
        counterfactual = Graph(universe, [(0, 1), (1, 2)])
        exp = contrastive_explanation(original, counterfactual,
                                      graph_id="case-1", predicted_label=1)
        assert exp.removed.edges() == [(2, 3)]
        assert exp.added.edges() == [(1, 2)]
        for name in ("rim_a", "rim_b", "hub_right", "rim_a"):
            assert name in exp.text
        assert "class 1" in exp.text and "class 0" in exp.text

    def test_identical_pair_is_flagged_degenerate(self, uni6):
        g = Graph(uni6, [(0, 1)])
        exp = contrastive_explanation(g, g)
        assert not exp.removed and not exp.added
        assert "degenerate" in exp.text

    def test_sets_partition_the_symmetric_difference(self, uni10):
        rng = np.random.default_rng(3)
        for _ in range(25):
            a, b = random_graph(rng, uni10), random_graph(rng, uni10)
            exp = contrastive_explanation(a, b)
            union = set(exp.removed.edges()) | set(exp.added.edges())
            assert union == set(symmetric_difference(a, b).edges())
            assert not (set(exp.removed.edges()) & set(exp.added.edges()))


class SingleEdgeBackend:
    """Label depends on one edge only; its diff is the whole explanation."""

    def __init__(self, universe, edge):
        self.universe = universe
        self.edge = edge

    def classify(self, graph):
        return 1 if self.edge in graph else 0


class TestLocalExplanation:
    def test_single_feature_oracle_concentrates_all_mass(self, uni6):
        edge = (1, 3)
        backend = SingleEdgeBackend(uni6, edge)
        original = Graph(uni6, [edge, (0, 1)])
        cfg = SearchConfig(k=1, seed=10)
        exp = local_explanation(original, backend, cfg, n_counterfactuals=20,
                                graph_id="g")
        assert exp.n_successes == 20
        assert exp.remove_freq == {edge: 20}
        assert exp.add_freq == {}

    def test_one_run_is_an_indicator_of_one_diff(self):
        # 3-vertex universe: the addition pool (1 slot) drains immediately,
        # after which forced removals guarantee the flip for every seed
        universe = VertexUniverse.anonymous(3)
        backend = EdgeCountThresholdClassifier(universe, 2)
        original = Graph(universe, [(0, 1), (1, 2)])
        exp = local_explanation(original, backend, SearchConfig(k=1, seed=4),
                                n_counterfactuals=1)
        assert exp.n_successes == 1
        assert set(exp.add_freq.values()) <= {1}
        assert set(exp.remove_freq.values()) <= {1}

    def test_per_run_contribution_matches_diff_size(self, uni6):
        from graphcf import OracleSession, run_pipeline

        backend = EdgeCountThresholdClassifier(uni6, 3)
        original = Graph(uni6, [(0, 1), (0, 2), (1, 2), (3, 4)])
        cfg = SearchConfig(seed=21)
        exp = local_explanation(original, backend, cfg, n_counterfactuals=1)
        session = OracleSession(backend)
        res = run_pipeline(original, session, cfg)
        assert sum(exp.add_freq.values()) == len(res.added_edges())
        assert sum(exp.remove_freq.values()) == len(res.removed_edges())

    def test_membership_soundness(self, uni6):
        backend = EdgeCountThresholdClassifier(uni6, 3)
        original = Graph(uni6, [(0, 1), (0, 2), (1, 2), (3, 4)])
        exp = local_explanation(original, backend, SearchConfig(seed=2),
                                n_counterfactuals=15)
        assert all(e not in original for e in exp.add_freq)
        assert all(e in original for e in exp.remove_freq)
        assert all(c <= 15 for c in exp.add_freq.values())


class TestGlobalCounters:
    def test_single_pair_single_added_edge(self, uni6):
        counters = GlobalCounters.empty(uni6)
        original = Graph(uni6, [(0, 1)])
        counterfactual = Graph(uni6, [(0, 1), (2, 3)])
        counters.record(original, counterfactual, predicted_label=0, graph_id="g")
        slot = pair_index(6, 2, 3)
        assert counters.c0_plus[slot] == 1
        assert counters.c0_plus.sum() == 1
        assert counters.c0_minus.sum() == 0
        assert counters.c1_plus.sum() == 0
        assert counters.c1_minus.sum() == 0

    def test_opposite_predictions_split_across_classes(self, uni6):
        counters = GlobalCounters.empty(uni6)
        a = Graph(uni6, [(0, 1)])
        b = Graph(uni6, [(0, 2)])
        counters.record(a, b, predicted_label=0)
        counters.record(a, b, predicted_label=1)
        assert counters.c0_plus.sum() == 1 and counters.c0_minus.sum() == 1
        assert counters.c1_plus.sum() == 1 and counters.c1_minus.sum() == 1

    def test_conservation_total_equals_sum_of_diffs(self, uni10):
        rng = np.random.default_rng(13)
        counters = GlobalCounters.empty(uni10)
        expected = 0
        for i in range(30):
            a, b = random_graph(rng, uni10), random_graph(rng, uni10)
            expected += len(symmetric_difference(a, b))
            counters.record(a, b, predicted_label=int(rng.integers(2)))
        assert counters.total_increments() == expected

    def test_end_to_end_collection_counts_by_oracle_label(self, uni6):
        backend = EdgeCountThresholdClassifier(uni6, 3)
        items = [
            DatasetItem("dense", Graph(uni6, [(0, 1), (0, 2), (1, 2), (3, 4)]), 1),
            # ground-truth label says 1, oracle says 0: must land in class-0 counters
            DatasetItem("sparse", Graph(uni6, [(0, 1)]), 1),
            DatasetItem("zero", Graph(uni6, [(2, 3)]), 0),
        ]
        dataset = LabeledDataset(uni6, items)
        counters = global_counters(dataset, backend, SearchConfig(k=1, seed=6))
        assert counters.failures == 0
        by_graph = dict(counters.provenance)
        assert set(by_graph) == {"dense", "sparse", "zero"}
        # the two oracle-class-0 graphs only add edges; the class-1 one removes
        assert counters.c0_plus.sum() > 0
        assert counters.c1_minus.sum() > 0


class TestAggregations:
    def region_universe(self):
        return VertexUniverse.anonymous(
            6, region_of={0: "A", 1: "A", 2: "B", 3: "B", 4: "C", 5: "C"}
        )

    def test_single_edge_heatmap_cell(self):
        universe = self.region_universe()
        counters = GlobalCounters.empty(universe)
        counters.c0_plus[pair_index(6, 0, 2)] = 3  # edge spanning regions A-B
        matrix = region_heatmap(counters, universe, side="class1")
        a, b = matrix.regions.index("A"), matrix.regions.index("B")
        assert matrix.matrix[a][b] == 3
        assert matrix.matrix[b][a] == 0
        assert matrix.sides == {"upper": "c0_plus", "lower": "c1_minus",
                                "diagonal": "c0_plus"}

    def test_zero_counters_zero_matrix(self):
        universe = self.region_universe()
        matrix = region_heatmap(GlobalCounters.empty(universe), universe, "class0")
        assert not matrix.matrix.any()

    def test_matches_brute_force_regroup(self):
        universe = self.region_universe()
        rng = np.random.default_rng(2)
        counters = GlobalCounters.empty(universe)
        counters.c0_plus[:] = rng.integers(0, 5, universe.n_pairs)
        counters.c1_minus[:] = rng.integers(0, 5, universe.n_pairs)
        matrix = region_heatmap(counters, universe, "class1")
        regions = matrix.regions
        for i, r1 in enumerate(regions):
            for j, r2 in enumerate(regions):
                want = 0
                for slot, (u, v) in enumerate(all_pairs(6)):
                    ru, rv = universe.region_of[int(u)], universe.region_of[int(v)]
                    if {ru, rv} != {r1, r2}:
                        continue
                    if i < j or i == j:
                        want += int(counters.c0_plus[slot]) if i <= j else 0
                    if i > j:
                        want += int(counters.c1_minus[slot])
                assert matrix.matrix[i][j] == want

    def test_region_map_required(self, uni6):
        with pytest.raises(GraphError, match="region"):
            region_heatmap(GlobalCounters.empty(uni6), uni6, "class1")

    def test_symmetry_score_bounds(self):
        universe = self.region_universe()
        counters = GlobalCounters.empty(universe)
        a_b = pair_index(6, 0, 2)  # spans regions A and B
        counters.c0_plus[a_b] = 4
        counters.c1_minus[a_b] = 4
        mirrored = region_heatmap(counters, universe, "class1")
        assert mirrored.symmetry_score() == 1.0
        counters.c1_minus[a_b] = 0
        lopsided = region_heatmap(counters, universe, "class1")
        assert lopsided.symmetry_score() == 0.0
        empty = region_heatmap(GlobalCounters.empty(universe), universe, "class1")
        assert empty.symmetry_score() == 1.0

    def test_star_importance_and_incidence(self):
        universe = self.region_universe()
        counters = GlobalCounters.empty(universe)
        for leaf in (1, 2, 3):  # star around vertex 0
            counters.c1_minus[pair_index(6, 0, leaf)] = leaf
        table = roi_importance(counters, universe)
        assert table.c1_minus[0] == 1 + 2 + 3
        for leaf in (1, 2, 3):
            assert table.c1_minus[leaf] == leaf  # each edge feeds both endpoints

    def test_handshake_identity(self, uni10):
        rng = np.random.default_rng(5)
        counters = GlobalCounters.empty(uni10)
        counters.c0_plus[:] = rng.integers(0, 7, uni10.n_pairs)
        counters.c1_plus[:] = rng.integers(0, 7, uni10.n_pairs)
        table = roi_importance(counters, uni10)
        assert table.c0_plus.sum() == 2 * counters.c0_plus.sum()
        assert table.c1_plus.sum() == 2 * counters.c1_plus.sum()


class TestLitmus:
    def test_planted_white_box_mass_concentrates_inside(self):
        s1, s2 = [0, 1, 2, 3], [4, 5, 6, 7]
        dataset = generate_synthetic(12, 10, s1, s2, 0.9, 0.1, 0.3, seed=33)
        wb = LinearContrastClassifier(dataset.universe, s1, s2, m=1.0, c=0.0)
        counters = global_counters(dataset, wb, SearchConfig(seed=1))
        inside, outside = counter_mass_split(counters, s1 + s2)
        assert inside > 0
        assert inside >= 10 * outside
