"""Dataset persistence, correlation thresholding, and the synthetic generator."""

import json

import numpy as np
import pytest

from graphcf import (
    DatasetError,
    DatasetItem,
    Graph,
    LabeledDataset,
    VertexUniverse,
    dataset_to_json,
    generate_synthetic,
    induced_pair_mask,
    load_dataset,
    save_dataset,
    threshold_matrix,
)


def symmetric(values, n):
    mat = np.zeros((n, n))
    mat[np.triu_indices(n, k=1)] = values
    mat = mat + mat.T
    np.fill_diagonal(mat, 1.0)
    return mat


class TestThresholdMatrix:
    def test_hand_computed_median(self):
        # off-diagonal multiset {0.1, 0.5, 0.9}; nearest-rank p50 threshold is
        # the 2nd smallest (0.5); only the strictly larger 0.9 pair survives.
        mat = symmetric([0.1, 0.5, 0.9], 3)
        graph = threshold_matrix(mat, 50)
        assert graph.edges() == [(1, 2)]

    def test_percentile_zero_drops_only_the_minimum(self):
        values = [0.2, 0.4, 0.6, 0.8, 0.3, 0.7]
        mat = symmetric(values, 4)
        graph = threshold_matrix(mat, 0)
        assert len(graph) == 5  # complete graph minus the strictly-minimal pair
        assert (0, 1) not in graph  # slot of the 0.2 entry

    def test_all_equal_values_yield_empty_graph(self):
        mat = symmetric([0.5] * 10, 5)
        assert len(threshold_matrix(mat, 90)) == 0

    def test_default_percentile_keeps_a_tenth(self):
        rng = np.random.default_rng(3)
        n = 40
        values = rng.uniform(-1, 1, size=n * (n - 1) // 2)  # distinct a.s.
        graph = threshold_matrix(symmetric(values, n), 90.0)
        expected = values.size - int(np.ceil(0.9 * values.size))
        assert len(graph) == expected

    def test_rejects_asymmetry(self):
        mat = symmetric([0.1, 0.2, 0.3], 3)
        mat[0, 1] += 1e-3
        with pytest.raises(DatasetError, match="symmetric"):
            threshold_matrix(mat, 90)

    def test_rejects_out_of_range_values(self):
        mat = symmetric([1.5, 0.2, 0.3], 3)
        with pytest.raises(DatasetError, match=r"\[-1, 1\]"):
            threshold_matrix(mat, 90)

    def test_csv_loading_with_and_without_header(self, tmp_path):
        from graphcf import load_correlation_csv

        mat = symmetric([0.1, 0.2, 0.3], 3)
        bare = tmp_path / "bare.csv"
        np.savetxt(bare, mat, delimiter=",")
        assert np.allclose(load_correlation_csv(bare), mat)

        headed = tmp_path / "headed.csv"
        headed.write_text("a,b,c\n" + bare.read_text())
        assert np.allclose(load_correlation_csv(headed, skip_header=True), mat)

    def test_non_square_csv_rejected(self, tmp_path):
        path = tmp_path / "rect.csv"
        np.savetxt(path, np.arange(12.0).reshape(3, 4), delimiter=",")
        from graphcf import load_correlation_csv

        with pytest.raises(DatasetError, match="square"):
            load_correlation_csv(path)


class TestDatasetRoundTrip:
    def make_dataset(self):
        universe = VertexUniverse.anonymous(5, region_of={i: "L" if i < 3 else "R"
                                                          for i in range(5)})
        items = [
            DatasetItem("a", Graph(universe, [(0, 1), (2, 3)]), 0),
            DatasetItem("b", Graph(universe, [(1, 4)]), 1),
        ]
        return LabeledDataset(universe, items)

    def test_round_trip_preserves_edges_exactly(self, tmp_path):
        dataset = self.make_dataset()
        path = tmp_path / "d.json"
        save_dataset(dataset, path)
        loaded = load_dataset(path)
        assert loaded.ids() == dataset.ids()
        for orig, back in zip(dataset, loaded):
            assert back.graph == orig.graph
            assert back.label == orig.label
        assert loaded.universe.region_of == dataset.universe.region_of

    def test_schema_field_names(self):
        doc = dataset_to_json(self.make_dataset())
        assert set(doc) == {"schema_version", "n_vertices", "vertex_labels",
                            "regions", "graphs"}
        assert set(doc["graphs"][0]) == {"id", "label", "edges"}

    def test_rejects_self_loop_with_position(self, tmp_path):
        doc = dataset_to_json(self.make_dataset())
        doc["graphs"][1]["edges"].append([5, 5])
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(DatasetError, match=r"graphs\[1\]\.edges\[1\].*self-loop"):
            load_dataset(path)

    def test_rejects_bad_label(self, tmp_path):
        doc = dataset_to_json(self.make_dataset())
        doc["graphs"][0]["label"] = 2
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(DatasetError, match="label 2"):
            load_dataset(path)

    def test_rejects_duplicate_ids(self, tmp_path):
        doc = dataset_to_json(self.make_dataset())
        doc["graphs"][1]["id"] = "a"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(DatasetError, match="duplicate id"):
            load_dataset(path)

    def test_rejects_out_of_range_edge(self, tmp_path):
        doc = dataset_to_json(self.make_dataset())
        doc["graphs"][0]["edges"].append([0, 9])
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(DatasetError, match="out of range"):
            load_dataset(path)

    def test_single_graph_document_round_trip(self):
        from graphcf import graph_from_json, graph_to_json

        universe = VertexUniverse.anonymous(5)
        graph = Graph(universe, [(0, 1), (2, 4)])
        doc = graph_to_json(graph)
        assert set(doc) == {"schema_version", "n_vertices", "vertex_labels",
                            "regions", "edges"}
        assert graph_from_json(doc) == graph


class TestSyntheticGenerator:
    def test_degenerate_probabilities_give_exact_cliques(self):
        dataset = generate_synthetic(8, 3, [0, 1, 2], [3, 4, 5],
                                     p_dense=1.0, p_sparse=0.0, p_background=0.0, seed=5)
        clique1 = {(0, 1), (0, 2), (1, 2)}
        clique2 = {(3, 4), (3, 5), (4, 5)}
        for item in dataset:
            expected = clique1 if item.label == 1 else clique2
            assert set(item.graph.edges()) == expected

    def test_same_seed_same_dataset(self):
        args = dict(n_vertices=10, n_per_class=4, s1=[0, 1, 2], s2=[3, 4, 5],
                    p_dense=0.8, p_sparse=0.2, p_background=0.1)
        a = generate_synthetic(**args, seed=99)
        b = generate_synthetic(**args, seed=99)
        assert dataset_to_json(a) == dataset_to_json(b)
        c = generate_synthetic(**args, seed=100)
        assert dataset_to_json(a) != dataset_to_json(c)

    def test_dense_block_edge_count_within_binomial_bounds(self):
        # over 200 class-1 graphs the s1 block holds Binomial(200*10, 0.9) edges
        s1 = [0, 1, 2, 3, 4]
        dataset = generate_synthetic(12, 200, s1, [5, 6, 7, 8, 9],
                                     p_dense=0.9, p_sparse=0.1, p_background=0.05,
                                     seed=17)
        inside = induced_pair_mask(dataset.universe, s1)
        total = sum(int(np.count_nonzero(item.graph.mask & inside))
                    for item in dataset if item.label == 1)
        trials = 200 * int(inside.sum())
        mean = 0.9 * trials
        sigma = np.sqrt(trials * 0.9 * 0.1)
        assert abs(total - mean) <= 3 * sigma

    def test_rejects_overlapping_sets(self):
        with pytest.raises(DatasetError, match="overlap"):
            generate_synthetic(8, 2, [0, 1, 2], [2, 3], 0.9, 0.1, 0.0, seed=1)

    def test_rejects_bad_probability_order(self):
        with pytest.raises(DatasetError):
            generate_synthetic(8, 2, [0, 1], [2, 3], 0.1, 0.9, 0.0, seed=1)
