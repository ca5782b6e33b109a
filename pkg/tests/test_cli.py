"""Command-line surface: subcommands, exit codes, reproducibility."""

import json
import subprocess
import sys

import numpy as np
import pytest

from graphcf import dataset_to_json, generate_synthetic

CLI = [sys.executable, "-m", "graphcf.cli"]


def run_cli(*args, cwd=None):
    return subprocess.run(
        CLI + list(args), capture_output=True, text=True, cwd=cwd, timeout=120
    )


@pytest.fixture(scope="module")
def dataset_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "synth.json"
    dataset = generate_synthetic(10, 8, [0, 1, 2, 3], [4, 5, 6, 7],
                                 0.9, 0.1, 0.2, seed=7)
    path.write_text(json.dumps(dataset_to_json(dataset), indent=2) + "\n")
    return path


class TestGenSynthetic:
    def test_emits_valid_dataset_json(self):
        out = run_cli("gen-synthetic", "--n", "8", "--per-class", "3",
                      "--s1", "0-2", "--s2", "3-5", "--p-dense", "0.9",
                      "--p-sparse", "0.1", "--p-bg", "0.05", "--seed", "1")
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert doc["n_vertices"] == 8
        assert len(doc["graphs"]) == 6

    def test_missing_seed_is_generated_and_logged(self):
        out = run_cli("gen-synthetic", "--n", "6", "--per-class", "2",
                      "--s1", "0-1", "--s2", "2-3", "--p-dense", "1.0",
                      "--p-sparse", "0.0", "--p-bg", "0.0")
        assert out.returncode == 0
        assert "generated seed" in out.stderr


class TestIngest:
    def test_threshold_to_graph_json(self, tmp_path):
        rng = np.random.default_rng(4)
        n = 12
        mat = np.zeros((n, n))
        mat[np.triu_indices(n, k=1)] = rng.uniform(-1, 1, n * (n - 1) // 2)
        mat = mat + mat.T
        np.fill_diagonal(mat, 1.0)
        path = tmp_path / "m.csv"
        np.savetxt(path, mat, delimiter=",")
        out = run_cli("ingest", "--matrix", str(path), "--percentile", "90")
        assert out.returncode == 0
        doc = json.loads(out.stdout)
        assert doc["n_vertices"] == n
        # nearest-rank p90 of 66 distinct values: strictly above the 60th
        assert len(doc["edges"]) == 66 - int(np.ceil(0.9 * 66))
        assert doc["manifest"]["command"] == "ingest"

    def test_bad_matrix_is_a_data_error(self, tmp_path):
        path = tmp_path / "m.csv"
        np.savetxt(path, np.arange(12.0).reshape(3, 4), delimiter=",")
        out = run_cli("ingest", "--matrix", str(path))
        assert out.returncode == 3
        assert "error" in out.stderr


class TestSearch:
    def test_search_summary_shape(self, dataset_file):
        out = run_cli("search", "--dataset", str(dataset_file),
                      "--oracle", "builtin:knn", "--mode", "oblivious",
                      "--eta", "2000", "--k", "5", "--runs", "2", "--seed", "7",
                      "--graph-id", "c1-000", "--graph-id", "c0-000")
        assert out.returncode == 0, out.stderr
        doc = json.loads(out.stdout)
        assert doc["summary"]["distance"] is not None
        assert set(doc["summary"]["distance"]) == {"p10", "p25", "p50", "p75", "p90"}
        assert len(doc["results"]) == 4
        for res in doc["results"]:
            assert res["calls_phase1"] <= 2000 and res["calls_phase2"] <= 2000

    def test_identical_invocations_are_byte_identical(self, dataset_file):
        args = ("search", "--dataset", str(dataset_file), "--oracle",
                "builtin:threshold:12", "--runs", "2", "--seed", "3",
                "--graph-id", "c1-001")
        first, second = run_cli(*args), run_cli(*args)
        assert first.returncode == second.returncode == 0
        assert first.stdout == second.stdout

    def test_trace_flag_emits_per_iteration_trace(self, dataset_file):
        out = run_cli("search", "--dataset", str(dataset_file),
                      "--oracle", "builtin:threshold:12", "--runs", "1",
                      "--seed", "3", "--graph-id", "c1-001", "--trace")
        assert out.returncode == 0, out.stderr
        doc = json.loads(out.stdout)
        steps = doc["results"][0]["trace"]
        assert steps and {"phase", "iteration", "k", "accepted", "distance"} \
            == set(steps[0])

    def test_missing_graph_id_is_not_found(self, dataset_file):
        out = run_cli("search", "--dataset", str(dataset_file),
                      "--oracle", "builtin:knn", "--graph-id", "missing",
                      "--seed", "1")
        assert out.returncode == 3

    def test_usage_error_exit_code(self, dataset_file):
        out = run_cli("search", "--dataset", str(dataset_file), "--seed", "1")
        assert out.returncode == 2  # --oracle is required

    def test_oracle_failure_exit_code(self, dataset_file):
        out = run_cli("search", "--dataset", str(dataset_file),
                      "--oracle", "exec:/does/not/exist", "--seed", "1",
                      "--graph-id", "c0-000")
        assert out.returncode == 4

    def test_search_failure_exit_code(self, dataset_file):
        # threshold 0 labels every graph 1: an unfalsifiable oracle
        out = run_cli("search", "--dataset", str(dataset_file),
                      "--oracle", "builtin:threshold:0", "--eta", "20",
                      "--runs", "1", "--seed", "1", "--graph-id", "c0-000")
        assert out.returncode == 5

    def test_data_driven_mode_and_jobs(self, dataset_file):
        out = run_cli("search", "--dataset", str(dataset_file),
                      "--oracle", "builtin:knn", "--mode", "data_driven",
                      "--runs", "2", "--seed", "11", "--jobs", "4",
                      "--graph-id", "c0-001")
        assert out.returncode == 0, out.stderr
        doc = json.loads(out.stdout)
        assert all(r["mode"] == "data_driven" for r in doc["results"])

    def test_dataset_search_baseline(self, dataset_file):
        out = run_cli("search", "--dataset", str(dataset_file),
                      "--oracle", "builtin:knn", "--baseline", "dataset",
                      "--seed", "0", "--graph-id", "c1-002")
        assert out.returncode == 0, out.stderr
        doc = json.loads(out.stdout)
        assert doc["results"][0]["mode"] == "dataset_search"

    def test_exec_oracle_end_to_end(self, dataset_file, tmp_path):
        server = tmp_path / "server.py"
        server.write_text(
            "import sys, json\n"
            "for line in sys.stdin:\n"
            "    msg = json.loads(line)\n"
            "    if msg['type'] == 'hello':\n"
            "        print(json.dumps({'type': 'ready'}), flush=True)\n"
            "    else:\n"
            "        label = 1 if len(msg['edges']) >= 30 else 0\n"
            "        print(json.dumps({'type': 'label', 'label': label}), flush=True)\n"
        )
        out = run_cli("search", "--dataset", str(dataset_file),
                      "--oracle", f"exec:{sys.executable} {server}",
                      "--runs", "1", "--seed", "5", "--graph-id", "c1-000")
        assert out.returncode == 0, out.stderr
        doc = json.loads(out.stdout)
        assert doc["results"][0]["status"] == "ok"


class TestWhiteboxEval:
    def test_report_and_points_csv(self, dataset_file, tmp_path):
        points = tmp_path / "points.csv"
        out = run_cli("whitebox-eval", "--dataset", str(dataset_file),
                      "--s1", "0-3", "--s2", "4-7", "--m", "1.0", "--c", "0.0",
                      "--seed", "2", "--points-csv", str(points))
        assert out.returncode == 0, out.stderr
        doc = json.loads(out.stdout)
        assert doc["mean_excess"] is not None and doc["mean_excess"] >= 0
        assert doc["mean_paper_metric"] is not None
        header = points.read_text().splitlines()[0]
        assert header == "graph_id,x,y,label"


class TestExplainCommands:
    def test_explain_local_json_and_csv(self, dataset_file, tmp_path):
        csv_out = tmp_path / "local.csv"
        out = run_cli("explain-local", "--dataset", str(dataset_file),
                      "--graph-id", "c1-000", "--oracle", "builtin:knn",
                      "--n-counterfactuals", "5", "--seed", "3",
                      "--csv-out", str(csv_out))
        assert out.returncode == 0, out.stderr
        doc = json.loads(out.stdout)
        assert doc["n_successes"] >= 1
        assert csv_out.read_text().splitlines()[0] == \
            "edge,u_label,v_label,add_count,remove_count"

    def test_explain_global_tables(self, dataset_file, tmp_path):
        csv_dir = tmp_path / "tables"
        out = run_cli("explain-global", "--dataset", str(dataset_file),
                      "--oracle", "builtin:knn", "--runs-per-graph", "1",
                      "--seed", "4", "--csv-dir", str(csv_dir))
        assert out.returncode == 0, out.stderr
        doc = json.loads(out.stdout)
        assert doc["pairs_aggregated"] >= 1
        counters = (csv_dir / "global_counters.csv").read_text().splitlines()
        assert counters[0] == "edge,u_label,v_label,C0+,C0-,C1+,C1-"
        roi = (csv_dir / "roi_importance.csv").read_text().splitlines()
        assert roi[0] == "vertex,label,C0+,C0-,C1+,C1-"
