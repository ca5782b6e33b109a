"""Batch command-line surface: ingest, generate, search, evaluate, explain.

Every command that consumes randomness takes ``--seed``; omit it and a
fresh one is generated and printed to stderr, so silent nondeterminism
cannot happen. Results go to stdout (or ``--out``); logs and errors go to
stderr. Exit codes: 0 success, 2 usage error, 3 data error, 4 oracle
failure, 5 search failure. Each result document embeds a run manifest
sufficient to reproduce it byte-for-byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import secrets
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import click

from . import __version__
from .datasets import (
    DatasetError,
    LabeledDataset,
    generate_synthetic,
    graph_to_json,
    load_correlation_csv,
    load_dataset,
    threshold_matrix,
)
from .explain import (
    global_counters,
    local_explanation,
    region_heatmap,
    roi_importance,
)
from .graphs import GraphError, VertexUniverse, all_pairs
from .oracles import (
    EdgeCountThresholdClassifier,
    KnnEditDistanceClassifier,
    LinearContrastClassifier,
    OracleError,
    OracleSession,
)
from .remote import connect_oracle, default_timeout
from .search import (
    STATUS_OK,
    SearchConfig,
    dataset_search,
    run_pipeline,
    summarize_results,
)
from .whitebox import embedding_table, whitebox_error

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_ORACLE = 4
EXIT_SEARCH = 5


class SearchFailedError(RuntimeError):
    """No requested search produced a counterfactual."""


@dataclass
class RunManifest:
    """Everything needed to reproduce a run byte-for-byte."""

    engine_version: str
    command: str
    config: dict
    oracle: str | None
    dataset_sha256: str | None
    seeds: list[int]

    def to_json_dict(self) -> dict:
        return asdict(self)


def _sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    generated = secrets.randbelow(2**31)
    click.echo(f"no --seed given; generated seed {generated}", err=True)
    return generated


def parse_vertex_set(spec: str) -> list[int]:
    """Parse '0-4,7,9-11' style vertex-set specs."""
    out: set[int] = set()
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, _, hi = part.partition("-")
            out.update(range(int(lo), int(hi) + 1))
        else:
            out.add(int(part))
    if not out:
        raise click.UsageError(f"empty vertex set spec: {spec!r}")
    return sorted(out)


def _emit(document: dict, out: str | None) -> None:
    text = json.dumps(document, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


class _OracleSpec:
    """Parsed --oracle target; builds per-run backends."""

    def __init__(self, target: str, params: dict):
        self.target = target
        self.params = params
        self.is_external = target.startswith(("exec:", "tcp:"))

    def build(self, universe: VertexUniverse, dataset: LabeledDataset | None):
        p = self.params
        if self.is_external:
            return connect_oracle(self.target, universe, p.get("timeout"))
        name, _, rest = self.target.partition(":")
        if name != "builtin":
            raise click.UsageError(
                f"oracle target must start with builtin:, exec: or tcp:, got {self.target!r}"
            )
        kind, _, arg = rest.partition(":")
        if kind == "threshold":
            if not arg:
                raise click.UsageError("builtin:threshold needs a count, e.g. builtin:threshold:10")
            return EdgeCountThresholdClassifier(universe, int(arg))
        if kind == "knn":
            if dataset is None:
                raise click.UsageError("builtin:knn needs --dataset as its reference")
            k = int(arg) if arg else p.get("knn_k", 5)
            return KnnEditDistanceClassifier(dataset, k)
        if kind == "linear":
            missing = [o for o in ("s1", "s2", "m", "c") if p.get(o) is None]
            if missing:
                raise click.UsageError(
                    f"builtin:linear needs --s1 --s2 --m --c (missing: {', '.join(missing)})"
                )
            return LinearContrastClassifier(
                universe, p["s1"], p["s2"], p["m"], p["c"], p.get("positive_side", "above")
            )
        raise click.UsageError(f"unknown builtin oracle {rest!r}")

    def close(self, backend) -> None:
        if self.is_external:
            backend.close()


def _oracle_options(fn):
    fn = click.option("--knn-k", type=int, default=5, show_default=True,
                      help="Neighbor count for builtin:knn (odd).")(fn)
    fn = click.option("--s1", type=str, default=None,
                      help="Class-1 contrast vertex set for builtin:linear (e.g. 0-4).")(fn)
    fn = click.option("--s2", type=str, default=None,
                      help="Class-0 contrast vertex set for builtin:linear.")(fn)
    fn = click.option("--m", type=float, default=None, help="Slope for builtin:linear.")(fn)
    fn = click.option("--c", type=float, default=None, help="Intercept for builtin:linear.")(fn)
    fn = click.option("--positive-side", type=click.Choice(["above", "below"]),
                      default="above", show_default=True)(fn)
    fn = click.option("--oracle-timeout", type=float, default=None,
                      help="Per-query timeout for external oracles (seconds); "
                           "defaults to $GRAPHCF_ORACLE_TIMEOUT or 30.")(fn)
    return fn


def _collect_oracle_spec(oracle: str, kwargs: dict) -> _OracleSpec:
    params = {
        "knn_k": kwargs.pop("knn_k", 5),
        "s1": parse_vertex_set(kwargs["s1"]) if kwargs.get("s1") else None,
        "s2": parse_vertex_set(kwargs["s2"]) if kwargs.get("s2") else None,
        "m": kwargs.pop("m", None),
        "c": kwargs.pop("c", None),
        "positive_side": kwargs.pop("positive_side", "above"),
        "timeout": kwargs.pop("oracle_timeout", None) or default_timeout(),
    }
    kwargs.pop("s1", None)
    kwargs.pop("s2", None)
    return _OracleSpec(oracle, params)


@click.group()
@click.version_option(__version__)
def cli():
    """Counterfactual search and explanations for black-box graph classifiers."""


@cli.command()
@click.option("--matrix", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Square correlation CSV (n rows x n columns).")
@click.option("--percentile", type=float, default=90.0, show_default=True,
              help="Nearest-rank percentile threshold; edges need strictly larger values.")
@click.option("--skip-header", is_flag=True, help="Skip one CSV header row.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def ingest(matrix, percentile, skip_header, out):
    """Threshold a correlation matrix into a graph JSON document."""
    mat = load_correlation_csv(matrix, skip_header=skip_header)
    graph = threshold_matrix(mat, percentile)
    document = graph_to_json(graph)
    document["manifest"] = RunManifest(
        __version__, "ingest",
        {"percentile": percentile, "skip_header": bool(skip_header)},
        None, _sha256_file(matrix), [],
    ).to_json_dict()
    _emit(document, out)


@cli.command("gen-synthetic")
@click.option("--n", "n_vertices", required=True, type=int, help="Vertex count.")
@click.option("--per-class", required=True, type=int, help="Graphs per class.")
@click.option("--s1", required=True, type=str, help="Class-1 dense vertex set (e.g. 0-4).")
@click.option("--s2", required=True, type=str, help="Class-0 dense vertex set.")
@click.option("--p-dense", required=True, type=float)
@click.option("--p-sparse", required=True, type=float)
@click.option("--p-bg", "p_background", required=True, type=float)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def gen_synthetic(n_vertices, per_class, s1, s2, p_dense, p_sparse, p_background, seed, out):
    """Generate a planted-contrast synthetic dataset as dataset JSON."""
    from .datasets import dataset_to_json

    seed = _resolve_seed(seed)
    sets = {"s1": parse_vertex_set(s1), "s2": parse_vertex_set(s2)}
    dataset = generate_synthetic(
        n_vertices, per_class, sets["s1"], sets["s2"],
        p_dense, p_sparse, p_background, seed,
    )
    document = dataset_to_json(dataset)
    document["manifest"] = RunManifest(
        __version__, "gen-synthetic",
        {"n_vertices": n_vertices, "per_class": per_class, **sets,
         "p_dense": p_dense, "p_sparse": p_sparse, "p_background": p_background},
        None, None, [seed],
    ).to_json_dict()
    _emit(document, out)


@cli.command()
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--oracle", required=True,
              help="builtin:threshold:N | builtin:knn[:k] | builtin:linear | exec:CMD | tcp:HOST:PORT")
@click.option("--graph-id", "graph_ids", multiple=True,
              help="Graph(s) to explain; default: every graph in the dataset.")
@click.option("--mode", type=click.Choice(["oblivious", "data_driven"]),
              default="oblivious", show_default=True)
@click.option("--baseline", type=click.Choice(["none", "dataset"]), default="none",
              show_default=True, help="Run the dataset-scan baseline instead of the pipeline.")
@click.option("--eta", type=int, default=2000, show_default=True,
              help="Oracle-call budget per phase.")
@click.option("--k", type=int, default=5, show_default=True,
              help="Edges edited per forward iteration / initial backward batch.")
@click.option("--epsilon", type=float, default=1e-4, show_default=True)
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel (graph, run) workers; each owns its oracle session.")
@click.option("--trace/--no-trace", default=False, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_oracle_options
def search(dataset_path, oracle, graph_ids, mode, baseline, eta, k, epsilon, runs, seed,
           jobs, trace, out, **oracle_kwargs):
    """Run counterfactual search over dataset graphs and summarize."""
    spec = _collect_oracle_spec(oracle, oracle_kwargs)
    dataset = load_dataset(dataset_path)
    seed = _resolve_seed(seed)
    ids = list(graph_ids) if graph_ids else dataset.ids()
    for gid in ids:
        if gid not in dataset:
            raise DatasetError(f"no graph with id {gid!r} in {dataset_path}")
    cfg = SearchConfig(eta_phase1=eta, eta_phase2=eta, k=k, epsilon=epsilon,
                       seed=seed, mode=mode, keep_trace=trace)

    def one(task):
        gid, run = task
        backend = spec.build(dataset.universe, dataset)
        try:
            session = OracleSession(backend)
            if baseline == "dataset":
                return dataset_search(dataset[gid].graph, session, dataset, graph_id=gid)
            run_cfg = SearchConfig(
                eta_phase1=eta, eta_phase2=eta, k=k, epsilon=epsilon,
                seed=seed + run, mode=mode, keep_trace=trace,
            )
            reference = dataset if mode == "data_driven" else None
            return run_pipeline(dataset[gid].graph, session, run_cfg, reference, graph_id=gid)
        finally:
            spec.close(backend)

    tasks = [(gid, run) for gid in ids for run in range(runs if baseline == "none" else 1)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, tasks))
    else:
        results = [one(t) for t in tasks]

    manifest = RunManifest(
        __version__, "search",
        {"mode": mode, "baseline": baseline, "eta_phase1": eta, "eta_phase2": eta,
         "k": k, "epsilon": epsilon, "runs": runs, "graph_ids": ids, "trace": trace},
        oracle, _sha256_file(dataset_path), [seed + r for r in range(runs)],
    )
    document = {
        "manifest": manifest.to_json_dict(),
        "results": [r.to_json_dict(include_trace=trace) for r in results],
        "summary": summarize_results(results),
    }
    _emit(document, out)
    if not any(r.status == STATUS_OK for r in results):
        raise SearchFailedError("no run produced a counterfactual")


@cli.command("whitebox-eval")
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--s1", required=True, type=str, help="Class-1 contrast vertex set.")
@click.option("--s2", required=True, type=str, help="Class-0 contrast vertex set.")
@click.option("--m", required=True, type=float, help="Boundary slope.")
@click.option("--c", required=True, type=float, help="Boundary intercept.")
@click.option("--positive-side", type=click.Choice(["above", "below"]), default="above",
              show_default=True)
@click.option("--mode", type=click.Choice(["oblivious", "data_driven"]),
              default="oblivious", show_default=True)
@click.option("--eta", type=int, default=2000, show_default=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--points-csv", type=click.Path(dir_okay=False), default=None,
              help="Also write the 2-D embedding of every graph for plotting.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def whitebox_eval(dataset_path, s1, s2, m, c, positive_side, mode, eta, k, seed,
                  points_csv, out):
    """Search against the linear white-box and score against its optimum."""
    dataset = load_dataset(dataset_path)
    seed = _resolve_seed(seed)
    wb = LinearContrastClassifier(
        dataset.universe, parse_vertex_set(s1), parse_vertex_set(s2), m, c, positive_side
    )
    results = []
    originals = []
    for i, item in enumerate(dataset):
        cfg = SearchConfig(eta_phase1=eta, eta_phase2=eta, k=k, seed=seed + i, mode=mode)
        session = OracleSession(wb)
        reference = dataset if mode == "data_driven" else None
        results.append(run_pipeline(item.graph, session, cfg, reference,
                                    graph_id=item.graph_id))
        originals.append(item.graph)
    report = whitebox_error(results, originals, wb)

    if points_csv:
        rows = embedding_table([(i.graph_id, i.graph) for i in dataset], wb)
        with open(points_csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["graph_id", "x", "y", "label"])
            writer.writeheader()
            writer.writerows(rows)

    manifest = RunManifest(
        __version__, "whitebox-eval",
        {"s1": parse_vertex_set(s1), "s2": parse_vertex_set(s2), "m": m, "c": c,
         "positive_side": positive_side, "mode": mode, "eta": eta, "k": k},
        "builtin:linear", _sha256_file(dataset_path),
        [seed + i for i in range(len(dataset))],
    )
    document = {"manifest": manifest.to_json_dict(), **report.to_json_dict()}
    _emit(document, out)


@cli.command("explain-local")
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--graph-id", required=True)
@click.option("--oracle", required=True)
@click.option("--mode", type=click.Choice(["oblivious", "data_driven"]),
              default="oblivious", show_default=True)
@click.option("--n-counterfactuals", type=int, default=1000, show_default=True)
@click.option("--top", type=int, default=6, show_default=True)
@click.option("--eta", type=int, default=2000, show_default=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--csv-out", type=click.Path(dir_okay=False), default=None,
              help="Per-edge frequency table CSV.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_oracle_options
def explain_local(dataset_path, graph_id, oracle, mode, n_counterfactuals, top, eta, k,
                  seed, csv_out, out, **oracle_kwargs):
    """Edge-importance statistics over many counterfactuals of one graph."""
    spec = _collect_oracle_spec(oracle, oracle_kwargs)
    dataset = load_dataset(dataset_path)
    if graph_id not in dataset:
        raise DatasetError(f"no graph with id {graph_id!r} in {dataset_path}")
    seed = _resolve_seed(seed)
    cfg = SearchConfig(eta_phase1=eta, eta_phase2=eta, k=k, seed=seed, mode=mode)
    backend = spec.build(dataset.universe, dataset)
    try:
        explanation = local_explanation(
            dataset[graph_id].graph, backend, cfg, n_counterfactuals,
            dataset if mode == "data_driven" else None, graph_id=graph_id,
        )
    finally:
        spec.close(backend)
    if explanation.n_successes == 0:
        raise SearchFailedError("no counterfactual found in any run")

    labels = dataset.universe.vertex_labels
    if csv_out:
        edges = sorted(set(explanation.add_freq) | set(explanation.remove_freq))
        with open(csv_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["edge", "u_label", "v_label", "add_count", "remove_count"])
            for u, v in edges:
                writer.writerow([
                    f"{u}-{v}", labels[u], labels[v],
                    explanation.add_freq.get((u, v), 0),
                    explanation.remove_freq.get((u, v), 0),
                ])

    manifest = RunManifest(
        __version__, "explain-local",
        {"graph_id": graph_id, "mode": mode, "n_counterfactuals": n_counterfactuals,
         "eta": eta, "k": k, "base_seed": seed},
        oracle, _sha256_file(dataset_path),
        [seed + i for i in range(n_counterfactuals)],
    )
    document = {
        "manifest": manifest.to_json_dict(),
        "graph_id": graph_id,
        "n_counterfactuals": n_counterfactuals,
        "n_successes": explanation.n_successes,
        "n_failures": explanation.n_failures,
        "top_added": [
            {"edge": list(e), "u_label": labels[e[0]], "v_label": labels[e[1]], "count": c}
            for e, c in explanation.top_added(top)
        ],
        "top_removed": [
            {"edge": list(e), "u_label": labels[e[0]], "v_label": labels[e[1]], "count": c}
            for e, c in explanation.top_removed(top)
        ],
    }
    _emit(document, out)


@cli.command("explain-global")
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--oracle", required=True)
@click.option("--mode", type=click.Choice(["oblivious", "data_driven"]),
              default="oblivious", show_default=True)
@click.option("--runs-per-graph", type=int, default=1, show_default=True)
@click.option("--eta", type=int, default=2000, show_default=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--csv-dir", type=click.Path(file_okay=False), default=None,
              help="Write counters/region/ROI CSV tables into this directory.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_oracle_options
def explain_global(dataset_path, oracle, mode, runs_per_graph, eta, k, seed, csv_dir,
                   out, **oracle_kwargs):
    """Global per-edge counters across the dataset, plus aggregations."""
    spec = _collect_oracle_spec(oracle, oracle_kwargs)
    dataset = load_dataset(dataset_path)
    seed = _resolve_seed(seed)
    cfg = SearchConfig(eta_phase1=eta, eta_phase2=eta, k=k, seed=seed, mode=mode)
    backend = spec.build(dataset.universe, dataset)
    try:
        counters = global_counters(dataset, backend, cfg, runs_per_graph)
    finally:
        spec.close(backend)

    labels = dataset.universe.vertex_labels
    if csv_dir:
        os.makedirs(csv_dir, exist_ok=True)
        pairs = all_pairs(dataset.universe.n)
        with open(Path(csv_dir) / "global_counters.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["edge", "u_label", "v_label", "C0+", "C0-", "C1+", "C1-"])
            for slot, (u, v) in enumerate(pairs):
                row = [counters.c0_plus[slot], counters.c0_minus[slot],
                       counters.c1_plus[slot], counters.c1_minus[slot]]
                if any(row):
                    writer.writerow([f"{u}-{v}", labels[u], labels[v], *row])
        if dataset.universe.region_of is not None:
            for side in ("class0", "class1"):
                matrix = region_heatmap(counters, dataset.universe, side)
                with open(Path(csv_dir) / f"region_matrix_{side}.csv", "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["region", *matrix.regions])
                    for name, row in zip(matrix.regions, matrix.matrix):
                        writer.writerow([name, *row.tolist()])
        table = roi_importance(counters, dataset.universe)
        with open(Path(csv_dir) / "roi_importance.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["vertex", "label", "C0+", "C0-", "C1+", "C1-"])
            for row in table.rows():
                writer.writerow([row["vertex"], row["label"], row["c0_plus"],
                                 row["c0_minus"], row["c1_plus"], row["c1_minus"]])

    manifest = RunManifest(
        __version__, "explain-global",
        {"mode": mode, "runs_per_graph": runs_per_graph, "eta": eta, "k": k,
         "base_seed": seed},
        oracle, _sha256_file(dataset_path),
        [seed + r for r in range(runs_per_graph)],
    )
    document = {
        "manifest": manifest.to_json_dict(),
        "pairs_aggregated": len(counters.provenance),
        "failures": counters.failures,
        "total_increments": counters.total_increments(),
    }
    if dataset.universe.region_of is not None:
        document["region_symmetry"] = {
            side: round(region_heatmap(counters, dataset.universe, side)
                        .symmetry_score(), 6)
            for side in ("class0", "class1")
        }
    _emit(document, out)
    if not counters.provenance:
        raise SearchFailedError("every search failed; no counters collected")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:  # --help / --version
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except (DatasetError, GraphError, FileNotFoundError) as exc:
        _error_json("data", exc)
        sys.exit(EXIT_DATA)
    except OracleError as exc:
        _error_json("oracle", exc)
        sys.exit(EXIT_ORACLE)
    except SearchFailedError as exc:
        _error_json("search", exc)
        sys.exit(EXIT_SEARCH)


def _error_json(kind: str, exc: Exception) -> None:
    click.echo(
        json.dumps({"error": {"type": kind, "message": str(exc)}}), err=True
    )


if __name__ == "__main__":
    main()
