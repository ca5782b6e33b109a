"""Labeled graph datasets: JSON persistence, correlation ingestion, generation.

The on-disk dataset format is a single JSON document::

    {
      "schema_version": 1,
      "n_vertices": 5,
      "vertex_labels": ["v000", ...],
      "regions": {"0": "frontal", ...} | null,
      "graphs": [{"id": "g0", "label": 0, "edges": [[0, 1], ...]}, ...]
    }

Validation is strict and positional: duplicate ids, labels outside {0, 1},
self-loops and out-of-range endpoints are rejected with the offending
location, never silently repaired.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .graphs import Graph, GraphError, VertexUniverse, all_pairs

SCHEMA_VERSION = 1


class DatasetError(ValueError):
    """Malformed dataset content; the message carries the position."""


@dataclass(frozen=True)
class DatasetItem:
    graph_id: str
    graph: Graph
    label: int


class LabeledDataset:
    """Graphs with binary labels, all over one shared universe."""

    def __init__(self, universe: VertexUniverse, items: Iterable[DatasetItem]):
        self.universe = universe
        self.items = list(items)
        seen: set[str] = set()
        for pos, item in enumerate(self.items):
            if item.label not in (0, 1):
                raise DatasetError(f"graphs[{pos}]: label {item.label!r} not in {{0, 1}}")
            if item.graph_id in seen:
                raise DatasetError(f"graphs[{pos}]: duplicate id {item.graph_id!r}")
            seen.add(item.graph_id)
            universe.require_compatible(item.graph.universe)
        self._by_id = {item.graph_id: item for item in self.items}
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[DatasetItem]:
        return iter(self.items)

    def __getitem__(self, graph_id: str) -> DatasetItem:
        try:
            return self._by_id[graph_id]
        except KeyError:
            raise DatasetError(f"no graph with id {graph_id!r}") from None

    def __contains__(self, graph_id: str) -> bool:
        return graph_id in self._by_id

    def ids(self) -> list[str]:
        return [item.graph_id for item in self.items]

    def labels(self) -> np.ndarray:
        return np.array([item.label for item in self.items], dtype=np.int64)

    def edge_matrix(self) -> np.ndarray:
        """(n_items, n_pairs) boolean membership matrix; cached, read-only."""
        if self._matrix is None:
            mat = np.stack([item.graph.mask for item in self.items]) if self.items \
                else np.zeros((0, self.universe.n_pairs), dtype=bool)
            mat.setflags(write=False)
            self._matrix = mat
        return self._matrix

    def class_counts(self) -> tuple[int, int]:
        labels = self.labels()
        return int(np.sum(labels == 0)), int(np.sum(labels == 1))

    def require_both_classes(self) -> None:
        n0, n1 = self.class_counts()
        if n0 == 0 or n1 == 0:
            raise DatasetError(f"need at least one graph per class, have {n0}/{n1}")


def dataset_to_json(dataset: LabeledDataset) -> dict:
    universe = dataset.universe
    regions = None
    if universe.region_of is not None:
        regions = {str(i): r for i, r in sorted(universe.region_of.items())}
    return {
        "schema_version": SCHEMA_VERSION,
        "n_vertices": universe.n,
        "vertex_labels": list(universe.vertex_labels),
        "regions": regions,
        "graphs": [
            {"id": item.graph_id, "label": item.label, "edges": item.graph.edges()}
            for item in dataset.items
        ],
    }


def _require(obj: dict, field: str, where: str):
    if field not in obj:
        raise DatasetError(f"{where}: missing field {field!r}")
    return obj[field]


def _parse_universe(obj: dict, where: str = "dataset") -> VertexUniverse:
    n = _require(obj, "n_vertices", where)
    labels = obj.get("vertex_labels") or [f"v{i:03d}" for i in range(int(n))]
    if len(labels) != int(n):
        raise DatasetError(f"{where}: vertex_labels has {len(labels)} entries, n_vertices={n}")
    regions_obj = obj.get("regions")
    regions = None
    if regions_obj is not None:
        try:
            regions = {int(i): str(r) for i, r in regions_obj.items()}
        except (TypeError, ValueError, AttributeError) as exc:
            raise DatasetError(f"{where}: malformed regions map: {exc}") from None
    try:
        return VertexUniverse(tuple(labels), regions)
    except GraphError as exc:
        raise DatasetError(f"{where}: {exc}") from None


def _parse_graph(universe: VertexUniverse, edges, where: str) -> Graph:
    checked = []
    for j, e in enumerate(edges):
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise DatasetError(f"{where}.edges[{j}]: not a [u, v] pair: {e!r}")
        u, v = e
        if u == v:
            raise DatasetError(f"{where}.edges[{j}]: self-loop {list(e)}")
        if not (0 <= min(u, v) and max(u, v) < universe.n):
            raise DatasetError(f"{where}.edges[{j}]: endpoint out of range: {list(e)}")
        checked.append((int(u), int(v)))
    return Graph(universe, checked)


def dataset_from_json(obj: dict) -> LabeledDataset:
    version = _require(obj, "schema_version", "dataset")
    if version != SCHEMA_VERSION:
        raise DatasetError(f"dataset: unsupported schema_version {version!r}")
    universe = _parse_universe(obj)
    items = []
    for pos, g in enumerate(_require(obj, "graphs", "dataset")):
        where = f"graphs[{pos}]"
        label = _require(g, "label", where)
        if label not in (0, 1):
            raise DatasetError(f"{where}: label {label!r} not in {{0, 1}}")
        graph = _parse_graph(universe, _require(g, "edges", where), where)
        items.append(DatasetItem(str(_require(g, "id", where)), graph, int(label)))
    return LabeledDataset(universe, items)


def save_dataset(dataset: LabeledDataset, path) -> None:
    Path(path).write_text(json.dumps(dataset_to_json(dataset), indent=2) + "\n")


def load_dataset(path) -> LabeledDataset:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: not valid JSON: {exc}") from None
    return dataset_from_json(obj)


def graph_to_json(graph: Graph) -> dict:
    """Standalone single-graph document (same field conventions)."""
    universe = graph.universe
    regions = None
    if universe.region_of is not None:
        regions = {str(i): r for i, r in sorted(universe.region_of.items())}
    return {
        "schema_version": SCHEMA_VERSION,
        "n_vertices": universe.n,
        "vertex_labels": list(universe.vertex_labels),
        "regions": regions,
        "edges": graph.edges(),
    }


def graph_from_json(obj: dict) -> Graph:
    version = _require(obj, "schema_version", "graph")
    if version != SCHEMA_VERSION:
        raise DatasetError(f"graph: unsupported schema_version {version!r}")
    universe = _parse_universe(obj, "graph")
    return _parse_graph(universe, _require(obj, "edges", "graph"), "graph")


# ---------------------------------------------------------------------------
# Correlation-matrix ingestion


def load_correlation_csv(path, *, skip_header: bool = False) -> np.ndarray:
    mat = np.loadtxt(path, delimiter=",", skiprows=1 if skip_header else 0, ndmin=2)
    if mat.shape[0] != mat.shape[1]:
        raise DatasetError(f"{path}: correlation matrix must be square, got {mat.shape}")
    return mat


def validate_correlation(matrix: np.ndarray, *, tol: float = 1e-9) -> np.ndarray:
    """Check symmetry and off-diagonal range; the diagonal is ignored."""
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DatasetError(f"correlation matrix must be square, got {mat.shape}")
    if mat.shape[0] < 2:
        raise DatasetError("correlation matrix needs at least 2 rows")
    if not np.allclose(mat, mat.T, atol=tol, rtol=0):
        worst = float(np.abs(mat - mat.T).max())
        raise DatasetError(f"correlation matrix not symmetric (max asymmetry {worst:.3g})")
    off = mat[np.triu_indices_from(mat, k=1)]
    if off.size and (off.min() < -1 - tol or off.max() > 1 + tol):
        raise DatasetError("off-diagonal correlation values must lie in [-1, 1]")
    return mat


def threshold_matrix(
    matrix: np.ndarray,
    percentile: float = 90.0,
    universe: VertexUniverse | None = None,
) -> Graph:
    """Binarize a correlation matrix into a graph.

    The threshold is the nearest-rank percentile of the off-diagonal
    upper-triangle value multiset, and an edge (u, v) is present iff its
    value is STRICTLY larger than the threshold. With the default
    percentile of 90 and all-distinct values this keeps ~10% of pairs.
    """
    mat = validate_correlation(matrix)
    n = mat.shape[0]
    if universe is None:
        universe = VertexUniverse.anonymous(n)
    elif universe.n != n:
        raise DatasetError(f"universe has {universe.n} vertices, matrix has {n}")
    if not 0.0 <= percentile <= 100.0:
        raise DatasetError(f"percentile must be in [0, 100], got {percentile}")
    values = mat[np.triu_indices(n, k=1)]
    ordered = np.sort(values)
    # nearest-rank: the ceil(p/100 * N)-th smallest value, rank clamped to >= 1
    rank = max(1, int(np.ceil(percentile / 100.0 * values.size)))
    threshold = ordered[rank - 1]
    return Graph.from_mask(universe, values > threshold, copy=False)


# ---------------------------------------------------------------------------
# Synthetic planted-contrast datasets


def generate_synthetic(
    n_vertices: int,
    n_per_class: int,
    s1: Iterable[int],
    s2: Iterable[int],
    p_dense: float,
    p_sparse: float,
    p_background: float,
    seed: int,
) -> LabeledDataset:
    """Random dataset with two planted contrast vertex sets.

    Class-1 graphs draw the pairs inside ``s1`` with probability ``p_dense``
    and the pairs inside ``s2`` with ``p_sparse``; class-0 graphs swap the
    two. Every other pair appears with ``p_background``. Deterministic for
    a given argument tuple and seed.
    """
    set1 = sorted({int(v) for v in s1})
    set2 = sorted({int(v) for v in s2})
    if set(set1) & set(set2):
        raise DatasetError(f"s1 and s2 overlap: {sorted(set(set1) & set(set2))}")
    for v in set1 + set2:
        if not 0 <= v < n_vertices:
            raise DatasetError(f"contrast vertex {v} out of range for n={n_vertices}")
    if not 0.0 <= p_sparse < p_dense <= 1.0:
        raise DatasetError(f"need 0 <= p_sparse < p_dense <= 1, got {p_sparse}, {p_dense}")
    if not 0.0 <= p_background <= 1.0:
        raise DatasetError(f"p_background must be in [0, 1], got {p_background}")
    if n_per_class < 1:
        raise DatasetError("n_per_class must be positive")

    universe = VertexUniverse.anonymous(n_vertices)
    s1_pairs = induced_pair_mask(universe, set1)
    s2_pairs = induced_pair_mask(universe, set2)

    probs = {  # per-slot edge probability for each class
        0: np.where(s2_pairs, p_dense, np.where(s1_pairs, p_sparse, p_background)),
        1: np.where(s1_pairs, p_dense, np.where(s2_pairs, p_sparse, p_background)),
    }
    rng = np.random.default_rng(seed)
    items = []
    for label in (0, 1):
        for i in range(n_per_class):
            mask = rng.random(universe.n_pairs) < probs[label]
            items.append(
                DatasetItem(f"c{label}-{i:03d}", Graph.from_mask(universe, mask), label)
            )
    return LabeledDataset(universe, items)


def induced_pair_mask(universe: VertexUniverse, vertices: Iterable[int]) -> np.ndarray:
    """Boolean per-slot mask of pairs with BOTH endpoints in ``vertices``."""
    member = np.zeros(universe.n, dtype=bool)
    idx = np.asarray(sorted({int(v) for v in vertices}), dtype=np.int64)
    if idx.size:
        if idx.min() < 0 or idx.max() >= universe.n:
            raise GraphError(f"vertex set out of range for n={universe.n}")
        member[idx] = True
    pairs = all_pairs(universe.n)
    return member[pairs[:, 0]] & member[pairs[:, 1]]
