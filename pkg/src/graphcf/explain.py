"""Aggregating counterfactuals into local and global explanations.

One counterfactual is already an explanation: the edges removed from the
original are edges whose presence mattered to the classification, the edges
added are edges whose absence mattered. Running the search many times turns
those diffs into importance statistics — per-edge add/remove frequencies
for a single graph (local), and four per-edge counters split by predicted
class and edit direction across a whole dataset (global), which can be
rolled up to region pairs or to single vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .datasets import LabeledDataset, induced_pair_mask
from .graphs import EdgeSet, Graph, GraphError, VertexUniverse, all_pairs
from .oracles import OracleSession
from .search import (
    STATUS_OK,
    SearchConfig,
    run_pipeline,
)

Edge = tuple[int, int]


# ---------------------------------------------------------------------------
# Contrastive case-based explanation


@dataclass(frozen=True)
class ContrastiveExplanation:
    removed: EdgeSet
    added: EdgeSet
    text: str


def _edge_phrase(universe: VertexUniverse, edges: list[Edge]) -> str:
    names = [
        f"{universe.vertex_labels[u]} and {universe.vertex_labels[v]}" for u, v in edges
    ]
    if len(names) == 1:
        return f"the connection between {names[0]}"
    return "the connections between " + "; ".join(names)


def contrastive_explanation(
    original: Graph,
    counterfactual: Graph,
    *,
    graph_id: str = "this graph",
    predicted_label: int | None = None,
) -> ContrastiveExplanation:
    """Render one (original, counterfactual) pair as sets plus a sentence.

    ``removed`` holds original-minus-counterfactual, ``added`` the reverse;
    together they partition the symmetric difference. The sentence names the
    touched vertex pairs by their labels.
    """
    original.universe.require_compatible(counterfactual.universe)
    universe = original.universe
    removed = EdgeSet.from_mask(universe, original.mask & ~counterfactual.mask)
    added = EdgeSet.from_mask(universe, counterfactual.mask & ~original.mask)

    cls = "its class" if predicted_label is None else f"class {predicted_label}"
    other = "the opposite class" if predicted_label is None else f"class {1 - predicted_label}"
    clauses = []
    if removed:
        clauses.append(f"{_edge_phrase(universe, removed.edges())} did not exist")
    if added:
        verb = "instead " if removed else ""
        clauses.append(f"{verb}{_edge_phrase(universe, added.edges())} existed")
    if not clauses:
        text = (
            f"{graph_id} is classified as {cls}; the counterfactual is identical, "
            f"so no edge change explains the classification (degenerate pair)."
        )
    else:
        text = (
            f"{graph_id} is classified as {cls}. If {' and '.join(clauses)}, "
            f"it would have been classified as {other}."
        )
    return ContrastiveExplanation(removed, added, text)


# ---------------------------------------------------------------------------
# Local (single-graph) importance statistics


@dataclass
class LocalExplanation:
    """Edge add/remove frequencies over many counterfactuals of one graph."""

    graph_id: str
    n_counterfactuals: int
    n_successes: int
    n_failures: int
    add_freq: dict[Edge, int] = field(default_factory=dict)
    remove_freq: dict[Edge, int] = field(default_factory=dict)

    def top_added(self, j: int = 6) -> list[tuple[Edge, int]]:
        return sorted(self.add_freq.items(), key=lambda kv: (-kv[1], kv[0]))[:j]

    def top_removed(self, j: int = 6) -> list[tuple[Edge, int]]:
        return sorted(self.remove_freq.items(), key=lambda kv: (-kv[1], kv[0]))[:j]


def local_explanation(
    original: Graph,
    backend,
    cfg: SearchConfig,
    n_counterfactuals: int = 1000,
    dataset: LabeledDataset | None = None,
    *,
    graph_id: str = "",
) -> LocalExplanation:
    """Run the pipeline ``n_counterfactuals`` times and tally the diffs.

    Run ``i`` is seeded ``cfg.seed + i`` with a fresh session, so the whole
    batch replays from the base seed. Failed runs are skipped but counted.
    """
    add_freq: dict[Edge, int] = {}
    remove_freq: dict[Edge, int] = {}
    successes = failures = 0
    for i in range(n_counterfactuals):
        session = OracleSession(backend)
        result = run_pipeline(
            original, session, replace(cfg, seed=cfg.seed + i), dataset, graph_id=graph_id
        )
        if result.status != STATUS_OK or result.counterfactual is None:
            failures += 1
            continue
        successes += 1
        for edge in result.added_edges():
            add_freq[edge] = add_freq.get(edge, 0) + 1
        for edge in result.removed_edges():
            remove_freq[edge] = remove_freq.get(edge, 0) + 1
    return LocalExplanation(
        graph_id, n_counterfactuals, successes, failures, add_freq, remove_freq
    )


# ---------------------------------------------------------------------------
# Global counters


@dataclass
class GlobalCounters:
    """Per-edge counters split by the ORACLE's class of the original graph.

    For every (original, counterfactual) pair with predicted class p, edges
    added by the counterfactual increment ``c{p}_plus`` and removed edges
    increment ``c{p}_minus``; each pair contributes exactly |diff|
    increments in total.
    """

    universe: VertexUniverse
    c0_plus: np.ndarray
    c0_minus: np.ndarray
    c1_plus: np.ndarray
    c1_minus: np.ndarray
    provenance: list[tuple[str, int]] = field(default_factory=list)
    failures: int = 0

    @classmethod
    def empty(cls, universe: VertexUniverse) -> "GlobalCounters":
        zeros = lambda: np.zeros(universe.n_pairs, dtype=np.int64)  # noqa: E731
        return cls(universe, zeros(), zeros(), zeros(), zeros())

    def record(
        self,
        original: Graph,
        counterfactual: Graph,
        predicted_label: int,
        *,
        graph_id: str = "",
        run: int = 0,
    ) -> None:
        self.universe.require_compatible(original.universe)
        added = counterfactual.mask & ~original.mask
        removed = original.mask & ~counterfactual.mask
        if predicted_label == 0:
            self.c0_plus[added] += 1
            self.c0_minus[removed] += 1
        else:
            self.c1_plus[added] += 1
            self.c1_minus[removed] += 1
        self.provenance.append((graph_id, run))

    def counter(self, name: str) -> np.ndarray:
        return {
            "c0_plus": self.c0_plus,
            "c0_minus": self.c0_minus,
            "c1_plus": self.c1_plus,
            "c1_minus": self.c1_minus,
        }[name]

    def total_increments(self) -> int:
        return int(
            self.c0_plus.sum() + self.c0_minus.sum()
            + self.c1_plus.sum() + self.c1_minus.sum()
        )


def global_counters(
    dataset: LabeledDataset,
    backend,
    cfg: SearchConfig,
    runs_per_graph: int = 1,
    *,
    search_dataset: LabeledDataset | None = None,
) -> GlobalCounters:
    """Search every dataset graph ``runs_per_graph`` times and fold the diffs.

    The class index of each contribution is the oracle's prediction for the
    original graph, not its dataset label, so misclassified graphs feed the
    predicted class's counters. ``search_dataset`` (defaulting to
    ``dataset``) feeds the weighting when cfg.mode is data-driven.
    """
    counters = GlobalCounters.empty(dataset.universe)
    reference = search_dataset if search_dataset is not None else dataset
    for item in dataset:
        for run in range(runs_per_graph):
            session = OracleSession(backend)
            predicted = session.classify(item.graph)
            result = run_pipeline(
                item.graph,
                session,
                replace(cfg, seed=cfg.seed + run),
                reference if cfg.mode == "data_driven" else None,
                graph_id=item.graph_id,
            )
            if result.status != STATUS_OK or result.counterfactual is None:
                counters.failures += 1
                continue
            counters.record(
                item.graph, result.counterfactual, predicted,
                graph_id=item.graph_id, run=run,
            )
    return counters


# ---------------------------------------------------------------------------
# Region- and vertex-level aggregation


@dataclass
class RegionMatrix:
    """Square region-pair aggregation of two global counters.

    ``matrix[i][j]`` with i < j sums the upper-side counter over edges with
    one endpoint in region i and one in region j; i > j sums the lower-side
    counter. Diagonal cells (within-region edges) carry the upper-side
    counter, as noted in ``sides``.
    """

    regions: tuple[str, ...]
    matrix: np.ndarray
    sides: dict[str, str]

    def symmetry_score(self) -> float:
        """How mirrored the two triangles are, in [0, 1].

        1 means the upper and lower aggregations agree cell for cell, 0
        means their mass never overlaps. Classifiers that key on edge
        presence symmetrically tend to score high; this is an empirical
        tendency to report, not an identity to assert.
        """
        upper = self.matrix[np.triu_indices_from(self.matrix, k=1)]
        lower = self.matrix.T[np.triu_indices_from(self.matrix, k=1)]
        total = float((upper + lower).sum())
        if total == 0:
            return 1.0
        return 1.0 - float(np.abs(upper - lower).sum()) / total


def _region_indices(universe: VertexUniverse) -> tuple[tuple[str, ...], np.ndarray]:
    if universe.region_of is None:
        raise GraphError("universe has no region annotation")
    missing = [i for i in range(universe.n) if i not in universe.region_of]
    if missing:
        raise GraphError(f"region map missing vertices {missing[:5]}")
    ordered: list[str] = []
    for i in range(universe.n):
        name = universe.region_of[i]
        if name not in ordered:
            ordered.append(name)  # first-appearance order, stable
    index = {name: pos for pos, name in enumerate(ordered)}
    per_vertex = np.array([index[universe.region_of[i]] for i in range(universe.n)])
    return tuple(ordered), per_vertex


def region_heatmap(gc: GlobalCounters, universe: VertexUniverse, side: str) -> RegionMatrix:
    """Fold two class-relevant counters onto region pairs.

    ``side="class1"`` explains the class-1 label: the upper triangle
    aggregates c0_plus (edges whose absence marked class 0 — i.e. presence
    pulls toward class 1) and the lower triangle c1_minus (edges whose
    presence marked class 1). ``side="class0"`` swaps roles: upper c1_plus,
    lower c0_minus.
    """
    if side == "class1":
        upper_name, lower_name = "c0_plus", "c1_minus"
    elif side == "class0":
        upper_name, lower_name = "c1_plus", "c0_minus"
    else:
        raise GraphError(f"side must be 'class0' or 'class1', got {side!r}")
    regions, per_vertex = _region_indices(universe)
    pairs = all_pairs(universe.n)
    ru = per_vertex[pairs[:, 0]]
    rv = per_vertex[pairs[:, 1]]
    lo = np.minimum(ru, rv)
    hi = np.maximum(ru, rv)
    size = len(regions)
    matrix = np.zeros((size, size), dtype=np.int64)
    np.add.at(matrix, (lo, hi), gc.counter(upper_name))  # upper incl. diagonal
    off = lo != hi
    np.add.at(matrix, (hi[off], lo[off]), gc.counter(lower_name)[off])
    return RegionMatrix(
        regions, matrix, {"upper": upper_name, "lower": lower_name, "diagonal": upper_name}
    )


@dataclass
class RoiImportance:
    """Per-vertex sums of each counter over the vertex's incident edges.

    Every edge contributes to both endpoints, so each counter's column sums
    to twice its per-edge total (the handshake identity).
    """

    universe: VertexUniverse
    c0_plus: np.ndarray
    c0_minus: np.ndarray
    c1_plus: np.ndarray
    c1_minus: np.ndarray

    def rows(self) -> list[dict]:
        return [
            {
                "vertex": i,
                "label": self.universe.vertex_labels[i],
                "c0_plus": int(self.c0_plus[i]),
                "c0_minus": int(self.c0_minus[i]),
                "c1_plus": int(self.c1_plus[i]),
                "c1_minus": int(self.c1_minus[i]),
            }
            for i in range(self.universe.n)
        ]


def roi_importance(gc: GlobalCounters, universe: VertexUniverse) -> RoiImportance:
    pairs = all_pairs(universe.n)

    def fold(counter: np.ndarray) -> np.ndarray:
        out = np.zeros(universe.n, dtype=np.int64)
        np.add.at(out, pairs[:, 0], counter)
        np.add.at(out, pairs[:, 1], counter)
        return out

    return RoiImportance(
        universe, fold(gc.c0_plus), fold(gc.c0_minus), fold(gc.c1_plus), fold(gc.c1_minus)
    )


def counter_mass_split(gc: GlobalCounters, inside_vertices) -> tuple[float, float]:
    """Mean per-edge counter mass on pairs inside a vertex set vs outside.

    "Inside" means both endpoints in the set; "outside" means both endpoints
    out of it (spanning pairs belong to neither bucket). Useful as a litmus
    check: a classifier that only reads a planted subgraph should put its
    explanation mass on the inside bucket.
    """
    total = gc.c0_plus + gc.c0_minus + gc.c1_plus + gc.c1_minus
    inside = induced_pair_mask(gc.universe, inside_vertices)
    member = np.zeros(gc.universe.n, dtype=bool)
    member[list({int(v) for v in inside_vertices})] = True
    pairs = all_pairs(gc.universe.n)
    outside = ~member[pairs[:, 0]] & ~member[pairs[:, 1]]
    inside_mean = float(total[inside].mean()) if inside.any() else 0.0
    outside_mean = float(total[outside].mean()) if outside.any() else 0.0
    return inside_mean, outside_mean
