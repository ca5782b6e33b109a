"""Budgeted, call-counting access to binary graph classifiers.

A classifier backend is anything with a ``universe`` attribute and a
``classify(graph) -> 0 | 1`` method. :class:`OracleSession` wraps one
backend for one search run: it memoizes labels, counts distinct queries,
and enforces per-phase call budgets. Cache hits are free and tallied
separately so raw and deduplicated call statistics can both be reported.

Backends must be deterministic; :func:`audit_determinism` re-queries a
sample to check, and a session built with ``cross_check=True`` re-asks the
backend on every cache hit (uncounted) and fails loudly on disagreement.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .datasets import LabeledDataset, induced_pair_mask
from .graphs import Graph, GraphError, VertexUniverse


class OracleError(Exception):
    """Base for everything that can go wrong when querying a classifier."""


class BudgetExhaustedError(OracleError):
    """The phase's call budget is spent; the search must return best-so-far."""


class BackendFailureError(OracleError):
    """The classifier backend failed (died, timed out, or broke protocol)."""


class NondeterministicBackendError(OracleError):
    """The backend returned different labels for the same graph."""


@dataclass
class PhaseTally:
    calls: int = 0
    cache_hits: int = 0


@dataclass
class OracleSession:
    """One classifier, one search run: counting, caching, budget guards.

    ``calls_used`` counts distinct backend invocations (cache misses) only;
    repeated queries of a graph already seen hit the memo and are tallied in
    ``cache_hits``. Budgets, when set via :meth:`phase`, cap the misses made
    inside that phase.
    """

    backend: object
    cache: bool = True
    cross_check: bool = False
    calls_used: int = 0
    cache_hits: int = 0
    phase_tallies: dict[str, PhaseTally] = field(default_factory=dict)
    _memo: dict[bytes, int] = field(default_factory=dict, repr=False)
    _phase: str | None = None
    _phase_limit: int | None = None

    @property
    def universe(self) -> VertexUniverse:
        return self.backend.universe

    @contextmanager
    def phase(self, name: str, max_calls: int | None):
        """Scope a budget: at most ``max_calls`` cache misses inside."""
        if self._phase is not None:
            raise OracleError(f"phase {self._phase!r} already active")
        self._phase = name
        self._phase_limit = max_calls
        self.phase_tallies.setdefault(name, PhaseTally())
        try:
            yield self
        finally:
            self._phase = None
            self._phase_limit = None

    def phase_calls(self, name: str) -> int:
        tally = self.phase_tallies.get(name)
        return tally.calls if tally else 0

    def _backend_label(self, graph: Graph) -> int:
        label = self.backend.classify(graph)
        if label not in (0, 1):
            raise BackendFailureError(f"backend returned label {label!r}, not 0 or 1")
        return int(label)

    def classify(self, graph: Graph) -> int:
        """Label a graph, consuming budget only on a cache miss."""
        self.universe.require_compatible(graph.universe)
        key = graph.key() if self.cache else None
        if key is not None and key in self._memo:
            cached = self._memo[key]
            if self.cross_check:
                fresh = self._backend_label(graph)
                if fresh != cached:
                    raise NondeterministicBackendError(
                        f"backend flipped from {cached} to {fresh} on a repeated graph"
                    )
            self.cache_hits += 1
            if self._phase is not None:
                self.phase_tallies[self._phase].cache_hits += 1
            return cached
        if self._phase is not None:
            tally = self.phase_tallies[self._phase]
            if self._phase_limit is not None and tally.calls >= self._phase_limit:
                raise BudgetExhaustedError(
                    f"phase {self._phase!r} exhausted its budget of {self._phase_limit} calls"
                )
            tally.calls += 1
        self.calls_used += 1  # attempts count, even if the backend then fails
        label = self._backend_label(graph)
        if key is not None:
            self._memo[key] = label
        return label

    def audit(self, graph: Graph) -> int:
        """Uncounted direct backend query, for post-hoc validity checks."""
        return self._backend_label(graph)


def audit_determinism(backend, graphs, repeats: int = 2) -> None:
    """Re-query each graph; raise if any label changes between passes."""
    first = [backend.classify(g) for g in graphs]
    for _ in range(repeats - 1):
        again = [backend.classify(g) for g in graphs]
        if again != first:
            bad = next(i for i, (a, b) in enumerate(zip(first, again)) if a != b)
            raise NondeterministicBackendError(
                f"graph #{bad} classified {first[bad]} then {again[bad]}"
            )


# ---------------------------------------------------------------------------
# Built-in classifiers


def induced_edge_count(graph: Graph, vertices) -> int:
    """Number of edges with both endpoints inside ``vertices``."""
    return int(np.count_nonzero(graph.mask & induced_pair_mask(graph.universe, vertices)))


def embed_contrast(graph: Graph, s1, s2) -> tuple[int, int]:
    """2-D contrast embedding: (edges induced by s1, edges induced by s2).

    Positional: the first set drives the x coordinate, the second the y.
    By the plotting convention used throughout, pass the control-class
    (class-0) set first and the condition-class (class-1) set second.
    """
    return induced_edge_count(graph, s1), induced_edge_count(graph, s2)


class EdgeCountThresholdClassifier:
    """Label 1 iff the graph has at least ``threshold`` edges."""

    def __init__(self, universe: VertexUniverse, threshold: int):
        if threshold < 0:
            raise GraphError("threshold must be non-negative")
        self.universe = universe
        self.threshold = int(threshold)

    def classify(self, graph: Graph) -> int:
        self.universe.require_compatible(graph.universe)
        return 1 if len(graph) >= self.threshold else 0

    def describe(self) -> str:
        return f"builtin:threshold:{self.threshold}"


class LinearContrastClassifier:
    """Transparent white-box: a line over the 2-D contrast embedding.

    ``s1`` is the vertex set whose induced edge count is the y coordinate
    (the set dense in class-1 graphs); ``s2`` drives the x coordinate (dense
    in class-0 graphs). The decision boundary is ``y = m*x + c``;
    ``positive_side`` names the open half-plane mapped to label 1. Points
    exactly on the line classify as 0 — crossing the boundary requires
    strictly entering the positive side.
    """

    def __init__(
        self,
        universe: VertexUniverse,
        s1,
        s2,
        m: float,
        c: float,
        positive_side: str = "above",
    ):
        self.universe = universe
        self.s1 = tuple(sorted({int(v) for v in s1}))
        self.s2 = tuple(sorted({int(v) for v in s2}))
        if not self.s1 or not self.s2:
            raise GraphError("both contrast vertex sets must be non-empty")
        if not np.isfinite(m) or m == 0:
            raise GraphError(f"slope must be finite and non-zero, got {m!r}")
        if positive_side not in ("above", "below"):
            raise GraphError(f"positive_side must be 'above' or 'below', got {positive_side!r}")
        self.m = float(m)
        self.c = float(c)
        self.positive_side = positive_side
        self._s1_pairs = induced_pair_mask(universe, self.s1)
        self._s2_pairs = induced_pair_mask(universe, self.s2)

    def embed(self, graph: Graph) -> tuple[int, int]:
        """(x, y) = (edges induced by s2, edges induced by s1)."""
        self.universe.require_compatible(graph.universe)
        x = int(np.count_nonzero(graph.mask & self._s2_pairs))
        y = int(np.count_nonzero(graph.mask & self._s1_pairs))
        return x, y

    def classify_point(self, x: float, y: float) -> int:
        side = y - (self.m * x + self.c)
        if self.positive_side == "above":
            return 1 if side > 0 else 0
        return 1 if side < 0 else 0

    def classify(self, graph: Graph) -> int:
        return self.classify_point(*self.embed(graph))

    def describe(self) -> str:
        return (
            f"builtin:linear:m={self.m}:c={self.c}:side={self.positive_side}"
            f":s1={','.join(map(str, self.s1))}:s2={','.join(map(str, self.s2))}"
        )


class KnnEditDistanceClassifier:
    """Majority vote of the k nearest reference graphs under edit distance.

    ``k_neighbors`` must be odd so votes cannot tie; distance ties are
    broken by reference dataset order (stable sort).
    """

    def __init__(self, reference: LabeledDataset, k_neighbors: int = 5):
        if k_neighbors < 1 or k_neighbors % 2 == 0:
            raise GraphError(f"k_neighbors must be odd and positive, got {k_neighbors}")
        if k_neighbors > len(reference):
            raise GraphError(
                f"k_neighbors={k_neighbors} exceeds reference size {len(reference)}"
            )
        reference.require_both_classes()
        self.reference = reference
        self.k_neighbors = int(k_neighbors)
        self._matrix = reference.edge_matrix()
        self._labels = reference.labels()

    @property
    def universe(self) -> VertexUniverse:
        return self.reference.universe

    def classify(self, graph: Graph) -> int:
        self.universe.require_compatible(graph.universe)
        dists = np.count_nonzero(self._matrix ^ graph.mask, axis=1)
        order = np.argsort(dists, kind="stable")[: self.k_neighbors]
        votes = self._labels[order]
        return int(np.sum(votes == 1) > np.sum(votes == 0))

    def describe(self) -> str:
        return f"builtin:knn:k={self.k_neighbors}:reference_size={len(self.reference)}"
