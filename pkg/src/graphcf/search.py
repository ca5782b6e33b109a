"""Heuristic counterfactual search under an oracle-call budget.

Two-phase bidirectional local search. Phase 1 walks AWAY from the original
graph, toggling fresh edges until the oracle's label flips (oblivious
forward search, or data-driven with class-discrimination edge weights).
Phase 2 walks the first counterfactual BACK toward the original along their
symmetric difference with an adaptive batch size, shrinking the edit
distance while keeping the label flipped. A dataset-scan baseline answers
the companion question of the closest oracle-confirmed opposite-class graph
among real examples.

All randomness (the add/remove coin, uniform picks, weighted picks) flows
from one seeded numpy PCG64 generator per run, so every trace replays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .datasets import LabeledDataset
from .graphs import EdgeSet, Graph, GraphError, edit_distance
from .oracles import (
    BackendFailureError,
    BudgetExhaustedError,
    OracleSession,
)

MODE_OBLIVIOUS = "oblivious"
MODE_DATA_DRIVEN = "data_driven"

STATUS_OK = "ok"
STATUS_PHASE1_FAILED = "phase1_failed"
STATUS_ORACLE_FAILED = "oracle_failed"
STATUS_DS_FAILED = "dataset_search_failed"


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for one search run; the defaults match the evaluated regime."""

    eta_phase1: int = 2000
    eta_phase2: int = 2000
    k: int = 5
    epsilon: float = 1e-4
    seed: int = 0
    mode: str = MODE_OBLIVIOUS
    keep_trace: bool = False

    def __post_init__(self):
        if self.eta_phase1 < 1 or self.eta_phase2 < 1:
            raise GraphError("per-phase call budgets must be positive")
        if self.k < 1:
            raise GraphError("k must be a positive integer")
        if not self.epsilon > 0:
            raise GraphError("epsilon must be strictly positive")
        if self.mode not in (MODE_OBLIVIOUS, MODE_DATA_DRIVEN):
            raise GraphError(f"mode must be {MODE_OBLIVIOUS!r} or {MODE_DATA_DRIVEN!r}")


@dataclass(frozen=True)
class TraceStep:
    phase: int
    iteration: int
    k: int
    accepted: bool
    distance: int


@dataclass
class EdgeWeighting:
    """Per-edge class-discrimination weights from a labeled dataset.

    For each pair slot, ``concordant[e]`` counts reference graphs containing
    the edge whose ground-truth label matches the oracle's classification of
    the original graph, and ``discordant[e]`` those whose label is opposite.
    The weight of an edge currently present in the graph being edited is
    concordant - discordant (removing strong markers of the current class),
    and discordant - concordant for an edge currently absent (adding strong
    markers of the opposite class). Sampling clamps weights at epsilon, so
    zero/negative-weight edges stay selectable but rare.
    """

    phase: str  # "forward" | "backward"
    weights: np.ndarray
    concordant: np.ndarray
    discordant: np.ndarray


def _containment_counts(dataset: LabeledDataset, oracle_label: int):
    matrix = dataset.edge_matrix()
    labels = dataset.labels()
    concordant = matrix[labels == oracle_label].sum(axis=0).astype(np.int64)
    discordant = matrix[labels != oracle_label].sum(axis=0).astype(np.int64)
    return concordant, discordant


def forward_weights(original: Graph, oracle_label: int, dataset: LabeledDataset) -> EdgeWeighting:
    """Weights for phase 1: present edges vs the full complement pool."""
    concordant, discordant = _containment_counts(dataset, oracle_label)
    weights = np.where(original.mask, concordant - discordant, discordant - concordant)
    return EdgeWeighting("forward", weights, concordant, discordant)


def backward_weights(
    original: Graph,
    counterfactual: Graph,
    oracle_label: int,
    dataset: LabeledDataset,
) -> EdgeWeighting:
    """Weights for phase 2 over the symmetric-difference pool.

    Edges in original-minus-counterfactual (removed in phase 1) weigh
    concordant - discordant; edges in counterfactual-minus-original (added)
    weigh the reverse. Slots outside the pool get weight 0; they are never
    drawn. Pool membership of a surviving edge cannot change during a run —
    a toggled edge leaves the pool — so one table serves the whole phase.
    """
    concordant, discordant = _containment_counts(dataset, oracle_label)
    removed = original.mask & ~counterfactual.mask
    added = counterfactual.mask & ~original.mask
    weights = np.zeros(original.universe.n_pairs, dtype=np.int64)
    weights[removed] = (concordant - discordant)[removed]
    weights[added] = (discordant - concordant)[added]
    return EdgeWeighting("backward", weights, concordant, discordant)


def pick_weighted(
    rng: np.random.Generator,
    pool: np.ndarray,
    weights: np.ndarray,
    epsilon: float,
    count: int,
) -> np.ndarray:
    """Sample ``count`` distinct slots from ``pool`` without replacement.

    Sequential draws with renormalization; each draw picks slot ``e`` with
    probability proportional to ``max(epsilon, weights[e])`` among the
    remaining pool.
    """
    if count > pool.size:
        raise GraphError(f"cannot pick {count} edges from a pool of {pool.size}")
    remaining = pool.copy()
    probs = np.maximum(epsilon, weights[remaining].astype(float))
    chosen = np.empty(count, dtype=np.int64)
    for i in range(count):
        cum = np.cumsum(probs)
        j = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        j = min(j, remaining.size - 1)
        chosen[i] = remaining[j]
        remaining = np.delete(remaining, j)
        probs = np.delete(probs, j)
    return chosen


def _pick_uniform(rng: np.random.Generator, pool: np.ndarray, count: int) -> np.ndarray:
    if count > pool.size:
        raise GraphError(f"cannot pick {count} edges from a pool of {pool.size}")
    return rng.choice(pool, size=count, replace=False)


@dataclass
class PhaseOutcome:
    """What one phase produced, for assembly into a CounterfactualResult."""

    graph: Graph | None
    iterations: int
    calls: int
    cache_hits: int
    status: str
    trace: list[TraceStep] = field(default_factory=list)
    edges_touched: int = 0  # forward search: size of the used-edge list


def _forward_search(
    original: Graph,
    session: OracleSession,
    cfg: SearchConfig,
    rng: np.random.Generator,
    original_label: int,
    weighting: EdgeWeighting | None,
    phase_name: str = "phase1",
) -> PhaseOutcome:
    universe = original.universe
    working = original.mask.copy()
    # candidate pools are defined against the ORIGINAL graph and shrink as
    # the used-edge list grows; no edge is ever edited twice
    add_pool = ~original.mask.copy()
    remove_pool = original.mask.copy()
    trace: list[TraceStep] = []
    iterations = 0
    edges_touched = 0
    status = STATUS_PHASE1_FAILED
    found: Graph | None = None

    with session.phase(phase_name, cfg.eta_phase1):
        tally = session.phase_tallies[phase_name]
        calls_at_entry, hits_at_entry = tally.calls, tally.cache_hits
        while iterations < cfg.eta_phase1:
            exhausted = False
            for _ in range(cfg.k):
                adding = rng.random() < 0.5
                pool = add_pool if adding else remove_pool
                if not pool.any():
                    pool = remove_pool if adding else add_pool
                    if not pool.any():
                        exhausted = True
                        break
                    adding = not adding
                candidates = np.flatnonzero(pool)
                if weighting is None:
                    slot = int(_pick_uniform(rng, candidates, 1)[0])
                else:
                    slot = int(
                        pick_weighted(rng, candidates, weighting.weights, cfg.epsilon, 1)[0]
                    )
                working[slot] = not working[slot]
                add_pool[slot] = False
                remove_pool[slot] = False
                edges_touched += 1
            if exhausted:
                break
            iterations += 1
            try:
                label = session.classify(Graph.from_mask(universe, working))
            except BudgetExhaustedError:
                iterations -= 1  # the aborted iteration produced no verdict
                break
            flipped = label != original_label
            if cfg.keep_trace:
                trace.append(TraceStep(1, iterations, cfg.k, flipped, cfg.k * iterations))
            if flipped:
                found = Graph.from_mask(universe, working)
                status = STATUS_OK
                break
        calls = tally.calls - calls_at_entry
        hits = tally.cache_hits - hits_at_entry
    return PhaseOutcome(found, iterations, calls, hits, status, trace,
                        edges_touched=edges_touched)


def forward_search(
    original: Graph,
    session: OracleSession,
    cfg: SearchConfig,
    dataset: LabeledDataset | None = None,
    *,
    rng: np.random.Generator | None = None,
    original_label: int | None = None,
) -> PhaseOutcome:
    """Phase 1: random edits away from the original until the label flips.

    Per iteration, ``cfg.k`` fresh edges are toggled — for each a fair coin
    chooses between adding an edge absent from the original and removing one
    of its own edges — and the oracle is consulted once. Succeeds the first
    time the label differs from the original's; the edit distance of the
    found counterfactual is exactly ``k * iterations``. Fails when the
    budget is spent, or when both candidate pools run dry.

    Oblivious by default; given a reference ``dataset``, each pick instead
    draws with probability proportional to max(epsilon, weight) under the
    forward class-discrimination weighting (the data-driven variant).
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    if original_label is None:
        original_label = session.classify(original)
    weighting = None
    if dataset is not None:
        if len(dataset) == 0:
            raise GraphError("data-driven search needs a non-empty dataset")
        weighting = forward_weights(original, original_label, dataset)
    return _forward_search(original, session, cfg, rng, original_label, weighting)


def _backward_search(
    original: Graph,
    first_counterfactual: Graph,
    session: OracleSession,
    cfg: SearchConfig,
    rng: np.random.Generator,
    original_label: int,
    weighting: EdgeWeighting | None,
    phase_name: str = "phase2",
) -> PhaseOutcome:
    universe = original.universe
    target = 1 - original_label
    current = first_counterfactual.mask.copy()
    pool = original.mask ^ current
    k = cfg.k
    iterations = 0
    status = STATUS_OK
    trace: list[TraceStep] = []

    with session.phase(phase_name, cfg.eta_phase2):
        tally = session.phase_tallies[phase_name]
        calls_at_entry, hits_at_entry = tally.calls, tally.cache_hits
        while iterations < cfg.eta_phase2 and pool.any():
            iterations += 1
            k = min(k, int(np.count_nonzero(pool)))
            candidates = np.flatnonzero(pool)
            if weighting is None:
                picked = _pick_uniform(rng, candidates, k)
            else:
                picked = pick_weighted(rng, candidates, weighting.weights, cfg.epsilon, k)
            candidate = current.copy()
            candidate[picked] = ~candidate[picked]
            try:
                label = session.classify(Graph.from_mask(universe, candidate))
            except BudgetExhaustedError:
                iterations -= 1
                break
            except BackendFailureError:
                status = STATUS_ORACLE_FAILED
                break
            accepted = label == target
            k_used = k
            if accepted:
                k += 1
                current = candidate
                pool = original.mask ^ current
            elif k > 1:
                k -= 1
            else:
                pool[picked] = False
            if cfg.keep_trace:
                trace.append(
                    TraceStep(
                        2,
                        iterations,
                        k_used,
                        accepted,
                        int(np.count_nonzero(original.mask ^ current)),
                    )
                )
        calls = tally.calls - calls_at_entry
        hits = tally.cache_hits - hits_at_entry
    return PhaseOutcome(
        Graph.from_mask(universe, current), iterations, calls, hits, status, trace
    )


def backward_search(
    original: Graph,
    first_counterfactual: Graph,
    session: OracleSession,
    cfg: SearchConfig,
    dataset: LabeledDataset | None = None,
    *,
    rng: np.random.Generator | None = None,
    original_label: int | None = None,
) -> PhaseOutcome:
    """Phase 2: adaptive-batch walk from the counterfactual back home.

    The candidate pool is the symmetric difference with the original; each
    iteration toggles min(k, |pool|) drawn pool edges on the current
    counterfactual. A candidate that keeps the flipped label is accepted
    (k grows, the pool is recomputed and has strictly shrunk); a rejected
    candidate shrinks k, and once k has hit 1 the single tested edge is
    dropped from the pool. Terminates on an empty pool or a spent budget,
    returning the best counterfactual held.

    Oblivious (uniform picks) by default; given a reference ``dataset``,
    picks are weighted by the backward class-discrimination weighting.
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    if original_label is None:
        original_label = session.classify(original)
    weighting = None
    if dataset is not None:
        if len(dataset) == 0:
            raise GraphError("data-driven search needs a non-empty dataset")
        weighting = backward_weights(original, first_counterfactual,
                                     original_label, dataset)
    return _backward_search(
        original, first_counterfactual, session, cfg, rng, original_label, weighting
    )


@dataclass
class CounterfactualResult:
    """Outcome of one pipeline (or baseline) run for one graph."""

    graph_id: str
    mode: str
    seed: int
    status: str
    counterfactual: Graph | None
    distance: int | None
    phase1_distance: int | None
    calls_initial: int
    calls_phase1: int
    calls_phase2: int
    cache_hits_phase1: int = 0
    cache_hits_phase2: int = 0
    iterations_phase1: int = 0
    iterations_phase2: int = 0
    trace: list[TraceStep] = field(default_factory=list)
    original: Graph | None = None

    @property
    def total_calls(self) -> int:
        return self.calls_initial + self.calls_phase1 + self.calls_phase2

    def removed_edges(self) -> list[tuple[int, int]]:
        if self.counterfactual is None or self.original is None:
            return []
        return EdgeSet.from_mask(
            self.original.universe, self.original.mask & ~self.counterfactual.mask
        ).edges()

    def added_edges(self) -> list[tuple[int, int]]:
        if self.counterfactual is None or self.original is None:
            return []
        return EdgeSet.from_mask(
            self.original.universe, self.counterfactual.mask & ~self.original.mask
        ).edges()

    def to_json_dict(self, include_trace: bool = False) -> dict:
        doc = {
            "graph_id": self.graph_id,
            "mode": self.mode,
            "seed": self.seed,
            "status": self.status,
            "distance": self.distance,
            "phase1_distance": self.phase1_distance,
            "calls_phase1": self.calls_phase1,
            "calls_phase2": self.calls_phase2,
            "counterfactual_edges": None
            if self.counterfactual is None
            else self.counterfactual.edges(),
            "removed_edges": self.removed_edges(),
            "added_edges": self.added_edges(),
        }
        if include_trace:
            doc["trace"] = [
                {"phase": s.phase, "iteration": s.iteration, "k": s.k,
                 "accepted": s.accepted, "distance": s.distance}
                for s in self.trace
            ]
        return doc


def run_pipeline(
    original: Graph,
    session: OracleSession,
    cfg: SearchConfig,
    dataset: LabeledDataset | None = None,
    *,
    graph_id: str = "",
) -> CounterfactualResult:
    """Full two-phase search: forward until the label flips, then backward.

    In ``data_driven`` mode both phases use the dataset's edge weighting.
    The original's classification is computed once up front and shared by
    both phases (reported as ``calls_initial``). Every returned
    counterfactual is re-audited against the backend outside the budget.
    """
    if cfg.mode == MODE_DATA_DRIVEN and dataset is None:
        raise GraphError("data_driven mode requires a dataset")
    rng = np.random.default_rng(cfg.seed)

    calls_before = session.calls_used
    try:
        original_label = session.classify(original)
    except BackendFailureError:
        return CounterfactualResult(
            graph_id, cfg.mode, cfg.seed, STATUS_ORACLE_FAILED, None, None, None,
            session.calls_used - calls_before, 0, 0, original=original,
        )
    calls_initial = session.calls_used - calls_before

    try:
        phase1 = forward_search(
            original, session, cfg,
            dataset if cfg.mode == MODE_DATA_DRIVEN else None,
            rng=rng, original_label=original_label,
        )
    except BackendFailureError:
        return CounterfactualResult(
            graph_id, cfg.mode, cfg.seed, STATUS_ORACLE_FAILED, None, None, None,
            calls_initial, session.phase_calls("phase1"), 0, original=original,
        )

    if phase1.graph is None:
        return CounterfactualResult(
            graph_id, cfg.mode, cfg.seed, phase1.status, None, None, None,
            calls_initial, phase1.calls, 0,
            cache_hits_phase1=phase1.cache_hits,
            iterations_phase1=phase1.iterations,
            trace=phase1.trace, original=original,
        )

    phase1_distance = edit_distance(original, phase1.graph)

    phase2 = backward_search(
        original, phase1.graph, session, cfg,
        dataset if cfg.mode == MODE_DATA_DRIVEN else None,
        rng=rng, original_label=original_label,
    )

    counterfactual = phase2.graph if phase2.graph is not None else phase1.graph
    status = phase2.status
    if status == STATUS_OK and session.audit(counterfactual) != 1 - original_label:
        raise BackendFailureError(
            "post-hoc audit failed: returned counterfactual no longer flips the label"
        )
    return CounterfactualResult(
        graph_id,
        cfg.mode,
        cfg.seed,
        status,
        counterfactual,
        edit_distance(original, counterfactual),
        phase1_distance,
        calls_initial,
        phase1.calls,
        phase2.calls,
        cache_hits_phase1=phase1.cache_hits,
        cache_hits_phase2=phase2.cache_hits,
        iterations_phase1=phase1.iterations,
        iterations_phase2=phase2.iterations,
        trace=phase1.trace + phase2.trace,
        original=original,
    )


def run_many(
    original: Graph,
    backend,
    cfg: SearchConfig,
    runs: int,
    dataset: LabeledDataset | None = None,
    *,
    graph_id: str = "",
    cache: bool = True,
) -> list[CounterfactualResult]:
    """Repeat the pipeline with seeds cfg.seed, cfg.seed+1, ...; one fresh
    session (fresh budget, fresh memo) per run."""
    results = []
    for r in range(runs):
        session = OracleSession(backend, cache=cache)
        run_cfg = replace(cfg, seed=cfg.seed + r)
        results.append(
            run_pipeline(original, session, run_cfg, dataset, graph_id=graph_id)
        )
    return results


def dataset_search(
    original: Graph,
    session: OracleSession,
    dataset: LabeledDataset,
    *,
    graph_id: str = "",
    original_label: int | None = None,
) -> CounterfactualResult:
    """Dataset-scan baseline: closest oracle-confirmed opposite-class graph.

    Scans the reference graphs whose ground-truth label is opposite to the
    oracle's classification of the original, in ascending edit-distance
    order (ties by dataset order), querying the oracle only for candidates
    strictly closer than the incumbent. Ascending order makes the strict
    filter globally sound and keeps the query count at one per strict
    distance improvement.
    """
    if len(dataset) == 0:
        raise GraphError("dataset search needs a non-empty dataset")
    calls_before = session.calls_used
    if original_label is None:
        original_label = session.classify(original)
    calls_initial = session.calls_used - calls_before
    wanted = 1 - original_label

    candidates = [
        (edit_distance(original, item.graph), pos)
        for pos, item in enumerate(dataset.items)
        if item.label == wanted
    ]
    candidates.sort(key=lambda t: t[0])  # stable: ties stay in dataset order

    best: Graph | None = None
    best_distance = original.universe.n_pairs  # |V^2|, the distance ceiling
    queries = 0
    with session.phase("ds", None):
        for dist, pos in candidates:
            if dist < best_distance:
                queries += 1
                if session.classify(dataset.items[pos].graph) == wanted:
                    best = dataset.items[pos].graph
                    best_distance = dist

    if best is None:
        return CounterfactualResult(
            graph_id, "dataset_search", 0, STATUS_DS_FAILED, None, None, None,
            calls_initial, queries, 0, original=original,
        )
    return CounterfactualResult(
        graph_id, "dataset_search", 0, STATUS_OK, best, best_distance, best_distance,
        calls_initial, queries, 0, original=original,
    )


def summarize_results(results: Iterable[CounterfactualResult]) -> dict:
    """Percentile summary (10/25/50/75/90) of distances and total calls.

    Results are grouped by graph id and averaged per graph first (the
    experiment-protocol convention), then percentiles are taken across
    graphs with numpy's linear interpolation.
    """
    per_graph: dict[str, list[CounterfactualResult]] = {}
    failures = 0
    for res in results:
        if res.status == STATUS_OK and res.distance is not None:
            per_graph.setdefault(res.graph_id, []).append(res)
        else:
            failures += 1
    if not per_graph:
        return {"graphs": 0, "failures": failures, "distance": None, "total_calls": None}
    mean_distances = [float(np.mean([r.distance for r in rs])) for rs in per_graph.values()]
    mean_calls = [float(np.mean([r.total_calls for r in rs])) for rs in per_graph.values()]
    levels = [10, 25, 50, 75, 90]

    def pct(values):
        points = np.percentile(np.asarray(values, dtype=float), levels)
        return {f"p{lvl}": float(p) for lvl, p in zip(levels, points)}

    return {
        "graphs": len(per_graph),
        "failures": failures,
        "distance": pct(mean_distances),
        "total_calls": pct(mean_calls),
    }
