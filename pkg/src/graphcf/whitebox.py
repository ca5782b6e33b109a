"""Transparent linear classifier harness with a known optimal counterfactual.

Over the 2-D contrast embedding (x = edges induced by the class-0 set,
y = edges induced by the class-1 set) a linear decision boundary lets the
optimal counterfactual be read off geometrically: drop a perpendicular from
the embedded point onto the boundary line, then realize the nearest
feasible integer point on the flipped side as an actual graph. Search
output can then be scored against a ground-truth optimum.

Each unit of |dx| + |dy| in embedding space costs exactly one edge edit
(one toggle inside the corresponding induced subgraph), and edits outside
the two induced subgraphs cannot move the embedding at all, so the minimal
crossing in embedding space is also the minimal graph edit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .graphs import Graph, GraphError, edit_distance
from .oracles import LinearContrastClassifier
from .search import CounterfactualResult


class EmbeddedPoint(NamedTuple):
    x: int
    y: int


class InfeasibleTargetError(GraphError):
    """No reachable embedding point flips the label; carries the nearest."""

    def __init__(self, message: str, nearest_feasible: tuple[int, int]):
        super().__init__(message)
        self.nearest_feasible = nearest_feasible


# ---------------------------------------------------------------------------
# Separator fitting


@dataclass(frozen=True)
class SeparatorFit:
    """A fitted 2-D linear decision boundary y = m*x + c.

    ``vertical`` marks the degenerate case where the boundary is a vertical
    line x = x0 (slope undefined); ``positive_side`` is then "right"/"left"
    instead of "above"/"below".
    """

    m: float | None
    c: float | None
    positive_side: str
    accuracy: float
    vertical: bool = False
    x0: float | None = None


def fit_linear_separator(
    points: Sequence[tuple[float, float]],
    labels: Sequence[int],
    *,
    iterations: int = 2000,
    learning_rate: float = 0.5,
) -> SeparatorFit:
    """Deterministic logistic fit of a separating line in 2-D.

    Plain full-batch gradient descent from a zero initialization on
    standardized features, with a fixed iteration count: same inputs, same
    line, every time. Both labels must be present.
    """
    pts = np.asarray(points, dtype=float)
    ys = np.asarray(labels, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] != ys.shape[0]:
        raise GraphError("need matching (x, y) points and labels")
    if not (np.any(ys == 0) and np.any(ys == 1)):
        raise GraphError("cannot fit a separator with a single class present")

    mean = pts.mean(axis=0)
    scale = pts.std(axis=0)
    scale[scale == 0] = 1.0
    z = (pts - mean) / scale

    w = np.zeros(2)
    b = 0.0
    n = len(ys)
    for _ in range(iterations):
        logits = z @ w + b
        residual = 1.0 / (1.0 + np.exp(-logits)) - ys
        w -= learning_rate * (z.T @ residual) / n
        b -= learning_rate * float(residual.sum()) / n

    # undo standardization: boundary is w.(p - mean)/scale + b = 0
    wx, wy = w[0] / scale[0], w[1] / scale[1]
    b0 = b - w[0] * mean[0] / scale[0] - w[1] * mean[1] / scale[1]

    def predict(p):
        return 1 if wx * p[0] + wy * p[1] + b0 > 0 else 0

    accuracy = float(np.mean([predict(p) == y for p, y in zip(pts, ys)]))
    if abs(wy) < 1e-12 * max(abs(wx), 1.0):
        if wx == 0:
            raise GraphError("degenerate fit: zero weight vector")
        return SeparatorFit(
            None, None, "right" if wx > 0 else "left", accuracy,
            vertical=True, x0=-b0 / wx,
        )
    m = -wx / wy
    c = -b0 / wy
    positive_side = "above" if wy > 0 else "below"
    return SeparatorFit(float(m), float(c), positive_side, accuracy)


# ---------------------------------------------------------------------------
# Geometric optimum


def geometric_optimum(point: tuple[float, float], m: float, c: float) -> tuple[float, float]:
    """Foot of the perpendicular from ``point`` onto the line y = m*x + c.

    The closed form: x_f = (x + m*y - m*c) / (m^2 + 1), y_f = m*x_f + c.
    """
    if not np.isfinite(m):
        raise GraphError("slope must be finite; use geometric_optimum_vertical")
    x, y = point
    xf = (x + m * y - m * c) / (m * m + 1.0)
    return (xf, m * xf + c)


def geometric_optimum_vertical(point: tuple[float, float], x0: float) -> tuple[float, float]:
    """Foot of the perpendicular onto the vertical line x = x0."""
    return (x0, point[1])


# ---------------------------------------------------------------------------
# Realizing the optimum as a graph


@dataclass
class RealizedOptimum:
    """A concrete minimum-edit counterfactual under the linear white-box."""

    graph: Graph
    target_point: tuple[int, int]
    foot: tuple[float, float]
    edit_cost: int  # d(original, graph) == |dx| + |dy|


def _axis_pools(original: Graph, wb: LinearContrastClassifier):
    """Per-axis editable slots: pairs induced by exactly one contrast set.

    Pairs induced by both sets (only possible when the sets overlap) would
    move both coordinates at once and are excluded from editing.
    """
    from .datasets import induced_pair_mask

    y_pairs = induced_pair_mask(original.universe, wb.s1)
    x_pairs = induced_pair_mask(original.universe, wb.s2)
    shared = x_pairs & y_pairs
    return x_pairs & ~shared, y_pairs & ~shared


def realize_optimal_graph(original: Graph, wb: LinearContrastClassifier) -> RealizedOptimum:
    """Minimum-edit counterfactual graph under the linear white-box.

    Finds the reachable integer embedding point with the smallest
    |dx| + |dy| whose label flips, then applies exactly that many edge
    toggles inside the two induced subgraphs. Ties prefer fewer edge
    additions, then the lexicographically smallest (x, y); edit slots are
    chosen in slot order so the construction is deterministic.
    """
    x0, y0 = wb.embed(original)
    original_label = wb.classify_point(x0, y0)
    target_label = 1 - original_label
    foot = geometric_optimum((x0, y0), wb.m, wb.c)

    x_pool, y_pool = _axis_pools(original, wb)
    x_removable = int(np.count_nonzero(original.mask & x_pool))
    x_addable = int(np.count_nonzero(~original.mask & x_pool))
    y_removable = int(np.count_nonzero(original.mask & y_pool))
    y_addable = int(np.count_nonzero(~original.mask & y_pool))

    max_radius = x_removable + x_addable + y_removable + y_addable
    best: tuple[tuple[int, int, int], tuple[int, int]] | None = None
    for radius in range(max_radius + 1):
        for dx in range(-min(radius, x_removable), min(radius, x_addable) + 1):
            dy_mag = radius - abs(dx)
            for dy in {-dy_mag, dy_mag}:
                if not -y_removable <= dy <= y_addable:
                    continue
                tx, ty = x0 + dx, y0 + dy
                if wb.classify_point(tx, ty) != target_label:
                    continue
                additions = max(dx, 0) + max(dy, 0)
                rank = (additions, tx, ty)
                if best is None or rank < best[0]:
                    best = (rank, (tx, ty))
        if best is not None:
            target = best[1]
            break
    else:
        # nothing reachable flips; report the reachable point nearest the foot
        nearest = _nearest_reachable(
            (x0, y0), foot, x_removable, x_addable, y_removable, y_addable
        )
        raise InfeasibleTargetError(
            f"no reachable embedding point flips the label; nearest to the"
            f" boundary foot is {nearest}",
            nearest,
        )

    graph = _apply_axis_edits(original, x_pool, target[0] - x0, y_pool, target[1] - y0)
    assert wb.classify(graph) == target_label
    return RealizedOptimum(graph, target, foot, edit_distance(original, graph))


def _nearest_reachable(origin, foot, x_rem, x_add, y_rem, y_add):
    x0, y0 = origin
    tx = min(max(foot[0], x0 - x_rem), x0 + x_add)
    ty = min(max(foot[1], y0 - y_rem), y0 + y_add)
    return (int(round(tx)), int(round(ty)))


def _apply_axis_edits(original: Graph, x_pool, dx: int, y_pool, dy: int) -> Graph:
    mask = original.mask.copy()
    for pool, delta in ((x_pool, dx), (y_pool, dy)):
        if delta > 0:
            slots = np.flatnonzero(pool & ~original.mask)[:delta]
        elif delta < 0:
            slots = np.flatnonzero(pool & original.mask)[:-delta]
        else:
            continue
        mask[slots] = ~mask[slots]
    return Graph.from_mask(original.universe, mask, copy=False)


# ---------------------------------------------------------------------------
# Error report against search output


@dataclass
class WhiteboxGraphReport:
    graph_id: str
    embedded: tuple[int, int]
    optimal_point: tuple[int, int]
    optimal_distance: int
    search_distance: int | None
    distance_to_optimal: int | None  # d(optimal graph, search counterfactual)
    excess: int | None  # d(E, E_c) - d(E, E*_c), >= 0 on success


@dataclass
class WhiteboxReport:
    mean_paper_metric: float | None  # mean d(E*_c, E_c)
    mean_excess: float | None
    per_graph: list[WhiteboxGraphReport]

    def to_json_dict(self) -> dict:
        return {
            "mean_paper_metric": self.mean_paper_metric,
            "mean_excess": self.mean_excess,
            "per_graph": [
                {
                    "graph_id": g.graph_id,
                    "x": g.embedded[0],
                    "y": g.embedded[1],
                    "optimal_x": g.optimal_point[0],
                    "optimal_y": g.optimal_point[1],
                    "optimal_distance": g.optimal_distance,
                    "search_distance": g.search_distance,
                    "distance_to_optimal": g.distance_to_optimal,
                    "excess": g.excess,
                }
                for g in self.per_graph
            ],
        }


def whitebox_error(
    results: Sequence[CounterfactualResult],
    originals: Sequence[Graph],
    wb: LinearContrastClassifier,
) -> WhiteboxReport:
    """Score search results against the geometric optimum.

    Reports the mean edit distance between the realized optimal
    counterfactual and the found one, and the mean excess
    d(E, E_c) - d(E, E*_c) (non-negative whenever the search succeeded,
    since the realized optimum is minimal).
    """
    per_graph: list[WhiteboxGraphReport] = []
    paper_vals: list[float] = []
    excess_vals: list[float] = []
    for res, original in zip(results, originals):
        optimum = realize_optimal_graph(original, wb)
        if res.status == "ok" and res.counterfactual is not None:
            d_to_opt = edit_distance(optimum.graph, res.counterfactual)
            excess = res.distance - optimum.edit_cost
            paper_vals.append(float(d_to_opt))
            excess_vals.append(float(excess))
        else:
            d_to_opt = None
            excess = None
        per_graph.append(
            WhiteboxGraphReport(
                res.graph_id,
                wb.embed(original),
                optimum.target_point,
                optimum.edit_cost,
                res.distance,
                d_to_opt,
                excess,
            )
        )
    return WhiteboxReport(
        float(np.mean(paper_vals)) if paper_vals else None,
        float(np.mean(excess_vals)) if excess_vals else None,
        per_graph,
    )


def embedding_table(
    graphs: Sequence[tuple[str, Graph]], wb: LinearContrastClassifier
) -> list[dict]:
    """Scatter-plot data: one row per graph with its embedding and label."""
    rows = []
    for graph_id, graph in graphs:
        x, y = wb.embed(graph)
        rows.append({"graph_id": graph_id, "x": x, "y": y, "label": wb.classify_point(x, y)})
    return rows
