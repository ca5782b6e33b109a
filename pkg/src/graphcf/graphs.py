"""Node-identity-aware graphs over a fixed vertex universe.

Every graph in an analysis shares one :class:`VertexUniverse`; vertex ``i``
means the same thing in all of them. A graph is therefore nothing more than
a set of unordered vertex pairs drawn from the ``n*(n-1)/2`` possible ones,
and all the set algebra the search engine runs on (symmetric differences,
edit distances, batch toggles) reduces to vectorized boolean operations on
fixed-length membership arrays.

Pair slot convention
--------------------
The unordered pair ``(u, v)`` with ``u < v`` lives at linear index

    ``u*n - u*(u+1)//2 + (v - u - 1)``

which is plain row-major order over the strict upper triangle (the same
order ``numpy.triu_indices(n, k=1)`` walks). File formats and the wire
protocol spell edges out as explicit ``[u, v]`` pairs with ``u < v``, but
any tooling that wants a flat per-pair layout should use this index.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

Edge = tuple[int, int]


class GraphError(ValueError):
    """Invalid graph construction or use."""


class UniverseMismatchError(GraphError):
    """Values from different vertex universes were combined."""


@dataclass(frozen=True, eq=False)
class VertexUniverse:
    """The shared vertex set: ``n`` uniquely labeled vertices, indices 0..n-1.

    ``region_of`` optionally maps vertex indices to coarse region names for
    region-level aggregation; it annotates the universe and does not
    participate in compatibility checks (it cannot affect edge identity).
    """

    vertex_labels: tuple[str, ...]
    region_of: dict[int, str] | None = None

    def __post_init__(self):
        labels = tuple(str(x) for x in self.vertex_labels)
        object.__setattr__(self, "vertex_labels", labels)
        if len(labels) < 2:
            raise GraphError("a vertex universe needs at least 2 vertices")
        if len(set(labels)) != len(labels):
            raise GraphError("vertex labels must be unique")
        if self.region_of is not None:
            bad = [i for i in self.region_of if not (0 <= int(i) < len(labels))]
            if bad:
                raise GraphError(f"region map names invalid vertex indices: {bad}")
            object.__setattr__(
                self, "region_of", {int(i): str(r) for i, r in self.region_of.items()}
            )

    @classmethod
    def anonymous(cls, n: int, region_of: dict[int, str] | None = None) -> "VertexUniverse":
        """Universe with placeholder labels v000..v{n-1}."""
        return cls(tuple(f"v{i:03d}" for i in range(n)), region_of)

    @property
    def n(self) -> int:
        return len(self.vertex_labels)

    @property
    def n_pairs(self) -> int:
        """Number of unordered vertex pairs, i.e. the slot count."""
        n = self.n
        return n * (n - 1) // 2

    def is_compatible(self, other: "VertexUniverse") -> bool:
        return self is other or self.vertex_labels == other.vertex_labels

    def require_compatible(self, other: "VertexUniverse") -> None:
        if not self.is_compatible(other):
            raise UniverseMismatchError(
                f"universe mismatch: {self.n} vertices {self.vertex_labels[:3]}... "
                f"vs {other.n} vertices {other.vertex_labels[:3]}..."
            )

    def with_regions(self, region_of: dict[int, str]) -> "VertexUniverse":
        """Same vertices, new region annotation."""
        return VertexUniverse(self.vertex_labels, region_of)

    def __repr__(self):
        return f"VertexUniverse(n={self.n})"


def pair_index(n: int, u: int, v: int) -> int:
    """Linear slot of the unordered pair (u, v) in an n-vertex universe."""
    if u == v:
        raise GraphError(f"self-loop ({u}, {v}) has no pair slot")
    if u > v:
        u, v = v, u
    if u < 0 or v >= n:
        raise GraphError(f"pair ({u}, {v}) out of range for n={n}")
    return u * n - u * (u + 1) // 2 + (v - u - 1)


@functools.lru_cache(maxsize=64)
def _row_offsets(n: int) -> np.ndarray:
    u = np.arange(n - 1, dtype=np.int64)
    return u * n - u * (u + 1) // 2


@functools.lru_cache(maxsize=64)
def all_pairs(n: int) -> np.ndarray:
    """(n_pairs, 2) array of all unordered pairs in slot order; read-only."""
    rows, cols = np.triu_indices(n, k=1)
    pairs = np.column_stack([rows, cols]).astype(np.int64)
    pairs.setflags(write=False)
    return pairs


def pair_from_index(n: int, idx: int) -> Edge:
    """Inverse of :func:`pair_index`."""
    n_pairs = n * (n - 1) // 2
    if not 0 <= idx < n_pairs:
        raise GraphError(f"pair slot {idx} out of range for n={n}")
    offsets = _row_offsets(n)
    u = int(np.searchsorted(offsets, idx, side="right")) - 1
    v = int(idx - offsets[u]) + u + 1
    return (u, v)


def _edges_to_mask(universe: VertexUniverse, edges) -> np.ndarray:
    n = universe.n
    mask = np.zeros(universe.n_pairs, dtype=bool)
    if isinstance(edges, EdgeSet):
        universe.require_compatible(edges.universe)
        return edges.mask.copy()
    seq = list(edges)
    if not seq:
        return mask
    arr = np.asarray(seq, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError("edges must be (u, v) pairs")
    u = arr.min(axis=1)
    v = arr.max(axis=1)
    loops = u == v
    if loops.any():
        w = int(u[loops][0])
        raise GraphError(f"self-loop ({w}, {w}) is not allowed")
    if (u < 0).any() or (v >= n).any():
        bad = arr[(u < 0) | (v >= n)][0]
        raise GraphError(f"edge {bad.tolist()} out of range for n={n}")
    mask[u * n - u * (u + 1) // 2 + (v - u - 1)] = True
    return mask


class EdgeSet:
    """Immutable set of unordered vertex pairs over a universe.

    Construction canonicalizes pair order (both ``(u, v)`` and ``(v, u)``
    denote the same edge), deduplicates, and rejects self-loops and
    out-of-range endpoints. Values never mutate after construction, so they
    are safe to share across concurrent search runs.
    """

    __slots__ = ("universe", "_mask")

    def __init__(self, universe: VertexUniverse, edges: Iterable[Edge] | "EdgeSet" = ()):
        self.universe = universe
        mask = _edges_to_mask(universe, edges)
        mask.setflags(write=False)
        self._mask = mask

    @classmethod
    def from_mask(cls, universe: VertexUniverse, mask: np.ndarray, *, copy: bool = True):
        """Build from a per-slot membership array (internal fast path).

        With ``copy=False`` the array is taken over and frozen in place, so
        only pass a temporary you will not touch again.
        """
        if mask.shape != (universe.n_pairs,):
            raise GraphError(
                f"mask length {mask.shape} does not match {universe.n_pairs} pair slots"
            )
        obj = object.__new__(cls)
        obj.universe = universe
        m = np.array(mask, dtype=bool) if copy else np.asarray(mask, dtype=bool)
        m.setflags(write=False)
        obj._mask = m
        return obj

    @property
    def mask(self) -> np.ndarray:
        """Read-only per-slot membership array."""
        return self._mask

    def edges(self) -> list[Edge]:
        """Sorted list of (u, v) pairs with u < v."""
        pairs = all_pairs(self.universe.n)[self._mask]
        return [(int(a), int(b)) for a, b in pairs]

    def key(self) -> bytes:
        """Canonical byte encoding, usable as a cache key."""
        return self._mask.tobytes()

    def __len__(self) -> int:
        return int(np.count_nonzero(self._mask))

    def __bool__(self) -> bool:
        return bool(self._mask.any())

    def __contains__(self, edge: Edge) -> bool:
        u, v = edge
        if u == v:
            return False
        return bool(self._mask[pair_index(self.universe.n, u, v)])

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges())

    def __eq__(self, other) -> bool:
        if not isinstance(other, EdgeSet):
            return NotImplemented
        return self.universe.is_compatible(other.universe) and bool(
            np.array_equal(self._mask, other._mask)
        )

    def __hash__(self):
        return hash((self.universe.vertex_labels, self._mask.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}(n={self.universe.n}, edges={len(self)})"


class Graph(EdgeSet):
    """A graph over the universe, identified entirely by its edge set."""


def symmetric_difference(a: EdgeSet, b: EdgeSet) -> EdgeSet:
    """Edges present in exactly one of the two sets; commutative."""
    a.universe.require_compatible(b.universe)
    return EdgeSet.from_mask(a.universe, a.mask ^ b.mask, copy=False)


def edit_distance(a: EdgeSet, b: EdgeSet) -> int:
    """Size of the symmetric difference: additions plus removals from a to b.

    A metric on graphs over one universe (non-negative, zero iff equal,
    symmetric, triangle inequality).
    """
    a.universe.require_compatible(b.universe)
    return int(np.count_nonzero(a.mask ^ b.mask))


def toggle_edges(g: Graph, s: EdgeSet) -> Graph:
    """Flip membership in ``g`` of every edge in ``s``; an involution."""
    g.universe.require_compatible(s.universe)
    return Graph.from_mask(g.universe, g.mask ^ s.mask, copy=False)
