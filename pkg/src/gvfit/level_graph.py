"""Domain graphs, level scales, guiding sets and fields.

Everything here is immutable after construction. Vertex ids are the
integers ``0 .. vertex_count - 1``; grid graphs number their cells in
row-major order (``id = row * width + col``).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GraphError",
    "DisconnectedGraphError",
    "GuidingError",
    "LevelScale",
    "DomainGraph",
    "GuidingSet",
    "ScalarField",
    "build_grid",
    "component_count",
    "multi_source_distances",
    "is_gradually_varied",
]

GRAPH_KINDS = ("grid", "mesh-vertex", "mesh-cell", "generic")


class GraphError(ValueError):
    pass


class DisconnectedGraphError(GraphError):
    def __init__(self, components: int):
        super().__init__(f"graph is disconnected ({components} components)")
        self.components = components


class GuidingError(ValueError):
    pass


@dataclass(frozen=True)
class LevelScale:
    """Uniform chain of admissible values ``A_1 < A_2 < ... < A_n``."""

    origin: float
    delta: float
    count: int

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be a positive finite real, got {self.delta!r}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count!r}")

    @classmethod
    def integers(cls, n: int) -> "LevelScale":
        return cls(1.0, 1.0, n)

    def value(self, k):
        """Real value of level ``k`` (1-based). Accepts scalars or arrays."""
        if np.ndim(k):
            return self.origin + (np.asarray(k, dtype=float) - 1.0) * self.delta
        return self.origin + (k - 1) * self.delta

    def index(self, v):
        """Inverse of :meth:`value` for values lying on the chain."""
        k = np.rint((np.asarray(v, dtype=float) - self.origin) / self.delta).astype(int) + 1
        return k if np.ndim(v) else int(k)

    def nearest_index(self, v):
        """Nearest level, ties toward the lower index, clamped to ``1..count``."""
        t = (np.asarray(v, dtype=float) - self.origin) / self.delta
        k = np.clip(np.ceil(t - 0.5).astype(int) + 1, 1, self.count)
        return k if np.ndim(v) else int(k)


def _components(adjacency: Sequence[Sequence[int]]) -> int:
    n = len(adjacency)
    seen = bytearray(n)
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        seen[start] = 1
        stack = [start]
        while stack:
            a = stack.pop()
            for b in adjacency[a]:
                if not seen[b]:
                    seen[b] = 1
                    stack.append(b)
    return count


@dataclass(frozen=True, eq=False)
class DomainGraph:
    """Finite, undirected, connected graph.

    ``adjacency[a]`` is the sorted tuple of neighbours of ``a``. ``shape`` is
    ``(width, height)`` for grid graphs and ``None`` otherwise.
    """

    adjacency: tuple[tuple[int, ...], ...]
    kind: str = "generic"
    shape: tuple[int, int] | None = None

    def __post_init__(self):
        n = len(self.adjacency)
        if n == 0:
            raise GraphError("graph must have at least one vertex")
        if self.kind not in GRAPH_KINDS:
            raise GraphError(f"unknown graph kind {self.kind!r}")
        if (self.kind == "grid") != (self.shape is not None):
            raise GraphError("shape is required for, and only for, grid graphs")
        for a, nbrs in enumerate(self.adjacency):
            for b in nbrs:
                if not 0 <= b < n:
                    raise GraphError(f"neighbour {b} of vertex {a} out of range")
                if b == a:
                    raise GraphError(f"self-loop at vertex {a}")
        adj_sets = [set(nb) for nb in self.adjacency]
        for a, nbrs in enumerate(adj_sets):
            for b in nbrs:
                if a not in adj_sets[b]:
                    raise GraphError(f"adjacency not symmetric: {a}->{b}")
        ncomp = _components(self.adjacency)
        if ncomp != 1:
            raise DisconnectedGraphError(ncomp)

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple[int, int]],
                   kind: str = "generic", shape=None) -> "DomainGraph":
        nbrs: list[set[int]] = [set() for _ in range(vertex_count)]
        for a, b in edges:
            a, b = int(a), int(b)
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise GraphError(f"edge ({a}, {b}) out of range")
            if a == b:
                raise GraphError(f"self-loop at vertex {a}")
            nbrs[a].add(b)
            nbrs[b].add(a)
        return cls(tuple(tuple(sorted(s)) for s in nbrs), kind, shape)

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    @cached_property
    def edges(self) -> np.ndarray:
        """``(E, 2)`` int array of edges with ``a < b``, lexicographically sorted."""
        pairs = [(a, b) for a, nb in enumerate(self.adjacency) for b in nb if a < b]
        return np.array(pairs, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.adjacency], dtype=np.int64)

    def __repr__(self):
        return f"DomainGraph(kind={self.kind!r}, vertices={self.vertex_count}, edges={len(self.edges)})"


def component_count(vertex_count: int, edges: Iterable[tuple[int, int]]) -> int:
    """Number of connected components; a diagnostic for inputs the
    :class:`DomainGraph` constructor would reject."""
    nbrs: list[list[int]] = [[] for _ in range(vertex_count)]
    for a, b in edges:
        nbrs[a].append(b)
        nbrs[b].append(a)
    return _components(nbrs)


def build_grid(width: int, height: int) -> DomainGraph:
    """4-neighbour grid graph; graph distance is the Manhattan metric."""
    if width < 1 or height < 1:
        raise GraphError(f"grid dimensions must be positive, got {width}x{height}")
    adj = []
    for r in range(height):
        for c in range(width):
            v = r * width + c
            nb = []
            if r > 0:
                nb.append(v - width)
            if c > 0:
                nb.append(v - 1)
            if c < width - 1:
                nb.append(v + 1)
            if r < height - 1:
                nb.append(v + width)
            adj.append(tuple(nb))
    return DomainGraph(tuple(adj), "grid", (width, height))


def multi_source_distances(g: DomainGraph, sources: Iterable[int]) -> np.ndarray:
    """Hop distance from every vertex to its nearest source (breadth-first)."""
    srcs = sorted(set(int(s) for s in sources))
    if not srcs:
        raise GraphError("source set is empty")
    n = g.vertex_count
    for s in srcs:
        if not 0 <= s < n:
            raise GraphError(f"source {s} not in graph")
    dist = np.full(n, -1, dtype=np.int64)
    dist[srcs] = 0
    queue = deque(srcs)
    adj = g.adjacency
    while queue:
        a = queue.popleft()
        da = dist[a] + 1
        for b in adj[a]:
            if dist[b] < 0:
                dist[b] = da
                queue.append(b)
    return dist


@dataclass(frozen=True)
class GuidingSet:
    """Sample subset ``J`` with observed values.

    ``entries`` holds ``(vertex, value)`` pairs with distinct vertices, in
    the order given. Values are level indices (integer mode) or reals.
    """

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not self.entries:
            raise GuidingError("guiding set is empty")
        seen = set()
        for v, _ in self.entries:
            if v in seen:
                raise GuidingError(f"vertex {v} appears more than once")
            seen.add(v)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "GuidingSet":
        """Build from raw pairs, merging exact duplicates.

        Raises :class:`GuidingError` if one vertex carries two different values.
        """
        merged: dict[int, float] = {}
        for v, x in pairs:
            v = int(v)
            if v in merged and merged[v] != x:
                raise GuidingError(f"conflicting values {merged[v]!r} and {x!r} on vertex {v}")
            merged.setdefault(v, x)
        return cls(tuple(merged.items()))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "GuidingSet":
        return cls(tuple((int(v), x) for v, x in mapping.items()))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def vertices(self) -> np.ndarray:
        return np.array([v for v, _ in self.entries], dtype=np.int64)

    @property
    def values(self) -> np.ndarray:
        return np.array([x for _, x in self.entries], dtype=float)

    def validate(self, g: DomainGraph) -> None:
        n = g.vertex_count
        for v, x in self.entries:
            if not 0 <= v < n:
                raise GuidingError(f"guiding vertex {v} outside graph of {n} vertices")
            if not math.isfinite(x):
                raise GuidingError(f"non-finite guiding value {x!r} at vertex {v}")


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One value per vertex. Integer fields carry level indices in ``1..scale.count``."""

    values: np.ndarray
    scale: LevelScale | None = None
    integer: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.int64 if self.integer else float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.integer:
            if self.scale is None:
                raise ValueError("integer fields need a level scale")
            if vals.size and (vals.min() < 1 or vals.max() > self.scale.count):
                raise ValueError(f"level index outside 1..{self.scale.count}")

    def __len__(self):
        return len(self.values)

    def real_values(self) -> np.ndarray:
        """Values mapped onto the reals (level indices go through the scale)."""
        if self.integer:
            return self.scale.value(self.values)
        return np.asarray(self.values, dtype=float)

    def as_grid(self, g: DomainGraph) -> np.ndarray:
        """``(height, width)`` view of a field on a grid graph."""
        if g.shape is None:
            raise GraphError("not a grid graph")
        w, h = g.shape
        return self.values.reshape(h, w)


def is_gradually_varied(g: DomainGraph, f: ScalarField | Sequence[int]):
    """Check that every edge joins equal or index-adjacent levels.

    Returns ``(True, None)`` or ``(False, (a, b))`` with the first violating
    edge in lexicographic order.
    """
    vals = np.asarray(f.values if isinstance(f, ScalarField) else f, dtype=np.int64)
    if len(vals) != g.vertex_count:
        raise ValueError("field length does not match graph")
    e = g.edges
    if len(e) == 0:
        return True, None
    bad = np.flatnonzero(np.abs(vals[e[:, 0]] - vals[e[:, 1]]) > 1)
    if len(bad) == 0:
        return True, None
    a, b = e[bad[0]]
    return False, (int(a), int(b))
