"""Attributed simple undirected graphs and datasets of them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError


def _as_features(values, rows: int, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1 and rows == 0 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2 or arr.shape[0] != rows:
        raise ValidationError(f"{what} must be a 2-d array with {rows} rows, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"non-finite value in {what}")
    # -0.0 and 0.0 must hash to the same colour
    return np.ascontiguousarray(arr + 0.0)


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph with one real feature vector per node.

    ``x`` has shape ``(n, F)``; ``edges`` is an ``(E, 2)`` integer array stored
    canonically (``u < v``, rows sorted); ``edge_attr`` is ``None`` or
    ``(E, Fe)`` aligned with ``edges``.  Instances are immutable.
    """

    x: np.ndarray
    edges: np.ndarray
    edge_attr: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim == 1 and x.size == 0:
            x = x.reshape(0, 0)
        if x.ndim != 2:
            raise ValidationError(f"node features must be 2-d, got shape {x.shape}")
        n = x.shape[0]
        x = _as_features(x, n, "node features")

        e = np.asarray(self.edges, dtype=np.int64)
        if e.size == 0:
            e = e.reshape(0, 2)
        if e.ndim != 2 or e.shape[1] != 2:
            raise ValidationError(f"edges must have shape (E, 2), got {e.shape}")
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValidationError("node index out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValidationError("self-loop")
        e = np.sort(e, axis=1)

        ea = self.edge_attr
        if ea is not None:
            ea = _as_features(ea, e.shape[0], "edge features")

        order = np.lexsort((e[:, 1], e[:, 0]))
        e = e[order]
        if ea is not None:
            ea = ea[order]
        if e.shape[0] > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise ValidationError("duplicate edge")

        for arr in (x, e, ea):
            if arr is not None:
                arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "edge_attr", ea)

    @classmethod
    def from_edges(cls, n: int, edges, x=None, edge_attr=None) -> "Graph":
        """Build a graph; node features default to the constant vector ``[1.0]``."""
        if x is None:
            x = np.ones((n, 1))
        return cls(np.asarray(x, dtype=np.float64).reshape(n, -1), np.asarray(edges, dtype=np.int64).reshape(-1, 2), edge_attr)

    @property
    def node_count(self) -> int:
        return self.x.shape[0]

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.x.shape[1]

    @property
    def edge_dim(self) -> Optional[int]:
        return None if self.edge_attr is None else self.edge_attr.shape[1]

    @cached_property
    def csr(self):
        """``(indptr, indices, edge_ids)`` with neighbours of each node in increasing order."""
        n = self.node_count
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        eid = np.concatenate([np.arange(self.edge_count)] * 2)
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)
        return indptr, dst[order].astype(np.int64), eid[order].astype(np.int64)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.csr[0])

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices, _ = self.csr
        return indices[indptr[v]:indptr[v + 1]]

    def adjacency(self, dtype=np.int64) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count), dtype=dtype)
        a[self.edges[:, 0], self.edges[:, 1]] = 1
        a[self.edges[:, 1], self.edges[:, 0]] = 1
        return a

    def with_features(self, x) -> "Graph":
        return Graph(x, self.edges, self.edge_attr)

    def relabel(self, perm) -> "Graph":
        """Graph with node ``v`` renamed to ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        x = np.empty_like(self.x)
        x[perm] = self.x
        return Graph(x, perm[self.edges], self.edge_attr)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if (self.edge_attr is None) != (other.edge_attr is None):
            return False
        same = (
            self.x.shape == other.x.shape
            and self.edges.shape == other.edges.shape
            and self.x.tobytes() == other.x.tobytes()
            and np.array_equal(self.edges, other.edges)
        )
        if same and self.edge_attr is not None:
            same = self.edge_attr.shape == other.edge_attr.shape and self.edge_attr.tobytes() == other.edge_attr.tobytes()
        return same

    __hash__ = None

    def __repr__(self):
        return f"Graph(n={self.node_count}, m={self.edge_count}, F={self.feature_dim}, Fe={self.edge_dim})"


@dataclass(frozen=True)
class GraphDataset:
    graphs: tuple
    labels: Optional[tuple] = None
    num_classes: Optional[int] = None

    def __post_init__(self):
        graphs = tuple(self.graphs)
        object.__setattr__(self, "graphs", graphs)
        labels = self.labels
        if labels is not None:
            labels = tuple(int(y) for y in labels)
            if len(labels) != len(graphs):
                raise ValidationError(f"{len(labels)} labels for {len(graphs)} graphs")
            if any(y < 0 for y in labels):
                raise ValidationError("negative label")
            k = self.num_classes
            if k is None:
                k = max(labels) + 1 if labels else 0
            elif any(y >= k for y in labels):
                raise ValidationError(f"label out of range for {k} classes")
            object.__setattr__(self, "num_classes", int(k))
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.graphs)

    def __getitem__(self, i):
        return self.graphs[i]

    def subset(self, indices: Sequence[int]) -> "GraphDataset":
        graphs = [self.graphs[i] for i in indices]
        labels = None if self.labels is None else [self.labels[i] for i in indices]
        return GraphDataset(graphs, labels, self.num_classes if labels is not None else None)

    def with_labels(self, labels, num_classes=None) -> "GraphDataset":
        return GraphDataset(self.graphs, labels, num_classes)


@dataclass(frozen=True)
class GraphStats:
    max_degree: int
    feature_bound: float
    node_count: int
    edge_count: int


def graph_stats(g: Graph) -> GraphStats:
    d = int(g.degrees.max()) if g.node_count else 0
    b = float(np.sqrt((g.x * g.x).sum(axis=1)).max()) if g.node_count else 0.0
    return GraphStats(d, b, g.node_count, g.edge_count)


def dataset_stats(graphs: Sequence[Graph]) -> GraphStats:
    """Maxima of :func:`graph_stats` over a collection (counts are totals)."""
    stats = [graph_stats(g) for g in graphs]
    return GraphStats(
        max((s.max_degree for s in stats), default=0),
        max((s.feature_bound for s in stats), default=0.0),
        sum(s.node_count for s in stats),
        sum(s.edge_count for s in stats),
    )


# small named graphs, all with unit scalar features unless told otherwise

def path_graph(n: int, x=None) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], x)


def cycle_graph(n: int, x=None) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], x)


def complete_graph(n: int, x=None) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], x)


def star_graph(leaves: int, x=None) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)], x)


def empty_graph(n: int, x=None) -> Graph:
    return Graph.from_edges(n, np.zeros((0, 2), dtype=np.int64), x)


def disjoint_union(*graphs: Graph) -> Graph:
    xs, es, eas = [], [], []
    offset = 0
    for g in graphs:
        xs.append(g.x)
        es.append(g.edges + offset)
        eas.append(g.edge_attr)
        offset += g.node_count
    has_ea = [ea is not None for ea in eas]
    if any(has_ea) and not all(has_ea):
        raise ValidationError("cannot union graphs with and without edge features")
    ea = np.concatenate(eas) if all(has_ea) and eas else None
    return Graph(np.concatenate(xs), np.concatenate(es), ea)
