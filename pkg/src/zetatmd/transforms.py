"""Graph transformations whose 1-WL refinement simulates a stronger colouring.

* ``f_augment``: append per-node cycle counts (closed walks, simple cycles,
  or fundamental-basis cycles) to the node features.
* ``k_tuple``: the product graph on ``V^k`` whose nodes carry the atomic type
  of the tuple and whose edges join tuples differing in one position, with
  the position one-hot encoded as an edge feature.

``zeta_tmd`` is TMD evaluated on the transformed pair.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._accel import njit
from .errors import ContractError, ResourceError, ValidationError
from .graph import Graph

COUNT_MODES = ("homomorphism", "subgraph", "cycle-basis")
_MODE_ALIASES = {"hom": "homomorphism", "sub": "subgraph", "basis": "cycle-basis"}
_MODE_SHORT = {v: k for k, v in _MODE_ALIASES.items()}

DEFAULT_NODE_BUDGET = 20_000


@dataclass(frozen=True)
class PatternFamilySpec:
    """Cycles of lengths ``3..max_cycle_length`` counted in ``mode``."""

    mode: str = "subgraph"
    max_cycle_length: int = 3

    def __post_init__(self):
        mode = _MODE_ALIASES.get(self.mode, self.mode)
        if mode not in COUNT_MODES:
            raise ContractError(f"unknown count mode {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        if int(self.max_cycle_length) < 3:
            raise ContractError("max_cycle_length must be >= 3")
        object.__setattr__(self, "max_cycle_length", int(self.max_cycle_length))

    @property
    def lengths(self) -> range:
        return range(3, self.max_cycle_length + 1)


@dataclass(frozen=True)
class ZetaSpec:
    variant: str = "identity"
    pattern: Optional[PatternFamilySpec] = None
    k: int = 2
    locality: str = "global"
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if self.variant not in ("identity", "f_augment", "k_tuple"):
            raise ContractError(f"unknown zeta variant {self.variant!r}")
        if self.variant == "f_augment" and self.pattern is None:
            raise ContractError("f_augment needs a pattern family")
        if self.variant == "k_tuple":
            if self.k < 2:
                raise ContractError("k must be >= 2")
            if self.locality not in ("global", "local"):
                raise ContractError(f"locality must be global or local, got {self.locality!r}")

    @classmethod
    def identity(cls) -> "ZetaSpec":
        return cls()

    @classmethod
    def f_augment(cls, mode: str = "subgraph", max_cycle_length: int = 3) -> "ZetaSpec":
        return cls("f_augment", PatternFamilySpec(mode, max_cycle_length))

    @classmethod
    def k_tuple(cls, k: int = 2, locality: str = "global", node_budget: int = DEFAULT_NODE_BUDGET) -> "ZetaSpec":
        return cls("k_tuple", k=k, locality=locality, node_budget=node_budget)

    @classmethod
    def parse(cls, text: str) -> "ZetaSpec":
        """``identity`` | ``f-aug:mode=<hom|sub|basis>,lmax=<L>`` | ``k-tuple:k=<k>,locality=<global|local>``."""
        name, _, rest = text.strip().partition(":")
        opts = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValidationError(f"bad zeta option {item!r} in {text!r}")
            opts[key.strip()] = val.strip()
        try:
            if name == "identity" and not opts:
                return cls.identity()
            if name == "f-aug" and set(opts) <= {"mode", "lmax"}:
                return cls.f_augment(opts.get("mode", "sub"), int(opts.get("lmax", 3)))
            if name == "k-tuple" and set(opts) <= {"k", "locality"}:
                return cls.k_tuple(int(opts.get("k", 2)), opts.get("locality", "global"))
        except ValueError as exc:
            raise ValidationError(f"bad zeta spec {text!r}: {exc}") from None
        raise ValidationError(
            f"bad zeta spec {text!r}; expected identity, f-aug:mode=<hom|sub|basis>,lmax=<L> "
            "or k-tuple:k=<k>,locality=<global|local>"
        )

    def __str__(self):
        if self.variant == "identity":
            return "identity"
        if self.variant == "f_augment":
            return f"f-aug:mode={_MODE_SHORT[self.pattern.mode]},lmax={self.pattern.max_cycle_length}"
        return f"k-tuple:k={self.k},locality={self.locality}"


# cycle counting ----------------------------------------------------------------

@njit(cache=True)
def _simple_cycle_counts(indptr, indices, n, max_len):
    # each cycle is found once: anchored at its smallest vertex, walked in the
    # direction whose second vertex is smaller than its last
    out = np.zeros((n, max_len - 2), dtype=np.int64)
    path = np.empty(max_len, dtype=np.int64)
    pos = np.empty(max_len, dtype=np.int64)
    on_path = np.zeros(n, dtype=np.bool_)
    for s in range(n):
        path[0] = s
        pos[0] = indptr[s]
        on_path[s] = True
        depth = 0
        while depth >= 0:
            v = path[depth]
            if pos[depth] < indptr[v + 1]:
                u = indices[pos[depth]]
                pos[depth] += 1
                if u == s:
                    if depth >= 2 and path[1] < path[depth]:
                        for i in range(depth + 1):
                            out[path[i], depth - 2] += 1
                elif u > s and not on_path[u] and depth + 1 < max_len:
                    depth += 1
                    path[depth] = u
                    pos[depth] = indptr[u]
                    on_path[u] = True
            else:
                on_path[v] = False
                depth -= 1
    return out


def _closed_walk_counts(g: Graph, max_len: int) -> np.ndarray:
    n = g.node_count
    dmax = int(g.degrees.max()) if n else 0
    # switch to exact Python integers when int64 could overflow
    exact = dmax > 1 and max_len * np.log2(dmax) > 62
    a = g.adjacency(object if exact else np.int64)
    out = np.zeros((n, max_len - 2), dtype=object if exact else np.int64)
    power = a.dot(a)
    for length in range(3, max_len + 1):
        power = power.dot(a)
        out[:, length - 3] = np.diagonal(power)
    return out


def fundamental_cycles(g: Graph) -> list[list[int]]:
    """Fundamental cycle basis of a BFS spanning forest.

    Each component is rooted at its lowest-index node and neighbours are
    visited in increasing index order; every non-tree edge closes one cycle
    through the tree.  Cycles are returned as vertex lists.
    """
    n = g.node_count
    parent = np.full(n, -1, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    tree_edges = set()
    for root in range(n):
        if depth[root] >= 0:
            continue
        depth[root] = 0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for u in g.neighbors(v).tolist():
                if depth[u] < 0:
                    depth[u] = depth[v] + 1
                    parent[u] = v
                    tree_edges.add((min(u, v), max(u, v)))
                    queue.append(u)
    cycles = []
    for u, v in g.edges.tolist():
        if (u, v) in tree_edges:
            continue
        left, right = [u], [v]
        a, b = u, v
        while depth[a] > depth[b]:
            a = int(parent[a])
            left.append(a)
        while depth[b] > depth[a]:
            b = int(parent[b])
            right.append(b)
        while a != b:
            a = int(parent[a])
            b = int(parent[b])
            left.append(a)
            right.append(b)
        cycles.append(left + right[-2::-1])
    return cycles


def _basis_cycle_counts(g: Graph, max_len: int) -> np.ndarray:
    out = np.zeros((g.node_count, max_len - 2), dtype=np.int64)
    for cyc in fundamental_cycles(g):
        if 3 <= len(cyc) <= max_len:
            out[cyc, len(cyc) - 3] += 1
    return out


def cycle_node_counts(g: Graph, spec: PatternFamilySpec) -> np.ndarray:
    """Per-node cycle counts, one column per length ``3..L``."""
    L = spec.max_cycle_length
    if spec.mode == "homomorphism":
        return _closed_walk_counts(g, L)
    if spec.mode == "subgraph":
        indptr, indices, _ = g.csr
        return _simple_cycle_counts(indptr, indices, g.node_count, L)
    return _basis_cycle_counts(g, L)


def graph_cycle_counts(g: Graph, spec: PatternFamilySpec) -> np.ndarray:
    """Whole-graph counts per length (subgraph: cycles; homomorphism: closed walks; basis: basis cycles)."""
    L = spec.max_cycle_length
    if spec.mode == "homomorphism":
        return np.array([sum(col) for col in _closed_walk_counts(g, L).T], dtype=object)
    if spec.mode == "subgraph":
        per_node = cycle_node_counts(g, spec)
        return per_node.sum(axis=0) // np.arange(3, L + 1)
    counts = np.zeros(L - 2, dtype=np.int64)
    for cyc in fundamental_cycles(g):
        if 3 <= len(cyc) <= L:
            counts[len(cyc) - 3] += 1
    return counts


def augment(g: Graph, spec: PatternFamilySpec) -> Graph:
    counts = np.asarray(cycle_node_counts(g, spec), dtype=np.float64).reshape(g.node_count, spec.max_cycle_length - 2)
    return g.with_features(np.hstack([g.x, counts]))


# k-tuple product graph -----------------------------------------------------------

def k_tuple_graph(g: Graph, k: int, locality: str = "global", node_budget: int = DEFAULT_NODE_BUDGET) -> Graph:
    """Product graph on ``V^k`` in lexicographic order.

    Node feature: ``k*k`` equality flags, ``k*k`` adjacency flags among the
    tuple entries, then the ``k`` original feature vectors concatenated.
    Tuples differing in exactly one position ``j`` are joined; the edge
    feature is the one-hot of ``j``.  ``locality="global"`` keeps every such
    edge and appends a flag telling whether the two differing vertices are
    adjacent in ``g``; ``"local"`` keeps only the adjacent ones.
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    if locality not in ("global", "local"):
        raise ContractError(f"locality must be global or local, got {locality!r}")
    n = g.node_count
    size = n ** k
    if size > node_budget:
        raise ResourceError(f"k-tuple graph would have n^k = {n}^{k} = {size} nodes (budget {node_budget})")
    adj = g.adjacency(np.int64).astype(bool)
    tuples = np.indices((n,) * k).reshape(k, -1).T if n else np.zeros((0, k), dtype=np.int64)

    eq = (tuples[:, :, None] == tuples[:, None, :]).reshape(size, k * k)
    ad = adj[tuples[:, :, None], tuples[:, None, :]].reshape(size, k * k)
    feats = g.x[tuples].reshape(size, k * g.feature_dim)
    x = np.hstack([eq.astype(np.float64), ad.astype(np.float64), feats])

    srcs, dsts, attrs = [], [], []
    idx = np.arange(size, dtype=np.int64)
    for j in range(k):
        stride = n ** (k - 1 - j)
        col = tuples[:, j]
        for w in range(1, n):
            mask = col < w
            src = idx[mask]
            old = col[mask]
            linked = adj[old, w]
            if locality == "local":
                src, old, linked = src[linked], old[linked], linked[linked]
            srcs.append(src)
            dsts.append(src + (w - old) * stride)
            onehot = np.zeros((src.shape[0], k + (locality == "global")))
            onehot[:, j] = 1.0
            if locality == "global":
                onehot[:, k] = linked
            attrs.append(onehot)
    width = k + (locality == "global")
    edges = np.stack([np.concatenate(srcs), np.concatenate(dsts)], axis=1) if srcs else np.zeros((0, 2), np.int64)
    edge_attr = np.concatenate(attrs) if attrs else np.zeros((0, width))
    return Graph(x, edges, edge_attr)


def simulate(g: Graph, zeta: ZetaSpec) -> Graph:
    if zeta is None or zeta.variant == "identity":
        return g
    if zeta.variant == "f_augment":
        return augment(g, zeta.pattern)
    return k_tuple_graph(g, zeta.k, zeta.locality, zeta.node_budget)


def zeta_tmd(g: Graph, h: Graph, zeta: ZetaSpec, depth: int, w=None) -> float:
    from .tmd import tmd

    return tmd(simulate(g, zeta), simulate(h, zeta), depth, w)
