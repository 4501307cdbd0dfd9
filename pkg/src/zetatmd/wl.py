"""1-WL colour refinement and explicit computation trees.

Colours are canonical: at every iteration the distinct refinement signatures
are sorted and numbered, so colour ids depend only on the multiset of graphs
being refined together, never on node numbering or argument order.  The tree
distance code relies on this to make results exactly symmetric and exactly
invariant under relabelling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError
from .graph import Graph


@dataclass(frozen=True)
class Refinement:
    """Joint refinement of a list of graphs.

    ``colors[t]`` holds the iteration-``t`` colour of every node (graphs
    concatenated, see ``offsets``).  For ``t >= 1`` colour ``c`` is described
    by its signature: its previous colour ``parent[t][c]`` and its sorted child
    list ``child_edge / child_color`` (CSR with ``child_ptr``); ``base[t][c]``
    is the iteration-0 colour, which indexes ``node_features``.
    """

    offsets: np.ndarray
    colors: list
    num_colors: list
    base: list
    parent: list
    child_ptr: list
    child_color: list
    child_edge: list
    node_features: np.ndarray
    edge_features: np.ndarray
    has_edge_features: bool

    def graph_colors(self, i: int, t: int) -> np.ndarray:
        return self.colors[t][self.offsets[i]:self.offsets[i + 1]]


def check_compatible(graphs: Sequence[Graph]) -> tuple[int, Optional[int]]:
    """Common node-feature dim and edge-feature dim (None without edge features)."""
    fdims = {g.feature_dim for g in graphs if g.node_count}
    if len(fdims) > 1:
        raise ContractError(f"node feature dimensions differ: {sorted(fdims)}")
    edims = {g.edge_dim for g in graphs if g.edge_count}
    if len(edims) > 1:
        if None in edims:
            raise ContractError("edge features present on some graphs but not others")
        raise ContractError(f"edge feature dimensions differ: {sorted(edims)}")
    return (fdims.pop() if fdims else 0), (edims.pop() if edims else None)


def _dense_ids(keys):
    table = {k: i for i, k in enumerate(sorted(set(keys)))}
    return np.fromiter((table[k] for k in keys), dtype=np.int64, count=len(keys)), sorted(table, key=table.get)


def refine(graphs: Sequence[Graph], iterations: int) -> Refinement:
    if iterations < 0:
        raise ContractError("iterations must be >= 0")
    fdim, edim = check_compatible(graphs)
    offsets = np.zeros(len(graphs) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([g.node_count for g in graphs])
    total = int(offsets[-1])

    xs = np.concatenate([g.x for g in graphs if g.node_count]) if total else np.zeros((0, fdim))
    c0, keys0 = _dense_ids([row.tobytes() for row in xs])
    node_features = np.array([np.frombuffer(k, dtype=np.float64) for k in keys0]).reshape(len(keys0), fdim)

    # edge classes, indexed per directed CSR slot
    if edim is None:
        edge_features = np.zeros((1, 0))
        slot_edge = [np.zeros(g.csr[1].shape[0], dtype=np.int64) for g in graphs]
    else:
        eas = [g.edge_attr for g in graphs if g.edge_count]
        all_e = np.concatenate(eas)
        ecls, ekeys = _dense_ids([row.tobytes() for row in all_e])
        edge_features = np.array([np.frombuffer(k, dtype=np.float64) for k in ekeys]).reshape(len(ekeys), edim)
        slot_edge, pos = [], 0
        for g in graphs:
            if g.edge_count:
                slot_edge.append(ecls[pos:pos + g.edge_count][g.csr[2]])
                pos += g.edge_count
            else:
                slot_edge.append(np.zeros(0, dtype=np.int64))

    colors, num_colors = [c0], [len(keys0)]
    base = [np.arange(len(keys0), dtype=np.int64)]
    empty = np.zeros(0, dtype=np.int64)
    parent, child_ptr, child_color, child_edge = [empty], [np.zeros(len(keys0) + 1, dtype=np.int64)], [empty], [empty]

    for _ in range(iterations):
        prev = colors[-1]
        sigs = []
        for gi, g in enumerate(graphs):
            indptr, indices, _ = g.csr
            off = offsets[gi]
            pc = prev[off:off + g.node_count]
            se = slot_edge[gi]
            for v in range(g.node_count):
                lo, hi = indptr[v], indptr[v + 1]
                kids = tuple(sorted(zip(se[lo:hi].tolist(), pc[indices[lo:hi]].tolist())))
                sigs.append((int(pc[v]), kids))
        cur, table = _dense_ids(sigs)
        par = np.array([s[0] for s in table], dtype=np.int64)
        ptr = np.zeros(len(table) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(s[1]) for s in table])
        flat = [k for s in table for k in s[1]]
        ce = np.array([k[0] for k in flat], dtype=np.int64)
        cc = np.array([k[1] for k in flat], dtype=np.int64)
        colors.append(cur)
        num_colors.append(len(table))
        base.append(base[-1][par])
        parent.append(par)
        child_ptr.append(ptr)
        child_color.append(cc)
        child_edge.append(ce)

    return Refinement(offsets, colors, num_colors, base, parent, child_ptr, child_color, child_edge,
                      node_features, edge_features, edim is not None)


@dataclass(frozen=True)
class Coloring:
    """Per-iteration node colours of one graph (dense ids from 0)."""

    colors: list

    @property
    def iterations(self) -> int:
        return len(self.colors) - 1

    def classes(self, t: int) -> list[frozenset]:
        groups: dict = {}
        for v, c in enumerate(self.colors[t].tolist()):
            groups.setdefault(c, set()).add(v)
        return [frozenset(groups[c]) for c in sorted(groups)]


def wl_refine(g: Graph, iterations: int) -> Coloring:
    """Colour refinement of a single graph.

    Iteration 0 colours nodes by the exact bit pattern of their feature
    vector; iteration ``t`` colours by (own colour, multiset of (edge feature,
    neighbour colour)).
    """
    r = refine([g], iterations)
    # renumber per graph so ids are contiguous from 0 in each iteration
    out = []
    for c in r.colors:
        _, dense = np.unique(c, return_inverse=True)
        out.append(dense.astype(np.int64).reshape(-1))
    return Coloring(out)


def color_histograms(r: Refinement, t: int) -> list[np.ndarray]:
    n = r.num_colors[t]
    return [np.bincount(r.graph_colors(i, t), minlength=n) for i in range(len(r.offsets) - 1)]


def wl_distinguishes(g: Graph, h: Graph, max_iters: int) -> Optional[int]:
    """Smallest iteration ``t <= max_iters`` whose colour histograms differ, else None."""
    r = refine([g, h], max_iters)
    for t in range(max_iters + 1):
        hg, hh = color_histograms(r, t)
        if not np.array_equal(hg, hh):
            return t
    return None


# computation trees ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ComputationTree:
    """Rooted tree; ``children`` is a tuple of ``(edge_feature or None, subtree)``."""

    feature: np.ndarray
    children: tuple = ()

    @property
    def depth(self) -> int:
        return 1 + max((c.depth for _, c in self.children), default=0)

    @property
    def size(self) -> int:
        return 1 + sum(c.size for _, c in self.children)


def extract_trees(g: Graph, depth: int) -> list[ComputationTree]:
    """Depth-``depth`` computation tree of every node (depth 1 = the node alone).

    Subtrees are shared between parents, so memory stays linear in
    ``node_count * depth`` even though the trees themselves are exponential.
    """
    if depth < 1:
        raise ContractError("tree depth must be >= 1")
    indptr, indices, eids = g.csr
    level = [ComputationTree(g.x[v]) for v in range(g.node_count)]
    for _ in range(depth - 1):
        nxt = []
        for v in range(g.node_count):
            kids = []
            for slot in range(indptr[v], indptr[v + 1]):
                e = None if g.edge_attr is None else g.edge_attr[eids[slot]]
                kids.append((e, level[indices[slot]]))
            nxt.append(ComputationTree(g.x[v], tuple(kids)))
        level = nxt
    return level


def tree_key(tree: ComputationTree):
    """Canonical form: equal keys iff the trees are isomorphic (features bitwise)."""
    kids = sorted((b"" if e is None else e.tobytes(), tree_key(c)) for e, c in tree.children)
    return (tree.feature.tobytes(), tuple(kids))
