"""Reference tree distance on explicitly materialised computation trees.

Slow by design: trees are built with :func:`extract_trees`, multisets are
padded with literal blank trees and every optimal transport is found by
enumerating all permutations.  Only meant for cross-checking the dynamic
programme on small graphs.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from .errors import ContractError
from .graph import Graph
from .wl import ComputationTree, check_compatible, extract_trees

MAX_NODES = 8
MAX_DEPTH = 4


def brute_force_ot(cost) -> float:
    """Minimum over all permutations of ``sum_i cost[i, perm[i]]``."""
    c = np.asarray(cost, dtype=np.float64)
    n = c.shape[0]
    if n == 0:
        return 0.0
    perms = np.array(list(permutations(range(n))), dtype=np.int64)
    return float(c[np.arange(n), perms].sum(axis=1).min())


class _Oracle:
    def __init__(self, fdim, edim, w):
        self.blank = ComputationTree(np.zeros(fdim))
        self.zero_edge = None if edim is None else np.zeros(edim)
        self.w = w
        self.memo = {}

    def td(self, a: ComputationTree, b: ComputationTree) -> float:
        key = (id(a), id(b))
        if key not in self.memo:
            depth = max(a.depth, b.depth)
            val = float(np.linalg.norm(a.feature - b.feature))
            if depth > 1:
                val += self.w(depth) * self.ot(list(a.children), list(b.children))
            self.memo[key] = val
        return self.memo[key]

    def _edge_gap(self, e, f) -> float:
        if e is None and f is None:
            return 0.0
        return float(np.linalg.norm(e - f))

    def ot(self, xs, ys) -> float:
        n = max(len(xs), len(ys))
        pad = (self.zero_edge, self.blank)
        xs = xs + [pad] * (n - len(xs))
        ys = ys + [pad] * (n - len(ys))
        cost = np.empty((n, n))
        for i, (e, s) in enumerate(xs):
            for j, (f, t) in enumerate(ys):
                cost[i, j] = self.td(s, t) + self._edge_gap(e, f)
        return brute_force_ot(cost)


def tmd_oracle(g: Graph, h: Graph, depth: int, w=None) -> float:
    if depth < 1:
        raise ContractError("depth must be >= 1")
    if max(g.node_count, h.node_count) > MAX_NODES or depth > MAX_DEPTH:
        raise ContractError(f"oracle limited to {MAX_NODES} nodes and depth {MAX_DEPTH}")
    from .tmd import _weights

    fdim, edim = check_compatible([g, h])
    oracle = _Oracle(fdim, edim, _weights(w))
    roots_g = [(oracle.zero_edge, t) for t in extract_trees(g, depth)]
    roots_h = [(oracle.zero_edge, t) for t in extract_trees(h, depth)]
    return oracle.ot(roots_g, roots_h)
