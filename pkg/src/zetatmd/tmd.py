"""Tree distance and Tree Mover's Distance via level-wise dynamic programming.

Computation trees are never materialised.  Two nodes whose depth-``t`` trees
are isomorphic share a 1-WL colour at iteration ``t - 1``, so the tree
distance is tabulated per pair of colour classes:

* level 1: ``D1[a, b] = ||x_a - x_b||``, blank column ``beta1[a] = ||x_a||``;
* level t: ``Dt[a, b] = ||x_a - x_b|| + w(t) * OT(children(a), children(b))``
  with both child multisets padded by blank trees, child-to-child cost
  ``D(t-1) + ||e - e'||`` and child-to-blank cost ``beta(t-1) + ||e||``;
* ``beta_t[a] = ||x_a|| + w(t) * sum over children of (beta(t-1) + ||e||)``.

TMD is the padded optimal assignment between the two root multisets using
``D_T`` and ``beta_T``.  Identical elements of two multisets are cancelled
before solving (optimal for any ground cost obeying the triangle
inequality), and every assignment is solved in a canonical orientation
(smaller colour id / lexicographically smaller multiset on the rows) so the
result is exactly symmetric and exactly invariant under node relabelling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._accel import njit, prange
from .assignment import assignment_cost, lsa_kernel
from .errors import ContractError, ValidationError
from .graph import Graph, GraphDataset
from .wl import refine

# dense class-pair tables above this many classes per level fall back to per-pair work
MAX_SHARED_CLASSES = 4096


@dataclass(frozen=True)
class DepthWeights:
    """Positive weight ``w(t)`` for tree levels ``t >= 2``.

    ``per_level[i]`` is the weight of level ``i + 2``; levels beyond the list
    use ``const``.
    """

    const: float = 1.0
    per_level: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "per_level", tuple(float(v) for v in self.per_level))
        for v in (self.const, *self.per_level):
            if not (math.isfinite(v) and v > 0):
                raise ContractError(f"depth weights must be finite and > 0, got {v}")

    def __call__(self, t: int) -> float:
        i = t - 2
        return self.per_level[i] if 0 <= i < len(self.per_level) else float(self.const)

    @classmethod
    def parse(cls, text: str) -> "DepthWeights":
        """``const:<w>`` or ``levels:<w2>,<w3>,...``."""
        kind, _, rest = text.partition(":")
        try:
            if kind == "const":
                return cls(float(rest))
            if kind == "levels":
                vals = [float(v) for v in rest.split(",") if v.strip()]
                if not vals:
                    raise ValueError
                return cls(vals[-1], tuple(vals))
        except ValueError:
            pass
        raise ValidationError(f"bad weight spec {text!r}; expected const:<w> or levels:<w2>,<w3>,...")


UNIT_WEIGHTS = DepthWeights()


# kernels --------------------------------------------------------------------

@njit(cache=True)
def _norm_diff(X, a, b):
    s = 0.0
    for k in range(X.shape[1]):
        d = X[a, k] - X[b, k]
        s += d * d
    return math.sqrt(s)


@njit(cache=True)
def _row_norms(X):
    out = np.empty(X.shape[0])
    for a in range(X.shape[0]):
        s = 0.0
        for k in range(X.shape[1]):
            s += X[a, k] * X[a, k]
        out[a] = math.sqrt(s)
    return out


@njit(cache=True)
def _pairwise_norm_diff(X):
    n = X.shape[0]
    out = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            d = _norm_diff(X, a, b)
            out[a, b] = d
            out[b, a] = d
    return out


@njit(cache=True)
def _feature_pass(pairs, X, out):
    for k in range(pairs.shape[0]):
        out[k] = _norm_diff(X, pairs[k, 0], pairs[k, 1])


@njit(cache=True)
def _children_ot(lo, hi, ptr, ccol, cedge, dprev, bprev, edist, enorm):
    a0 = ptr[lo]
    na = ptr[lo + 1] - a0
    b0 = ptr[hi]
    nb = ptr[hi + 1] - b0
    ra = np.empty(na, dtype=np.int64)
    rb = np.empty(nb, dtype=np.int64)
    # children are sorted by (edge class, colour); cancel the common part
    i = 0
    j = 0
    p = 0
    q = 0
    while i < na and j < nb:
        ea = cedge[a0 + i]
        eb = cedge[b0 + j]
        ca = ccol[a0 + i]
        cb = ccol[b0 + j]
        if ea == eb and ca == cb:
            i += 1
            j += 1
        elif ea < eb or (ea == eb and ca < cb):
            ra[p] = a0 + i
            p += 1
            i += 1
        else:
            rb[q] = b0 + j
            q += 1
            j += 1
    while i < na:
        ra[p] = a0 + i
        p += 1
        i += 1
    while j < nb:
        rb[q] = b0 + j
        q += 1
        j += 1
    n = max(p, q)
    if n == 0:
        return 0.0
    cost = np.zeros((n, n))
    for r in range(p):
        sa = ccol[ra[r]]
        xa = cedge[ra[r]]
        for c in range(q):
            cost[r, c] = dprev[sa, ccol[rb[c]]] + edist[xa, cedge[rb[c]]]
        blank = bprev[sa] + enorm[xa]
        for c in range(q, n):
            cost[r, c] = blank
    for c in range(q):
        blank = bprev[ccol[rb[c]]] + enorm[cedge[rb[c]]]
        for r in range(p, n):
            cost[r, c] = blank
    perm = np.empty(n, dtype=np.int64)
    lsa_kernel(cost, n, perm)
    return assignment_cost(cost, n, perm)


@njit(cache=True, parallel=True)
def _level_pass(pairs, base, X, ptr, ccol, cedge, dprev, bprev, edist, enorm, w, out):
    for k in prange(pairs.shape[0]):
        lo = pairs[k, 0]
        hi = pairs[k, 1]
        root = _norm_diff(X, base[lo], base[hi])
        out[k] = root + w * _children_ot(lo, hi, ptr, ccol, cedge, dprev, bprev, edist, enorm)


@njit(cache=True)
def _blank_pass(base, beta1, ptr, ccol, cedge, bprev, enorm, w):
    n = base.shape[0]
    out = np.empty(n)
    for c in range(n):
        s = 0.0
        for i in range(ptr[c], ptr[c + 1]):
            s += bprev[ccol[i]] + enorm[cedge[i]]
        out[c] = beta1[base[c]] + w * s
    return out


@njit(cache=True)
def multiset_ot(A, B, D, beta):
    """Padded OT between sorted class multisets ``A`` and ``B``."""
    na = A.shape[0]
    nb = B.shape[0]
    ra = np.empty(na, dtype=np.int64)
    rb = np.empty(nb, dtype=np.int64)
    i = 0
    j = 0
    p = 0
    q = 0
    while i < na and j < nb:
        if A[i] == B[j]:
            i += 1
            j += 1
        elif A[i] < B[j]:
            ra[p] = A[i]
            p += 1
            i += 1
        else:
            rb[q] = B[j]
            q += 1
            j += 1
    while i < na:
        ra[p] = A[i]
        p += 1
        i += 1
    while j < nb:
        rb[q] = B[j]
        q += 1
        j += 1
    # canonical orientation: shorter remainder on the rows, ties broken lexicographically
    swap = q < p
    if p == q:
        for k in range(p):
            if ra[k] != rb[k]:
                swap = rb[k] < ra[k]
                break
    if swap:
        ra, rb = rb, ra
        p, q = q, p
    n = max(p, q)
    if n == 0:
        return 0.0
    cost = np.zeros((n, n))
    for r in range(p):
        for c in range(q):
            cost[r, c] = D[ra[r], rb[c]]
        for c in range(q, n):
            cost[r, c] = beta[ra[r]]
    for c in range(q):
        for r in range(p, n):
            cost[r, c] = beta[rb[c]]
    perm = np.empty(n, dtype=np.int64)
    lsa_kernel(cost, n, perm)
    return assignment_cost(cost, n, perm)


@njit(cache=True, parallel=True)
def _root_pass(gpairs, gptr, gcls, D, beta, out):
    for k in prange(gpairs.shape[0]):
        i = gpairs[k, 0]
        j = gpairs[k, 1]
        out[k] = multiset_ot(gcls[gptr[i]:gptr[i + 1]], gcls[gptr[j]:gptr[j + 1]], D, beta)


# engine -----------------------------------------------------------------------

@dataclass
class TreeTables:
    """Class-pair tree distances for a group of graphs.

    ``D[t-1]`` / ``beta[t-1]`` are the level-``t`` tables indexed by the
    iteration-``t-1`` colours of ``refinement``.  Only entries between a class
    present in some ``rows`` graph and one present in some ``cols`` graph are
    filled.
    """

    refinement: object
    depth: int
    D: list = field(default_factory=list)
    beta: list = field(default_factory=list)

    def root_classes(self, i: int) -> np.ndarray:
        return np.sort(self.refinement.graph_colors(i, self.depth - 1))


def _presence(r, graph_ids, t) -> np.ndarray:
    mask = np.zeros(r.num_colors[t], dtype=bool)
    for i in graph_ids:
        mask[r.graph_colors(i, t)] = True
    return mask


def build_tables(graphs: Sequence[Graph], depth: int, weights: DepthWeights, rows, cols,
                 refinement=None) -> TreeTables:
    if depth < 1:
        raise ContractError("depth must be >= 1")
    r = refinement if refinement is not None else refine(graphs, depth - 1)
    X = np.ascontiguousarray(r.node_features)
    E = np.ascontiguousarray(r.edge_features)
    edist = _pairwise_norm_diff(E)
    enorm = _row_norms(E)
    beta1 = _row_norms(X)
    tables = TreeTables(r, depth)
    dprev = bprev = None
    for t in range(1, depth + 1):
        it = t - 1
        n = r.num_colors[it]
        mr = _presence(r, rows, it)
        mc = _presence(r, cols, it)
        need = np.outer(mr, mc)
        need |= need.T
        pairs = np.argwhere(np.triu(need, k=1)).astype(np.int64)
        vals = np.empty(pairs.shape[0])
        if t == 1:
            _feature_pass(pairs, X, vals)
            beta = beta1.copy()
        else:
            w = weights(t)
            base = r.base[it]
            _level_pass(pairs, base, X, r.child_ptr[it], r.child_color[it], r.child_edge[it],
                        dprev, bprev, edist, enorm, w, vals)
            beta = _blank_pass(base, beta1, r.child_ptr[it], r.child_color[it], r.child_edge[it],
                               bprev, enorm, w)
        D = np.zeros((n, n))
        D[pairs[:, 0], pairs[:, 1]] = vals
        D[pairs[:, 1], pairs[:, 0]] = vals
        tables.D.append(D)
        tables.beta.append(beta)
        dprev, bprev = D, beta
    return tables


def _root_values(tables: TreeTables, gpairs: np.ndarray) -> np.ndarray:
    r = tables.refinement
    gcls = np.concatenate([tables.root_classes(i) for i in range(len(r.offsets) - 1)]) if len(r.offsets) > 1 else np.zeros(0, np.int64)
    out = np.empty(gpairs.shape[0])
    _root_pass(np.ascontiguousarray(gpairs, dtype=np.int64), r.offsets, gcls.astype(np.int64),
               tables.D[-1], tables.beta[-1], out)
    return out


def _weights(w) -> DepthWeights:
    if w is None:
        return UNIT_WEIGHTS
    if isinstance(w, DepthWeights):
        return w
    return DepthWeights(float(w))


@dataclass(frozen=True)
class LevelDistances:
    """Per-level node-pair tree distances ``D[t-1]`` (shape ``n_G x n_H``) and blank columns."""

    D: list
    beta_g: list
    beta_h: list


def level_distances(g: Graph, h: Graph, depth: int, w=None) -> LevelDistances:
    tables = build_tables([g, h], depth, _weights(w), [0], [1])
    r = tables.refinement
    Ds, bg, bh = [], [], []
    for t in range(depth):
        cg = r.graph_colors(0, t)
        ch = r.graph_colors(1, t)
        Ds.append(tables.D[t][np.ix_(cg, ch)])
        bg.append(tables.beta[t][cg])
        bh.append(tables.beta[t][ch])
    return LevelDistances(Ds, bg, bh)


def tmd(g: Graph, h: Graph, depth: int, w=None) -> float:
    """Tree Mover's Distance between depth-``depth`` computation-tree multisets."""
    tables = build_tables([g, h], depth, _weights(w), [0], [1])
    return float(_root_values(tables, np.array([[0, 1]], dtype=np.int64))[0])


@dataclass(frozen=True)
class DistanceMatrix:
    labels: tuple
    values: np.ndarray


def _graphs_of(ds) -> list:
    return list(ds.graphs) if isinstance(ds, GraphDataset) else list(ds)


def _simulated(graphs, zeta):
    if zeta is None:
        return graphs
    from .transforms import simulate

    return [simulate(g, zeta) for g in graphs]


def _shared_refinement(graphs, depth):
    """Joint refinement if its class tables fit the dense budget, else None."""
    if depth < 1:
        raise ContractError("depth must be >= 1")
    r = refine(graphs, depth - 1)
    return r if max(r.num_colors) <= MAX_SHARED_CLASSES else None


def pairwise_tmd(ds, depth: int, w=None, zeta=None) -> DistanceMatrix:
    """(zeta-)TMD over all unordered pairs of a dataset; symmetric, zero diagonal."""
    graphs = _simulated(_graphs_of(ds), zeta)
    n = len(graphs)
    if n == 0:
        raise ContractError("dataset is empty")
    w = _weights(w)
    out = np.zeros((n, n))
    iu = np.array([(i, j) for i in range(n) for j in range(i + 1, n)], dtype=np.int64).reshape(-1, 2)
    r = _shared_refinement(graphs, depth)
    if r is not None:
        tables = build_tables(graphs, depth, w, range(n), range(n), r)
        vals = _root_values(tables, iu)
    else:
        vals = np.array([tmd(graphs[i], graphs[j], depth, w) for i, j in iu])
    out[iu[:, 0], iu[:, 1]] = vals
    out[iu[:, 1], iu[:, 0]] = vals
    return DistanceMatrix(tuple(range(n)), out)


def cross_tmd(rows, cols, depth: int, w=None, zeta=None) -> np.ndarray:
    """Rectangular matrix of (zeta-)TMD between every row graph and every column graph."""
    rg = _simulated(_graphs_of(rows), zeta)
    cg = _simulated(_graphs_of(cols), zeta)
    w = _weights(w)
    nr, nc = len(rg), len(cg)
    gpairs = np.array([(i, nr + j) for i in range(nr) for j in range(nc)], dtype=np.int64).reshape(-1, 2)
    graphs = rg + cg
    r = _shared_refinement(graphs, depth)
    if r is not None:
        tables = build_tables(graphs, depth, w, range(nr), range(nr, nr + nc), r)
        vals = _root_values(tables, gpairs)
    else:
        vals = np.array([tmd(graphs[i], graphs[j], depth, w) for i, j in gpairs])
    return vals.reshape(nr, nc)


def set_distance(test_to_train) -> tuple[float, np.ndarray]:
    """Structural similarity between a test set and a training set.

    ``test_to_train[i, j]`` is the distance from test graph ``i`` to training
    graph ``j``.  Returns ``(xi, minima)`` where ``minima[i]`` is the distance
    from test graph ``i`` to its nearest training graph and ``xi`` is the
    largest of those minima.
    """
    m = np.asarray(test_to_train, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] == 0:
        raise ContractError("need at least one test graph")
    if m.shape[1] == 0:
        raise ContractError("training set is empty")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise ContractError("distances must be finite and >= 0")
    minima = m.min(axis=1)
    return float(minima.max()), minima
