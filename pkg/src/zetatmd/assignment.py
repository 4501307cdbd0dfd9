"""Exact minimum-cost perfect assignment on square cost matrices.

Shortest-augmenting-path Hungarian method with row/column potentials,
O(n^3).  The kernel works on the top-left ``n x n`` block of a caller-owned
buffer so the tree-distance kernels can reuse one allocation per pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .errors import ContractError


@njit(cache=True)
def lsa_kernel(cost, n, perm):
    """Fill ``perm[:n]`` with an optimal row -> column assignment of ``cost[:n, :n]``."""
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1)
    used = np.empty(n + 1, dtype=np.bool_)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        for j in range(n + 1):
            minv[j] = np.inf
            used[j] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    for j in range(1, n + 1):
        perm[p[j] - 1] = j - 1


@njit(cache=True)
def assignment_cost(cost, n, perm):
    """Sum of the assigned entries in row order (fixed summation order)."""
    total = 0.0
    for i in range(n):
        total += cost[i, perm[i]]
    return total


@dataclass(frozen=True)
class Assignment:
    permutation: np.ndarray
    total_cost: float


def solve_assignment(cost) -> Assignment:
    """Globally optimal permutation for a square, finite, nonnegative cost matrix."""
    c = np.asarray(cost, dtype=np.float64)
    if c.size == 0:
        c = c.reshape(0, 0)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ContractError(f"cost matrix must be square, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ContractError("cost matrix has non-finite entries")
    if np.any(c < 0):
        raise ContractError("cost matrix has negative entries")
    c = np.ascontiguousarray(c)
    n = c.shape[0]
    perm = np.zeros(n, dtype=np.int64)
    if n:
        lsa_kernel(c, n, perm)
    perm.setflags(write=False)
    return Assignment(perm, float(assignment_cost(c, n, perm)))
