"""Random small graphs for tests."""

import numpy as np
from hypothesis import strategies as st

from zetatmd.graph import Graph


def random_graph(rng, n, p=0.4, feature_dim=1, values=None, edge_dim=None):
    """Random G(n, p) graph. ``values`` picks features from a finite set."""
    a = np.triu(rng.random((n, n)) < p, 1)
    edges = np.argwhere(a)
    if values is None:
        x = rng.uniform(-1.0, 1.0, size=(n, feature_dim))
    else:
        x = rng.choice(np.asarray(values, dtype=float), size=(n, feature_dim))
    e = None if edge_dim is None else rng.uniform(-1.0, 1.0, size=(len(edges), edge_dim))
    return Graph(x, edges, e)


@st.composite
def graphs(draw, max_nodes=6, feature_dim=1, values=(1.0, 2.0)):
    n = draw(st.integers(0, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = np.array([p for p, keep in zip(pairs, mask) if keep], dtype=np.int64).reshape(-1, 2)
    x = draw(st.lists(st.sampled_from(values), min_size=n * feature_dim, max_size=n * feature_dim))
    return Graph(np.array(x, dtype=float).reshape(n, feature_dim), edges)


@st.composite
def permutations(draw, n):
    return np.array(draw(st.permutations(range(n))), dtype=np.int64)
