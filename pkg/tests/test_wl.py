import numpy as np
from hypothesis import given, strategies as st

from zetatmd.graph import Graph, complete_graph, cycle_graph, disjoint_union, path_graph, star_graph
from zetatmd.wl import color_histograms, extract_trees, refine, tree_key, wl_distinguishes, wl_refine

from graphgen import graphs, permutations


def _partition(coloring, t):
    return set(coloring.classes(t))


def test_c6_single_color():
    c = wl_refine(cycle_graph(6), 3)
    assert all(len(c.classes(t)) == 1 for t in range(4))


def test_star_degree_partition():
    c = wl_refine(star_graph(3), 1)
    assert _partition(c, 1) == {frozenset({0}), frozenset({1, 2, 3})}


def test_iteration_zero_is_feature_classes():
    g = Graph(np.array([[1.0], [2.0], [1.0], [-0.0], [0.0]]), [(0, 1)])
    assert _partition(wl_refine(g, 0), 0) == {frozenset({0, 2}), frozenset({1}), frozenset({3, 4})}


def test_colors_contiguous_from_zero():
    c = wl_refine(path_graph(5), 3)
    for col in c.colors:
        assert sorted(set(col.tolist())) == list(range(len(set(col.tolist()))))


def test_distinguishes_examples():
    g = path_graph(4)
    assert wl_distinguishes(g, g, 3) is None
    assert wl_distinguishes(star_graph(3), path_graph(4), 2) == 1
    c3 = cycle_graph(3)
    assert wl_distinguishes(cycle_graph(6), disjoint_union(c3, c3), 5) is None


def test_distinguishes_by_features():
    a = Graph(np.array([[1.0]]), [])
    b = Graph(np.array([[2.0]]), [])
    assert wl_distinguishes(a, b, 0) == 0


def test_edge_features_refine():
    e = [(0, 1), (1, 2)]
    a = Graph(np.ones((3, 1)), e, np.array([[1.0], [1.0]]))
    b = Graph(np.ones((3, 1)), e, np.array([[1.0], [2.0]]))
    assert wl_distinguishes(a, b, 2) == 1


def test_extract_trees_examples():
    single = extract_trees(Graph(np.ones((1, 1)), []), 3)
    assert len(single) == 1 and single[0].depth == 1
    edge = extract_trees(path_graph(2), 2)
    assert len(edge) == 2 and tree_key(edge[0]) == tree_key(edge[1])
    assert edge[0].depth == 2 and len(edge[0].children) == 1
    tri = extract_trees(complete_graph(3), 2)
    assert len({tree_key(t) for t in tri}) == 1 and len(tri[0].children) == 2


@given(graphs(max_nodes=7, values=(1.0, 2.0, 3.0)), st.integers(0, 4))
def test_refinement_monotone(g, T):
    c = wl_refine(g, T)
    for t in range(T):
        fine, coarse = c.colors[t + 1], c.colors[t]
        # equal colour at t+1 implies equal colour at t
        pairs = {}
        for a, b in zip(fine.tolist(), coarse.tolist()):
            assert pairs.setdefault(a, b) == b


@given(graphs(max_nodes=7, values=(1.0, 2.0)))
def test_stable_once_stalled(g):
    c = wl_refine(g, 6)
    counts = [len(c.classes(t)) for t in range(7)]
    for t in range(6):
        if counts[t + 1] == counts[t]:
            assert all(k == counts[t] for k in counts[t:])


@given(st.data())
def test_relabel_invariance(data):
    g = data.draw(graphs(max_nodes=7, values=(1.0, 2.0)))
    perm = data.draw(permutations(g.node_count))
    h = g.relabel(perm)
    r = refine([g, h], 4)
    for t in range(5):
        a, b = color_histograms(r, t)
        assert np.array_equal(a, b)
    ta = sorted(tree_key(t) for t in extract_trees(g, 3))
    tb = sorted(tree_key(t) for t in extract_trees(h, 3))
    assert ta == tb


@given(graphs(max_nodes=6), st.integers(1, 4))
def test_tree_size_counts_walks(g, depth):
    a = g.adjacency(np.int64)
    walks = np.zeros(g.node_count, dtype=np.int64)
    vec = np.ones(g.node_count, dtype=np.int64)
    for _ in range(depth):
        walks += vec
        vec = a @ vec
    trees = extract_trees(g, depth)
    assert len(trees) == g.node_count
    assert [t.size for t in trees] == walks.tolist()
