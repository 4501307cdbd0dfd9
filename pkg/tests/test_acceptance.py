"""Acceptance criteria 1-12, each at its stated tolerance.

Each test carries a ``criterion`` marker; conftest prints one PASS/FAIL line
per criterion at the end of the run.
"""

import math
from dataclasses import replace
from itertools import permutations

import numpy as np
import pytest

from zetatmd.assignment import solve_assignment
from zetatmd.bound import bound_curve, bound_terms, generalization_gap_bound
from zetatmd.cli import main
from zetatmd.datagen import GenSpec, LabelSpec, generate, label_cycle_median
from zetatmd.graph import cycle_graph, complete_graph, disjoint_union
from zetatmd.io import dataset_to_text
from zetatmd.mpnn import forward, lipschitz_bound, random_model
from zetatmd.oracle import tmd_oracle
from zetatmd.tmd import cross_tmd, set_distance, tmd
from zetatmd.transforms import PatternFamilySpec, ZetaSpec, cycle_node_counts, simulate, zeta_tmd
from zetatmd.wl import wl_distinguishes

from bound_oracle import bound_mp, random_params
from count_oracles import closed_walks, simple_cycles_by_subsets
from graphgen import random_graph

ZETAS = [ZetaSpec.identity(), ZetaSpec.f_augment("sub", 4), ZetaSpec.k_tuple(2)]
C6 = cycle_graph(6)
TWO_C3 = disjoint_union(cycle_graph(3), cycle_graph(3))


def report(number, detail):
    print(f"criterion {number}: {detail}")


@pytest.mark.criterion(1, "TMD equals the tree-recursion oracle (200 pairs, 1e-9)")
def test_c01_oracle_equivalence():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        F = int(rng.integers(1, 3))
        T = int(rng.integers(1, 4))
        g = random_graph(rng, int(rng.integers(1, 7)), feature_dim=F)
        h = random_graph(rng, int(rng.integers(1, 7)), feature_dim=F)
        worst = max(worst, abs(tmd(g, h, T) - tmd_oracle(g, h, T)))
    report(1, f"max |tmd - oracle| = {worst:.3e}")
    assert worst <= 1e-9


@pytest.mark.criterion(2, "pseudometric axioms for identity, f-aug(sub,4), k-tuple(2) (100 triples each)")
def test_c02_pseudometric():
    rng = np.random.default_rng(102)
    worst = -np.inf
    for zeta in ZETAS:
        for _ in range(100):
            T = int(rng.integers(1, 4))
            g, h, k = (random_graph(rng, int(rng.integers(1, 7)), values=(1.0, 2.0, 3.0)) for _ in range(3))
            gh, hg = zeta_tmd(g, h, zeta, T), zeta_tmd(h, g, zeta, T)
            assert gh == hg
            assert zeta_tmd(g, g, zeta, T) == 0.0
            worst = max(worst, zeta_tmd(g, k, zeta, T) - gh - zeta_tmd(h, k, zeta, T))
    report(2, f"symmetry and self-distance exact; max triangle excess = {worst:.3e}")
    assert worst <= 1e-9


@pytest.mark.criterion(3, "WL-distinguished at T implies zeta-TMD at T+1 > 1e-12 (100 pairs)")
def test_c03_positivity():
    rng = np.random.default_rng(103)
    found, smallest, i = 0, np.inf, 0
    while found < 100:
        zeta = ZETAS[i % 3]
        i += 1
        T = int(rng.integers(0, 4))
        n1 = int(rng.integers(1, 7))
        n2 = n1 if rng.random() < 0.5 else int(rng.integers(1, 7))
        # nonzero features: a zero-feature node is indistinguishable from a blank tree
        g = random_graph(rng, n1, values=(1.0, 2.0))
        h = random_graph(rng, n2, values=(1.0, 2.0))
        if wl_distinguishes(simulate(g, zeta), simulate(h, zeta), T) is None:
            continue
        found += 1
        smallest = min(smallest, zeta_tmd(g, h, zeta, T + 1))
    report(3, f"smallest distance over 100 distinguished pairs = {smallest:.3e}")
    assert smallest > 1e-12


@pytest.mark.criterion(4, "C6 vs 2xC3: TMD 0, triangle-augmented and 3-tuple distances positive")
def test_c04_separation():
    plain = [tmd(C6, TWO_C3, T) for T in range(1, 6)]
    faug = zeta_tmd(C6, TWO_C3, ZetaSpec.f_augment("sub", 3), 1)
    ktup = zeta_tmd(C6, TWO_C3, ZetaSpec.k_tuple(3), 2)
    report(4, f"plain {plain}, f-aug {faug}, 3-tuple {ktup}")
    assert all(v == 0.0 for v in plain)
    assert faug > 0 and ktup > 0


@pytest.mark.criterion(5, "Lipschitz bound holds for plain, F-augmented and 2-tuple models (200 draws)")
def test_c05_lipschitz():
    rng = np.random.default_rng(105)
    worst = np.inf
    for i in range(200):
        zeta = ZETAS[i % 3]
        T = int(rng.integers(1, 4))
        g = simulate(random_graph(rng, int(rng.integers(1, 11)), p=0.3), zeta)
        h = simulate(random_graph(rng, int(rng.integers(1, 11)), p=0.3), zeta)
        edge_dim = g.edge_dim if g.edge_attr is not None else (3 if zeta.variant == "k_tuple" else 0)
        m = random_model(i, g.feature_dim, T, int(rng.integers(1, 9)), edge_dim=edge_dim)
        gap = float(np.linalg.norm(forward(m, g) - forward(m, h)))
        worst = min(worst, lipschitz_bound(m) * tmd(g, h, T + 1) - gap)
    report(5, f"min slack = {worst:.3e}")
    assert worst >= -1e-9


@pytest.mark.criterion(6, "cycles<=3 augmented distance <= cycles<=4 augmented distance (100 pairs)")
def test_c06_monotonicity():
    rng = np.random.default_rng(106)
    worst = -np.inf
    modes = ["homomorphism", "subgraph", "cycle-basis"]
    for i in range(100):
        mode = modes[i % 3]
        T = int(rng.integers(1, 4))
        g = random_graph(rng, int(rng.integers(1, 8)), p=0.5)
        h = random_graph(rng, int(rng.integers(1, 8)), p=0.5)
        small = zeta_tmd(g, h, ZetaSpec.f_augment(mode, 3), T)
        large = zeta_tmd(g, h, ZetaSpec.f_augment(mode, 4), T)
        worst = max(worst, small - large)
    report(6, f"max violation = {worst:.3e}")
    assert worst <= 1e-9


@pytest.mark.criterion(7, "cycle counts equal walk and subset enumeration oracles")
def test_c07_counting():
    rng = np.random.default_rng(107)
    for _ in range(60):
        g = random_graph(rng, int(rng.integers(1, 8)), p=0.5)
        assert np.array_equal(cycle_node_counts(g, PatternFamilySpec("homomorphism", 6)), closed_walks(g, 6))
        a = g.adjacency()
        for length in range(3, 7):
            diag = np.diagonal(np.linalg.matrix_power(a, length))
            assert np.array_equal(cycle_node_counts(g, PatternFamilySpec("homomorphism", 6))[:, length - 3], diag)
    for _ in range(40):
        g = random_graph(rng, int(rng.integers(1, 9)), p=0.5)
        assert np.array_equal(cycle_node_counts(g, PatternFamilySpec("subgraph", 8)), simple_cycles_by_subsets(g, 8))
    assert cycle_node_counts(complete_graph(3), PatternFamilySpec("homomorphism", 3)).ravel().tolist() == [2] * 3
    assert cycle_node_counts(complete_graph(4), PatternFamilySpec("subgraph", 3)).ravel().tolist() == [3] * 4
    report(7, "hom (n<=7, l<=6) and subgraph (n<=8) counts match; K3 hom 2, K4 triangles 3")


@pytest.mark.criterion(8, "bound: dual implementation within 1e-12 (1000 draws), monotone, curve nondecreasing")
def test_c08_bound():
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(1000):
        p = random_params(rng)
        v = generalization_gap_bound(p)
        ref = float(bound_mp(p))
        assert math.isclose(v, ref, rel_tol=1e-12, abs_tol=1e-12)
        worst = max(worst, abs(v - ref) / max(1.0, abs(ref)))
        lo, hi = sorted(rng.uniform(0, 20, 2))
        assert generalization_gap_bound(replace(p, xi=lo)) <= generalization_gap_bound(replace(p, xi=hi))
        assert generalization_gap_bound(replace(p, weight_sq_norm_sum=lo)) <= generalization_gap_bound(
            replace(p, weight_sq_norm_sum=hi))
        curve = bound_curve(np.sort(rng.uniform(0, 10, 8)), p)
        assert np.all(np.diff(curve) >= 0)
        z = replace(p, xi=0.0)
        t1, _, _, t4 = bound_terms(z)
        assert t1 == 0.0 and t4 == 0.0
    report(8, f"max relative disagreement = {worst:.3e}")


@pytest.mark.criterion(9, "xi matches a double-loop oracle; zero when test is a subset of train")
def test_c09_xi():
    rng = np.random.default_rng(109)
    for _ in range(200):
        m = rng.uniform(0, 10, size=tuple(rng.integers(1, 12, 2)))
        best = -1.0
        for i in range(m.shape[0]):
            lo = math.inf
            for j in range(m.shape[1]):
                lo = min(lo, m[i, j])
            best = max(best, lo)
        assert set_distance(m)[0] == best
    train = [random_graph(rng, int(rng.integers(1, 8)), values=(1.0, 2.0)) for _ in range(10)]
    test = [train[i] for i in rng.choice(10, 4, replace=False)]
    xi, _ = set_distance(cross_tmd(test, train, 3))
    report(9, f"200 random matrices agree; subset xi = {xi}")
    assert xi == 0.0


@pytest.mark.criterion(10, "assignment equals n! enumeration (500 matrices, n<=7, 1e-12)")
def test_c10_assignment():
    rng = np.random.default_rng(110)
    perms = {n: np.array(list(permutations(range(n))), dtype=np.int64) for n in range(1, 8)}
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 8))
        c = rng.uniform(0, 1, size=(n, n))
        brute = c[np.arange(n), perms[n]].sum(axis=1).min()
        worst = max(worst, abs(solve_assignment(c).total_cost - brute))
    report(10, f"max |solver - enumeration| = {worst:.3e}")
    assert worst <= 1e-12


@pytest.mark.criterion(11, "datagen: seed determinism, ER edge mean within 3 SE, label-1 count <= label-0 count")
def test_c11_datagen():
    spec = GenSpec("er", {"p": 0.1}, (35, 55), 300, 7)
    ds = generate(spec)
    assert dataset_to_text(ds) == dataset_to_text(generate(spec))
    e = np.array([g.edge_count for g in ds.graphs], dtype=float)
    expect = 0.1 * np.mean([n * (n - 1) / 2 for n in range(35, 56)])
    se = e.std(ddof=1) / math.sqrt(len(e))
    labels = label_cycle_median(ds, LabelSpec()).labels
    ones = sum(labels)
    report(11, f"mean edges {e.mean():.2f} vs {expect:.2f} (SE {se:.2f}); labels 1/0 = {ones}/{len(labels) - ones}")
    assert abs(e.mean() - expect) <= 3 * se
    assert ones <= len(labels) - ones


def _pipeline(d):
    steps = [
        ["gen", "--model", "er:p=0.1", "--nodes", "35:55", "--count", "30", "--seed", "7", "--out", d / "ds.jsonl"],
        ["label", d / "ds.jsonl", "--out", d / "lab.jsonl"],
        ["split", d / "lab.jsonl", "--frac", "0.7", "--seed", "7", "--train-out", d / "tr.jsonl",
         "--test-out", d / "te.jsonl"],
        ["dist", d / "lab.jsonl", "--depth", "3", "--out", d / "dist.csv"],
        ["xi", "--train", d / "tr.jsonl", "--test", d / "te.jsonl", "--depth", "3", "--out", d / "minima.csv"],
        ["mpnn", "--seed", "7", "--arch", "2,8", "--graphs", d / "tr.jsonl", "--save-weights", d / "w.json"],
        ["bound", "--params", d / "params.json", "--weights", d / "w.json", "--train", d / "tr.jsonl",
         "--dist-file", d / "minima.csv", "--out", d / "curve.csv"],
    ]
    (d / "params.json").write_text('{"gamma": 1.0, "delta": 0.1, "alpha": 0.2, "lip_eta": 0.5}')
    for argv in steps:
        assert main(["--quiet"] + [str(a) for a in argv]) == 0
    names = ["ds.jsonl", "lab.jsonl", "tr.jsonl", "te.jsonl", "dist.csv", "minima.csv", "w.json", "curve.csv"]
    return {n: (d / n).read_bytes() for n in names}


@pytest.mark.criterion(12, "end-to-end gen -> label -> split -> dist -> xi -> bound is deterministic")
def test_c12_end_to_end(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    first, second = _pipeline(a), _pipeline(b)
    assert first == second
    rows = first["curve.csv"].decode().splitlines()[1:]
    curve = np.array([float(r.split(",")[1]) for r in rows])
    report(12, f"{len(rows)} curve points, identical bytes on rerun, range {curve.min():.4g}..{curve.max():.4g}")
    assert len(curve) > 0 and np.all(np.isfinite(curve)) and np.all(np.diff(curve) >= 0)
