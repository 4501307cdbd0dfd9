import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zetatmd.bound import (BoundParams, bound_curve, bound_terms, cumulative_accuracy, fixed_encoder_bound,
                           generalization_gap_bound)
from zetatmd.errors import ContractError

from bound_oracle import bound_mp, random_params

BASE = BoundParams(gamma=1.0, delta=0.1, alpha=0.2, n_train=100, classes=2, lip_eta=0.5, spec_cap=1.0,
                   hidden_dim=4, depth_count=4, max_degree=3, feature_bound=1.0, weight_sq_norm_sum=10.0,
                   train_margin_loss=0.05, xi=2.0)


def test_worked_example():
    v = generalization_gap_bound(BASE)
    assert math.isclose(v, float(bound_mp(BASE)), rel_tol=1e-12, abs_tol=1e-12)
    # hand evaluation of the four terms
    t1 = 4 * 10 * 2 ** 0.5 / (100 ** 0.4 * (1 / 8) ** 0.5)
    t2 = 16 * math.log(2 * 4 * 4 * 1 * 6 ** 0.25) / (100 ** 0.4 * 0.1)
    t3 = 1 / 100 ** 0.6
    t4 = 0.5 * 2 * 2
    assert v == pytest.approx(0.05 + t1 + t2 + t3 + t4, rel=1e-14)


def test_xi_zero_terms_vanish():
    p = replace(BASE, xi=0.0, weight_sq_norm_sum=123.0)
    t1, t2, t3, t4 = bound_terms(p)
    assert t1 == 0.0 and t4 == 0.0
    assert generalization_gap_bound(p) == p.train_margin_loss + t2 + t3


def test_lip_eta_zero():
    assert bound_terms(replace(BASE, lip_eta=0.0))[3] == 0.0


def test_log_clamp_and_zero_db():
    p = replace(BASE, spec_cap=1e-6, hidden_dim=1, depth_count=1)
    assert bound_terms(p)[1] == 0.0
    p = replace(BASE, max_degree=0)
    assert bound_terms(p)[1] == pytest.approx(16 * math.log(32) / (100 ** 0.4 * 0.1))


@pytest.mark.parametrize("field, value", [
    ("gamma", 0.0), ("delta", 1.0), ("delta", 0.0), ("alpha", 0.25), ("alpha", 0.0), ("n_train", 0),
    ("classes", 1), ("lip_eta", -1.0), ("spec_cap", 0.0), ("hidden_dim", 0), ("depth_count", 0),
    ("max_degree", -1), ("feature_bound", -0.1), ("weight_sq_norm_sum", -1.0), ("train_margin_loss", 1.5),
    ("xi", -1.0), ("gamma", float("nan")), ("hidden_dim", 2.5),
])
def test_invalid_params(field, value):
    with pytest.raises(ContractError):
        replace(BASE, **{field: value})


def test_from_dict():
    d = BASE.to_dict()
    assert BoundParams.from_dict(d) == BASE
    with pytest.raises(ContractError, match="unknown"):
        BoundParams.from_dict({**d, "C": 1.0})
    d.pop("gamma")
    with pytest.raises(ContractError, match="missing"):
        BoundParams.from_dict(d)


def test_fixed_encoder():
    p = replace(BASE, xi=5.0)
    zero = fixed_encoder_bound(p, 0.0)
    t1, t2, t3, t4 = bound_terms(replace(p, xi=0.0))
    assert zero == p.train_margin_loss + t2 + t3
    assert fixed_encoder_bound(p, 2.0) < fixed_encoder_bound(p, 4.0)
    cls = replace(BASE, weight_sq_norm_sum=2.0 ** 2, depth_count=1, hidden_dim=2)
    assert math.isclose(fixed_encoder_bound(cls, 1.5), float(bound_mp(replace(cls, xi=1.5))), rel_tol=1e-12)


def test_bound_curve_examples():
    zero = bound_curve([0.0, 0.0, 0.0], BASE)
    assert np.all(zero == generalization_gap_bound(replace(BASE, xi=0.0)))
    assert bound_curve([2.0], BASE).tolist() == [generalization_gap_bound(replace(BASE, xi=2.0))]
    c = bound_curve([1.0, 2.0, 4.0], BASE)
    assert c[0] < c[1] < c[2]
    with pytest.raises(ContractError):
        bound_curve([2.0, 1.0], BASE)
    assert bound_curve([], BASE).size == 0


def test_cumulative_accuracy_examples():
    assert cumulative_accuracy([3.0, 1.0, 2.0], [1, 1, 1]).tolist() == [1.0, 1.0, 1.0]
    assert cumulative_accuracy([0.0, 5.0], [1, 0]).tolist() == [1.0, 0.5]
    assert np.allclose(cumulative_accuracy([3.0, 1.0, 2.0], [0, 1, 1]), [1.0, 1.0, 2 / 3])
    # ties keep input order
    assert cumulative_accuracy([1.0, 1.0], [0, 1]).tolist() == [0.0, 0.5]
    with pytest.raises(ContractError):
        cumulative_accuracy([1.0], [1, 0])


def test_t3_halves():
    # T3 = N^-(1-2a): multiplying N by 2^(1/(1-2a)) halves it
    a = BASE.alpha
    n = 1000
    n2 = round(n * 2 ** (1 / (1 - 2 * a)))
    r = bound_terms(replace(BASE, n_train=n))[2] / bound_terms(replace(BASE, n_train=n2))[2]
    assert r == pytest.approx(2.0, rel=1e-3)


@given(st.integers(0, 2 ** 32))
def test_dual_implementation(seed):
    p = random_params(np.random.default_rng(seed))
    assert math.isclose(generalization_gap_bound(p), float(bound_mp(p)), rel_tol=1e-12, abs_tol=1e-12)


@given(st.integers(0, 2 ** 32), st.floats(0, 100), st.floats(0, 100))
def test_monotone(seed, u, v):
    p = random_params(np.random.default_rng(seed))
    lo, hi = sorted((u, v))
    assert generalization_gap_bound(replace(p, xi=lo)) <= generalization_gap_bound(replace(p, xi=hi))
    assert generalization_gap_bound(replace(p, weight_sq_norm_sum=lo)) <= generalization_gap_bound(
        replace(p, weight_sq_norm_sum=hi))
    assert generalization_gap_bound(replace(p, lip_eta=lo)) <= generalization_gap_bound(replace(p, lip_eta=hi))


@given(st.lists(st.floats(0, 1e3), max_size=20))
def test_curve_nondecreasing(d):
    c = bound_curve(sorted(d), BASE)
    assert np.all(np.diff(c) >= 0)
