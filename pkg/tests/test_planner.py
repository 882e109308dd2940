import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twinflow.config import AccuracyModel
from twinflow.errors import WrongSampleCount
from twinflow.oracles import association_optimum
from twinflow.planner import (PairCostTracker, build_association_lp, estimate_pair_costs,
                              fallback_pair_costs, frame_accuracy_posterior,
                              frame_accuracy_predicted, retrain_decision, solve_association)


def test_two_by_two_picks_cheap_diagonal():
    res = solve_association([[1, 9], [9, 1]])
    assert res.v.tolist() == [[1, 0], [0, 1]]
    assert res.eta == 1.0


def test_every_mu_served_and_eta_matches():
    costs = np.array([[3.0, 1.0, 2.0], [1.0, 4.0, 2.5], [2.0, 2.0, 2.0]])
    res = solve_association(costs)
    assert np.all(res.v.sum(axis=0) >= 1)
    assert res.eta == pytest.approx((costs * res.v).sum(axis=0).max())
    assert res.relaxed_objective <= res.objective + 1e-9


def test_tie_weight_prefers_cheaper_non_bottleneck():
    costs = np.array([[5.0, 1.0], [5.0, 3.0]])
    plain = solve_association(costs).eta
    tied = solve_association(costs, tie_weight=1e-3)
    assert tied.eta == plain
    assert tied.v[:, 1].tolist() == [1, 0]


def test_lp_shape():
    prob = build_association_lp(np.ones((3, 4)))
    assert prob.num_vars == 13
    assert prob.A.shape[0] == 4 * 3


@given(st.integers(0, 2**31 - 1))
def test_branch_and_bound_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    costs = rng.uniform(0.1, 10, (3, int(rng.integers(1, 5))))
    ref, _ = association_optimum(costs)
    res = solve_association(costs)
    assert abs(res.eta - ref) <= 1e-9
    assert np.all(res.v.sum(axis=0) >= 1) and np.all(res.v.sum(axis=0) <= 3)


@given(st.integers(0, 2**31 - 1))
def test_integer_ties_handled(seed):
    rng = np.random.default_rng(seed)
    costs = rng.integers(1, 4, (3, int(rng.integers(1, 5)))).astype(float)
    assert solve_association(costs).eta == association_optimum(costs)[0]


def test_posterior_mean():
    assert frame_accuracy_posterior([0.8] * 10, 10) == pytest.approx(0.8)
    assert frame_accuracy_posterior(np.linspace(0.9, 0.8, 10), 10) == pytest.approx(0.85)
    with pytest.raises(WrongSampleCount):
        frame_accuracy_posterior([0.8] * 9, 10)


def test_predicted_constant_curve():
    m = AccuracyModel(decay=0.0)
    assert frame_accuracy_predicted(0.9, m, 0.0, 0.05) == pytest.approx(0.9)


@given(st.floats(0.0, 2.0), st.floats(0.01, 5.0), st.floats(0.5, 1.0))
def test_predicted_matches_closed_form(kappa, frame, c0):
    m = AccuracyModel(decay=kappa)
    x = kappa * frame
    exact = c0 if x < 1e-12 else c0 * -math.expm1(-x) / x
    assert abs(frame_accuracy_predicted(c0, m, 0.0, frame) - exact) <= 1e-4


def test_predicted_with_offset():
    m = AccuracyModel(decay=0.5)
    t0, T = 2.0, 1.0
    exact = 0.9 * (math.exp(-0.5 * t0) - math.exp(-0.5 * (t0 + T))) / (0.5 * T)
    assert frame_accuracy_predicted(0.9, m, 0.0, T, t0=t0) == pytest.approx(exact, abs=1e-5)


def test_retrain_rule_strict():
    assert retrain_decision(0.84, 0.85) == 1
    assert retrain_decision(0.85, 0.85) == 0
    assert retrain_decision(0.9, 0.85) == 0


def test_tracker_closed_form():
    tr = PairCostTracker(1, 1, half_life=3.0)
    for x in (2.0, 2.0, 8.0):
        tr.update(0, 0, x)
    d = 0.5 ** (1 / 3)
    expected = (2 * d * d + 2 * d + 8) / (d * d + d + 1)
    assert tr.mean()[0, 0] == pytest.approx(expected)
    assert 2.0 < tr.mean()[0, 0] < 8.0
    assert tr.mean()[0, 0] > np.mean([2.0, 2.0, 8.0])


def test_tracker_fallback_for_unseen_pairs():
    tr = PairCostTracker(2, 2)
    tr.update(0, 1, 3.0)
    est = estimate_pair_costs(tr, np.full((2, 2), 7.0))
    assert est.tolist() == [[7.0, 3.0], [7.0, 7.0]]


def test_fallback_costs_grow_with_distance(cfg):
    c = fallback_pair_costs(cfg, np.array([[100.0, 300.0, 600.0]]), 3)
    assert np.all(np.diff(c[0]) > 0)
