import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twinflow.config import AccuracyModel, simplex_grid
from twinflow.errors import AllZeroCounts, EmptyCandidateSet
from twinflow.oracles import kl_argmin_bruteforce
from twinflow.twin import (accuracy_curve, apply_retrain, dt_data_size, kl_divergence,
                           kl_to_candidates, observe_distribution,
                           optimal_generation_distribution)

probs = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6).map(lambda v: np.array(v) / sum(v))


def test_kl_basics():
    assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))
    assert math.isinf(kl_divergence([0.5, 0.5], [1.0, 0.0]))


@given(probs)
def test_kl_nonnegative_and_zero_on_self(p):
    assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-12)
    q = np.roll(p, 1)
    assert kl_divergence(p, q) >= -1e-12


@given(probs)
def test_vectorized_kl_matches_scalar(q):
    cand = np.array(simplex_grid(len(q), 0.25))
    vec = kl_to_candidates(cand, q)
    assert np.allclose(vec, [kl_divergence(p, q) for p in cand])


def test_argmin_exact_match_in_set():
    grid = simplex_grid(4)
    q = np.array([0.1, 0.2, 0.3, 0.4])
    idx, p = optimal_generation_distribution(q, grid)
    assert np.allclose(p, q)
    assert grid[idx] == pytest.approx(tuple(q))


def test_argmin_tie_goes_to_lowest_index():
    cand = [[0.3, 0.7], [0.7, 0.3]]
    assert optimal_generation_distribution([0.5, 0.5], cand)[0] == 0
    assert optimal_generation_distribution([0.5, 0.5], cand[::-1])[0] == 0


def test_argmin_empty_set():
    with pytest.raises(EmptyCandidateSet):
        optimal_generation_distribution([0.5, 0.5], np.zeros((0, 2)))


@given(probs, st.integers(1, 40), st.integers(0, 2**31 - 1))
def test_argmin_matches_bruteforce(q, count, seed):
    cand = np.random.default_rng(seed).dirichlet(np.ones(len(q)), count)
    assert optimal_generation_distribution(q, cand)[0] == kl_argmin_bruteforce(q, cand)


def test_dt_size_examples():
    b = dt_data_size(0.3, [0.25, 0.75], [3e6, 4e6])
    assert b.size == pytest.approx(1.5e6)
    assert np.allclose(b.per_class, [0.375e6, 1.125e6])
    assert dt_data_size(0.0, [1.0, 0.0], [3e6, 4e6]).size == 0.0


@given(st.floats(0, 2), st.lists(st.floats(0, 1e8), min_size=2, max_size=5))
def test_dt_size_scales_linearly(scale, bits):
    p = np.full(len(bits), 1 / len(bits))
    one = dt_data_size(1.0, p, bits).size
    assert dt_data_size(scale, p, bits).size == pytest.approx(scale * one, rel=1e-12, abs=1e-9)


def test_observe_distribution():
    q = observe_distribution([3.0, 1.0])
    assert q.sum() == pytest.approx(1.0)
    assert q[0] == pytest.approx(0.75, abs=1e-6)
    assert np.all(observe_distribution([5.0, 0.0]) > 0)
    with pytest.raises(AllZeroCounts):
        observe_distribution([0.0, 0.0])


def test_accuracy_curve_shape():
    m = AccuracyModel(decay=0.1, drift_sensitivity=0.5)
    assert accuracy_curve(0.9, m, 0.0, 0.0) == pytest.approx(0.9)
    assert accuracy_curve(0.9, m, 0.0, 10.0) == pytest.approx(0.9 * math.exp(-1.0))
    assert accuracy_curve(0.9, m, 0.2, 0.0) == pytest.approx(0.8)
    assert accuracy_curve(0.9, m, 10.0, 0.0) == 0.0


@given(st.floats(0, 1), st.floats(0, 5), st.floats(0, 100), st.floats(0, 100))
def test_accuracy_in_unit_interval_and_nonincreasing(c0, drift, t1, t2):
    m = AccuracyModel()
    a, b = sorted((t1, t2))
    ca, cb = accuracy_curve(c0, m, drift, a), accuracy_curve(c0, m, drift, b)
    assert 0.0 <= cb <= ca <= 1.0


def test_retrain_jump_and_cap():
    m = AccuracyModel(c_max=0.95, data_gain=0.04, ref_bits=1e8)
    acc, age = apply_retrain(0.8, 0.0, 1e8, m)
    assert acc == pytest.approx(0.8 + 0.04 * math.log(2))
    assert age == 0.0
    assert apply_retrain(0.94, 1e12, 1e12, m)[0] == 0.95
    assert apply_retrain(0.8, 0.0, 0.0, m)[0] == 0.8


@given(st.floats(0, 0.95), st.floats(0, 1e10), st.floats(0, 1e10))
def test_more_generated_data_never_hurts(base, real, extra):
    m = AccuracyModel()
    assert apply_retrain(base, extra, real, m)[0] >= apply_retrain(base, 0.0, real, m)[0]
