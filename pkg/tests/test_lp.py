import numpy as np
import pytest
from hypothesis import given, strategies as st

from twinflow.errors import DimensionMismatch, InfeasibleFixing
from twinflow.lp import LpProblem, LpStatus, simplex_solve, solve_with_fixed
from twinflow.oracles import box_rows, lp_vertex_optimum, random_bounded_lp


def test_textbook_max():
    # max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
    prob = LpProblem([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18], ["<="] * 3, maximize=True)
    sol = simplex_solve(prob)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective == pytest.approx(36.0)
    assert np.allclose(sol.x, [2, 6])


def test_equality_and_ge_rows():
    prob = LpProblem([1, 1], [[1, 2], [1, -1]], [4, 1], ["=", ">="])
    sol = simplex_solve(prob)
    # min x + y on x + 2y = 4, x - y >= 1 -> (2, 1)
    assert sol.objective == pytest.approx(3.0)
    assert np.allclose(sol.x, [2, 1])


def test_infeasible_and_unbounded():
    assert simplex_solve(LpProblem([1], [[1], [1]], [1, 2], ["<=", ">="])).status is LpStatus.INFEASIBLE
    assert simplex_solve(LpProblem([-1, 0], [[1, -1]], [1], ["<="])).status is LpStatus.UNBOUNDED


def test_free_and_bounded_variables():
    prob = LpProblem([1, 0], [[1, 1]], [-3], [">="], lo=[-np.inf, -2], hi=[np.inf, 1])
    sol = simplex_solve(prob)
    assert sol.objective == pytest.approx(-4.0)


def test_beale_cycling_example_terminates():
    # classic degenerate instance that cycles under the largest-coefficient rule
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    sol = simplex_solve(LpProblem(c, A, [0, 0, 1], ["<="] * 3))
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective == pytest.approx(-0.05)


def test_degenerate_vertex_terminates():
    A = [[1, 1], [1, 0], [0, 1], [1, 1]]
    sol = simplex_solve(LpProblem([-1, -1], A, [1, 1, 1, 1], ["<="] * 4))
    assert sol.objective == pytest.approx(-1.0)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        LpProblem([1, 2], [[1, 2]], [1, 2], ["<="])


def test_fixing():
    prob = LpProblem([-1, -1], [[1, 1]], [1.5], ["<="], hi=[1, 1])
    sol = solve_with_fixed(prob, {0: 1.0})
    assert sol.x[0] == 1.0 and sol.objective == pytest.approx(-1.5)
    with pytest.raises(InfeasibleFixing):
        solve_with_fixed(prob, {0: 2.0})
    with pytest.raises(InfeasibleFixing):
        solve_with_fixed(prob, {7: 0.0})


@given(st.integers(0, 2**31 - 1))
def test_random_lp_matches_vertex_enumeration(seed):
    c, A, b, box = random_bounded_lp(np.random.default_rng(seed))
    sol = simplex_solve(LpProblem(c, A, b, ["<="] * len(b), None, np.full(c.size, box)))
    ref, _ = lp_vertex_optimum(c, *box_rows(A, b, box))
    if ref is None:
        assert sol.status is LpStatus.INFEASIBLE
    else:
        assert sol.optimal and abs(sol.objective - ref) <= 1e-7


@given(st.integers(0, 2**31 - 1))
def test_solution_is_feasible(seed):
    c, A, b, box = random_bounded_lp(np.random.default_rng(seed))
    sol = simplex_solve(LpProblem(c, A, b, ["<="] * len(b), None, np.full(c.size, box)))
    if sol.optimal:
        assert np.all(A @ sol.x <= b + 1e-7)
        assert np.all((sol.x >= -1e-9) & (sol.x <= box + 1e-9))
