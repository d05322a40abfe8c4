"""Exact simplex solver against hand solutions and a float reference."""
import random
from fractions import Fraction

import pytest

from arbor.lp import LpError, solve_lp


def test_simple_bounded_maximum():
    # min -x - y subject to x + y <= 1
    sol = solve_lp([-1, -1], [[1, 1]], [1], [], [])
    assert sol.value == Fraction(-1)
    assert sum(sol.x) == Fraction(1)


def test_equality_constraint():
    sol = solve_lp([1, 0], [], [], [[1, 1]], [1])
    assert sol.value == Fraction(0)
    assert sol.x == (Fraction(0), Fraction(1))


def test_mixed_constraints_exact_fraction():
    # min x + y with 3x + y >= 1 and x + 3y >= 1 (as <= rows with negation)
    sol = solve_lp([1, 1], [[-3, -1], [-1, -3]], [-1, -1], [], [])
    assert sol.value == Fraction(1, 2)
    assert sol.x == (Fraction(1, 4), Fraction(1, 4))


def test_negative_rhs_normalization():
    sol = solve_lp([1], [[-1]], [-2], [], [])  # x >= 2
    assert sol.value == Fraction(2)


def test_infeasible_raises():
    with pytest.raises(LpError, match="infeasible"):
        solve_lp([1], [[1]], [-1], [], [])  # x <= -1 with x >= 0


def test_unbounded_raises():
    with pytest.raises(LpError, match="unbounded"):
        solve_lp([-1], [], [], [], [])


def test_degenerate_program():
    # multiple constraints active at the optimum
    sol = solve_lp([-1, -1, -1],
                   [[1, 1, 0], [0, 1, 1], [1, 0, 1], [1, 1, 1]],
                   [1, 1, 1, Fraction(3, 2)], [], [])
    assert sol.value == Fraction(-3, 2)


def test_solution_satisfies_constraints_exactly():
    rng = random.Random(7)
    for trial in range(30):
        n = rng.randint(2, 5)
        m = rng.randint(1, 5)
        c = [rng.randint(-4, 4) for _ in range(n)]
        a = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
        b = [rng.randint(1, 6) for _ in range(m)]  # feasible at x = 0
        eq = [[1] * n]
        beq = [rng.randint(1, 3)]
        bound_row = [[1] * n]
        try:
            sol = solve_lp(c, a + bound_row, b + [10], eq, beq)
        except LpError:
            continue
        for row, rhs in zip(a + bound_row, b + [10]):
            lhs = sum(Fraction(v) * xi for v, xi in zip(row, sol.x))
            assert lhs <= rhs
        assert sum(sol.x) == beq[0]
        assert all(xi >= 0 for xi in sol.x)
        assert sol.value == sum(Fraction(v) * xi for v, xi in zip(c, sol.x))


def test_against_float_reference():
    scipy = pytest.importorskip("scipy.optimize")
    rng = random.Random(11)
    checked = 0
    for trial in range(40):
        n = rng.randint(2, 4)
        m = rng.randint(1, 4)
        c = [rng.randint(-5, 5) for _ in range(n)]
        a = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
        b = [rng.randint(0, 5) for _ in range(m)]
        a_cap = a + [[1] * n]
        b_cap = b + [8]
        ref = scipy.linprog(c, A_ub=a_cap, b_ub=b_cap, method="highs")
        try:
            sol = solve_lp(c, a_cap, b_cap, [], [])
        except LpError:
            assert not ref.success
            continue
        assert ref.success
        assert abs(float(sol.value) - ref.fun) < 1e-7
        checked += 1
    assert checked >= 20
