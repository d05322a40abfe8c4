"""Exact rational linear programming by a dense two-phase simplex.

All arithmetic is over fractions (gmpy2.mpq when available, else
fractions.Fraction), so reported optima are exact rationals, not floats.
Pivoting uses Dantzig's rule with a switch to Bland's rule after a fixed
number of pivots, which guarantees termination.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

try:
    from gmpy2 import mpq as _RAT
except ImportError:
    _RAT = Fraction

_ZERO = _RAT(0)
_ONE = _RAT(1)


class LpError(RuntimeError):
    """Raised for infeasible or unbounded programs, or pivot exhaustion."""


@dataclass(frozen=True)
class LpSolution:
    """An optimal vertex: exact objective value and variable assignment."""

    value: Fraction
    x: tuple[Fraction, ...]


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    """rows x (cols+1) dense tableau; last column is the right-hand side."""

    def __init__(self, nrows: int, ncols: int) -> None:
        self.m = nrows
        self.n = ncols
        self.a = [[_ZERO] * (ncols + 1) for _ in range(nrows)]
        self.basis = [-1] * nrows

    def pivot(self, row: int, col: int) -> None:
        piv = self.a[row][col]
        if piv == 0:
            raise LpError("zero pivot")
        inv = _ONE / piv
        self.a[row] = [v * inv for v in self.a[row]]
        prow = self.a[row]
        for r in range(self.m):
            if r == row:
                continue
            factor = self.a[r][col]
            if factor != 0:
                arow = self.a[r]
                self.a[r] = [arow[k] - factor * prow[k]
                             for k in range(self.n + 1)]
        self.basis[row] = col


def _price_out(tab: _Tableau, cost: list) -> list:
    """Reduced-cost row for the current basis, including the objective cell."""
    red = list(cost) + [_ZERO]
    for r, b in enumerate(tab.basis):
        cb = cost[b]
        if cb != 0:
            row = tab.a[r]
            for k in range(tab.n + 1):
                red[k] = red[k] - cb * row[k]
    return red


def _simplex_loop(tab: _Tableau, cost: list, allowed: Sequence[bool],
                  max_pivots: int, bland_after: int) -> list:
    red = _price_out(tab, cost)
    pivots = 0
    while True:
        enter = -1
        use_bland = pivots >= bland_after
        if use_bland:
            for j in range(tab.n):
                if allowed[j] and red[j] < 0:
                    enter = j
                    break
        else:
            best = _ZERO
            for j in range(tab.n):
                if allowed[j] and red[j] < best:
                    best = red[j]
                    enter = j
        if enter < 0:
            return red
        leave = -1
        best_ratio = None
        for r in range(tab.m):
            coef = tab.a[r][enter]
            if coef > 0:
                ratio = tab.a[r][tab.n] / coef
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio
                            and tab.basis[r] < tab.basis[leave])):
                    best_ratio = ratio
                    leave = r
        if leave < 0:
            raise LpError("unbounded objective")
        tab.pivot(leave, enter)
        # update reduced costs for the new basis
        factor = red[enter]
        if factor != 0:
            prow = tab.a[leave]
            red = [red[k] - factor * prow[k] for k in range(tab.n + 1)]
        pivots += 1
        if pivots > max_pivots:
            raise LpError(f"pivot budget {max_pivots} exhausted")


def solve_lp(c: Sequence, a_ub: Sequence[Sequence], b_ub: Sequence,
             a_eq: Sequence[Sequence], b_eq: Sequence,
             max_pivots: int = 50_000, bland_after: int = 2_000) -> LpSolution:
    """Minimize c.x subject to a_ub.x <= b_ub, a_eq.x = b_eq, x >= 0."""
    n = len(c)
    rows = []
    is_eq = []
    for row, b in zip(a_ub, b_ub):
        if len(row) != n:
            raise LpError("inequality row has wrong width")
        rows.append((list(row), b, False))
    for row, b in zip(a_eq, b_eq):
        if len(row) != n:
            raise LpError("equality row has wrong width")
        rows.append((list(row), b, True))
    m = len(rows)

    n_slack = sum(1 for _, _, eq in rows if not eq)
    total = n + n_slack + m  # artificials for every row keep phase 1 uniform
    tab = _Tableau(m, total)
    slack_i = 0
    for r, (row, b, eq) in enumerate(rows):
        coefs = [_RAT(v) for v in row]
        b = _RAT(b)
        sign = _ONE
        if b < 0:
            coefs = [-v for v in coefs]
            b = -b
            sign = -_ONE
        for j in range(n):
            tab.a[r][j] = coefs[j]
        if not eq:
            tab.a[r][n + slack_i] = sign
            slack_i += 1
        tab.a[r][n + n_slack + r] = _ONE
        tab.a[r][total] = b
        tab.basis[r] = n + n_slack + r

    phase1 = [_ZERO] * (n + n_slack) + [_ONE] * m
    allowed = [True] * total
    red = _simplex_loop(tab, phase1, allowed, max_pivots, bland_after)
    if -red[total] > 0:
        raise LpError("infeasible constraints")

    # drive leftover artificial variables out of the basis
    for r in range(tab.m):
        if tab.basis[r] >= n + n_slack:
            for j in range(n + n_slack):
                if tab.a[r][j] != 0:
                    tab.pivot(r, j)
                    break
    for j in range(n + n_slack, total):
        allowed[j] = False

    phase2 = [_RAT(v) for v in c] + [_ZERO] * (n_slack + m)
    red = _simplex_loop(tab, phase2, allowed, max_pivots, bland_after)

    x = [_ZERO] * n
    for r, b in enumerate(tab.basis):
        if b < n:
            x[b] = tab.a[r][tab.n]
    value = sum((_RAT(ci) * xi for ci, xi in zip(c, x)), _ZERO)
    return LpSolution(_to_fraction(value), tuple(_to_fraction(v) for v in x))
