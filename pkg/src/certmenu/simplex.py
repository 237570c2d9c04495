"""Exact rational simplex for  max c.z  s.t.  A z <= b, z >= 0, b >= 0.

Because b >= 0 the all-slack basis is feasible, so no phase one is needed.
Several objectives may be given; they are optimized lexicographically: once
objective k is optimal, columns with negative reduced cost for k are frozen
out and the next objective is optimized over the remaining face.
Entering and leaving variables follow Bland's rule, so the result is a
deterministic function of the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class UnboundedError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LpSolution:
    values: tuple[Fraction, ...]
    objectives: tuple[Fraction, ...]
    basis: tuple[int, ...]
    pivots: int

    @property
    def objective(self) -> Fraction:
        return self.objectives[0]


def maximize(objectives: Sequence[Sequence], A: Sequence[Sequence], b: Sequence) -> LpSolution:
    if not objectives:
        raise ValueError("at least one objective is required")
    m = len(A)
    n = len(objectives[0])
    if any(len(row) != n for row in A) or any(len(c) != n for c in objectives):
        raise ValueError("dimension mismatch between objective and constraint rows")
    if len(b) != m:
        raise ValueError("right-hand side length does not match row count")
    if any(Fraction(v) < 0 for v in b):
        raise ValueError("right-hand sides must be nonnegative")

    width = n + m
    # tableau rows: [A | I | b]
    rows = []
    for i in range(m):
        row = [Fraction(v) for v in A[i]] + [Fraction(0)] * m + [Fraction(b[i])]
        row[n + i] = Fraction(1)
        rows.append(row)
    basis = list(range(n, n + m))
    # reduced cost rows; last entry holds minus the objective value
    costs = [[Fraction(v) for v in c] + [Fraction(0)] * (m + 1) for c in objectives]

    allowed = [True] * width
    pivots = 0
    for k in range(len(costs)):
        cost = costs[k]
        while True:
            entering = next((j for j in range(width) if allowed[j] and cost[j] > 0), None)
            if entering is None:
                break
            leaving = None
            best = None
            for i in range(m):
                a = rows[i][entering]
                if a > 0:
                    ratio = rows[i][-1] / a
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                        best, leaving = ratio, i
            if leaving is None:
                raise UnboundedError(f"objective {k} is unbounded")
            _pivot(rows, costs, leaving, entering)
            basis[leaving] = entering
            pivots += 1
        for j in range(width):
            if cost[j] < 0:
                allowed[j] = False

    values = [Fraction(0)] * width
    for i, j in enumerate(basis):
        values[j] = rows[i][-1]
    return LpSolution(
        values=tuple(values[:n]),
        objectives=tuple(-c[-1] for c in costs),
        basis=tuple(basis),
        pivots=pivots,
    )


def _pivot(rows, costs, r, s):
    pivot_row = rows[r]
    inv = 1 / pivot_row[s]
    if inv != 1:
        rows[r] = pivot_row = [v * inv for v in pivot_row]
    nz = [j for j, v in enumerate(pivot_row) if v != 0]
    for target in (rows, costs):
        for i, row in enumerate(target):
            if target is rows and i == r:
                continue
            f = row[s]
            if f != 0:
                for j in nz:
                    row[j] -= f * pivot_row[j]
