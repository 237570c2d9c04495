"""Brute-force ground truth for the optimizer.

Two oracles that share nothing with the simplex:

* a grid search over masses on the 1/N lattice, rebuilt from the model
  primitives rather than from the LP rows, giving a lower bound;
* exact enumeration of the basic feasible solutions of the LP rows using
  fraction-free integer elimination.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import chain, combinations, product
from math import lcm

import numpy as np

from .model import AcceptanceSet, MarketParams, Menu, ModelError, ReceiverUtilities, Signal

GRID_MAX_SIGNALS = 3
VERTEX_MAX_SIGNALS = 6


@dataclass(frozen=True)
class GridSpec:
    resolution: int
    seed: int = 0
    signal_bounds: tuple[Fraction, Fraction] = (Fraction(1, 10), Fraction(10))

    def __post_init__(self):
        if self.resolution < 8:
            raise ModelError("grid resolution must be at least 8")
        lo, hi = (Fraction(b) for b in self.signal_bounds)
        if not 0 < lo < hi:
            raise ModelError("signal bounds must satisfy 0 < min < max")


@dataclass(frozen=True)
class GridOptimum:
    x: dict
    y: dict
    objective: Fraction
    resolution: int


def _lattice(k: int, n: int) -> np.ndarray:
    """All integer k-vectors with entries >= 0 summing to at most n, in lex order."""
    pts = [v for v in product(range(n + 1), repeat=k) if sum(v) <= n]
    return np.array(pts, dtype=np.int64).reshape(len(pts), k)


def grid_search_menus(E: AcceptanceSet, p: MarketParams, g: GridSpec, chunk: int = 256) -> GridOptimum:
    """Best menu whose accepted masses are multiples of 1/N.

    Constraints are derived directly from the primitives: each option's
    accepted mass under both states is at most one, the low type's accepted
    low-state mass at e is at most l(mu) times the high type's accepted
    high-state mass at e, high-type IC, and nonnegative high-type rent.
    """
    if len(E) > GRID_MAX_SIGNALS:
        raise ModelError(f"grid oracle handles at most {GRID_MAX_SIGNALS} signals")
    if len(E) == 0:
        raise ModelError("acceptance set is empty")
    n = g.resolution
    sig = list(E.signals)
    k = len(sig)
    inv = [Fraction(0) if e.is_inf else 1 / e.value for e in sig]
    scale = lcm(*(w.denominator for w in inv))
    w = np.array([int(v * scale) for v in inv], dtype=np.int64)  # scale/e
    t = scale - w  # scale*(1 - 1/e)
    l_num, l_den = p.l_mu.numerator, p.l_mu.denominator
    mu_num, mu_den = p.mu.numerator, p.mu.denominator
    # obedience: ky*(1/e) <= l*kx  <=>  ky*a*l_den <= l_num*b*kx with 1/e = a/b
    ob_y = np.array([v.numerator * l_den for v in inv], dtype=np.int64)
    ob_x = np.array([l_num * v.denominator for v in inv], dtype=np.int64)
    # objective scaled by n*scale*mu_den
    cx = mu_num * scale
    cy = w * mu_den - mu_num * scale

    lat = _lattice(k, n)
    low_ok = lat @ w <= n * scale
    X = lat[low_ok]
    Y = lat[low_ok & (lat @ t >= 0)]
    y_rent = Y @ t
    y_obj = Y @ cy
    y_ob = Y * ob_y

    best_val = None
    best_pair = None
    for start in range(0, len(X), chunk):
        xs = X[start : start + chunk]
        ok = (xs @ t)[:, None] >= y_rent[None, :]
        for i in range(k):
            ok &= y_ob[None, :, i] <= (xs[:, i] * ob_x[i])[:, None]
        if not ok.any():
            continue
        val = (xs.sum(axis=1) * cx)[:, None] + y_obj[None, :]
        val = np.where(ok, val, np.iinfo(np.int64).min)
        flat = int(np.argmax(val))
        v = int(val.flat[flat])
        if best_val is None or v > best_val:
            best_val = v
            best_pair = (start + flat // len(Y), flat % len(Y))
    xi, yi = best_pair
    x = {e: Fraction(int(X[xi, j]), n) for j, e in enumerate(sig)}
    y = {e: Fraction(int(Y[yi, j]), n) for j, e in enumerate(sig)}
    return GridOptimum(x, y, Fraction(best_val, n * scale * mu_den), n)


# -- vertex enumeration -----------------------------------------------------


def _integer_row(row, bound) -> tuple[list[int], int]:
    den = lcm(*(Fraction(v).denominator for v in chain(row, [bound])))
    return [int(Fraction(v) * den) for v in row], int(Fraction(bound) * den)


def _solve_square(matrix: list[list[int]], rhs: list[int]):
    """Fraction-free Gauss-Jordan; returns (numerators, det) or None if singular."""
    n = len(matrix)
    a = [row[:] + [r] for row, r in zip(matrix, rhs)]
    prev = 1
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return None
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
        pivot_row = a[col]
        akk = pivot_row[col]
        for i in range(n):
            if i == col:
                continue
            row = a[i]
            aik = row[col]
            for j in range(n + 1):
                if j != col:
                    q, rem = divmod(akk * row[j] - aik * pivot_row[j], prev)
                    if rem:
                        raise ArithmeticError("inexact fraction-free division")
                    row[j] = q
            row[col] = 0
        prev = akk
    if prev < 0:
        return [-a[i][n] for i in range(n)], -prev
    return [a[i][n] for i in range(n)], prev


def enumerate_vertices(objective, rows, rhs) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """All basic feasible solutions of {z >= 0, rows.z <= rhs} with their objective values."""
    n = len(objective)
    int_rows = [_integer_row(r, b) for r, b in zip(rows, rhs)]
    m = len(int_rows)
    found: dict[tuple[Fraction, ...], Fraction] = {}
    for n_zero in range(n, -1, -1):
        n_tight = n - n_zero
        if n_tight > m:
            continue
        for zero in combinations(range(n), n_zero):
            free = [j for j in range(n) if j not in zero]
            for tight in combinations(range(m), n_tight):
                if n_tight == 0:
                    nums, det = [], 1
                else:
                    solved = _solve_square(
                        [[int_rows[r][0][j] for j in free] for r in tight],
                        [int_rows[r][1] for r in tight],
                    )
                    if solved is None:
                        continue
                    nums, det = solved
                if any(v < 0 for v in nums):
                    continue
                full = [0] * n
                for j, v in zip(free, nums):
                    full[j] = v
                if any(sum(c * v for c, v in zip(coeffs, full)) > bound * det for coeffs, bound in int_rows):
                    continue
                point = tuple(Fraction(v, det) for v in full)
                if point not in found:
                    found[point] = sum((Fraction(c) * v for c, v in zip(objective, point)), Fraction(0))
    return list(found.items())


def vertex_enumerate(lp) -> tuple[Fraction, tuple[Fraction, ...]]:
    """Exact optimum of an LpInstance by exhaustive basis enumeration (|E| <= 6)."""
    if len(lp.signals) > VERTEX_MAX_SIGNALS:
        raise ModelError(f"vertex enumeration handles at most {VERTEX_MAX_SIGNALS} signals")
    vertices = enumerate_vertices(lp.objective, lp.rows, lp.rhs)
    best = max(v for _, v in vertices)
    point = min(pt for pt, v in vertices if v == best)
    return best, point


def optimal_vertices(lp) -> list[tuple[Fraction, ...]]:
    if len(lp.signals) > VERTEX_MAX_SIGNALS:
        raise ModelError(f"vertex enumeration handles at most {VERTEX_MAX_SIGNALS} signals")
    vertices = enumerate_vertices(lp.objective, lp.rows, lp.rhs)
    best = max(v for _, v in vertices)
    return sorted(pt for pt, v in vertices if v == best)


# -- instances and subset checks --------------------------------------------

_DENOMINATORS = (1, 2, 3, 4, 5, 8, 10)


def _signal_pool(lo: Fraction, hi: Fraction) -> list[Fraction]:
    pool = set()
    for q in _DENOMINATORS:
        for num in range(1, int(hi * q) + 1):
            v = Fraction(num, q)
            if lo <= v <= hi and v != 1:
                pool.add(v)
    return sorted(pool)


def random_instance(seed, bounds=(Fraction(1, 10), Fraction(10)), max_signals: int = GRID_MAX_SIGNALS):
    """Deterministic (E, params) with mu < pi_star and 1 to max_signals signals."""
    rng = random.Random(seed)
    lo, hi = Fraction(bounds[0]), Fraction(bounds[1])
    pool = _signal_pool(lo, hi)
    size = rng.randint(1, max_signals)
    signals = rng.sample(pool, size)
    pi_star = Fraction(rng.randint(2, 19), 20)
    mu = Fraction(rng.randint(1, int(pi_star * 40) - 1), 40)
    params = MarketParams(mu, utilities=ReceiverUtilities.for_threshold(pi_star))
    return AcceptanceSet(tuple(Signal(v) for v in signals)), params


def obedience_by_subsets(menu: Menu, E: AcceptanceSet, p: MarketParams) -> bool:
    """Receiver obedience checked on every nonempty subset of accepted signals."""
    high = menu.high_option.experiment
    low = menu.low_option.experiment
    sig = list(E.signals)
    for size in range(1, len(sig) + 1):
        for subset in combinations(sig, size):
            low_mass = sum((low.mass_l(e) for e in subset), Fraction(0))
            high_mass = sum((high.mass_h(e) for e in subset), Fraction(0))
            if low_mass > p.l_mu * high_mass:
                return False
    return True
