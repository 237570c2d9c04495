"""Regime labels and the named equilibria built on top of the optimizer."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .model import (
    INF,
    ONE,
    AcceptanceSet,
    Experiment,
    MarketParams,
    Menu,
    ModelError,
    Signal,
    zero_menu,
)
from .obedience import WelfareAccount, menu_revenue, receiver_payoff, welfare
from .optimizer import (
    TIE_MOST_RENT,
    SolveResult,
    complete_experiment,
    solve_revenue_max,
)

REGIME_LABELS = (
    "separating",
    "kg-pooling",
    "partial-pooling",
    "bad-news",
    "degenerate",
    "uninformative",
    "no-trade",
)

MUST_SEPARATE = "must-separate"
MAY_SEPARATE = "may-separate"
CANNOT_SEPARATE = "cannot-separate"


def label_regime(menu: Menu, E: AcceptanceSet, revenue: Fraction) -> str:
    """Assign exactly one regime label to a menu.

    Rules are checked in order, first match wins.  "kg-pooling" covers any
    menu where both types share accepted support and no bad-news signal is
    used, which includes the KG menu itself.
    """
    if len(E) == 0:
        return "no-trade"
    if revenue == 0:
        return "degenerate"
    high = menu.high_option.experiment
    low = menu.low_option.experiment
    supp_h = {e for e in E if high.mass_h(e) > 0}
    supp_l = {e for e in E if low.mass_h(e) > 0}
    if ONE in E and (ONE in supp_h or ONE in supp_l):
        return "uninformative"
    if not supp_l:
        return "separating"
    if supp_h and supp_l < supp_h:
        return "partial-pooling"
    if any(e < 1 for e in supp_l):
        return "bad-news"
    return "kg-pooling"


def classify(r: SolveResult, E: AcceptanceSet) -> str:
    return label_regime(r.menu, E, r.revenue)


def separating_threshold(E: AcceptanceSet, p: MarketParams) -> str:
    if len(E) == 0:
        raise ModelError("acceptance set is empty")
    lowest = E.infimum
    cutoff = Signal(1 / p.mu)
    if lowest > cutoff:
        return MUST_SEPARATE
    if lowest == cutoff:
        return MAY_SEPARATE
    return CANNOT_SEPARATE


def naive_grid(p: MarketParams, grid_size: int, ratio: Fraction = Fraction(3, 2)) -> AcceptanceSet:
    """Geometric grid from 1/l(mu) upward, plus infinity."""
    if grid_size < 1:
        raise ModelError("grid_size must be positive")
    start = 1 / p.l_mu
    points = [Signal(start * ratio**k) for k in range(grid_size)]
    return AcceptanceSet(tuple(points) + (INF,))


def naive_receiver_solve(p: MarketParams, grid_size: int = 8) -> SolveResult:
    """Optimal menu when the receiver accepts every signal at or above 1/l(mu).

    The continuum of accepted signals is approximated by a geometric grid;
    the answer is recomputed on a grid twice as long and must keep its label.
    """
    p.require_pessimistic()
    result = solve_revenue_max(naive_grid(p, grid_size), p)
    finer = solve_revenue_max(naive_grid(p, 2 * grid_size), p)
    if finer.regime != result.regime or finer.revenue != result.revenue:
        raise AssertionError("naive-receiver regime changed under grid refinement")
    separating = p.mu <= 2 - 1 / p.pi_star
    if result.separating != separating:
        raise AssertionError("naive-receiver regime contradicts the separation cutoff")
    if not separating:
        atom = p.indifference_signal
        kg = kg_menu(p)
        if (
            result.menu.high_option.experiment != kg
            or result.menu.low_option.experiment != kg
            or result.menu.high_option.price != p.l_mu
            or result.menu.low_option.price != p.l_mu
        ):
            raise AssertionError(f"pooling optimum is not the KG menu at {atom}")
    return result


def singleton_rents(p: MarketParams, candidates: Iterable, tie_break: str = TIE_MOST_RENT) -> dict[Signal, Fraction]:
    """High-type rent at the optimum for each singleton acceptance set."""
    out = {}
    for raw in candidates:
        e = Signal.of(raw)
        out[e] = solve_revenue_max(AcceptanceSet((e,)), p, tie_break=tie_break).rent_high
    return out


def sender_optimal_search(p: MarketParams, candidate_infima: Sequence) -> tuple[AcceptanceSet, Fraction]:
    """Singleton acceptance set giving the high type the largest rent.

    Where the certifier is indifferent between menus the one with the most
    rent is used, since that is the sender's preferred equilibrium.
    """
    if not candidate_infima:
        raise ModelError("no candidate signals given")
    p.require_pessimistic()
    cutoff = Signal(1 / p.mu)
    signals = [Signal.of(c) for c in candidate_infima]
    if cutoff not in signals:
        raise ModelError("candidates must include 1/mu")
    rents = singleton_rents(p, signals)
    best = max(rents.values())
    best_signal = min(e for e, r in rents.items() if r == best)
    expected = 1 - p.mu if p.l_mu > p.mu else p.l_mu * (1 - p.mu) / p.mu
    if best_signal != cutoff or best != expected:
        raise AssertionError(f"rent peaks at {best_signal} with {best}, expected {cutoff} with {expected}")
    return AcceptanceSet((best_signal,)), best


def kg_menu(p: MarketParams) -> Experiment:
    p.require_pessimistic()
    return Experiment({p.indifference_signal: Fraction(1)})


def certifier_optimal_uninformative(p: MarketParams, allow_uninformative: bool = True) -> tuple[Menu, AcceptanceSet]:
    """Menu where the receiver accepts the uninformative signal 1."""
    if not allow_uninformative:
        raise ModelError("uninformative acceptance sets require allow_uninformative")
    p.require_pessimistic()
    E = AcceptanceSet((ONE,), allow_uninformative=True)
    high = Experiment({ONE: 1})
    low = complete_experiment({ONE: p.l_mu}, E)
    return Menu.build(high, 1, low, p.l_mu), E


@dataclass(frozen=True)
class OptimisticOutcome:
    name: str
    menu: Menu
    E: AcceptanceSet
    phi_accepted: bool
    revenue: Fraction
    receiver_payoff: Fraction | None
    account: WelfareAccount | None = None


def optimistic_receiver_outcomes(p: MarketParams) -> tuple[OptimisticOutcome, OptimisticOutcome]:
    """The two outcomes when the receiver accepts on the prior alone.

    Either nobody certifies and the receiver accepts Phi, or both types buy
    the uninformative experiment at price one.
    """
    if p.pessimistic:
        raise ModelError("requires mu >= pi_star")
    prior_payoff = receiver_payoff(p, Fraction(1), Fraction(1))
    no_trade = OptimisticOutcome(
        name="no-trade",
        menu=zero_menu(),
        E=AcceptanceSet(()),
        phi_accepted=True,
        revenue=Fraction(0),
        receiver_payoff=prior_payoff,
    )
    E = AcceptanceSet((ONE,), allow_uninformative=True)
    flat = Experiment({ONE: 1})
    menu = Menu.build(flat, 1, flat, 1)
    account = welfare(menu, E, p)
    uninformative = OptimisticOutcome(
        name="uninformative",
        menu=menu,
        E=E,
        phi_accepted=False,
        revenue=menu_revenue(menu, p),
        receiver_payoff=account.receiver_payoff,
        account=account,
    )
    return no_trade, uninformative
