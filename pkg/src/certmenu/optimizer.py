"""Revenue-maximizing menus for a fixed acceptance set.

The menu problem reduces to a linear program over the accepted state-h
masses of the two experiments: ``x[e]`` for the option meant for the high
type and ``y[e]`` for the option meant for the low type.  Everything else
(prices, off-set residual mass) is recovered from an optimal ``(x, y)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping

from .model import (
    INF,
    ONE,
    AcceptanceSet,
    Experiment,
    MarketParams,
    Menu,
    ModelError,
    Signal,
    format_fraction,
    zero_menu,
)
from .obedience import WelfareAccount, welfare
from .simplex import maximize

SOLVER_PATHS = ("lp", "closed-form", "support-enum")

# secondary objectives used to pick one vertex among revenue-optimal menus
TIE_LEAST_POOLING = "least-pooling"  # minimize low-type accepted mass (prefers separation)
TIE_MOST_RENT = "most-rent"  # maximize the high type's rent (sender-preferred optimum)
TIE_BREAKS = (TIE_LEAST_POOLING, TIE_MOST_RENT)


class ConditionsNotMet(ModelError):
    """A closed-form construction was asked for outside its domain."""


def tilt(e: Signal) -> Fraction:
    """1 - 1/e, the per-unit information rent of accepted mass at e."""
    return 1 - e.inverse


@dataclass(frozen=True)
class LpInstance:
    signals: tuple[Signal, ...]
    objective: tuple[Fraction, ...]
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    row_labels: tuple[str, ...]

    @property
    def n_vars(self) -> int:
        return 2 * len(self.signals)

    def variable_names(self) -> list[str]:
        return [f"x[{e}]" for e in self.signals] + [f"y[{e}]" for e in self.signals]

    def split(self, values) -> tuple[dict[Signal, Fraction], dict[Signal, Fraction]]:
        k = len(self.signals)
        x = {e: Fraction(v) for e, v in zip(self.signals, values[:k])}
        y = {e: Fraction(v) for e, v in zip(self.signals, values[k:])}
        return x, y

    def value(self, values) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, values)), Fraction(0))

    def is_feasible(self, values) -> bool:
        if any(v < 0 for v in values):
            return False
        for row, bound in zip(self.rows, self.rhs):
            if sum((a * v for a, v in zip(row, values)), Fraction(0)) > bound:
                return False
        return True


def build_lp(E: AcceptanceSet, p: MarketParams) -> LpInstance:
    if len(E) == 0:
        raise ModelError("acceptance set is empty")
    if any(e.value == 0 for e in E):
        raise ModelError("acceptance set contains 0")
    sig = E.signals
    k = len(sig)
    inv = [e.inverse for e in sig]
    zeros = [Fraction(0)] * k
    mu, l = p.mu, p.l_mu

    objective = tuple([mu] * k + [w - mu for w in inv])
    rows, labels = [], []

    def add(label, x_part, y_part):
        labels.append(label)
        rows.append(tuple(Fraction(v) for v in list(x_part) + list(y_part)))

    add("high option mass", [1] * k, zeros)
    add("high option low-state mass", inv, zeros)
    add("low option mass", zeros, [1] * k)
    add("low option low-state mass", zeros, inv)
    for i, e in enumerate(sig):
        x_part, y_part = list(zeros), list(zeros)
        x_part[i] = -l
        y_part[i] = inv[i]
        add(f"obedience at {e}", x_part, y_part)
    t = [1 - w for w in inv]
    add("monotonicity", [-v for v in t], t)
    add("nonnegative rent", zeros, [-v for v in t])
    rhs = tuple(Fraction(v) for v in [1, 1, 1, 1] + [0] * k + [0, 0])
    return LpInstance(sig, objective, tuple(rows), rhs, tuple(labels))


def _tie_objective(lp: LpInstance, tie_break: str) -> tuple[Fraction, ...]:
    k = len(lp.signals)
    if tie_break == TIE_LEAST_POOLING:
        return tuple([Fraction(0)] * k + [Fraction(-1)] * k)
    if tie_break == TIE_MOST_RENT:
        return tuple([Fraction(0)] * k + [tilt(e) for e in lp.signals])
    raise ValueError(f"unknown tie break {tie_break!r}")


def solve_lp(lp: LpInstance, tie_break: str = TIE_LEAST_POOLING):
    """Exact optimal vertex as (x, y, objective)."""
    sol = maximize([lp.objective, _tie_objective(lp, tie_break)], lp.rows, lp.rhs)
    x, y = lp.split(sol.values)
    return x, y, sol.objective


def recover_prices(x: Mapping, y: Mapping, E: AcceptanceSet, p: MarketParams) -> tuple[Fraction, Fraction]:
    rent = sum((tilt(e) * y.get(e, 0) for e in E), Fraction(0))
    price_h = sum((x.get(e, 0) for e in E), Fraction(0)) - rent
    price_l = sum((y.get(e, 0) * e.inverse for e in E), Fraction(0))
    return price_h, price_l


def high_rent(y: Mapping, E: AcceptanceSet) -> Fraction:
    return sum((tilt(e) * y.get(e, 0) for e in E), Fraction(0))


def _spare_signal(E: AcceptanceSet) -> Signal:
    """A signal above 1 outside E, used to park residual mass."""
    if INF not in E:
        return INF
    finite = [e.value for e in E if not e.is_inf]
    return Signal(max(finite + [Fraction(1)]) + 1)


def complete_experiment(masses: Mapping, E: AcceptanceSet) -> Experiment:
    """Turn accepted masses into a full experiment by adding rejected residual mass.

    The state-h residual goes to e=1 together with an equal state-l amount;
    any leftover state-l mass sits at e=0.  If 1 is itself accepted the
    state-h residual is parked at infinity (or another rejected signal > 1).
    An all-zero input yields the empty experiment.
    """
    atoms = {Signal.of(e): Fraction(m) for e, m in masses.items() if m != 0}
    if not atoms:
        return Experiment.phi()
    rest_h = 1 - sum(atoms.values())
    rest_l = 1 - sum(m * e.inverse for e, m in atoms.items())
    if rest_h < 0 or rest_l < 0:
        raise ModelError("accepted masses exceed one")
    if rest_h > rest_l:
        raise ModelError("accepted masses favour the low state; residual cannot be placed")
    if rest_h > 0:
        park = ONE if ONE not in E else _spare_signal(E)
        atoms[park] = atoms.get(park, Fraction(0)) + rest_h
    return Experiment(atoms)


def materialize_menu(x: Mapping, y: Mapping, E: AcceptanceSet, p: MarketParams) -> Menu:
    price_h, price_l = recover_prices(x, y, E, p)
    high = complete_experiment(x, E)
    low = complete_experiment(y, E)
    if high.is_phi and low.is_phi:
        return zero_menu()
    return Menu.build(high, price_h, low, price_l)


@dataclass(frozen=True)
class SolveResult:
    E: AcceptanceSet
    params: MarketParams
    menu: Menu
    welfare: WelfareAccount
    regime: str
    solver_path: str
    certificate: Fraction
    x: dict = field(default_factory=dict, compare=False)
    y: dict = field(default_factory=dict, compare=False)
    alternates: tuple = field(default=(), compare=False)

    @property
    def revenue(self) -> Fraction:
        return self.welfare.revenue

    @property
    def rent_high(self) -> Fraction:
        return self.welfare.rent_high

    @property
    def separating(self) -> bool:
        return self.regime == "separating"

    def to_dict(self) -> dict:
        out = {
            "acceptance": self.E.to_list(),
            "mu": format_fraction(self.params.mu),
            "pi_star": format_fraction(self.params.pi_star),
            "menu": self.menu.to_dict(),
            "revenue": format_fraction(self.welfare.revenue),
            "rent_high": format_fraction(self.welfare.rent_high),
            "rent_low": format_fraction(self.welfare.rent_low),
            "receiver_payoff": None
            if self.welfare.receiver_payoff is None
            else format_fraction(self.welfare.receiver_payoff),
            "accept_prob_h": format_fraction(self.welfare.accept_prob_h),
            "accept_prob_l": format_fraction(self.welfare.accept_prob_l),
            "regime": self.regime,
            "solver_path": self.solver_path,
            "certificate": format_fraction(self.certificate),
        }
        if self.alternates:
            out["alternates"] = [alt.to_dict() for alt in self.alternates]
        return out


def result_from_masses(x, y, E: AcceptanceSet, p: MarketParams, solver_path: str, certificate=None) -> SolveResult:
    from .equilibrium import label_regime

    menu = materialize_menu(x, y, E, p)
    account = welfare(menu, E, p)
    if certificate is None:
        certificate = account.revenue
    return SolveResult(
        E=E,
        params=p,
        menu=menu,
        welfare=account,
        regime=label_regime(menu, E, account.revenue),
        solver_path=solver_path,
        certificate=certificate,
        x=dict(x),
        y=dict(y),
    )


def result_from_menu(menu: Menu, E: AcceptanceSet, p: MarketParams, solver_path: str) -> SolveResult:
    from .equilibrium import label_regime

    account = welfare(menu, E, p)
    x = {e: menu.high_option.experiment.mass_h(e) for e in E}
    y = {e: menu.low_option.experiment.mass_h(e) for e in E}
    return SolveResult(
        E=E,
        params=p,
        menu=menu,
        welfare=account,
        regime=label_regime(menu, E, account.revenue),
        solver_path=solver_path,
        certificate=account.revenue,
        x=x,
        y=y,
    )


def solve_revenue_max(
    E: AcceptanceSet,
    p: MarketParams,
    tie_break: str = TIE_LEAST_POOLING,
    all_optima: bool = False,
) -> SolveResult:
    """Optimal menu for E via the exact LP.

    With ``all_optima`` every optimal vertex (found by vertex enumeration,
    |E| <= 6) is attached as an alternate result.
    """
    lp = build_lp(E, p)
    x, y, objective = solve_lp(lp, tie_break)
    if objective == 0:
        zero = {e: Fraction(0) for e in E}
        return result_from_masses(zero, zero, E, p, "lp", Fraction(0))
    if sum(x.values()) != 1:
        raise AssertionError("positive-revenue optimum must accept the high type surely")
    result = result_from_masses(x, y, E, p, "lp", objective)
    if all_optima:
        from .oracle import optimal_vertices

        alternates = []
        for values in optimal_vertices(lp):
            ax, ay = lp.split(values)
            if (ax, ay) != (x, y):
                alternates.append(result_from_masses(ax, ay, E, p, "lp", objective))
        result = SolveResult(**{**result.__dict__, "alternates": tuple(alternates)})
    return result


# -- closed forms -----------------------------------------------------------


@dataclass(frozen=True)
class ClosedForm:
    """A closed-form menu with the case that produced it.

    ``adjacent`` lists every case whose closure contains the parameter
    point, so on a boundary it has more than one entry.
    """

    menu: Menu
    regime: str
    adjacent: tuple[str, ...]
    revenue_formula: Fraction
    x: dict
    y: dict


def _binary_regimes(e_h: Fraction, e_l: Fraction, p: MarketParams) -> tuple[str, tuple[str, ...]]:
    mu, l = p.mu, p.l_mu
    pool_index = e_h * (mu + (1 - mu) * l * e_l)  # > 1 means discriminating beats the two-tier menu
    lo_cap = min(1 / l, 1 / mu)
    if e_h <= lo_cap and pool_index <= 1:
        regime = "A"
    elif 1 / l < e_h <= 1 / mu and pool_index < 1:
        regime = "C"
    else:
        regime = "B"
    closure = []
    if e_h <= lo_cap and pool_index <= 1:
        closure.append("A")
    if pool_index >= 1:  # e_h > 1/mu already forces pool_index > 1
        closure.append("B")
    if 1 / l <= e_h <= 1 / mu and pool_index <= 1:
        closure.append("C")
    return regime, tuple(closure)


def closed_form_binary(e_h, e_l, p: MarketParams) -> ClosedForm:
    """Optimal menu on a two-signal acceptance set {e_h > 1 > e_l}."""
    e_h, e_l = Signal.of(e_h), Signal.of(e_l)
    p.require_pessimistic()
    if e_h.is_inf or not (e_h.value > 1 > e_l.value > 0):
        raise ConditionsNotMet("requires finite e_h > 1 > e_l > 0")
    E = AcceptanceSet((e_h, e_l))
    hi, lo = e_h.value, e_l.value
    mu, l = p.mu, p.l_mu
    regime, adjacent = _binary_regimes(hi, lo, p)
    share = hi * (1 - lo) / (hi - lo)  # mass at e_h making the high option's low-state mass exactly one
    if regime == "A":
        share_h = share * (1 - l * lo) / (1 - l * hi * lo)
        x = {e_h: share_h, e_l: 1 - share_h}
        y = {e_h: hi * l * share_h, e_l: lo * l * (1 - share_h)}
        formula = mu + (1 - mu) * l - mu * l * (hi - 1) * (1 - lo) / (1 - l * hi * lo)
    elif regime == "B":
        x = {e_h: share, e_l: 1 - share}
        y = {e_h: lo * l * share, e_l: lo * l * (1 - share)}
        formula = mu + (1 - mu) * l * lo
    else:
        x = {e_h: Fraction(1), e_l: Fraction(0)}
        y = {e_h: Fraction(1), e_l: Fraction(0)}
        formula = 1 / hi
    menu = materialize_menu(x, y, E, p)
    return ClosedForm(menu, regime, adjacent, formula, x, y)


def closed_form_singleton(e, p: MarketParams) -> ClosedForm:
    """Optimal menu when a single signal is accepted.

    Cases: ``degenerate`` (e < 1 carries only bad news),
    ``separating`` (e > 1/mu), ``pooled`` (1/l <= e < 1/mu, both types buy
    the same experiment), ``screened`` (1 < e < 1/l, low type accepted at
    rate e*l).  At e = 1/mu separating and pooling tie; the separating menu
    is returned and both cases are listed in ``adjacent``.
    """
    e = Signal.of(e)
    p.require_pessimistic()
    E = AcceptanceSet((e,))
    mu, l = p.mu, p.l_mu
    if not e.is_inf and e.value < 1:
        zero = {e: Fraction(0)}
        return ClosedForm(zero_menu(), "degenerate", ("degenerate",), Fraction(0), zero, dict(zero))
    if e.is_inf or e.value > 1 / mu:
        x, y, regime, formula = {e: Fraction(1)}, {e: Fraction(0)}, "separating", mu
    elif e.value >= 1 / l:
        x, y, regime, formula = {e: Fraction(1)}, {e: Fraction(1)}, "pooled", 1 / e.value
    else:
        x, y, regime, formula = {e: Fraction(1)}, {e: e.value * l}, "screened", mu + l * (1 - mu * e.value)
    adjacent = (regime,)
    if not e.is_inf and e.value == 1 / mu:
        x, y, regime, formula = {e: Fraction(1)}, {e: Fraction(0)}, "separating", mu
        adjacent = ("separating", "pooled" if e.value >= 1 / l else "screened")
    return ClosedForm(materialize_menu(x, y, E, p), regime, adjacent, formula, x, y)


def partial_pooling_conditions(e_bar: Fraction, e_h: Fraction, e_l: Fraction, p: MarketParams) -> bool:
    mu, l = p.mu, p.l_mu
    mix = mu + (1 - mu) * l * e_h * e_l * (e_bar - 1) / (e_bar * (e_h - 1) + e_l * (e_bar - e_h))
    cap = (e_l * (e_bar - e_h) + e_bar * (e_h - 1)) / ((e_bar - 1) * e_l * e_h)
    return min(l, mix) >= 1 / e_h and l <= cap


def partial_pooling_menu(e_bar, e_h, e_l, p: MarketParams) -> ClosedForm:
    """Three-signal menu where the low type avoids the top signal e_bar."""
    e_bar, e_h, e_l = Signal.of(e_bar), Signal.of(e_h), Signal.of(e_l)
    p.require_pessimistic()
    if any(s.is_inf for s in (e_bar, e_h, e_l)) or not (e_bar.value > e_h.value > 1 > e_l.value > 0):
        raise ConditionsNotMet("requires finite e_bar > e_h > 1 > e_l > 0")
    top, hi, lo = e_bar.value, e_h.value, e_l.value
    if not partial_pooling_conditions(top, hi, lo, p):
        raise ConditionsNotMet("partial pooling conditions not met")
    l, mu = p.l_mu, p.mu
    ratio = (1 - lo) / (hi - 1)
    bottom = (1 - 1 / top) / ((1 / lo - 1 / top) + (1 / hi - 1 / top) * ratio)
    middle = bottom * ratio
    x = {e_bar: 1 - bottom - middle, e_h: middle, e_l: bottom}
    y = {e_bar: Fraction(0), e_h: middle * hi * l, e_l: lo * l * bottom}
    E = AcceptanceSet((e_bar, e_h, e_l))
    formula = mu + (1 - mu) * l * middle * (hi - lo) / (1 - lo)
    return ClosedForm(materialize_menu(x, y, E, p), "partial-pooling", ("partial-pooling",), formula, x, y)


# -- support enumeration ----------------------------------------------------


@dataclass(frozen=True)
class SupportCandidate:
    support_h: tuple[Signal, ...]
    support_l: tuple[Signal, ...]
    x: dict
    y: dict
    objective: Fraction


def _restricted_lp(lp: LpInstance, keep: list[int]):
    rows = [[row[j] for j in keep] for row in lp.rows]
    obj = [lp.objective[j] for j in keep]
    return obj, rows


def enumerate_support_menus(E: AcceptanceSet, p: MarketParams) -> list[SupportCandidate]:
    """Optimize over every small support pattern separately.

    High-type supports have at most three accepted signals and low-type
    supports at most two, contained in the high support (infinity may be
    used by the low option alone since it never binds obedience).
    """
    lp = build_lp(E, p)
    sig = list(E.signals)
    k = len(sig)
    index = {e: i for i, e in enumerate(sig)}
    tie = _tie_objective(lp, TIE_LEAST_POOLING)
    out = []
    for size_h in range(0, min(3, k) + 1):
        for supp_h in combinations(sig, size_h):
            pool = list(supp_h) + ([INF] if INF in E and INF not in supp_h else [])
            for size_l in range(0, min(2, len(pool)) + 1):
                for supp_l in combinations(sorted(pool), size_l):
                    keep = [index[e] for e in supp_h] + [k + index[e] for e in supp_l]
                    if not keep:
                        zero = {e: Fraction(0) for e in sig}
                        out.append(SupportCandidate(supp_h, supp_l, zero, dict(zero), Fraction(0)))
                        continue
                    obj, rows = _restricted_lp(lp, keep)
                    sol = maximize([obj, [tie[j] for j in keep]], rows, lp.rhs)
                    full = [Fraction(0)] * (2 * k)
                    for j, v in zip(keep, sol.values):
                        full[j] = v
                    x, y = lp.split(full)
                    out.append(SupportCandidate(tuple(supp_h), tuple(supp_l), x, y, sol.objective))
    return out


def best_support_menu(E: AcceptanceSet, p: MarketParams) -> SupportCandidate:
    candidates = enumerate_support_menus(E, p)
    best = max(c.objective for c in candidates)
    return min(
        (c for c in candidates if c.objective == best),
        key=lambda c: (len(c.support_h) + len(c.support_l), sum(c.y.values()), c.support_h, c.support_l),
    )


# -- dispatch ---------------------------------------------------------------


def closed_form_for(E: AcceptanceSet, p: MarketParams) -> ClosedForm:
    sig = E.signals
    if len(sig) == 1:
        return closed_form_singleton(sig[0], p)
    if len(sig) == 2 and not sig[1].is_inf and sig[1].value > 1 > sig[0].value:
        return closed_form_binary(sig[1], sig[0], p)
    if len(sig) == 2 and all(not s.is_inf and s.value < 1 for s in sig):
        zero = {e: Fraction(0) for e in sig}
        return ClosedForm(zero_menu(), "degenerate", ("degenerate",), Fraction(0), zero, dict(zero))
    if len(sig) == 3:
        lo, hi, top = sig
        if not top.is_inf and top.value > hi.value > 1 > lo.value:
            return partial_pooling_menu(top, hi, lo, p)
    raise ConditionsNotMet("no closed form covers this acceptance set")


def solve(E: AcceptanceSet, p: MarketParams, solver_path: str = "lp") -> SolveResult:
    if solver_path == "lp":
        return solve_revenue_max(E, p)
    if solver_path == "closed-form":
        cf = closed_form_for(E, p)
        return result_from_masses(cf.x, cf.y, E, p, "closed-form", cf.revenue_formula)
    if solver_path == "support-enum":
        best = best_support_menu(E, p)
        return result_from_masses(best.x, best.y, E, p, "support-enum", best.objective)
    raise ValueError(f"unknown solver path {solver_path!r}")


# -- single experiment for both types ---------------------------------------


def _single_item_pooled(E: AcceptanceSet, p: MarketParams):
    # variables: x_e for e in E, then the price
    sig = E.signals
    k = len(sig)
    inv = [e.inverse for e in sig]
    rows, rhs = [], []
    rows.append([Fraction(-1)] * k + [Fraction(1)])  # high type buys
    rhs.append(0)
    rows.append([-w for w in inv] + [Fraction(1)])  # low type buys
    rhs.append(0)
    rows.append([Fraction(1)] * k + [Fraction(0)])
    rhs.append(1)
    rows.append(list(inv) + [Fraction(0)])
    rhs.append(1)
    for i in range(k):
        row = [Fraction(0)] * (k + 1)
        row[i] = inv[i] - p.l_mu  # low-state mass at e may not exceed l times high-state mass
        rows.append(row)
        rhs.append(0)
    sol = maximize([[Fraction(0)] * k + [Fraction(1)], [Fraction(0)] * k + [Fraction(-1)]], rows, rhs)
    x = dict(zip(sig, sol.values[:k]))
    return x, sol.values[k], sol.objective


def _single_item_separating(E: AcceptanceSet, p: MarketParams):
    sig = E.signals
    k = len(sig)
    inv = [e.inverse for e in sig]
    rows = [
        [Fraction(-1)] * k + [Fraction(1)],  # high type buys
        list(inv) + [Fraction(-1)],  # low type stays out
        [Fraction(1)] * k + [Fraction(0)],
        list(inv) + [Fraction(0)],
    ]
    rhs = [0, 0, 1, 1]
    sol = maximize([[Fraction(0)] * k + [p.mu], [Fraction(0)] * k + [Fraction(-1)]], rows, rhs)
    x = dict(zip(sig, sol.values[:k]))
    return x, sol.values[k], sol.objective


def solve_single_item(E: AcceptanceSet, p: MarketParams) -> SolveResult:
    """Best menu offering one priced experiment (plus Phi) to both types.

    Either both types buy it or only the high type does; the better of the
    two is returned, preferring separation on ties.
    """
    from .equilibrium import label_regime

    p.require_pessimistic()
    x_pool, price_pool, rev_pool = _single_item_pooled(E, p)
    x_sep, price_sep, rev_sep = _single_item_separating(E, p)
    if rev_sep >= rev_pool:
        experiment = complete_experiment(x_sep, E)
        if experiment.is_phi:
            menu = zero_menu()
        else:
            menu = Menu.build(experiment, price_sep, Experiment.phi(), 0)
        x, y, rev = x_sep, {e: Fraction(0) for e in E}, rev_sep
    else:
        experiment = complete_experiment(x_pool, E)
        menu = Menu.build(experiment, price_pool, experiment, price_pool)
        x, y, rev = x_pool, dict(x_pool), rev_pool
    account = welfare(menu, E, p)
    if account.revenue != rev:
        raise AssertionError("single-item revenue mismatch")
    return SolveResult(
        E=E,
        params=p,
        menu=menu,
        welfare=account,
        regime=label_regime(menu, E, account.revenue),
        solver_path="lp",
        certificate=rev,
        x=x,
        y=y,
    )
