"""Feasibility checks, revenue and welfare for a (menu, acceptance set) pair."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import AcceptanceSet, Menu, MarketParams, format_fraction


@dataclass(frozen=True)
class Check:
    passed: bool
    margin: Fraction | None  # slack of the constraint; negative means violated

    @classmethod
    def from_margin(cls, margin: Fraction | None) -> Check:
        return cls(margin is None or margin >= 0, margin)


@dataclass(frozen=True)
class ObedienceReport:
    sender_ic_high: Check
    sender_ic_low: Check
    sender_ir_high: Check
    sender_ir_low: Check
    receiver_obedience: Check

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self._checks().values())

    def _checks(self) -> dict[str, Check]:
        return {
            "sender_ic_high": self.sender_ic_high,
            "sender_ic_low": self.sender_ic_low,
            "sender_ir_high": self.sender_ir_high,
            "sender_ir_low": self.sender_ir_low,
            "receiver_obedience": self.receiver_obedience,
        }

    def to_dict(self) -> dict:
        out: dict = {"overall": self.overall}
        for name, check in self._checks().items():
            out[f"{name}_passed"] = check.passed
            out[f"{name}_margin"] = None if check.margin is None else format_fraction(check.margin)
        return out


@dataclass(frozen=True)
class WelfareAccount:
    revenue: Fraction
    rent_high: Fraction
    rent_low: Fraction
    receiver_payoff: Fraction | None
    accept_prob_h: Fraction
    accept_prob_l: Fraction
    hypothetical: bool = False

    def to_dict(self) -> dict:
        out = {}
        for name in ("revenue", "rent_high", "rent_low", "receiver_payoff", "accept_prob_h", "accept_prob_l"):
            value = getattr(self, name)
            out[name] = None if value is None else format_fraction(value)
        out["hypothetical"] = self.hypothetical
        return out


def obedience_margin(m: Menu, E: AcceptanceSet, p: MarketParams) -> Fraction | None:
    """min over accepted atoms of l(mu)*sigma_h(e|h) - sigma_l(e|l); None for empty E."""
    high = m.high_option.experiment
    low = m.low_option.experiment
    margins = [p.l_mu * high.mass_h(e) - low.mass_l(e) for e in E]
    return min(margins) if margins else None


def check_obedience(m: Menu, E: AcceptanceSet, p: MarketParams) -> ObedienceReport:
    hi, lo = m.high_option, m.low_option
    # value of each option to each type: accepted mass under that type's state minus price
    h_own = hi.experiment.accept_prob(E, "h") - hi.price
    h_dev = lo.experiment.accept_prob(E, "h") - lo.price
    l_own = lo.experiment.accept_prob(E, "l") - lo.price
    l_dev = hi.experiment.accept_prob(E, "l") - hi.price
    return ObedienceReport(
        sender_ic_high=Check.from_margin(h_own - h_dev),
        sender_ic_low=Check.from_margin(l_own - l_dev),
        sender_ir_high=Check.from_margin(h_own),
        sender_ir_low=Check.from_margin(l_own),
        receiver_obedience=Check.from_margin(obedience_margin(m, E, p)),
    )


def menu_revenue(m: Menu, p: MarketParams) -> Fraction:
    return p.mu * m.high_option.price + (1 - p.mu) * m.low_option.price


def receiver_payoff(p: MarketParams, accept_h: Fraction, accept_l: Fraction) -> Fraction | None:
    u = p.utilities
    if u is None:
        return None
    high = accept_h * u.v_ah_h + (1 - accept_h) * u.v_al_h
    low = accept_l * u.v_ah_l + (1 - accept_l) * u.v_al_l
    return p.mu * high + (1 - p.mu) * low


def welfare(m: Menu, E: AcceptanceSet, p: MarketParams) -> WelfareAccount:
    accept_h = m.high_option.experiment.accept_prob(E, "h")
    accept_l = m.low_option.experiment.accept_prob(E, "l")
    return WelfareAccount(
        revenue=menu_revenue(m, p),
        rent_high=accept_h - m.high_option.price,
        rent_low=accept_l - m.low_option.price,
        receiver_payoff=receiver_payoff(p, accept_h, accept_l),
        accept_prob_h=accept_h,
        accept_prob_l=accept_l,
        hypothetical=not check_obedience(m, E, p).overall,
    )


def _restricted(experiment, E: AcceptanceSet) -> dict:
    return {e: mass for e, mass in experiment.atoms.items() if e in E}


def outcome_equivalent(a: tuple[Menu, AcceptanceSet], b: tuple[Menu, AcceptanceSet], p: MarketParams) -> bool:
    (menu_a, E_a), (menu_b, E_b) = a, b
    if E_a.signals != E_b.signals:
        return False
    for side in ("high_option", "low_option"):
        exp_a = getattr(menu_a, side).experiment
        exp_b = getattr(menu_b, side).experiment
        if _restricted(exp_a, E_a) != _restricted(exp_b, E_b):
            return False
    return menu_revenue(menu_a, p) == menu_revenue(menu_b, p)


def menu_posterior(m: Menu, e, p: MarketParams) -> Fraction | None:
    """Receiver belief in the high type after seeing e under truthful selection; None off-path."""
    high = p.mu * m.high_option.experiment.mass_h(e)
    low = (1 - p.mu) * m.low_option.experiment.mass_l(e)
    if high + low == 0:
        return None
    return high / (high + low)
