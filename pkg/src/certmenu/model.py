"""Market primitives and the likelihood-ratio representation of experiments.

A signal is identified with its likelihood ratio ``e = P(e|h) / P(e|l)``.
Experiments are stored by their state-h masses only; state-l masses are
recovered as ``mass / e`` and whatever state-l probability is left over
sits at ``e = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Iterator, Mapping, Union

Rational = Union[int, Fraction]

ACCEPT = "a_h"
REJECT = "a_l"


class ModelError(ValueError):
    """Raised when a primitive violates its construction invariants."""


def as_fraction(value, name: str = "value") -> Fraction:
    """Coerce ints, Fractions and numeric strings ("0.5", "5/6") exactly."""
    if isinstance(value, bool):
        raise ModelError(f"{name}: booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"{name}: cannot parse {value!r} as a rational") from exc
    if isinstance(value, float):
        raise ModelError(f"{name}: floats are not accepted, pass a string or Fraction")
    raise ModelError(f"{name}: unsupported type {type(value).__name__}")


def format_fraction(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@total_ordering
@dataclass(frozen=True)
class Signal:
    """Extended nonnegative rational; ``value is None`` encodes infinity."""

    value: Fraction | None

    def __post_init__(self):
        if self.value is not None:
            if not isinstance(self.value, Fraction):
                object.__setattr__(self, "value", as_fraction(self.value, "signal"))
            if self.value < 0:
                raise ModelError(f"signal must be nonnegative, got {self.value}")

    @classmethod
    def of(cls, raw) -> Signal:
        if isinstance(raw, Signal):
            return raw
        if isinstance(raw, str) and raw.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        return cls(as_fraction(raw, "signal"))

    @property
    def is_inf(self) -> bool:
        return self.value is None

    @property
    def inverse(self) -> Fraction:
        """1/e as a rational; 1/inf = 0. Undefined at e = 0."""
        if self.value is None:
            return Fraction(0)
        if self.value == 0:
            raise ZeroDivisionError("1/0 is infinite; use reciprocal()")
        return 1 / self.value

    def reciprocal(self) -> Signal:
        if self.value is None:
            return Signal(Fraction(0))
        if self.value == 0:
            return INF
        return Signal(1 / self.value)

    def _key(self):
        return (1, Fraction(0)) if self.value is None else (0, self.value)

    def __lt__(self, other):
        if not isinstance(other, Signal):
            if isinstance(other, (int, Fraction)):
                other = Signal(Fraction(other))
            else:
                return NotImplemented
        return self._key() < other._key()

    def __eq__(self, other):
        if isinstance(other, Signal):
            return self.value == other.value
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.value is not None and self.value == other
        return NotImplemented

    def __hash__(self):
        return hash(("signal", self.value))

    def __str__(self):
        return "inf" if self.value is None else format_fraction(self.value)

    def __repr__(self):
        return f"Signal({self})"


INF = Signal(None)
ZERO = Signal(Fraction(0))
ONE = Signal(Fraction(1))


@dataclass(frozen=True)
class ReceiverUtilities:
    v_ah_h: Fraction
    v_al_h: Fraction
    v_al_l: Fraction
    v_ah_l: Fraction

    def __post_init__(self):
        for name in ("v_ah_h", "v_al_h", "v_al_l", "v_ah_l"):
            object.__setattr__(self, name, as_fraction(getattr(self, name), name))
        if not self.v_ah_h > self.v_al_h:
            raise ModelError("accepting must be strictly better in the high state")
        if not self.v_al_l > self.v_ah_l:
            raise ModelError("rejecting must be strictly better in the low state")

    @classmethod
    def for_threshold(cls, pi_star) -> ReceiverUtilities:
        """Utilities (1, 0, pi/(1-pi), 0) whose threshold is exactly pi_star."""
        pi = as_fraction(pi_star, "pi_star")
        return cls(Fraction(1), Fraction(0), pi / (1 - pi), Fraction(0))


def derive_threshold(utilities: ReceiverUtilities) -> Fraction:
    loss_low = utilities.v_al_l - utilities.v_ah_l
    gain_high = utilities.v_ah_h - utilities.v_al_h
    return loss_low / (loss_low + gain_high)


def _check_open_unit(value: Fraction, name: str):
    if not 0 < value < 1:
        raise ModelError(f"{name} must lie strictly between 0 and 1, got {value}")


def odds_factor(mu, pi_star) -> Fraction:
    mu = as_fraction(mu, "mu")
    pi_star = as_fraction(pi_star, "pi_star")
    _check_open_unit(mu, "mu")
    _check_open_unit(pi_star, "pi_star")
    return mu * (1 - pi_star) / (pi_star * (1 - mu))


def posterior(mu, e) -> Fraction:
    mu = as_fraction(mu, "mu")
    _check_open_unit(mu, "mu")
    e = Signal.of(e)
    if e.is_inf:
        return Fraction(1)
    return e.value * mu / (e.value * mu + 1 - mu)


def receiver_best_response(belief, pi_star) -> str:
    belief = as_fraction(belief, "belief")
    if not 0 <= belief <= 1:
        raise ModelError(f"belief must be in [0, 1], got {belief}")
    return ACCEPT if belief >= as_fraction(pi_star, "pi_star") else REJECT


@dataclass(frozen=True)
class MarketParams:
    mu: Fraction
    pi_star: Fraction | None = None
    utilities: ReceiverUtilities | None = None
    l_mu: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mu", as_fraction(self.mu, "mu"))
        _check_open_unit(self.mu, "mu")
        if self.utilities is not None:
            derived = derive_threshold(self.utilities)
            if self.pi_star is not None and as_fraction(self.pi_star, "pi_star") != derived:
                raise ModelError(f"pi_star {self.pi_star} disagrees with utilities ({derived})")
            object.__setattr__(self, "pi_star", derived)
        if self.pi_star is None:
            raise ModelError("either pi_star or receiver utilities is required")
        object.__setattr__(self, "pi_star", as_fraction(self.pi_star, "pi_star"))
        _check_open_unit(self.pi_star, "pi_star")
        object.__setattr__(self, "l_mu", odds_factor(self.mu, self.pi_star))

    @property
    def pessimistic(self) -> bool:
        return self.mu < self.pi_star

    @property
    def indifference_signal(self) -> Signal:
        """Smallest likelihood ratio the receiver accepts: 1/l(mu)."""
        return Signal(1 / self.l_mu)

    def require_pessimistic(self):
        if not self.pessimistic:
            raise ModelError(f"requires mu < pi_star, got mu={self.mu}, pi_star={self.pi_star}")


class Experiment:
    """Finite atom measure over signals, stored as state-h masses.

    The empty experiment is the no-certification option.
    """

    __slots__ = ("_atoms",)

    def __init__(self, atoms: Mapping | Iterable = ()):
        items = atoms.items() if isinstance(atoms, Mapping) else atoms
        merged: dict[Signal, Fraction] = {}
        for raw_signal, raw_mass in items:
            s = Signal.of(raw_signal)
            m = as_fraction(raw_mass, f"mass at {s}")
            if m < 0:
                raise ModelError(f"negative mass {m} at signal {s}")
            if m == 0:
                continue
            if s == ZERO:
                raise ModelError("state-h mass at e=0 must be zero")
            merged[s] = merged.get(s, Fraction(0)) + m
        if merged:
            total = sum(merged.values())
            if total != 1:
                raise ModelError(f"state-h masses must sum to 1, got {total}")
            low_total = sum(m * s.inverse for s, m in merged.items())
            if low_total > 1:
                raise ModelError(f"state-l masses sum to {low_total} > 1")
        self._atoms = tuple(sorted(merged.items()))

    @classmethod
    def phi(cls) -> Experiment:
        return cls(())

    @property
    def is_phi(self) -> bool:
        return not self._atoms

    @property
    def atoms(self) -> dict[Signal, Fraction]:
        return dict(self._atoms)

    @property
    def support(self) -> tuple[Signal, ...]:
        return tuple(s for s, _ in self._atoms)

    def mass_h(self, e) -> Fraction:
        return self.atoms.get(Signal.of(e), Fraction(0))

    def mass_l(self, e) -> Fraction:
        return low_state_mass(self, e)

    def accept_prob(self, E: AcceptanceSet, state: str) -> Fraction:
        """Probability of landing in E under the given state ("h" or "l")."""
        if state == "h":
            return sum((m for s, m in self._atoms if s in E), Fraction(0))
        if state == "l":
            return sum((m * s.inverse for s, m in self._atoms if s in E), Fraction(0))
        raise ValueError(f"unknown state {state!r}")

    def to_dict(self) -> dict[str, str]:
        return {str(s): format_fraction(m) for s, m in self._atoms}

    def __eq__(self, other):
        return isinstance(other, Experiment) and self._atoms == other._atoms

    def __hash__(self):
        return hash(self._atoms)

    def __repr__(self):
        if self.is_phi:
            return "Experiment(phi)"
        return "Experiment({" + ", ".join(f"{s}: {format_fraction(m)}" for s, m in self._atoms) + "})"


def low_state_mass(x: Experiment, e) -> Fraction:
    e = Signal.of(e)
    if e == ZERO:
        return 1 - sum((m * s.inverse for s, m in x.atoms.items()), Fraction(0))
    if e.is_inf:
        return Fraction(0)
    return x.mass_h(e) / e.value


@dataclass(frozen=True)
class AcceptanceSet:
    signals: tuple[Signal, ...]
    allow_uninformative: bool = False

    def __post_init__(self):
        sigs = tuple(sorted(set(Signal.of(s) for s in self.signals)))
        if ZERO in sigs:
            raise ModelError("the signal 0 can never be accepted")
        if ONE in sigs and not self.allow_uninformative:
            raise ModelError("the uninformative signal 1 needs allow_uninformative")
        object.__setattr__(self, "signals", sigs)

    @classmethod
    def of(cls, signals: Iterable, allow_uninformative: bool = False) -> AcceptanceSet:
        return cls(tuple(Signal.of(s) for s in signals), allow_uninformative)

    def __iter__(self) -> Iterator[Signal]:
        return iter(self.signals)

    def __len__(self):
        return len(self.signals)

    def __contains__(self, e):
        return Signal.of(e) in self.signals

    @property
    def infimum(self) -> Signal | None:
        return self.signals[0] if self.signals else None

    def to_list(self) -> list[str]:
        return [str(s) for s in self.signals]


@dataclass(frozen=True)
class PricedOption:
    experiment: Experiment
    price: Fraction

    def __post_init__(self):
        object.__setattr__(self, "price", as_fraction(self.price, "price"))
        if not 0 <= self.price <= 1:
            raise ModelError(f"price must be in [0, 1], got {self.price}")

    def to_dict(self) -> dict:
        return {"experiment": self.experiment.to_dict(), "price": format_fraction(self.price)}


NO_CERTIFICATION = PricedOption(Experiment.phi(), Fraction(0))


@dataclass(frozen=True)
class Menu:
    """Options meant for the high and low type; the free Phi option is implicit."""

    high_option: PricedOption
    low_option: PricedOption

    @classmethod
    def build(cls, high: Experiment, price_h, low: Experiment, price_l) -> Menu:
        return cls(PricedOption(high, price_h), PricedOption(low, price_l))

    @property
    def options(self) -> tuple[PricedOption, PricedOption, PricedOption]:
        return (self.high_option, self.low_option, NO_CERTIFICATION)

    def to_dict(self) -> dict:
        return {"high": self.high_option.to_dict(), "low": self.low_option.to_dict()}


def zero_menu() -> Menu:
    return Menu(NO_CERTIFICATION, NO_CERTIFICATION)
