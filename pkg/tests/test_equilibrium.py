from fractions import Fraction as F

import pytest

from certmenu.equilibrium import (
    CANNOT_SEPARATE,
    MAY_SEPARATE,
    MUST_SEPARATE,
    REGIME_LABELS,
    certifier_optimal_uninformative,
    classify,
    kg_menu,
    label_regime,
    naive_grid,
    naive_receiver_solve,
    optimistic_receiver_outcomes,
    sender_optimal_search,
    separating_threshold,
    singleton_rents,
)
from certmenu.model import INF, AcceptanceSet, Experiment, MarketParams, ModelError, ReceiverUtilities, Signal, zero_menu
from certmenu.obedience import check_obedience, menu_revenue
from certmenu.optimizer import TIE_LEAST_POOLING, build_lp, solve_revenue_max
from certmenu.oracle import random_instance, vertex_enumerate

P = MarketParams(F(1, 4), utilities=ReceiverUtilities(1, 0, 1, 0))


def cutoff(pi):
    return 2 - 1 / pi


@pytest.mark.parametrize(
    "signals, label",
    [([5], MUST_SEPARATE), ([4], MAY_SEPARATE), ([3, 8], CANNOT_SEPARATE), (["inf"], MUST_SEPARATE)],
)
def test_separating_threshold(signals, label):
    assert separating_threshold(AcceptanceSet.of(signals), P) == label


@pytest.mark.parametrize("e", [5, 6, 10, "inf"])
def test_must_separate_means_separating_optimum(e):
    assert solve_revenue_max(AcceptanceSet.of([e]), P).regime == "separating"


def test_regime_labels_on_examples():
    cases = {
        ("5",): "separating",
        ("3",): "kg-pooling",
        ("2", "1/2"): "bad-news",
        ("1/2",): "degenerate",
    }
    for signals, label in cases.items():
        E = AcceptanceSet.of(signals)
        r = solve_revenue_max(E, P)
        assert classify(r, E) == label and label in REGIME_LABELS
    assert label_regime(zero_menu(), AcceptanceSet(()), F(0)) == "no-trade"


def test_partial_pooling_label():
    p = MarketParams(F(1, 20), F(1, 10))
    r = solve_revenue_max(AcceptanceSet.of([4, F(11, 4), F(7, 10)]), p)
    assert r.regime == "partial-pooling"


def test_every_random_optimum_gets_one_known_label():
    for seed in range(40):
        E, p = random_instance(seed)
        assert solve_revenue_max(E, p).regime in REGIME_LABELS


def test_naive_grid_starts_at_indifference_signal():
    E = naive_grid(P, 3)
    assert E.to_list() == ["3", "9/2", "27/4", "inf"]


@pytest.mark.parametrize("pi", [F(11, 20), F(3, 5), F(7, 10), F(4, 5), F(9, 10)])
def test_naive_receiver_dichotomy(pi):
    for k in range(1, 20):
        mu = F(k, 20)
        if mu >= pi:
            break
        p = MarketParams(mu, pi)
        r = naive_receiver_solve(p)
        assert r.separating == (mu <= cutoff(pi))
        if not r.separating:
            assert r.menu.high_option.experiment == kg_menu(p)
            assert r.revenue == p.l_mu


def test_naive_receiver_at_cutoff_separates():
    p = MarketParams(F(1, 2), F(2, 3))
    assert p.mu == cutoff(p.pi_star)
    assert naive_receiver_solve(p).separating


def test_kg_menu_revenue_is_l():
    p = MarketParams(F(1, 4), F(1, 2))
    r = naive_receiver_solve(p)
    assert r.regime == "kg-pooling" and r.revenue == F(1, 3)
    assert kg_menu(p) == Experiment({3: 1})


def test_singleton_rent_profile():
    rents = singleton_rents(P, [2, 3, "7/2", 4, 5])
    assert rents == {
        Signal.of(2): F(1, 3),
        Signal.of(3): F(2, 3),
        Signal.of("7/2"): F(5, 7),
        Signal.of(4): F(3, 4),
        Signal.of(5): 0,
    }
    least = singleton_rents(P, [4], tie_break=TIE_LEAST_POOLING)
    assert least == {Signal.of(4): 0}


@pytest.mark.parametrize(
    "mu, pi, expected",
    [(F(1, 4), F(1, 2), F(3, 4)), (F(1, 10), F(9, 10), F(1, 81) * 9), (F(2, 5), F(1, 2), F(3, 5))],
)
def test_sender_optimal_search(mu, pi, expected):
    p = MarketParams(mu, pi)
    E, rent = sender_optimal_search(p, [1 + F(k, 4) for k in range(1, 60)] + [1 / mu])
    assert E.signals == (Signal(1 / mu),)
    l = p.l_mu
    assert rent == (1 - mu if l > mu else l * (1 - mu) / mu) == expected


def test_sender_optimal_search_needs_cutoff():
    with pytest.raises(ModelError):
        sender_optimal_search(P, [2, 3])


def test_certifier_optimal_uninformative():
    p = MarketParams(F(1, 4), F(1, 2))
    menu, E = certifier_optimal_uninformative(p)
    assert check_obedience(menu, E, p).overall
    assert menu_revenue(menu, p) == F(1, 2) == vertex_enumerate(build_lp(E, p))[0]
    r = solve_revenue_max(E, p)
    assert r.revenue == F(1, 2) and r.regime == "uninformative"
    with pytest.raises(ModelError):
        certifier_optimal_uninformative(p, allow_uninformative=False)


def test_uninformative_beats_every_finite_singleton():
    p = MarketParams(F(1, 4), F(1, 2))
    best = max(solve_revenue_max(AcceptanceSet.of([e]), p).revenue for e in [F(3, 2), 2, 3, 4, 5, INF])
    assert best < F(1, 2)


def test_optimistic_receiver_outcomes():
    p = MarketParams(F(3, 5), utilities=ReceiverUtilities(1, 0, 1, 0))
    no_trade, flat = optimistic_receiver_outcomes(p)
    assert no_trade.revenue == 0 and no_trade.phi_accepted
    assert flat.revenue == 1 and not flat.phi_accepted
    assert no_trade.receiver_payoff == flat.receiver_payoff == F(3, 5)
    with pytest.raises(ModelError):
        optimistic_receiver_outcomes(P)
