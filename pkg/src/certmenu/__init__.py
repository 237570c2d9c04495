"""Exact solver for revenue-maximizing certification menus."""

from .model import (
    INF,
    AcceptanceSet,
    Experiment,
    MarketParams,
    Menu,
    ModelError,
    ReceiverUtilities,
    Signal,
    derive_threshold,
    low_state_mass,
    odds_factor,
    posterior,
    receiver_best_response,
)
from .obedience import check_obedience, menu_revenue, outcome_equivalent, welfare
from .optimizer import (
    build_lp,
    closed_form_binary,
    closed_form_singleton,
    enumerate_support_menus,
    partial_pooling_menu,
    recover_prices,
    solve,
    solve_lp,
    solve_revenue_max,
    solve_single_item,
)
from .equilibrium import (
    certifier_optimal_uninformative,
    classify,
    kg_menu,
    naive_receiver_solve,
    optimistic_receiver_outcomes,
    sender_optimal_search,
    separating_threshold,
)

__version__ = "0.1.0"
