"""Command line front end: solve, sweep, classify, verify.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 solver paths disagree.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .equilibrium import classify, naive_receiver_solve, separating_threshold
from .model import (
    AcceptanceSet,
    MarketParams,
    ModelError,
    ReceiverUtilities,
    Signal,
    as_fraction,
    format_fraction,
)
from .obedience import check_obedience
from .optimizer import (
    SOLVER_PATHS,
    ConditionsNotMet,
    best_support_menu,
    build_lp,
    solve,
    solve_revenue_max,
    solve_single_item,
)
from .oracle import (
    GridSpec,
    grid_search_menus,
    obedience_by_subsets,
    optimal_vertices,
    random_instance,
    vertex_enumerate,
)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DISAGREE = 0, 1, 2, 3

SWEEP_COLUMNS = ("param", "value", "revenue", "rent_high", "receiver_payoff", "regime", "naive_regime")
UTILITY_FIELDS = ("v_ah_h", "v_al_h", "v_al_l", "v_ah_l")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    mu: Fraction | None = None
    pi_star: Fraction | None = None
    utilities: ReceiverUtilities | None = None
    acceptance: tuple[Signal, ...] = ()
    allow_uninformative: bool = False
    single_item: bool = False
    solver_path: str = "lp"
    extra: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        market = data.get("market", data)
        if not isinstance(market, dict):
            raise ConfigError("field 'market': must be an object")
        flags = data.get("flags", data)
        if not isinstance(flags, dict):
            raise ConfigError("field 'flags': must be an object")
        prefix = "market." if "market" in data else ""

        def rational(key):
            raw = market.get(key)
            if raw is None:
                return None
            if isinstance(raw, float):
                raise ConfigError(f"field '{prefix}{key}': write rationals as strings, got float {raw}")
            try:
                return as_fraction(raw if isinstance(raw, str) else raw, key)
            except ModelError as exc:
                raise ConfigError(f"field '{prefix}{key}': {exc}") from None

        utilities = None
        raw_u = market.get("receiver_utilities")
        if raw_u is not None:
            try:
                if isinstance(raw_u, dict):
                    utilities = ReceiverUtilities(**{k: as_fraction(raw_u[k], k) for k in UTILITY_FIELDS})
                else:
                    utilities = ReceiverUtilities(*(as_fraction(v, "utility") for v in raw_u))
            except (KeyError, TypeError, ModelError) as exc:
                raise ConfigError(f"field '{prefix}receiver_utilities': {exc}") from None

        raw_acc = data.get("acceptance", [])
        if isinstance(raw_acc, str):
            raw_acc = [s for s in raw_acc.split(",") if s.strip()]
        if not isinstance(raw_acc, list):
            raise ConfigError("field 'acceptance': must be a list of signal strings")
        signals = []
        for i, raw in enumerate(raw_acc):
            if isinstance(raw, float):
                raise ConfigError(f"field 'acceptance[{i}]': write signals as strings, got float {raw}")
            try:
                signals.append(Signal.of(raw if isinstance(raw, str) else int(raw)))
            except (ModelError, ValueError, TypeError) as exc:
                raise ConfigError(f"field 'acceptance[{i}]': {exc}") from None

        solver_path = flags.get("solver_path", "lp")
        if solver_path not in SOLVER_PATHS + ("all",):
            raise ConfigError(f"field 'solver_path': unknown path {solver_path!r}")
        for key in ("allow_uninformative", "single_item"):
            if not isinstance(flags.get(key, False), bool):
                raise ConfigError(f"field '{key}': must be true or false")
        known = {"market", "flags", "acceptance", "mu", "pi_star", "receiver_utilities",
                 "allow_uninformative", "single_item", "solver_path"}
        return cls(
            mu=rational("mu"),
            pi_star=rational("pi_star"),
            utilities=utilities,
            acceptance=tuple(signals),
            allow_uninformative=flags.get("allow_uninformative", False),
            single_item=flags.get("single_item", False),
            solver_path=solver_path,
            extra={k: v for k, v in data.items() if k not in known},
        )

    def to_dict(self) -> dict:
        market: dict = {}
        if self.mu is not None:
            market["mu"] = format_fraction(self.mu)
        if self.utilities is not None:
            market["receiver_utilities"] = {k: format_fraction(getattr(self.utilities, k)) for k in UTILITY_FIELDS}
        elif self.pi_star is not None:
            market["pi_star"] = format_fraction(self.pi_star)
        return {
            "market": market,
            "acceptance": [str(s) for s in self.acceptance],
            "flags": {
                "allow_uninformative": self.allow_uninformative,
                "single_item": self.single_item,
                "solver_path": self.solver_path,
            },
        }

    def params(self) -> MarketParams:
        if self.mu is None:
            raise ConfigError("field 'mu': required")
        try:
            return MarketParams(self.mu, self.pi_star, self.utilities)
        except ModelError as exc:
            raise ConfigError(f"field 'market': {exc}") from None

    def acceptance_set(self) -> AcceptanceSet:
        if not self.acceptance:
            raise ConfigError("field 'acceptance': at least one signal is required")
        try:
            return AcceptanceSet(self.acceptance, self.allow_uninformative)
        except ModelError as exc:
            raise ConfigError(f"field 'acceptance': {exc}") from None


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return RunConfig.from_dict(data)


def config_from_args(args) -> RunConfig:
    cfg = load_config(getattr(args, "config", None))
    overrides: dict = {}
    try:
        if args.mu is not None:
            overrides["mu"] = as_fraction(args.mu, "mu")
        if args.pi_star is not None:
            overrides["pi_star"] = as_fraction(args.pi_star, "pi_star")
            overrides["utilities"] = None
        if args.acceptance is not None:
            overrides["acceptance"] = tuple(Signal.of(s) for s in args.acceptance.split(",") if s.strip())
    except ModelError as exc:
        raise ConfigError(f"command line: {exc}") from None
    if getattr(args, "allow_uninformative", False):
        overrides["allow_uninformative"] = True
    if getattr(args, "single_item", False):
        overrides["single_item"] = True
    if getattr(args, "solver_path", None) is not None:
        overrides["solver_path"] = args.solver_path
    return replace(cfg, **overrides)


# -- output helpers ---------------------------------------------------------


def _decimal(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, str):
        try:
            value = Fraction(value)
        except ValueError:
            return value
    return f"{float(value):.6f}"


def _cell(v) -> str:
    return ", ".join(map(str, v)) if isinstance(v, list) else str(v)


def _table(rows: list[tuple[str, str]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _result_table(d: dict) -> str:
    rows = [("acceptance", ", ".join(d["acceptance"])), ("mu", d["mu"]), ("pi_star", d["pi_star"])]
    for side in ("high", "low"):
        opt = d["menu"][side]
        atoms = ", ".join(f"{s}: {_decimal(m)}" for s, m in opt["experiment"].items()) or "phi"
        rows.append((f"{side} experiment", "{" + atoms + "}"))
        rows.append((f"{side} price", _decimal(opt["price"])))
    for key in ("revenue", "rent_high", "rent_low", "receiver_payoff", "accept_prob_h", "accept_prob_l"):
        rows.append((key, _decimal(d[key])))
    rows.append(("regime", d["regime"]))
    rows.append(("solver_path", d["solver_path"]))
    return _table(rows)


def _emit(obj, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(obj, indent=2)
    if isinstance(obj, dict) and "menu" in obj:
        return _result_table(obj)
    if isinstance(obj, dict) and "results" in obj:
        blocks = []
        for entry in obj["results"]:
            blocks.append(_result_table(entry) if "menu" in entry else _table([(k, _cell(v)) for k, v in entry.items()]))
        blocks.append(f"agree  {obj['agree']}")
        return "\n\n".join(blocks)
    return _table([(k, _cell(v)) for k, v in obj.items()])


# -- commands ---------------------------------------------------------------


def _solve_one(cfg: RunConfig, path: str):
    E, p = cfg.acceptance_set(), cfg.params()
    if cfg.single_item:
        return solve_single_item(E, p)
    if path == "lp" and not p.pessimistic:
        raise ConfigError("field 'mu': the menu solver requires mu < pi_star")
    return solve(E, p, path)


def cmd_solve(cfg: RunConfig, fmt: str = "json") -> tuple[int, str]:
    p = cfg.params()
    if not p.pessimistic:
        raise ConfigError("field 'mu': the menu solver requires mu < pi_star")
    if cfg.solver_path != "all":
        return EXIT_OK, _emit(_solve_one(cfg, cfg.solver_path).to_dict(), fmt)
    results, certificates = [], []
    for path in SOLVER_PATHS:
        try:
            r = _solve_one(cfg, path)
        except ConditionsNotMet as exc:
            results.append({"solver_path": path, "skipped": str(exc)})
            continue
        results.append(r.to_dict())
        certificates.append(r.certificate)
    agree = len(set(certificates)) == 1
    return (EXIT_OK if agree else EXIT_DISAGREE), _emit({"results": results, "agree": agree}, fmt)


def cmd_classify(cfg: RunConfig, fmt: str = "json") -> tuple[int, str]:
    E, p = cfg.acceptance_set(), cfg.params()
    if not p.pessimistic:
        raise ConfigError("field 'mu': classification requires mu < pi_star")
    r = solve_single_item(E, p) if cfg.single_item else solve_revenue_max(E, p)
    out = {
        "acceptance": E.to_list(),
        "regime": classify(r, E),
        "separating_threshold": separating_threshold(E, p),
        "revenue": format_fraction(r.revenue),
    }
    return EXIT_OK, _emit(out, fmt)


def sweep_values(start: Fraction, stop: Fraction, steps: int) -> list[Fraction]:
    """steps points ending at stop, excluding start."""
    return [start + (stop - start) * k / steps for k in range(1, steps + 1)]


def _sweep_row(task) -> dict:
    cfg, param, value = task
    if param == "mu":
        cfg = replace(cfg, mu=value)
    elif param == "pi_star":
        cfg = replace(cfg, pi_star=value, utilities=None)
    else:
        cfg = replace(cfg, acceptance=(Signal(value),))
    p = cfg.params()
    if not p.pessimistic:
        raise ConfigError(f"sweep point {param}={format_fraction(value)} violates mu < pi_star")
    r = _solve_one(cfg, "lp")
    naive = naive_receiver_solve(p)
    pay = r.welfare.receiver_payoff
    return {
        "param": param,
        "value": format_fraction(value),
        "revenue": format_fraction(r.revenue),
        "rent_high": format_fraction(r.rent_high),
        "receiver_payoff": "" if pay is None else format_fraction(pay),
        "regime": r.regime,
        "naive_regime": naive.regime,
    }


def cmd_sweep(cfg: RunConfig, param: str, start, stop, steps: int, fmt: str = "csv", jobs: int = 1) -> tuple[int, str]:
    if steps < 1:
        raise ConfigError("--steps must be at least 1")
    start, stop = as_fraction(start, "from"), as_fraction(stop, "to")
    values = sweep_values(start, stop, steps)
    if param in ("mu", "pi_star"):
        if any(not 0 < v < 1 for v in values):
            raise ConfigError(f"sweep range for {param} must stay inside (0, 1)")
    elif param == "e_star":
        if any(v <= 0 for v in values):
            raise ConfigError("sweep range for e_star must be positive")
    else:
        raise ConfigError(f"unknown sweep parameter {param!r}")
    tasks = [(cfg, param, v) for v in values]
    for task in tasks:
        # validate every point up front so errors surface before work starts
        c = task[0]
        if param == "mu":
            c = replace(c, mu=task[2])
        elif param == "pi_star":
            c = replace(c, pi_star=task[2], utilities=None)
        p = c.params()
        if not p.pessimistic:
            raise ConfigError(f"sweep point {param}={format_fraction(task[2])} violates mu < pi_star")
        if param == "e_star":
            AcceptanceSet((Signal(task[2]),), c.allow_uninformative)
        else:
            c.acceptance_set()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    if fmt == "json":
        return EXIT_OK, json.dumps(rows, indent=2)
    if fmt == "table":
        shown_rows = []
        for r in rows:
            shown = dict(r)
            for key in ("value", "revenue", "rent_high", "receiver_payoff"):
                shown[key] = _decimal(r[key] or None)
            shown_rows.append(shown)
        widths = {c: max(len(c), *(len(r[c]) for r in shown_rows)) for c in SWEEP_COLUMNS}
        lines = ["  ".join(c.ljust(widths[c]) for c in SWEEP_COLUMNS).rstrip()]
        for shown in shown_rows:
            lines.append("  ".join(shown[c].ljust(widths[c]) for c in SWEEP_COLUMNS).rstrip())
        return EXIT_OK, "\n".join(lines)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return EXIT_OK, buf.getvalue().rstrip("\n")


INVARIANTS = (
    "lp_equals_vertex_enumeration",
    "lp_equals_support_enumeration",
    "grid_below_exact",
    "high_type_accepted_surely",
    "low_type_ir_binds",
    "support_bounds",
    "menu_obedient",
    "subset_obedience_matches_pointwise",
)


def check_instance(E: AcceptanceSet, p: MarketParams, resolution: int) -> dict[str, bool]:
    lp = build_lp(E, p)
    r = solve_revenue_max(E, p)
    exact = r.certificate
    vertex_value, _ = vertex_enumerate(lp)
    support_value = best_support_menu(E, p).objective
    grid_value = grid_search_menus(E, p, GridSpec(resolution)).objective
    supports_ok = True
    for pt in optimal_vertices(lp):
        x, y = lp.split(pt)
        if sum(1 for v in x.values() if v) > 3 or sum(1 for v in y.values() if v) > 2:
            supports_ok = False
    pointwise = check_obedience(r.menu, E, p)
    return {
        "lp_equals_vertex_enumeration": exact == vertex_value,
        "lp_equals_support_enumeration": exact == support_value,
        "grid_below_exact": grid_value <= exact,
        "high_type_accepted_surely": exact == 0 or sum(r.x.values()) == 1,
        "low_type_ir_binds": r.welfare.rent_low == 0,
        "support_bounds": supports_ok,
        "menu_obedient": pointwise.overall,
        "subset_obedience_matches_pointwise": obedience_by_subsets(r.menu, E, p)
        == pointwise.receiver_obedience.passed,
    }


def _instance_record(seed, E: AcceptanceSet, p: MarketParams) -> dict:
    return {
        "seed": seed,
        "mu": format_fraction(p.mu),
        "pi_star": format_fraction(p.pi_star),
        "acceptance": E.to_list(),
    }


def _verify_task(task):
    seed, cfg, resolution = task
    if cfg is None:
        E, p = random_instance(seed)
    else:
        E, p = cfg.acceptance_set(), cfg.params()
    return _instance_record(seed, E, p), check_instance(E, p, resolution)


def cmd_verify(trials: int, resolution: int, seed: int, cfg: RunConfig | None = None, fmt: str = "table", jobs: int = 1) -> tuple[int, str]:
    if trials < 1:
        raise ConfigError("--trials must be at least 1")
    if resolution < 8:
        raise ConfigError("--resolution must be at least 8")
    if cfg is not None:
        p = cfg.params()
        if not p.pessimistic:
            raise ConfigError("field 'mu': verification requires mu < pi_star")
        tasks = [(None, cfg, resolution)]
    else:
        tasks = [(seed + i, None, resolution) for i in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_verify_task, tasks))
    else:
        outcomes = [_verify_task(t) for t in tasks]
    counts = {name: 0 for name in INVARIANTS}
    failures = []
    for record, checks in outcomes:
        for name, ok in checks.items():
            counts[name] += ok
        failed = [name for name, ok in checks.items() if not ok]
        if failed:
            failures.append({**record, "failed": failed})
    total = len(outcomes)
    if fmt == "json":
        text = json.dumps({"trials": total, "passed": counts, "failures": failures}, indent=2)
    else:
        lines = [f"{name}: {counts[name]}/{total}" for name in INVARIANTS]
        for f in failures:
            lines.append("FAILED " + json.dumps(f))
        lines.append("all invariants hold" if not failures else f"{len(failures)} failing instance(s)")
        text = "\n".join(lines)
    return (EXIT_VERIFY if failures else EXIT_OK), text


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="certmenu", description="Revenue-maximizing certification menus.")
    sub = parser.add_subparsers(dest="command", required=True)

    def market_flags(sp, default_output):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--acceptance", help="comma separated accepted signals, e.g. 2,1/2,inf")
        sp.add_argument("--mu", help="prior probability of the high type")
        sp.add_argument("--pi-star", dest="pi_star", help="receiver acceptance threshold")
        sp.add_argument("--output", choices=("json", "table", "csv"), default=default_output)
        sp.add_argument("--solver-path", dest="solver_path", choices=SOLVER_PATHS + ("all",))
        sp.add_argument("--allow-uninformative", action="store_true", help="permit the signal 1 in the acceptance set")
        sp.add_argument("--single-item", action="store_true", help="offer one experiment to both types")

    market_flags(sub.add_parser("solve", help="optimal menu for one acceptance set"), "json")
    market_flags(sub.add_parser("classify", help="regime label and separation test"), "json")
    sweep = sub.add_parser("sweep", help="comparative statics over one parameter")
    market_flags(sweep, "csv")
    sweep.add_argument("--param", choices=("mu", "pi_star", "e_star"), required=True)
    sweep.add_argument("--from", dest="start", required=True)
    sweep.add_argument("--to", dest="stop", required=True)
    sweep.add_argument("--steps", type=int, default=10)
    sweep.add_argument("--jobs", type=int, default=1)
    verify = sub.add_parser("verify", help="cross-check solvers on random instances")
    verify.add_argument("--config", help="replay a single instance instead of random ones")
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--resolution", type=int, default=24)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--output", choices=("json", "table"), default="table")
    verify.add_argument("--jobs", type=int, default=1)
    return parser


def run(argv=None) -> tuple[int, str]:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            cfg = load_config(args.config) if args.config else None
            return cmd_verify(args.trials, args.resolution, args.seed, cfg, args.output, args.jobs)
        cfg = config_from_args(args)
        if args.command == "solve":
            if args.output == "csv":
                raise ConfigError("solve supports json or table output")
            return cmd_solve(cfg, args.output)
        if args.command == "classify":
            return cmd_classify(cfg, "table" if args.output == "table" else "json")
        return cmd_sweep(cfg, args.param, args.start, args.stop, args.steps, args.output, args.jobs)
    except (ConfigError, ModelError) as exc:
        return EXIT_USAGE, f"error: {exc}"


def main(argv=None) -> int:
    code, text = run(argv)
    stream = sys.stderr if code == EXIT_USAGE else sys.stdout
    print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
