"""Command-line front end for batch runs over tick files and scenarios.

Subcommands: validate, moments, vwap, autocorr, density, price, optimize,
simulate. Every flag can also be set in the config file ([run] section for
top-level settings) or through an MBM_* environment variable; flags win
over the environment, which wins over the file.

Exit codes: 0 success, 1 input error, 2 numerical failure, 3 assumption
violation under --strict. Diagnostics go to stderr, summaries to stdout,
results to the output files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import density as density_mod
from . import moments as moments_mod
from .config import (
    ENV_PREFIX,
    build_scenario,
    build_sim_spec,
    build_solver_options,
    build_utility,
    load_config,
)
from .errors import ConvergenceError, DataError, DomainError
from .pricing import (
    TwoTradeScenario,
    optimize_holdings,
    solve_price_first_purchase,
    solve_price_second_purchase,
    solve_price_single,
    solve_price_two_sales,
)
from .simulate import gen_trades
from .ticks import parse_ticks, partition_windows, render_ticks, window_from_ticks

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2
EXIT_STRICT = 3


class StrictViolation(Exception):
    """An assumption violation promoted to an error by --strict."""


# (flag dest, [run] config key, MBM_ env suffix)
_RUN_KEYS = [
    ("input", "input", "INPUT"),
    ("output", "output", "OUTPUT"),
    ("window", "window", "WINDOW"),
    ("order", "order", "ORDER"),
    ("method", "method", "METHOD"),
    ("strict", "strict", "STRICT"),
    ("seed", "seed", "SEED"),
    ("mode", "mode", "MODE"),
    ("lag", "lag", "LAG"),
    ("density_method", "density_method", "DENSITY_METHOD"),
    ("damping_sigma", "damping_sigma", "DAMPING_SIGMA"),
    ("grid", "grid", "GRID"),
    ("lo", "lo", "LO"),
    ("hi", "hi", "HI"),
    ("decorrelation_threshold", "decorrelation_threshold", "DECORRELATION_THRESHOLD"),
    ("samples", "samples", "SAMPLES"),
]

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise DataError(f"cannot parse boolean value {raw!r}")


def _resolve_settings(args: argparse.Namespace, file_cfg: dict) -> dict:
    """flag > environment > config file > parser default."""
    run_section = file_cfg.get("run", {})
    settings = {}
    for dest, cfg_key, env_key in _RUN_KEYS:
        value = getattr(args, dest, None)
        if value is None:
            env = os.environ.get(ENV_PREFIX + env_key)
            if env is not None:
                value = env
            elif cfg_key in run_section:
                value = run_section[cfg_key]
        settings[dest] = value
    if isinstance(settings["strict"], str):
        settings["strict"] = _parse_bool(settings["strict"])
    settings["strict"] = bool(settings["strict"])
    return settings


def _require(settings: dict, key: str) -> str:
    if settings.get(key) is None:
        raise DataError(f"missing required setting {key!r} (flag, MBM_ env, or [run] config)")
    return settings[key]


def _as_int(value, name: str) -> int:
    try:
        return int(str(value))
    except ValueError:
        raise DataError(f"{name} must be an integer, got {value!r}") from None


def _as_float(value, name: str) -> float:
    try:
        return float(str(value))
    except ValueError:
        raise DataError(f"{name} must be a number, got {value!r}") from None


def _read_series(settings: dict):
    path = _require(settings, "input")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    return parse_ticks(text)


def _write_text(path: str | None, text: str):
    if path is None:
        raise DataError("missing required setting 'output'")
    Path(path).write_text(text, encoding="utf-8")


def _write_json(path: str | None, payload):
    _write_text(path, json.dumps(payload, indent=2) + "\n")


def _windows(settings: dict, series):
    window_len = _as_int(_require(settings, "window"), "window")
    mode = settings.get("mode") or "disjoint"
    return partition_windows(series, window_len, mode)


def _apply_overrides(file_cfg: dict, overrides):
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise DataError(f"--set expects section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        file_cfg.setdefault(section, {})[key] = value
    return file_cfg


def cmd_validate(settings: dict, file_cfg: dict) -> int:
    series = _read_series(settings)
    spacing = "irregular" if series.tick_spacing is None else repr(series.tick_spacing)
    print(f"ok ticks={len(series)} spacing={spacing}")
    return EXIT_OK


def cmd_moments(settings: dict, file_cfg: dict) -> int:
    series = _read_series(settings)
    windows = _windows(settings, series)
    order = _as_int(_require(settings, "order"), "order")
    method = _require(settings, "method")
    threshold = _as_float(settings.get("decorrelation_threshold") or 0.2, "decorrelation_threshold")

    results = []
    violations = []
    for idx, win in enumerate(windows):
        ms = moments_mod.compute_moment_set(win, order, method)
        results.append(ms.to_json_dict())
        flags = ",".join(ms.flags) if ms.flags else "-"
        print(
            f"window {idx} center_time={ms.center_time!r} mean={ms.mean!r} "
            f"variance={ms.variance!r} flags={flags}"
        )
        if settings["strict"]:
            if "negative_variance" in ms.flags:
                violations.append(f"window {idx}: negative market variance {ms.variance!r}")
            if len(win) >= 2:
                diag = moments_mod.decorrelation_diagnostic(win, 2, threshold)
                if diag.flagged:
                    violations.append(
                        f"window {idx}: order-2 price/volume correlation "
                        f"{diag.coefficient!r} exceeds {threshold!r}"
                    )
    if settings.get("output"):
        _write_json(settings["output"], results)
    if violations:
        raise StrictViolation("; ".join(violations))
    return EXIT_OK


def cmd_vwap(settings: dict, file_cfg: dict) -> int:
    series = _read_series(settings)
    windows = _windows(settings, series)
    lines = ["center_time,vwap"]
    for idx, win in enumerate(windows):
        value = moments_mod.vwap(win)
        lines.append(f"{win.center_time!r},{value!r}")
        print(f"window {idx} center_time={win.center_time!r} vwap={value!r}")
    if settings.get("output"):
        _write_text(settings["output"], "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_autocorr(settings: dict, file_cfg: dict) -> int:
    series = _read_series(settings)
    windows = _windows(settings, series)
    method = _require(settings, "method")
    lag = _as_int(settings.get("lag") or 1, "lag")
    if lag < 0:
        raise DataError(f"lag must be >= 0, got {lag}")
    if len(windows) <= lag:
        raise DataError(f"need more than {lag} windows for lag {lag}, got {len(windows)}")
    results = []
    for idx in range(len(windows) - lag):
        w1, w2 = windows[idx], windows[idx + lag]
        value = moments_mod.price_autocorrelation(w1, w2, method)
        results.append(
            {
                "center_time_1": w1.center_time,
                "center_time_2": w2.center_time,
                "autocorrelation": value,
            }
        )
        print(
            f"window {idx} t1={w1.center_time!r} t2={w2.center_time!r} autocorr={value!r}"
        )
    if settings.get("output"):
        _write_json(settings["output"], results)
    return EXIT_OK


def _parse_grid_setting(raw: str):
    parts = raw.split(":")
    if len(parts) != 3:
        raise DataError(f"grid must be LO:HI:POINTS, got {raw!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def cmd_density(settings: dict, file_cfg: dict) -> int:
    series = _read_series(settings)
    window = window_from_ticks(series.ticks)
    order = _as_int(_require(settings, "order"), "order")
    method = _require(settings, "method")
    ms = moments_mod.compute_moment_set(window, order, method)
    if "negative_variance" in ms.flags and settings["strict"]:
        raise StrictViolation(
            f"moment set has negative market variance {ms.variance!r}; density undefined"
        )
    grid_spec = _parse_grid_setting(_require(settings, "grid"))
    density_method = settings.get("density_method") or "gram_charlier"
    if density_method == "gram_charlier":
        approx = density_mod.density_gram_charlier(ms, grid_spec)
    elif density_method == "damped":
        damping = _as_float(_require(settings, "damping_sigma"), "damping_sigma")
        approx = density_mod.density_damped_inversion(ms, damping, grid_spec)
    else:
        raise DataError(f"density_method must be gram_charlier or damped, got {density_method!r}")

    out = _require(settings, "output")
    _write_text(out, approx.to_csv_text())
    _write_json(str(Path(out).with_suffix(".json")), approx.to_json_dict())
    print(
        f"density method={approx.method} mass={approx.total_mass!r} "
        f"mean={approx.recovered_mean!r} variance={approx.recovered_variance!r} "
        f"negative_mass_fraction={approx.negative_mass_fraction!r}"
    )
    return EXIT_OK


def _scenario_from_cfg(file_cfg: dict):
    if "scenario" not in file_cfg or "utility" not in file_cfg:
        raise DataError("price/optimize commands need [scenario] and [utility] config sections")
    utility = build_utility(file_cfg["utility"])
    scenario = build_scenario(file_cfg["scenario"], utility)
    options = build_solver_options(file_cfg.get("solver"))
    return scenario, options


def cmd_price(settings: dict, file_cfg: dict) -> int:
    scenario, options = _scenario_from_cfg(file_cfg)
    kind = file_cfg["scenario"].get("kind", "single")
    payload: dict = {"kind": kind}
    if kind == "single":
        sol = solve_price_single(scenario, options)
        payload["solution"] = sol.to_json_dict()
        print(f"p0={sol.mean_price!r} residual={sol.residual!r} iterations={sol.iterations}")
    else:
        assert isinstance(scenario, TwoTradeScenario)
        first = solve_price_first_purchase(scenario, options)
        if kind == "two_purchase":
            second = solve_price_second_purchase(scenario, options, first=first)
        else:
            second = solve_price_two_sales(scenario, options, first=first)
        payload["first_purchase"] = first.to_json_dict()
        payload["second_purchase"] = second.to_json_dict()
        print(
            f"p0(t1)={first.mean_price!r} p0(t2)={second.mean_price!r} "
            f"residuals=({first.residual!r}, {second.residual!r})"
        )
    if settings.get("output"):
        _write_json(settings["output"], payload)
    return EXIT_OK


def _read_samples(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read samples {path}: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip().lower() != "price,payoff":
        raise DataError("samples file needs header 'price,payoff'")
    prices, payoffs = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise DataError(f"samples line {lineno}: expected 2 fields")
        try:
            prices.append(float(parts[0]))
            payoffs.append(float(parts[1]))
        except ValueError:
            raise DataError(f"samples line {lineno}: non-numeric field") from None
    if not prices:
        raise DataError("samples file has no rows")
    return prices, payoffs


def cmd_optimize(settings: dict, file_cfg: dict) -> int:
    scenario, _ = _scenario_from_cfg(file_cfg)
    prices, payoffs = _read_samples(_require(settings, "samples"))
    lo = _as_float(settings.get("lo") or 0.0, "lo")
    hi_raw = settings.get("hi")
    if hi_raw is None:
        raise DataError("optimize needs an upper holdings bound (--hi or [run] hi)")
    hi = _as_float(hi_raw, "hi")
    result = optimize_holdings(scenario, prices, payoffs, (lo, hi))
    print(
        f"holdings={result.holdings!r} at_boundary={result.at_boundary} "
        f"foc_residual={result.foc_residual!r}"
    )
    if settings.get("output"):
        _write_json(settings["output"], result.to_json_dict())
    return EXIT_OK


def cmd_simulate(settings: dict, file_cfg: dict) -> int:
    if "simulate" not in file_cfg:
        raise DataError("simulate needs a [simulate] config section")
    section = dict(file_cfg["simulate"])
    if settings.get("seed") is not None:
        section["seed"] = str(settings["seed"])
    spec = build_sim_spec(section)
    series = gen_trades(spec)
    _write_text(_require(settings, "output"), render_ticks(series))
    print(f"simulated ticks={len(series)} seed={spec.seed}")
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "moments": cmd_moments,
    "vwap": cmd_vwap,
    "autocorr": cmd_autocorr,
    "density": cmd_density,
    "price": cmd_price,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbm",
        description="Market-based price moments, densities, and pricing solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("validate", "parse a tick file and check the value identity"),
        ("moments", "per-window price moments (frequency or market)"),
        ("vwap", "per-window volume weighted average price"),
        ("autocorr", "price autocorrelation between lagged windows"),
        ("density", "approximate price density from a moment set"),
        ("price", "solve the mean-price equations for a scenario"),
        ("optimize", "optimal holdings for sampled prices/payoffs"),
        ("simulate", "generate a synthetic tick file"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="config file (key=value sections)")
        p.add_argument("--set", action="append", dest="overrides", metavar="SECTION.KEY=VALUE",
                       help="override one config value")
        p.add_argument("--input", help="input tick-CSV path")
        p.add_argument("--output", help="output file path")
        p.add_argument("--window", help="ticks per window")
        p.add_argument("--order", help="highest moment order")
        p.add_argument("--method", choices=["frequency", "market"], help="averaging method")
        p.add_argument("--mode", choices=["disjoint", "sliding"], help="windowing mode")
        p.add_argument("--lag", help="window lag for autocorr")
        p.add_argument("--grid", help="density grid LO:HI:POINTS")
        p.add_argument("--density-method", dest="density_method",
                       choices=["gram_charlier", "damped"], help="density realization")
        p.add_argument("--damping-sigma", dest="damping_sigma",
                       help="damping width for the inversion integral")
        p.add_argument("--seed", help="simulation seed")
        p.add_argument("--samples", help="price,payoff samples CSV for optimize")
        p.add_argument("--lo", help="lower holdings bound")
        p.add_argument("--hi", help="upper holdings bound")
        p.add_argument("--decorrelation-threshold", dest="decorrelation_threshold",
                       help="|correlation| that counts as an assumption violation")
        p.add_argument("--strict", action="store_const", const=True, default=None,
                       help="exit 3 on assumption violations")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    file_cfg = load_config(args.config) if args.config else {}
    file_cfg = _apply_overrides(file_cfg, getattr(args, "overrides", None))
    settings = _resolve_settings(args, file_cfg)
    return _COMMANDS[args.command](settings, file_cfg)


def main(argv=None) -> int:
    try:
        return run(argv)
    except StrictViolation as exc:
        print(f"strict violation: {exc}", file=sys.stderr)
        return EXIT_STRICT
    except (ConvergenceError, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DataError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
