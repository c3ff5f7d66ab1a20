"""Command-line front end.

Every command prints one document. JSON documents have the top-level keys
``config`` (the fully resolved run configuration), ``result`` and
``diagnostics``; CSV renders the command's table, or ``key,value`` lines for
commands without one. Numbers carry 15 significant digits in both formats.

Exit codes: 0 success, 1 invalid input, 2 no equilibrium or unspecified
boundary case, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

import numpy as np

from flipflop import __version__
from flipflop.core import GameParams, PlatformPair, secured_interval, weak_favorite_threshold
from flipflop.errors import (
    BoundaryUnspecifiedError,
    FlipFlopError,
    InvalidInputError,
    NoBestResponseError,
)
from flipflop.first_stage import (
    SPNE,
    EpsilonEquilibrium,
    exante_payoff,
    psi,
    region_partition,
    response_threshold,
    solve_first_stage,
)
from flipflop.kernels import exante_payoff_grid
from flipflop.subgame import KnifeEdgePolicy, solve_subgame
from flipflop.verification import (
    SimulationConfig,
    check_implications,
    comparative_sweep,
    run_verification,
    simulate,
)

EXIT_OK, EXIT_INVALID, EXIT_NO_EQUILIBRIUM, EXIT_VERIFY_FAILED = range(4)
DEFAULT_A = "1/3"
DEFAULT_PHI = "0.3"
DEFAULT_DRAWS = 1_000_000


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Exit(EXIT_INVALID, message)


def number(text) -> float:
    """Parse a decimal or an ``n/d`` fraction."""
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError(f"not a number: {text!r}") from None


def number_list(text) -> list[float]:
    return [number(t) for t in str(text).split(",") if t.strip()]


# --- configuration -----------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    a1: float
    a2: float
    phi: float
    x1: float | None = None
    x2: float | None = None
    m: float | None = None
    at_equilibrium: bool = False
    draws: int | None = None
    seed: int = 0
    workers: int = 1
    grid: int = 10_001
    epsilon: float | None = None
    knife_edge_policy: str = KnifeEdgePolicy.FAIR_COIN.value
    a_values: list | None = None
    phi_values: list | None = None
    inject_perturbed: bool = False
    backend: str | None = None
    format: str = "json"
    out: str | None = None

    @property
    def params(self) -> GameParams:
        return GameParams(self.a1, self.a2, self.phi)

    @property
    def platforms(self) -> PlatformPair | None:
        if self.x1 is None and self.x2 is None:
            return None
        if self.x1 is None or self.x2 is None:
            raise InvalidInputError("give both --x1 and --x2")
        return PlatformPair(self.x1, self.x2)


_CONVERTERS = {
    "a": number, "a1": number, "a2": number, "phi": number, "x1": number, "x2": number,
    "m": number, "epsilon": number, "draws": int, "seed": int, "workers": int, "grid": int,
    "a_values": number_list, "phi_values": number_list,
}
_FLAGS = {"at_equilibrium", "inject_perturbed"}


def read_config_file(path: str) -> dict:
    """``key = value`` lines; keys are flag names with or without dashes."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config file: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key in _FLAGS:
            values[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            values[key] = value
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the optional config file and command-line flags (flags win)."""
    merged = read_config_file(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None or (key in _FLAGS and value is False):
            continue
        merged[key] = value

    known = {f.name for f in fields(RunConfig)} | {"a"}
    unknown = set(merged) - known
    if unknown:
        raise InvalidInputError(f"unknown configuration keys: {sorted(unknown)}")
    for key, conv in _CONVERTERS.items():
        if key in merged and isinstance(merged[key], str):
            try:
                merged[key] = conv(merged[key])
            except ValueError:
                raise InvalidInputError(f"bad value for {key}: {merged[key]!r}") from None

    a = merged.pop("a", None)
    a = number(DEFAULT_A) if a is None else a
    merged.setdefault("a1", a)
    merged.setdefault("a2", a)
    merged.setdefault("phi", number(DEFAULT_PHI))
    if args.command == "simulate":
        merged.setdefault("draws", DEFAULT_DRAWS)
    if merged.get("format", "json") not in ("json", "csv"):
        raise InvalidInputError("format must be json or csv")
    merged["knife_edge_policy"] = KnifeEdgePolicy(merged.get("knife_edge_policy", "fair-coin")).value
    cfg = RunConfig(command=args.command, **merged)
    cfg.params  # validate early
    cfg.platforms
    if cfg.m is not None and not 0 <= cfg.m <= 1:
        raise InvalidInputError("--m must lie in [0, 1]")
    if cfg.grid < 2:
        raise InvalidInputError("--grid must be at least 2")
    return cfg


# --- rendering ---------------------------------------------------------------


def fmt(x):
    """Round floats to 15 significant digits; NaN and infinities become None."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating, Fraction)):
        x = float(x)
        return float(f"{x:.15g}") if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    return x


def exact(x: float, max_denominator: int = 10_000) -> str | None:
    """Rational string for ``x`` when a small-denominator fraction reproduces it."""
    frac = Fraction(x).limit_denominator(max_denominator)
    return str(frac) if abs(float(frac) - x) <= 4 * math.ulp(max(abs(x), 1.0)) else None


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out.append((prefix, value))


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.15g}"
    if isinstance(v, list):
        return ";".join(_csv_cell(x) for x in v)
    return str(v)


def render(doc: dict, table: list[dict] | None, fmt_name: str) -> str:
    doc = fmt(doc)
    if fmt_name == "json":
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if table:
        table = fmt(table)
        header = list(table[0])
        writer.writerow(header)
        for row in table:
            writer.writerow([_csv_cell(row.get(k)) for k in header])
    else:
        rows = []
        _flatten("", doc["result"], rows)
        writer.writerow(["key", "value"])
        writer.writerows((k, _csv_cell(v)) for k, v in rows)
    return buf.getvalue()


# --- commands ----------------------------------------------------------------


def _region_rows(pair: PlatformPair, params: GameParams) -> list[dict]:
    return [
        {"lo": r.lo, "hi": r.hi, "lo_exact": exact(r.lo), "hi_exact": exact(r.hi),
         "status": str(r.status), "payoff1": r.payoff1, "payoff2": r.payoff2, "length": r.length}
        for r in region_partition(pair, params)
    ]


def _thresholds(params: GameParams) -> dict:
    return {
        "psi1": psi(params.a1), "psi2": psi(params.a2),
        "response1": response_threshold(1, params), "response2": response_threshold(2, params),
    }


def _landmarks(pair: PlatformPair, params: GameParams) -> dict:
    s1, s2 = secured_interval(1, pair, params), secured_interval(2, pair, params)
    return {
        "secured1": [s1.lo, s1.hi], "secured2": [s2.lo, s2.hi],
        "midpoint": (pair.x1 + pair.x2) / 2,
        "weak_favorite_threshold": weak_favorite_threshold(pair, params),
    }


def _equilibrium_pair(cfg: RunConfig) -> PlatformPair:
    sol = solve_first_stage(cfg.params)
    if not isinstance(sol, SPNE):
        raise _Exit(EXIT_NO_EQUILIBRIUM, "no divergent equilibrium at these parameters")
    return sol.pair


def _platforms(cfg: RunConfig, default_to_equilibrium: bool) -> PlatformPair:
    pair = cfg.platforms
    if cfg.at_equilibrium or (pair is None and default_to_equilibrium):
        return _equilibrium_pair(cfg)
    if pair is None:
        raise InvalidInputError("give --x1 and --x2 or --at-equilibrium")
    return pair


def cmd_solve(cfg: RunConfig):
    params = cfg.params
    sol = solve_first_stage(params)
    result = {"thresholds": _thresholds(params)}
    diagnostics = {}
    code = EXIT_OK
    if isinstance(sol, SPNE):
        pair = sol.pair
        rows = _region_rows(pair, params)
        result.update(
            variant="spne", x1=sol.x1_star, x2=sol.x2_star, payoff1=sol.payoff1, payoff2=sol.payoff2,
            left_candidate=sol.left, landmarks=_landmarks(pair, params),
            boundaries=[rows[0]["lo"]] + [r["hi"] for r in rows],
            boundaries_exact=[rows[0]["lo_exact"]] + [r["hi_exact"] for r in rows],
            open_probability=region_partition(pair, params).open_probability,
        )
        diagnostics["regions"] = rows
    elif isinstance(sol, EpsilonEquilibrium):
        result.update(variant="epsilon_equilibrium", center=sol.center,
                      loss_coefficient=sol.loss_coefficient)
        if cfg.epsilon is not None:
            pair = sol.profile(cfg.epsilon)
            g1, g2 = exante_payoff(pair, params)
            grid = np.linspace(0.0, 1.0, cfg.grid)
            best = exante_payoff_grid(grid, pair.x2, 1, params, cfg.backend).max()
            result["profile"] = {
                "epsilon": cfg.epsilon, "x1": pair.x1, "x2": pair.x2, "payoff1": g1, "payoff2": g2,
                "loss_bound": sol.loss_coefficient * cfg.epsilon,
                "measured_deviation_gain": max(best - g1, 0.0), "grid": cfg.grid,
            }
    else:
        result.update(variant="no_equilibrium", reason=sol.reason)
        code = EXIT_NO_EQUILIBRIUM
    return result, diagnostics, None, code


def cmd_regions(cfg: RunConfig):
    pair = _platforms(cfg, default_to_equilibrium=False)
    params = cfg.params
    if pair.identical:
        row = {"lo": 0.0, "hi": 1.0, "status": "error",
               "detail": "identical platforms: no favorite, no partition"}
        return {"rows": [row]}, {}, [row], EXIT_INVALID
    rows = _region_rows(pair, params)
    result = {
        "x1": pair.x1, "x2": pair.x2, "rows": rows,
        "boundaries": [rows[0]["lo"]] + [r["hi"] for r in rows],
        "boundaries_exact": [rows[0]["lo_exact"]] + [r["hi_exact"] for r in rows],
    }
    return result, {"landmarks": _landmarks(pair, params)}, rows, EXIT_OK


def cmd_payoff(cfg: RunConfig):
    pair = _platforms(cfg, default_to_equilibrium=False)
    params = cfg.params
    g1, g2 = exante_payoff(pair, params)
    result = {"x1": pair.x1, "x2": pair.x2, "payoff1": g1, "payoff2": g2}
    diagnostics = {}
    if cfg.m is not None:
        eq = solve_subgame(pair, cfg.m, params, KnifeEdgePolicy.FAIR_COIN)
        result["subgame"] = {
            "m": cfg.m, "status": str(eq.status),
            "adjust_probability1": eq.action1.adjust_probability,
            "adjust_target1": eq.action1.adjust_target,
            "adjust_probability2": eq.action2.adjust_probability,
            "adjust_target2": eq.action2.adjust_target,
            "payoff1": eq.expected_payoff1, "payoff2": eq.expected_payoff2,
        }
        diagnostics["knife_edge"] = type(eq.status).__name__ == "KnifeEdge"
    return result, diagnostics, None, EXIT_OK


def cmd_simulate(cfg: RunConfig):
    pair = _platforms(cfg, default_to_equilibrium=True)
    params = cfg.params
    sim = SimulationConfig(cfg.draws, cfg.seed, cfg.workers, cfg.knife_edge_policy, cfg.backend)
    stats = simulate(pair, params, sim)
    report = check_implications(stats, params)
    stats_doc = stats.to_dict()
    counts = stats_doc.pop("counts")
    result = {"stats": stats_doc, "implications": report.to_dict()}
    diagnostics = {"analytic_payoffs": list(exante_payoff(pair, params)), "tallies": counts}
    code = EXIT_VERIFY_FAILED if report.applicable and not report.passed else EXIT_OK
    return result, diagnostics, None, code


def cmd_sweep(cfg: RunConfig):
    a_values = cfg.a_values or [cfg.a1]
    phi_values = cfg.phi_values or [cfg.phi]
    sim = None
    if cfg.draws is not None:  # simulated columns only on request
        sim = SimulationConfig(cfg.draws, cfg.seed, cfg.workers, cfg.knife_edge_policy, cfg.backend)
    rows, verdicts = [], []
    for phi in phi_values:
        sweep = comparative_sweep(a_values, phi, sim)
        rows.extend(asdict(r) for r in sweep.rows)
        verdicts.append({
            "phi": phi,
            "polarization_decreasing": sweep.polarization_decreasing,
            "open_probability_decreasing": sweep.open_probability_decreasing,
            "payoff_increasing": sweep.payoff_increasing,
        })
    return {"rows": rows, "verdicts": verdicts}, {}, rows, EXIT_OK


def cmd_verify(cfg: RunConfig):
    checks = run_verification(cfg.grid, cfg.inject_perturbed, cfg.seed, cfg.backend)
    rows = [asdict(c) for c in checks]
    failures = [r for r in rows if not r["passed"]]
    result = {"passed": not failures, "checks": rows}
    diagnostics = {"failures": failures}
    return result, diagnostics, rows, EXIT_VERIFY_FAILED if failures else EXIT_OK


COMMANDS = {
    "solve": (cmd_solve, "equilibrium of the platform stage"),
    "regions": (cmd_regions, "status regions of the median for given platforms"),
    "payoff": (cmd_payoff, "ex-ante payoffs at given platforms (and the subgame at --m)"),
    "simulate": (cmd_simulate, "Monte Carlo play with the behavioral regularity report"),
    "sweep": (cmd_sweep, "comparative statics over electoral costs"),
    "verify": (cmd_verify, "cross-check analytic results against brute-force oracles"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("parameters")
    g.add_argument("--a", help=f"electoral cost for both candidates (default {DEFAULT_A})")
    g.add_argument("--a1", help="electoral cost of candidate 1 (overrides --a)")
    g.add_argument("--a2", help="electoral cost of candidate 2 (overrides --a)")
    g.add_argument("--phi", help=f"organizational cost, in (0, 1/2) (default {DEFAULT_PHI})")
    g.add_argument("--x1", help="platform of candidate 1")
    g.add_argument("--x2", help="platform of candidate 2")
    g.add_argument("--m", help="median voter position")
    g.add_argument("--at-equilibrium", action="store_true", help="use the equilibrium platforms")
    g.add_argument("--epsilon", help="materialize the near-central profile at this epsilon")
    s = common.add_argument_group("numerics")
    s.add_argument("--draws", type=int, help=f"Monte Carlo draws (simulate default {DEFAULT_DRAWS})")
    s.add_argument("--seed", type=int, help="random seed")
    s.add_argument("--workers", type=int, help="simulation threads")
    s.add_argument("--grid", type=int, help="grid size for brute-force searches")
    s.add_argument("--knife-edge-policy", choices=["fair-coin", "reject"])
    s.add_argument("--backend", choices=["compiled", "python"], help="kernel implementation")
    s.add_argument("--a-values", help="comma-separated electoral costs for sweep")
    s.add_argument("--phi-values", help="comma-separated organizational costs for sweep")
    s.add_argument("--inject-perturbed", action="store_true",
                   help="add a non-equilibrium fixture that verify must reject")
    o = common.add_argument_group("output")
    o.add_argument("--format", choices=["json", "csv"])
    o.add_argument("--out", help="write the document here instead of stdout")
    o.add_argument("--config", help="key = value file mirroring the flags; flags win")

    parser = _Parser(prog="flipflop", description="Two-stage electoral competition with ex-post platform adjustment.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def main(argv: list[str] | None = None) -> int:
    cfg = None
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        handler = COMMANDS[cfg.command][0]
        result, diagnostics, table, code = handler(cfg)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (BoundaryUnspecifiedError, NoBestResponseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_EQUILIBRIUM
    except (InvalidInputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FlipFlopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    doc = {"config": asdict(cfg), "result": result, "diagnostics": diagnostics}
    text = render(doc, table, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
