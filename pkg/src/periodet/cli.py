"""Experiment runner.

Subcommands
-----------
solve      value-iterate one detection scenario; write curve/threshold CSVs
simulate   Monte-Carlo Bayes cost of a policy on one scenario
sweep      Bayes cost of the single-threshold rule over a threshold grid
tradeoff   delay vs false-alarm curve with the matching analytic column
reproduce  run a bundled experiment batch and diff against target values
mdp-solve  solve a generic periodic MDP instance file

Scenario configs are flat ``key = value`` text files (see ``parse_config``)
and every bundled experiment ships as one.  All outputs are CSV files with
header rows plus a human-readable summary on stdout.  Exit codes: 0 on
success, 2 on config/instance parse errors, 3 when an iteration failed to
converge, 1 on any other runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .belief import log_odds_to_belief, log_odds_step_geometric, belief_to_log_odds
from .detection_dp import DetectionCostSpec, DetectionSolution, solve_detection
from .ipid_model import Gaussian, GeometricPrior, IpidScenario, kl_information, prior_tail_exponent, sample_path
from .monte_carlo import (
    PeriodicThresholds,
    SingleThreshold,
    analytic_delay,
    default_horizon,
    estimate_add_pfa,
    estimate_bayes_cost,
    sweep_single_threshold,
)
from .periodic_mdp import (
    InstanceFormatError,
    extract_periodic_policy,
    fixed_point_residual,
    load_instance,
    value_iterate,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_PARSE = 2
EXIT_NO_CONVERGENCE = 3

# Threshold grid used by sweeps when none is given.  Dense near zero where
# the cost curve of aggressive rules has sharp structure.
DEFAULT_THRESHOLD_GRID = (
    0.002, 0.005, 0.008, 0.010, 0.012, 0.015, 0.018, 0.022, 0.027, 0.033,
    0.040, 0.050, 0.065, 0.080, 0.100, 0.125, 0.150, 0.200, 0.250, 0.300,
    0.350, 0.400, 0.450, 0.500, 0.550, 0.600, 0.650, 0.700, 0.750, 0.800,
    0.850, 0.900, 0.950,
)

DEFAULT_TRADEOFF_ALPHAS = (1e-2, 1e-3, 1e-4)


class ConfigError(ValueError):
    """Bad experiment config; carries the offending line number."""

    def __init__(self, source: str, line_no: int, message: str):
        super().__init__(f"{source}:{line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class ExperimentConfig:
    """One detection experiment: scenario, penalties, and run sizes."""

    period: int
    rho: float
    pre_means: tuple[float, ...]
    pre_vars: tuple[float, ...]
    post_means: tuple[float, ...]
    post_vars: tuple[float, ...]
    false_alarm_penalties: tuple[float, ...]
    delay_penalties: tuple[float, ...]
    grid_points: int
    tolerance: float
    max_cycles: int
    paths: int
    horizon: int
    seed: int

    def scenario(self) -> IpidScenario:
        pre = tuple(Gaussian(m, v) for m, v in zip(self.pre_means, self.pre_vars))
        post = tuple(Gaussian(m, v) for m, v in zip(self.post_means, self.post_vars))
        return IpidScenario(pre=pre, post=post)

    def cost_spec(self) -> DetectionCostSpec:
        return DetectionCostSpec(
            false_alarm=self.false_alarm_penalties,
            delay=self.delay_penalties,
            rho=self.rho,
        )


_SCALAR_FIELDS = {
    "period": int,
    "rho": float,
    "grid_points": int,
    "tolerance": float,
    "max_cycles": int,
    "paths": int,
    "horizon": int,
    "seed": int,
}
_LIST_FIELDS = (
    "pre_means",
    "pre_vars",
    "post_means",
    "post_vars",
    "false_alarm_penalties",
    "delay_penalties",
)
_REQUIRED = ("period", "rho", "pre_means", "post_means",
             "false_alarm_penalties", "delay_penalties")


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse a flat ``key = value`` config.

    Lists are comma separated; '#' starts a comment.  Every violation is
    reported with the source name and line number of the offending field.
    """
    values: dict[str, object] = {}
    lines_of: dict[str, int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(source, line_no, f"expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in values:
            raise ConfigError(source, line_no, f"duplicate field {key!r} (first at line {lines_of[key]})")
        if key in _SCALAR_FIELDS:
            try:
                values[key] = _SCALAR_FIELDS[key](value)
            except ValueError:
                raise ConfigError(source, line_no, f"field {key!r}: bad value {value!r}") from None
        elif key in _LIST_FIELDS:
            try:
                values[key] = tuple(float(v) for v in value.replace(",", " ").split())
            except ValueError:
                raise ConfigError(source, line_no, f"field {key!r}: bad list {value!r}") from None
        else:
            raise ConfigError(source, line_no, f"unknown field {key!r}")
        lines_of[key] = line_no

    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(source, 0, f"missing required field {key!r}")
    period = int(values["period"])  # type: ignore[arg-type]
    if period < 1:
        raise ConfigError(source, lines_of["period"], "period must be >= 1")
    values.setdefault("pre_vars", (1.0,) * period)
    values.setdefault("post_vars", (1.0,) * period)
    for key in _LIST_FIELDS:
        seq = values[key]
        if len(seq) != period:  # type: ignore[arg-type]
            raise ConfigError(
                source,
                lines_of.get(key, lines_of["period"]),
                f"field {key!r} has {len(seq)} entries, period is {period}",  # type: ignore[arg-type]
            )
    rho = float(values["rho"])  # type: ignore[arg-type]
    if not 0.0 < rho < 1.0:
        raise ConfigError(source, lines_of["rho"], f"rho must lie in (0, 1), got {rho}")
    values.setdefault("grid_points", 100)
    values.setdefault("tolerance", 1e-6)
    values.setdefault("max_cycles", 100_000)
    values.setdefault("paths", 10_000)
    values.setdefault("horizon", default_horizon(rho))
    values.setdefault("seed", 0)
    try:
        return ExperimentConfig(**values)  # type: ignore[arg-type]
    except (TypeError, ValueError) as exc:
        raise ConfigError(source, 0, str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), source=str(path))


def bundled_config(name: str) -> ExperimentConfig:
    text = resources.files("periodet.configs").joinpath(f"{name}.cfg").read_text()
    return parse_config(text, source=f"bundled:{name}")


# ---------------------------------------------------------------------------
# bundled experiment registry: config name, row label, target costs to diff
# against (single-threshold rule, threshold policy from the solver)

@dataclass(frozen=True)
class ReproRow:
    label: str
    config: str
    target_single: float
    target_optimal: float


REPRODUCE_TABLES: dict[str, tuple[ReproRow, ...]] = {
    "table1": (
        ReproRow("theta=0.5", "iid_theta_0.5", 11.1, 5.0),
        ReproRow("theta=1.0", "iid_theta_1.0", 12.0, 5.0),
        ReproRow("theta=2.0", "iid_theta_2.0", 9.4, 5.0),
    ),
    "table2": (
        ReproRow("means=(2.0,0.0)", "means_2.0_0.0", 7.2, 5.0),
        ReproRow("means=(2.0,0.5)", "means_2.0_0.5", 8.8, 5.0),
        ReproRow("means=(3.0,0.5)", "means_3.0_0.5", 6.6, 5.0),
        ReproRow("means=(3.0,1.0)", "means_3.0_1.0", 7.2, 5.0),
        ReproRow("means=(1.0,0.1)", "means_1.0_0.1", 9.5, 5.0),
        ReproRow("means=(0.5,0.0)", "means_0.5_0.0", 8.1, 5.0),
    ),
    "table3": (
        ReproRow("penalties=(20,5,10,1)", "alternating_t2", 10.2, 5.0),
        ReproRow("penalties=(20,5,1,1)", "penalties_20_5_1_1", 4.6, 3.7),
        ReproRow("penalties=(5,5,1,1)", "penalties_5_5_1_1", 3.2, 3.2),
    ),
}

REPRODUCE_FIGURES = {"fig1": "alternating_t2", "fig2": "decaying_t4", "fig3": "tradeoff_t2"}

FIGURE_TARGETS = {"fig1": (5.0, (0.6, 0.0)), "fig2": (5.0, None)}


# ---------------------------------------------------------------------------
# CSV helpers

def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_solution_artifacts(solution: DetectionSolution, out_dir: Path, stem: str) -> list[Path]:
    T = solution.period
    grid = solution.grid.points
    curve_header = (
        ["p"]
        + [f"stage_{s}_cost" for s in range(T)]
        + [f"stop_cost_{s}" for s in range(T)]
    )
    curve_rows = [
        [grid[i], *(solution.stage_curves[s, i] for s in range(T)),
         *(solution.stop_curves[s, i] for s in range(T))]
        for i in range(grid.size)
    ]
    paths = []
    p1 = out_dir / f"{stem}_curves.csv"
    _write_csv(p1, curve_header, curve_rows)
    paths.append(p1)
    p2 = out_dir / f"{stem}_history.csv"
    _write_csv(
        p2,
        ["cycle", "sup_distance", "l2_distance"],
        [
            [i + 1, solution.sup_history[i], solution.l2_history[i]]
            for i in range(solution.sup_history.size)
        ],
    )
    paths.append(p2)
    p3 = out_dir / f"{stem}_thresholds.csv"
    _write_csv(
        p3,
        ["stage", "threshold"],
        [[s, solution.thresholds[s]] for s in range(T)],
    )
    paths.append(p3)
    return paths


# ---------------------------------------------------------------------------
# subcommands

def _solve_from_config(cfg: ExperimentConfig) -> DetectionSolution:
    return solve_detection(
        cfg.scenario(),
        cfg.cost_spec(),
        grid_resolution=cfg.grid_points,
        tol=cfg.tolerance,
        max_cycles=cfg.max_cycles,
    )


def cmd_solve(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    solution = _solve_from_config(cfg)
    out_dir = Path(args.out_dir)
    stem = Path(args.config).stem
    files = write_solution_artifacts(solution, out_dir, stem)
    thr = ", ".join(f"{a:.4f}" for a in solution.thresholds)
    print(f"value at p=0: {solution.value_at_zero:.4f}")
    print(f"stage thresholds: ({thr})")
    print(f"cycles: {solution.cycles} (converged: {solution.converged})")
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK if solution.converged else EXIT_NO_CONVERGENCE


def _parse_policy(spec: str, solution_provider) -> SingleThreshold | PeriodicThresholds:
    if spec == "optimal":
        solution = solution_provider()
        return PeriodicThresholds(tuple(min(a, 1.0) for a in solution.thresholds))
    kind, _, rest = spec.partition(":")
    if kind == "single":
        return SingleThreshold(float(rest))
    if kind == "periodic":
        return PeriodicThresholds(tuple(float(v) for v in rest.split(",")))
    raise ValueError(
        f"bad policy spec {spec!r}; expected 'optimal', 'single:A', or 'periodic:a0,a1,...'"
    )


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    exit_code = EXIT_OK
    solution_box: list[DetectionSolution] = []

    def provider() -> DetectionSolution:
        solution = _solve_from_config(cfg)
        solution_box.append(solution)
        return solution

    policy = _parse_policy(args.policy, provider)
    if solution_box and not solution_box[0].converged:
        exit_code = EXIT_NO_CONVERGENCE
    report = estimate_bayes_cost(
        cfg.scenario(), cfg.cost_spec(), policy, cfg.paths, horizon=cfg.horizon, seed=cfg.seed
    )
    out = Path(args.out_dir) / f"{Path(args.config).stem}_simulate.csv"
    _write_csv(
        out,
        ["kind", "estimate", "std_error", "n_paths", "seed", "horizon", "censored_fraction"],
        [[report.kind, report.estimate, report.std_error, report.n_paths,
          report.seed, report.horizon, report.censored_fraction]],
    )
    print(f"policy: {args.policy}")
    print(f"bayes cost: {report.estimate:.4f} +- {report.std_error:.4f} "
          f"({report.n_paths} paths, censored {report.censored_fraction:.4f})")
    print(f"wrote {out}")
    return exit_code


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    grid = (
        tuple(float(v) for v in args.thresholds.split(","))
        if args.thresholds
        else DEFAULT_THRESHOLD_GRID
    )
    result = sweep_single_threshold(
        cfg.scenario(), cfg.cost_spec(), grid, cfg.paths, seed=cfg.seed, horizon=cfg.horizon
    )
    out = Path(args.out_dir) / f"{Path(args.config).stem}_sweep.csv"
    _write_csv(
        out,
        ["threshold", "cost", "std_error", "censored_fraction"],
        [[p.threshold, p.cost, p.std_error, p.censored_fraction] for p in result.points],
    )
    best = result.best
    print(f"best single threshold: cost {best.cost:.4f} +- {best.std_error:.4f} "
          f"at A = {best.threshold}")
    print(f"wrote {out}")
    return EXIT_OK


def _trace_rows(cfg: ExperimentConfig, horizon: int) -> list[list]:
    scenario = cfg.scenario()
    path = sample_path(scenario, GeometricPrior(cfg.rho), horizon, cfg.seed)
    log_r = -math.inf
    rows = []
    for n in range(1, horizon + 1):
        s = (n - 1) % scenario.period
        y = path.observations[n - 1]
        llr = scenario.post[s].logpdf(y) - scenario.pre[s].logpdf(y)
        log_r = float(log_odds_step_geometric(log_r, cfg.rho, llr))
        rows.append([n, log_odds_to_belief(log_r), int(path.change_active(n))])
    return rows


def cmd_tradeoff(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    alphas = (
        tuple(float(v) for v in args.alpha.split(","))
        if args.alpha
        else DEFAULT_TRADEOFF_ALPHAS
    )
    scenario = cfg.scenario()
    info = kl_information(scenario)
    tail = prior_tail_exponent(GeometricPrior(cfg.rho))
    rows = []
    for alpha in alphas:
        res = estimate_add_pfa(
            scenario, cfg.rho, 1.0 - alpha, cfg.paths, horizon=cfg.horizon, seed=cfg.seed
        )
        rows.append([
            alpha,
            abs(math.log(alpha)),
            res.add.estimate,
            res.conditional_add.estimate,
            res.pfa.estimate,
            res.pfa_posterior,
            analytic_delay(alpha, info, tail),
        ])
    out_dir = Path(args.out_dir)
    stem = Path(args.config).stem
    out = out_dir / f"{stem}_tradeoff.csv"
    _write_csv(
        out,
        ["alpha", "log_alpha_magnitude", "add_sim", "conditional_add_sim",
         "pfa_sim", "pfa_posterior", "add_analytic"],
        rows,
    )
    trace = out_dir / f"{stem}_trace.csv"
    _write_csv(trace, ["n", "p", "change_active"],
               _trace_rows(cfg, min(cfg.horizon, 600)))
    print(f"information number: {info:.6f}, tail exponent: {tail:.6f}")
    for row in rows:
        print(f"alpha={row[0]:g}: ADD {row[2]:.2f}, analytic {row[6]:.2f}, "
              f"PFA {row[4]:.5f} (posterior {row[5]:.6f})")
    print(f"wrote {out}")
    print(f"wrote {trace}")
    return EXIT_OK


def _reproduce_table(table: str, out_dir: Path, paths_override: int | None, seed_override: int | None) -> int:
    rows = []
    for row in REPRODUCE_TABLES[table]:
        cfg = bundled_config(row.config)
        if paths_override is not None:
            cfg = _replace(cfg, paths=paths_override)
        if seed_override is not None:
            cfg = _replace(cfg, seed=seed_override)
        solution = _solve_from_config(cfg)
        policy = PeriodicThresholds(tuple(min(a, 1.0) for a in solution.thresholds))
        optimal = estimate_bayes_cost(
            cfg.scenario(), cfg.cost_spec(), policy, cfg.paths, horizon=cfg.horizon, seed=cfg.seed
        )
        sweep = sweep_single_threshold(
            cfg.scenario(), cfg.cost_spec(), DEFAULT_THRESHOLD_GRID, cfg.paths,
            seed=cfg.seed, horizon=cfg.horizon,
        )
        best = sweep.best
        rows.append([
            row.label, best.cost, best.std_error, best.threshold,
            optimal.estimate, optimal.std_error, solution.value_at_zero,
            row.target_single, row.target_optimal,
        ])
        print(f"{row.label}: single {best.cost:.2f} (target {row.target_single}), "
              f"optimal {optimal.estimate:.2f} (target {row.target_optimal})")
    out = out_dir / f"{table}.csv"
    _write_csv(
        out,
        ["row", "single_threshold_cost", "single_threshold_se", "single_best_threshold",
         "optimal_policy_cost", "optimal_policy_se", "solver_value_at_zero",
         "target_single_threshold_cost", "target_optimal_cost"],
        rows,
    )
    print(f"wrote {out}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out_dir)
    target = args.id
    if target in REPRODUCE_TABLES:
        return _reproduce_table(target, out_dir, args.paths, args.seed)
    if target in ("fig1", "fig2"):
        cfg = bundled_config(REPRODUCE_FIGURES[target])
        cfg = _apply_overrides(cfg, args)
        solution = _solve_from_config(cfg)
        write_solution_artifacts(solution, out_dir, target)
        sweep = sweep_single_threshold(
            cfg.scenario(), cfg.cost_spec(), DEFAULT_THRESHOLD_GRID, cfg.paths,
            seed=cfg.seed, horizon=cfg.horizon,
        )
        _write_csv(
            out_dir / f"{target}_sweep.csv",
            ["threshold", "cost", "std_error", "censored_fraction"],
            [[p.threshold, p.cost, p.std_error, p.censored_fraction] for p in sweep.points],
        )
        target_value = FIGURE_TARGETS[target][0]
        print(f"value at p=0: {solution.value_at_zero:.4f} (target {target_value})")
        print(f"thresholds: {np.round(solution.thresholds, 4).tolist()}")
        print(f"best single threshold cost: {sweep.best.cost:.4f}")
        return EXIT_OK if solution.converged else EXIT_NO_CONVERGENCE
    if target == "fig3":
        cfg = bundled_config(REPRODUCE_FIGURES[target])
        return _tradeoff_from_config(cfg, args, out_dir, "fig3")
    raise ValueError(f"unknown reproduction id {target!r}")


def _tradeoff_from_config(cfg: ExperimentConfig, args, out_dir: Path, stem: str) -> int:
    cfg = _apply_overrides(cfg, args)
    scenario = cfg.scenario()
    info = kl_information(scenario)
    tail = prior_tail_exponent(GeometricPrior(cfg.rho))
    rows = []
    for alpha in DEFAULT_TRADEOFF_ALPHAS:
        res = estimate_add_pfa(
            scenario, cfg.rho, 1.0 - alpha, cfg.paths, horizon=cfg.horizon, seed=cfg.seed
        )
        rows.append([alpha, abs(math.log(alpha)), res.add.estimate,
                     res.conditional_add.estimate, res.pfa.estimate,
                     res.pfa_posterior, analytic_delay(alpha, info, tail)])
        print(f"alpha={alpha:g}: ADD {res.add.estimate:.2f}, "
              f"analytic {rows[-1][-1]:.2f}")
    _write_csv(
        out_dir / f"{stem}_tradeoff.csv",
        ["alpha", "log_alpha_magnitude", "add_sim", "conditional_add_sim",
         "pfa_sim", "pfa_posterior", "add_analytic"],
        rows,
    )
    _write_csv(out_dir / f"{stem}_trace.csv", ["n", "p", "change_active"],
               _trace_rows(cfg, min(cfg.horizon, 600)))
    print(f"wrote {out_dir / (stem + '_tradeoff.csv')}")
    return EXIT_OK


def cmd_mdp_solve(args) -> int:
    mdp = load_instance(args.instance)
    values = value_iterate(mdp, tol=args.tol, max_cycles=args.max_cycles)
    policy = extract_periodic_policy(values, mdp)
    residual = fixed_point_residual(values, mdp)
    out_dir = Path(args.out_dir)
    stem = Path(args.instance).stem
    _write_csv(
        out_dir / f"{stem}_values.csv",
        ["stage", "state", "value"],
        [[l, s, values.values[l, s]] for l in range(mdp.period) for s in range(mdp.num_states)],
    )
    _write_csv(
        out_dir / f"{stem}_policy.csv",
        ["stage", "state", "action"],
        [[l, s, int(policy.actions[l, s])] for l in range(mdp.period) for s in range(mdp.num_states)],
    )
    print(f"cycles: {values.cycles} (converged: {values.converged})")
    print(f"fixed-point residual: {residual:.3e}")
    for l in range(mdp.period):
        print(f"stage {l}: values {np.round(values.values[l], 6).tolist()} "
              f"actions {policy.actions[l].tolist()}")
    print(f"wrote {out_dir / (stem + '_values.csv')}")
    print(f"wrote {out_dir / (stem + '_policy.csv')}")
    return EXIT_OK if values.converged else EXIT_NO_CONVERGENCE


# ---------------------------------------------------------------------------

def _replace(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    from dataclasses import replace

    return replace(cfg, **kw)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    kw = {}
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    if getattr(args, "paths", None) is not None:
        kw["paths"] = args.paths
    if getattr(args, "grid", None) is not None:
        kw["grid_points"] = args.grid
    if getattr(args, "tol", None) is not None:
        kw["tolerance"] = args.tol
    return _replace(cfg, **kw) if kw else cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="periodet",
        description="Periodic-MDP optimal stopping and quickest change detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out-dir", default="periodet-results", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--paths", type=int, default=None, help="override path count")
        p.add_argument("--grid", type=int, default=None, help="override belief grid points")
        p.add_argument("--tol", type=float, default=None, help="override solver tolerance")

    p = sub.add_parser("solve", help="value-iterate a detection scenario")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="Monte-Carlo Bayes cost of a policy")
    common(p)
    p.add_argument("--policy", default="optimal",
                   help="'optimal', 'single:A', or 'periodic:a0,a1,...'")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="single-threshold cost over a threshold grid")
    common(p)
    p.add_argument("--thresholds", default=None, help="comma-separated thresholds")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tradeoff", help="delay vs false-alarm tradeoff curve")
    common(p)
    p.add_argument("--alpha", default=None, help="comma-separated false-alarm levels")
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("reproduce", help="run a bundled experiment batch")
    p.add_argument("id", choices=sorted(REPRODUCE_TABLES) + sorted(REPRODUCE_FIGURES))
    p.add_argument("--out-dir", default="periodet-results")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("mdp-solve", help="solve a periodic MDP instance file")
    p.add_argument("instance", help="instance file (see periodic_mdp.load_instance)")
    p.add_argument("--out-dir", default="periodet-results")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-cycles", type=int, default=100_000)
    p.set_defaults(func=cmd_mdp_solve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InstanceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
