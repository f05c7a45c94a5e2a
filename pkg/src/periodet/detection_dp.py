"""Belief-grid dynamic programming for the periodic stopping problem.

The posterior change probability p is a sufficient statistic, so the
detection problem becomes an MDP on [0, 1] with two actions.  Stopping at
stage s costs lam_s * (1 - p) (false alarm risk); continuing costs
d_s * p (expected one-step delay) plus the averaged cost-to-go over the
next observation.  Curves are solved on a uniform belief grid by
iterating the T-fold composition of the stage operators from the all-zero
curve; values between grid points are linearly interpolated and the
one-step integrals use composite Simpson quadrature on a truncated
window.

Timing convention (applied identically here and in the Monte-Carlo
harness): observations are numbered n = 1, 2, ..., and observation n has
0-based stage s = (n - 1) % T.  The decision made right after observation
n uses the stage-s penalties and threshold, and its continuation
averages over the next observation, which has stage (s + 1) % T.  Solved
policies are therefore simulated in exactly the world they were
optimized for.

Each solved stage curve is capped by its stopping cost, vanishes at
p = 1, is concave, and crosses into stopping exactly once, so the
optimal rule is a per-stage threshold on p reported at grid precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .belief import belief_to_log_odds, log_odds_to_belief
from .ipid_model import IpidScenario, _simpson_weights

__all__ = [
    "DetectionCostSpec",
    "BeliefGrid",
    "QuadratureRule",
    "DetectionSolution",
    "belief_transition",
    "continuation_integral",
    "stage_bellman",
    "solve_detection",
    "extract_thresholds",
]

DEFAULT_GRID_POINTS = 100
DEFAULT_QUADRATURE_NODES = 1601
DEFAULT_WINDOW_SCALES = 8.0


@dataclass(frozen=True)
class DetectionCostSpec:
    """Per-stage penalties and the change-point hazard.

    ``false_alarm[s]`` and ``delay[s]`` apply to the decision made after a
    stage-s observation.  Constant false_alarm and unit delay recover the
    classical single-penalty formulation.
    """

    false_alarm: tuple[float, ...]
    delay: tuple[float, ...]
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "false_alarm", tuple(float(x) for x in self.false_alarm))
        object.__setattr__(self, "delay", tuple(float(x) for x in self.delay))
        if len(self.false_alarm) != len(self.delay) or not self.false_alarm:
            raise ValueError("false_alarm and delay need equal, positive length")
        if any(not (x > 0.0 and math.isfinite(x)) for x in self.false_alarm):
            raise ValueError("false-alarm penalties must be finite and positive")
        if any(not (x >= 0.0 and math.isfinite(x)) for x in self.delay):
            raise ValueError("delay penalties must be finite and nonnegative")
        if not (0.0 < self.rho < 1.0):
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")

    @property
    def period(self) -> int:
        return len(self.false_alarm)


@dataclass(frozen=True)
class BeliefGrid:
    """Uniform grid on [0, 1] including both endpoints."""

    resolution: int = DEFAULT_GRID_POINTS
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("grid needs at least the two endpoints")
        pts = np.linspace(0.0, 1.0, self.resolution)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def step(self) -> float:
        return 1.0 / (self.resolution - 1)


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Simpson nodes for one observation stage.

    The window spans ``window_scales`` standard deviations beyond both
    density locations; Gaussian mass outside is far below the grid
    interpolation error.
    """

    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def for_stage(
        cls,
        scenario: IpidScenario,
        stage: int,
        n_nodes: int = DEFAULT_QUADRATURE_NODES,
        window_scales: float = DEFAULT_WINDOW_SCALES,
    ) -> "QuadratureRule":
        f = scenario.pre[stage % scenario.period]
        g = scenario.post[stage % scenario.period]
        width = window_scales * max(f.scale, g.scale)
        lo = min(f.loc, g.loc) - width
        hi = max(f.loc, g.loc) + width
        if not (lo < f.loc < hi and lo < g.loc < hi):
            raise ValueError("quadrature window does not cover both density locations")
        x = np.linspace(lo, hi, n_nodes)
        w = _simpson_weights(n_nodes) * (hi - lo) / (n_nodes - 1)
        return cls(nodes=x, weights=w)


class _StageTables:
    """Per-stage density values on the quadrature nodes, built once."""

    def __init__(self, scenario: IpidScenario, n_nodes: int, window_scales: float):
        self.rules = [
            QuadratureRule.for_stage(scenario, s, n_nodes, window_scales)
            for s in range(scenario.period)
        ]
        self.pre_vals = [
            np.exp(scenario.pre[s].logpdf(r.nodes)) for s, r in enumerate(self.rules)
        ]
        self.post_vals = [
            np.exp(scenario.post[s].logpdf(r.nodes)) for s, r in enumerate(self.rules)
        ]


def belief_transition(
    p: float, rho: float, scenario: IpidScenario, obs_stage: int, x: float
) -> float:
    """Posterior after one more observation x at the given 0-based stage.

    Same map as the scalar belief recursion (hazard pump then Bayes
    update), evaluated through log odds; p = 1 is absorbing.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"belief must lie in [0, 1], got {p}")
    if p == 1.0:
        return 1.0
    s = obs_stage % scenario.period
    llr = scenario.post[s].logpdf(x) - scenario.pre[s].logpdf(x)
    if math.isnan(llr):
        raise ValueError(f"observation {x!r} is outside both stage-{s} supports")
    pumped = np.logaddexp(belief_to_log_odds(p), math.log(rho)) - math.log1p(-rho)
    return log_odds_to_belief(float(pumped + llr))


def continuation_integral(
    curve: np.ndarray,
    grid: BeliefGrid,
    p: float | np.ndarray,
    rho: float,
    scenario: IpidScenario,
    obs_stage: int,
    quadrature: QuadratureRule | None = None,
) -> float | np.ndarray:
    """Expected value of ``curve`` at the post-observation belief.

    Integrates curve(p'(x)) against the predictive mixture
    ptilde * g(x) + (1 - ptilde) * f(x) of the stage-``obs_stage``
    observation, with ptilde = p + (1 - p) rho.  ``curve`` is read by
    linear interpolation on ``grid``.
    """
    s = obs_stage % scenario.period
    rule = quadrature or QuadratureRule.for_stage(scenario, s)
    f_vals = np.exp(scenario.pre[s].logpdf(rule.nodes))
    g_vals = np.exp(scenario.post[s].logpdf(rule.nodes))
    return _continuation(curve, grid, np.asarray(p, dtype=float), rho, f_vals, g_vals, rule.weights)


def _continuation(curve, grid, p, rho, f_vals, g_vals, weights):
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("beliefs must lie in [0, 1]")
    pt = p + (1.0 - p) * rho
    mix = pt[:, None] * g_vals[None, :] + (1.0 - pt)[:, None] * f_vals[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        p_next = np.where(mix > 0.0, pt[:, None] * g_vals[None, :] / np.where(mix > 0.0, mix, 1.0), 1.0)
    vals = np.interp(p_next.ravel(), grid.points, curve).reshape(p_next.shape)
    out = (vals * mix) @ weights
    return float(out[0]) if scalar else out


def stage_bellman(
    curve: np.ndarray,
    stage: int,
    costs: DetectionCostSpec,
    grid: BeliefGrid,
    scenario: IpidScenario,
    quadrature: QuadratureRule | None = None,
) -> np.ndarray:
    """One stage operator on the grid: pointwise minimum of the stopping
    cost lam_s (1 - p) and the continuation cost d_s p + A(p), where A
    averages ``curve`` over the next observation (stage s + 1)."""
    entry, _, _ = _stage_sweep(curve, stage, costs, grid, scenario, quadrature)
    return entry


def _stage_sweep(curve, stage, costs, grid, scenario, quadrature=None, tables=None):
    s = stage % costs.period
    if costs.period != scenario.period:
        raise ValueError("cost spec period does not match scenario period")
    nxt = (s + 1) % scenario.period
    if tables is not None:
        f_vals, g_vals, weights = tables.pre_vals[nxt], tables.post_vals[nxt], tables.rules[nxt].weights
    else:
        rule = quadrature or QuadratureRule.for_stage(scenario, nxt)
        f_vals = np.exp(scenario.pre[nxt].logpdf(rule.nodes))
        g_vals = np.exp(scenario.post[nxt].logpdf(rule.nodes))
        weights = rule.weights
    p = grid.points
    cont = costs.delay[s] * p + _continuation(curve, grid, p, costs.rho, f_vals, g_vals, weights)
    stop = costs.false_alarm[s] * (1.0 - p)
    return np.minimum(stop, cont), cont, stop


@dataclass(frozen=True)
class DetectionSolution:
    """Solved stage curves, thresholds, and iteration diagnostics.

    ``stage_curves[s]`` is the optimal cost entering the decision after a
    stage-s observation; ``continue_curves`` / ``stop_curves`` are its two
    branches.  ``thresholds[s]`` is the smallest grid belief at which
    stopping is weakly preferred, reported at grid precision.
    ``value_at_zero`` is the stage-0 entry curve at p = 0.
    """

    grid: BeliefGrid
    costs: DetectionCostSpec
    stage_curves: np.ndarray  # (T, M)
    continue_curves: np.ndarray  # (T, M)
    stop_curves: np.ndarray  # (T, M)
    thresholds: np.ndarray  # (T,)
    value_at_zero: float
    converged: bool
    cycles: int
    sup_history: np.ndarray = field(repr=False)
    l2_history: np.ndarray = field(repr=False)

    @property
    def period(self) -> int:
        return self.stage_curves.shape[0]


def solve_detection(
    scenario: IpidScenario,
    costs: DetectionCostSpec,
    grid_resolution: int = DEFAULT_GRID_POINTS,
    tol: float = 1e-6,
    max_cycles: int = 100_000,
    quadrature_nodes: int = DEFAULT_QUADRATURE_NODES,
    window_scales: float = DEFAULT_WINDOW_SCALES,
) -> DetectionSolution:
    """Value-iterate the T-fold stage composition from the all-zero curve.

    Convergence is declared on the sup norm of successive stage-0 entry
    curves; the L2 distances are recorded per cycle as well.  The iterates
    are pointwise nondecreasing, which is asserted each cycle.
    """
    if scenario.period != costs.period:
        raise ValueError(
            f"scenario period {scenario.period} != cost spec period {costs.period}"
        )
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    grid = BeliefGrid(grid_resolution)
    tables = _StageTables(scenario, quadrature_nodes, window_scales)
    T = scenario.period
    curve = np.zeros(grid.resolution)
    sup_hist: list[float] = []
    l2_hist: list[float] = []
    converged = False
    cycles = 0
    for cycles in range(1, max_cycles + 1):
        new = curve
        for s in range(T - 1, -1, -1):
            new, _, _ = _stage_sweep(new, s, costs, grid, scenario, tables=tables)
        if np.any(new < curve - 1e-9):
            raise AssertionError("value iterates must be pointwise nondecreasing")
        diff = new - curve
        sup_hist.append(float(np.max(np.abs(diff))))
        l2_hist.append(float(np.linalg.norm(diff)))
        curve = new
        if sup_hist[-1] <= tol:
            converged = True
            break

    # entry curves per stage against the converged stage-0 curve
    entry = np.empty((T, grid.resolution))
    cont = np.empty_like(entry)
    stop = np.empty_like(entry)
    tail = curve
    for s in range(T - 1, -1, -1):
        entry[s], cont[s], stop[s] = _stage_sweep(tail, s, costs, grid, scenario, tables=tables)
        tail = entry[s]
    thresholds = extract_thresholds(cont, stop, grid)
    return DetectionSolution(
        grid=grid,
        costs=costs,
        stage_curves=entry,
        continue_curves=cont,
        stop_curves=stop,
        thresholds=thresholds,
        value_at_zero=float(entry[0, 0]),
        converged=converged,
        cycles=cycles,
        sup_history=np.asarray(sup_hist),
        l2_history=np.asarray(l2_hist),
    )


def extract_thresholds(
    continue_curves: np.ndarray, stop_curves: np.ndarray, grid: BeliefGrid
) -> np.ndarray:
    """Smallest grid belief per stage at which stopping is weakly preferred.

    Ties resolve to stopping.  A stage whose stopping region is empty below
    p = 1 gets threshold 1.0 (alarm only at certainty).
    """
    continue_curves = np.atleast_2d(continue_curves)
    stop_curves = np.atleast_2d(stop_curves)
    out = np.empty(continue_curves.shape[0])
    for s in range(continue_curves.shape[0]):
        hit = np.nonzero(stop_curves[s] <= continue_curves[s] + 1e-12)[0]
        out[s] = grid.points[hit[0]] if hit.size else 1.0
    return out
