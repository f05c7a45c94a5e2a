"""Recursive posterior change statistics.

Two equivalent statistics are tracked: the posterior change probability
p_n = P(nu <= n | Y_1..Y_n) and its odds R_n = p_n / (1 - p_n).  Both are
computed in the log-odds domain; the probability-domain recursion
saturates at 1.0 in floating point after long post-change stretches,
while log odds stay finite and exact far beyond that.

For a geometric prior one step is

    log R_n = log(R_{n-1} + rho) - log(1 - rho) + Z_n,

with Z_n the stage-matched log likelihood ratio of observation n.  For a
general prior the hazard factor rho is replaced by mass/tail ratios of
the tabulated prior.  A state pinned at p = 1 (log odds +inf) stays
pinned: the change is absorbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ipid_model import (
    ChangePrior,
    GeometricPrior,
    IpidScenario,
    TabulatedPrior,
    log_likelihood_ratio,
)

__all__ = [
    "BeliefState",
    "OddsState",
    "BeliefUpdateError",
    "update_belief",
    "update_odds_geometric",
    "update_odds_general",
    "belief_to_log_odds",
    "log_odds_to_belief",
    "log_odds_step_geometric",
]


class BeliefUpdateError(ValueError):
    """Observation is outside the support of both stage densities."""


@dataclass(frozen=True)
class BeliefState:
    """Posterior change probability after n observations; p = 0 at n = 0."""

    p: float
    n: int = 0

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"belief must lie in [0, 1], got {self.p}")
        if self.n < 0:
            raise ValueError("time index must be >= 0")


@dataclass(frozen=True)
class OddsState:
    """Log posterior odds after n observations; -inf encodes R = 0."""

    log_r: float
    n: int = 0

    def __post_init__(self):
        if math.isnan(self.log_r):
            raise ValueError("log odds must not be NaN")
        if self.n < 0:
            raise ValueError("time index must be >= 0")


def belief_to_log_odds(p: float) -> float:
    """log(p / (1 - p)); 0 -> -inf, 1 -> +inf."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"belief must lie in [0, 1], got {p}")
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    return math.log(p) - math.log1p(-p)


def log_odds_to_belief(log_r: float) -> float:
    """Inverse of ``belief_to_log_odds``; accepts +-inf."""
    if log_r == math.inf:
        return 1.0
    if log_r == -math.inf:
        return 0.0
    if log_r >= 0.0:
        return 1.0 / (1.0 + math.exp(-log_r))
    e = math.exp(log_r)
    return e / (1.0 + e)


def log_odds_step_geometric(log_r, rho: float, llr):
    """One update in log-odds form.  Vectorizes over both arguments; the
    scalar recursions and the Monte-Carlo engine share this arithmetic."""
    pumped = np.logaddexp(log_r, math.log(rho)) - math.log1p(-rho)
    return pumped + llr


def _checked_llr(scenario: IpidScenario, n: int, y: float) -> float:
    llr = log_likelihood_ratio(scenario, n, y)
    if math.isnan(llr):
        raise BeliefUpdateError(
            f"observation {y!r} at time {n} is outside both stage supports"
        )
    return llr


def update_belief(
    state: BeliefState, prior: GeometricPrior, scenario: IpidScenario, y: float
) -> BeliefState:
    """Advance the posterior probability by one observation.

    Equivalent to p' = ptilde g(y) / (ptilde g(y) + (1 - ptilde) f(y)) with
    ptilde = p + (1 - p) rho, evaluated through log odds for stability.
    General priors go through ``update_odds_general`` instead.
    """
    if not isinstance(prior, GeometricPrior):
        raise TypeError("update_belief requires a geometric prior")
    n = state.n + 1
    if state.p == 1.0:
        return BeliefState(1.0, n)
    llr = _checked_llr(scenario, n, y)
    log_r = log_odds_step_geometric(belief_to_log_odds(state.p), prior.rho, llr)
    return BeliefState(log_odds_to_belief(float(log_r)), n)


def update_odds_geometric(
    state: OddsState, rho: float, scenario: IpidScenario, y: float
) -> OddsState:
    """Advance log R by one observation under a geometric prior:
    R' = ((R + rho) / (1 - rho)) * g(y) / f(y)."""
    if not (0.0 < rho < 1.0):
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    n = state.n + 1
    if state.log_r == math.inf:
        return OddsState(math.inf, n)
    llr = _checked_llr(scenario, n, y)
    return OddsState(float(log_odds_step_geometric(state.log_r, rho, llr)), n)


def update_odds_general(
    state: OddsState, prior: ChangePrior, scenario: IpidScenario, y: float
) -> OddsState:
    """Advance log R under an arbitrary prior with computable tails:

        R_n = (R_{n-1} Gamma_{n-1} / Gamma_n + pi_n / Gamma_n) g(y) / f(y)

    with Gamma_n = P(nu > n).  Requires Gamma_n > 0; once the tabulated
    tail is exhausted the recursion is undefined and an error is raised.
    Specializes to the geometric step when the prior is geometric.
    """
    n = state.n + 1
    if isinstance(prior, TabulatedPrior) and n > prior.table_length:
        raise ValueError(f"prior table exhausted at time {n}")
    log_tail_prev = prior.log_tail(n - 1)
    log_tail = prior.log_tail(n)
    if log_tail == -math.inf:
        raise ValueError(f"prior tail exhausted at time {n}: P(nu > {n}) = 0")
    if state.log_r == math.inf:
        return OddsState(math.inf, n)
    llr = _checked_llr(scenario, n, y)
    carried = state.log_r + log_tail_prev - log_tail
    injected = prior.log_mass(n) - log_tail
    return OddsState(float(np.logaddexp(carried, injected) + llr), n)
