import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periodet import (
    BeliefState,
    BeliefUpdateError,
    Gaussian,
    GeometricPrior,
    IpidScenario,
    OddsState,
    TabulatedPrior,
    belief_to_log_odds,
    log_odds_to_belief,
    update_belief,
    update_odds_general,
    update_odds_geometric,
)

from conftest import make_scenario


def plain_domain_update(p, rho, scenario, n, y):
    """Probability-domain reference for one step, straight from the
    two-hypothesis Bayes computation over the predictive mixture."""
    s = (n - 1) % scenario.period
    f = math.exp(scenario.pre[s].logpdf(y))
    g = math.exp(scenario.post[s].logpdf(y))
    pt = p + (1.0 - p) * rho
    return pt * g / (pt * g + (1.0 - pt) * f)


# ── single-step examples ───────────────────────────────────────────────


def test_update_belief_identical_densities_accumulates_prior():
    same = make_scenario([0.0], [0.0])
    state = update_belief(BeliefState(0.0), GeometricPrior(0.01), same, y=1.3)
    assert state.p == pytest.approx(0.01, abs=1e-12)
    assert state.n == 1


def test_update_belief_absorbing_at_one():
    scen = make_scenario([0.0], [2.0])
    for y in (-50.0, 0.0, 50.0):
        assert update_belief(BeliefState(1.0, 3), GeometricPrior(0.05), scen, y).p == 1.0


def test_update_belief_zero_llr_observation():
    # at y = 1 the strong-stage likelihood ratio is exactly 1
    scen = make_scenario([0.0], [2.0])
    state = update_belief(BeliefState(0.0), GeometricPrior(0.01), scen, y=1.0)
    assert state.p == pytest.approx(0.01, abs=1e-12)


def test_update_belief_requires_geometric_prior():
    scen = make_scenario([0.0], [2.0])
    with pytest.raises(TypeError):
        update_belief(BeliefState(0.0), TabulatedPrior.from_masses([0.5, 0.5]), scen, 0.0)


@given(
    p=st.floats(0.0, 1.0),
    rho=st.floats(1e-4, 0.5),
    y=st.floats(-6.0, 6.0),
    theta=st.floats(0.1, 3.0),
)
def test_update_belief_matches_plain_domain(p, rho, y, theta):
    scen = make_scenario([0.0, 0.0], [theta, theta / 2.0])
    got = update_belief(BeliefState(p, 4), GeometricPrior(rho), scen, y).p
    want = plain_domain_update(p, rho, scen, 5, y)
    assert got == pytest.approx(want, abs=1e-12)


def test_update_belief_outside_both_supports():
    scen = make_scenario([0.0], [2.0])
    with pytest.raises(BeliefUpdateError):
        update_belief(BeliefState(0.2), GeometricPrior(0.01), scen, y=math.inf)


@dataclass(frozen=True)
class UnitUniform:
    """Toy bounded-support density exercising the extension point."""

    loc: float = 0.5
    scale: float = 0.29

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where((x >= 0.0) & (x <= 1.0), 0.0, -math.inf)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, size=None):
        return rng.random(size)


def test_update_belief_bounded_supports_error():
    scen = IpidScenario(pre=(UnitUniform(),), post=(UnitUniform(),))
    with pytest.raises(BeliefUpdateError, match="outside both"):
        update_belief(BeliefState(0.1), GeometricPrior(0.01), scen, y=2.5)


# ── odds recursions ────────────────────────────────────────────────────


def test_odds_geometric_first_step():
    same = make_scenario([0.0], [0.0])  # LLR = 0 everywhere
    state = update_odds_geometric(OddsState(-math.inf), 0.01, same, y=0.4)
    assert math.exp(state.log_r) == pytest.approx(0.01 / 0.99, rel=1e-12)


def test_odds_geometric_arithmetic_example():
    # R' = ((1 + 0.01) / 0.99) * 2 when the likelihood ratio is 2
    scen = make_scenario([0.0], [2.0])
    y = (math.log(2.0) + 2.0) / 2.0  # solves theta*y - theta^2/2 = log 2
    state = update_odds_geometric(OddsState(0.0), 0.01, scen, y=y)
    assert math.exp(state.log_r) == pytest.approx((1.01 / 0.99) * 2.0, rel=1e-10)


def test_odds_general_first_step_matches_hazard():
    same = make_scenario([0.0], [0.0])
    prior = TabulatedPrior.truncated_geometric(0.01, 100)
    state = update_odds_general(OddsState(-math.inf), prior, same, y=1.0)
    assert math.exp(state.log_r) == pytest.approx(0.01 / 0.99, rel=1e-12)


def test_odds_general_identical_densities_closed_form():
    # with unit likelihood ratios the odds are the prior odds
    same = make_scenario([0.0, 0.0], [0.0, 0.0])
    rho = 0.05
    prior = TabulatedPrior.truncated_geometric(rho, 64)
    state = OddsState(-math.inf)
    for n in range(1, 41):
        state = update_odds_general(state, prior, same, y=0.0)
        want = (1.0 - (1.0 - rho) ** n) / (1.0 - rho) ** n
        assert math.exp(state.log_r) == pytest.approx(want, rel=1e-11)


def test_odds_general_specializes_to_geometric():
    scen = make_scenario([0.0, 0.0], [2.0, 1.0])
    rho = 0.02
    prior = TabulatedPrior.truncated_geometric(rho, 512)
    rng = np.random.default_rng(42)
    general = OddsState(-math.inf)
    geometric = OddsState(-math.inf)
    for _ in range(400):
        y = rng.normal()
        general = update_odds_general(general, prior, scen, y)
        geometric = update_odds_geometric(geometric, rho, scen, y)
        assert general.log_r == pytest.approx(geometric.log_r, abs=1e-9)


def test_odds_general_tail_exhausted():
    same = make_scenario([0.0], [0.0])
    prior = TabulatedPrior.from_masses([0.6, 0.4])  # Gamma_2 = 0
    state = update_odds_general(OddsState(-math.inf), prior, same, y=0.0)
    with pytest.raises(ValueError, match="tail exhausted"):
        update_odds_general(state, prior, same, y=0.0)


def test_odds_general_beyond_table():
    same = make_scenario([0.0], [0.0])
    prior = TabulatedPrior.from_masses([0.1, 0.1])
    state = update_odds_general(OddsState(-math.inf), prior, same, y=0.0)
    state = update_odds_general(state, prior, same, y=0.0)
    with pytest.raises(ValueError, match="table exhausted"):
        update_odds_general(state, prior, same, y=0.0)


# ── belief <-> odds transform ──────────────────────────────────────────


def test_roundtrip_examples():
    assert belief_to_log_odds(0.5) == 0.0
    assert belief_to_log_odds(0.0) == -math.inf
    assert belief_to_log_odds(1.0) == math.inf
    assert belief_to_log_odds(0.6) == pytest.approx(math.log(1.5), abs=1e-15)
    assert log_odds_to_belief(math.inf) == 1.0
    assert log_odds_to_belief(-math.inf) == 0.0


@given(p=st.floats(1e-12, 1.0 - 1e-12))
def test_roundtrip_inverse(p):
    assert log_odds_to_belief(belief_to_log_odds(p)) == pytest.approx(p, abs=1e-12)


# ── path-level properties ──────────────────────────────────────────────


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), rho=st.floats(0.001, 0.2))
def test_belief_and_odds_paths_agree(seed, rho):
    """Probability and odds recursions track each other to 1e-9 at every
    step of randomized thousand-step sample paths."""
    from periodet import sample_path

    scen = make_scenario([0.0, 0.0], [1.0, 0.25])
    prior = GeometricPrior(rho)
    path = sample_path(scen, prior, horizon=1000, seed=seed)
    belief = BeliefState(0.0)
    odds = OddsState(-math.inf)
    for y in path.observations:
        belief = update_belief(belief, prior, scen, y)
        odds = update_odds_geometric(odds, rho, scen, y)
        assert log_odds_to_belief(odds.log_r) == pytest.approx(belief.p, abs=1e-9)


def test_log_odds_path_matches_plain_domain_path():
    """The stability rewrite changes nothing beyond 1e-9 while the plain
    recursion stays representable."""
    scen = make_scenario([0.0, 0.0], [2.0, 1.0])
    rho = 0.01
    rng = np.random.default_rng(17)
    belief = BeliefState(0.0)
    p_plain = 0.0
    for n in range(1, 301):
        y = rng.normal()
        belief = update_belief(belief, GeometricPrior(rho), scen, y)
        p_plain = plain_domain_update(p_plain, rho, scen, n, y)
        assert belief.p == pytest.approx(p_plain, abs=1e-9)


def test_pure_prior_accumulation_closed_form():
    # g == f: p_n = 1 - (1-rho)^n exactly
    same = make_scenario([0.0, 0.0], [0.0, 0.0])
    rho = 0.03
    state = BeliefState(0.0)
    for n in range(1, 201):
        state = update_belief(state, GeometricPrior(rho), same, y=float(n % 5))
        assert state.p == pytest.approx(1.0 - (1.0 - rho) ** n, abs=1e-12)


@given(
    p=st.floats(0.0, 0.999),
    y_lo=st.floats(-3.0, 3.0),
    bump=st.floats(0.0, 3.0),
)
def test_monotone_response_to_likelihood_ratio(p, y_lo, bump):
    """Raising the current observation's log likelihood ratio never lowers
    the updated belief (for a positive-shift stage, LLR grows with y)."""
    scen = make_scenario([0.0], [1.5])
    prior = GeometricPrior(0.02)
    lo = update_belief(BeliefState(p), prior, scen, y_lo).p
    hi = update_belief(BeliefState(p), prior, scen, y_lo + bump).p
    assert hi >= lo - 1e-12


def test_state_validation():
    with pytest.raises(ValueError):
        BeliefState(1.2)
    with pytest.raises(ValueError):
        BeliefState(0.5, -1)
    with pytest.raises(ValueError):
        OddsState(math.nan)
