import numpy as np
import pytest

from periodet import DetectionCostSpec, Gaussian, IpidScenario, solve_detection

SEED = 20240801


def make_scenario(pre_means, post_means, variance=1.0):
    pre = tuple(Gaussian(m, variance) for m in pre_means)
    post = tuple(Gaussian(m, variance) for m in post_means)
    return IpidScenario(pre=pre, post=post)


@pytest.fixture(scope="session")
def alternating_t2():
    """Two-stage scenario with strong/weak signal and alternating penalties."""
    scenario = make_scenario([0.0, 0.0], [2.0, 1.0])
    costs = DetectionCostSpec(false_alarm=(20.0, 5.0), delay=(10.0, 1.0), rho=0.01)
    return scenario, costs


@pytest.fixture(scope="session")
def decaying_t4():
    scenario = make_scenario([0.0] * 4, [2.0, 1.5, 1.0, 0.5])
    costs = DetectionCostSpec(
        false_alarm=(20.0, 15.0, 10.0, 5.0), delay=(10.0, 10.0, 6.0, 1.0), rho=0.01
    )
    return scenario, costs


@pytest.fixture(scope="session")
def weak_t2():
    """Small-shift scenario used for the delay/false-alarm tradeoff."""
    return make_scenario([0.0, 0.0], [0.75, 0.25])


@pytest.fixture(scope="session")
def solved_t2(alternating_t2):
    scenario, costs = alternating_t2
    return solve_detection(scenario, costs, grid_resolution=100)


@pytest.fixture(scope="session")
def solved_t4(decaying_t4):
    scenario, costs = decaying_t4
    return solve_detection(scenario, costs, grid_resolution=100)


def random_mdp(rng, n_states, n_actions, period, discount, cost_scale=1.0):
    """Dense random periodic MDP with Dirichlet-normalized kernels."""
    from periodet import PeriodicMdp

    P = rng.random((period, n_states, n_actions, n_states))
    P /= P.sum(axis=-1, keepdims=True)
    c = cost_scale * rng.random((period, n_states, n_actions))
    return PeriodicMdp(transitions=P, costs=c, discount=discount)
