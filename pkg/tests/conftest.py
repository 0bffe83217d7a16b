"""Shared fixtures: the expensive estimates are computed once per session."""

import pytest

import tubewalk as tw

ACCEPT_SEED = 20260809

N_LIST = [200, 400, 800, 1600, 3200]


@pytest.fixture(scope="session")
def gamma_estimates():
    """Confinement-rate estimates at beta in {0, 0.5, 1} at acceptance settings."""
    return {
        beta: tw.estimate_gamma(
            beta, horizon_t=8.0, dt=1e-3, grid_points=400, env_replicas=8, seed=ACCEPT_SEED
        )
        for beta in (0.0, 0.5, 1.0)
    }


@pytest.fixture(scope="session")
def flat_template():
    return tw.TubeTemplate(g=-1.0, h=1.0, alpha=0.3)


@pytest.fixture(scope="session")
def degenerate_report(flat_template):
    """DP decay fit for the fixed Rademacher walk on the constant tube."""
    return tw.theorem_check(
        tw.EnvironmentSpec.rademacher(),
        flat_template,
        N_LIST,
        estimator="dp",
        gamma_source="reference",
        seed=ACCEPT_SEED,
        tolerance=0.20,
    )


@pytest.fixture(scope="session")
def rsb_report(flat_template, gamma_estimates):
    """DP decay fit for the random-shift environment, prediction at gamma(0.5)."""
    return tw.theorem_check(
        tw.EnvironmentSpec.random_shift_bernoulli(0.5),
        flat_template,
        N_LIST,
        estimator="dp",
        gamma_source=gamma_estimates[0.5],
        seed=ACCEPT_SEED,
        tolerance=0.25,
    )
