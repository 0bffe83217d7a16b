import io
import math

import numpy as np
import pytest

import tubewalk as tw
from tubewalk.rng import substream
from tubewalk.walk import draw_increments


def test_zero_length_path():
    env = tw.sample_environment(tw.EnvironmentSpec.rademacher(), 5, seed=1)
    path = tw.sample_path(env, 0, 0, x0=0.7, seed=2)
    assert np.array_equal(path.s, [0.7])
    assert np.array_equal(path.m, [0.0])
    assert np.array_equal(path.u, [0.0])
    assert np.array_equal(path.gamma, [0.0])


def test_degenerate_rademacher_decomposition():
    env = tw.sample_environment(tw.EnvironmentSpec.rademacher(), 100, seed=5)
    path = tw.sample_path(env, 0, 100, x0=2.0, seed=9)
    path.validate()
    assert np.all(path.m == 0.0)
    assert np.array_equal(path.u, path.s - 2.0)
    assert np.array_equal(path.gamma, np.arange(101.0))


def test_shift_bernoulli_increment_support():
    env = tw.sample_environment(tw.EnvironmentSpec.random_shift_bernoulli(0.5), 200, seed=5)
    path = tw.sample_path(env, 0, 200, x0=0.0, seed=11)
    inc = np.diff(path.s)
    assert set(np.round(inc, 12)) <= {-1.5, -0.5, 0.5, 1.5}
    # drift increments follow the per-step law means
    assert np.allclose(np.diff(path.m), env.quenched_mean[:200])
    # each increment is one of the current step law's atoms
    atoms = env.atom_pos[np.arange(200)]
    assert np.all(np.any(np.isclose(inc[:, None], atoms), axis=1))


def test_decomposition_exact_for_gaussian_env():
    env = tw.sample_environment(tw.EnvironmentSpec.random_mean_gaussian(1.0, 2.0), 300, seed=5)
    path = tw.sample_path(env, 17, 250, x0=-3.0, seed=13)
    path.validate()
    assert len(path) == 250
    assert path.gamma[-1] == pytest.approx(250 * 4.0)


def test_out_of_range_start_raises():
    env = tw.sample_environment(tw.EnvironmentSpec.rademacher(), 10, seed=1)
    with pytest.raises(IndexError):
        tw.sample_path(env, 5, 6, x0=0.0, seed=2)


def test_path_sampling_statistics_match_quenched_moments():
    # 1e5 paths in one fixed environment of length 100
    env = tw.sample_environment(tw.EnvironmentSpec.random_shift_bernoulli(0.5), 100, seed=21)
    inc = draw_increments(env, 0, 100, substream(77, 0), size=100_000)
    s_end = inc.sum(axis=1)
    m_end = env.quenched_mean.sum()
    gamma_end = env.quenched_var.sum()
    se = s_end.std(ddof=1) / math.sqrt(len(s_end))
    assert abs(s_end.mean() - m_end) <= 5 * se
    u_var = (s_end - m_end).var(ddof=1)
    assert abs(u_var - gamma_end) / gamma_end <= 0.05


def test_path_csv_dump():
    from tubewalk.walk import path_to_csv

    env = tw.sample_environment(tw.EnvironmentSpec.rademacher(), 4, seed=1)
    path = tw.sample_path(env, 0, 4, x0=0.0, seed=3)
    buf = io.StringIO()
    path_to_csv(path, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "i,s,m,u,gamma"
    assert len(lines) == 6
