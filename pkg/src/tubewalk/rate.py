"""Empirical decay constants and the end-to-end rate comparison.

``decay_fit`` regresses log survival probabilities against n^(1-2 alpha);
``theorem_check`` runs the full pipeline for one environment family and
tube shape: per-n quenched probabilities, the OLS slope, the predicted
rate -C_{g,h} sigma_q^2 gamma(sigma_a/sigma_q), and their relative
discrepancy against a configured tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as student_t

from . import gamma as gamma_mod
from .env import EnvironmentSpec, moments, sample_environment
from .mc import survival_naive_mc, survival_splitting
from .parallel import thread_map
from .quench_dp import survival_brute_force, survival_dp_lattice, survival_grid
from .results import SurvivalEstimate
from .rng import derive_seed
from .tube import TubeTemplate, predicted_rate

ESTIMATORS = ("auto", "dp", "grid", "naive", "splitting", "brute")


@dataclass(frozen=True)
class RateFit:
    """OLS fit of log_p against n^(1-2 alpha)."""

    points: tuple[tuple[int, float], ...]
    alpha: float
    slope: float
    intercept: float
    r_squared: float
    slope_ci95: tuple[float, float]


def decay_fit(points, alpha: float) -> RateFit:
    """Least-squares decay constant from (n, log_p) pairs.

    Needs at least 3 points with distinct n and finite log_p; the slope
    interval comes from the residual variance (t-based, 95%).
    """
    pts = tuple((int(n), float(lp)) for n, lp in points)
    if len(pts) < 3:
        raise ValueError("decay_fit needs at least 3 points")
    ns = [n for n, _ in pts]
    if len(set(ns)) != len(ns):
        raise ValueError("decay_fit needs distinct n values")
    if not all(math.isfinite(lp) for _, lp in pts):
        raise ValueError("decay_fit needs finite log_p values")

    x = np.array([float(n) ** (1.0 - 2.0 * alpha) for n in ns])
    y = np.array([lp for _, lp in pts])
    xbar, ybar = x.mean(), y.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - ybar)) / sxx)
    intercept = float(ybar - slope * xbar)
    resid = y - (slope * x + intercept)
    ssr = float(np.sum(resid**2))
    sst = float(np.sum((y - ybar) ** 2))
    r2 = 1.0 if sst == 0.0 else min(1.0, max(0.0, 1.0 - ssr / sst))
    dof = len(pts) - 2
    se = math.sqrt(ssr / dof / sxx)
    half = float(student_t.ppf(0.975, dof)) * se
    return RateFit(
        points=pts,
        alpha=alpha,
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        slope_ci95=(slope - half, slope + half),
    )


@dataclass(frozen=True)
class RunPoint:
    """One per-n survival run inside a theorem check."""

    n: int
    f_offset: int
    x0: float
    estimate: SurvivalEstimate


@dataclass(frozen=True)
class CheckReport:
    """Comparison of the fitted decay constant with the predicted rate."""

    env_family: str
    sigma_a_sq: float
    sigma_q_sq: float
    beta: float
    gamma_value: float
    gamma_source: str
    points: tuple[RunPoint, ...]
    fit: RateFit
    predicted: float
    discrepancy: float
    tolerance: float
    passed: bool
    seed: int
    flags: tuple[str, ...] = ()


def make_estimator(method: str = "auto", **params):
    """Estimator closure (env, tube, x0, seed) -> SurvivalEstimate.

    ``auto`` picks the exact DP for lattice environments and grid
    propagation otherwise.  Monte Carlo methods take their effort
    parameters from `params` (replicas, particles, checkpoints,
    grid_points, xi_mode).
    """
    if method not in ESTIMATORS:
        raise ValueError(f"unknown estimator {method!r}; expected one of {ESTIMATORS}")
    replicas = int(params.pop("replicas", 100_000))
    particles = int(params.pop("particles", 10_000))
    checkpoints = int(params.pop("checkpoints", 20))
    grid_points = int(params.pop("grid_points", 400))
    xi_mode = params.pop("xi_mode", "analytic")
    if params:
        raise ValueError(f"unknown estimator parameters: {sorted(params)}")

    def run(env, tube, x0, seed=0):
        kind = method
        if kind == "auto":
            kind = "dp" if (env.kind == "atoms" and env.lattice_q is not None) else "grid"
        if kind == "dp":
            return survival_dp_lattice(env, tube, x0)
        if kind == "grid":
            return survival_grid(env, tube, x0, grid_points=grid_points)
        if kind == "brute":
            return survival_brute_force(env, tube, x0)
        if kind == "naive":
            return survival_naive_mc(env, tube, x0, replicas, seed, xi_mode=xi_mode)
        return survival_splitting(env, tube, x0, particles, checkpoints, seed, xi_mode=xi_mode)

    return run


def _resolve_gamma(gamma_source, beta: float, gamma_params: dict | None, seed: int):
    """Gamma value for the prediction, as (value, description, flags)."""
    flags = []
    if isinstance(gamma_source, gamma_mod.GammaEstimate):
        return gamma_source.gamma_hat, f"estimate(beta={gamma_source.beta})", flags
    if isinstance(gamma_source, (int, float)):
        return float(gamma_source), "fixed", flags
    if gamma_source == "auto":
        gamma_source = "reference" if beta == 0.0 else "estimate"
    if gamma_source == "reference":
        if beta > 1e-9:
            flags.append("reference_gamma_with_nonzero_beta")
        return gamma_mod.GAMMA_ZERO, "reference gamma(0)", flags
    if gamma_source == "estimate":
        params = dict(gamma_params or {})
        params.setdefault("horizon_t", 8.0)
        params.setdefault("dt", 1e-3)
        params.setdefault("grid_points", 400)
        params.setdefault("env_replicas", 8)
        est = gamma_mod.estimate_gamma(beta, seed=derive_seed(seed, 71), **params)
        return est.gamma_hat, f"estimate(beta={beta:g}, replicas={est.env_replicas})", flags
    raise ValueError(f"unknown gamma_source {gamma_source!r}")


def theorem_check(
    env_spec: EnvironmentSpec,
    tube_template: TubeTemplate,
    n_list,
    *,
    estimator="auto",
    estimator_params: dict | None = None,
    gamma_source="auto",
    gamma_params: dict | None = None,
    seed: int = 0,
    tolerance: float = 0.20,
    shared_env: bool = False,
    env_seed: int | None = None,
    x0: float | None = None,
) -> CheckReport:
    """Fit the per-n decay of quenched survival and compare to the prediction.

    One fresh environment realization is sampled per n (the limit statement
    holds for almost every environment sequence; fresh seeds decorrelate the
    fit residuals).  ``shared_env`` reuses a single long realization for all
    n instead.  The predicted rate uses the template's width functional and
    gamma at beta = sigma_a/sigma_q.
    """
    n_list = sorted(set(int(n) for n in n_list))
    if len(n_list) < 3:
        raise ValueError("theorem_check needs at least 3 distinct n values")
    sa2, sq2 = moments(env_spec)
    beta = math.sqrt(sa2 / sq2)
    gamma_value, gamma_desc, flags = _resolve_gamma(gamma_source, beta, gamma_params, seed)
    run = estimator if callable(estimator) else make_estimator(estimator, **(estimator_params or {}))
    env_base = seed if env_seed is None else env_seed

    shared = None
    if shared_env:
        n_max = n_list[-1]
        shared = sample_environment(
            env_spec, tube_template.f_offset(n_max) + n_max, derive_seed(env_base, 11)
        )

    def one(item) -> RunPoint:
        idx, n = item
        tube = tube_template.make(n)
        env = shared
        if env is None:
            env = sample_environment(env_spec, tube.f_offset + n, derive_seed(env_base, 11, idx))
        start = tube.default_x0() if x0 is None else x0
        est = run(env, tube, start, seed=derive_seed(seed, 13, idx))
        return RunPoint(n=n, f_offset=tube.f_offset, x0=start, estimate=est)

    points = thread_map(one, enumerate(n_list))
    fit = decay_fit([(p.n, p.estimate.log_p) for p in points], tube_template.alpha)
    predicted = predicted_rate(tube_template.make(n_list[0]), sa2, sq2, gamma_value)
    discrepancy = abs(fit.slope - predicted) / abs(predicted)
    return CheckReport(
        env_family=env_spec.family,
        sigma_a_sq=sa2,
        sigma_q_sq=sq2,
        beta=beta,
        gamma_value=gamma_value,
        gamma_source=gamma_desc,
        points=tuple(points),
        fit=fit,
        predicted=predicted,
        discrepancy=discrepancy,
        tolerance=tolerance,
        passed=bool(discrepancy <= tolerance),
        seed=seed,
        flags=tuple(flags),
    )
