"""Monte Carlo estimators of the quenched tube-survival probability.

``survival_naive_mc`` is plain replication, usable when p is not much
smaller than 1/replicas.  ``survival_splitting`` is fixed-population
multilevel splitting along the time axis: the particle population is
advanced block by block, survivors are resampled back to full size, and
the per-block survival fractions multiply up; it reaches probabilities
down to about e^-60 at desk scale.

Both draw increments from counter-derived substreams keyed by replica
chunk (naive) or block (splitting), so results are independent of worker
count and batching.
"""

from __future__ import annotations

import math

import numpy as np

from .env import EnvRealization
from .quench_dp import _xi_terms, xi_log_factor
from .results import METHOD_NAIVE_MC, METHOD_SPLITTING, SurvivalEstimate, from_log
from .rng import CHUNK, STREAM_NAIVE, STREAM_SPLIT, substream
from .tube import TubeSpec
from .walk import draw_increments

XI_MODES = ("analytic", "sampled")


def _xi_setup(env: EnvRealization, tube: TubeSpec, xi_mode: str) -> tuple[float | None, float]:
    """Per-step sampled-event probability (or None) and the analytic log factor."""
    if xi_mode not in XI_MODES:
        raise ValueError(f"xi_mode must be one of {XI_MODES}")
    steps, _ = _xi_terms(tube)
    if steps and xi_mode == "sampled":
        return env.xi_cdf(tube.xi_threshold), xi_log_factor(env, tube, include_steps=False)
    return None, xi_log_factor(env, tube)


def survival_naive_mc(
    env: EnvRealization,
    tube: TubeSpec,
    x0: float,
    replicas: int,
    seed: int,
    xi_mode: str = "analytic",
) -> SurvivalEstimate:
    """Fraction of independent replica paths surviving the full tube event."""
    if replicas < 100:
        raise ValueError("replicas must be >= 100")
    if tube.f_offset + tube.n > env.length:
        raise IndexError("environment too short for this tube")
    lo, up = tube.bounds_arrays()
    n, f = tube.n, tube.f_offset
    end = tube.end_bounds()
    xi_p, xi_log = _xi_setup(env, tube, xi_mode)
    survivors = 0
    if lo[0] <= x0 <= up[0]:
        for c in range(math.ceil(replicas / CHUNK)):
            m = min(CHUNK, replicas - c * CHUNK)
            rng = substream(seed, STREAM_NAIVE, c)
            inc = draw_increments(env, f, n, rng, size=m)
            s = x0 + np.cumsum(inc, axis=1)
            ok = np.all((s >= lo[1:]) & (s <= up[1:]), axis=1)
            if end is not None:
                ok &= (s[:, -1] >= end[0]) & (s[:, -1] <= end[1])
            if xi_p is not None:
                ok &= np.all(rng.random((m, n)) < xi_p, axis=1)
            survivors += int(ok.sum())

    phat = survivors / replicas
    if phat == 0.0:
        return from_log(-math.inf, METHOD_NAIVE_MC, replicas, seed=seed, stderr_log=math.inf)
    log_p = math.log(phat) + xi_log
    stderr_log = math.sqrt((1.0 - phat) / (phat * replicas))
    return from_log(log_p, METHOD_NAIVE_MC, replicas, seed=seed, stderr_log=stderr_log)


def survival_splitting(
    env: EnvRealization,
    tube: TubeSpec,
    x0: float,
    particles: int,
    checkpoints: int,
    seed: int,
    xi_mode: str = "analytic",
) -> SurvivalEstimate:
    """Fixed-effort multilevel splitting along the time axis.

    The n steps are cut into `checkpoints` blocks (equal length, remainder
    absorbed by the final block).  After each block the surviving fraction
    phi_k is recorded and survivors are resampled multinomially back to the
    full population; log_p = sum(ln phi_k) with a delta-method standard
    error over the block fractions.  Population extinction in a block
    returns p = 0 with an ``extinction`` flag.
    """
    if particles < 100:
        raise ValueError("particles must be >= 100")
    n, f = tube.n, tube.f_offset
    if not 1 <= checkpoints <= n:
        raise ValueError("checkpoints must satisfy 1 <= checkpoints <= n")
    if f + n > env.length:
        raise IndexError("environment too short for this tube")
    lo, up = tube.bounds_arrays()
    end = tube.end_bounds()
    xi_p, xi_log = _xi_setup(env, tube, xi_mode)
    work = particles * n

    base = n // checkpoints
    lengths = [base] * (checkpoints - 1) + [n - base * (checkpoints - 1)]

    if not (lo[0] <= x0 <= up[0]):
        return from_log(
            -math.inf, METHOD_SPLITTING, work, seed=seed, stderr_log=math.inf, flags=("extinction",)
        )

    pos = np.full(particles, x0)
    log_acc = 0.0
    var_acc = 0.0
    step = 0
    for k, blen in enumerate(lengths):
        rng = substream(seed, STREAM_SPLIT, k)
        inc = draw_increments(env, f + step, blen, rng, size=particles)
        s = pos[:, None] + np.cumsum(inc, axis=1)
        seg_lo = lo[step + 1 : step + blen + 1]
        seg_up = up[step + 1 : step + blen + 1]
        ok = np.all((s >= seg_lo) & (s <= seg_up), axis=1)
        if xi_p is not None:
            ok &= np.all(rng.random((particles, blen)) < xi_p, axis=1)
        step += blen
        if k == len(lengths) - 1 and end is not None:
            ok &= (s[:, -1] >= end[0]) & (s[:, -1] <= end[1])
        alive = int(ok.sum())
        if alive == 0:
            return from_log(
                -math.inf,
                METHOD_SPLITTING,
                work,
                seed=seed,
                stderr_log=math.inf,
                flags=("extinction",),
            )
        phi = alive / particles
        log_acc += math.log(phi)
        var_acc += (1.0 - phi) / (phi * particles)
        surv = s[ok, -1]
        pos = surv[rng.integers(0, alive, size=particles)]

    return from_log(
        log_acc + xi_log, METHOD_SPLITTING, work, seed=seed, stderr_log=math.sqrt(var_acc)
    )
