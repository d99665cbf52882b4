"""Seeded Monte Carlo driver.

Every trial owns its random streams, derived from ``(seed, trial)`` only, so a
result never depends on worker count or scheduling. The same trial index
sees the same channel at every sweep point (common random numbers), which
keeps sweep curves smooth at desk-scale trial counts.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from ..channel import apply_estimation_error, sample_link_geometry, sample_triple
from ..numerics import DegenerateChannelError, largest_eigenvalue_gram
from ..irs import reflected_gain
from ..pipeline import evaluate, reflection_vector
from .config import EXPERIMENTS, SystemConfig, apply_sweep
from .results import ExperimentResult

POWER_RTOL = 1e-9
MODULUS_ATOL = 1e-12
LEMMA1_RTOL = 1e-9
BOUND_RTOL = 1e-9


class InvariantViolation(AssertionError):
    """A per-trial sanity check failed; the message names the trial."""


@dataclass(frozen=True)
class TrialStreams:
    channel: np.random.Generator
    irs: np.random.Generator
    estimation: np.random.Generator
    padding: np.random.SeedSequence  # re-seeded per evaluation


def trial_streams(seed: int, trial: int) -> TrialStreams:
    ch, irs, est, pad = np.random.SeedSequence([seed, trial]).spawn(4)
    return TrialStreams(np.random.default_rng(ch), np.random.default_rng(irs),
                        np.random.default_rng(est), pad)


def sample_trial_channel(config: SystemConfig, rng: np.random.Generator, force_ofdm: bool = False):
    geometry = sample_link_geometry(rng, config.d_ti_range_m, config.d_ir_range_m, config.d_tr_offset_m)
    k = config.subcarriers if (config.subcarriers > 1 or force_ofdm) else None
    return sample_triple(rng, config.arrays, geometry, config.n_path, config.angle_range,
                         config.shadowing, config.penetration_db, k)


def _check_hybrid(hb, config: SystemConfig, k_power: float, trial: int):
    n_t = config.arrays.tx.size
    n_r = config.arrays.rx.size
    for name, stage, n in (("F_RF", hb.f_rf, n_t), ("W_RF", hb.w_rf, n_r)):
        if np.max(np.abs(np.abs(stage) - 1 / math.sqrt(n))) > MODULUS_ATOL:
            raise InvariantViolation(f"trial {trial}: {name} is not constant modulus")
    f_bbs = hb.f_bb if hb.f_bb.ndim == 3 else hb.f_bb[None]
    for k, f_bb in enumerate(f_bbs):
        p = np.linalg.norm(hb.f_rf @ f_bb) ** 2
        if abs(p - k_power) > POWER_RTOL * k_power:
            raise InvariantViolation(f"trial {trial}: subcarrier {k} power {p} != {k_power}")


def _check_lemma1(triple, v, trial: int):
    h_ir = triple.h_ir if not triple.is_ofdm else triple.h_ir[0]
    p = triple.paths_ti
    a_in = triple.arrays.irs.response(p.aoa_az[0], p.aoa_el[0])
    lhs = reflected_gain(h_ir, v, a_in)
    lam = largest_eigenvalue_gram(h_ir)
    if lhs > lam + LEMMA1_RTOL * max(1.0, lam):
        raise InvariantViolation(f"trial {trial}: reflected gain {lhs} exceeds bound {lam}")


def run_trial(config: SystemConfig, trial: int, force_ofdm: bool = False,
              check: bool = True) -> dict[tuple[str, str], float]:
    """Spectral efficiency of each enabled (design, architecture) pair.

    Degenerate evaluations are reported as NaN. With ``check`` the invariant
    battery runs and raises :class:`InvariantViolation` on failure.
    """
    streams = trial_streams(config.seed, trial)
    truth = sample_trial_channel(config, streams.channel, force_ofdm)
    estimate = apply_estimation_error(truth, streams.estimation, config.estimation_error_deg)
    link = config.link
    k_power = link.p_tx / truth.n_subcarriers if truth.is_ofdm else link.p_tx
    out: dict[tuple[str, str], float] = {}
    for design in config.designs:
        v = reflection_vector(design, estimate, streams.irs if design == "random" else None)
        if check and v is not None:
            _check_lemma1(truth, v, trial)
        for arch in config.architectures:
            pad_rng = np.random.default_rng(streams.padding)
            try:
                ev = evaluate(estimate, truth, v, arch, config.n_t_rf, config.n_r_rf,
                              config.n_streams, link, pad_rng)
            except DegenerateChannelError:
                out[(design, arch)] = math.nan
                continue
            out[(design, arch)] = ev.rate
            if check and arch == "hybrid":
                _check_hybrid(ev.beamformer, config, k_power, trial)
        if check and config.estimation_error_deg == 0 and {"hybrid", "digital"} <= set(config.architectures):
            hyb, dig = out[(design, "hybrid")], out[(design, "digital")]
            if not (math.isnan(hyb) or math.isnan(dig)) and hyb > dig + BOUND_RTOL * max(1.0, dig):
                raise InvariantViolation(f"trial {trial}: hybrid {hyb} exceeds digital {dig} ({design})")
    return out


def _trial_task(args):
    config, sweep_param, values, trial, check = args
    return [run_trial(apply_sweep(config, sweep_param, x), trial, check=check) for x in values]


def aggregate(rates: np.ndarray) -> tuple[float, float, int, int]:
    """Mean, standard error, valid count and degenerate count of one cell."""
    ok = rates[~np.isnan(rates)]
    n = int(ok.size)
    mean = float(np.mean(ok)) if n else math.nan
    stderr = float(np.std(ok, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, stderr, n, int(rates.size - n)


@dataclass
class ExperimentRun:
    results: list[ExperimentResult]
    wall_time_s: float  # kept out of result files so reruns are byte-identical


def run_experiment(config: SystemConfig, sweep_param: str, values: Iterable, workers: int = 1,
                   check: bool = True) -> ExperimentRun:
    """Sweep ``sweep_param`` over ``values`` with ``config.trials`` trials per point."""
    values = tuple(values)
    for x in values:
        apply_sweep(config, sweep_param, x)  # validate every point before running
    tasks = [(config, sweep_param, values, t, check) for t in range(config.trials)]
    start = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_trial_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        per_trial = [_trial_task(t) for t in tasks]
    wall = time.perf_counter() - start

    results = []
    for i, x in enumerate(values):
        for design in config.designs:
            for arch in config.architectures:
                rates = np.array([per_trial[t][i][(design, arch)] for t in range(config.trials)])
                mean, se, n, n_deg = aggregate(rates)
                results.append(ExperimentResult(sweep_param, float(x), design, arch, mean, se, n, n_deg))
    return ExperimentRun(results, wall)


def run_named(name: str, config: Optional[SystemConfig] = None, workers: int = 1,
              values: Optional[Iterable] = None) -> ExperimentRun:
    """Run a registered experiment (``fig2``, ``fig3``, ...) on top of ``config``."""
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    spec = EXPERIMENTS[name]
    config = (config or SystemConfig()).replace(**spec.overrides)
    return run_experiment(config, spec.sweep_param, spec.values if values is None else values, workers)


__all__ = ["run_trial", "run_experiment", "run_named", "aggregate", "trial_streams",
           "InvariantViolation", "ExperimentRun"]
