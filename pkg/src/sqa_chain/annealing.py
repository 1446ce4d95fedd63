"""Annealing schedules, trajectory records, and the SQA driver.

The schedule is shared between the Monte Carlo annealer (time in MCS) and the
coherent solver (physical time, hbar = 1): the field starts at gamma0 and is
reduced linearly to zero over the total annealing time tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _mc_kernels as mck
from .errors import ValidationError
from .instances import Instance
from .pimc import _MOVE_IDS, PathConfig, PimcParams, spatial_bond_probabilities
from .rng import derive_seed, xoshiro_state


@dataclass(frozen=True)
class Schedule:
    """Linear ramp gamma(t) = gamma0 (1 - t/tau); gamma(tau) = 0."""

    gamma0: float
    tau: float
    form: str = "linear"

    def __post_init__(self):
        if self.gamma0 <= 0:
            raise ValidationError(f"gamma0 must be > 0, got {self.gamma0}")
        if self.tau <= 0:
            raise ValidationError(f"tau must be > 0, got {self.tau}")
        if self.form != "linear":
            raise ValidationError(f"unknown schedule form {self.form!r}")


def schedule_gamma(schedule: Schedule, t: float) -> float:
    if t < 0 or t > schedule.tau:
        raise ValidationError(
            f"t = {t} outside the schedule domain [0, {schedule.tau}]"
        )
    return schedule.gamma0 * (1.0 - t / schedule.tau)


def gamma_steps_array(schedule: Schedule, gamma_steps: int | None = None) -> np.ndarray:
    """Per-MCS fields for an integer-time schedule: entry t-1 drives MCS t.

    With ``gamma_steps = N`` the field is held for N MCS at each value
    (a staircase); otherwise it is decremented every MCS.  Either way the
    final MCS runs at gamma = 0.
    """
    tau = int(round(schedule.tau))
    if tau < 1:
        raise ValidationError("schedule.tau must be >= 1 MCS")
    t = np.arange(1, tau + 1, dtype=np.float64)
    if gamma_steps is not None:
        if gamma_steps < 1:
            raise ValidationError("gamma_steps must be >= 1")
        t = np.ceil(t / gamma_steps) * gamma_steps
    return np.maximum(schedule.gamma0 * (1.0 - t / tau), 0.0)


@dataclass(frozen=True)
class TrajectoryRecord:
    """One sampled point along an annealing run."""

    t: float
    gamma: float
    eps_avg: float
    eps_min: float
    k_star: int | None
    rep: int

    def __post_init__(self):
        if self.eps_min > self.eps_avg + 1e-12:
            raise ValidationError("eps_min must not exceed eps_avg")


@dataclass
class SqaResult:
    """Per-repetition records plus repetition-level means and standard errors."""

    records: list[TrajectoryRecord]
    ts: np.ndarray
    gammas: np.ndarray
    eps_avg_mean: np.ndarray
    eps_avg_sem: np.ndarray
    eps_min_mean: np.ndarray
    eps_min_sem: np.ndarray
    n_reps: int

    @property
    def final_eps_avg(self) -> tuple[float, float]:
        return float(self.eps_avg_mean[-1]), float(self.eps_avg_sem[-1])

    @property
    def final_eps_min(self) -> tuple[float, float]:
        return float(self.eps_min_mean[-1]), float(self.eps_min_sem[-1])


def default_equilibration(tau: int) -> int:
    """Preliminary equilibration length at gamma0: max(1000, tau/10) MCS."""
    return max(1000, tau // 10)


def _sqa_single_rep(
    inst: Instance,
    temperature: float,
    trotter_p: int,
    gammas: np.ndarray,
    gamma0: float,
    move_family: str,
    stride: int,
    t_eq: int,
    seed: int,
):
    """One SQA repetition; returns (ts, gammas, eps_avg, eps_min, kstar)."""
    tau = gammas.size
    cfg = PathConfig.random(inst.length, trotter_p, derive_seed(seed, 1))
    state = xoshiro_state(derive_seed(seed, 2))
    params = PimcParams(temperature, gamma0, trotter_p, move_family)
    beta_p = params.beta_p
    p_sp = spatial_bond_probabilities(beta_p, inst.couplings)
    move_id = _MOVE_IDS[move_family]
    if t_eq > 0:
        empty = np.empty(0, np.float64)
        empty_i = np.empty(0, np.int64)
        p_temp0 = 1.0 - math.tanh(beta_p * gamma0)
        mck.run_chain(
            cfg.spins,
            inst.couplings,
            beta_p,
            p_sp,
            p_temp0,
            gamma0 <= 0.0,
            move_id,
            t_eq,
            state,
            False,
            empty,
            empty,
            empty_i,
        )
    n_rec = tau // stride + (0 if tau % stride == 0 else 1)
    ts = np.empty(n_rec, np.int64)
    gam = np.empty(n_rec, np.float64)
    eps_avg = np.empty(n_rec, np.float64)
    eps_min = np.empty(n_rec, np.float64)
    kstar = np.empty(n_rec, np.int64)
    filled = mck.run_anneal(
        cfg.spins,
        inst.couplings,
        beta_p,
        p_sp,
        move_id,
        gammas,
        stride,
        state,
        ts,
        gam,
        eps_avg,
        eps_min,
        kstar,
    )
    if filled != n_rec:
        raise AssertionError(f"record count mismatch: {filled} != {n_rec}")
    return ts, gam, eps_avg, eps_min, kstar


def sqa_run(
    inst: Instance,
    temperature: float,
    trotter_p: int,
    schedule: Schedule,
    move_family: str,
    seed: int,
    n_reps: int = 32,
    stride: int | None = None,
    t_eq: int | None = None,
    gamma_steps: int | None = None,
    workers: int = 1,
) -> SqaResult:
    """Run SQA repetitions and aggregate their trajectories.

    Each repetition equilibrates a fresh random configuration at gamma0 for
    t_eq MCS, then performs one MCS per schedule step with the field reduced
    according to ``gamma_steps_array``.  Records are taken every ``stride``
    MCS and at t = tau.  Results are deterministic in ``seed`` and independent
    of ``workers``.
    """
    if temperature <= 0:
        raise ValidationError("temperature must be > 0")
    if n_reps < 1:
        raise ValidationError("n_reps must be >= 1")
    gammas = gamma_steps_array(schedule, gamma_steps)
    tau = gammas.size
    if stride is None:
        stride = max(1, tau // 200)
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    if t_eq is None:
        t_eq = default_equilibration(tau)

    def point(rep: int):
        return _sqa_single_rep(
            inst,
            temperature,
            trotter_p,
            gammas,
            schedule.gamma0,
            move_family,
            stride,
            t_eq,
            derive_seed(seed, rep),
        )

    if workers > 1 and n_reps > 1:
        from .sweep import run_parallel

        results = run_parallel(
            [
                (rep, _sqa_single_rep, dict(
                    inst=inst,
                    temperature=temperature,
                    trotter_p=trotter_p,
                    gammas=gammas,
                    gamma0=schedule.gamma0,
                    move_family=move_family,
                    stride=stride,
                    t_eq=t_eq,
                    seed=derive_seed(seed, rep),
                ))
                for rep in range(n_reps)
            ],
            workers=workers,
        )
        per_rep = [res for _, res in results]
    else:
        per_rep = [point(rep) for rep in range(n_reps)]

    ts = per_rep[0][0]
    gam = per_rep[0][1]
    avg = np.stack([r[2] for r in per_rep])
    mn = np.stack([r[3] for r in per_rep])
    records = [
        TrajectoryRecord(
            t=float(ts[j]),
            gamma=float(gam[j]),
            eps_avg=float(per_rep[rep][2][j]),
            eps_min=float(per_rep[rep][3][j]),
            k_star=int(per_rep[rep][4][j]),
            rep=rep,
        )
        for rep in range(n_reps)
        for j in range(len(ts))
    ]
    if n_reps > 1:
        sem_avg = avg.std(axis=0, ddof=1) / math.sqrt(n_reps)
        sem_min = mn.std(axis=0, ddof=1) / math.sqrt(n_reps)
    else:
        sem_avg = np.full(len(ts), math.nan)
        sem_min = np.full(len(ts), math.nan)
    return SqaResult(
        records=records,
        ts=ts.astype(np.float64),
        gammas=gam,
        eps_avg_mean=avg.mean(axis=0),
        eps_avg_sem=sem_avg,
        eps_min_mean=mn.mean(axis=0),
        eps_min_sem=sem_min,
        n_reps=n_reps,
    )


def mean_trajectory(result: SqaResult) -> list[TrajectoryRecord]:
    """Repetition-averaged trajectory as records (k_star is meaningless here)."""
    out = []
    for j in range(len(result.ts)):
        avg = float(result.eps_avg_mean[j])
        mn = float(result.eps_min_mean[j])
        out.append(
            TrajectoryRecord(
                t=float(result.ts[j]),
                gamma=float(result.gammas[j]),
                eps_avg=avg,
                eps_min=min(mn, avg),
                k_star=None,
                rep=-1,
            )
        )
    return out
