import numpy as np
import pytest

from sqa_chain import annealing
from sqa_chain.annealing import Schedule, gamma_steps_array, schedule_gamma, sqa_run
from sqa_chain.errors import ValidationError
from sqa_chain.instances import generate_instance


def test_schedule_endpoints_and_midpoint():
    s = Schedule(2.5, 100.0)
    assert schedule_gamma(s, 0.0) == 2.5
    assert schedule_gamma(s, 100.0) == 0.0
    assert schedule_gamma(s, 50.0) == 1.25


def test_schedule_domain_checks():
    s = Schedule(2.5, 100.0)
    with pytest.raises(ValidationError):
        schedule_gamma(s, -1.0)
    with pytest.raises(ValidationError):
        schedule_gamma(s, 101.0)
    with pytest.raises(ValidationError):
        Schedule(0.0, 10.0)
    with pytest.raises(ValidationError):
        Schedule(2.5, 10.0, form="quadratic")


def test_gamma_array_linear_each_mcs():
    g = gamma_steps_array(Schedule(2.5, 5))
    assert np.allclose(g, 2.5 * (1 - np.arange(1, 6) / 5))
    assert g[-1] == 0.0
    assert np.all(np.diff(g) < 0)


def test_gamma_array_staircase():
    g = gamma_steps_array(Schedule(2.0, 8), gamma_steps=2)
    # plateaus of 2 MCS each, ending at zero
    assert np.allclose(g, [1.5, 1.5, 1.0, 1.0, 0.5, 0.5, 0.0, 0.0])
    with pytest.raises(ValidationError):
        gamma_steps_array(Schedule(2.0, 8), gamma_steps=0)


def test_sqa_run_records_and_aggregates(inst4):
    result = sqa_run(
        inst4, 0.5, 4, Schedule(2.5, 40.0), "time_cluster", seed=3,
        n_reps=4, stride=10, t_eq=50,
    )
    assert result.ts.tolist() == [10.0, 20.0, 30.0, 40.0]
    assert result.gammas[-1] == 0.0
    assert result.n_reps == 4
    assert len(result.records) == 16
    assert np.all(result.eps_min_mean <= result.eps_avg_mean + 1e-12)
    for rec in result.records:
        assert rec.eps_min <= rec.eps_avg + 1e-12
        assert 1 <= rec.k_star <= 4


def test_sqa_determinism_and_worker_independence(inst4):
    kwargs = dict(n_reps=3, stride=7, t_eq=20)
    a = sqa_run(inst4, 0.5, 3, Schedule(2.5, 21.0), "time_cluster", 9, **kwargs)
    b = sqa_run(inst4, 0.5, 3, Schedule(2.5, 21.0), "time_cluster", 9, **kwargs)
    assert np.array_equal(a.eps_avg_mean, b.eps_avg_mean)
    assert np.array_equal(a.eps_min_mean, b.eps_min_mean)
    c = sqa_run(inst4, 0.5, 3, Schedule(2.5, 21.0), "time_cluster", 9,
                workers=2, **kwargs)
    assert np.array_equal(a.eps_avg_mean, c.eps_avg_mean)


def test_sqa_final_step_runs_at_zero_field(inst4):
    for fam in ("time_cluster", "spacetime_sw", "spacetime_wolff"):
        result = sqa_run(inst4, 0.5, 3, Schedule(2.5, 10.0), fam, seed=1,
                         n_reps=1, stride=100, t_eq=10)
        assert result.gammas[-1] == 0.0


def test_sqa_validation(inst4):
    with pytest.raises(ValidationError):
        sqa_run(inst4, 0.5, 3, Schedule(2.5, 0.4), "time_cluster", 1)
    with pytest.raises(ValidationError):
        sqa_run(inst4, -0.5, 3, Schedule(2.5, 10.0), "time_cluster", 1)
    with pytest.raises(ValidationError):
        sqa_run(inst4, 0.5, 3, Schedule(2.5, 10.0), "time_cluster", 1, n_reps=0)


def test_default_equilibration_rule():
    assert annealing.default_equilibration(10) == 1000
    assert annealing.default_equilibration(100_000) == 10_000


def test_mean_trajectory_preserves_ordering(inst4):
    result = sqa_run(inst4, 0.5, 3, Schedule(2.5, 20.0), "spacetime_sw", seed=2,
                     n_reps=3, stride=5, t_eq=10)
    traj = annealing.mean_trajectory(result)
    assert [r.t for r in traj] == result.ts.tolist()
    assert all(r.eps_min <= r.eps_avg for r in traj)


@pytest.fixture(scope="module")
def disordered256():
    return generate_instance(256, "uniform01", 7)


def test_sqa_trotter_limit_reached_by_p256(disordered256):
    # curves for P >= 256 agree within error bars (the P -> infinity limit)
    finals = {}
    for trotter_p in (256, 1024):
        res = sqa_run(disordered256, 0.01, trotter_p, Schedule(2.5, 316.0),
                      "time_cluster", seed=21, n_reps=8, stride=10**9)
        finals[trotter_p] = res.final_eps_avg
    a, sa = finals[256]
    b, sb = finals[1024]
    assert abs(a - b) < 3.5 * np.hypot(sa, sb)


def test_sqa_avg_and_min_approach_at_large_tau(disordered256):
    gaps = {}
    for tau in (100, 3162):
        res = sqa_run(disordered256, 0.01, 256, Schedule(2.5, float(tau)),
                      "time_cluster", seed=22, n_reps=8, stride=10**9)
        gaps[tau] = res.final_eps_avg[0] - res.final_eps_min[0]
    assert gaps[3162] < 0.6 * gaps[100]


def test_staircase_equivalent_scale(inst4):
    # staircase and per-MCS ramps sample comparable final energies
    smooth = sqa_run(inst4, 0.5, 4, Schedule(2.5, 200.0), "time_cluster",
                     seed=5, n_reps=8, t_eq=100)
    stair = sqa_run(inst4, 0.5, 4, Schedule(2.5, 200.0), "time_cluster",
                    seed=6, n_reps=8, t_eq=100, gamma_steps=10)
    a, sa = smooth.final_eps_avg
    b, sb = stair.final_eps_avg
    assert abs(a - b) < 4 * np.hypot(sa, sb) + 0.05
