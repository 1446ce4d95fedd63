import numpy as np
import pytest

from oracles import dense_eps_c, dense_qa_evolution, dense_spectrum
from sqa_chain import fermion
from sqa_chain.annealing import Schedule
from sqa_chain.errors import AccuracyError, ValidationError
from sqa_chain.instances import generate_instance


def test_bdg_matrix_symmetric_and_traceless(inst6):
    m = fermion.build_bdg_matrix(inst6, 0.8).matrix
    assert np.abs(m - m.T).max() < 1e-14
    vals = np.linalg.eigvalsh(m)
    assert abs(vals.sum()) < 1e-12
    # particle-hole symmetry: spectrum symmetric about zero
    assert np.abs(vals + vals[::-1]).max() < 1e-10


def test_negative_gamma_rejected(inst6):
    with pytest.raises(ValidationError):
        fermion.build_bdg_matrix(inst6, -0.5)
    with pytest.raises(ValidationError):
        fermion.equilibrium_eps_c(inst6, -1.0, 0.1)
    with pytest.raises(ValidationError):
        fermion.equilibrium_eps_c(inst6, 1.0, -0.1)


def test_l2_zero_field_many_body_spectrum():
    inst = generate_instance(2, "ordered(1)", 0)
    mine = fermion.many_body_spectrum(inst, 0.0)
    assert np.allclose(mine, [-1.0, -1.0, 1.0, 1.0], atol=1e-12)
    assert np.allclose(mine, dense_spectrum(inst.couplings, 0.0), atol=1e-12)


def test_many_body_spectrum_matches_dense(inst6):
    mine = fermion.many_body_spectrum(inst6, 0.73)
    assert np.abs(mine - dense_spectrum(inst6.couplings, 0.73)).max() < 1e-10


def test_ground_energy_ordered_l8(inst8_ordered):
    eg = fermion.many_body_ground_energy(inst8_ordered, 1.0)
    assert abs(eg - dense_spectrum(inst8_ordered.couplings, 1.0)[0]) < 1e-10


@pytest.mark.parametrize("gamma", [0.0, 0.1, 1 / np.e, 1.0])
@pytest.mark.parametrize("temperature", [0.01, 0.1, 1.0])
def test_eps_c_matches_dense_thermal_trace(inst6, gamma, temperature):
    mine = fermion.equilibrium_eps_c(inst6, gamma, temperature)
    assert abs(mine - dense_eps_c(inst6.couplings, gamma, temperature)) < 1e-10


def test_eps_c_zero_at_classical_ground_state(inst6):
    assert fermion.equilibrium_eps_c(inst6, 0.0, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_eps_c_saturates_at_large_field(inst6):
    sat = float(np.sum(inst6.couplings)) / inst6.length
    val = fermion.equilibrium_eps_c(inst6, 1e3, 0.01)
    assert abs(val - sat) < 1e-3


def test_tabulate_requires_nonempty_grid(inst6):
    with pytest.raises(ValidationError):
        fermion.tabulate_equilibrium(inst6, np.array([]), 0.1)


def test_tabulate_single_point_zero(inst6):
    curve = fermion.tabulate_equilibrium(inst6, np.array([0.0]), 0.0)
    assert curve.values.tolist() == [0.0]
    assert curve.eps_c(0.0) == 0.0


def test_interpolation_error_small():
    inst = generate_instance(32, "uniform01", 9)
    grid = np.arange(0.0, 1.5 + 1e-9, 0.01)
    curve = fermion.tabulate_equilibrium(inst, grid, 0.1)
    off = np.arange(0.005, 1.49, 0.037)
    direct = np.array([fermion.equilibrium_eps_c(inst, g, 0.1) for g in off])
    assert np.abs(curve.eps_c(off) - direct).max() < 1e-4


def test_curve_monotone_through_critical_point(inst6):
    grid = np.arange(0.0, 1.0 + 1e-9, 0.02)
    curve = fermion.tabulate_equilibrium(inst6, grid, 0.01)
    assert np.all(np.diff(curve.values) >= -1e-12)
    assert np.all(curve.values >= 0.0)


def test_curve_factory_matches_tabulate(inst6):
    grid = np.arange(0.0, 2.0 + 1e-9, 0.1)
    factory = fermion.equilibrium_curve_factory(inst6, grid)
    for temperature in (0.0, 0.05, 0.7):
        direct = fermion.tabulate_equilibrium(inst6, grid, temperature)
        assert np.abs(factory(temperature).values - direct.values).max() < 1e-12


def test_coherent_evolution_matches_dense(inst6):
    tau = 20.0
    records = fermion.coherent_qa_evolve(inst6, Schedule(2.5, tau), dt=1e-3,
                                         stride=4000)
    times = np.array([r.t for r in records])
    mine = np.array([r.eps_avg for r in records])
    dense = dense_qa_evolution(inst6.couplings, 2.5, tau, 1e-3, times)
    assert np.abs(mine - dense).max() < 1e-6


def test_frozen_schedule_is_stationary(inst6):
    records = fermion._evolve(inst6, (1.3, 0.0), 5.0, 1e-3, 1000)
    vals = np.array([r.eps_avg for r in records])
    assert np.abs(vals - vals[0]).max() < 1e-8


def test_sudden_quench_matches_static_expectation(inst6):
    records = fermion.coherent_qa_evolve(inst6, Schedule(2.5, 1e-6))
    static = fermion.equilibrium_eps_c(inst6, 2.5, 0.0)
    assert records[-1].eps_avg == pytest.approx(static, abs=1e-7)


@pytest.mark.parametrize("tau,dt", [(10.0, 1e-3), (100.0, 5e-3)])
def test_step_halving_convergence(inst6, tau, dt):
    a = fermion.coherent_qa_evolve(inst6, Schedule(2.5, tau), dt=dt)[-1].eps_avg
    b = fermion.coherent_qa_evolve(inst6, Schedule(2.5, tau), dt=dt / 2)[-1].eps_avg
    assert abs(a - b) < 1e-6


def test_unitarity_along_evolution(inst6):
    records = fermion.coherent_qa_evolve(inst6, Schedule(2.5, 10.0), dt=1e-3)
    assert records  # drift is checked at every record inside the evolution


def test_ground_state_orthonormal(inst6):
    state = fermion.ground_state(inst6, 1.3)
    assert state.orthonormality_defect() < 1e-12
    # the bond correlators of the static state match the thermal T=0 path
    J = inst6.couplings
    eps = float(J.sum() - J @ state.bond_correlators()) / inst6.length
    assert eps == pytest.approx(fermion.equilibrium_eps_c(inst6, 1.3, 0.0),
                                abs=1e-10)


def test_orthonormality_error_advises_smaller_dt(inst6):
    with pytest.raises(AccuracyError, match="reduce dt"):
        fermion.coherent_qa_evolve(inst6, Schedule(2.5, 50.0), dt=0.45)


def test_invalid_time_steps_rejected(inst6):
    with pytest.raises(ValidationError):
        fermion.coherent_qa_evolve(inst6, Schedule(2.5, 10.0), dt=-0.1)
    with pytest.raises(ValidationError):
        Schedule(2.5, -1.0)


def test_evolution_deterministic(inst6):
    a = fermion.coherent_qa_evolve(inst6, Schedule(2.5, 5.0), dt=1e-3)
    b = fermion.coherent_qa_evolve(inst6, Schedule(2.5, 5.0), dt=1e-3)
    assert [r.eps_avg for r in a] == [r.eps_avg for r in b]
