"""Exact reference solver via the mapping to free spinless fermions.

The chain maps onto the quadratic form H = sum A_ij c+_i c_j
+ (1/2) sum B_ij (c+_i c+_j - c_i c_j) with

    A_ii = -2 Gamma,  A_{i,i+1} = A_{i+1,i} = -J_i,
    B_{i,i+1} = -B_{i+1,i} = -J_i,

equivalently H = (1/2) Psi+ M Psi with M = [[A, B], [-B, -A]] acting on
Psi = (c_1..c_L, c+_1..c+_L).  Sign conventions are pinned by the dense
2^L oracle tests, not normatively.

Statics: the singular value decomposition A + B = U diag(e) V^T yields the
single-particle energies e_mu >= 0 and the nearest-neighbor bond correlator

    <(c+_i - c_i)(c+_{i+1} + c_{i+1})>_T = [U diag(2f - 1) V^T]_{i,i+1},

with Fermi factors f_mu at temperature T (2f - 1 -> -1 as T -> 0, the
limit that also covers degenerate zero modes at Gamma = 0).

Dynamics: the amplitude matrix Phi = (u; v) of the occupied Bogoliubov modes
obeys i dPhi/dt = M(Gamma(t)) Phi, integrated with fixed-step RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange
from scipy.interpolate import PchipInterpolator

from .annealing import Schedule, TrajectoryRecord
from .errors import AccuracyError, ValidationError
from .instances import Instance


@dataclass
class BdgMatrix:
    """The 2L x 2L quadratic-form matrix at a fixed transverse field."""

    matrix: np.ndarray = field(repr=False)
    gamma: float
    instance: Instance


def _blocks(inst: Instance, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    L = inst.length
    J = inst.couplings
    a = np.zeros((L, L))
    b = np.zeros((L, L))
    np.fill_diagonal(a, -2.0 * gamma)
    idx = np.arange(L - 1)
    a[idx, idx + 1] = -J
    a[idx + 1, idx] = -J
    b[idx, idx + 1] = -J
    b[idx + 1, idx] = J
    return a, b


def build_bdg_matrix(inst: Instance, gamma: float) -> BdgMatrix:
    """Assemble M = [[A, B], [-B, -A]]; symmetric with a +/- paired spectrum."""
    if gamma < 0:
        raise ValidationError(f"gamma must be >= 0, got {gamma}")
    a, b = _blocks(inst, gamma)
    m = np.block([[a, b], [-b, -a]])
    return BdgMatrix(matrix=m, gamma=gamma, instance=inst)


def _svd_bond_data(inst: Instance, gamma: float):
    """Energies e_mu and per-mode bond weights c_mu = sum_i J_i U_i,mu Vt_mu,i+1."""
    a, b = _blocks(inst, gamma)
    u, eps, vt = np.linalg.svd(a + b)
    c = np.einsum("i,im,mi->m", inst.couplings, u[:-1, :], vt[:, 1:])
    return eps, c


def single_particle_energies(inst: Instance, gamma: float) -> np.ndarray:
    """Nonnegative single-particle energies e_mu, descending."""
    if gamma < 0:
        raise ValidationError(f"gamma must be >= 0, got {gamma}")
    eps, _ = _svd_bond_data(inst, gamma)
    return eps


def many_body_ground_energy(inst: Instance, gamma: float) -> float:
    """Ground-state energy -(1/2) sum e_mu of the full chain (not per spin)."""
    return -0.5 * float(np.sum(single_particle_energies(inst, gamma)))


def many_body_spectrum(inst: Instance, gamma: float) -> np.ndarray:
    """All 2^L many-body energies sum_mu e_mu (n_mu - 1/2); for small L tests."""
    eps = single_particle_energies(inst, gamma)
    L = inst.length
    if L > 14:
        raise ValidationError("many-body spectrum reconstruction limited to L <= 14")
    levels = np.zeros(1)
    for e in eps:
        levels = np.concatenate([levels - 0.5 * e, levels + 0.5 * e])
    return np.sort(levels)


def equilibrium_eps_c(inst: Instance, gamma: float, temperature: float) -> float:
    """Thermal residual bond energy per spin, eps_c(Gamma, T) >= 0.

    T = 0 means the ground state (all negative-energy modes occupied; exact
    zero modes follow the Gamma -> 0+ convention).
    """
    if gamma < 0:
        raise ValidationError(f"gamma must be >= 0, got {gamma}")
    if temperature < 0:
        raise ValidationError(f"temperature must be >= 0, got {temperature}")
    eps, c = _svd_bond_data(inst, gamma)
    if temperature == 0.0:
        w = np.ones_like(eps)
    else:
        w = np.tanh(eps / (2.0 * temperature))
    total = float(np.sum(inst.couplings) + w @ c)
    return total / inst.length


@dataclass
class EquilibriumCurve:
    """eps_c on a gamma grid at fixed T, with monotone cubic interpolation."""

    gammas: np.ndarray
    temperature: float
    values: np.ndarray
    _interp: PchipInterpolator | None = field(default=None, repr=False)

    def __post_init__(self):
        self.gammas = np.asarray(self.gammas, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.gammas.size == 0:
            raise ValidationError("equilibrium curve needs a nonempty gamma grid")
        if np.any(np.diff(self.gammas) <= 0):
            raise ValidationError("gamma grid must be sorted strictly ascending")
        if np.any(self.values < -1e-10):
            raise ValidationError("eps_c must be nonnegative on the grid")
        self.values = np.maximum(self.values, 0.0)

    def eps_c(self, gamma):
        if self.gammas.size == 1:
            return np.full_like(np.asarray(gamma, dtype=float), self.values[0])[()]
        if self._interp is None:
            self._interp = PchipInterpolator(self.gammas, self.values)
        return self._interp(gamma)


def tabulate_equilibrium(
    inst: Instance, gamma_grid: np.ndarray, temperature: float
) -> EquilibriumCurve:
    grid = np.asarray(gamma_grid, dtype=np.float64)
    if grid.size == 0:
        raise ValidationError("empty gamma grid")
    values = np.array([equilibrium_eps_c(inst, g, temperature) for g in grid])
    return EquilibriumCurve(grid, temperature, values)


def equilibrium_curve_factory(inst: Instance, gamma_grid: np.ndarray):
    """Callable T -> EquilibriumCurve with the spectral data cached per gamma.

    The SVD at each grid point is computed once; curves at different
    temperatures then cost O(L) per point, which makes the effective
    temperature fit cheap.
    """
    grid = np.asarray(gamma_grid, dtype=np.float64)
    if grid.size == 0:
        raise ValidationError("empty gamma grid")
    if np.any(np.diff(grid) <= 0):
        raise ValidationError("gamma grid must be sorted strictly ascending")
    data = [_svd_bond_data(inst, g) for g in grid]
    sumJ = float(np.sum(inst.couplings))
    L = inst.length

    def factory(temperature: float) -> EquilibriumCurve:
        values = np.empty(grid.size)
        for j, (eps, c) in enumerate(data):
            if temperature == 0.0:
                w = np.ones_like(eps)
            else:
                w = np.tanh(eps / (2.0 * temperature))
            values[j] = (sumJ + float(w @ c)) / L
        return EquilibriumCurve(grid, temperature, values)

    return factory


@dataclass
class BdgState:
    """Occupied Bogoliubov modes (u, v), one row per mode, at time t."""

    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    t: float

    def orthonormality_defect(self) -> float:
        d = self.u @ self.u.conj().T + self.v @ self.v.conj().T
        d[np.diag_indices_from(d)] -= 1.0
        return float(np.abs(d).max())

    def bond_correlators(self) -> np.ndarray:
        """<(c+_i - c_i)(c+_{i+1} + c_{i+1})> for every bond, from Wick's theorem."""
        u, v = self.u, self.v
        g = np.sum(v[:, :-1] * v[:, 1:].conj(), axis=0)
        f_fwd = np.sum(u[:, :-1] * v[:, 1:].conj(), axis=0)
        f_bwd = np.sum(u[:, 1:].conj() * v[:, :-1], axis=0)
        return (2.0 * g.real + f_bwd - f_fwd).real

    def eps_res(self, inst: Instance) -> float:
        J = inst.couplings
        return float(J.sum() - J @ self.bond_correlators()) / inst.length


def ground_state(inst: Instance, gamma: float) -> BdgState:
    """Occupied modes of the instantaneous ground state at field gamma."""
    m = build_bdg_matrix(inst, gamma).matrix
    L = inst.length
    vals, vecs = np.linalg.eigh(m)
    pos = vecs[:, L:]
    return BdgState(u=np.ascontiguousarray(pos[:L, :].T, dtype=np.complex128),
                    v=np.ascontiguousarray(pos[L:, :].T, dtype=np.complex128),
                    t=0.0)


@njit(inline="always")
def _deriv_row(J, g, uc, vc, duc, dvc, L):
    # du = -i (A u + B v); dv = +i (B u + A v); banded A, B as in _blocks.
    for i in range(L):
        Jm = J[i - 1] if i > 0 else 0.0
        Jp = J[i] if i < L - 1 else 0.0
        um = uc[i - 1] if i > 0 else 0.0 + 0.0j
        up = uc[i + 1] if i < L - 1 else 0.0 + 0.0j
        vm = vc[i - 1] if i > 0 else 0.0 + 0.0j
        vp = vc[i + 1] if i < L - 1 else 0.0 + 0.0j
        au = -2.0 * g * uc[i] - Jm * um - Jp * up
        bv = Jm * vm - Jp * vp
        bu = Jm * um - Jp * up
        av = -2.0 * g * vc[i] - Jm * vm - Jp * vp
        duc[i] = -1j * (au + bv)
        dvc[i] = 1j * (bu + av)


@njit(cache=True, parallel=True)
def _rk4_chunk(J, ga, gb, tau, t0, dt, nsteps, u, v, k1u, k1v, k2u, k2v,
               k3u, k3v, k4u, k4v, tu, tv):
    """Advance all modes by nsteps of RK4 under gamma(t) = max(ga + gb*t, 0)."""
    nmodes, L = u.shape
    for m in prange(nmodes):
        uc = u[m]
        vc = v[m]
        for s in range(nsteps):
            t = t0 + s * dt
            g1 = ga + gb * t
            if g1 < 0.0:
                g1 = 0.0
            g2 = ga + gb * (t + 0.5 * dt)
            if g2 < 0.0:
                g2 = 0.0
            g3 = ga + gb * (t + dt)
            if g3 < 0.0:
                g3 = 0.0
            _deriv_row(J, g1, uc, vc, k1u[m], k1v[m], L)
            for i in range(L):
                tu[m, i] = uc[i] + 0.5 * dt * k1u[m, i]
                tv[m, i] = vc[i] + 0.5 * dt * k1v[m, i]
            _deriv_row(J, g2, tu[m], tv[m], k2u[m], k2v[m], L)
            for i in range(L):
                tu[m, i] = uc[i] + 0.5 * dt * k2u[m, i]
                tv[m, i] = vc[i] + 0.5 * dt * k2v[m, i]
            _deriv_row(J, g2, tu[m], tv[m], k3u[m], k3v[m], L)
            for i in range(L):
                tu[m, i] = uc[i] + dt * k3u[m, i]
                tv[m, i] = vc[i] + dt * k3v[m, i]
            _deriv_row(J, g3, tu[m], tv[m], k4u[m], k4v[m], L)
            for i in range(L):
                uc[i] += dt / 6.0 * (
                    k1u[m, i] + 2.0 * k2u[m, i] + 2.0 * k3u[m, i] + k4u[m, i]
                )
                vc[i] += dt / 6.0 * (
                    k1v[m, i] + 2.0 * k2v[m, i] + 2.0 * k3v[m, i] + k4v[m, i]
                )


def default_dt(tau: float) -> float:
    """Fixed RK4 step min(1e-2, tau/1e5); satisfies the step-halving check."""
    return min(1e-2, tau / 1e5)


ORTHONORMALITY_TOL = 1e-6


def _evolve(
    inst: Instance,
    gamma_fn_coeffs: tuple[float, float],
    tau: float,
    dt: float | None,
    stride: int | None,
) -> list[TrajectoryRecord]:
    if tau <= 0:
        raise ValidationError(f"tau must be > 0, got {tau}")
    if dt is None:
        dt = default_dt(tau)
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    n_steps = max(1, int(math.ceil(tau / dt - 1e-12)))
    dt_eff = tau / n_steps
    ga, gb = gamma_fn_coeffs
    state = ground_state(inst, max(ga, 0.0))
    if stride is None:
        stride = max(1, n_steps // 200)
    u, v = state.u, state.v
    bufs = [np.empty_like(u) for _ in range(10)]
    records = [
        TrajectoryRecord(
            t=0.0,
            gamma=max(ga, 0.0),
            eps_avg=state.eps_res(inst),
            eps_min=state.eps_res(inst),
            k_star=None,
            rep=0,
        )
    ]
    done = 0
    while done < n_steps:
        chunk = min(stride, n_steps - done)
        _rk4_chunk(
            inst.couplings, ga, gb, tau, done * dt_eff, dt_eff, chunk, u, v, *bufs
        )
        done += chunk
        t = done * dt_eff
        state = BdgState(u=u, v=v, t=t)
        defect = state.orthonormality_defect()
        if defect > ORTHONORMALITY_TOL:
            raise AccuracyError(
                f"orthonormality drift {defect:.3e} exceeds {ORTHONORMALITY_TOL}; "
                "reduce dt"
            )
        eps = state.eps_res(inst)
        records.append(
            TrajectoryRecord(
                t=t,
                gamma=max(ga + gb * t, 0.0),
                eps_avg=eps,
                eps_min=eps,
                k_star=None,
                rep=0,
            )
        )
    return records


def coherent_qa_evolve(
    inst: Instance,
    schedule: Schedule,
    dt: float | None = None,
    stride: int | None = None,
) -> list[TrajectoryRecord]:
    """Integrate the coherent annealing dynamics; records eps_res(t, tau).

    The state starts in the ground state at gamma(0) and follows
    i dPhi/dt = M(gamma(t)) Phi under the linear schedule; the final record
    carries eps_res(tau).  Raises AccuracyError if orthonormality drifts
    beyond 1e-6 (advice: smaller dt).
    """
    tau = schedule.tau
    return _evolve(
        inst, (schedule.gamma0, -schedule.gamma0 / tau), tau, dt, stride
    )
