"""Independent dense oracles used by the tests.

Everything here works directly with 2^L many-body matrices or exhaustive
configuration sums, never through the package's solver or sampler code paths.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
ID2 = np.eye(2)


def _site_op(op: np.ndarray, i: int, L: int) -> np.ndarray:
    mats = [ID2] * L
    mats[i] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def dense_hamiltonian(couplings: np.ndarray, gamma: float) -> np.ndarray:
    """H = -sum J_i sz_i sz_{i+1} - gamma sum sx_i on 2^L states."""
    L = len(couplings) + 1
    dim = 2**L
    h = np.zeros((dim, dim))
    for i, J in enumerate(couplings):
        h -= J * _site_op(SZ, i, L) @ _site_op(SZ, i + 1, L)
    for i in range(L):
        h -= gamma * _site_op(SX, i, L)
    return h


def dense_bond_operator(couplings: np.ndarray) -> np.ndarray:
    """(1/L) sum_i J_i (1 - sz_i sz_{i+1}) as a dense matrix."""
    L = len(couplings) + 1
    dim = 2**L
    op = np.zeros((dim, dim))
    for i, J in enumerate(couplings):
        op += J * (np.eye(dim) - _site_op(SZ, i, L) @ _site_op(SZ, i + 1, L))
    return op / L


def dense_eps_c(couplings: np.ndarray, gamma: float, temperature: float) -> float:
    """Thermal trace of the bond operator; T = 0 averages the ground manifold."""
    h = dense_hamiltonian(couplings, gamma)
    op = dense_bond_operator(couplings)
    vals, vecs = np.linalg.eigh(h)
    diag = np.einsum("ij,ij->j", vecs, op @ vecs)
    if temperature == 0.0:
        mask = vals <= vals[0] + 1e-12
        return float(diag[mask].mean())
    w = np.exp(-(vals - vals[0]) / temperature)
    return float((w @ diag) / w.sum())


def dense_spectrum(couplings: np.ndarray, gamma: float) -> np.ndarray:
    return np.linalg.eigvalsh(dense_hamiltonian(couplings, gamma))


def dense_qa_evolution(
    couplings: np.ndarray,
    gamma0: float,
    tau: float,
    dt: float,
    record_times: np.ndarray,
) -> np.ndarray:
    """RK4 Schroedinger integration of the full 2^L wavefunction.

    Returns eps_res(t, tau) at the requested times (which must be multiples
    of dt up to rounding).
    """
    h0 = dense_hamiltonian(couplings, 0.0)
    hx = dense_hamiltonian(np.zeros_like(couplings), 1.0)
    op = dense_bond_operator(couplings)
    vals, vecs = np.linalg.eigh(h0 + gamma0 * hx)
    psi = vecs[:, 0].astype(complex)

    def h_at(t):
        g = max(gamma0 * (1.0 - t / tau), 0.0)
        return h0 + g * hx

    def deriv(t, y):
        return -1j * (h_at(t) @ y)

    n_steps = int(round(tau / dt))
    record_steps = {int(round(t / dt)) for t in record_times}
    out = {}
    if 0 in record_steps:
        out[0] = float(np.real(np.vdot(psi, op @ psi)))
    for s in range(n_steps):
        t = s * dt
        k1 = deriv(t, psi)
        k2 = deriv(t + dt / 2, psi + dt / 2 * k1)
        k3 = deriv(t + dt / 2, psi + dt / 2 * k2)
        k4 = deriv(t + dt, psi + dt * k3)
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (s + 1) in record_steps:
            out[s + 1] = float(np.real(np.vdot(psi, op @ psi)))
    return np.array([out[int(round(t / dt))] for t in record_times])


def enumerate_action_stats(couplings: np.ndarray, temperature: float, gamma: float,
                           trotter_p: int):
    """Exhaustive sum over all 2^(L*P) path configurations.

    Returns (states, boltzmann weights, eps_avg values, action values) with
    states encoded as +/-1 arrays of shape (L, P).
    """
    L = len(couplings) + 1
    P = trotter_p
    beta_p = 1.0 / (temperature * P)
    jp = -0.5 * math.log(math.tanh(beta_p * gamma))
    states = []
    actions = []
    eps_avgs = []
    sumJ = float(np.sum(couplings))
    for bits in itertools.product((-1, 1), repeat=L * P):
        s = np.array(bits, dtype=np.int64).reshape(L, P)
        spatial = beta_p * float(couplings @ (s[:-1] * s[1:]).sum(axis=1))
        temporal = jp * float((s * np.roll(s, -1, axis=1)).sum())
        k = -(spatial + temporal)
        bond_avg = float(couplings @ (s[:-1] * s[1:]).mean(axis=1))
        states.append(s)
        actions.append(k)
        eps_avgs.append((sumJ - bond_avg) / L)
    actions = np.array(actions)
    w = np.exp(-(actions - actions.min()))
    w /= w.sum()
    return states, w, np.array(eps_avgs), actions
