"""Numba kernels for the path-integral Monte Carlo core.

All kernels consume randomness from an explicit xoshiro256++ state (4 uint64
words, mutated in place) so that chains are reproducible bit-for-bit across
platforms and process boundaries.  The draw order is part of the contract and
is pinned by the exhaustive transition-matrix tests:

* time-cluster MCS: sites in order i = 0..L-1; per site, one uniform per
  *satisfied* temporal bond in slice order k = 0..P-1; clusters are proposed
  in segment order starting after the first cut.  Each cluster draws one
  uniform for the 1/2 proposal coin (the standard SW flip probability, so the
  move reduces to plain SW when the spatial couplings vanish) and, when
  proposed with a positive spatial energy change, one more uniform for the
  Metropolis acceptance.
* space-time SW MCS: one uniform per satisfied spatial bond in (i, k)
  lexicographic order, then per satisfied temporal bond in (i, k) order, then
  one uniform per cluster root in site order.
* space-time Wolff MCS: one uniform for the seed site, then one uniform per
  examined frontier bond in FIFO order (per popped site: left, right,
  time-up, time-down).

The frozen flag implements the zero-field endpoint where the imaginary-time
coupling diverges: temporal bonds connect unconditionally, so every column
moves as a rigid unit.

Spins are int8 with shape (L, P), site-major so each imaginary-time column
is contiguous.  ``sliceJ[k]`` tracks sum_i J_i S_i^k S_{i+1}^k and ``total``
its sum over k; the time-cluster and Wolff moves update both incrementally
(the drivers refresh them periodically to cap float drift).
"""

from __future__ import annotations

import numpy as np
from numba import njit

U11 = np.uint64(11)
U17 = np.uint64(17)
U23 = np.uint64(23)
U41 = np.uint64(41)
U45 = np.uint64(45)
U19 = np.uint64(19)
_INV53 = 1.0 / 9007199254740992.0

MOVE_TIME_CLUSTER = 0
MOVE_SPACETIME_SW = 1
MOVE_SPACETIME_WOLFF = 2


@njit(inline="always")
def _xo_next(state):
    s0 = state[0]
    x = s0 + state[3]
    result = ((x << U23) | (x >> U41)) + s0
    t = state[1] << U17
    state[2] ^= s0
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = (state[3] << U45) | (state[3] >> U19)
    return result


@njit(inline="always")
def _u01(state):
    return np.float64(_xo_next(state) >> U11) * _INV53


@njit(cache=True)
def _scan_sliceJ(spins, J, sliceJ):
    """Recompute per-slice weighted bond sums; returns their total."""
    L, P = spins.shape
    for k in range(P):
        sliceJ[k] = 0.0
    for i in range(L - 1):
        Ji = J[i]
        row = spins[i]
        row2 = spins[i + 1]
        for k in range(P):
            sliceJ[k] += Ji * row[k] * row2[k]
    total = 0.0
    for k in range(P):
        total += sliceJ[k]
    return total


@njit(cache=True)
def _mcs_time_cluster(spins, J, beta_p, p_temp, frozen, state, cuts, sliceJ, total):
    L, P = spins.shape
    for i in range(L):
        row = spins[i]
        rowl = spins[i - 1] if i > 0 else spins[i]
        Jl = J[i - 1] if i > 0 else 0.0
        rowr = spins[i + 1] if i < L - 1 else spins[i]
        Jr = J[i] if i < L - 1 else 0.0

        ncuts = 0
        if not frozen and P > 1:
            for k in range(P):
                k2 = k + 1
                if k2 == P:
                    k2 = 0
                if row[k] != row[k2] or _u01(state) >= p_temp:
                    cuts[ncuts] = k
                    ncuts += 1

        if ncuts == 0:
            if _u01(state) >= 0.5:
                continue
            dl = np.int64(0)
            dr = np.int64(0)
            for k in range(P):
                s = row[k]
                dl += s * rowl[k]
                dr += s * rowr[k]
            dK = 2.0 * beta_p * (Jl * dl + Jr * dr)
            if dK <= 0.0 or _u01(state) < np.exp(-dK):
                for k in range(P):
                    s = row[k]
                    sliceJ[k] -= 2.0 * (Jl * (s * rowl[k]) + Jr * (s * rowr[k]))
                    row[k] = -s
                total -= 2.0 * (Jl * dl + Jr * dr)
        else:
            for c in range(ncuts):
                k0 = cuts[c] + 1
                if k0 == P:
                    k0 = 0
                kend = cuts[c + 1] if c + 1 < ncuts else cuts[0]
                seg = kend - k0 + 1
                if seg <= 0:
                    seg += P
                if _u01(state) >= 0.5:
                    continue
                dl = np.int64(0)
                dr = np.int64(0)
                k = k0
                for _ in range(seg):
                    s = row[k]
                    dl += s * rowl[k]
                    dr += s * rowr[k]
                    k += 1
                    if k == P:
                        k = 0
                dK = 2.0 * beta_p * (Jl * dl + Jr * dr)
                if dK <= 0.0 or _u01(state) < np.exp(-dK):
                    k = k0
                    for _ in range(seg):
                        s = row[k]
                        sliceJ[k] -= 2.0 * (Jl * (s * rowl[k]) + Jr * (s * rowr[k]))
                        row[k] = -s
                        k += 1
                        if k == P:
                            k = 0
                    total -= 2.0 * (Jl * dl + Jr * dr)
    return total


@njit(cache=True)
def _mcs_spacetime_sw(
    spins, p_sp, p_temp, frozen, state, act_sp, act_t, queue, stamp, gen
):
    """Full SW decomposition; flips each cluster with probability 1/2.

    Bond activations are drawn first (spatial then temporal, lexicographic);
    clusters are then flood-filled in site order, drawing one flip decision
    per cluster as it is discovered.
    """
    L, P = spins.shape
    for i in range(L - 1):
        pi = p_sp[i]
        row = spins[i]
        row2 = spins[i + 1]
        arow = act_sp[i]
        for k in range(P):
            arow[k] = 1 if (row[k] == row2[k] and _u01(state) < pi) else 0
    if P > 1:
        for i in range(L):
            row = spins[i]
            arow = act_t[i]
            for k in range(P):
                k2 = k + 1
                if k2 == P:
                    k2 = 0
                if frozen:
                    arow[k] = 1
                else:
                    arow[k] = 1 if (row[k] == row[k2] and _u01(state) < p_temp) else 0
    for s0 in range(L * P):
        if stamp[s0] == gen:
            continue
        stamp[s0] = gen
        do_flip = _u01(state) < 0.5
        queue[0] = s0
        count = 1
        head = 0
        while head < count:
            s = queue[head]
            head += 1
            i = s // P
            k = s % P
            if do_flip:
                spins[i, k] = -spins[i, k]
            if i > 0 and act_sp[i - 1, k] and stamp[s - P] != gen:
                stamp[s - P] = gen
                queue[count] = s - P
                count += 1
            if i < L - 1 and act_sp[i, k] and stamp[s + P] != gen:
                stamp[s + P] = gen
                queue[count] = s + P
                count += 1
            if P > 1:
                k2 = k + 1
                if k2 == P:
                    k2 = 0
                t = s - k + k2
                if act_t[i, k] and stamp[t] != gen:
                    stamp[t] = gen
                    queue[count] = t
                    count += 1
                k3 = k - 1
                if k3 < 0:
                    k3 = P - 1
                t = s - k + k3
                if act_t[i, k3] and stamp[t] != gen:
                    stamp[t] = gen
                    queue[count] = t
                    count += 1


@njit(cache=True)
def _mcs_spacetime_wolff(
    spins, J, p_sp, p_temp, frozen, state, members, stamp, gen, sliceJ
):
    """Grow and flip one cluster; returns the change of the sliceJ total."""
    L, P = spins.shape
    n = L * P
    seed = np.int64(_u01(state) * n)
    if seed >= n:
        seed = n - 1
    members[0] = seed
    stamp[seed] = gen
    count = 1
    head = 0
    while head < count:
        s = members[head]
        head += 1
        i = s // P
        k = s % P
        sv = spins[i, k]
        if i > 0:
            t = s - P
            if stamp[t] != gen and spins[i - 1, k] == sv and _u01(state) < p_sp[i - 1]:
                stamp[t] = gen
                members[count] = t
                count += 1
        if i < L - 1:
            t = s + P
            if stamp[t] != gen and spins[i + 1, k] == sv and _u01(state) < p_sp[i]:
                stamp[t] = gen
                members[count] = t
                count += 1
        if P > 1:
            k2 = k + 1
            if k2 == P:
                k2 = 0
            t = i * P + k2
            if stamp[t] != gen:
                if frozen or (spins[i, k2] == sv and _u01(state) < p_temp):
                    stamp[t] = gen
                    members[count] = t
                    count += 1
            k3 = k - 1
            if k3 < 0:
                k3 = P - 1
            t = i * P + k3
            if stamp[t] != gen:
                if frozen or (spins[i, k3] == sv and _u01(state) < p_temp):
                    stamp[t] = gen
                    members[count] = t
                    count += 1
    delta = 0.0
    for idx in range(count):
        s = members[idx]
        i = s // P
        k = s % P
        sv = spins[i, k]
        if i > 0 and stamp[s - P] != gen:
            d = -2.0 * J[i - 1] * sv * spins[i - 1, k]
            sliceJ[k] += d
            delta += d
        if i < L - 1 and stamp[s + P] != gen:
            d = -2.0 * J[i] * sv * spins[i + 1, k]
            sliceJ[k] += d
            delta += d
    for idx in range(count):
        s = members[idx]
        spins[s // P, s % P] = -spins[s // P, s % P]
    return delta


@njit(cache=True)
def run_chain(
    spins,
    J,
    beta_p,
    p_sp,
    p_temp,
    frozen,
    move_id,
    n_mcs,
    state,
    record,
    eps_avg_out,
    eps_min_out,
    kstar_out,
):
    """Run ``n_mcs`` sweeps at fixed parameters, optionally recording per MCS."""
    L, P = spins.shape
    n = L * P
    sumJ = 0.0
    for i in range(L - 1):
        sumJ += J[i]
    sliceJ = np.zeros(P, np.float64)
    total = _scan_sliceJ(spins, J, sliceJ)
    cuts = np.empty(P, np.int64)
    act_sp = np.empty((L - 1 if L > 1 else 1, P), np.uint8)
    act_t = np.empty((L, P), np.uint8)
    queue = np.empty(n, np.int64)
    members = np.empty(n, np.int64)
    stamp = np.full(n, -1, np.int64)
    gen = 0
    for t in range(n_mcs):
        if move_id == MOVE_TIME_CLUSTER:
            total = _mcs_time_cluster(
                spins, J, beta_p, p_temp, frozen, state, cuts, sliceJ, total
            )
        elif move_id == MOVE_SPACETIME_SW:
            gen += 1
            _mcs_spacetime_sw(
                spins, p_sp, p_temp, frozen, state, act_sp, act_t, queue, stamp, gen
            )
            total = _scan_sliceJ(spins, J, sliceJ)
        else:
            gen += 1
            total += _mcs_spacetime_wolff(
                spins, J, p_sp, p_temp, frozen, state, members, stamp, gen, sliceJ
            )
        if move_id != MOVE_SPACETIME_SW and ((t + 1) & 65535) == 0:
            total = _scan_sliceJ(spins, J, sliceJ)
        if record:
            eps_avg_out[t] = (sumJ - total / P) / L
            best = sliceJ[0]
            kb = 0
            for k in range(1, P):
                if sliceJ[k] > best:
                    best = sliceJ[k]
                    kb = k
            eps_min_out[t] = (sumJ - best) / L
            kstar_out[t] = kb + 1


@njit(cache=True)
def run_anneal(
    spins,
    J,
    beta_p,
    p_sp,
    move_id,
    gammas,
    stride,
    state,
    ts_out,
    gamma_out,
    eps_avg_out,
    eps_min_out,
    kstar_out,
):
    """Anneal over MC time: at step t (1-based) do one MCS at field gammas[t-1].

    Records observables every ``stride`` steps and at the final step;
    recorded values are exact rescans.  Returns the number of records.
    """
    L, P = spins.shape
    n = L * P
    tau = gammas.size
    sumJ = 0.0
    for i in range(L - 1):
        sumJ += J[i]
    sliceJ = np.zeros(P, np.float64)
    total = _scan_sliceJ(spins, J, sliceJ)
    cuts = np.empty(P, np.int64)
    act_sp = np.empty((L - 1 if L > 1 else 1, P), np.uint8)
    act_t = np.empty((L, P), np.uint8)
    queue = np.empty(n, np.int64)
    members = np.empty(n, np.int64)
    stamp = np.full(n, -1, np.int64)
    gen = 0
    rec = 0
    for t in range(1, tau + 1):
        g = gammas[t - 1]
        frozen = g <= 0.0
        p_temp = 1.0 - np.tanh(beta_p * g)
        if move_id == MOVE_TIME_CLUSTER:
            total = _mcs_time_cluster(
                spins, J, beta_p, p_temp, frozen, state, cuts, sliceJ, total
            )
        elif move_id == MOVE_SPACETIME_SW:
            gen += 1
            _mcs_spacetime_sw(
                spins, p_sp, p_temp, frozen, state, act_sp, act_t, queue, stamp, gen
            )
        else:
            gen += 1
            _mcs_spacetime_wolff(
                spins, J, p_sp, p_temp, frozen, state, members, stamp, gen, sliceJ
            )
        if t % stride == 0 or t == tau:
            total = _scan_sliceJ(spins, J, sliceJ)
            ts_out[rec] = t
            gamma_out[rec] = g
            eps_avg_out[rec] = (sumJ - total / P) / L
            best = sliceJ[0]
            kb = 0
            for k in range(1, P):
                if sliceJ[k] > best:
                    best = sliceJ[k]
                    kb = k
            eps_min_out[rec] = (sumJ - best) / L
            kstar_out[rec] = kb + 1
            rec += 1
    return rec
