"""Exhaustive transition distributions of the three MC move families.

Pure-Python re-implementations of the move definitions that branch over
every random decision instead of consuming a stream, giving exact
single-MCS transition matrices on tiny lattices.  Independent of the numba
kernels; used to verify stationarity of exp(-K_cl)/Z and ergodicity.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def state_key(spins: np.ndarray) -> tuple:
    return tuple(int(s) for s in spins.ravel())


def _clusters_from_cuts(cut_set: set[int], P: int) -> list[list[int]]:
    """Circular segments between cut bonds, in the kernels' construction order."""
    cuts = sorted(cut_set)
    if not cuts:
        return [list(range(P))]
    clusters = []
    for c, cut in enumerate(cuts):
        k0 = (cut + 1) % P
        kend = cuts[c + 1] if c + 1 < len(cuts) else cuts[0]
        seg = (kend - k0) % P + 1
        clusters.append([(k0 + j) % P for j in range(seg)])
    return clusters


def _spatial_dk(spins, i, cluster, couplings, beta_p) -> float:
    L, P = spins.shape
    dk = 0.0
    for k in cluster:
        s = spins[i, k]
        if i > 0:
            dk += couplings[i - 1] * s * spins[i - 1, k]
        if i < L - 1:
            dk += couplings[i] * s * spins[i + 1, k]
    return 2.0 * beta_p * dk


def time_cluster_outcomes(spins, couplings, beta_p, p_temp, frozen=False):
    """Distribution over configurations after one time-cluster MCS."""
    L, P = spins.shape
    outcomes = {state_key(spins): (spins.copy(), 1.0)}
    for i in range(L):
        new_outcomes: dict = {}
        for cfg, prob in outcomes.values():
            for cfg2, p2 in _site_outcomes(cfg, i, couplings, beta_p, p_temp,
                                           frozen):
                key = state_key(cfg2)
                if key in new_outcomes:
                    new_outcomes[key] = (cfg2, new_outcomes[key][1] + prob * p2)
                else:
                    new_outcomes[key] = (cfg2, prob * p2)
        outcomes = new_outcomes
    return {k: p for k, (_, p) in outcomes.items()}


def _site_outcomes(cfg, i, couplings, beta_p, p_temp, frozen):
    L, P = cfg.shape
    col = cfg[i]
    if frozen or P == 1:
        bond_patterns = [((), 1.0)]
        satisfied = []
    else:
        satisfied = [k for k in range(P) if col[k] == col[(k + 1) % P]]
        bond_patterns = []
        for active in itertools.chain.from_iterable(
            itertools.combinations(satisfied, r) for r in range(len(satisfied) + 1)
        ):
            prob = 1.0
            for k in satisfied:
                prob *= p_temp if k in active else (1.0 - p_temp)
            bond_patterns.append((active, prob))
    results = []
    for active, pat_prob in bond_patterns:
        if frozen or P == 1:
            clusters = [list(range(P))]
        else:
            cuts = {k for k in range(P) if k not in active}
            clusters = _clusters_from_cuts(cuts, P)
        # flip decisions are independent across the (slice-disjoint) clusters
        for flips in itertools.product((False, True), repeat=len(clusters)):
            cfg2 = cfg.copy()
            prob = pat_prob
            for cluster, do_flip in zip(clusters, flips):
                dk = _spatial_dk(cfg, i, cluster, couplings, beta_p)
                p_flip = 0.5 * min(1.0, math.exp(-dk))
                if do_flip:
                    prob *= p_flip
                    for k in cluster:
                        cfg2[i, k] = -cfg2[i, k]
                else:
                    prob *= 1.0 - p_flip
            if prob > 0.0:
                results.append((cfg2, prob))
    return results


def _all_bonds(L, P):
    spatial = [((i, k), (i + 1, k)) for i in range(L - 1) for k in range(P)]
    temporal = []
    if P > 1:
        temporal = [((i, k), (i, (k + 1) % P)) for i in range(L) for k in range(P)]
    return spatial, temporal


def _components(n_sites, edges):
    parent = list(range(n_sites))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, list[int]] = {}
    for s in range(n_sites):
        comps.setdefault(find(s), []).append(s)
    return [comps[r] for r in sorted(comps)]


def spacetime_sw_outcomes(spins, couplings, beta_p, p_temp, frozen=False):
    """Distribution over configurations after one space-time SW MCS."""
    L, P = spins.shape
    p_sp = [1.0 - math.exp(-2.0 * beta_p * j) for j in couplings]
    spatial, temporal = _all_bonds(L, P)
    sat_sp = [(b, p_sp[b[0][0]]) for b in spatial
              if spins[b[0]] == spins[b[1]]]
    if frozen:
        frozen_edges = temporal
        sat_t = []
    else:
        frozen_edges = []
        sat_t = [(b, p_temp) for b in temporal if spins[b[0]] == spins[b[1]]]
    bonds = sat_sp + sat_t

    def site_id(site):
        return site[0] * P + site[1]

    outcomes: dict = {}
    for pattern in itertools.product((False, True), repeat=len(bonds)):
        prob = 1.0
        edges = [(site_id(a), site_id(b)) for (a, b) in frozen_edges]
        for (bond, p), active in zip(bonds, pattern):
            prob *= p if active else (1.0 - p)
            if active:
                edges.append((site_id(bond[0]), site_id(bond[1])))
        comps = _components(L * P, edges)
        for flips in itertools.product((False, True), repeat=len(comps)):
            cfg2 = spins.copy()
            for comp, do_flip in zip(comps, flips):
                if do_flip:
                    for s in comp:
                        cfg2[s // P, s % P] = -cfg2[s // P, s % P]
            key = state_key(cfg2)
            p_total = prob * 0.5 ** len(comps)
            outcomes[key] = outcomes.get(key, 0.0) + p_total
    return outcomes


def spacetime_wolff_outcomes(spins, couplings, beta_p, p_temp, frozen=False):
    """Distribution over configurations after one Wolff MCS.

    Mirrors the kernel's FIFO growth with per-popped-site bond order
    (left, right, time-up, time-down); the resulting cluster distribution is
    examination-order independent, so this pins the move definition itself.
    """
    L, P = spins.shape
    n = L * P
    p_sp = [1.0 - math.exp(-2.0 * beta_p * j) for j in couplings]
    outcomes: dict = {}

    def bonds_of(site_idx):
        i, k = divmod(site_idx, P)
        out = []
        if i > 0:
            out.append((site_idx - P, p_sp[i - 1], False))
        if i < L - 1:
            out.append((site_idx + P, p_sp[i], False))
        if P > 1:
            out.append((i * P + (k + 1) % P, p_temp, True))
            out.append((i * P + (k - 1) % P, p_temp, True))
        return out

    def rec(queue, head, edge_list, members, prob, seed_prob):
        while True:
            if edge_list:
                (target, p, is_temporal), *rest = edge_list
                if target in members:
                    edge_list = rest
                    continue
                if is_temporal and frozen:
                    queue = queue + [target]
                    members = members | {target}
                    edge_list = rest
                    continue
                cur = queue[head]
                if spins[target // P, target % P] != spins[cur // P, cur % P]:
                    edge_list = rest
                    continue
                # success branch explored recursively, then fall through to
                # the failure branch of this same bond
                rec(queue + [target], head, rest, members | {target},
                    prob * p, seed_prob)
                prob *= 1.0 - p
                edge_list = rest
                continue
            head += 1
            if head >= len(queue):
                break
            edge_list = bonds_of(queue[head])
        cfg2 = spins.copy()
        for s in members:
            cfg2[s // P, s % P] = -cfg2[s // P, s % P]
        key = state_key(cfg2)
        outcomes[key] = outcomes.get(key, 0.0) + seed_prob * prob

    for seed in range(n):
        rec([seed], 0, bonds_of(seed), {seed}, 1.0, 1.0 / n)
    return outcomes


def transition_matrix(move_outcomes, spins_list, couplings, beta_p, p_temp,
                      frozen=False):
    """Dense single-MCS transition matrix over an explicit state list."""
    index = {state_key(s): j for j, s in enumerate(spins_list)}
    n = len(spins_list)
    T = np.zeros((n, n))
    for j, s in enumerate(spins_list):
        dist = move_outcomes(s, couplings, beta_p, p_temp, frozen)
        for key, p in dist.items():
            T[j, index[key]] += p
    return T


def all_states(L, P):
    states = []
    for bits in itertools.product((-1, 1), repeat=L * P):
        states.append(np.array(bits, dtype=np.int8).reshape(L, P))
    return states
