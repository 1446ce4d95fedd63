"""Seed derivation and the portable counter-free PRNG used by the MC kernels.

Instance generation uses numpy's PCG64 (named, documented, stream-stable).
The Monte Carlo kernels run inside numba and use xoshiro256++ with states
built by splitmix64, following the published reference algorithms; both are
pure uint64 integer arithmetic and therefore bit-identical across platforms.

Chain-level streams are derived from ``(master seed, chain id)`` with
:func:`derive_seed`, so concurrently executed chains are independent and the
overall result does not depend on scheduling order.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_SM_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    """One splitmix64 output for state ``z`` (also the next state seed)."""
    z = (z + _SM_GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master: int, *indices: int) -> int:
    """Mix ``master`` with a tuple of stream indices into a 64-bit seed.

    Pure function; used for per-chain, per-repetition and per-point streams.
    """
    z = master & _MASK
    for idx in indices:
        z = splitmix64(z ^ splitmix64((idx & _MASK) ^ _SM_GAMMA))
    return z


def xoshiro_state(seed: int) -> np.ndarray:
    """Initial xoshiro256++ state (4 x uint64) from a 64-bit seed.

    Standard recipe: four successive splitmix64 outputs seeded by ``seed``.
    """
    state = np.empty(4, dtype=np.uint64)
    z = seed & _MASK
    for i in range(4):
        z = (z + _SM_GAMMA) & _MASK
        w = z
        w = ((w ^ (w >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        w = ((w ^ (w >> 27)) * 0x94D049BB133111EB) & _MASK
        state[i] = (w ^ (w >> 31)) & _MASK
    return state


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def xoshiro_next_py(state: np.ndarray) -> int:
    """Reference Python step of xoshiro256++; mutates ``state`` in place.

    The numba kernels carry an identical implementation; this copy exists so
    tests can pin the two against each other.
    """
    s0, s1, s2, s3 = (int(state[i]) for i in range(4))
    result = (_rotl((s0 + s3) & _MASK, 23) + s0) & _MASK
    t = (s1 << 17) & _MASK
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    state[0], state[1], state[2], state[3] = (
        np.uint64(s0),
        np.uint64(s1),
        np.uint64(s2),
        np.uint64(s3),
    )
    return result


def uniform_from_bits(bits: int) -> float:
    """Map a uint64 to a double in [0, 1) using the top 53 bits."""
    return (bits >> 11) * (1.0 / 9007199254740992.0)
