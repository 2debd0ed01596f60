"""Counter-based Philox4x32-10 streams keyed by (seed, walk index).

Every random number is a pure function of (seed, walk, step), so walk
results do not depend on batching or thread scheduling.
"""

import numpy as np
from numba import njit

_MASK = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_SHIFT = np.uint64(32)


@njit(cache=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten rounds of Philox4x32 on a 128-bit counter and 64-bit key (uint64 words, low 32 bits used)."""
    c0 = np.uint64(c0) & _MASK
    c1 = np.uint64(c1) & _MASK
    c2 = np.uint64(c2) & _MASK
    c3 = np.uint64(c3) & _MASK
    k0 = np.uint64(k0) & _MASK
    k1 = np.uint64(k1) & _MASK
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _SHIFT
        lo0 = p0 & _MASK
        hi1 = p1 >> _SHIFT
        lo1 = p1 & _MASK
        c0 = (hi1 ^ c1 ^ k0) & _MASK
        c1 = lo1
        c2 = (hi0 ^ c3 ^ k1) & _MASK
        c3 = lo0
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


@njit(cache=True)
def uniform(seed, walk, step):
    """Uniform double in [0, 1) for draw `step` of walk `walk` under `seed`."""
    s = np.uint64(seed)
    w = np.uint64(walk)
    r0, r1, _, _ = philox4x32(np.uint64(step), w & _MASK, w >> _SHIFT, np.uint64(0), s & _MASK, s >> _SHIFT)
    hi = r0 >> np.uint64(5)
    lo = r1 >> np.uint64(6)
    return (float(hi) * 67108864.0 + float(lo)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def uniforms(seed, walk, steps):
    out = np.empty(steps)
    for k in range(steps):
        out[k] = uniform(seed, walk, k)
    return out
