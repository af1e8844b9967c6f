"""Pure-Python (numpy) sampling kernel, used when the compiled one is unavailable.

Draws are bit-for-bit identical to ``_ckernels``.
"""
import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1
BLOCK = 1 << 20


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, counters: np.ndarray) -> np.ndarray:
    z = np.uint64(seed) + (counters + np.uint64(1)) * GAMMA
    return (_mix(z) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def tally(seed, start, stop, prior_cum, kernel_cum, counts):
    """Draw samples ``start..stop-1`` and add them to ``counts[hidden, tuple]``."""
    n_tuples = kernel_cum.shape[1]
    for lo in range(start, stop, BLOCK):
        hi = min(stop, lo + BLOCK)
        idx = np.arange(lo, hi, dtype=np.uint64)
        lam = np.searchsorted(prior_cum[:-1], uniforms(seed, 2 * idx), side="right")
        u = uniforms(seed, 2 * idx + np.uint64(1))
        t = np.empty(len(idx), dtype=np.int64)
        for k in np.unique(lam):
            mask = lam == k
            t[mask] = np.searchsorted(kernel_cum[k, :-1], u[mask], side="right")
        flat = np.bincount(lam * n_tuples + t, minlength=counts.size)
        counts += flat.reshape(counts.shape)


def splitmix64(seed: int, n: int) -> list[int]:
    """First ``n`` raw outputs, computed with Python integers."""
    out = []
    state = seed
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        out.append(z ^ (z >> 31))
    return out
