# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernel. Must stay bit-for-bit in step with _pykernels."""
from libc.stdint cimport int64_t, uint64_t

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double TWO_POW_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t seed, uint64_t counter) noexcept nogil:
    return <double>(_mix(seed + (counter + 1) * GAMMA) >> 11) * TWO_POW_M53


cdef inline Py_ssize_t _search(const double* cum, Py_ssize_t m, double u) noexcept nogil:
    # number of cum[0..m-2] that are <= u
    cdef Py_ssize_t lo = 0, hi = m - 1, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def tally(uint64_t seed, uint64_t start, uint64_t stop,
          const double[::1] prior_cum, const double[:, ::1] kernel_cum,
          int64_t[:, ::1] counts):
    """Draw samples ``start..stop-1`` and add them to ``counts[hidden, tuple]``."""
    cdef Py_ssize_t n_hidden = prior_cum.shape[0]
    cdef Py_ssize_t n_tuples = kernel_cum.shape[1]
    cdef uint64_t i
    cdef Py_ssize_t lam, t
    with nogil:
        for i in range(start, stop):
            lam = _search(&prior_cum[0], n_hidden, _uniform(seed, 2 * i))
            t = _search(&kernel_cum[lam, 0], n_tuples, _uniform(seed, 2 * i + 1))
            counts[lam, t] += 1


def splitmix64(uint64_t seed, Py_ssize_t n):
    """First ``n`` raw outputs of the stream (for cross-checking backends)."""
    cdef Py_ssize_t k
    return [_mix(seed + (<uint64_t>k + 1) * GAMMA) for k in range(n)]
