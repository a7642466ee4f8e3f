# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo walker; hot twin of ``heva._mc_py``.

The counter-based generator reimplements ``heva.rng`` in C (three chained
SplitMix64 finalizer rounds); ``tests/test_mc.py`` pins bit-equality of both
the draws and the walks against the pure-Python reference.
"""

import numpy as np

ctypedef unsigned long long u64


cdef inline u64 _splitmix64(u64 z) noexcept nogil:
    z = z + <u64>0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 _counter_word(u64 seed, u64 stream, u64 step) noexcept nogil:
    cdef u64 z = _splitmix64(seed)
    z = _splitmix64(z ^ (stream * <u64>0x9E3779B97F4A7C15ULL))
    z = _splitmix64(z ^ (step * <u64>0xBF58476D1CE4E5B9ULL))
    return z


cdef inline double _counter_uniform(u64 seed, u64 stream, u64 step) noexcept nogil:
    return <double>(_counter_word(seed, stream, step) >> 11) * (1.0 / 9007199254740992.0)


def counter_word(seed, stream, step):
    """Exposed for bit-equality tests against the pure-Python generator."""
    return int(_counter_word(<u64>seed, <u64>stream, <u64>step))


def counter_uniform(seed, stream, step):
    return _counter_uniform(<u64>seed, <u64>stream, <u64>step)


cdef inline long long _pick(const double[::1] cdf, double u,
                            long long lo, long long hi) noexcept nogil:
    # First index in [lo, hi) whose cumulative value exceeds u, or hi.
    cdef long long mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


def walk_paths(const long long[::1] indptr,
               const long long[::1] cols,
               const double[::1] cdf,
               const long long[::1] init_states,
               const double[::1] init_cdf,
               long long n_steps,
               object seed,
               long long n_paths):
    """Walk ``n_paths`` trajectories; -1 marks a path that escaped the window."""
    cdef u64 seed64 = <u64>seed
    cdef long long n_init = init_cdf.shape[0]
    out_arr = np.empty(n_paths, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef long long path, state, step, lo, hi, pos
    cdef double u

    with nogil:
        for path in range(n_paths):
            u = _counter_uniform(seed64, <u64>path, 0)
            pos = _pick(init_cdf, u, 0, n_init)
            state = init_states[pos] if pos < n_init else -1
            step = 1
            while step <= n_steps and state >= 0:
                u = _counter_uniform(seed64, <u64>path, <u64>step)
                lo = indptr[state]
                hi = indptr[state + 1]
                pos = _pick(cdf, u, lo, hi)
                state = cols[pos] if pos < hi else -1
                step += 1
            out[path] = state
    return out_arr
