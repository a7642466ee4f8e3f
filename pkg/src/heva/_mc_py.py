"""Pure-Python Monte Carlo walker; reference twin of ``heva._mc_cy``.

Both implementations consume the same CSR window snapshot and the same
counter-based draws, and must return bit-identical results.  Keep the
sampling semantics in sync: a draw ``u`` selects the first row entry whose
cumulative probability exceeds ``u``; ``u`` at or beyond the row total means
the path escapes the window and stays escaped.
"""

from bisect import bisect_right

import numpy as np

from .rng import counter_uniform


def walk_paths(indptr, cols, cdf, init_states, init_cdf, n_steps, seed, n_paths):
    """Walk ``n_paths`` independent trajectories; returns an int64 array of
    final states with ``-1`` marking escaped paths.

    Step 0 of each path's substream samples the initial state from
    ``(init_states, init_cdf)``; steps ``1..n_steps`` sample transitions.
    """
    indptr_l = indptr.tolist()
    cols_l = cols.tolist()
    cdf_l = cdf.tolist()
    init_states_l = init_states.tolist()
    init_cdf_l = init_cdf.tolist()
    n_init = len(init_cdf_l)

    out = np.empty(n_paths, dtype=np.int64)
    for path in range(n_paths):
        u = counter_uniform(seed, path, 0)
        pos = bisect_right(init_cdf_l, u, 0, n_init)
        state = init_states_l[pos] if pos < n_init else -1
        step = 1
        while step <= n_steps and state >= 0:
            u = counter_uniform(seed, path, step)
            lo = indptr_l[state]
            hi = indptr_l[state + 1]
            pos = bisect_right(cdf_l, u, lo, hi)
            state = cols_l[pos] if pos < hi else -1
            step += 1
        out[path] = state
    return out
