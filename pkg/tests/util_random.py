"""Deterministic random inputs for tests, drawn from the package's own
counter-based generator so every run sees identical data."""

import numpy as np

from heva import Element
from heva.rng import counter_uniform, counter_word


def random_element(seed, trial, max_index=32, max_support=6, signed=True):
    """Finitely supported element with reproducible coefficients."""
    size = 1 + counter_word(seed, trial, 0) % min(max_support, max_index)
    indices = []
    draw = 1
    while len(indices) < size:
        idx = counter_word(seed, trial, draw) % max_index
        draw += 1
        if idx not in indices:
            indices.append(idx)
    coeffs = {}
    for slot, idx in enumerate(sorted(indices)):
        u = counter_uniform(seed, trial, 500 + slot)
        coeffs[idx] = 2.0 * u - 1.0 if signed else u
    return Element(coeffs)


def random_unit_element(seed, trial, max_index=32, max_support=6):
    v = random_element(seed, trial, max_index, max_support)
    sq = sum(x * x for x in v.coefficients.values())
    if sq == 0.0:
        return Element({0: 1.0})
    inv = 1.0 / np.sqrt(sq)
    return Element({i: x * inv for i, x in v.coefficients.items()})


def random_dense_stochastic(rng, n):
    """Dense stochastic structure matrix: columns of c sum to 1 (rows of the
    underlying kernel are Dirichlet draws)."""
    kernel_rows = rng.dirichlet(np.ones(n), size=n)
    return kernel_rows.T.copy()
