"""Counter-based random numbers for reproducible Monte Carlo.

Every draw is a pure function of ``(seed, stream, step)``, so simulations are
bit-reproducible no matter how work is scheduled across threads or processes.
The mixer is three chained rounds of the SplitMix64 finalizer, which is
cheap and has no sequential state to share.

The Cython walker in ``heva._mc_cy`` reimplements exactly this arithmetic in
C; ``tests/test_mc.py`` asserts the two produce identical bits.
"""

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# 2**-53; a 53-bit mantissa maps to [0, 1).
_INV53 = 1.0 / 9007199254740992.0


def splitmix64(z: int) -> int:
    """One SplitMix64 finalizer round on a 64-bit value."""
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def counter_word(seed: int, stream: int, step: int) -> int:
    """The 64-bit word at position ``(stream, step)`` of the seeded cube."""
    z = splitmix64(seed & MASK64)
    z = splitmix64(z ^ ((stream * _GOLDEN) & MASK64))
    z = splitmix64(z ^ ((step * _MIX1) & MASK64))
    return z


def counter_uniform(seed: int, stream: int, step: int) -> float:
    """Uniform double in [0, 1) drawn at counter ``(seed, stream, step)``."""
    return (counter_word(seed, stream, step) >> 11) * _INV53
