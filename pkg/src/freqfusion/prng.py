"""splitmix64 generator and Box-Muller Gaussians.

The stream is fully specified so fixtures are reproducible anywhere:

* state advances by ``0x9E3779B97F4A7C15`` (mod 2**64) before each output;
* a uniform is ``(u64 >> 11) * 2**-53`` in [0, 1);
* Gaussians come in pairs from consecutive uniforms ``(u1, u2)`` as
  ``r = sqrt(-2 ln(1 - u1))``, ``(r cos 2 pi u2, r sin 2 pi u2)``, computed
  in float64 and rounded to float32.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def prng_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(output, new_state)``."""
    state = (state + GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31), state


def _mix(states: np.ndarray) -> np.ndarray:
    z = states.copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(_M1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_M2)
    z ^= z >> np.uint64(31)
    return z


class SplitMix64:
    """Stateful splitmix64 stream with vectorized draws.

    splitmix64 output k depends only on ``seed + (k + 1) * GAMMA``, so blocks
    of outputs are computed at once and match repeated :func:`prng_next`.
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        value, self.state = prng_next(self.state)
        return value

    def u64(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = np.uint64(self.state) + steps * np.uint64(GAMMA)
        self.state = (self.state + n * GAMMA) & MASK64
        return _mix(states)

    def uniforms(self, n: int) -> np.ndarray:
        return (self.u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def gaussians(self, n: int) -> np.ndarray:
        """``n`` float32 normals; an odd ``n`` discards the second half of the last pair."""
        pairs = (n + 1) // 2
        u = self.uniforms(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        theta = 2.0 * np.pi * u[:, 1]
        z = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1).reshape(-1)
        return z[:n].astype(np.float32)


def gaussian_stream(seed: int, block: int = 1024):
    """Endless float32 Gaussian stream for ``seed``."""
    rng = SplitMix64(seed)
    while True:
        yield from rng.gaussians(block).tolist()
