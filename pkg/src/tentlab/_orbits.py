"""Compiled forward-orbit loops for the tent family.

Binary floating point collapses orbits of the slope-2 tent map (doubling is
exact, so every orbit lands on the fixed point -1 within ~55 steps).  Each
step therefore adds a uniform dither of amplitude :data:`DITHER`, which keeps
the low mantissa bits random at every slope.  The dither is orders of
magnitude below every tolerance used downstream.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DITHER = 2.0**-50


def derive_seed(*key: int) -> int:
    """32-bit seed derived from an integer key (master seed, task index, ...)."""
    return int(np.random.SeedSequence([int(k) & 0xFFFFFFFF for k in key]).generate_state(1)[0])


@njit(cache=True, nogil=True)
def _orbit(t, x0, n, seed, dither):
    np.random.seed(seed)
    out = np.empty(n)
    x = x0
    for i in range(n):
        out[i] = x
        y = min(t * (x - 1.0) + 3.0, t * (1.0 - x) - 1.0)
        if dither > 0.0:
            y += dither * (2.0 * np.random.random() - 1.0)
        if y > 1.0:
            y = 1.0
        elif y < -1.0:
            y = -1.0
        x = y
    return out


def tent_orbit(t: float, x0: float, n: int, seed: int, dither: float = DITHER) -> np.ndarray:
    """``x0, f(x0), ..., f^{n-1}(x0)`` (dithered)."""
    return _orbit(float(t), float(x0), int(n), int(seed) & 0xFFFFFFFF, float(dither))


def orbit_chunks(t: float, x0: float, n: int, seed: int, chunk: int = 1 << 20,
                 dither: float = DITHER):
    """Yield a length-``n`` orbit in consecutive blocks of at most ``chunk`` points."""
    x = float(x0)
    done = 0
    k = 0
    while done < n:
        m = min(chunk, n - done)
        block = tent_orbit(t, x, m + 1, derive_seed(seed, k), dither)
        yield block[:m]
        x = block[m]
        done += m
        k += 1
