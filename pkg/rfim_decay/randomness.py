"""Counter-based random streams.

Every draw is addressed by ``(seed, stream, purpose, a, b)``: ``seed`` and
``stream`` form the 128-bit Philox key, ``purpose`` and the two coordinates
``a``/``b`` fill the upper counter words. The same address always yields the
same numbers, independent of which other addresses were drawn before, so
disorder fields can be regenerated site by site and Monte Carlo sweeps can be
replayed by absolute time index.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Counter word 1 separates the uses of one key.
DISORDER = 0
SWEEP = 1
BOUNDARY = 2
START = 3


def _philox(seed: int, stream: int, purpose: int, a: int, b: int) -> np.random.Philox:
    key = (seed & _MASK64) | ((stream & _MASK64) << 64)
    # Word 0 is left free for the generator's own increments.
    counter = ((purpose & _MASK64) << 64) | ((a & _MASK64) << 128) | ((b & _MASK64) << 192)
    return np.random.Philox(key=key, counter=counter)


def keyed_generator(seed: int, stream: int, purpose: int, a: int = 0, b: int = 0) -> np.random.Generator:
    """Return a fresh generator positioned at the given counter address."""
    return np.random.Generator(_philox(seed, stream, purpose, a, b))


def site_normal(seed: int, replica: int, site: tuple[int, int]) -> float:
    """Standard Gaussian draw for one lattice site of one disorder replica."""
    return float(keyed_generator(seed, replica, DISORDER, site[0], site[1]).standard_normal())


def sweep_uniforms(seed: int, stream: int, sweep: int, shape: tuple[int, ...]) -> np.ndarray:
    """Uniforms in [0, 1) for one sweep; ``sweep`` is an absolute (possibly negative) time index."""
    return keyed_generator(seed, stream, SWEEP, sweep).random(shape)


def boundary_generator(seed: int, stream: int) -> np.random.Generator:
    """Generator for random boundary conditions used by the FKG checks."""
    return keyed_generator(seed, stream, BOUNDARY)


def start_generator(seed: int, stream: int) -> np.random.Generator:
    """Generator for the random starting configurations of coupled chains."""
    return keyed_generator(seed, stream, START)
