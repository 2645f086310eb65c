"""Brute-force Gibbs averages over all 2^|Λ| configurations.

Configurations are produced in chunks of 2^14 so that memory stays flat up
to the 24-spin cap; each chunk is reduced in log form and merged with the
running log Z.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import logsumexp, softmax

from ..errors import EngineCapacityError

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator

    from ..model import IsingInstance

ENUMERATION_CAP = 24

_CHUNK_BITS = 14


def check_capacity(instance: IsingInstance) -> None:
    if len(instance.region) > ENUMERATION_CAP:
        raise EngineCapacityError(
            f"Enumeration is capped at {ENUMERATION_CAP} spins, region has {len(instance.region)}; "
            "use the transfer matrix for rectangles or Monte Carlo (mc) otherwise"
        )


def configuration_chunks(n: int) -> Iterator[np.ndarray]:
    """All σ ∈ {−1,+1}^n as float arrays of shape (chunk, n); bit i of the code is site i."""
    low_bits = min(n, _CHUNK_BITS)
    codes = np.arange(1 << low_bits)
    low = 1 - 2 * ((codes[:, None] >> np.arange(low_bits)) & 1)
    for hi in range(1 << (n - low_bits)):
        high = 1 - 2 * ((hi >> np.arange(n - low_bits)) & 1)
        yield np.hstack([low, np.broadcast_to(high, (low.shape[0], n - low_bits))]).astype(float)


def gibbs_averages(
    instance: IsingInstance, beta: float, statistic: Callable[[np.ndarray], np.ndarray]
) -> tuple[float, np.ndarray]:
    """Return ``(log Z, ⟨statistic⟩)`` where ``statistic`` maps (chunk, n) spins to (chunk, q) values."""
    check_capacity(instance)
    log_z = -math.inf
    mean: np.ndarray | None = None
    for spins in configuration_chunks(len(instance.region)):
        log_w = -beta * instance.energy(spins)
        chunk_log_z = float(logsumexp(log_w))
        chunk_mean = softmax(log_w) @ statistic(spins)
        merged = float(np.logaddexp(log_z, chunk_log_z))
        if mean is None:
            mean = chunk_mean
        else:
            mean = mean * math.exp(log_z - merged) + chunk_mean * math.exp(chunk_log_z - merged)
        log_z = merged
    assert mean is not None
    return log_z, mean


def observables(instance: IsingInstance, beta: float) -> tuple[float, np.ndarray]:
    """``(log Z, ⟨σ_x⟩ for every site)``."""
    return gibbs_averages(instance, beta, lambda spins: spins)


def ground_states(instance: IsingInstance) -> tuple[float, float, np.ndarray]:
    """``(min H, number of minimisers, ⟨σ_x⟩ under the uniform measure on minimisers)``.

    Minimisers are the configurations whose computed energy equals the minimum
    exactly; no tolerance is applied.
    """
    check_capacity(instance)
    e_min = math.inf
    count = 0.0
    sums = np.zeros(len(instance.region))
    for spins in configuration_chunks(len(instance.region)):
        energy = instance.energy(spins)
        low = float(energy.min())
        if low > e_min:
            continue
        if low < e_min:
            e_min, count, sums = low, 0.0, np.zeros_like(sums)
        hits = energy == e_min
        count += float(hits.sum())
        sums += spins[hits].sum(axis=0)
    return e_min, count, sums / count
