"""Joint spin cumulants from exact Gibbs moments.

A :class:`CumulantPlan` is compiled once for a batch of site tuples. It
lists the distinct spin products whose Gibbs averages are needed (σ² = 1, so
a block of a set partition reduces to the sites it holds an odd number of
times) and the Möbius terms

    κ(σ_{x₁},…,σ_{x_k}) = Σ_π (−1)^{|π|−1} (|π|−1)! Π_{b∈π} E[Π_{i∈b} σ_{x_i}]

as flat index arrays, so evaluating the whole batch is a gather, a product
and a ``bincount``. Tuples over a single distinct site use the closed
recursion for a ±1 variable with mean m: κ₁ = m, κ_{j+1} = (1 − m²)·dκ_j/dm.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import TYPE_CHECKING

import numpy as np
from numpy.polynomial import Polynomial

from ..errors import EngineCapacityError
from .enumeration import gibbs_averages

if TYPE_CHECKING:
    from collections.abc import Sequence

    from ..model import IsingInstance

CUMULANT_ORDER_CAP = 6
SINGLE_SITE_ORDER_CAP = 12


@lru_cache(maxsize=None)
def set_partitions(k: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All set partitions of ``range(k)``."""
    if k == 0:
        return ((),)
    out: list[tuple[tuple[int, ...], ...]] = []
    for partition in set_partitions(k - 1):
        for b in range(len(partition)):
            out.append(partition[:b] + ((*partition[b], k - 1),) + partition[b + 1 :])
        out.append((*partition, (k - 1,)))
    return tuple(out)


@lru_cache(maxsize=None)
def single_site_polynomial(k: int) -> Polynomial:
    """κ_k of a ±1 variable as a polynomial in its mean."""
    poly = Polynomial([0.0, 1.0])
    one_minus_m2 = Polynomial([1.0, 0.0, -1.0])
    for _ in range(k - 1):
        poly = one_minus_m2 * poly.deriv()
    return poly


def canonical(sites: Sequence[int]) -> tuple[int, ...]:
    return tuple(sorted(int(s) for s in sites))


class CumulantPlan:
    """Compiled evaluation of joint cumulants for a batch of site-index tuples."""

    def __init__(self, tuples: Sequence[Sequence[int]]) -> None:
        self.tuples = [canonical(t) for t in tuples]
        subset_ids: dict[frozenset[int], int] = {frozenset(): 0}

        def subset_id(sites: frozenset[int]) -> int:
            return subset_ids.setdefault(sites, len(subset_ids))

        owners: list[int] = []
        coefs: list[float] = []
        blocks: list[list[int]] = []
        single: list[tuple[int, int, int]] = []
        for pos, tup in enumerate(self.tuples):
            k = len(tup)
            if k == 0:
                raise EngineCapacityError("Cumulants need at least one site")
            if len(set(tup)) == 1:
                if k > SINGLE_SITE_ORDER_CAP:
                    raise EngineCapacityError(f"Single-site cumulant order {k} exceeds cap {SINGLE_SITE_ORDER_CAP}")
                single.append((pos, subset_id(frozenset(tup)), k))
                continue
            if k > CUMULANT_ORDER_CAP:
                raise EngineCapacityError(f"Cumulant order {k} exceeds cap {CUMULANT_ORDER_CAP}")
            for partition in set_partitions(k):
                ids = []
                for block in partition:
                    odd = [s for s in set(tup[i] for i in block) if sum(tup[i] == s for i in block) % 2]
                    ids.append(subset_id(frozenset(odd)))
                size = len(partition)
                owners.append(pos)
                coefs.append((-1.0) ** (size - 1) * factorial(size - 1))
                blocks.append(ids)

        self.subsets: list[tuple[int, ...]] = [
            tuple(sorted(s)) for s, _ in sorted(subset_ids.items(), key=lambda kv: kv[1])
        ][1:]
        width = max((len(b) for b in blocks), default=1)
        self._owners = np.array(owners, dtype=np.intp)
        self._coefs = np.array(coefs)
        self._ids = np.zeros((len(blocks), width), dtype=np.intp)
        for row, ids in enumerate(blocks):
            self._ids[row, : len(ids)] = ids
        self._single = single

    def statistic(self, spins: np.ndarray) -> np.ndarray:
        """Products Π_{x∈S} σ_x for every needed subset S; shape (chunk, len(subsets))."""
        out = np.empty((spins.shape[0], len(self.subsets)))
        for col, subset in enumerate(self.subsets):
            out[:, col] = np.prod(spins[:, list(subset)], axis=1)
        return out

    def evaluate(self, moments: np.ndarray) -> np.ndarray:
        """Cumulants of every tuple, given Gibbs averages aligned with :attr:`subsets`."""
        full = np.concatenate(([1.0], np.asarray(moments, dtype=float)))
        terms = self._coefs * full[self._ids].prod(axis=1)
        out = np.bincount(self._owners, weights=terms, minlength=len(self.tuples)).astype(float)
        for pos, sid, k in self._single:
            out[pos] = single_site_polynomial(k)(full[sid])
        return out


def cumulants(instance: IsingInstance, beta: float, tuples: Sequence[Sequence[int]]) -> np.ndarray:
    """Joint cumulants of site-index tuples from one enumeration pass."""
    plan = CumulantPlan(tuples)
    if not plan.subsets:
        return plan.evaluate(np.zeros(0))
    _, moments = gibbs_averages(instance, beta, plan.statistic)
    return plan.evaluate(moments)
