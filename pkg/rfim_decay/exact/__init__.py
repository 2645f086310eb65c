"""Exact quenched observables: enumeration, transfer matrix and ground states."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Literal

import numpy as np

from ..errors import EngineCapacityError, InfiniteBetaError, RFIMError
from ..lattice import site_key
from ..model import IsingInstance
from . import enumeration, transfer
from .cumulants import cumulants

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from ..lattice import LatticeRegion, Site
    from ..model import BoundaryCondition

logger = logging.getLogger("rfim_decay")

EngineName = Literal["auto", "enumeration", "transfer_matrix"]
ENGINES: tuple[str, ...] = ("auto", "enumeration", "transfer_matrix")


@dataclass(frozen=True)
class QuenchedObservables:
    """Result of one exact solve.

    ``free_energy`` is None on the ground-state path. ``magnetization`` holds
    only the requested sites. ``degeneracy`` and ``ground_energy`` are set on
    the ground-state path only.
    """

    free_energy: float | None
    magnetization: dict[Site, float]
    engine_tag: str
    degeneracy: int | None = None
    ground_energy: float | None = None

    def magnetization_at(self, site: Site) -> float:
        try:
            return self.magnetization[site]
        except KeyError:
            raise RFIMError(f"Magnetization at {site} was not requested") from None

    def as_dict(self) -> dict[str, Any]:
        """JSON-ready form; sites become ``"x,y"`` keys."""
        return {
            "engine": self.engine_tag,
            "free_energy": self.free_energy,
            "magnetization": {site_key(s): m for s, m in self.magnetization.items()},
            "degeneracy": self.degeneracy,
            "ground_energy": self.ground_energy,
        }


def select_engine(region: LatticeRegion, engine: str = "auto") -> str:
    """Resolve ``auto`` to a concrete engine, checking capacity either way."""
    if engine not in ENGINES:
        raise RFIMError(f"Unknown engine {engine!r}; valid engines: {', '.join(ENGINES)}")
    if engine == "auto":
        if transfer.supports(region):
            return "transfer_matrix"
        if len(region) <= enumeration.ENUMERATION_CAP:
            return "enumeration"
        raise EngineCapacityError(
            f"Region with {len(region)} sites is beyond the exact engines; use Monte Carlo (mc)"
        )
    return engine


def _site_indices(instance: IsingInstance, sites: Iterable[Site] | None) -> list[int]:
    if sites is None:
        return list(range(len(instance.region)))
    return [int(i) for i in instance.region.indices(sites)]


def ground_state(
    instance: IsingInstance, engine: str = "auto", sites: Iterable[Site] | None = None
) -> QuenchedObservables:
    """Uniform measure on the minimisers of H, with the number of minimisers."""
    concrete = select_engine(instance.region, engine)
    wanted = _site_indices(instance, sites)
    if concrete == "transfer_matrix":
        e_min, count, by_index = transfer.solve_ground_state(instance, wanted)
    else:
        e_min, count, all_mags = enumeration.ground_states(instance)
        by_index = {i: float(all_mags[i]) for i in wanted}
    degeneracy = round(count)
    if degeneracy > 1:
        logger.warning("Ground state is %d-fold degenerate (exact floating-point energy ties)", degeneracy)
    sites_of = instance.region.sites
    return QuenchedObservables(
        free_energy=None,
        magnetization={sites_of[i]: float(m) for i, m in sorted(by_index.items())},
        engine_tag="ground_state",
        degeneracy=degeneracy,
        ground_energy=e_min,
    )


def solve(
    instance: IsingInstance, beta: float, engine: str = "auto", sites: Iterable[Site] | None = None
) -> QuenchedObservables:
    """Free energy and magnetizations of the requested sites (all sites by default).

    β = ∞ goes to :func:`ground_state`.
    """
    if math.isinf(beta):
        return ground_state(instance, engine, sites)
    concrete = select_engine(instance.region, engine)
    wanted = _site_indices(instance, sites)
    logger.debug("Solving %d sites at beta=%g with %s", len(instance.region), beta, concrete)
    if concrete == "transfer_matrix":
        log_z, by_index = transfer.solve(instance, beta, wanted)
    else:
        log_z, all_mags = enumeration.observables(instance, beta)
        by_index = {i: float(all_mags[i]) for i in wanted}
    sites_of = instance.region.sites
    return QuenchedObservables(
        free_energy=log_z,
        magnetization={sites_of[i]: float(np.clip(m, -1.0, 1.0)) for i, m in sorted(by_index.items())},
        engine_tag=concrete,
    )


def free_energy(
    region: LatticeRegion, gamma: BoundaryCondition, field: np.ndarray, beta: float, engine: str = "auto"
) -> float:
    """F = log Σ_σ exp(−βH(σ)) for finite β."""
    if math.isinf(beta):
        raise InfiniteBetaError("The free energy needs a finite beta; use ground_state_magnetizations at beta=inf")
    result = solve(IsingInstance.from_boundary(region, gamma, field), beta, engine, sites=())
    assert result.free_energy is not None
    return result.free_energy


def magnetizations(
    region: LatticeRegion, gamma: BoundaryCondition, field: np.ndarray, beta: float, engine: str = "auto"
) -> dict[Site, float]:
    return solve(IsingInstance.from_boundary(region, gamma, field), beta, engine).magnetization


def ground_state_magnetizations(
    region: LatticeRegion, gamma: BoundaryCondition, field: np.ndarray, engine: str = "auto"
) -> dict[Site, float]:
    return ground_state(IsingInstance.from_boundary(region, gamma, field), engine).magnetization


def spin_cumulants(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    field: np.ndarray,
    beta: float,
    sites: Sequence[Site],
) -> float:
    """Joint cumulant κ(σ_{x₁},…,σ_{x_k}) under the quenched Gibbs measure (enumeration only)."""
    if math.isinf(beta):
        raise InfiniteBetaError("Cumulants need a finite beta")
    instance = IsingInstance.from_boundary(region, gamma, field)
    return float(cumulants(instance, beta, [list(region.indices(sites))])[0])


__all__ = [
    "ENGINES",
    "EngineName",
    "QuenchedObservables",
    "cumulants",
    "free_energy",
    "ground_state",
    "ground_state_magnetizations",
    "magnetizations",
    "select_engine",
    "solve",
    "spin_cumulants",
]
