"""Consequences of the FKG property: the ± sandwich, the boundary sup and domain monotonicity."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from .errors import RegionError
from .exact import solve
from .model import BoundaryCondition, DisorderRealization, IsingInstance, ModelParams, effective_field
from .randomness import boundary_generator
from .reports import CheckReport, check_report, instance_spec

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from .lattice import LatticeRegion

logger = logging.getLogger("rfim_decay")

FKG_TOL = 1e-10


def _mags(region: LatticeRegion, gamma: BoundaryCondition, field: np.ndarray, beta: float) -> np.ndarray:
    result = solve(IsingInstance.from_boundary(region, gamma, field), beta)
    return np.array([result.magnetization[s] for s in region.sites])


def sandwich_violation(
    region: LatticeRegion, field: np.ndarray, beta: float, boundaries: Iterable[BoundaryCondition]
) -> float:
    """Largest amount by which some ⟨σ_x⟩_γ leaves [⟨σ_x⟩₋, ⟨σ_x⟩₊]; ≤ 0 when the sandwich holds."""
    plus = _mags(region, BoundaryCondition.all_plus(region), field, beta)
    minus = _mags(region, BoundaryCondition.all_minus(region), field, beta)
    worst = float(np.max(minus - plus))
    for gamma in boundaries:
        mags = _mags(region, gamma, field, beta)
        worst = max(worst, float(np.max(mags - plus)), float(np.max(minus - mags)))
    return worst


def fkg_sandwich_check(
    region: LatticeRegion,
    params: ModelParams,
    disorders: int = 10,
    boundaries: int = 200,
    seed: int = 0,
    tol: float = FKG_TOL,
) -> CheckReport:
    """⟨σ_x⟩₋ ≤ ⟨σ_x⟩_γ ≤ ⟨σ_x⟩₊ at every site for random γ over several disorders."""
    worst = -np.inf
    for r in range(disorders):
        field = effective_field(DisorderRealization.generate(region, seed, r), params)
        rng = boundary_generator(seed, r)
        gammas = [BoundaryCondition.random(region, rng) for _ in range(boundaries)]
        worst = max(worst, sandwich_violation(region, field, params.beta, gammas))
    return check_report(
        "fkg_sandwich",
        instance_spec(region, params, disorders=disorders, boundaries=boundaries),
        worst,
        tol,
        tol - worst,
        worst <= tol,
    )


def boundary_sup(region: LatticeRegion, field: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Per site: the sup over all boundary pairs of |⟨σ_x⟩_γ − ⟨σ_x⟩_γ′|, and ⟨σ_x⟩₊ − ⟨σ_x⟩₋.

    Every boundary condition is enumerated, so ∂Λ must stay small.
    """
    values = np.stack([_mags(region, gamma, field, beta) for gamma in BoundaryCondition.enumerate_all(region)])
    plus = _mags(region, BoundaryCondition.all_plus(region), field, beta)
    minus = _mags(region, BoundaryCondition.all_minus(region), field, beta)
    return values.max(axis=0) - values.min(axis=0), plus - minus


def boundary_sup_check(
    region: LatticeRegion, params: ModelParams, disorders: int = 3, seed: int = 0, tol: float = FKG_TOL
) -> CheckReport:
    """The pairwise sup over every boundary condition equals the ± gap, at every site."""
    worst = 0.0
    for r in range(disorders):
        field = effective_field(DisorderRealization.generate(region, seed, r), params)
        sup, gap = boundary_sup(region, field, params.beta)
        worst = max(worst, float(np.max(np.abs(sup - gap))))
    return check_report(
        "boundary_sup",
        instance_spec(region, params, disorders=disorders, boundaries=2 ** len(region.boundary)),
        worst,
        tol,
        tol - worst,
        worst <= tol,
    )


def nesting_violation(regions: Sequence[LatticeRegion], disorder: DisorderRealization, params: ModelParams) -> float:
    """Largest breach of ⟨σ_x⟩_{Λ′,+} ≥ ⟨σ_x⟩_{Λ,+} and ⟨σ_x⟩_{Λ′,−} ≤ ⟨σ_x⟩_{Λ,−} over x in the smallest region.

    ``regions`` must be increasing; ``disorder`` lives on the largest one and
    is restricted to each.
    """
    inner = regions[0]
    sites = list(inner.sites)
    previous: tuple[np.ndarray, np.ndarray] | None = None
    worst = -np.inf
    for region in regions:
        if not region.issuperset(inner):
            raise RegionError("Regions must be nested")
        field = effective_field(disorder.restrict(region), params)
        pair = []
        for gamma in (BoundaryCondition.all_plus(region), BoundaryCondition.all_minus(region)):
            result = solve(IsingInstance.from_boundary(region, gamma, field), params.beta, sites=sites)
            pair.append(np.array([result.magnetization[s] for s in sites]))
        if previous is not None:
            worst = max(worst, float(np.max(pair[0] - previous[0])), float(np.max(previous[1] - pair[1])))
        previous = (pair[0], pair[1])
    return float(worst)


def domain_monotonicity_check(
    regions: Sequence[LatticeRegion], params: ModelParams, disorders: int = 20, seed: int = 0, tol: float = FKG_TOL
) -> CheckReport:
    """Plus magnetizations decrease and minus ones increase along a nested chain of regions."""
    largest = regions[-1]
    worst = max(
        nesting_violation(regions, DisorderRealization.generate(largest, seed, r), params) for r in range(disorders)
    )
    logger.debug("Domain monotonicity over %d regions: worst breach %g", len(regions), worst)
    return check_report(
        "domain_monotonicity",
        instance_spec(largest, params, chain=len(regions), disorders=disorders),
        worst,
        tol,
        tol - worst,
        worst <= tol,
    )
