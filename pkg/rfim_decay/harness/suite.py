"""Named groups of checks run on small default instances.

Each selector maps to a function returning a list of reports; ``all`` runs
every group in registration order.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

from .. import fkg
from ..decoupling import decoupling_reports, slope_report
from ..errors import UnknownSelectorError
from ..exact import solve
from ..gaussian import (
    DisorderAverager,
    block_taylor_check,
    derivative_check,
    free_energy_functional,
    functional_variance_check,
    hermite_route_check,
    poincare_check,
    remainder_split_check,
    shift_uniform_check,
    variance_identity_check,
)
from ..lattice import centered_square, square
from ..model import BlockShift, BoundaryCondition, DisorderRealization, IsingInstance, ModelParams, effective_field
from ..montecarlo import cftp_magnetization_check, cftp_reproducibility_check, coupling_order_check
from ..reports import CheckReport, check_report, instance_spec
from .partition import ScalePartition, block_statistics, partition_reports, scale_count

if TYPE_CHECKING:
    from collections.abc import Callable

    import numpy as np

    from ..lattice import LatticeRegion

logger = logging.getLogger("rfim_decay")

ENGINE_TOL = 1e-9

# 2800 sweeps x 9 sites x 4 streams > 10^5 coupled updates
COUPLING_SWEEPS = 2800


def _engine_gap(region: LatticeRegion, field: np.ndarray, beta: float, gamma: BoundaryCondition) -> float:
    instance = IsingInstance.from_boundary(region, gamma, field)
    enum = solve(instance, beta, "enumeration")
    tm = solve(instance, beta, "transfer_matrix")
    gaps = [abs(enum.magnetization[s] - tm.magnetization[s]) for s in region.sites]
    if enum.free_energy is not None and tm.free_energy is not None:
        gaps.append(abs(enum.free_energy - tm.free_energy))
    else:
        assert enum.ground_energy is not None and tm.ground_energy is not None
        gaps.append(abs(enum.ground_energy - tm.ground_energy))
        gaps.append(float(enum.degeneracy != tm.degeneracy))
    return max(gaps)


def engine_agreement_check(
    region: LatticeRegion, beta: float, disorders: int = 3, seed: int = 0, tol: float = ENGINE_TOL
) -> CheckReport:
    """Enumeration and transfer matrix agree on F (or the ground energy) and every magnetization."""
    params = ModelParams(beta)
    gamma = BoundaryCondition.all_plus(region)
    worst = max(
        _engine_gap(region, effective_field(DisorderRealization.generate(region, seed, r), params), beta, gamma)
        for r in range(disorders)
    )
    return check_report(
        "engine_agreement",
        instance_spec(region, params, gamma, disorders=disorders),
        worst,
        tol,
        tol - worst,
        worst <= tol,
    )


def engine_reports() -> list[CheckReport]:
    reports = [engine_agreement_check(square(4), beta) for beta in (0.5, 1.0, 2.0)]
    reports.append(engine_agreement_check(square(3), math.inf))
    return reports


def fkg_reports() -> list[CheckReport]:
    params = ModelParams(1.0)
    return [
        fkg.fkg_sandwich_check(square(3), params, disorders=2, boundaries=20),
        fkg.boundary_sup_check(square(2), params, disorders=1),
        fkg.domain_monotonicity_check([centered_square(n) for n in (3, 5, 7)], params, disorders=2),
    ]


def derivative_reports() -> list[CheckReport]:
    region = square(2)
    params = ModelParams(1.0)
    gamma = BoundaryCondition.all_plus(region)
    g = DisorderRealization.generate(region, 0).g
    a, b, c, _ = region.sites
    tuples = [(a,), (b,), (a, b), (a, a), (a, b, c), (a, a, b)]
    return [derivative_check(region, gamma, params, g, t) for t in tuples]


def _single_site() -> tuple[LatticeRegion, DisorderAverager]:
    region = square(1)
    return region, DisorderAverager(region, probe_sites=region.sites)


def _two_probe() -> tuple[LatticeRegion, DisorderAverager]:
    region = square(2)
    return region, DisorderAverager(region, probe_sites=region.sites[:2], order=32)


def variance_reports() -> list[CheckReport]:
    params = ModelParams(1.0)
    region, averager = _single_site()
    gamma = BoundaryCondition.all_plus(region)
    pair, pair_averager = _two_probe()
    pair_gamma = BoundaryCondition.all_plus(pair)
    return [
        variance_identity_check(region, gamma, params, averager, max_k=12, tol=1e-6),
        variance_identity_check(pair, pair_gamma, params, pair_averager, max_k=6, tol=1e-4),
        functional_variance_check(
            free_energy_functional(region, gamma, params), averager, max_k=12, name="single_site_free_energy"
        ),
        hermite_route_check(pair, pair_gamma, params, pair_averager, max_k=4),
    ]


def poincare_reports() -> list[CheckReport]:
    params = ModelParams(1.0)
    region, averager = _single_site()
    pair, pair_averager = _two_probe()
    grid = square(3)
    return [
        poincare_check(region, BoundaryCondition.all_plus(region), params, averager),
        poincare_check(pair, BoundaryCondition.all_plus(pair), params, pair_averager),
        poincare_check(grid, BoundaryCondition.all_plus(grid), params, DisorderAverager(grid, "mc", replicas=200)),
    ]


def taylor_reports() -> list[CheckReport]:
    params = ModelParams(1.0)
    region, averager = _single_site()
    gamma = BoundaryCondition.all_plus(region)
    block = BlockShift.square((0, 0), 1, 0.1)
    return [
        block_taylor_check(region, gamma, params, block, averager, max_k=6, tol=1e-6),
        shift_uniform_check(region, gamma, params, averager, block),
    ]


def remainder_reports() -> list[CheckReport]:
    params = ModelParams(1.0)
    region, averager = _two_probe()
    block = BlockShift.square((0, 0), 2, 0.3)
    return [remainder_split_check(region, BoundaryCondition.all_plus(region), params, block, averager, max_k=4)]


def decoupling_suite_reports(disorders: int = 2) -> list[CheckReport]:
    region = square(6)
    params = ModelParams(1.0)
    reports: list[CheckReport] = []
    for r in range(disorders):
        field = effective_field(DisorderRealization.generate(region, 0, r), params)
        for m, origin in ((2, (2, 2)), (3, (1, 1))):
            for h in (0.0, 0.3):
                block = BlockShift.square(origin, m, h)
                reports.extend(decoupling_reports(region, block, field, params))
            plus = BoundaryCondition.all_plus(region)
            reports.append(slope_report(region, BlockShift.square(origin, m, 0.0), plus, field, params))
    return reports


def mc_reports() -> list[CheckReport]:
    region = square(3)
    params = ModelParams(0.8)
    field = effective_field(DisorderRealization.generate(region, 0), params)
    return [
        cftp_magnetization_check(region, field, params, samples=2000),
        coupling_order_check(region, field, params, sweeps=COUPLING_SWEEPS, random_start=True),
        cftp_reproducibility_check(region, field, params),
    ]


def partition_arithmetic_check(n_max: int = 10_000) -> CheckReport:
    """Every ScalePartition invariant for n = 3..n_max at every admissible scale."""
    failures = []
    for n in range(3, n_max + 1):
        for i in range(1, scale_count(n) + 1):
            if not all(ScalePartition(n, i).invariants().values()):
                failures.append((n, i))
    return check_report(
        "partition_arithmetic",
        f"n=3..{n_max}",
        float(len(failures)),
        0.0,
        float(-len(failures)),
        not failures,
        first_failures=failures[:10],
    )


def partition_suite_reports() -> list[CheckReport]:
    region = square(4)
    params = ModelParams(1.0)
    reports = [partition_arithmetic_check()]
    reports.extend(partition_reports(block_statistics(region, params, k_max=3), params, region))
    return reports


SELECTORS: dict[str, Callable[[], list[CheckReport]]] = {
    "engines": engine_reports,
    "fkg": fkg_reports,
    "derivatives": derivative_reports,
    "variance": variance_reports,
    "poincare": poincare_reports,
    "taylor": taylor_reports,
    "remainder": remainder_reports,
    "decoupling": decoupling_suite_reports,
    "mc": mc_reports,
    "partition": partition_suite_reports,
}


def valid_selectors() -> list[str]:
    return ["all", *SELECTORS]


def lemma_suite(selector: str = "all") -> list[CheckReport]:
    """Run one group of checks, or every group for ``all``."""
    if selector == "all":
        names = list(SELECTORS)
    elif selector in SELECTORS:
        names = [selector]
    else:
        raise UnknownSelectorError(selector, valid_selectors())
    reports: list[CheckReport] = []
    for name in names:
        batch = SELECTORS[name]()
        logger.info("%s: %d/%d checks passed", name, sum(r["pass"] for r in batch), len(batch))
        reports.extend(batch)
    return reports
