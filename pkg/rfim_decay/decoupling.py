"""Free-energy surgery around a block B: decoupled free energies, α(h) and the slope bounds.

Removing every bond with exactly one end in B (towards Λ∖B or towards ∂Λ)
leaves two independent models: B alone with zero boundary, and Λ∖B whose
neighbours in B act as a zero boundary. For an m×m block that is exactly 4m
bonds, each changing H by at most 1, so |F_γ(h) − G_γ(h)| ≤ 4βm.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import InfiniteBetaError, RFIMError
from .exact import solve
from .lattice import LatticeRegion
from .model import BlockShift, BoundaryCondition, IsingInstance, ModelParams
from .reports import CheckReport, check_report, instance_spec

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .gaussian import DisorderAverager

logger = logging.getLogger("rfim_decay")


def _log_z(instance: IsingInstance, beta: float, engine: str = "auto") -> float:
    result = solve(instance, beta, engine, sites=())
    assert result.free_energy is not None
    return result.free_energy


def _require_finite(beta: float) -> None:
    if math.isinf(beta):
        raise InfiniteBetaError("Decoupled free energies need a finite beta")


def _block_arrays(region: LatticeRegion, block: BlockShift) -> tuple[np.ndarray, np.ndarray]:
    """Indicator of B over the sites, and indicator of edges with at least one end in B."""
    mask = block.mask(region)
    e = region.edges
    touches = (mask[e[:, 0]] + mask[e[:, 1]]) > 0
    return mask, touches


def coupled_instance(
    region: LatticeRegion, gamma: BoundaryCondition, field: np.ndarray, block: BlockShift
) -> IsingInstance:
    """The original model with the shift h on B."""
    return IsingInstance.from_boundary(region, gamma, np.asarray(field, dtype=float) + block.h * block.mask(region))


def severed_instance(
    region: LatticeRegion, gamma: BoundaryCondition, field: np.ndarray, block: BlockShift
) -> IsingInstance:
    """Λ with every bond leaving B removed: J = 0 across B's edge and no ∂Λ term on B's sites."""
    mask, _ = _block_arrays(region, block)
    e = region.edges
    crossing = mask[e[:, 0]] != mask[e[:, 1]]
    couplings = np.where(crossing, 0.0, 1.0)
    ext = np.asarray(field, dtype=float) + block.h * mask + np.where(mask > 0, 0.0, gamma.site_sums())
    return IsingInstance(region, couplings, ext)


def removed_bond_count(region: LatticeRegion, block: BlockShift) -> int:
    """Bonds severed by the surgery: B–(Λ∖B) edges plus B–∂Λ bonds."""
    mask, _ = _block_arrays(region, block)
    e = region.edges
    internal = int(np.sum(mask[e[:, 0]] != mask[e[:, 1]]))
    to_boundary = int(np.sum(mask[region.boundary_bonds[:, 0]]))
    return internal + to_boundary


@dataclass(frozen=True)
class DecoupledFreeEnergies:
    """G_γ(h) on the severed model, G₀(h) of B alone, R of Λ∖B, and the coupled F_γ(h)."""

    G_gamma: float
    G0: float
    R: float
    F_gamma: float
    removed_bonds: int
    h: float

    @property
    def additivity_gap(self) -> float:
        return self.G_gamma - (self.G0 + self.R)

    @property
    def surgery_gap(self) -> float:
        return abs(self.F_gamma - self.G_gamma)


def block_free_energy(field: np.ndarray, region: LatticeRegion, block: BlockShift, beta: float) -> float:
    """G₀(h): the RFIM on B alone with zero boundary and the shifted field."""
    _require_finite(beta)
    if not block.block:
        return 0.0
    sub = LatticeRegion(tuple(block.block))
    local = np.asarray(field, dtype=float)[region.indices(sub.sites)] + block.h
    return _log_z(IsingInstance.free(sub, local), beta)


def remainder_free_energy(
    region: LatticeRegion, gamma: BoundaryCondition, field: np.ndarray, block: BlockShift, beta: float
) -> float:
    """R: Λ∖B with its ∂Λ bonds kept and zero boundary towards B.

    Computed on Λ with every bond touching B removed and B's field switched
    off, which leaves each spin of B free and contributes exactly |B|·log 2.
    """
    _require_finite(beta)
    mask, touches = _block_arrays(region, block)
    ext = np.where(mask > 0, 0.0, np.asarray(field, dtype=float) + gamma.site_sums())
    instance = IsingInstance(region, np.where(touches, 0.0, 1.0), ext)
    return _log_z(instance, beta) - len(block.block) * math.log(2.0)


def decoupled_free_energy(
    region: LatticeRegion,
    block: BlockShift,
    gamma: BoundaryCondition,
    field: np.ndarray,
    beta: float,
) -> DecoupledFreeEnergies:
    """All decoupled free energies of one (Λ, B, γ, field, β, h), each from its own solve."""
    _require_finite(beta)
    g_gamma = _log_z(severed_instance(region, gamma, field, block), beta)
    f_gamma = _log_z(coupled_instance(region, gamma, field, block), beta)
    result = DecoupledFreeEnergies(
        G_gamma=g_gamma,
        G0=block_free_energy(field, region, block, beta),
        R=remainder_free_energy(region, gamma, field, block, beta),
        F_gamma=f_gamma,
        removed_bonds=removed_bond_count(region, block),
        h=block.h,
    )
    logger.debug("Decoupled m=%d h=%g: |F-G|=%g", block.side, block.h, result.surgery_gap)
    return result


def alpha_shift(
    region: LatticeRegion,
    block: BlockShift,
    field: np.ndarray,
    beta: float,
    gamma: BoundaryCondition | None = None,
) -> float:
    """α(h) = G₀(h) − G₀(0), or G_γ(h) − G_γ(0) when ``gamma`` is given; both are γ-free."""
    _require_finite(beta)
    if gamma is None:
        return block_free_energy(field, region, block, beta) - block_free_energy(field, region, block.with_h(0.0), beta)
    shifted = _log_z(severed_instance(region, gamma, field, block), beta)
    return shifted - _log_z(severed_instance(region, gamma, field, block.with_h(0.0)), beta)


def slope_identity(
    region: LatticeRegion, block: BlockShift, gamma: BoundaryCondition, field: np.ndarray, params: ModelParams
) -> float:
    """F′(0) in φ units: β√v·Σ_{x∈B} ⟨σ_x⟩_γ."""
    _require_finite(params.beta)
    if not block.block:
        return 0.0
    instance = IsingInstance.from_boundary(region, gamma, field)
    mags = solve(instance, params.beta, sites=sorted(block.block)).magnetization
    return params.beta * params.scale * sum(mags.values())


def slope_finite_difference(
    region: LatticeRegion,
    block: BlockShift,
    gamma: BoundaryCondition,
    field: np.ndarray,
    params: ModelParams,
    delta: float = 1e-4,
) -> float:
    """(F(φ + δ·1_B) − F(φ − δ·1_B)) / 2δ; a φ step of δ moves the field by √v·δ."""
    _require_finite(params.beta)
    step = params.scale * delta
    up = _log_z(coupled_instance(region, gamma, field, block.with_h(step)), params.beta)
    down = _log_z(coupled_instance(region, gamma, field, block.with_h(-step)), params.beta)
    return (up - down) / (2 * delta)


def gamma_slope_gap(region: LatticeRegion, block: BlockShift, field: np.ndarray, beta: float) -> float:
    """|(F₊(h) − F₊(0)) − (F₋(h) − F₋(0))| / h."""
    if not block.h > 0:
        raise RFIMError(f"gamma_slope_gap needs h > 0, got {block.h}")
    _require_finite(beta)
    diffs = []
    for gamma in (BoundaryCondition.all_plus(region), BoundaryCondition.all_minus(region)):
        shifted = _log_z(coupled_instance(region, gamma, field, block), beta)
        diffs.append(shifted - _log_z(coupled_instance(region, gamma, field, block.with_h(0.0)), beta))
    return abs(diffs[0] - diffs[1]) / block.h


def theta_diagnostic(
    region: LatticeRegion,
    good_blocks: Sequence[BlockShift],
    params: ModelParams,
    averager: DisorderAverager,
) -> dict[str, float]:
    """θ = |𝓑₀|·E(G₀(h) − G₀(0))/(β√v·h) next to E Σ_{x∈Λ₁} ⟨σ_x⟩± over the good blocks' union Λ₁.

    A diagnostic only; every good block shares one side and one h.
    """
    _require_finite(params.beta)
    if not good_blocks:
        return {"theta": 0.0, "magnetization_sum_plus": 0.0, "magnetization_sum_minus": 0.0, "good_blocks": 0}
    first = good_blocks[0]
    if not first.h > 0:
        raise RFIMError(f"theta_diagnostic needs h > 0, got {first.h}")
    union = sorted(set().union(*(b.block for b in good_blocks)))

    def alpha_of(g: np.ndarray) -> float:
        return alpha_shift(region, first, params.scale * g, params.beta)

    alpha = averager.mean(alpha_of)
    theta = len(good_blocks) * alpha.mean / (params.beta * params.scale * first.h)

    sums = {}
    for name, gamma in (("plus", BoundaryCondition.all_plus(region)), ("minus", BoundaryCondition.all_minus(region))):

        def mag_sum(g: np.ndarray, gamma: BoundaryCondition = gamma) -> float:
            instance = IsingInstance.from_boundary(region, gamma, params.scale * g)
            return sum(solve(instance, params.beta, sites=union).magnetization.values())

        sums[name] = averager.mean(mag_sum).mean
    return {
        "theta": theta,
        "magnetization_sum_plus": sums["plus"],
        "magnetization_sum_minus": sums["minus"],
        "good_blocks": len(good_blocks),
    }


def decoupling_reports(
    region: LatticeRegion, block: BlockShift, field: np.ndarray, params: ModelParams, tol: float = 1e-10
) -> list[CheckReport]:
    """Surgery bound, additivity, α γ-independence, the 8βm bound and R's h-independence for ±."""
    beta = params.beta
    m = block.side
    spec = instance_spec(region, params, m=m, h=block.h)
    reports: list[CheckReport] = []
    alphas: dict[str, float] = {"G0": alpha_shift(region, block, field, beta)}
    for gamma in (BoundaryCondition.all_plus(region), BoundaryCondition.all_minus(region)):
        sign = "+" if gamma.values[0] > 0 else "-"
        dfe = decoupled_free_energy(region, block, gamma, field, beta)
        zero = decoupled_free_energy(region, block.with_h(0.0), gamma, field, beta)
        bound = 4 * beta * m
        reports.append(
            check_report(
                "decoupling_surgery",
                f"{spec} gamma={sign}",
                dfe.surgery_gap,
                bound,
                bound - dfe.surgery_gap,
                dfe.surgery_gap <= bound + 1e-12,
                removed_bonds=dfe.removed_bonds,
            )
        )
        additivity = abs(dfe.additivity_gap)
        # absolute 1e-12 for |G| <= 1, relative above
        add_tol = 1e-12 * max(1.0, abs(dfe.G_gamma))
        reports.append(
            check_report(
                "decoupling_additivity",
                f"{spec} gamma={sign}",
                additivity,
                add_tol,
                add_tol - additivity,
                additivity <= add_tol,
                G_gamma=dfe.G_gamma,
                G0=dfe.G0,
                R=dfe.R,
            )
        )
        r_shift = abs(dfe.R - zero.R)
        reports.append(
            check_report(
                "remainder_h_invariance", f"{spec} gamma={sign}", r_shift, 1e-12, 1e-12 - r_shift, r_shift <= 1e-12
            )
        )
        alpha = dfe.G_gamma - zero.G_gamma
        alphas[sign] = alpha
        drift = abs((dfe.F_gamma - zero.F_gamma) - alpha)
        reports.append(
            check_report(
                "alpha_drift", f"{spec} gamma={sign}", drift, 2 * bound, 2 * bound - drift, drift <= 2 * bound + 1e-12
            )
        )
    spread = max(alphas.values()) - min(alphas.values())
    reports.append(
        check_report("alpha_gamma_independence", spec, spread, tol, tol - spread, spread <= tol, alphas=alphas)
    )
    if block.h > 0:
        gap = gamma_slope_gap(region, block, field, beta)
        bound = 16 * beta * m / block.h
        reports.append(check_report("gamma_slope_gap", spec, gap, bound, bound - gap, gap <= bound + 1e-12))
    return reports


def slope_report(
    region: LatticeRegion,
    block: BlockShift,
    gamma: BoundaryCondition,
    field: np.ndarray,
    params: ModelParams,
    tol: float = 1e-6,
) -> CheckReport:
    exact = slope_identity(region, block, gamma, field, params)
    fd = slope_finite_difference(region, block, gamma, field, params)
    err = abs(exact - fd)
    return check_report(
        "slope_identity", instance_spec(region, params, gamma, m=block.side), exact, fd, tol - err, err <= tol
    )
