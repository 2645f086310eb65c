"""Scale partition of an n×n square and the k-truncated block statistics built on it."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

from ..errors import RegionError, RFIMError
from ..gaussian import DisorderAverager, cumulant_means, multisets, ordered_count, tuple_diameter
from ..model import BlockShift, BoundaryCondition, ModelParams
from ..reports import CheckReport, check_report, instance_spec

if TYPE_CHECKING:
    from collections.abc import Sequence

    from ..lattice import LatticeRegion, Site

logger = logging.getLogger("rfim_decay")

STATISTICS_REPLICAS = 16


def scale_count(n: int) -> int:
    """L, the smallest integer with (log n)^L ≥ √n."""
    log_n = math.log(n)
    target = math.sqrt(n)
    level = 1
    while log_n**level < target:
        level += 1
    return level


@dataclass(frozen=True)
class ScalePartition:
    """ε = 1/log n, m_j = ε^{−j} (m₀ = 0), the chosen scale i and the m×m block grid of Λ₀.

    Λ₀ is the [n/m]m-sided sub-square anchored at ``origin``, the lower-left
    corner of Λ.
    """

    n: int
    i: int
    origin: Site = (0, 0)

    def __post_init__(self) -> None:
        if self.n < 3:
            raise RFIMError(f"The scale partition needs n >= 3, got {self.n}")
        if not 1 <= self.i <= self.L:
            raise RFIMError(f"Scale index must be in [1, {self.L}], got {self.i}")

    @property
    def epsilon(self) -> float:
        return 1.0 / math.log(self.n)

    def scale(self, j: int) -> float:
        return 0.0 if j == 0 else math.log(self.n) ** j

    @cached_property
    def L(self) -> int:
        return scale_count(self.n)

    @property
    def scales(self) -> list[float]:
        return [self.scale(j) for j in range(self.L + 1)]

    @property
    def m(self) -> int:
        """Largest integer strictly below m_i."""
        return math.ceil(self.scale(self.i)) - 1

    @property
    def K(self) -> float:
        return math.log(self.n) ** (1.0 / 12.0)

    @property
    def blocks_per_side(self) -> int:
        return self.n // self.m

    @property
    def lambda0_side(self) -> int:
        return self.blocks_per_side * self.m

    @property
    def block_count(self) -> int:
        return self.blocks_per_side**2

    def blocks(self, h: float = 0.0) -> list[BlockShift]:
        x0, y0 = self.origin
        m = self.m
        return [
            BlockShift.square((x0 + a * m, y0 + b * m), m, h)
            for a in range(self.blocks_per_side)
            for b in range(self.blocks_per_side)
        ]

    def default_h(self, v: float = 1.0) -> float:
        """√(log log n)/(2m) in φ units, returned in field units (× √v)."""
        return math.sqrt(v) * math.sqrt(math.log(math.log(self.n))) / (2 * self.m)

    def invariants(self) -> dict[str, bool]:
        return {
            "m_at_least_one": self.m >= 1,
            "m_strictly_below_scale": self.m < self.scale(self.i) <= self.m + 1,
            "block_count_lower_bound": self.block_count >= self.n**2 / (4 * self.m**2),
            "lambda0_remainder": self.n**2 - self.lambda0_side**2 <= 2 * self.n * self.m,
            "scale_L_reaches_sqrt_n": self.scale(self.L) >= math.sqrt(self.n) > self.scale(self.L - 1),
        }


def scale_partition(
    n: int, i: int | None = None, scale_sums: Sequence[float] | None = None, origin: Site = (0, 0)
) -> ScalePartition:
    """Partition for side n; i is given, or the first index with s_i ≤ 2·Σ_j s_j / L, or 1."""
    if n < 3:
        raise RFIMError(f"The scale partition needs n >= 3, got {n}")
    if i is None and scale_sums is not None:
        level = scale_count(n)
        if len(scale_sums) < level:
            raise RFIMError(f"Need {level} scale sums, got {len(scale_sums)}")
        sums = list(scale_sums)[:level]
        threshold = 2.0 * sum(sums) / level
        i = next(j for j, s in enumerate(sums, start=1) if s <= threshold)
    return ScalePartition(n, 1 if i is None else i, origin)


@dataclass(frozen=True)
class BlockStatistics:
    """Truncated s_j, s₀(B), s₁(B) and the good set 𝓑₀ for one square region.

    ``rho_squares`` maps each multiset of Λ to ρ₊² + ρ₋² and ``k_max`` records
    the truncation order of every sum.
    """

    partition: ScalePartition
    k_max: int
    scale_sums: list[float]
    total: float
    s0: dict[Site, float]
    s1: dict[Site, float]
    good: list[Site]
    rho_squares: dict[tuple[Site, ...], float]

    @property
    def s0_bar(self) -> float:
        return sum(self.s0.values()) / len(self.s0)

    @property
    def s1_bar(self) -> float:
        return sum(self.s1.values()) / len(self.s1)


def _square_side(region: LatticeRegion) -> int:
    if not region.is_square:
        raise RegionError("Block statistics need a square region")
    x0, x1, _, _ = region.bounds
    return x1 - x0 + 1


def rho_square_table(
    region: LatticeRegion, params: ModelParams, k_max: int, averager: DisorderAverager
) -> dict[tuple[Site, ...], float]:
    """ρ₊² + ρ₋² for every multiset of Λ up to order ``k_max``."""
    tuples = multisets(region.sites, k_max)
    scale = params.beta * params.scale
    out = dict.fromkeys(tuples, 0.0)
    for gamma in (BoundaryCondition.all_plus(region), BoundaryCondition.all_minus(region)):
        mean, _ = cumulant_means(region, gamma, params, averager, tuples)
        for t, kappa in zip(tuples, mean, strict=True):
            out[t] += (scale ** len(t) * float(kappa)) ** 2
    return out


def block_statistics(
    region: LatticeRegion,
    params: ModelParams,
    k_max: int = 3,
    averager: DisorderAverager | None = None,
    i: int | None = None,
) -> BlockStatistics:
    """All truncated block sums; the scale is chosen from the s_j unless ``i`` is given.

    The default averager draws ``STATISTICS_REPLICAS`` full disorder replicas.
    """
    n = _square_side(region)
    x0, _, y0, _ = region.bounds
    averager = averager or DisorderAverager(region, "mc", replicas=STATISTICS_REPLICAS)
    squares = rho_square_table(region, params, k_max, averager)
    level = scale_count(n)
    probe = ScalePartition(n, 1, (x0, y0))
    bounds = [probe.scale(j) for j in range(level + 1)]

    weighted = {t: ordered_count(t) * r2 / math.factorial(len(t)) for t, r2 in squares.items()}
    diameters = {t: tuple_diameter(t) for t in squares}
    scale_sums = [
        sum(w for t, w in weighted.items() if bounds[j - 1] <= diameters[t] < bounds[j]) for j in range(1, level + 1)
    ]
    partition = scale_partition(n, i, None if i is not None else scale_sums, (x0, y0))
    lo, hi = partition.scale(partition.i - 1), partition.scale(partition.i)

    m = partition.m
    owner: dict[Site, Site] = {}
    for block in partition.blocks():
        corner = min(block.block)
        for site in block.block:
            owner[site] = corner
    s0 = {min(b.block): 0.0 for b in partition.blocks()}
    s1 = dict(s0)
    for t, w in weighted.items():
        corners = {owner.get(site) for site in t}
        if len(corners) != 1 or None in corners:
            continue
        (corner,) = corners
        assert corner is not None
        if diameters[t] < lo:
            s0[corner] += w
        elif diameters[t] < hi:
            s1[corner] += w
    k2 = partition.K**2
    s0_bar = sum(s0.values()) / len(s0)
    s1_bar = sum(s1.values()) / len(s1)
    good = [c for c in s0 if s1[c] <= k2 * s1_bar and s0[c] <= k2 * s0_bar]
    logger.debug("Block statistics n=%d: i=%d m=%d, %d of %d blocks good", n, partition.i, m, len(good), len(s0))
    return BlockStatistics(partition, k_max, scale_sums, sum(weighted.values()), s0, s1, good, squares)


def partition_reports(
    stats: BlockStatistics, params: ModelParams, region: LatticeRegion, tol: float = 1e-12
) -> list[CheckReport]:
    """Averaged block bounds and partition invariants as checked diagnostics."""
    p = stats.partition
    b2v = params.beta**2 * params.v
    m, n = p.m, p.n
    spec = instance_spec(region, params, i=p.i, m=m, k_max=stats.k_max)
    bad = p.block_count - len(stats.good)
    rows = [
        ("scale_sum_total", stats.total, 2 * b2v * len(region)),
        ("lambda0_remainder", float(n * n - p.lambda0_side**2), float(2 * n * m)),
        ("s0_bar", stats.s0_bar, 8 * b2v * m * m),
        ("s1_bar", stats.s1_bar, 16 * b2v * m * m / p.L),
        ("bad_blocks", float(bad), 2 * p.block_count / p.K**2),
    ]
    reports = [check_report(name, spec, lhs, rhs, rhs - lhs, lhs <= rhs + tol) for name, lhs, rhs in rows]
    reports.append(
        check_report(
            "partition_invariants",
            spec,
            float(sum(p.invariants().values())),
            float(len(p.invariants())),
            0.0,
            all(p.invariants().values()),
            invariants=p.invariants(),
            s1_bar_log_form=16 * b2v * m * m * math.log(math.log(n)) / math.log(n),
            truncation_order=stats.k_max,
        )
    )
    return reports
