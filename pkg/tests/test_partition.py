"""Unit tests for the scale partition and the truncated block statistics."""

from __future__ import annotations

import itertools
import math
from typing import TYPE_CHECKING

import pytest

from rfim_decay.errors import RegionError, RFIMError
from rfim_decay.gaussian import tuple_diameter
from rfim_decay.harness.partition import (
    ScalePartition,
    block_statistics,
    partition_reports,
    scale_count,
    scale_partition,
)
from rfim_decay.harness.suite import partition_arithmetic_check
from rfim_decay.lattice import rectangle, square
from rfim_decay.model import ModelParams

if TYPE_CHECKING:
    from rfim_decay.lattice import LatticeRegion


class TestScalePartition:
    def test_n16(self) -> None:
        p = ScalePartition(16, 1)
        assert p.epsilon == pytest.approx(0.36067, abs=1e-5)
        assert p.L == 2
        assert p.scales[0] == 0.0
        assert p.scales[1] == pytest.approx(2.7726, abs=1e-4)
        assert p.scales[2] == pytest.approx(7.6872, abs=1e-3)
        assert p.m == 2
        assert p.blocks_per_side == 8
        assert p.block_count == 64

    def test_second_scale(self) -> None:
        p = ScalePartition(16, 2)
        assert p.m == 7
        assert p.lambda0_side == 14

    def test_n3_needs_many_scales(self) -> None:
        assert scale_count(3) == 6
        assert ScalePartition(3, 1).m == 1

    @pytest.mark.parametrize("n", [3, 4, 5, 7, 10, 16, 25, 50, 100, 257, 1000])
    def test_invariants(self, n: int) -> None:
        for i in range(1, scale_count(n) + 1):
            p = ScalePartition(n, i)
            assert p.m <= n
            assert all(p.invariants().values()), (n, i, p.invariants())

    @pytest.mark.slow
    def test_invariants_at_scale(self) -> None:
        for n in (10**3, 10**4, 10**5, 10**6):
            for i in range(1, scale_count(n) + 1):
                p = ScalePartition(n, i)
                assert all(p.invariants().values()), (n, i)

    @pytest.mark.slow
    def test_arithmetic_for_every_n_up_to_a_million(self) -> None:
        report = partition_arithmetic_check(10**6)
        assert report["pass"], report["details"]["first_failures"]
        assert report["instance_spec"] == "n=3..1000000"

    def test_blocks_tile_lambda0(self) -> None:
        p = ScalePartition(16, 1, origin=(2, 3))
        sites = [s for b in p.blocks(0.1) for s in b.block]
        assert len(sites) == len(set(sites)) == p.lambda0_side**2
        assert min(sites) == (2, 3)
        assert all(b.h == 0.1 for b in p.blocks(0.1))

    def test_default_h(self) -> None:
        p = ScalePartition(16, 1)
        expected = math.sqrt(math.log(math.log(16))) / (2 * p.m)
        assert p.default_h() == pytest.approx(expected)
        assert p.default_h(4.0) == pytest.approx(2 * expected)

    def test_small_n_rejected(self) -> None:
        with pytest.raises(RFIMError, match="n >= 3"):
            ScalePartition(2, 1)
        with pytest.raises(RFIMError, match="n >= 3"):
            scale_partition(2)

    def test_scale_index_range(self) -> None:
        with pytest.raises(RFIMError, match="Scale index"):
            ScalePartition(16, 3)
        with pytest.raises(RFIMError, match="Scale index"):
            ScalePartition(16, 0)


class TestScaleSelection:
    def test_defaults_to_first_scale(self) -> None:
        assert scale_partition(16).i == 1

    def test_picks_first_small_sum(self) -> None:
        # n = 4 has three scales; threshold is 2 * 10 / 3
        assert scale_partition(4, scale_sums=[10.0, 0.0, 0.0]).i == 2
        assert scale_partition(4, scale_sums=[1.0, 5.0, 5.0]).i == 1
        # with two scales the first sum never exceeds twice the mean
        assert scale_partition(16, scale_sums=[15.0, 0.0]).i == 1

    def test_needs_one_sum_per_scale(self) -> None:
        with pytest.raises(RFIMError, match="scale sums"):
            scale_partition(16, scale_sums=[1.0])


# ── block statistics ─────────────────────────────────────────────────────────


class TestBlockStatistics:
    def test_scale_sums_match_ordered_tuple_oracle(self, square3: LatticeRegion) -> None:
        params = ModelParams(0.7)
        stats = block_statistics(square3, params, k_max=3)
        bounds = ScalePartition(3, 1).scales
        oracle = [0.0] * (len(bounds) - 1)
        for k in range(1, 4):
            for t in itertools.product(square3.sites, repeat=k):
                d = tuple_diameter(t)
                for j in range(1, len(bounds)):
                    if bounds[j - 1] <= d < bounds[j]:
                        oracle[j - 1] += stats.rho_squares[tuple(sorted(t))] / math.factorial(k)
        assert stats.scale_sums == pytest.approx(oracle, rel=1e-12, abs=1e-15)

    def test_total_covers_every_multiset(self, square3: LatticeRegion) -> None:
        stats = block_statistics(square3, ModelParams(0.7), k_max=2)
        assert len(stats.rho_squares) == 9 + 45
        assert stats.total >= sum(stats.scale_sums)

    def test_fixed_scale_and_blocks(self, square3: LatticeRegion) -> None:
        stats = block_statistics(square3, ModelParams(0.5), k_max=2, i=1)
        assert stats.partition.i == 1
        assert stats.partition.m == 1
        assert len(stats.s0) == len(stats.s1) == 9
        # m_0 = 0, so nothing is below the inner scale
        assert all(v == 0.0 for v in stats.s0.values())
        assert sum(stats.s1.values()) > 0.0
        assert set(stats.good) <= set(stats.s0)

    def test_non_square_rejected(self) -> None:
        with pytest.raises(RegionError):
            block_statistics(rectangle(3, 4), ModelParams(1.0), k_max=1)

    def test_reports(self) -> None:
        region = square(3)
        params = ModelParams(0.5)
        stats = block_statistics(region, params, k_max=2)
        reports = partition_reports(stats, params, region)
        names = [r["check_name"] for r in reports]
        assert names == [
            "scale_sum_total",
            "lambda0_remainder",
            "s0_bar",
            "s1_bar",
            "bad_blocks",
            "partition_invariants",
        ]
        by_name = {r["check_name"]: r for r in reports}
        assert by_name["partition_invariants"]["pass"]
        assert by_name["partition_invariants"]["details"]["truncation_order"] == 2
