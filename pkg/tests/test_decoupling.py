"""Unit tests for the free-energy surgery around a block."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest

from rfim_decay.decoupling import (
    alpha_shift,
    block_free_energy,
    decoupled_free_energy,
    decoupling_reports,
    gamma_slope_gap,
    removed_bond_count,
    slope_finite_difference,
    slope_identity,
    slope_report,
    theta_diagnostic,
)
from rfim_decay.errors import InfiniteBetaError, RFIMError
from rfim_decay.gaussian import DisorderAverager
from rfim_decay.harness.suite import decoupling_suite_reports
from rfim_decay.lattice import square
from rfim_decay.model import BlockShift, BoundaryCondition, ModelParams

if TYPE_CHECKING:
    from rfim_decay.lattice import LatticeRegion

    from .conftest import FieldFactory


@pytest.fixture()
def block() -> BlockShift:
    """2x2 block in the middle of a 4x4 square."""
    return BlockShift.square((1, 1), 2, 0.3)


class TestSurgery:
    def test_removed_bonds_are_outgoing_bonds(self, square4: LatticeRegion, block: BlockShift) -> None:
        assert removed_bond_count(square4, block) == 8
        assert removed_bond_count(square4, block) == square4.outgoing_bond_count(block.block)

    def test_corner_block_counts_boundary_bonds(self, square4: LatticeRegion) -> None:
        # 2 bonds into the region, 2 into ∂Λ
        corner = BlockShift.square((0, 0), 1, 0.1)
        assert removed_bond_count(square4, corner) == 4

    def test_additivity(self, square4: LatticeRegion, block: BlockShift, make_field: FieldFactory) -> None:
        field = make_field(square4, ModelParams(1.0))
        for gamma in (BoundaryCondition.all_plus(square4), BoundaryCondition.all_minus(square4)):
            dfe = decoupled_free_energy(square4, block, gamma, field, 1.0)
            assert abs(dfe.additivity_gap) <= 1e-12 * max(1.0, abs(dfe.G_gamma))
            assert dfe.surgery_gap <= 4 * 1.0 * 2
            assert dfe.removed_bonds == 8

    def test_corner_block_touching_boundary(self, square4: LatticeRegion, make_field: FieldFactory) -> None:
        corner = BlockShift.square((0, 0), 2, 0.3)
        params = ModelParams(1.0)
        field = make_field(square4, params, seed=6)
        for gamma in (BoundaryCondition.all_plus(square4), BoundaryCondition.all_minus(square4)):
            dfe = decoupled_free_energy(square4, corner, gamma, field, 1.0)
            assert dfe.removed_bonds == 8
            assert abs(dfe.additivity_gap) <= 1e-12 * max(1.0, abs(dfe.G_gamma))
            assert dfe.surgery_gap <= 4 * 1.0 * 2
        reports = decoupling_reports(square4, corner, field, params)
        assert all(r["pass"] for r in reports), [r for r in reports if not r["pass"]]

    def test_block_alone_single_site(self, square3: LatticeRegion) -> None:
        centre = BlockShift.square((1, 1), 1, 0.5)
        field = np.zeros(9)
        assert block_free_energy(field, square3, centre, 1.0) == pytest.approx(math.log(2 * math.cosh(0.5)))

    def test_empty_block(self, square3: LatticeRegion) -> None:
        empty = BlockShift(frozenset(), 0.5)
        assert block_free_energy(np.zeros(9), square3, empty, 1.0) == 0.0

    def test_infinite_beta_rejected(self, square4: LatticeRegion, block: BlockShift) -> None:
        with pytest.raises(InfiniteBetaError):
            decoupled_free_energy(square4, block, BoundaryCondition.all_plus(square4), np.zeros(16), math.inf)


# ── α(h) and slopes ──────────────────────────────────────────────────────────


class TestAlpha:
    def test_alpha_is_gamma_independent(
        self, square4: LatticeRegion, block: BlockShift, make_field: FieldFactory
    ) -> None:
        field = make_field(square4, ModelParams(0.8), seed=2)
        reference = alpha_shift(square4, block, field, 0.8)
        for gamma in (
            BoundaryCondition.all_plus(square4),
            BoundaryCondition.all_minus(square4),
            BoundaryCondition.random(square4, np.random.default_rng(1)),
        ):
            assert alpha_shift(square4, block, field, 0.8, gamma) == pytest.approx(reference, abs=1e-10)

    def test_alpha_over_every_boundary(self, square2: LatticeRegion, make_field: FieldFactory) -> None:
        corner = BlockShift.square((0, 0), 1, 0.3)
        field = make_field(square2, ModelParams(1.0), seed=7)
        reference = alpha_shift(square2, corner, field, 1.0)
        gammas = list(BoundaryCondition.enumerate_all(square2))
        assert len(gammas) == 256
        spread = max(abs(alpha_shift(square2, corner, field, 1.0, gamma) - reference) for gamma in gammas)
        assert spread <= 1e-10

    def test_alpha_vanishes_at_zero_shift(self, square4: LatticeRegion, block: BlockShift) -> None:
        assert alpha_shift(square4, block.with_h(0.0), np.zeros(16), 1.0) == 0.0

    def test_slope_identity_matches_finite_difference(
        self, square4: LatticeRegion, block: BlockShift, make_field: FieldFactory
    ) -> None:
        params = ModelParams(1.0, 2.0)
        field = make_field(square4, params, seed=4)
        gamma = BoundaryCondition.all_plus(square4)
        exact = slope_identity(square4, block, gamma, field, params)
        fd = slope_finite_difference(square4, block, gamma, field, params)
        assert exact == pytest.approx(fd, abs=1e-6)
        assert slope_report(square4, block, gamma, field, params)["pass"]

    def test_slope_of_empty_block(self, square3: LatticeRegion) -> None:
        empty = BlockShift(frozenset(), 0.5)
        gamma = BoundaryCondition.all_plus(square3)
        assert slope_identity(square3, empty, gamma, np.zeros(9), ModelParams(1.0)) == 0.0

    def test_gamma_slope_gap_bound(self, square4: LatticeRegion, block: BlockShift) -> None:
        gap = gamma_slope_gap(square4, block, np.zeros(16), 1.0)
        assert 0.0 <= gap <= 16 * 1.0 * 2 / block.h

    def test_gamma_slope_gap_needs_positive_h(self, square4: LatticeRegion, block: BlockShift) -> None:
        with pytest.raises(RFIMError, match="h > 0"):
            gamma_slope_gap(square4, block.with_h(0.0), np.zeros(16), 1.0)

    def test_gamma_slope_gap_on_6x6(self, make_field: FieldFactory, unit_params: ModelParams) -> None:
        region = square(6)
        centre = BlockShift.square((2, 2), 2, 0.5)
        gap = gamma_slope_gap(region, centre, make_field(region, unit_params, seed=3), 1.0)
        assert 0.0 <= gap <= 32.0

    def test_gamma_slope_gap_vanishes_in_deep_field(self, unit_params: ModelParams) -> None:
        region = square(6)
        centre = BlockShift.square((2, 2), 2, 0.5)
        assert gamma_slope_gap(region, centre, np.full(36, 10.0), unit_params.beta) <= 1e-6


class TestReports:
    def test_all_reports_pass(self, square4: LatticeRegion, block: BlockShift, make_field: FieldFactory) -> None:
        params = ModelParams(1.0)
        reports = decoupling_reports(square4, block, make_field(square4, params), params)
        names = {r["check_name"] for r in reports}
        assert names == {
            "decoupling_surgery",
            "decoupling_additivity",
            "remainder_h_invariance",
            "alpha_drift",
            "alpha_gamma_independence",
            "gamma_slope_gap",
        }
        assert all(r["pass"] for r in reports), [r for r in reports if not r["pass"]]

    def test_zero_shift_skips_slope_gap(self, square4: LatticeRegion, block: BlockShift) -> None:
        reports = decoupling_reports(square4, block.with_h(0.0), np.zeros(16), ModelParams(1.0))
        assert "gamma_slope_gap" not in {r["check_name"] for r in reports}

    @pytest.mark.slow
    def test_acceptance_on_6x6(self) -> None:
        reports = decoupling_suite_reports(disorders=20)
        failed = [r for r in reports if not r["pass"]]
        assert not failed, failed[:5]
        # 20 disorders x 2 blocks x 2 shifts x 2 boundaries
        assert sum(r["check_name"] == "decoupling_surgery" for r in reports) == 160
        assert sum(r["check_name"] == "slope_identity" for r in reports) == 40


class TestTheta:
    def test_keys_and_sign(self, square3: LatticeRegion) -> None:
        params = ModelParams(1.0)
        centre = BlockShift.square((1, 1), 1, 0.5)
        averager = DisorderAverager(square3, mode="mc", replicas=4, seed=3)
        out = theta_diagnostic(square3, [centre], params, averager)
        assert set(out) == {"theta", "magnetization_sum_plus", "magnetization_sum_minus", "good_blocks"}
        assert out["good_blocks"] == 1
        assert out["magnetization_sum_plus"] >= out["magnetization_sum_minus"]

    def test_no_blocks(self, square3: LatticeRegion) -> None:
        averager = DisorderAverager(square3, mode="mc", replicas=4)
        assert theta_diagnostic(square3, [], ModelParams(1.0), averager)["theta"] == 0.0

    def test_needs_positive_h(self, square3: LatticeRegion) -> None:
        averager = DisorderAverager(square3, mode="mc", replicas=4)
        with pytest.raises(RFIMError):
            theta_diagnostic(square3, [BlockShift.square((1, 1), 1, 0.0)], ModelParams(1.0), averager)
