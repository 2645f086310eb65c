"""Unit tests for configurations, boundary conditions, disorder and the Hamiltonian."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from rfim_decay.errors import RegionError, RFIMError
from rfim_decay.lattice import LatticeRegion, centered_square, square
from rfim_decay.model import (
    BlockShift,
    BoundaryCondition,
    DisorderRealization,
    IsingInstance,
    ModelParams,
    SpinConfiguration,
    effective_field,
    hamiltonian,
)
from rfim_decay.randomness import keyed_generator, site_normal, sweep_uniforms


class TestSpinArrays:
    def test_configuration_from_mapping(self, square2: LatticeRegion) -> None:
        sigma = SpinConfiguration.from_mapping(square2, dict.fromkeys(square2.sites, -1))
        assert sigma[(1, 1)] == -1
        assert (-sigma)[(1, 1)] == 1

    def test_configuration_domain_mismatch(self, square2: LatticeRegion) -> None:
        with pytest.raises(RegionError):
            SpinConfiguration.from_mapping(square2, {(0, 0): 1})

    def test_spins_must_be_plus_or_minus_one(self, square2: LatticeRegion) -> None:
        with pytest.raises(RegionError, match="-1 or \\+1"):
            SpinConfiguration(square2, [1, 0, 1, 1])

    def test_values_are_read_only(self, square2: LatticeRegion) -> None:
        gamma = BoundaryCondition.all_plus(square2)
        with pytest.raises(ValueError):
            gamma.values[0] = -1


class TestBoundaryCondition:
    @pytest.mark.parametrize(("sign", "value"), [("+", 1), ("plus", 1), (1, 1), ("-", -1), ("minus", -1), (-1, -1)])
    def test_from_sign(self, square2: LatticeRegion, sign: str | int, value: int) -> None:
        gamma = BoundaryCondition.from_sign(square2, sign)
        assert np.all(gamma.values == value)

    def test_from_sign_rejects_other(self, square2: LatticeRegion) -> None:
        with pytest.raises(RFIMError):
            BoundaryCondition.from_sign(square2, "0")

    def test_from_mapping_needs_whole_boundary(self, square2: LatticeRegion) -> None:
        with pytest.raises(RegionError):
            BoundaryCondition.from_mapping(square2, {(-1, 0): 1})

    def test_enumerate_all_count(self, single_site: LatticeRegion) -> None:
        gammas = list(BoundaryCondition.enumerate_all(single_site))
        assert len(gammas) == 16
        assert len({tuple(g.values.tolist()) for g in gammas}) == 16

    def test_random_is_reproducible(self, square3: LatticeRegion) -> None:
        a = BoundaryCondition.random(square3, keyed_generator(0, 1, 2))
        b = BoundaryCondition.random(square3, keyed_generator(0, 1, 2))
        assert np.array_equal(a.values, b.values)

    def test_site_sums(self, square2: LatticeRegion, single_site: LatticeRegion) -> None:
        assert BoundaryCondition.all_plus(single_site).site_sums().tolist() == [4.0]
        # every site of a 2x2 square touches two boundary sites
        assert (-BoundaryCondition.all_plus(square2)).site_sums().tolist() == [-2.0] * 4


class TestModelParams:
    def test_scale_is_sqrt_v(self) -> None:
        assert ModelParams(1.0, 4.0).scale == 2.0

    def test_infinite_beta_is_ground_state(self) -> None:
        assert ModelParams(math.inf).is_ground_state
        assert not ModelParams(0.0).is_ground_state

    @pytest.mark.parametrize(("beta", "v"), [(-1.0, 1.0), (math.nan, 1.0), (1.0, 0.0), (1.0, math.inf)])
    def test_invalid_params(self, beta: float, v: float) -> None:
        with pytest.raises(RFIMError):
            ModelParams(beta, v)


# ── disorder and randomness ──────────────────────────────────────────────────


class TestDisorder:
    def test_generate_is_deterministic(self, square3: LatticeRegion) -> None:
        a = DisorderRealization.generate(square3, 7, 2)
        b = DisorderRealization.generate(square3, 7, 2)
        assert np.array_equal(a.g, b.g)
        assert not np.array_equal(a.g, DisorderRealization.generate(square3, 7, 3).g)

    def test_draws_are_addressed_by_site(self) -> None:
        large = DisorderRealization.generate(centered_square(7), 0, 4)
        small = DisorderRealization.generate(centered_square(3), 0, 4)
        assert np.array_equal(large.restrict(centered_square(3)).g, small.g)
        assert small.g[0] == site_normal(0, 4, centered_square(3).sites[0])

    def test_restrict_outside_raises(self, square2: LatticeRegion) -> None:
        with pytest.raises(RegionError):
            DisorderRealization.zeros(square2).restrict(square(3))

    def test_wrong_length_raises(self, square2: LatticeRegion) -> None:
        with pytest.raises(RegionError):
            DisorderRealization(square2, np.zeros(3))

    def test_sweep_uniforms_accept_negative_time(self) -> None:
        u = sweep_uniforms(0, 3, -5, (9,))
        assert u.shape == (9,)
        assert np.array_equal(u, sweep_uniforms(0, 3, -5, (9,)))
        assert not np.array_equal(u, sweep_uniforms(0, 3, -4, (9,)))
        assert np.all((u >= 0) & (u < 1))


class TestBlockShift:
    def test_square_block(self) -> None:
        block = BlockShift.square((1, 1), 2, 0.3)
        assert block.side == 2
        assert block.block == {(1, 1), (1, 2), (2, 1), (2, 2)}

    def test_non_square_block_rejected(self) -> None:
        with pytest.raises(RegionError):
            BlockShift(frozenset({(0, 0), (1, 0)}), 0.1)

    def test_mask_outside_region_raises(self, square2: LatticeRegion) -> None:
        with pytest.raises(RegionError):
            BlockShift.square((1, 1), 2, 0.1).mask(square2)

    def test_effective_field_adds_h_on_block(self, square2: LatticeRegion) -> None:
        disorder = DisorderRealization(square2, [0.5, -0.5, 1.0, 0.0])
        block = BlockShift.square((0, 0), 1, 0.25)
        out = effective_field(disorder, ModelParams(1.0, 4.0), block)
        assert out.tolist() == [1.25, -1.0, 2.0, 0.0]

    def test_with_h(self) -> None:
        block = BlockShift.square((0, 0), 2, 0.3)
        assert block.with_h(0.0).block == block.block
        assert block.with_h(0.0).h == 0.0


# ── Hamiltonian ──────────────────────────────────────────────────────────────


class TestHamiltonian:
    def test_single_site_energy(self, single_site: LatticeRegion) -> None:
        gamma = BoundaryCondition.all_plus(single_site)
        up = SpinConfiguration(single_site, [1])
        assert hamiltonian(up, gamma, np.array([0.5]), single_site) == pytest.approx(-4.5)
        assert hamiltonian(-up, gamma, np.array([0.5]), single_site) == pytest.approx(4.5)

    def test_all_plus_square_energy(self, square2: LatticeRegion) -> None:
        sigma = SpinConfiguration(square2, [1, 1, 1, 1])
        gamma = BoundaryCondition.all_plus(square2)
        # 4 internal edges and 8 boundary bonds
        assert hamiltonian(sigma, gamma, np.zeros(4), square2) == -12.0

    def test_region_mismatch_raises(self, square2: LatticeRegion, square3: LatticeRegion) -> None:
        sigma = SpinConfiguration(square3, [1] * 9)
        with pytest.raises(RegionError):
            hamiltonian(sigma, BoundaryCondition.all_plus(square2), np.zeros(4), square2)

    def test_instance_energy_matches_hamiltonian(self, square2: LatticeRegion) -> None:
        gamma = BoundaryCondition(square2, [1, -1, 1, 1, -1, -1, 1, -1])
        field = np.array([0.3, -1.2, 0.7, 0.1])
        instance = IsingInstance.from_boundary(square2, gamma, field)
        for values in itertools.product((1, -1), repeat=4):
            sigma = SpinConfiguration(square2, values)
            assert instance.energy(np.array(values)) == pytest.approx(hamiltonian(sigma, gamma, field, square2))


class TestIsingInstance:
    def test_free_instance_has_no_boundary_term(self, square2: LatticeRegion) -> None:
        field = np.array([1.0, 2.0, 3.0, 4.0])
        assert IsingInstance.free(square2, field).ext.tolist() == field.tolist()

    def test_negative_coupling_rejected(self, square2: LatticeRegion) -> None:
        with pytest.raises(RFIMError, match="ferromagnetic"):
            IsingInstance(square2, [1.0, -1.0, 1.0, 1.0], np.zeros(4))

    def test_coupling_count_checked(self, square2: LatticeRegion) -> None:
        with pytest.raises(RegionError):
            IsingInstance(square2, [1.0], np.zeros(4))

    def test_neighbour_table(self, square2: LatticeRegion) -> None:
        idx, wts = IsingInstance.free(square2, np.zeros(4)).neighbour_table
        # corner sites of a 2x2 square have two neighbours each
        assert wts.sum(axis=1).tolist() == [2.0] * 4
        assert set(idx[0, :2].tolist()) == {1, 2}

    def test_with_ext_keeps_couplings(self, square2: LatticeRegion) -> None:
        instance = IsingInstance(square2, [0.0, 1.0, 1.0, 0.0], np.zeros(4))
        assert instance.with_ext(np.ones(4)).couplings.tolist() == [0.0, 1.0, 1.0, 0.0]
