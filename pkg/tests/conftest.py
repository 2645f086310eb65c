"""Test configuration and shared fixtures."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
import pytest

from rfim_decay.lattice import LatticeRegion, square
from rfim_decay.model import DisorderRealization, ModelParams, effective_field

FieldFactory = Callable[..., np.ndarray]


@pytest.fixture()
def unit_params() -> ModelParams:
    """Provide beta = 1, v = 1."""
    return ModelParams(1.0, 1.0)


@pytest.fixture()
def single_site() -> LatticeRegion:
    return square(1)


@pytest.fixture()
def square2() -> LatticeRegion:
    return square(2)


@pytest.fixture()
def square3() -> LatticeRegion:
    return square(3)


@pytest.fixture()
def square4() -> LatticeRegion:
    return square(4)


@pytest.fixture()
def l_shape() -> LatticeRegion:
    """Three sites forming an L; not a rectangle, so only enumeration applies."""
    return LatticeRegion(((0, 0), (1, 0), (0, 1)))


@pytest.fixture()
def make_field() -> FieldFactory:
    """Provide ``make_field(region, params, seed=0, replica=0)`` -> effective field of a generated replica."""

    def factory(region: LatticeRegion, params: ModelParams, seed: int = 0, replica: int = 0) -> np.ndarray:
        return effective_field(DisorderRealization.generate(region, seed, replica), params)

    return factory
