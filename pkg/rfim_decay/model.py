"""Configurations, boundary conditions, disorder and the RFIM Hamiltonian."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from .errors import RegionError, RFIMError
from .lattice import LatticeRegion, Site
from .randomness import site_normal

if TYPE_CHECKING:
    from collections.abc import Iterator, Mapping


def _spin_array(values: object, size: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.int8).reshape(-1)
    if arr.shape != (size,):
        raise RegionError(f"{what} has {arr.size} entries, expected {size}")
    if not np.all(np.abs(arr) == 1):
        raise RegionError(f"{what} entries must be -1 or +1")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SpinConfiguration:
    """σ ∈ {−1, +1}^Λ, indexed like ``region.sites``."""

    region: LatticeRegion
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _spin_array(self.values, len(self.region), "Configuration"))

    @classmethod
    def from_mapping(cls, region: LatticeRegion, spins: Mapping[Site, int]) -> SpinConfiguration:
        if set(spins) != set(region.sites):
            raise RegionError("Configuration domain must equal the region's sites")
        return cls(region, [spins[site] for site in region.sites])

    def __neg__(self) -> SpinConfiguration:
        return SpinConfiguration(self.region, -self.values)

    def __getitem__(self, site: Site) -> int:
        return int(self.values[self.region.index[site]])


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    """γ ∈ {−1, +1}^∂Λ, indexed like ``region.boundary``."""

    region: LatticeRegion
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _spin_array(self.values, len(self.region.boundary), "Boundary condition"))

    @classmethod
    def all_plus(cls, region: LatticeRegion) -> BoundaryCondition:
        return cls(region, np.ones(len(region.boundary), dtype=np.int8))

    @classmethod
    def all_minus(cls, region: LatticeRegion) -> BoundaryCondition:
        return cls(region, -np.ones(len(region.boundary), dtype=np.int8))

    @classmethod
    def from_sign(cls, region: LatticeRegion, sign: str | int) -> BoundaryCondition:
        """``"+"``/``"plus"``/``1`` or ``"-"``/``"minus"``/``-1``."""
        if sign in ("+", "plus", 1):
            return cls.all_plus(region)
        if sign in ("-", "minus", -1):
            return cls.all_minus(region)
        raise RFIMError(f"Boundary sign must be '+' or '-', got {sign!r}")

    @classmethod
    def from_mapping(cls, region: LatticeRegion, spins: Mapping[Site, int]) -> BoundaryCondition:
        if set(spins) != set(region.boundary):
            raise RegionError("Boundary condition domain must equal the region's outer boundary")
        return cls(region, [spins[site] for site in region.boundary])

    @classmethod
    def random(cls, region: LatticeRegion, rng: np.random.Generator) -> BoundaryCondition:
        return cls(region, rng.choice(np.array([-1, 1], dtype=np.int8), size=len(region.boundary)))

    @classmethod
    def enumerate_all(cls, region: LatticeRegion) -> Iterator[BoundaryCondition]:
        """All 2^|∂Λ| boundary conditions."""
        for values in itertools.product((1, -1), repeat=len(region.boundary)):
            yield cls(region, values)

    def __neg__(self) -> BoundaryCondition:
        return BoundaryCondition(self.region, -self.values)

    def site_sums(self) -> np.ndarray:
        """Σ_{y∈∂Λ, y∼x} γ_y for every x ∈ Λ."""
        out = np.zeros(len(self.region))
        bonds = self.region.boundary_bonds
        np.add.at(out, bonds[:, 0], self.values[bonds[:, 1]].astype(float))
        return out


@dataclass(frozen=True)
class ModelParams:
    """Inverse temperature β ∈ [0, ∞] and field variance v > 0."""

    beta: float = 1.0
    v: float = 1.0

    def __post_init__(self) -> None:
        if math.isnan(self.beta) or self.beta < 0:
            raise RFIMError(f"beta must be in [0, inf], got {self.beta}")
        if not (self.v > 0 and math.isfinite(self.v)):
            raise RFIMError(f"v must be a positive real, got {self.v}")

    @property
    def scale(self) -> float:
        """√v, the factor turning a standard draw into a field."""
        return math.sqrt(self.v)

    @property
    def is_ground_state(self) -> bool:
        return math.isinf(self.beta)


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    """Standard-Gaussian draws g_x, one per site.

    Draws made by :meth:`generate` are addressed by ``(seed, replica_index, site)``,
    so any sub-region regenerates bit-identical values on the sites it shares.
    Explicit values (``seed`` None) are used by tests and quadrature nodes.
    """

    region: LatticeRegion
    g: np.ndarray
    seed: int | None = None
    replica_index: int = 0

    def __post_init__(self) -> None:
        g = np.array(self.g, dtype=float).reshape(-1)
        if g.shape != (len(self.region),):
            raise RegionError(f"Disorder has {g.size} entries, expected {len(self.region)}")
        g.flags.writeable = False
        object.__setattr__(self, "g", g)

    @classmethod
    def generate(cls, region: LatticeRegion, seed: int, replica_index: int = 0) -> DisorderRealization:
        g = [site_normal(seed, replica_index, site) for site in region.sites]
        return cls(region, g, seed, replica_index)

    @classmethod
    def zeros(cls, region: LatticeRegion) -> DisorderRealization:
        return cls(region, np.zeros(len(region)))

    def restrict(self, subregion: LatticeRegion) -> DisorderRealization:
        """The same draws seen from a sub-region."""
        g = self.g[self.region.indices(subregion.sites)]
        return DisorderRealization(subregion, g, self.seed, self.replica_index)


@dataclass(frozen=True)
class BlockShift:
    """Adds ``h`` to the field on the axis-aligned square ``block`` (possibly empty)."""

    block: frozenset[Site] = field(default_factory=frozenset)
    h: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "block", frozenset(self.block))
        if self.block and not LatticeRegion(tuple(self.block)).is_square:
            raise RegionError("A block shift needs an axis-aligned square block")

    @classmethod
    def square(cls, origin: Site, m: int, h: float) -> BlockShift:
        if m < 0:
            raise RegionError(f"Block side must be >= 0, got {m}")
        x0, y0 = origin
        return cls(frozenset((x0 + i, y0 + j) for i in range(m) for j in range(m)), h)

    @property
    def side(self) -> int:
        return math.isqrt(len(self.block))

    def mask(self, region: LatticeRegion) -> np.ndarray:
        """Indicator of B over ``region.sites``; B must lie inside the region."""
        if not region.issuperset(self.block):
            raise RegionError("Block is not contained in the region")
        out = np.zeros(len(region))
        out[region.indices(sorted(self.block))] = 1.0
        return out

    def with_h(self, h: float) -> BlockShift:
        return BlockShift(self.block, h)


def effective_field(d: DisorderRealization, p: ModelParams, s: BlockShift | None = None) -> np.ndarray:
    """Per-site field √v·g_x + h·1{x∈B}."""
    out = p.scale * d.g
    if s is not None and s.block:
        out = out + s.h * s.mask(d.region)
    return out


def _check_field(region: LatticeRegion, field_values: np.ndarray) -> np.ndarray:
    arr = np.asarray(field_values, dtype=float).reshape(-1)
    if arr.shape != (len(region),):
        raise RegionError(f"Field has {arr.size} entries, expected {len(region)}")
    return arr


def hamiltonian(
    sigma: SpinConfiguration, gamma: BoundaryCondition, field_values: np.ndarray, region: LatticeRegion
) -> float:
    """H = −Σ_{edges} σ_xσ_y − Σ_{x∈Λ, y∈∂Λ, x∼y} σ_xγ_y − Σ_x field_x σ_x.

    Each internal edge is counted once with weight 1.
    """
    if sigma.region != region or gamma.region != region:
        raise RegionError("Configuration and boundary condition must live on the given region")
    f = _check_field(region, field_values)
    s = sigma.values.astype(float)
    e = region.edges
    bonds = region.boundary_bonds
    internal = float(np.sum(s[e[:, 0]] * s[e[:, 1]]))
    boundary = float(np.sum(s[bonds[:, 0]] * gamma.values[bonds[:, 1]]))
    return -internal - boundary - float(np.dot(f, s))


@dataclass(frozen=True, eq=False)
class IsingInstance:
    """Engine-facing Hamiltonian H(σ) = −Σ_e J_e σ_iσ_j − Σ_x ext_x σ_x.

    ``couplings`` is aligned with ``region.edges`` and must be ferromagnetic
    (J ≥ 0). The boundary enters through ``ext`` because it is linear in σ:
    ext_x = field_x + Σ_{y∈∂Λ, y∼x} γ_y. Severing a bond sets its J to 0 or
    drops its boundary contribution from ``ext``.
    """

    region: LatticeRegion
    couplings: np.ndarray
    ext: np.ndarray

    def __post_init__(self) -> None:
        couplings = np.array(self.couplings, dtype=float).reshape(-1)
        if couplings.shape != (len(self.region.edges),):
            raise RegionError(f"Expected {len(self.region.edges)} couplings, got {couplings.size}")
        if np.any(couplings < 0):
            raise RFIMError("Couplings must be ferromagnetic (J >= 0)")
        ext = _check_field(self.region, self.ext).copy()
        couplings.flags.writeable = False
        ext.flags.writeable = False
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "ext", ext)

    @classmethod
    def from_boundary(
        cls, region: LatticeRegion, gamma: BoundaryCondition, field_values: np.ndarray
    ) -> IsingInstance:
        if gamma.region != region:
            raise RegionError("Boundary condition must live on the given region")
        ext = _check_field(region, field_values) + gamma.site_sums()
        return cls(region, np.ones(len(region.edges)), ext)

    @classmethod
    def free(cls, region: LatticeRegion, field_values: np.ndarray) -> IsingInstance:
        """Zero boundary condition: no boundary contribution at all."""
        return cls(region, np.ones(len(region.edges)), _check_field(region, field_values))

    def with_ext(self, ext: np.ndarray) -> IsingInstance:
        return IsingInstance(self.region, self.couplings, ext)

    def energy(self, spins: np.ndarray) -> np.ndarray:
        """Energies of a stack of configurations with shape (..., |Λ|)."""
        s = np.asarray(spins, dtype=float)
        e = self.region.edges
        internal = (s[..., e[:, 0]] * s[..., e[:, 1]]) @ self.couplings
        return -internal - s @ self.ext

    @cached_property
    def neighbour_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Padded ``(indices, weights)`` of shape (|Λ|, 4); padding has weight 0."""
        n = len(self.region)
        idx = np.zeros((n, 4), dtype=np.intp)
        wts = np.zeros((n, 4))
        fill = np.zeros(n, dtype=np.intp)
        for (i, j), weight in zip(self.region.edges, self.couplings, strict=True):
            for a, b in ((i, j), (j, i)):
                idx[a, fill[a]] = b
                wts[a, fill[a]] = weight
                fill[a] += 1
        return idx, wts
