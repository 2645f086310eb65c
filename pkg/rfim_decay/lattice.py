"""Finite regions of Z²: sites, nearest-neighbour edges and the outer boundary."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .errors import RegionError

if TYPE_CHECKING:
    from collections.abc import Iterable

Site = tuple[int, int]

_OFFSETS: tuple[Site, ...] = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _neighbours(site: Site) -> list[Site]:
    x, y = site
    return [(x + dx, y + dy) for dx, dy in _OFFSETS]


@dataclass(frozen=True)
class LatticeRegion:
    """An immutable finite subset Λ of Z².

    ``sites`` is stored sorted, which fixes the site indexing used by every
    engine. Edges are unordered nearest-neighbour pairs stored once as index
    pairs ``(i, j)`` with ``i < j``; ``boundary`` is ∂Λ, the sites outside Λ
    adjacent to some site of Λ.
    """

    sites: tuple[Site, ...]

    def __post_init__(self) -> None:
        if not self.sites:
            raise RegionError("A region needs at least one site")
        canonical = tuple(sorted({(int(x), int(y)) for x, y in self.sites}))
        object.__setattr__(self, "sites", canonical)

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site: object) -> bool:
        return site in self.index

    @cached_property
    def index(self) -> dict[Site, int]:
        return {site: i for i, site in enumerate(self.sites)}

    @cached_property
    def edges(self) -> np.ndarray:
        pairs = [
            (i, self.index[nb])
            for i, site in enumerate(self.sites)
            for nb in ((site[0] + 1, site[1]), (site[0], site[1] + 1))
            if nb in self.index
        ]
        return np.array(sorted(pairs), dtype=np.intp).reshape(-1, 2)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(i), int(j)): e for e, (i, j) in enumerate(self.edges)}

    @cached_property
    def boundary(self) -> tuple[Site, ...]:
        outside = {nb for site in self.sites for nb in _neighbours(site) if nb not in self.index}
        return tuple(sorted(outside))

    @cached_property
    def boundary_index(self) -> dict[Site, int]:
        return {site: b for b, site in enumerate(self.boundary)}

    @cached_property
    def boundary_bonds(self) -> np.ndarray:
        """Pairs ``(site index, boundary index)`` for every bond between Λ and ∂Λ."""
        bonds = [
            (i, self.boundary_index[nb])
            for i, site in enumerate(self.sites)
            for nb in _neighbours(site)
            if nb in self.boundary_index
        ]
        return np.array(bonds, dtype=np.intp).reshape(-1, 2)

    @cached_property
    def bounds(self) -> tuple[int, int, int, int]:
        xs = [x for x, _ in self.sites]
        ys = [y for _, y in self.sites]
        return min(xs), max(xs), min(ys), max(ys)

    @property
    def is_rectangle(self) -> bool:
        x0, x1, y0, y1 = self.bounds
        return len(self.sites) == (x1 - x0 + 1) * (y1 - y0 + 1)

    @property
    def is_square(self) -> bool:
        x0, x1, y0, y1 = self.bounds
        return self.is_rectangle and x1 - x0 == y1 - y0

    def depth(self, site: Site) -> int:
        """ℓ∞ distance from ``site`` to ∂Λ."""
        if site not in self.index:
            raise RegionError(f"Site {site} is not in the region")
        x, y = site
        return min(max(abs(x - bx), abs(y - by)) for bx, by in self.boundary)

    def center(self) -> Site:
        """Deepest site; ties go to the lexicographically smallest."""
        best = self.sites[0]
        best_depth = self.depth(best)
        for site in self.sites[1:]:
            d = self.depth(site)
            if d > best_depth:
                best, best_depth = site, d
        return best

    def outgoing_bond_count(self, block: Iterable[Site]) -> int:
        """Number of Z² bonds with exactly one endpoint in ``block``."""
        cells = set(block)
        return sum(1 for site in cells for nb in _neighbours(site) if nb not in cells)

    def issuperset(self, other: LatticeRegion | Iterable[Site]) -> bool:
        sites = other.sites if isinstance(other, LatticeRegion) else other
        return all(site in self.index for site in sites)

    def indices(self, sites: Iterable[Site]) -> np.ndarray:
        """Site indices of ``sites``; every site must belong to the region."""
        try:
            return np.array([self.index[site] for site in sites], dtype=np.intp)
        except KeyError as exc:
            raise RegionError(f"Site {exc.args[0]} is not in the region") from None


def rectangle(nx: int, ny: int, origin: Site = (0, 0)) -> LatticeRegion:
    if nx < 1 or ny < 1:
        raise RegionError(f"Rectangle sides must be >= 1, got {nx}x{ny}")
    x0, y0 = origin
    return LatticeRegion(tuple((x0 + i, y0 + j) for i in range(nx) for j in range(ny)))


def square(n: int, origin: Site = (0, 0)) -> LatticeRegion:
    if n < 1:
        raise RegionError(f"Square side must be >= 1, got {n}")
    return rectangle(n, n, origin)


def centered_square(n: int, center: Site = (0, 0)) -> LatticeRegion:
    """n×n square whose :meth:`LatticeRegion.center` is ``center``.

    Squares of increasing side built around one centre are nested, which is
    what the domain-monotonicity experiments need.
    """
    offset = (n - 1) // 2
    return square(n, (center[0] - offset, center[1] - offset))


def build_region(shape_spec: int | Iterable[Site]) -> LatticeRegion:
    """Build a square of side ``shape_spec`` or a region from an explicit site list."""
    if isinstance(shape_spec, bool):
        raise RegionError("Region shape must be a side length or a site list")
    if isinstance(shape_spec, int):
        return square(shape_spec)
    sites = tuple(shape_spec)
    if not sites:
        raise RegionError("Explicit site list is empty")
    return LatticeRegion(sites)


def read_site_list(path: str | Path) -> list[Site]:
    """Read ``x y`` integer pairs, one per line; blank lines and ``#`` comments are skipped."""
    sites: list[Site] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise RegionError(f"{path}:{lineno}: expected 'x y', got {raw!r}")
        try:
            sites.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise RegionError(f"{path}:{lineno}: non-integer coordinate in {raw!r}") from None
    return sites


def parse_site(text: str) -> Site:
    """Parse ``x,y`` into a site."""
    parts = text.replace("(", "").replace(")", "").split(",")
    if len(parts) != 2:
        raise RegionError(f"Malformed site {text!r}; use x,y")
    try:
        return (int(parts[0]), int(parts[1]))
    except ValueError:
        raise RegionError(f"Malformed site {text!r}; use x,y") from None


def site_key(site: Site) -> str:
    return f"{site[0]},{site[1]}"


def parse_region_spec(spec: str) -> LatticeRegion:
    """Parse ``square:<n>``, ``rect:<nx>x<ny>`` or ``sites:<path>``."""
    kind, _, arg = spec.strip().partition(":")
    try:
        if kind == "square":
            return square(int(arg))
        if kind == "rect":
            nx, _, ny = arg.lower().partition("x")
            return rectangle(int(nx), int(ny))
    except ValueError:
        raise RegionError(f"Malformed region spec {spec!r}") from None
    if kind == "sites":
        return build_region(read_site_list(arg))
    raise RegionError(f"Unknown region spec {spec!r}; use square:<n>, rect:<nx>x<ny> or sites:<path>")
