"""Exact tools: quenched observables, ground states, spin cumulants."""

from __future__ import annotations

__all__: list[str] = []

import math
from typing import Any

from ...exact import ground_state as solve_ground_state
from ...exact import solve, spin_cumulants
from ...lattice import LatticeRegion, parse_region_spec, parse_site, site_key
from ...mcp_server import mcp
from ...model import BoundaryCondition, DisorderRealization, IsingInstance, ModelParams, effective_field
from ...reports import jsonable, region_spec
from ...tools import _project, offload


def _instance(
    region: str, beta: float, v: float, seed: int, replica: int, boundary: str
) -> tuple[LatticeRegion, BoundaryCondition, Any, ModelParams]:
    lattice = parse_region_spec(region)
    params = ModelParams(beta, v)
    gamma = BoundaryCondition.from_sign(lattice, boundary)
    field = effective_field(DisorderRealization.generate(lattice, seed, replica), params)
    return lattice, gamma, field, params


@mcp.tool()
@offload
def quenched_observables(
    region: str = "square:4",
    beta: float = 1.0,
    v: float = 1.0,
    seed: int = 0,
    replica: int = 0,
    boundary: str = "+",
    engine: str = "auto",
    sites: list[str] | None = None,
    fields: list[str] | None = None,
) -> dict[str, Any]:
    """Exact free energy and magnetizations for one disorder replica.

    Args:
        region: square:<n>, rect:<nx>x<ny> or sites:<path>.
        beta: Inverse temperature (finite; use ground_state for beta = inf).
        v: Variance of the Gaussian random field.
        seed: Master disorder seed.
        replica: Disorder replica index.
        boundary: "+" or "-".
        engine: auto, enumeration or transfer_matrix.
        sites: Sites as "x,y"; defaults to every site.
        fields: Fields to include. Available: engine, region, free_energy, magnetization.
                Defaults to all. ``engine`` is always included.
    """
    lattice, gamma, field, params = _instance(region, beta, v, seed, replica, boundary)
    wanted = None if sites is None else [parse_site(s) for s in sites]
    result = solve(IsingInstance.from_boundary(lattice, gamma, field), params.beta, engine, wanted)
    full = result.as_dict()
    row = {k: full[k] for k in ("engine", "free_energy", "magnetization")}
    return _project({"region": region_spec(lattice), **row}, fields)


@mcp.tool()
@offload
def ground_state(
    region: str = "square:4",
    v: float = 1.0,
    seed: int = 0,
    replica: int = 0,
    boundary: str = "+",
    engine: str = "auto",
    sites: list[str] | None = None,
    fields: list[str] | None = None,
) -> dict[str, Any]:
    """Ground-state (beta = inf) magnetizations, energy and degeneracy for one disorder replica.

    Magnetizations average uniformly over all minimisers; exact floating-point
    energy ties count as degenerate.

    Args:
        region: square:<n>, rect:<nx>x<ny> or sites:<path>.
        v: Variance of the Gaussian random field.
        seed: Master disorder seed.
        replica: Disorder replica index.
        boundary: "+" or "-".
        engine: auto, enumeration or transfer_matrix.
        sites: Sites as "x,y"; defaults to every site.
        fields: Fields to include. Available: engine, region, ground_energy, degeneracy, magnetization.
                Defaults to all. ``engine`` is always included.
    """
    lattice, gamma, field, _ = _instance(region, math.inf, v, seed, replica, boundary)
    wanted = None if sites is None else [parse_site(s) for s in sites]
    result = solve_ground_state(IsingInstance.from_boundary(lattice, gamma, field), engine, wanted)
    full = result.as_dict()
    row = {k: full[k] for k in ("engine", "ground_energy", "degeneracy", "magnetization")}
    return _project({"region": region_spec(lattice), **row}, fields)


@mcp.tool()
@offload
def spin_cumulant(
    sites: list[str],
    region: str = "square:2",
    beta: float = 1.0,
    v: float = 1.0,
    seed: int = 0,
    replica: int = 0,
    boundary: str = "+",
) -> dict[str, Any]:
    """Joint cumulant of the spins at ``sites`` (repeats allowed) and the matching derivative of F.

    Computed by enumeration, so the region is limited to 24 sites.

    Args:
        sites: Sites as "x,y", one entry per order (e.g. ["0,0", "0,0", "1,0"]).
        region: square:<n>, rect:<nx>x<ny> or sites:<path>.
        beta: Inverse temperature (finite).
        v: Variance of the Gaussian random field.
        seed: Master disorder seed.
        replica: Disorder replica index.
        boundary: "+" or "-".
    """
    lattice, gamma, field, params = _instance(region, beta, v, seed, replica, boundary)
    tuple_sites = [parse_site(s) for s in sites]
    kappa = spin_cumulants(lattice, gamma, field, params.beta, tuple_sites)
    return jsonable(
        {
            "engine": "enumeration",
            "sites": [site_key(s) for s in tuple_sites],
            "order": len(tuple_sites),
            "cumulant": kappa,
            "derivative": (params.beta * params.scale) ** len(tuple_sites) * kappa,
        }
    )
