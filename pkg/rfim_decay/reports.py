"""JSON report rows shared by the checks, the CLI and the MCP tools."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Any

import numpy as np
from typing_extensions import TypedDict

if TYPE_CHECKING:
    from .lattice import LatticeRegion
    from .model import BoundaryCondition, ModelParams

# "pass" is a keyword, hence the functional form.
CheckReport = TypedDict(
    "CheckReport",
    {
        "check_name": str,
        "instance_spec": str,
        "lhs": float,
        "rhs": float,
        "slack": float,
        "pass": bool,
        "details": dict[str, Any],
    },
)


def jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    return value


def check_report(
    check_name: str,
    instance_spec: str,
    lhs: float,
    rhs: float,
    slack: float,
    passed: bool,
    **details: Any,
) -> CheckReport:
    return {
        "check_name": check_name,
        "instance_spec": instance_spec,
        "lhs": float(lhs),
        "rhs": float(rhs),
        "slack": float(slack),
        "pass": bool(passed),
        "details": jsonable(details),
    }


def region_spec(region: LatticeRegion) -> str:
    x0, x1, y0, y1 = region.bounds
    if region.is_rectangle:
        kind = "square" if region.is_square else "rect"
        shape = f"{x1 - x0 + 1}" if region.is_square else f"{x1 - x0 + 1}x{y1 - y0 + 1}"
        return f"{kind}:{shape}@({x0},{y0})"
    return f"sites:{len(region)}"


def boundary_spec(gamma: BoundaryCondition) -> str:
    if np.all(gamma.values == 1):
        return "+"
    if np.all(gamma.values == -1):
        return "-"
    return "mixed"


def instance_spec(
    region: LatticeRegion, params: ModelParams, gamma: BoundaryCondition | None = None, **extra: Any
) -> str:
    parts = [region_spec(region), f"beta={params.beta:g}", f"v={params.v:g}"]
    if gamma is not None:
        parts.append(f"gamma={boundary_spec(gamma)}")
    parts.extend(f"{k}={v}" for k, v in extra.items())
    return " ".join(parts)
