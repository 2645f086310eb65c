"""Combinatory check tool: run a lemma-suite group and return its reports."""

from __future__ import annotations

__all__: list[str] = []

from typing import Any

from ...harness.suite import lemma_suite
from ...mcp_server import mcp
from ...tools import _project, offload


@mcp.tool()
@offload
def run_lemma_suite(
    selector: str = "all",
    failed_only: bool = False,
    fields: list[str] | None = None,
) -> list[dict[str, Any]]:
    """Run a named group of numerical checks on small default instances.

    Each report carries check_name, instance_spec, lhs, rhs, slack, pass and details.

    Args:
        selector: all, engines, fkg, derivatives, variance, poincare, taylor, remainder,
                  decoupling, mc or partition.
        failed_only: Return only the reports that did not pass.
        fields: Fields to include. Available: check_name, instance_spec, lhs, rhs, slack, pass, details.
                Defaults to all. ``check_name`` is always included.
    """
    reports = lemma_suite(selector)
    if failed_only:
        reports = [r for r in reports if not r["pass"]]
    return [_project(dict(r), fields) for r in reports]
