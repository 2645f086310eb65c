"""Schema snapshot tests for the registered MCP tools.

Pins tool names, required parameters and the defaults a client sees, so a
renamed tool or a changed default shows up here before it reaches a client.
"""

from __future__ import annotations

from typing import Any

import pytest

# name -> required (non-defaulted) parameters
_EXPECTED_TOOLS: dict[str, set[str]] = {
    # exact engines
    "quenched_observables": set(),
    "ground_state": set(),
    "spin_cumulant": {"sites"},
    # Monte Carlo
    "estimate_boundary_gap": set(),
    # checks and experiments
    "run_lemma_suite": set(),
    "scale_partition_summary": {"n"},
    "run_decay_sweep": {"n_list", "beta"},
}

# Tools whose rows go through the ``fields`` projection.
_PROJECTING_TOOLS = (
    "quenched_observables",
    "ground_state",
    "estimate_boundary_gap",
    "run_lemma_suite",
    "run_decay_sweep",
)


@pytest.fixture(scope="module")
def registered_tools() -> dict[str, Any]:
    """{name: Tool} for every tool on the server, imported once per module."""
    from rfim_decay.mcp_server import mcp

    return {t.name: t for t in mcp._tool_manager.list_tools()}


def _properties(tool: Any) -> dict[str, Any]:
    return dict(tool.parameters.get("properties", {}))


class TestToolRegistry:
    def test_registry_matches_snapshot(self, registered_tools: dict[str, Any]) -> None:
        assert set(registered_tools) == set(_EXPECTED_TOOLS), (
            f"Extra:   {sorted(set(registered_tools) - set(_EXPECTED_TOOLS))}\n"
            f"Missing: {sorted(set(_EXPECTED_TOOLS) - set(registered_tools))}"
        )

    @pytest.mark.parametrize("name", sorted(_EXPECTED_TOOLS))
    def test_tool_has_description(self, name: str, registered_tools: dict[str, Any]) -> None:
        assert registered_tools[name].description, f"Tool '{name}' has no description"

    @pytest.mark.parametrize(("name", "required_params"), sorted(_EXPECTED_TOOLS.items()))
    def test_tool_required_params(
        self, name: str, required_params: set[str], registered_tools: dict[str, Any]
    ) -> None:
        schema_required = set(registered_tools[name].parameters.get("required", []))
        assert schema_required == required_params


# ── parameters ───────────────────────────────────────────────────────────────


class TestToolParameters:
    @pytest.mark.parametrize("name", _PROJECTING_TOOLS)
    def test_accepts_fields(self, name: str, registered_tools: dict[str, Any]) -> None:
        assert "fields" in _properties(registered_tools[name])

    def test_spin_cumulant_has_no_projection(self, registered_tools: dict[str, Any]) -> None:
        assert "fields" not in _properties(registered_tools["spin_cumulant"])

    def test_ground_state_has_no_beta(self, registered_tools: dict[str, Any]) -> None:
        assert "beta" not in _properties(registered_tools["ground_state"])

    @pytest.mark.parametrize(
        ("name", "param", "default"),
        [
            ("quenched_observables", "region", "square:4"),
            ("quenched_observables", "boundary", "+"),
            ("quenched_observables", "engine", "auto"),
            ("estimate_boundary_gap", "method", "cftp"),
            ("estimate_boundary_gap", "samples", 200),
            ("run_lemma_suite", "selector", "all"),
            ("scale_partition_summary", "with_statistics", False),
            ("run_decay_sweep", "replicas", 20),
        ],
    )
    def test_defaults(self, name: str, param: str, default: object, registered_tools: dict[str, Any]) -> None:
        assert _properties(registered_tools[name])[param].get("default") == default
