"""Tests for the ``fields`` parameter (field projection) across tools.

Covers:
- ``_project`` helper directly
- ``fields`` on the exact, Monte Carlo and lemma-suite tools
"""

from __future__ import annotations

from rfim_decay.tools import _project

# ── _project helper ──────────────────────────────────────────────────────────


class TestProjectHelper:
    def test_none_returns_full_row(self) -> None:
        row = {"engine": "enumeration", "free_energy": 1.0, "magnetization": {}}
        assert _project(row, None) is row

    def test_filters_to_requested_fields(self) -> None:
        row = {"engine": "enumeration", "free_energy": 1.0, "magnetization": {}}
        assert _project(row, ["free_energy"]) == {"engine": "enumeration", "free_energy": 1.0}

    def test_identity_keys_always_included(self) -> None:
        row = {"check_name": "fkg_sandwich", "lhs": 0.0, "pass": True}
        assert _project(row, []) == {"check_name": "fkg_sandwich"}

    def test_unknown_fields_silently_ignored(self) -> None:
        row = {"engine": "cftp", "estimate": 0.5}
        assert _project(row, ["estimate", "nonexistent"]) == {"engine": "cftp", "estimate": 0.5}

    def test_rows_without_identity_keys(self) -> None:
        assert _project({"n": 4, "gap_mean": 0.1}, ["n"]) == {"n": 4}


# ── tool fields ──────────────────────────────────────────────────────────────


class TestQuenchedObservablesFields:
    async def test_only_requested_fields_returned(self) -> None:
        from rfim_decay.tools.simple.observables import quenched_observables

        result = await quenched_observables(region="square:2", fields=["free_energy"])
        assert set(result) == {"engine", "free_energy"}

    async def test_empty_fields_returns_only_engine(self) -> None:
        from rfim_decay.tools.simple.observables import quenched_observables

        result = await quenched_observables(region="square:2", fields=[])
        assert result == {"engine": "transfer_matrix"}


class TestGroundStateFields:
    async def test_fields_filter(self) -> None:
        from rfim_decay.tools.simple.observables import ground_state

        result = await ground_state(region="square:2", fields=["degeneracy", "bogus"])
        assert set(result) == {"engine", "degeneracy"}


class TestEstimateBoundaryGapFields:
    async def test_fields_filter(self) -> None:
        from rfim_decay.tools.simple.montecarlo import estimate_boundary_gap

        result = await estimate_boundary_gap(region="square:2", beta=0.5, samples=4, fields=["estimate"])
        assert set(result) == {"engine", "estimate"}


class TestLemmaSuiteFields:
    async def test_fields_filter(self) -> None:
        from rfim_decay.tools.combinatory.checks import run_lemma_suite

        result = await run_lemma_suite("derivatives", fields=["pass"])
        assert result
        assert all(set(r) == {"check_name", "pass"} for r in result)
