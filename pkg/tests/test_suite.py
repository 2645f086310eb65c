"""Tests for the lemma suite selectors."""

from __future__ import annotations

import pytest

from rfim_decay.errors import UnknownSelectorError
from rfim_decay.harness.suite import (
    SELECTORS,
    engine_agreement_check,
    lemma_suite,
    partition_arithmetic_check,
    valid_selectors,
)
from rfim_decay.lattice import square

_REPORT_KEYS = {"check_name", "instance_spec", "lhs", "rhs", "slack", "pass", "details"}

# Groups that take more than a few seconds on a laptop.
_HEAVY = {"variance", "decoupling", "mc", "partition"}


class TestSelectors:
    def test_valid_selectors(self) -> None:
        assert valid_selectors() == [
            "all",
            "engines",
            "fkg",
            "derivatives",
            "variance",
            "poincare",
            "taylor",
            "remainder",
            "decoupling",
            "mc",
            "partition",
        ]

    def test_unknown_selector(self) -> None:
        with pytest.raises(UnknownSelectorError, match="Valid selectors: all, engines, fkg") as info:
            lemma_suite("bogus")
        assert info.value.selector == "bogus"
        assert "partition" in info.value.valid

    @pytest.mark.parametrize(
        "selector",
        [pytest.param(name, marks=pytest.mark.slow) if name in _HEAVY else name for name in SELECTORS],
    )
    def test_selector_passes(self, selector: str) -> None:
        reports = lemma_suite(selector)
        assert reports
        for report in reports:
            assert set(report) == _REPORT_KEYS
        failed = [r for r in reports if not r["pass"]]
        assert not failed, failed


# ── individual checks ────────────────────────────────────────────────────────


class TestChecks:
    def test_partition_arithmetic(self) -> None:
        report = partition_arithmetic_check(500)
        assert report["pass"]
        assert report["instance_spec"] == "n=3..500"
        assert report["details"]["first_failures"] == []

    def test_engine_agreement_at_zero_temperature(self) -> None:
        report = engine_agreement_check(square(3), float("inf"), disorders=2)
        assert report["pass"]
        assert report["lhs"] <= 1e-9
