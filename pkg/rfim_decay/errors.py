"""Exception hierarchy shared by the engines, the checks and the CLI."""

from __future__ import annotations


class RFIMError(ValueError):
    """Base class for every error raised deliberately by rfim_decay."""


class RegionError(RFIMError):
    """Invalid lattice geometry, or inputs whose domain does not match the region."""


class EngineCapacityError(RFIMError):
    """An exact engine was asked for more than it can do at desk scale."""


class InfiniteBetaError(RFIMError):
    """A finite-temperature operation was called with beta = inf."""


class CoalescenceError(RFIMError):
    """Coupling from the past did not coalesce within the sweep budget."""

    def __init__(self, budget: int) -> None:
        super().__init__(f"CFTP did not coalesce within {budget} sweeps; raise sweep_budget or lower beta")
        self.budget = budget


class ConfigError(RFIMError):
    """A config file or mapping holds an unknown key or an invalid value."""


class UnknownSelectorError(RFIMError):
    """A lemma-suite selector that is not registered."""

    def __init__(self, selector: str, valid: list[str]) -> None:
        super().__init__(f"Unknown selector {selector!r}. Valid selectors: {', '.join(valid)}")
        self.selector = selector
        self.valid = valid
