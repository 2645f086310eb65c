"""Heat-bath dynamics, coupling from the past and the ± boundary gap.

Sweeps visit sites in raster order (the region's sorted site order) and use
one uniform per (site, sweep). Uniforms are keyed by the absolute sweep index
through :mod:`rfim_decay.randomness`, so a CFTP window [−2T, 0) replays the
exact randomness of [−T, 0) in its second half. Many independent streams are
advanced together as the rows of one (streams, |Λ|) array.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

import numpy as np
from scipy.special import expit

from .errors import CoalescenceError, InfiniteBetaError, RFIMError
from .exact import solve
from .model import BoundaryCondition, IsingInstance, ModelParams, SpinConfiguration
from .randomness import start_generator, sweep_uniforms
from .reports import CheckReport, check_report, instance_spec

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .lattice import LatticeRegion, Site
    from .model import DisorderRealization

logger = logging.getLogger("rfim_decay")

DEFAULT_SWEEP_BUDGET = 1 << 20
DEFAULT_BURN_IN = 1000


def _require_finite(beta: float) -> None:
    if math.isinf(beta):
        raise InfiniteBetaError("Heat-bath dynamics needs a finite beta; use the ground-state engine at beta=inf")


def heatbath_threshold(local_field: np.ndarray | float, beta: float) -> np.ndarray:
    """P(σ_x = +1 | rest) = 1/(1 + exp(−2βℓ_x))."""
    _require_finite(beta)
    return np.asarray(expit(2.0 * beta * np.asarray(local_field, dtype=float)))


def local_fields(spins: np.ndarray, site: int, instance: IsingInstance) -> np.ndarray:
    """ℓ_x = Σ_{y∼x} J_xy σ_y + ext_x for every row of ``spins``."""
    idx, wts = instance.neighbour_table
    return spins[..., idx[site]] @ wts[site] + instance.ext[site]


def heatbath_update(
    spins: np.ndarray, site: int, u: np.ndarray | float, instance: IsingInstance, beta: float
) -> np.ndarray:
    """Return a copy of ``spins`` (shape (|Λ|,) or (streams, |Λ|)) with site ``site`` resampled."""
    out = np.array(spins, dtype=float)
    threshold = heatbath_threshold(local_fields(out, site, instance), beta)
    out[..., site] = np.where(np.asarray(u) < threshold, 1.0, -1.0)
    return out


def sweep(spins: np.ndarray, uniforms: np.ndarray, instance: IsingInstance, beta: float) -> None:
    """One raster sweep in place; ``spins`` and ``uniforms`` are (streams, |Λ|)."""
    idx, wts = instance.neighbour_table
    ext = instance.ext
    two_beta = 2.0 * beta
    for i in range(spins.shape[1]):
        local = spins[:, idx[i]] @ wts[i] + ext[i]
        spins[:, i] = np.where(uniforms[:, i] < expit(two_beta * local), 1.0, -1.0)


def _window_uniforms(seed: int, streams: np.ndarray, t: int, n: int) -> np.ndarray:
    return np.stack([sweep_uniforms(seed, int(s), t, (n,)) for s in streams])


def cftp_batch(
    instance: IsingInstance,
    beta: float,
    seed: int,
    streams: Sequence[int],
    budget: int = DEFAULT_SWEEP_BUDGET,
) -> tuple[np.ndarray, np.ndarray]:
    """Monotone CFTP for every stream at once.

    Returns ``(samples, done)``: the (streams, |Λ|) outputs and a mask of the
    streams that coalesced within ``budget`` sweeps (other rows are zero).
    Each row equals what a lone run of that stream would return.
    """
    _require_finite(beta)
    stream_ids = np.asarray(streams, dtype=np.int64)
    n = len(instance.region)
    samples = np.zeros((len(stream_ids), n))
    done = np.zeros(len(stream_ids), dtype=bool)
    active = np.arange(len(stream_ids))
    t_start = 1
    while active.size and t_start <= budget:
        upper = np.ones((active.size, n))
        lower = -np.ones((active.size, n))
        for t in range(-t_start, 0):
            u = _window_uniforms(seed, stream_ids[active], t, n)
            sweep(upper, u, instance, beta)
            sweep(lower, u, instance, beta)
        met = np.all(upper == lower, axis=1)
        samples[active[met]] = upper[met]
        done[active[met]] = True
        active = active[~met]
        logger.debug("CFTP window %d: %d streams still open", t_start, active.size)
        t_start *= 2
    return samples, done


def cftp_sample(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    field_values: np.ndarray,
    beta: float,
    seed: int,
    stream: int = 0,
    budget: int = DEFAULT_SWEEP_BUDGET,
) -> SpinConfiguration:
    """One exact Gibbs sample; fails rather than return a biased one."""
    instance = IsingInstance.from_boundary(region, gamma, field_values)
    samples, done = cftp_batch(instance, beta, seed, [stream], budget)
    if not done[0]:
        raise CoalescenceError(budget)
    return SpinConfiguration(region, samples[0])


@dataclass
class CoupledChainPair:
    """Upper and lower heat-bath chains driven by the same uniforms.

    The chains start from all-plus and all-minus, or with ``random_start``
    from a random ordered pair lower ≤ upper drawn from each stream's start
    generator. ``upper_instance`` may differ from ``lower_instance`` as long
    as it dominates it (same couplings, ext at least as large); the order
    upper ≥ lower then survives every update. Rows are independent streams.
    """

    upper_instance: IsingInstance
    lower_instance: IsingInstance
    seed: int
    streams: np.ndarray
    sweep_index: int = 0
    random_start: bool = False
    upper: np.ndarray = field(init=False)
    lower: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        n = len(self.upper_instance.region)
        self.streams = np.asarray(self.streams, dtype=np.int64)
        self.upper = np.ones((len(self.streams), n))
        self.lower = -np.ones((len(self.streams), n))
        if self.random_start:
            for row, stream in enumerate(self.streams):
                rng = start_generator(self.seed, int(stream))
                lower = rng.choice([-1.0, 1.0], size=n)
                self.lower[row] = lower
                self.upper[row] = np.where(lower > 0, 1.0, rng.choice([-1.0, 1.0], size=n))

    def advance(self, beta: float, sweeps: int = 1) -> None:
        n = self.upper.shape[1]
        for _ in range(sweeps):
            u = _window_uniforms(self.seed, self.streams, self.sweep_index, n)
            sweep(self.upper, u, self.upper_instance, beta)
            sweep(self.lower, u, self.lower_instance, beta)
            self.sweep_index += 1

    def advance_checked(self, beta: float) -> int:
        """One sweep as single-site updates; returns how many updates left upper ≱ lower."""
        n = self.upper.shape[1]
        u = _window_uniforms(self.seed, self.streams, self.sweep_index, n)
        breaks = 0
        for site in range(n):
            self.upper = heatbath_update(self.upper, site, u[:, site], self.upper_instance, beta)
            self.lower = heatbath_update(self.lower, site, u[:, site], self.lower_instance, beta)
            breaks += not self.ordered
        self.sweep_index += 1
        return breaks

    @property
    def ordered(self) -> bool:
        return bool(np.all(self.upper >= self.lower))


@dataclass(frozen=True)
class GapEstimate:
    """⟨σ_x⟩₊ − ⟨σ_x⟩₋ at one site for one disorder."""

    estimate: float
    stderr: float
    replicas: int
    method: Literal["cftp", "forward-coupling"]
    partial: bool = False


def _summarise(gaps: np.ndarray, method: Literal["cftp", "forward-coupling"], partial: bool) -> GapEstimate:
    se = float(gaps.std(ddof=1) / math.sqrt(len(gaps))) if len(gaps) > 1 else 0.0
    return GapEstimate(float(gaps.mean()), se, len(gaps), method, partial)


def estimate_gap(
    region: LatticeRegion,
    site: Site,
    disorder: DisorderRealization,
    params: ModelParams,
    replicas: int,
    seed: int = 0,
    budget: int = DEFAULT_SWEEP_BUDGET,
    method: Literal["cftp", "forward-coupling"] = "cftp",
    burn_in: int = DEFAULT_BURN_IN,
    stream_offset: int = 0,
) -> GapEstimate:
    """Gap at ``site`` from ``replicas`` coupled ± samples.

    Plus and minus samplers share every uniform, so each sample's gap lies in
    {0, 2}. If CFTP runs out of budget the estimate falls back to forward
    coupling and is flagged ``partial``.
    """
    _require_finite(params.beta)
    if replicas < 1:
        raise RFIMError("estimate_gap needs at least one replica")
    field_values = params.scale * disorder.g
    plus = IsingInstance.from_boundary(region, BoundaryCondition.all_plus(region), field_values)
    minus = IsingInstance.from_boundary(region, BoundaryCondition.all_minus(region), field_values)
    x = region.index[site]
    streams = np.arange(stream_offset, stream_offset + replicas)

    if method == "cftp":
        up, up_done = cftp_batch(plus, params.beta, seed, streams, budget)
        down, down_done = cftp_batch(minus, params.beta, seed, streams, budget)
        if np.all(up_done & down_done):
            return _summarise(up[:, x] - down[:, x], "cftp", partial=False)
        logger.warning(
            "CFTP did not coalesce within %d sweeps for %d of %d replicas; falling back to forward coupling",
            budget,
            int(np.sum(~(up_done & down_done))),
            replicas,
        )
    elif method != "forward-coupling":
        raise RFIMError(f"Unknown gap method {method!r}; use 'cftp' or 'forward-coupling'")

    pair = CoupledChainPair(plus, minus, seed, streams)
    pair.advance(params.beta, burn_in)
    total = np.zeros(replicas)
    for _ in range(burn_in):
        pair.advance(params.beta)
        total += pair.upper[:, x] - pair.lower[:, x]
    return _summarise(total / burn_in, "forward-coupling", partial=True)


# -- checks --------------------------------------------------------------------


def cftp_magnetization_check(
    region: LatticeRegion,
    field_values: np.ndarray,
    params: ModelParams,
    samples: int = 2000,
    seed: int = 0,
    z_max: float = 4.0,
    budget: int = DEFAULT_SWEEP_BUDGET,
) -> CheckReport:
    """Plus-boundary CFTP magnetizations against the exact ones, in standard errors."""
    instance = IsingInstance.from_boundary(region, BoundaryCondition.all_plus(region), field_values)
    draws, done = cftp_batch(instance, params.beta, seed, range(samples), budget)
    if not np.all(done):
        raise CoalescenceError(budget)
    exact = solve(instance, params.beta).magnetization
    target = np.array([exact[s] for s in region.sites])
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / math.sqrt(samples)
    diff = np.abs(mean - target)
    z = np.divide(diff, se, out=np.where(diff > 1e-12, np.inf, 0.0), where=se > 0)
    worst = float(z.max())
    return check_report(
        "cftp_magnetization",
        instance_spec(region, params, BoundaryCondition.all_plus(region), samples=samples),
        worst,
        z_max,
        z_max - worst,
        worst <= z_max,
        max_abs_error=float(diff.max()),
    )


def coupling_order_check(
    region: LatticeRegion,
    field_values: np.ndarray,
    params: ModelParams,
    sweeps: int = 1000,
    streams: int = 4,
    seed: int = 0,
    random_start: bool = False,
) -> CheckReport:
    """The plus-boundary chain stays above the minus-boundary chain after every single-site update.

    Chains start from the extremes, or from random ordered pairs with ``random_start``.
    """
    upper = IsingInstance.from_boundary(region, BoundaryCondition.all_plus(region), field_values)
    lower = IsingInstance.from_boundary(region, BoundaryCondition.all_minus(region), field_values)
    pair = CoupledChainPair(upper, lower, seed, np.arange(streams), random_start=random_start)
    breaks = 0 if pair.ordered else 1
    for _ in range(sweeps):
        breaks += pair.advance_checked(params.beta)
    return check_report(
        "coupling_order",
        instance_spec(region, params, sweeps=sweeps, streams=streams, start="random" if random_start else "extremes"),
        float(breaks),
        0.0,
        float(-breaks),
        breaks == 0,
        updates=sweeps * len(region) * streams,
    )


def cftp_reproducibility_check(
    region: LatticeRegion, field_values: np.ndarray, params: ModelParams, samples: int = 50, seed: int = 0
) -> CheckReport:
    """Two CFTP runs from one seed are bit-identical, and a lone stream matches its batched row."""
    instance = IsingInstance.from_boundary(region, BoundaryCondition.all_plus(region), field_values)
    first, _ = cftp_batch(instance, params.beta, seed, range(samples))
    second, _ = cftp_batch(instance, params.beta, seed, range(samples))
    lone, _ = cftp_batch(instance, params.beta, seed, [samples - 1])
    identical = bool(np.array_equal(first, second) and np.array_equal(first[-1], lone[0]))
    return check_report(
        "cftp_reproducible",
        instance_spec(region, params, samples=samples, seed=seed),
        float(identical),
        1.0,
        float(identical) - 1.0,
        identical,
    )
