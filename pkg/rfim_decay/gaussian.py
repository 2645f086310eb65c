"""Disorder-side analysis: Gaussian averages, Hermite coefficients and the checks built on them.

Derivatives of F in the standard-Gaussian coordinates are cumulants:
∂^kF/∂g_{x₁}…∂g_{x_k} = (β√v)^k κ(σ_{x₁},…,σ_{x_k}). Their disorder averages
ρ are the Hermite coefficients of F, so Var(F) = Σ_k (1/k!) Σ_{ordered tuples} ρ².

Coefficients are stored per multiset (a sorted site tuple α); a multiset with
multiplicities c_j stands for k!/Π c_j! ordered tuples, so its contribution
to the order-k term is ρ_α² / Π c_j!.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING, Literal

import numpy as np
from scipy.special import eval_hermitenorm, roots_hermitenorm

from .errors import EngineCapacityError, InfiniteBetaError, RFIMError
from .exact import solve
from .exact.cumulants import CUMULANT_ORDER_CAP, SINGLE_SITE_ORDER_CAP, cumulants
from .model import BlockShift, DisorderRealization, IsingInstance, ModelParams, effective_field
from .reports import CheckReport, check_report, instance_spec

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Sequence

    from .lattice import LatticeRegion, Site
    from .model import BoundaryCondition

logger = logging.getLogger("rfim_decay")

QUADRATURE_PROBE_CAP = 4
QUADRATURE_ORDER_CAP = 64


@lru_cache(maxsize=None)
def gauss_hermite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for E[f(g)], g ~ N(0, 1); weights sum to 1."""
    nodes, weights = roots_hermitenorm(order)
    weights = weights / weights.sum()
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int


@dataclass(frozen=True, eq=False)
class DisorderAverager:
    """How the disorder expectation is taken over a region.

    ``quadrature`` integrates the ``probe_sites`` with a tensor Gauss–Hermite
    rule and freezes every other coordinate at ``base`` (zero by default).
    ``mc`` averages over ``replicas`` full disorder draws from ``seed``.
    ``workers`` > 1 evaluates points on a thread pool; results are always
    reduced in point order.
    """

    region: LatticeRegion
    mode: Literal["quadrature", "mc"] = "quadrature"
    probe_sites: tuple[Site, ...] = ()
    order: int = QUADRATURE_ORDER_CAP
    replicas: int = 1000
    seed: int = 0
    base: np.ndarray | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "probe_sites", tuple(sorted(set(self.probe_sites))))
        if not self.region.issuperset(self.probe_sites):
            raise RFIMError("Probe sites must lie in the region")
        if self.mode == "quadrature":
            if len(self.probe_sites) > QUADRATURE_PROBE_CAP:
                raise EngineCapacityError(
                    f"Quadrature integrates at most {QUADRATURE_PROBE_CAP} probe sites, got {len(self.probe_sites)}; "
                    "use mode='mc' for full-disorder averages"
                )
            if not 1 <= self.order <= QUADRATURE_ORDER_CAP:
                raise EngineCapacityError(f"Quadrature order must be in [1, {QUADRATURE_ORDER_CAP}], got {self.order}")
        elif self.mode == "mc":
            if self.replicas < 2:
                raise RFIMError("Monte Carlo averaging needs at least 2 replicas")
        else:
            raise RFIMError(f"Unknown averaging mode {self.mode!r}; use 'quadrature' or 'mc'")

    @property
    def tuple_sites(self) -> tuple[Site, ...]:
        """Sites whose coordinates are random: the probe set, or every site in mc mode without one."""
        if self.mode == "mc" and not self.probe_sites:
            return self.region.sites
        return self.probe_sites

    def sample_points(self) -> tuple[np.ndarray, np.ndarray]:
        """``(g, weights)`` with g of shape (points, |Λ|) and weights summing to 1."""
        return self._grid

    @cached_property
    def _grid(self) -> tuple[np.ndarray, np.ndarray]:
        n = len(self.region)
        if self.mode == "mc":
            g = np.stack([DisorderRealization.generate(self.region, self.seed, r).g for r in range(self.replicas)])
            weights = np.full(self.replicas, 1.0 / self.replicas)
        else:
            base = np.zeros(n) if self.base is None else np.asarray(self.base, dtype=float).reshape(n)
            p = len(self.probe_sites)
            if p == 0:
                g, weights = base[None, :].copy(), np.ones(1)
            else:
                nodes, w = gauss_hermite_rule(self.order)
                grid = np.stack(np.meshgrid(*([nodes] * p), indexing="ij")).reshape(p, -1).T
                wgrid = np.stack(np.meshgrid(*([w] * p), indexing="ij")).reshape(p, -1).prod(axis=0)
                g = np.tile(base, (grid.shape[0], 1))
                g[:, self.region.indices(self.probe_sites)] = grid
                weights = wgrid
        return g, weights

    def evaluate(self, functional: Callable[[np.ndarray], object]) -> np.ndarray:
        """Values of ``functional`` at every point, stacked in point order."""
        g, _ = self.sample_points()
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                values = list(pool.map(functional, g))
        else:
            values = [functional(row) for row in g]
        return np.asarray(values, dtype=float)

    def reduce_mean(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        _, weights = self.sample_points()
        mean = np.tensordot(weights, values, axes=1)
        if self.mode == "quadrature":
            return mean, np.zeros_like(mean)
        return mean, values.std(axis=0, ddof=1) / math.sqrt(len(values))

    def mean(self, functional: Callable[[np.ndarray], float]) -> Estimate:
        mean, se = self.reduce_mean(self.evaluate(functional))
        return Estimate(float(mean), float(se), len(self.sample_points()[1]))


def disorder_average(functional: Callable[[np.ndarray], float], averager: DisorderAverager) -> Estimate:
    """E[functional(g)]; the standard error is 0 in quadrature mode."""
    return averager.mean(functional)


def _variance_of(values: np.ndarray, averager: DisorderAverager) -> Estimate:
    _, weights = averager.sample_points()
    mean = float(weights @ values)
    centred = values - mean
    var = float(weights @ centred**2)
    if averager.mode == "quadrature":
        return Estimate(var, 0.0, len(values))
    r = len(values)
    var = float(centred @ centred) / (r - 1)
    fourth = float(np.mean(centred**4))
    return Estimate(var, math.sqrt(max(fourth - var**2, 0.0) / r), r)


def disorder_variance(functional: Callable[[np.ndarray], float], averager: DisorderAverager) -> Estimate:
    """Var[functional(g)] from a single evaluation pass."""
    return _variance_of(averager.evaluate(functional), averager)


# -- F as a function of the disorder ------------------------------------------


def _require_finite(params: ModelParams) -> None:
    if params.is_ground_state:
        raise InfiniteBetaError("Disorder analysis of F needs a finite beta")


def instance_at(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    g: np.ndarray,
    shift: BlockShift | None = None,
) -> IsingInstance:
    field_values = effective_field(DisorderRealization(region, g), params, shift)
    return IsingInstance.from_boundary(region, gamma, field_values)


def free_energy_functional(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    shift: BlockShift | None = None,
    engine: str = "auto",
) -> Callable[[np.ndarray], float]:
    """g ↦ F_γ(g) with the block shift applied."""
    _require_finite(params)

    def functional(g: np.ndarray) -> float:
        result = solve(instance_at(region, gamma, params, g, shift), params.beta, engine, sites=())
        assert result.free_energy is not None
        return result.free_energy

    return functional


# -- tuples and coefficients ---------------------------------------------------


def tuple_diameter(sites: Sequence[Site]) -> int:
    """max over pairs of the ℓ∞ distance; 0 iff all sites coincide."""
    if not sites:
        raise RFIMError("tuple_diameter needs at least one site")
    xs = [x for x, _ in sites]
    ys = [y for _, y in sites]
    return max(max(xs) - min(xs), max(ys) - min(ys))


def multiplicity_factorial(sites: Sequence[Site]) -> int:
    """Π_j c_j! over the multiplicities of a multiset."""
    return math.prod(math.factorial(c) for c in Counter(sites).values())


def ordered_count(sites: Sequence[Site]) -> int:
    """Number of ordered tuples represented by a multiset."""
    return math.factorial(len(sites)) // multiplicity_factorial(sites)


def multisets(sites: Sequence[Site], max_k: int) -> list[tuple[Site, ...]]:
    """All multisets of ``sites`` with 1 ≤ size ≤ ``max_k``, each respecting the cumulant caps."""
    out: list[tuple[Site, ...]] = []
    for k in range(1, max_k + 1):
        for combo in itertools.combinations_with_replacement(sorted(sites), k):
            if k > CUMULANT_ORDER_CAP and len(set(combo)) > 1:
                raise EngineCapacityError(
                    f"Order {k} over more than one site exceeds the cumulant cap {CUMULANT_ORDER_CAP}"
                )
            if k > SINGLE_SITE_ORDER_CAP:
                raise EngineCapacityError(f"Order {k} exceeds the single-site cap {SINGLE_SITE_ORDER_CAP}")
            out.append(combo)
    return out


def cumulant_means(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    averager: DisorderAverager,
    tuples: Sequence[Sequence[Site]],
    shift: BlockShift | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Disorder mean and standard error of κ for each tuple, one enumeration pass per point."""
    _require_finite(params)
    index_tuples = [list(region.indices(t)) for t in tuples]

    def per_point(g: np.ndarray) -> np.ndarray:
        return cumulants(instance_at(region, gamma, params, g, shift), params.beta, index_tuples)

    mean, se = averager.reduce_mean(averager.evaluate(per_point))
    return np.atleast_1d(mean), np.atleast_1d(se)


def rho(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    sites: Sequence[Site],
    averager: DisorderAverager,
    shift: BlockShift | None = None,
) -> Estimate:
    """ρ(x₁…x_k) = E[∂^kF/∂g_{x₁}…∂g_{x_k}] = (β√v)^k E κ(σ_{x₁},…,σ_{x_k})."""
    mean, se = cumulant_means(region, gamma, params, averager, [sites], shift)
    scale = (params.beta * params.scale) ** len(sites)
    return Estimate(scale * float(mean[0]), scale * float(se[0]), len(averager.sample_points()[1]))


@dataclass(frozen=True)
class HermiteSeries:
    """Hermite coefficients by order, keyed by sorted site tuples, with the Parseval partial sums."""

    coefficients: dict[int, dict[tuple[Site, ...], float]]
    partial_sums: list[float]
    route: str = "derivative"

    @property
    def max_k(self) -> int:
        return len(self.partial_sums)

    def order_sum(self, k: int) -> float:
        """(1/k!) Σ over ordered k-tuples of ρ²."""
        return sum(c * c / multiplicity_factorial(t) for t, c in self.coefficients.get(k, {}).items())

    def is_monotone(self, tol: float = 0.0) -> bool:
        return all(b >= a - tol for a, b in itertools.pairwise(self.partial_sums))

    @classmethod
    def from_coefficients(
        cls, tuples: Sequence[tuple[Site, ...]], values: Iterable[float], max_k: int, route: str
    ) -> HermiteSeries:
        coefficients: dict[int, dict[tuple[Site, ...], float]] = {k: {} for k in range(1, max_k + 1)}
        for t, c in zip(tuples, values, strict=True):
            coefficients[len(t)][t] = float(c)
        series = cls(coefficients, [], route)
        running = 0.0
        for k in range(1, max_k + 1):
            running += series.order_sum(k)
            series.partial_sums.append(running)
        return series


def hermite_series(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    averager: DisorderAverager,
    max_k: int,
    shift: BlockShift | None = None,
) -> HermiteSeries:
    """ρ for every multiset of the averager's random sites, by the derivative (cumulant) route."""
    tuples = multisets(averager.tuple_sites, max_k)
    mean, _ = cumulant_means(region, gamma, params, averager, tuples, shift)
    scale = params.beta * params.scale
    values = [scale ** len(t) * m for t, m in zip(tuples, mean, strict=True)]
    return HermiteSeries.from_coefficients(tuples, values, max_k, "derivative")


def hermite_projection(
    functional: Callable[[np.ndarray], float], averager: DisorderAverager, max_k: int
) -> HermiteSeries:
    """ρ_α = E[f(g)·Π_j He_{c_j}(g_{y_j})] for every multiset α of the averager's random sites."""
    g, weights = averager.sample_points()
    f = averager.evaluate(functional)
    region = averager.region
    tuples: list[tuple[Site, ...]] = [
        combo
        for k in range(1, max_k + 1)
        for combo in itertools.combinations_with_replacement(averager.tuple_sites, k)
    ]
    values = []
    for t in tuples:
        basis = np.ones(len(f))
        for site, c in Counter(t).items():
            basis *= eval_hermitenorm(c, g[:, region.index[site]])
        values.append(float(weights @ (f * basis)))
    return HermiteSeries.from_coefficients(tuples, values, max_k, "projection")


# -- checks --------------------------------------------------------------------


def variance_identity_check(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    averager: DisorderAverager,
    max_k: int = 6,
    tol: float = 1e-6,
    shift: BlockShift | None = None,
) -> CheckReport:
    """Var(F) against the Parseval partial sums Σ_{j≤k} (1/j!) Σ ρ²."""
    series = hermite_series(region, gamma, params, averager, max_k, shift)
    var = disorder_variance(free_energy_functional(region, gamma, params, shift), averager)
    residual = var.mean - series.partial_sums[-1]
    passed = series.is_monotone(1e-12) and residual >= -tol - 3 * var.stderr
    logger.debug("Variance identity: Var=%g, partial=%s", var.mean, series.partial_sums)
    return check_report(
        "variance_identity",
        instance_spec(region, params, gamma, max_k=max_k, mode=averager.mode),
        var.mean,
        series.partial_sums[-1],
        residual,
        passed,
        partial_sums=series.partial_sums,
        variance_stderr=var.stderr,
        truncation_order=max_k,
    )


def functional_variance_check(
    functional: Callable[[np.ndarray], float],
    averager: DisorderAverager,
    max_k: int,
    name: str = "functional",
    tol: float = 1e-10,
) -> CheckReport:
    """Variance identity for an arbitrary functional through the Hermite projection route."""
    series = hermite_projection(functional, averager, max_k)
    var = disorder_variance(functional, averager)
    residual = var.mean - series.partial_sums[-1]
    return check_report(
        "variance_identity_projection",
        f"{name} probes={len(averager.tuple_sites)} max_k={max_k}",
        var.mean,
        series.partial_sums[-1],
        residual,
        series.is_monotone(1e-12) and residual >= -tol,
        partial_sums=series.partial_sums,
    )


def hermite_route_check(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    averager: DisorderAverager,
    max_k: int = 4,
    tol: float = 1e-6,
) -> CheckReport:
    """Derivative-route and projection-route coefficients of F agree."""
    derivative = hermite_series(region, gamma, params, averager, max_k)
    projection = hermite_projection(free_energy_functional(region, gamma, params), averager, max_k)
    worst = max(
        abs(derivative.coefficients[k][t] - projection.coefficients[k][t])
        for k in derivative.coefficients
        for t in derivative.coefficients[k]
    )
    return check_report(
        "hermite_routes",
        instance_spec(region, params, gamma, max_k=max_k),
        worst,
        tol,
        tol - worst,
        worst <= tol,
    )


def poincare_check(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    averager: DisorderAverager,
    shift: BlockShift | None = None,
) -> CheckReport:
    """Var(F) ≤ E Σ_x (∂F/∂g_x)² = β²v Σ_x E⟨σ_x⟩² ≤ β²v|Λ|, the sum over random coordinates."""
    _require_finite(params)
    random_sites = averager.tuple_sites
    n_sites = len(region)

    def per_point(g: np.ndarray) -> np.ndarray:
        result = solve(instance_at(region, gamma, params, g, shift), params.beta, sites=random_sites)
        mags = np.array([result.magnetization[s] for s in random_sites])
        assert result.free_energy is not None
        return np.concatenate(([result.free_energy], mags**2))

    values = averager.evaluate(per_point)
    var = _variance_of(values[:, 0], averager)
    b2v = params.beta**2 * params.v
    grad_mean, grad_se = averager.reduce_mean(b2v * values[:, 1:].sum(axis=1))
    bound = b2v * n_sites
    margin = 3 * var.stderr
    passed = var.mean <= bound + margin + 1e-12 and var.mean <= float(grad_mean) + margin + 3 * float(grad_se) + 1e-12
    return check_report(
        "poincare",
        instance_spec(region, params, gamma, mode=averager.mode),
        var.mean,
        bound,
        bound - var.mean,
        passed,
        variance_stderr=var.stderr,
        gradient_form=float(grad_mean),
        gradient_stderr=float(grad_se),
        gradient_within_bound=bool(float(grad_mean) <= bound + 1e-12),
    )


def mixed_difference(
    functional: Callable[[np.ndarray], float], g: np.ndarray, coords: Sequence[int], delta: float
) -> float:
    """Product central difference for ∂^k f/∂g_{c₁}…∂g_{c_k}; repeated coordinates are allowed."""
    base = np.asarray(g, dtype=float)
    total = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=len(coords)):
        point = base.copy()
        for c, s in zip(coords, signs, strict=True):
            point[c] += s * delta
        total += math.prod(signs) * functional(point)
    return total / (2.0 * delta) ** len(coords)


def derivative_check(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    g: np.ndarray,
    sites: Sequence[Site],
    delta: float | None = None,
    tol: float = 1e-6,
) -> CheckReport:
    """(β√v)^k κ(σ_{x₁},…,σ_{x_k}) against finite differences of F in the g coordinates.

    First derivatives use a plain central difference (step 1e-4); higher ones
    use step 5e-3 with one Richardson extrapolation.
    """
    f = free_energy_functional(region, gamma, params)
    coords = [int(i) for i in region.indices(sites)]
    k = len(coords)
    if k == 1:
        step = 1e-4 if delta is None else delta
        numeric = mixed_difference(f, g, coords, step)
    else:
        step = 5e-3 if delta is None else delta
        numeric = (4.0 * mixed_difference(f, g, coords, step / 2) - mixed_difference(f, g, coords, step)) / 3.0
    kappa = float(cumulants(instance_at(region, gamma, params, g), params.beta, [coords])[0])
    exact = (params.beta * params.scale) ** k * kappa
    err = abs(exact - numeric)
    return check_report(
        "derivative_identity",
        instance_spec(region, params, gamma, k=k, sites=list(sites)),
        exact,
        numeric,
        tol - err,
        err <= tol,
        step=step,
    )


def block_derivative_means(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    block: BlockShift,
    averager: DisorderAverager,
    max_k: int,
) -> tuple[list[tuple[Site, ...]], np.ndarray]:
    """Multisets of B up to ``max_k`` and the disorder means of their cumulants at h = 0."""
    tuples = multisets(sorted(block.block), max_k)
    mean, _ = cumulant_means(region, gamma, params, averager, tuples)
    return tuples, mean


def _taylor_terms(tuples: Sequence[tuple[Site, ...]], kappa: np.ndarray, beta: float, max_k: int) -> np.ndarray:
    """E F^{(k)}(0) = β^k Σ over ordered k-tuples of B of E κ, for k = 1..max_k."""
    out = np.zeros(max_k)
    for t, m in zip(tuples, kappa, strict=True):
        out[len(t) - 1] += ordered_count(t) * m
    return out * beta ** np.arange(1, max_k + 1)


def _block_difference(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    block: BlockShift,
    averager: DisorderAverager,
) -> Estimate:
    shifted = free_energy_functional(region, gamma, params, block)
    plain = free_energy_functional(region, gamma, params)
    return averager.mean(lambda g: shifted(g) - plain(g))


def block_taylor_check(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    block: BlockShift,
    averager: DisorderAverager,
    max_k: int = 6,
    tol: float = 1e-6,
) -> CheckReport:
    """E[F(h) − F(0)] against the truncated series Σ_{k≤K} h^k/k!·E F^{(k)}(0)."""
    if block.h < 0:
        raise RFIMError(f"The Taylor check needs h >= 0, got {block.h}")
    block.mask(region)
    lhs = _block_difference(region, gamma, params, block, averager)
    tuples, kappa = block_derivative_means(region, gamma, params, block, averager, max_k)
    terms = _taylor_terms(tuples, kappa, params.beta, max_k)
    ks = np.arange(1, max_k + 1)
    partial = np.cumsum(block.h**ks / np.array([math.factorial(k) for k in ks]) * terms)
    residuals = np.abs(lhs.mean - partial)
    decreasing = all(b <= a + 1e-13 for a, b in itertools.pairwise(residuals[1:]))
    margin = 3 * lhs.stderr
    return check_report(
        "block_taylor",
        instance_spec(region, params, gamma, m=block.side, h=block.h, max_k=max_k),
        lhs.mean,
        float(partial[-1]),
        tol + margin - float(residuals[-1]),
        decreasing and residuals[-1] <= tol + margin,
        partial_sums=partial,
        residuals=residuals,
        derivative_means=terms,
    )


def shift_uniform_check(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    averager: DisorderAverager,
    block: BlockShift,
    hs: Sequence[float] = (0.0, 0.1, 0.5),
    max_k: int = 4,
) -> CheckReport:
    """Series partial sums of F(h) stay below β²v|Λ| for every tested h."""
    bound = params.beta**2 * params.v * len(region)
    per_h = {f"{h:g}": hermite_series(region, gamma, params, averager, max_k, block.with_h(h)).partial_sums for h in hs}
    worst = max(sums[-1] for sums in per_h.values())
    return check_report(
        "shift_uniform",
        instance_spec(region, params, gamma, m=block.side, max_k=max_k),
        worst,
        bound,
        bound - worst,
        worst <= bound + 1e-12,
        partial_sums_by_h=per_h,
    )


def remainder_split_check(
    region: LatticeRegion,
    gamma: BoundaryCondition,
    params: ModelParams,
    block: BlockShift,
    averager: DisorderAverager,
    max_k: int = 6,
    near_radius: float = 1.0,
    tol: float = 1e-8,
) -> CheckReport:
    """|(E F(h) − E F(0))/h − E F′(0)| against the single and the two-part Cauchy–Schwarz bounds.

    Everything is in standard-Gaussian units: ρ = (β√v)^k E κ and the shift is
    h/√v. Near tuples are those of diameter below ``near_radius``; there are at
    most m²(2r)^{2(k−1)} of them, against m^{2k} in all.
    """
    if block.h <= 0:
        raise RFIMError(f"The remainder check needs h > 0, got {block.h}")
    m = block.side
    lhs = _block_difference(region, gamma, params, block, averager)
    tuples, kappa = block_derivative_means(region, gamma, params, block, averager, max_k)
    first = params.beta * sum(k for t, k in zip(tuples, kappa, strict=True) if len(t) == 1)
    # φ units: G(H) = F(√v·H), so the remainder scales by √v.
    measured = params.scale * abs(lhs.mean / block.h - first)

    h_phi = block.h / params.scale
    scale = params.beta * params.scale
    near_sq = np.zeros(max_k + 1)
    far_sq = np.zeros(max_k + 1)
    series_remainder = 0.0
    for t, kap in zip(tuples, kappa, strict=True):
        k = len(t)
        if k < 2:
            continue
        r = scale**k * kap
        weight = ordered_count(t)
        series_remainder += h_phi ** (k - 1) / math.factorial(k) * weight * r
        target = near_sq if tuple_diameter(t) < near_radius else far_sq
        target[k] += weight * r * r

    ks = range(2, max_k + 1)
    all_count = sum(h_phi ** (2 * k - 2) * m ** (2 * k) / math.factorial(k) for k in ks)
    near_count = sum(
        h_phi ** (2 * k - 2) * min(m ** (2 * k), m**2 * (2 * near_radius) ** (2 * (k - 1))) / math.factorial(k)
        for k in ks
    )
    near_energy = sum(near_sq[k] / math.factorial(k) for k in ks)
    far_energy = sum(far_sq[k] / math.factorial(k) for k in ks)
    naive = math.sqrt(all_count) * math.sqrt(near_energy + far_energy)
    split = math.sqrt(near_count) * math.sqrt(near_energy) + math.sqrt(all_count) * math.sqrt(far_energy)
    margin = tol + 3 * params.scale * lhs.stderr / block.h
    return check_report(
        "remainder_split",
        instance_spec(region, params, gamma, m=m, h=block.h, max_k=max_k, near_radius=near_radius),
        measured,
        min(naive, split),
        min(naive, split) - measured,
        measured <= naive + margin and measured <= split + margin,
        naive_bound=naive,
        split_bound=split,
        series_remainder=abs(series_remainder),
        truncation_order=max_k,
    )
