"""The boundary-gap decay experiment and its CSV/JSON/SVG outputs."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import pairwise
from typing import TYPE_CHECKING, Any

import numpy as np
from typing_extensions import NotRequired, TypedDict

from ..decoupling import decoupling_reports, slope_report
from ..errors import EngineCapacityError, RegionError, RFIMError
from ..exact import select_engine, solve
from ..lattice import centered_square, parse_region_spec
from ..model import BlockShift, BoundaryCondition, DisorderRealization, IsingInstance, ModelParams, effective_field
from ..montecarlo import estimate_gap
from ..reports import jsonable

if TYPE_CHECKING:
    from pathlib import Path

    from ..config import ExperimentConfig
    from ..lattice import LatticeRegion, Site
    from ..reports import CheckReport

logger = logging.getLogger("rfim_decay")

DECAY_COLUMNS = ("n", "beta", "v", "replicas", "gap_mean", "gap_se", "engine", "seconds")
NESTING_SLACK = 1e-10
_MC_TAGS = frozenset({"cftp", "forward-coupling", "cftp+forward-coupling"})


class DecayRow(TypedDict):
    n: int
    beta: float
    v: float
    replicas: int
    gap_mean: float
    gap_se: float
    engine: str
    seconds: float
    depth: int
    envelope: float | None
    gaps: list[float]
    error: NotRequired[str]


def decay_envelope(depth: int, v: float) -> float | None:
    """(1 + v^{-1/2})/√(log log d) with unit constant; undefined below depth 3."""
    if depth < 3:
        return None
    return (1.0 + 1.0 / math.sqrt(v)) / math.sqrt(math.log(math.log(depth)))


def _row_engine(region: LatticeRegion, params: ModelParams, engine: str) -> str:
    """``exact`` or ``mc`` for one row; β = ∞ is always exact."""
    if engine == "exact" or params.is_ground_state:
        return "exact"
    if engine == "mc":
        return "mc"
    try:
        select_engine(region)
    except EngineCapacityError:
        logger.info("%d sites exceed the exact engines, switching to mc", len(region))
        return "mc"
    return "exact"


def replica_gap(
    region: LatticeRegion,
    center: Site,
    params: ModelParams,
    config: ExperimentConfig,
    replica: int,
    engine: str,
) -> tuple[float, str]:
    """⟨σ_x⟩₊ − ⟨σ_x⟩₋ at the centre for one disorder replica, with the engine tag that produced it."""
    disorder = DisorderRealization.generate(region, config.seed, replica)
    if engine == "mc":
        est = estimate_gap(
            region,
            center,
            disorder,
            params,
            config.samples,
            seed=config.seed,
            budget=config.sweep_budget,
            stream_offset=replica * config.samples,
        )
        return est.estimate, est.method
    field_values = effective_field(disorder, params)
    mags = []
    tag = ""
    for gamma in (BoundaryCondition.all_plus(region), BoundaryCondition.all_minus(region)):
        result = solve(IsingInstance.from_boundary(region, gamma, field_values), params.beta, sites=[center])
        mags.append(result.magnetization_at(center))
        tag = result.engine_tag
    return mags[0] - mags[1], tag


def _replica_map(config: ExperimentConfig, fn: Any, count: int) -> list[Any]:
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(fn, range(count)))
    return [fn(r) for r in range(count)]


def decay_row(config: ExperimentConfig, n: int, beta: float) -> DecayRow:
    """One (n, β) row over ``config.replicas`` disorders on the n×n square centred at the origin."""
    started = time.perf_counter()
    params = ModelParams(beta, config.v)
    region = centered_square(n)
    center = region.center()
    depth = region.depth(center)
    if n < 3:
        logger.warning("Decay row n=%d is below n >= 3; reported for reference only", n)
    row: DecayRow = {
        "n": n,
        "beta": beta,
        "v": config.v,
        "replicas": config.replicas,
        "gap_mean": math.nan,
        "gap_se": math.nan,
        "engine": "",
        "seconds": 0.0,
        "depth": depth,
        "envelope": decay_envelope(depth, config.v),
        "gaps": [],
    }
    try:
        engine = _row_engine(region, params, config.engine)
        results = _replica_map(
            config, lambda r: replica_gap(region, center, params, config, r, engine), config.replicas
        )
    except RFIMError as exc:
        logger.exception("Decay row n=%d beta=%g failed", n, beta)
        row["engine"] = "error"
        row["error"] = str(exc)
    else:
        gaps = np.array([gap for gap, _ in results])
        row["gaps"] = gaps.tolist()
        row["gap_mean"] = float(gaps.mean())
        row["gap_se"] = float(gaps.std(ddof=1) / math.sqrt(len(gaps))) if len(gaps) > 1 else 0.0
        row["engine"] = "+".join(sorted({tag for _, tag in results}))
    if config.timing:
        row["seconds"] = time.perf_counter() - started
    logger.info("Row n=%d beta=%g: gap %.6g +/- %.2g (%s)", n, beta, row["gap_mean"], row["gap_se"], row["engine"])
    return row


def decay_experiment(config: ExperimentConfig) -> list[DecayRow]:
    """Rows for every (n, β) in the config; nested squares share their disorder."""
    return [decay_row(config, n, beta) for beta in config.beta for n in config.n_list]


def nesting_violations(rows: list[DecayRow]) -> int:
    """Replica gaps that grow from one square to the next larger one at the same β."""
    count = 0
    for beta in dict.fromkeys(row["beta"] for row in rows):
        exact = sorted(
            (row for row in rows if row["beta"] == beta and row["gaps"] and row["engine"] not in _MC_TAGS),
            key=lambda row: row["n"],
        )
        for small, large in pairwise(exact):
            pairs = zip(small["gaps"], large["gaps"], strict=True)
            count += sum(1 for a, b in pairs if b > a + NESTING_SLACK)
    return count


def _block_for(region: LatticeRegion, m: int) -> BlockShift:
    cx, cy = region.center()
    offset = (m - 1) // 2
    block = BlockShift.square((cx - offset, cy - offset), m, 0.0)
    if not region.issuperset(block.block):
        raise RegionError(f"A {m}x{m} block does not fit in the configured region")
    return block


def default_block_h(region: LatticeRegion, m: int, v: float) -> float:
    """√v·√(log log n)/(2m), n the longer side of the region."""
    x0, x1, y0, y1 = region.bounds
    n = max(x1 - x0, y1 - y0) + 1
    if n < 3:
        raise RegionError("The default block shift needs a region side of at least 3")
    return math.sqrt(v) * math.sqrt(math.log(math.log(n))) / (2 * m)


def block_experiment(config: ExperimentConfig) -> list[CheckReport]:
    """Decoupling and slope reports for the centred block of side ``config.block``, per replica and finite β."""
    if config.block is None:
        return []
    region = parse_region_spec(config.region)
    h = config.h if config.h is not None else default_block_h(region, config.block, config.v)
    block = _block_for(region, config.block).with_h(h)
    reports: list[CheckReport] = []
    for beta in config.beta:
        if math.isinf(beta):
            logger.warning("Skipping the block section at beta=inf; decoupled free energies need a finite beta")
            continue
        params = ModelParams(beta, config.v)
        for r in range(config.replicas):
            field_values = effective_field(DisorderRealization.generate(region, config.seed, r), params)
            batch = decoupling_reports(region, block, field_values, params)
            batch.append(slope_report(region, block, BoundaryCondition.all_plus(region), field_values, params))
            for report in batch:
                report["instance_spec"] = f"{report['instance_spec']} replica={r}"
            reports.extend(batch)
    logger.info("Block section: %d reports, %d failed", len(reports), sum(not r["pass"] for r in reports))
    return reports


def write_csv(rows: list[DecayRow], path: Path) -> None:
    with path.open("w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=DECAY_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def write_json(payload: dict[str, Any], path: Path) -> None:
    path.write_text(json.dumps(jsonable(payload), indent=2) + "\n", encoding="ascii")


def write_svg(rows: list[DecayRow], v: float, path: Path) -> None:
    """Mean gap against n per β, with the unit-constant envelope dashed (qualitative only)."""
    import matplotlib
    from matplotlib.figure import Figure

    with matplotlib.rc_context({"svg.hashsalt": "rfim-decay", "svg.fonttype": "none"}):
        fig = Figure(figsize=(6, 4))
        ax = fig.add_subplot()
        for beta in dict.fromkeys(row["beta"] for row in rows):
            ok = [row for row in rows if row["beta"] == beta and "error" not in row]
            ax.errorbar(
                [row["n"] for row in ok],
                [row["gap_mean"] for row in ok],
                yerr=[row["gap_se"] for row in ok],
                marker="o",
                capsize=3,
                label=f"beta={beta:g}",
            )
        env = sorted({(row["n"], row["envelope"]) for row in rows if row["envelope"] is not None})
        if env:
            ax.plot([n for n, _ in env], [e for _, e in env], "k--", label="envelope, C=1 (qualitative)")
        ax.set_xlabel("n")
        ax.set_ylabel("E(<s_x>+ - <s_x>-)")
        ax.set_title(f"Boundary influence at the centre, v={v:g}")
        ax.legend()
        fig.savefig(path, format="svg", metadata={"Date": None})


@dataclass(frozen=True)
class SweepResult:
    rows: list[DecayRow]
    nesting_violations: int
    block_reports: list[CheckReport]
    paths: dict[str, Path] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (
            self.nesting_violations == 0
            and all("error" not in row for row in self.rows)
            and all(r["pass"] for r in self.block_reports)
        )


def run_sweep(config: ExperimentConfig, write: bool = True) -> SweepResult:
    """Decay rows, the optional block section and, with ``write``, the files under ``config.out_dir``."""
    rows = decay_experiment(config)
    violations = nesting_violations(rows)
    if violations:
        logger.warning("%d replica gaps grew with the square side", violations)
    reports = block_experiment(config)
    paths: dict[str, Path] = {}
    if write:
        out = config.out_dir
        out.mkdir(parents=True, exist_ok=True)
        paths["csv"] = out / "decay.csv"
        paths["json"] = out / "decay.json"
        write_csv(rows, paths["csv"])
        write_json(
            {
                "config": config.as_dict(),
                "rows": rows,
                "nesting_violations": violations,
                "block_reports": reports,
            },
            paths["json"],
        )
        if config.plot:
            paths["svg"] = out / "decay.svg"
            write_svg(rows, config.v, paths["svg"])
        logger.info("Wrote %s", ", ".join(str(p) for p in paths.values()))
    return SweepResult(rows, violations, reports, paths)
