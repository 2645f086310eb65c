"""Combinatory experiment tools: scale partition summaries and the decay sweep."""

from __future__ import annotations

__all__: list[str] = []

from typing import Any

from typing_extensions import TypedDict

from ...config import ExperimentConfig
from ...gaussian import DisorderAverager
from ...harness.experiment import run_sweep
from ...harness.partition import STATISTICS_REPLICAS, block_statistics, partition_reports, scale_partition
from ...lattice import site_key, square
from ...mcp_server import mcp
from ...model import ModelParams
from ...reports import CheckReport, jsonable
from ...tools import _project, offload


class ScalePartitionSummary(TypedDict):
    n: int
    i: int
    epsilon: float
    L: int
    scales: list[float]
    m: int
    K: float
    blocks_per_side: int
    block_count: int
    lambda0_side: int
    default_h: float
    invariants: dict[str, bool]
    scale_sums: list[float] | None
    good_blocks: list[str] | None
    reports: list[CheckReport] | None


@mcp.tool()
@offload
def scale_partition_summary(
    n: int,
    i: int | None = None,
    v: float = 1.0,
    with_statistics: bool = False,
    beta: float = 1.0,
    k_max: int = 3,
    replicas: int = STATISTICS_REPLICAS,
    seed: int = 0,
) -> ScalePartitionSummary:
    """Scale lengths, block grid and invariants of the partition of an n x n square.

    With ``with_statistics`` the k-truncated block sums of square:<n> are computed
    (small n only, the sums need exact cumulants), the scale is chosen from them
    unless ``i`` is given, and the averaged block bounds are returned as reports.

    Args:
        n: Side of the square (n >= 3).
        i: Scale index in [1, L]; defaults to 1, or to the selected scale with statistics.
        v: Field variance, used for the default block shift.
        with_statistics: Compute the truncated block statistics.
        beta: Inverse temperature of the statistics.
        k_max: Truncation order of the statistics.
        replicas: Disorder replicas averaged by the statistics.
        seed: Master seed of those replicas.
    """
    scale_sums = good = reports = None
    if with_statistics:
        region = square(n)
        params = ModelParams(beta, v)
        averager = DisorderAverager(region, "mc", replicas=replicas, seed=seed)
        stats = block_statistics(region, params, k_max=k_max, averager=averager, i=i)
        partition = stats.partition
        scale_sums = stats.scale_sums
        good = [site_key(c) for c in stats.good]
        reports = partition_reports(stats, params, region)
    else:
        partition = scale_partition(n, i)
    return {
        "n": partition.n,
        "i": partition.i,
        "epsilon": partition.epsilon,
        "L": partition.L,
        "scales": partition.scales,
        "m": partition.m,
        "K": partition.K,
        "blocks_per_side": partition.blocks_per_side,
        "block_count": partition.block_count,
        "lambda0_side": partition.lambda0_side,
        "default_h": partition.default_h(v),
        "invariants": partition.invariants(),
        "scale_sums": scale_sums,
        "good_blocks": good,
        "reports": reports,
    }


@mcp.tool()
@offload
def run_decay_sweep(
    n_list: list[int],
    beta: list[float],
    v: float = 1.0,
    replicas: int = 20,
    seed: int = 0,
    engine: str = "auto",
    samples: int = 200,
    workers: int = 1,
    out_dir: str | None = None,
    fields: list[str] | None = None,
) -> dict[str, Any]:
    """Mean centre gap <s_x>+ - <s_x>- over disorder for nested centred n x n squares.

    Rows come in beta-major order. Nested squares share their disorder, so every
    replica's gap should shrink as n grows; ``nesting_violations`` counts breaches.

    Args:
        n_list: Square sides.
        beta: Inverse temperatures.
        v: Variance of the Gaussian random field.
        replicas: Disorder replicas per row.
        seed: Master seed.
        engine: exact, mc or auto.
        samples: CFTP samples per disorder in mc mode.
        workers: Thread pool size over replicas.
        out_dir: When set, decay.csv, decay.json and decay.svg are written there.
        fields: Row fields to include. Available: n, beta, v, replicas, gap_mean, gap_se, engine,
                seconds, depth, envelope, gaps, error. Defaults to all. ``engine`` is always included.
    """
    config = ExperimentConfig.from_mapping(
        {
            "n_list": n_list,
            "beta": beta,
            "v": v,
            "replicas": replicas,
            "seed": seed,
            "engine": engine,
            "samples": samples,
            "workers": workers,
            "out_dir": out_dir or ".",
        }
    )
    result = run_sweep(config, write=out_dir is not None)
    return jsonable(
        {
            "rows": [_project(dict(row), fields) for row in result.rows],
            "nesting_violations": result.nesting_violations,
            "ok": result.ok,
            "files": {k: str(p) for k, p in result.paths.items()},
        }
    )
