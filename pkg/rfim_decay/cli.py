"""Command line entry point: ``rfim-decay {exact,mc,verify,sweep,serve}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from typing import TYPE_CHECKING, Any

from . import PACKAGE_VERSION
from .config import ExperimentConfig, parse_float
from .errors import RFIMError
from .exact import ENGINES, solve
from .lattice import parse_region_spec, parse_site
from .model import BoundaryCondition, DisorderRealization, IsingInstance, ModelParams, effective_field
from .montecarlo import DEFAULT_SWEEP_BUDGET, estimate_gap
from .reports import jsonable

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .lattice import LatticeRegion

logger = logging.getLogger("rfim_decay")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def _emit(payload: Any) -> None:
    sys.stdout.write(json.dumps(jsonable(payload), indent=2) + "\n")


def _add_instance_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--region", default="square:4", help="square:<n>, rect:<nx>x<ny> or sites:<path>")
    parser.add_argument("--beta", type=parse_float, default=1.0, help="inverse temperature ('inf' allowed)")
    parser.add_argument("--v", type=float, default=1.0, help="field variance")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--replica", type=int, default=0, help="disorder replica index")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfim-decay", description="Random field Ising model correlation decay")
    parser.add_argument("--version", action="version", version=f"%(prog)s {PACKAGE_VERSION}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    exact = sub.add_parser("exact", help="exact free energy and magnetizations for one disorder")
    _add_instance_args(exact)
    exact.add_argument("--boundary", default="+", help="'+' or '-'")
    exact.add_argument("--engine", choices=ENGINES, default="auto")
    exact.add_argument("--site", action="append", type=parse_site, help="x,y (repeatable; default all sites)")

    mc = sub.add_parser("mc", help="Monte Carlo boundary gap at one site")
    _add_instance_args(mc)
    mc.add_argument("--site", type=parse_site, default=None, help="x,y (default: the centre)")
    mc.add_argument("--samples", type=int, default=200, help="coupled CFTP samples")
    mc.add_argument("--budget", type=int, default=DEFAULT_SWEEP_BUDGET, help="CFTP sweep budget")
    mc.add_argument("--method", choices=("cftp", "forward-coupling"), default="cftp")

    verify = sub.add_parser("verify", help="run a group of checks")
    verify.add_argument("selector", nargs="?", default="all")

    sweep = sub.add_parser("sweep", help="run the decay experiment from a key = value config file")
    sweep.add_argument("config")

    sub.add_parser("serve", help="run the MCP tool server over stdio")
    return parser


def _instance_inputs(args: argparse.Namespace) -> tuple[LatticeRegion, ModelParams, DisorderRealization]:
    region = parse_region_spec(args.region)
    params = ModelParams(args.beta, args.v)
    return region, params, DisorderRealization.generate(region, args.seed, args.replica)


def cmd_exact(args: argparse.Namespace) -> int:
    region, params, disorder = _instance_inputs(args)
    gamma = BoundaryCondition.from_sign(region, args.boundary)
    instance = IsingInstance.from_boundary(region, gamma, effective_field(disorder, params))
    result = solve(instance, params.beta, args.engine, sites=args.site)
    _emit(result.as_dict())
    return EXIT_OK


def cmd_mc(args: argparse.Namespace) -> int:
    region, params, disorder = _instance_inputs(args)
    site = args.site if args.site is not None else region.center()
    est = estimate_gap(
        region, site, disorder, params, args.samples, seed=args.seed, budget=args.budget, method=args.method
    )
    _emit({"site": list(site), **dataclasses.asdict(est)})
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    from .harness.suite import lemma_suite

    reports = lemma_suite(args.selector)
    _emit(reports)
    failed = [r["check_name"] for r in reports if not r["pass"]]
    if failed:
        logger.error("%d of %d checks failed: %s", len(failed), len(reports), ", ".join(failed))
        return EXIT_CHECK_FAILED
    logger.info("All %d checks passed", len(reports))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    from .harness.experiment import run_sweep

    result = run_sweep(ExperimentConfig.from_file(args.config))
    _emit({"files": {k: str(p) for k, p in result.paths.items()}, "ok": result.ok})
    return EXIT_OK if result.ok else EXIT_CHECK_FAILED


def cmd_serve(args: argparse.Namespace) -> int:
    from .mcp_server import mcp

    mcp.run()
    return EXIT_OK


COMMANDS = {
    "exact": cmd_exact,
    "mc": cmd_mc,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "serve": cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except RFIMError as exc:
        logger.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
