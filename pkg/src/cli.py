"""
Command-line interface for the secure ISAC beamforming toolkit.

Subcommands:
    run          Monte Carlo experiment from a JSON spec
    beampattern  Solve one variant and write its transmit beampattern
    fig3         Secrecy gap versus secrecy rate reference curves (alias: gap-rate)
    trace        Convergence trace of one proposed-architecture solve

Failures print one JSON line {"error": ..., "message": ...} on stderr.
"""

import argparse
import json
import logging
import logging.config
import sys
from typing import List, Optional

from .config import settings, get_logging_config
from .mathematics.baselines import ArchitectureVariant
from .mathematics.scenario import desired_from_config, load_config
from .mathematics.solver import PenaltyMode
from .services import ExperimentService, ExperimentSpec, ExportService, solve_variant
from .services.export_service import default_gap_rate_sweeps

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Raised instead of argparse's own exit on bad arguments."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with all subcommands."""
    parser = _Parser(
        prog="python -m src",
        description="Secure hybrid beamforming for IRS-assisted ISAC",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    variants = [v.value for v in ArchitectureVariant]
    modes = [m.value for m in PenaltyMode]

    run_parser = subparsers.add_parser("run", help="Run a Monte Carlo experiment")
    run_parser.add_argument("--spec", required=True, help="Experiment spec (JSON)")
    run_parser.add_argument("--out", required=True, help="Output directory")
    run_parser.add_argument("--threads", type=int, default=None, help="Worker processes (ISAC_THREADS overrides)")
    run_parser.add_argument("--seed-base", type=int, default=None, help="Override the spec's seed base")

    beam_parser = subparsers.add_parser("beampattern", help="Write the transmit beampattern of one solve")
    beam_parser.add_argument("--config", required=True, help="Scenario file (KEY=VALUE)")
    beam_parser.add_argument("--variant", choices=variants, default=ArchitectureVariant.PROPOSED_HB.value)
    beam_parser.add_argument("--seed", type=int, default=0, help="Channel and initialization seed")
    beam_parser.add_argument("--penalty-mode", choices=modes, default=PenaltyMode.FIXED_WEIGHT.value)
    beam_parser.add_argument("--out", required=True, help="Output CSV")

    gap_rate_parser = subparsers.add_parser(
        "fig3", aliases=["gap-rate"], help="Write the secrecy gap/rate reference curves"
    )
    gap_rate_parser.add_argument("--points", type=int, default=100, help="Samples per curve")
    gap_rate_parser.add_argument("--out", required=True, help="Output CSV")

    trace_parser = subparsers.add_parser("trace", help="Write the PDD/BSUM convergence trace")
    trace_parser.add_argument("--config", required=True, help="Scenario file (KEY=VALUE)")
    trace_parser.add_argument("--seed", type=int, default=0, help="Channel and initialization seed")
    trace_parser.add_argument("--variant", choices=variants, default=ArchitectureVariant.PROPOSED_HB.value)
    trace_parser.add_argument("--out", required=True, help="Output CSV")

    return parser


def _resolve_threads(requested: Optional[int]) -> int:
    """ISAC_THREADS wins over --threads, which wins over the settings default."""
    if "threads" in settings.model_fields_set:
        return settings.threads
    return requested if requested is not None else settings.threads


def _cmd_run(args) -> dict:
    spec = ExperimentSpec.from_file(args.spec)
    if args.seed_base is not None:
        spec = ExperimentSpec.model_validate({**spec.model_dump(), "seed_base": args.seed_base})
    service = ExperimentService(threads=_resolve_threads(args.threads))
    result = service.run_experiment(spec, out_dir=args.out)
    return {
        "command": "run",
        "trials": len(result.records),
        "failures": sum(1 for r in result.records if r.error),
        "out": args.out,
    }


def _cmd_beampattern(args) -> dict:
    cfg = load_config(args.config)
    report, variant_cfg = solve_variant(cfg, args.variant, args.seed, PenaltyMode(args.penalty_mode))
    ExportService().emit_beampattern(report, desired_from_config(variant_cfg), args.out)
    return {"command": "beampattern", "converged": report.converged, "out": args.out}


def _cmd_fig3(args) -> dict:
    if args.points < 2:
        raise ValueError("--points must be at least 2")
    ExportService().emit_fig3_sweep(args.out, default_gap_rate_sweeps(args.points))
    return {"command": args.command, "out": args.out}


def _cmd_trace(args) -> dict:
    cfg = load_config(args.config)
    report, _ = solve_variant(cfg, args.variant, args.seed)
    ExportService().emit_trace(report.trace, args.out)
    return {
        "command": "trace",
        "converged": report.converged,
        "inner_iterations": len(report.trace.inner),
        "out": args.out,
    }


COMMANDS = {
    "run": _cmd_run,
    "beampattern": _cmd_beampattern,
    "fig3": _cmd_fig3,
    "gap-rate": _cmd_fig3,
    "trace": _cmd_trace,
}


def _error_line(error: BaseException) -> str:
    return json.dumps({"error": type(error).__name__, "message": str(error)})


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point.

    Args:
        argv: Arguments without the program name, defaults to sys.argv[1:]

    Returns:
        Process exit code
    """
    logging.config.dictConfig(get_logging_config())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(_error_line(e), file=sys.stderr)
        return EXIT_USAGE

    try:
        summary = COMMANDS[args.command](args)
    except Exception as e:
        logger.debug("Command failed", exc_info=True)
        print(_error_line(e), file=sys.stderr)
        return EXIT_FAILURE

    print(json.dumps(summary))
    return EXIT_OK


# Export public interface
__all__ = ["build_parser", "main", "UsageError"]
