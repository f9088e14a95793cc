"""
jostlab command line.

    jostlab <command> --config <path> [--out <dir>] [--threads <n>] [--seed <u64>]

Exit status: 0 on success, 1 when a hard audit check fails, 2 on scenario
errors, 3 on numerical diagnostics (the error object is written to error.json).
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from jostlab.cli.artifacts import ArtifactWriter
from jostlab.cli.audit_all import audit_all
from jostlab.cli.commands import (
    RunContext,
    run_bifurcate,
    run_jost,
    run_lapnorm,
    run_resolvent,
    run_threshold,
)
from jostlab.cli.scenario import COMMANDS, Scenario, load_scenario
from jostlab.config import RuntimeSettings
from jostlab.diagnostics.errors import NumericalDiagnostic, ScenarioError
from jostlab.diagnostics.run_logger import LogContext

EXIT_OK = 0
EXIT_AUDIT_FAILED = 1
EXIT_SCENARIO = 2
EXIT_NUMERICAL = 3

# bifurcation and dependence checks start from the strict tolerances
FALLBACK_PROFILE = {"bifurcate": "strict"}

CommandFn = Callable[[RunContext], dict[str, Any]]

HANDLERS: dict[str, CommandFn] = {
    "jost": run_jost,
    "resolvent": run_resolvent,
    "threshold": run_threshold,
    "lapnorm": run_lapnorm,
    "bifurcate": run_bifurcate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jostlab",
        description="Jost solutions, resolvent kernels and threshold analysis",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="Scenario JSON file")
    parser.add_argument("--out", help="Output directory (default: next to config)")
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument("--seed", type=int, help="Seed for random potentials")
    parser.add_argument("--kappa", type=float, action="append", help="bifurcate: κ")
    parser.add_argument("--corpus", help="audit: directory of potential JSON files")
    return parser


def _apply_flags(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    scenario = scenario.for_command(args.command)
    update: dict[str, Any] = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ScenarioError("seed must be an unsigned 64-bit integer", ["--seed"])
        update["seed"] = args.seed
    if args.kappa:
        update["kappas"] = list(args.kappa)
    if args.corpus:
        update["corpus"] = args.corpus
    return scenario.model_copy(update=update) if update else scenario


def _output_dir(args: argparse.Namespace, scenario: Scenario) -> Path:
    if args.out:
        return Path(args.out)
    if scenario.outputs.directory:
        return Path(scenario.outputs.directory)
    return Path(args.config).parent / f"{args.command}_out"


def _report_scenario_error(error: ScenarioError) -> int:
    payload = {"error": "scenario", "message": str(error), "fields": error.fields}
    print(json.dumps(payload), file=sys.stderr)
    return EXIT_SCENARIO


def run_scenario(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = RuntimeSettings.from_env()
    except ValueError as exc:
        return _report_scenario_error(ScenarioError(str(exc), ["environment"]))
    try:
        scenario = _apply_flags(load_scenario(args.config), args)
    except ScenarioError as exc:
        return _report_scenario_error(exc)

    threads = args.threads if args.threads is not None else settings.THREADS
    if threads < 1:
        return _report_scenario_error(
            ScenarioError(f"--threads must be at least 1, got {threads}", ["--threads"])
        )
    logger = settings.build_logger()
    writer = ArtifactWriter(_output_dir(args, scenario))
    config = scenario.tolerances.apply(FALLBACK_PROFILE.get(args.command, "default"))
    ctx = RunContext(scenario, writer, config, logger, threads)
    logger.info(
        f"Running '{args.command}'",
        LogContext.CLI,
        {"config": str(args.config), "threads": threads, "seed": scenario.seed},
    )

    status = EXIT_OK
    summary: dict[str, Any] = {}
    try:
        if args.command == "audit":
            tally, _ = audit_all(ctx)
            summary = {"tally": tally.get_summary()}
            if not tally.all_passed:
                status = EXIT_AUDIT_FAILED
        else:
            summary = HANDLERS[args.command](ctx)
    except ScenarioError as exc:
        return _report_scenario_error(exc)
    except NumericalDiagnostic as exc:
        logger.diagnostic(exc, LogContext.CLI)
        writer.write_json("error.json", exc.to_dict())
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        status = EXIT_NUMERICAL
        summary = {"error": exc.code}

    writer.write_manifest(
        args.command,
        scenario.seed,
        {"scenario": scenario.model_dump(mode="json"), "summary": summary},
    )
    writer.write_log(logger.export_json())
    return status


def main() -> None:
    sys.exit(run_scenario())


if __name__ == "__main__":
    main()
