"""
Corpus audit: every structural and analytic check over a set of potentials,
one row per (potential, check).

Hard checks (kernel continuity, the ∂^{N−1} jump, x-independence of Δ, the
explicit Jost bounds, bifurcation eigen-residuals) decide the exit status.
Soft checks and numerical diagnostics are reported as rows only.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from jostlab.analysis.bifurcation import verify_bifurcation_eigenvalue
from jostlab.analysis.estimates import audit_jost_estimates
from jostlab.analysis.threshold import classify_threshold
from jostlab.cli.commands import RunContext
from jostlab.cli.scenario import PotentialSpec, ResolvedPotential
from jostlab.core.grid import Grid
from jostlab.core.spectral import SpectralParam
from jostlab.diagnostics.errors import NumericalDiagnostic, ScenarioError
from jostlab.diagnostics.numerics_config import AuditTally, NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger
from jostlab.solvers.jost import jost_right
from jostlab.solvers.resolvent import (
    apply_operator_residual,
    audit_kernel_structure,
    gaussian_bump,
    resolvent_kernel,
)

STRUCTURE_TOLERANCE = 1e-6
RESIDUAL_TOLERANCE = 1e-3
EIGEN_RESIDUAL_TOLERANCE = 1e-8

SUMMARY_HEADER = ("potential", "check", "pass", "margin", "hard", "detail")


@dataclass(frozen=True)
class AuditRow:
    potential: str
    check: str
    passed: bool
    margin: float
    hard: bool = True
    detail: str = ""
    diagnostic: bool = False

    def as_row(self) -> list[Any]:
        return [
            self.potential,
            self.check,
            self.passed,
            self.margin,
            self.hard,
            self.detail,
        ]


def load_corpus(directory: str | Path) -> list[tuple[str, PotentialSpec]]:
    """Every *.json file in the directory, sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ScenarioError(f"corpus directory {directory} does not exist", ["corpus"])
    corpus = []
    for path in sorted(directory.glob("*.json")):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            spec = data.get("potential", data) if isinstance(data, dict) else data
            corpus.append((path.stem, PotentialSpec.model_validate(spec)))
        except (json.JSONDecodeError, ValueError) as exc:
            raise ScenarioError(f"invalid corpus entry {path.name}: {exc}", [path.name])
    return corpus


class _Checks:
    """Rows for one potential; a diagnostic in one check never stops the others."""

    def __init__(self, name: str, logger: RunLogger):
        self.name = name
        self.logger = logger
        self.rows: list[AuditRow] = []

    def add(
        self,
        check: str,
        passed: bool,
        margin: float,
        hard: bool = True,
        detail: str = "",
    ) -> None:
        self.rows.append(AuditRow(self.name, check, bool(passed), margin, hard, detail))

    def within(
        self, check: str, value: float, tolerance: float, hard: bool = True
    ) -> None:
        self.add(check, value <= tolerance, tolerance - value, hard)

    def guarded(self, check: str, body: Callable[[], None]) -> None:
        try:
            body()
        except NumericalDiagnostic as exc:
            self.logger.diagnostic(exc, LogContext.AUDIT)
            self.rows.append(
                AuditRow(
                    self.name,
                    check,
                    False,
                    math.nan,
                    hard=False,
                    detail=exc.code,
                    diagnostic=True,
                )
            )


def audit_potential(
    resolved: ResolvedPotential,
    grid: Grid,
    N: int,
    audit_radius: float,
    config: NumericsConfig,
    logger: RunLogger,
    eigen_config: NumericsConfig | None = None,
) -> list[AuditRow]:
    V = resolved.potential
    checks = _Checks(resolved.name, logger)
    sp = SpectralParam.on_ray(N, audit_radius)

    def structure() -> None:
        kernel = resolvent_kernel(V, sp, grid, config=config, logger=logger)
        report = audit_kernel_structure(kernel)
        jump = max(
            report.jump_modulus_error,
            report.jump_spread,
            abs(report.jump_mean - report.expected_jump),
        )
        checks.within("continuity", report.continuity_mismatch, STRUCTURE_TOLERANCE)
        checks.within("jump", jump, STRUCTURE_TOLERANCE)
        checks.within("adjugate", report.adjugate_mismatch, STRUCTURE_TOLERANCE)
        checks.within("liouville", report.delta_spread, config.SPREAD_TOLERANCE)
        residual = apply_operator_residual(kernel, gaussian_bump(), config)
        checks.within("operator_residual", residual, RESIDUAL_TOLERANCE, hard=False)

    def estimates() -> None:
        for m in sp.right_branches:
            sol = jost_right(V, sp, m, grid, config, logger)
            report = audit_jost_estimates(sol, V, config=config)
            margin = min((c.min_margin for c in report.checks), default=math.inf)
            checks.add(f"jost_estimates_m{m}", report.passed, margin)

    def classification() -> None:
        report = classify_threshold(
            V, grid, N=N, raise_on_disagreement=False, config=config
        )
        checks.add(
            "classification",
            report.criteria_agree,
            abs(report.order_fit - report.delta_zero_order),
            hard=False,
            detail=report.classification,
        )

    checks.guarded("kernel_structure", structure)
    checks.guarded("jost_estimates", estimates)
    checks.guarded("classification", classification)

    member = resolved.member
    if member is not None:

        def eigenvalue() -> None:
            report = verify_bifurcation_eigenvalue(
                member.kappa, config=eigen_config or config
            )
            checks.within(
                "eigen_residual", report.eigen_residual, EIGEN_RESIDUAL_TOLERANCE
            )
            checks.add(
                "eigen_dependence",
                report.dependent,
                config.DEPENDENCE_THRESHOLD * report.delta_scale - report.delta_abs,
                hard=False,
                detail=f"|delta|={report.delta_abs:.3e}",
            )

        checks.guarded("eigenvalue", eigenvalue)
    return checks.rows


def _corpus_entries(ctx: RunContext) -> list[ResolvedPotential]:
    scenario = ctx.scenario
    entries: list[ResolvedPotential] = []
    if scenario.corpus:
        for name, spec in load_corpus(scenario.corpus):
            entries.append(spec.resolve(ctx.config, scenario.seed, name=name))
    for k in range(scenario.corpus_random):
        spec = PotentialSpec(kind="random")
        entries.append(spec.resolve(ctx.config, scenario.seed + k))
    if not entries:
        entries.append(scenario.potential.resolve(ctx.config, scenario.seed))
    return entries


def audit_all(ctx: RunContext) -> tuple[AuditTally, list[AuditRow]]:
    """Run the corpus, write audit_summary.csv/json and return the tally."""
    entries = _corpus_entries(ctx)
    ctx.logger.info(f"Auditing {len(entries)} potentials", LogContext.AUDIT)
    eigen_config = ctx.scenario.tolerances.apply("strict")

    def run(entry: ResolvedPotential) -> list[AuditRow]:
        grid = ctx.scenario.grid.build(entry.potential)
        return audit_potential(
            entry,
            grid,
            ctx.N,
            ctx.scenario.audit_radius,
            ctx.config,
            ctx.logger,
            eigen_config,
        )

    rows = [row for chunk in ctx.parallel_map(run, entries) for row in chunk]
    tally = AuditTally()
    for row in rows:
        if row.diagnostic:
            tally.record_diagnostic(f"{row.potential}:{row.check}")
        elif row.hard:
            tally.record(f"{row.potential}:{row.check}", row.passed)
    ctx.writer.write_csv(
        "audit_summary.csv", SUMMARY_HEADER, [r.as_row() for r in rows]
    )
    ctx.writer.write_json(
        "audit_summary.json",
        {
            "potentials": [e.name for e in entries],
            "summary": tally.get_summary(),
            "failed_checks": tally.failed_checks,
        },
    )
    ctx.logger.info(tally.get_summary(), LogContext.AUDIT)
    return tally, rows
