"""
The scenario commands. Each one writes its own artifacts through the run's
ArtifactWriter and returns a short summary for the manifest.
"""

from dataclasses import dataclass
from typing import Any, Callable, Iterable, TypeVar

import numpy as np
from joblib import Parallel, delayed

from jostlab.analysis.bifurcation import (
    bifurcation_scaling,
    build_bifurcation_potential,
    mapped_potential,
    verify_bifurcation_eigenvalue,
)
from jostlab.analysis.estimates import audit_jost_estimates
from jostlab.analysis.lap import lap_probe
from jostlab.analysis.threshold import classify_threshold, extract_virtual_state
from jostlab.cli.artifacts import (
    DELTA_HEADER,
    KERNEL_HEADER,
    ArtifactWriter,
    delta_rows,
    jost_header,
    jost_rows,
    kernel_rows,
)
from jostlab.cli.scenario import ResolvedPotential, Scenario
from jostlab.core.grid import Grid
from jostlab.diagnostics.errors import ScenarioError
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger
from jostlab.solvers.jost import jost_family
from jostlab.solvers.resolvent import (
    ResolventKernel,
    apply_operator_residual,
    audit_kernel_growth,
    audit_kernel_structure,
    classical_green,
    delta,
    gaussian_bump,
    resolvent_kernel,
)

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class RunContext:
    """Everything a command needs: scenario, writer, tolerances, logger, pool size."""

    scenario: Scenario
    writer: ArtifactWriter
    config: NumericsConfig
    logger: RunLogger
    threads: int = 1

    @property
    def N(self) -> int:
        return self.scenario.N

    @property
    def stride(self) -> int:
        return self.scenario.outputs.kernel_stride

    def parallel_map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        """fn over items on a thread pool; results keep the input order."""
        items = list(items)
        if self.threads <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        return list(
            Parallel(n_jobs=self.threads, prefer="threads")(
                delayed(fn)(item) for item in items
            )
        )

    def resolve(self) -> tuple[ResolvedPotential, Grid]:
        resolved = self.scenario.potential.resolve(self.config, self.scenario.seed)
        return resolved, self.scenario.grid.build(resolved.potential)


def run_jost(ctx: RunContext) -> dict[str, Any]:
    resolved, grid = ctx.resolve()
    V = resolved.potential
    params = ctx.scenario.zeta_plan.params(ctx.N)
    families = ctx.parallel_map(
        lambda sp: jost_family(V, sp, grid, ctx.config, ctx.logger), params
    )

    entries, sweep = [], []
    for i, (sp, family) in enumerate(zip(params, families)):
        for sol in family:
            ctx.writer.write_csv(
                f"jost_z{i}_{sol.side}{sol.m}.csv",
                jost_header(ctx.N),
                jost_rows(sol, ctx.stride),
            )
        report = delta(family, config=ctx.config)
        sweep.append((sp.zeta, report))
        estimates = [
            audit_jost_estimates(sol, V, config=ctx.config, logger=ctx.logger)
            for sol in family
            if sol.side == "right"
        ]
        entries.append(
            {
                "zeta": sp.zeta,
                "delta": report.to_dict(),
                "amplification": [sol.amplification for sol in family],
                "estimates": [e.to_dict() for e in estimates],
            }
        )
    ctx.writer.write_csv("delta_sweep.csv", DELTA_HEADER, delta_rows(sweep))
    ctx.writer.write_json(
        "jost.json",
        {"potential": V.to_dict(), "N": ctx.N, "entries": entries},
    )
    return {"zetas": len(params), "dependent": sum(r.dependent for _, r in sweep)}


def _classical_mismatch(kernel: ResolventKernel) -> float:
    reference = classical_green(kernel.solutions[0], kernel.solutions[1])
    scale = max(float(np.max(np.abs(reference))), 1e-300)
    return float(np.max(np.abs(kernel.matrix() - reference))) / scale


def run_resolvent(ctx: RunContext) -> dict[str, Any]:
    resolved, grid = ctx.resolve()
    V = resolved.potential
    kernels = ctx.parallel_map(
        lambda sp: resolvent_kernel(V, sp, grid, config=ctx.config, logger=ctx.logger),
        ctx.scenario.zeta_plan.params(ctx.N),
    )

    bump = gaussian_bump()
    entries = []
    for i, kernel in enumerate(kernels):
        ctx.writer.write_csv(
            f"kernel_z{i}.csv", KERNEL_HEADER, kernel_rows(kernel.separable, ctx.stride)
        )
        structure = audit_kernel_structure(kernel)
        entry: dict[str, Any] = {
            "zeta": kernel.sp.zeta,
            "delta": kernel.delta.to_dict(),
            "jump_constant": kernel.jump,
            "structure": {**structure.to_dict(), "passed": structure.passed()},
            "operator_residual": apply_operator_residual(kernel, bump, ctx.config),
            "growth": audit_kernel_growth(kernel, config=ctx.config).to_dict(),
        }
        if ctx.N == 2:
            entry["classical_mismatch"] = _classical_mismatch(kernel)
        entries.append(entry)

    sweep = [(k.sp.zeta, k.delta) for k in kernels]
    ctx.writer.write_csv("delta_sweep.csv", DELTA_HEADER, delta_rows(sweep))
    ctx.writer.write_json(
        "resolvent.json",
        {"potential": V.to_dict(), "N": ctx.N, "entries": entries},
    )
    return {
        "zetas": len(kernels),
        "structure_passed": all(e["structure"]["passed"] for e in entries),
    }


def run_threshold(ctx: RunContext) -> dict[str, Any]:
    resolved, grid = ctx.resolve()
    V = resolved.potential
    plan = ctx.scenario.zeta_plan
    report = classify_threshold(
        V,
        grid,
        eps_ray=plan.radii,
        N=ctx.N,
        angle=plan.angle,
        config=ctx.config,
        logger=ctx.logger,
    )
    if report.is_virtual_level:
        state = extract_virtual_state(V, grid, ctx.N, ctx.config, ctx.logger)
        ctx.writer.write_csv(
            "psi.csv",
            ("x", "re", "im", "abs"),
            [
                [float(x), complex(p).real, complex(p).imag, abs(p)]
                for x, p in zip(state.x, state.psi)
            ],
        )
        ctx.writer.write_json(
            "virtual_state.json",
            {
                "equation_residual": state.equation_residual,
                "sup_left": state.sup_left,
                "linear_constant": state.linear_constant,
                "growth_exponent": state.growth_exponent,
                "passed": state.passed(),
            },
        )
        report = report.model_copy(update={"psi_csv_path": "psi.csv"})
    ctx.writer.write_json("threshold.json", report.model_dump(mode="json"))
    return {"classification": report.classification}


def run_lapnorm(ctx: RunContext) -> dict[str, Any]:
    resolved, grid = ctx.resolve()
    plan = ctx.scenario.zeta_plan
    report = lap_probe(
        resolved.potential,
        grid,
        ctx.scenario.weights.to_spec(),
        N=ctx.N,
        radii=plan.radii,
        angle=plan.angle,
        config=ctx.config,
        logger=ctx.logger,
    )
    diffs = [float("nan"), *report.diffs]
    ctx.writer.write_csv(
        "lap_norms.csv",
        ("re_zeta", "im_zeta", "norm", "diff"),
        [
            [z.re, z.im, norm, diff]
            for z, norm, diff in zip(report.zetas, report.norms, diffs)
        ],
    )
    ctx.writer.write_json("lap.json", report.model_dump(mode="json"))
    return {"verdict": report.verdict, "fit_exponent": report.fit_exponent}


def bifurcation_kappas(scenario: Scenario) -> list[float]:
    if scenario.kappas:
        return list(scenario.kappas)
    if scenario.potential.kind == "bifurcation" and scenario.potential.kappa:
        return [scenario.potential.kappa]
    raise ScenarioError(
        "bifurcate needs 'kappas' or a bifurcation potential", ["kappas"]
    )


def run_bifurcate(ctx: RunContext) -> dict[str, Any]:
    kappas = bifurcation_kappas(ctx.scenario)
    if any(k <= 0 or k >= ctx.config.KAPPA_0 for k in kappas):
        raise ScenarioError(
            f"kappas must lie in (0, {ctx.config.KAPPA_0})", ["kappas"]
        )

    def verify(kappa: float):
        member = build_bifurcation_potential(kappa, ctx.config, ctx.logger)
        grid = ctx.scenario.grid.build(mapped_potential(member))
        report = verify_bifurcation_eigenvalue(kappa, grid, ctx.config, ctx.logger)
        return member, report

    results = ctx.parallel_map(verify, kappas)
    x = np.linspace(-5.0, 5.0, 1001)
    for member, _ in results:
        tag = f"{member.kappa:g}"
        ctx.writer.write_json(f"potential_kappa{tag}.json", member.potential.to_dict())
        ctx.writer.write_csv(
            f"u_kappa{tag}.csv",
            ("x", "u", "V"),
            [
                [float(t), float(u), complex(v).real]
                for t, u, v in zip(x, member.u(x), member.potential(x))
            ],
        )
    payload: dict[str, Any] = {
        "reports": [report.model_dump(mode="json") for _, report in results]
    }
    if len(kappas) >= 2:
        payload["scaling"] = bifurcation_scaling(kappas, ctx.config)
    ctx.writer.write_json("bifurcation.json", payload)
    worst = max(report.eigen_residual for _, report in results)
    ctx.logger.info(
        f"Verified {len(kappas)} bifurcation members",
        LogContext.BIFURCATION,
        {"worst_eigen_residual": worst},
    )
    return {"kappas": kappas, "worst_eigen_residual": worst}
