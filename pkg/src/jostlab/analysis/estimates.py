"""
Audits of the pointwise estimates satisfied by the right Jost solutions θₘ.

Explicit bounds are checked node by node as margins (bound − value). Bounds
that only assert the existence of some constant are audited by fitting the
smallest constant over a calibration sweep of ζ and grid nodes, then testing
fresh ζ values at interleaved nodes against a slack multiple of it.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from jostlab.core.grid import Grid
from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam
from jostlab.core.weights import bracket, bracket_minus, moment_tail_on_grid
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger, resolve_logger
from jostlab.solvers.jost import JostSolution, jost_right
from jostlab.solvers.resolvent import FittedBound, fit_constant

MARGIN_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class BoundCheck:
    """Margins bound − value of one explicit estimate at the audited nodes."""

    name: str
    x: np.ndarray
    value: np.ndarray
    bound: np.ndarray

    @property
    def margins(self) -> np.ndarray:
        return self.bound - self.value

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margins))

    @property
    def passed(self) -> bool:
        # integrator noise is allowed where value and bound coincide (e.g. V = 0)
        slack = MARGIN_RTOL * np.maximum(np.abs(self.bound), 1.0)
        return bool(np.all(self.margins >= -slack))

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "min_margin": self.min_margin}


@dataclass
class JostEstimateReport:
    """Every explicit estimate for one θₘ(·, ζ)."""

    m: int
    zeta: complex
    mu: float
    checks: list[BoundCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> BoundCheck:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "zeta": {"re": self.zeta.real, "im": self.zeta.imag},
            "mu": self.mu,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _audit_nodes(grid: Grid, limit: int) -> np.ndarray:
    if grid.size <= limit:
        return np.arange(grid.size)
    return np.unique(np.linspace(0, grid.size - 1, limit).astype(int))


def audit_jost_estimates(
    sol: JostSolution,
    V: Potential,
    mu: float | None = None,
    max_nodes: int = 200,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> JostEstimateReport:
    """
    Check the explicit bounds on θₘ at up to max_nodes grid nodes.

    Covered: |θₘ| against ⟨x⁻⟩^{N−1}e^{3M₊/(2⟨ζ⟩^{N−1})}e^{|ζ||x|}; for ζ ≠ 0
    against e^{M₊/|ζ|^{N−1}}e^{|ζ||x|}; |θₘ − e^{iαᵐζx}| against
    3⟨x⁻⟩^{N−1}/(2⟨ζ⟩^{N−1})·e^{3M₊/(2⟨ζ⟩^{N−1})}e^{|ζ||x|}M₊; and the explicit
    first form of the bound on ∂ₓ^{N−1}θₘ − (iαᵐζ)^{N−1}e^{iαᵐζx}.
    """
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    mu = config.DEFAULT_MU if mu is None else mu
    if sol.side != "right" or sol.sp is None or sol.m is None:
        raise ValueError("estimate audits apply to right Jost solutions θₘ")
    sp, N, m = sol.sp, sol.N, sol.m
    r = abs(sp.zeta)
    if r > mu + 1e-12:
        raise ValueError(f"|zeta|={r:.4g} exceeds the disk radius mu={mu}")

    grid = sol.grid
    x_all = grid.nodes
    m_plus = moment_tail_on_grid(V, N, mu, grid)
    zb = float(bracket(r, N - 1))
    growth = np.exp(r * np.abs(x_all))
    spread = np.exp(3.0 * m_plus / (2.0 * zb))
    tail = np.exp(1j * sol.rho * x_all)

    # ∫ₓ^∞ ⟨y⁻⟩^{N−1}M₊(y)e^{|ζ||y|}dy
    integrand = bracket_minus(x_all, N - 1) * m_plus * growth
    inner = np.real(grid.cumulative_from_right(integrand))
    derivative_bound = spread * (m_plus * growth + 1.5 * r * inner)

    idx = _audit_nodes(grid, max_nodes)
    x = x_all[idx]
    report = JostEstimateReport(m=m, zeta=sp.zeta, mu=mu)
    report.checks.append(
        BoundCheck(
            "theta_bound",
            x,
            np.abs(sol.values[idx]),
            (bracket_minus(x_all, N - 1) * spread * growth)[idx],
        )
    )
    if r > 0:
        with np.errstate(over="ignore"):
            coarse = np.exp(m_plus / r ** (N - 1)) * growth
        report.checks.append(
            BoundCheck(
                "theta_bound_nonzero_zeta", x, np.abs(sol.values[idx]), coarse[idx]
            )
        )
    report.checks.append(
        BoundCheck(
            "theta_minus_tail",
            x,
            np.abs(sol.values - tail)[idx],
            (1.5 * bracket_minus(x_all, N - 1) / zb * spread * growth * m_plus)[idx],
        )
    )
    top = sol.derivative(N - 1) - (1j * sol.rho) ** (N - 1) * tail
    report.checks.append(
        BoundCheck(
            "top_derivative_explicit", x, np.abs(top)[idx], derivative_bound[idx]
        )
    )
    for check in report.checks:
        logger.audit_result(f"{check.name}[m={m}]", check.passed, check.min_margin)
    return report


def derivative_shape(
    x: np.ndarray, zeta: complex, N: int, k: int, mu: float
) -> np.ndarray:
    """
    Shape of the bound on ∂ₓ^{N−1−k}θₘ − (iαᵐζ)^{N−1−k}e^{iαᵐζx}:
    e^{−μ|x|}(1 + |ζ|) for x ≥ 0, e^{|ζ||x|}(⟨x⟩ᵏ + |ζ|⟨x⟩^{N+k}) for x ≤ 0.
    """
    r = abs(zeta)
    right = np.exp(-mu * np.abs(x)) * (1.0 + r)
    left = np.exp(r * np.abs(x)) * (bracket(x, k) + r * bracket(x, N + k))
    return np.where(x >= 0, right, left)


def zeta_derivative_shape(
    x: np.ndarray, rho: complex, zeta: complex, N: int
) -> np.ndarray:
    """⟨x⟩·e^{−x Im ρ} for x ≥ 0 and ⟨x⟩·e^{|ζ||x|}⟨x⟩^{N−1} for x ≤ 0."""
    right = np.exp(-x * rho.imag)
    left = np.exp(abs(zeta) * np.abs(x)) * bracket(x, N - 1)
    return bracket(x, 1.0) * np.where(x >= 0, right, left)


def _ratio(value: np.ndarray, shape: np.ndarray) -> np.ndarray:
    return np.where(value == 0, 0.0, value / np.maximum(shape, 1e-300))


def sweep_parameters(
    N: int, radii: Sequence[float], angles: Sequence[float] | None = None
) -> tuple[list[SpectralParam], list[SpectralParam]]:
    """
    Calibration parameters on a (radius, angle) lattice of the closed sector,
    plus fresh parameters at geometric-mean radii and mid angles.
    """
    if angles is None:
        angles = (0.0, math.pi / (2 * N), math.pi / N)
    positive = sorted(r for r in radii if r > 0)
    calibration = [SpectralParam(N, 0)] if any(r == 0 for r in radii) else []
    calibration += [SpectralParam.on_ray(N, r, a) for r in positive for a in angles]
    mid_radii = [math.sqrt(a * b) for a, b in zip(positive, positive[1:])]
    mid_angles = [0.5 * (a + b) for a, b in zip(angles, angles[1:])] or list(angles)
    fresh = [SpectralParam.on_ray(N, r, a) for r in mid_radii for a in mid_angles]
    return calibration, fresh


@dataclass
class ExistentialAudit:
    """Fitted-constant audits over a ζ sweep."""

    m: int
    bounds: list[FittedBound] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.bounds)

    def bound(self, name: str) -> FittedBound:
        return next(b for b in self.bounds if b.name == name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "passed": self.passed,
            "bounds": [b.to_dict() for b in self.bounds],
        }


def _fit_over_sweep(
    name: str,
    calibration: list[Any],
    fresh: list[Any],
    ratio: Callable[[Any], np.ndarray],
    grid: Grid,
    slack: float,
) -> FittedBound:
    even = np.arange(0, grid.size, 2)
    odd = np.arange(1, grid.size, 2)
    calib = np.concatenate([ratio(item)[even] for item in calibration])
    check = np.concatenate([ratio(item)[odd] for item in fresh])
    return fit_constant(name, calib, check, slack)


def audit_derivative_bounds(
    V: Potential,
    N: int,
    m: int,
    grid: Grid,
    radii: Sequence[float] = (0.0, 0.1, 0.2, 0.4, 0.8),
    angles: Sequence[float] | None = None,
    mu: float | None = None,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> ExistentialAudit:
    """
    Fitted-constant bounds on ∂ₓ^{N−1−k}θₘ − (iαᵐζ)^{N−1−k}e^{iαᵐζx},
    k = 0..N−2, over the sector intersected with the disk of radius μ.
    """
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    mu = config.DEFAULT_MU if mu is None else mu
    if max(radii) > mu:
        raise ValueError(f"radii must stay inside the disk of radius mu={mu}")
    calibration, fresh = sweep_parameters(N, radii, angles)
    x = grid.nodes

    def solve(sp: SpectralParam) -> JostSolution:
        return jost_right(V, sp, m, grid, config, logger)

    with logger.timer_context("derivative bound sweep", LogContext.AUDIT):
        calib_sols = [solve(sp) for sp in calibration]
        fresh_sols = [solve(sp) for sp in fresh]

    audit = ExistentialAudit(m=m)
    for k in range(N - 1):
        order = N - 1 - k

        def ratio(sol: JostSolution, k: int = k, order: int = order) -> np.ndarray:
            deviation = np.abs(
                sol.derivative(order) - (1j * sol.rho) ** order * np.exp(1j * sol.rho * x)
            )
            zeta = sol.sp.zeta if sol.sp is not None else sol.rho
            return _ratio(deviation, derivative_shape(x, zeta, N, k, mu))

        audit.bounds.append(
            _fit_over_sweep(
                f"derivative_order_{order}",
                calib_sols,
                fresh_sols,
                ratio,
                grid,
                config.CONSTANT_SLACK,
            )
        )
    for bound in audit.bounds:
        logger.audit_result(f"{bound.name}[m={m}]", bound.passed, bound.constant)
    return audit


def zeta_derivative(
    V: Potential,
    sp: SpectralParam,
    m: int,
    grid: Grid,
    step: float | None = None,
    config: NumericsConfig | None = None,
) -> np.ndarray:
    """
    ∂_ζθₘ(x, ζ) by a fourth-order central difference along the ray through ζ.

    θₘ is already complex-valued and holomorphic in ζ, so the complex-step
    derivative of a real function does not apply.
    """
    if sp.is_threshold:
        raise ValueError("the zeta-derivative stencil needs zeta != 0")
    r = abs(sp.zeta)
    step = step if step is not None else min(1e-3, r / 8.0)
    direction = sp.zeta / r

    def values(offset: float) -> np.ndarray:
        shifted = sp.with_zeta(sp.zeta + offset * direction)
        return jost_right(V, shifted, m, grid, config).values

    stencil = (
        -values(2 * step) + 8 * values(step) - 8 * values(-step) + values(-2 * step)
    )
    return stencil / (12 * step * direction)


def audit_zeta_derivative(
    V: Potential,
    N: int,
    m: int,
    grid: Grid,
    radii: Sequence[float] = (0.1, 0.2, 0.4, 0.8),
    angles: Sequence[float] | None = None,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> FittedBound:
    """
    |∂_ζθₘ| ≤ C⟨x⟩{e^{−x Im(αᵐζ)}, x ≥ 0; e^{|ζ||x|}⟨x⟩^{N−1}, x ≤ 0} with a
    fitted C. Parameters on the boundary rays are moved slightly inside.
    """
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    if angles is None:
        angles = (math.pi / (8 * N), math.pi / (2 * N), 7 * math.pi / (8 * N))
    calibration, fresh = sweep_parameters(N, radii, angles)
    x = grid.nodes

    def ratio(sp: SpectralParam) -> np.ndarray:
        derivative = zeta_derivative(V, sp, m, grid, config=config)
        shape = zeta_derivative_shape(x, sp.root(m), sp.zeta, N)
        return _ratio(np.abs(derivative), shape)

    bound = _fit_over_sweep(
        "zeta_derivative", calibration, fresh, ratio, grid, config.CONSTANT_SLACK
    )
    logger.audit_result(f"zeta_derivative[m={m}]", bound.passed, bound.constant)
    return bound


@dataclass(frozen=True)
class AnalyticityReport:
    """Cauchy–Riemann residual of θₘ(x, ·) at one interior ζ."""

    zeta: complex
    residual: float

    def passed(self, tolerance: float = 1e-6) -> bool:
        return self.residual <= tolerance


def analyticity_probe(
    V: Potential,
    sp: SpectralParam,
    m: int,
    grid: Grid,
    step: float | None = None,
    config: NumericsConfig | None = None,
) -> AnalyticityReport:
    """
    max|∂_tθ − i∂_sθ| / max|∂_sθ| with ζ = s + it, both partials by
    fourth-order central differences. ζ must be an interior sector point.
    """
    r = abs(sp.zeta)
    angle = math.atan2(sp.zeta.imag, sp.zeta.real)
    clearance = r * min(math.sin(angle), math.sin(math.pi / sp.N - angle))
    step = step if step is not None else min(1e-3, clearance / 4.0)
    if step <= 0 or 2 * step >= clearance:
        raise ValueError(f"zeta={sp.zeta} is too close to the sector boundary")

    def partial(direction: complex) -> np.ndarray:
        def values(offset: float) -> np.ndarray:
            shifted = sp.with_zeta(sp.zeta + offset * direction)
            return jost_right(V, shifted, m, grid, config).values

        return (
            -values(2 * step) + 8 * values(step) - 8 * values(-step) + values(-2 * step)
        ) / (12 * step)

    d_s = partial(1.0)
    d_t = partial(1j)
    scale = max(float(np.max(np.abs(d_s))), 1e-300)
    return AnalyticityReport(sp.zeta, float(np.max(np.abs(d_t - 1j * d_s)) / scale))


@dataclass(frozen=True)
class ThresholdContinuityReport:
    """Convergence of θₘ(x, εe^{iφ}) to θₘ(x, 0) as ε → 0."""

    radii: tuple[float, ...]
    distance_to_limit: tuple[float, ...]
    branch_gap: tuple[float, ...]
    rate: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "radii": list(self.radii),
            "distance_to_limit": list(self.distance_to_limit),
            "branch_gap": list(self.branch_gap),
            "rate": self.rate,
        }


def threshold_continuity(
    V: Potential,
    N: int,
    grid: Grid,
    radii: Sequence[float] = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3),
    window: float = 2.0,
    config: NumericsConfig | None = None,
) -> ThresholdContinuityReport:
    """
    sup over |x| ≤ L + window of |θ₀(x, ε·) − θ₀(x, 0)| and of the gap
    |θ₀(x, ε·) − θ₁(x, ε·)| between the two right branches, with the fitted
    power of ε of the first.
    """
    if N < 3:
        raise ValueError("two right branches exist only for N >= 3")
    mask = np.abs(grid.nodes) <= V.L + window
    limit = jost_right(V, SpectralParam(N, 0), 0, grid, config).values
    distances, gaps = [], []
    for eps in radii:
        sp = SpectralParam.on_ray(N, eps)
        theta0 = jost_right(V, sp, 0, grid, config).values
        theta1 = jost_right(V, sp, 1, grid, config).values
        distances.append(float(np.max(np.abs(theta0 - limit)[mask])))
        gaps.append(float(np.max(np.abs(theta0 - theta1)[mask])))
    rate = float(np.polyfit(np.log(radii), np.log(distances), 1)[0])
    return ThresholdContinuityReport(
        tuple(float(r) for r in radii), tuple(distances), tuple(gaps), rate
    )
