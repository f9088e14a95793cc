"""
Weighted operator norms L²_s → L²_{−s′} of discretized kernels and the
limiting absorption probe along a ray ζ → 0.

A kernel K sampled on grid nodes with quadrature weights w becomes the matrix
K̃ᵢⱼ = ⟨xᵢ⟩^{−s′}K(xᵢ, xⱼ)⟨xⱼ⟩^{−s}√(wᵢwⱼ), whose largest singular value
approximates the continuum operator norm.
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
from scipy.linalg import svdvals

from jostlab.analysis.models import ComplexValue, LapReport
from jostlab.core.grid import Grid
from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam, require_kernel_order
from jostlab.core.weights import WeightSpec, bracket
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger, resolve_logger
from jostlab.solvers.kernel_apply import SeparableKernel, free_separable_kernel
from jostlab.solvers.resolvent import (
    FittedBound,
    ResolventKernel,
    fit_constant,
    resolvent_kernel,
    sample_indices,
)

DEFAULT_LAP_RADII = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
DEFAULT_LAP_ANGLE = math.pi / 6
DIVERGENCE_EXPONENT = -0.5

KernelLike = (
    np.ndarray
    | ResolventKernel
    | SeparableKernel
    | Callable[[np.ndarray, np.ndarray], np.ndarray]
)


def materialize(K: KernelLike, grid: Grid) -> np.ndarray:
    """K(xᵢ, xⱼ) on all node pairs."""
    if isinstance(K, np.ndarray):
        if K.shape != (grid.size, grid.size):
            raise ValueError(
                f"kernel matrix must be {grid.size}x{grid.size}, got {K.shape}"
            )
        return K
    if isinstance(K, (ResolventKernel, SeparableKernel)):
        if not K.grid.same_nodes(grid):
            raise ValueError("kernel was assembled on a different grid")
        return K.matrix()
    x = grid.nodes
    return np.asarray(K(x[:, None], x[None, :]), dtype=complex)


@dataclass(frozen=True)
class NormEstimate:
    """Power-iteration estimate with the optional SVD cross-check."""

    value: float
    iterations: int
    converged: bool
    svd_value: float | None = None

    @property
    def crosscheck_error(self) -> float | None:
        if self.svd_value is None:
            return None
        if self.svd_value == 0:
            return abs(self.value)
        return abs(self.value - self.svd_value) / self.svd_value


def power_norm(
    matrix: np.ndarray, tol: float = 1e-6, max_iter: int = 500
) -> tuple[float, int, bool]:
    """
    Largest singular value by power iteration on MᴴM.

    The start vector is the column sums of |M|, so the estimate is
    deterministic.
    """
    x = np.sum(np.abs(matrix), axis=0).astype(complex)
    norm_x = float(np.linalg.norm(x))
    if norm_x == 0:
        return 0.0, 0, True
    x /= norm_x
    estimate = float(np.linalg.norm(matrix @ x))
    for it in range(1, max_iter + 1):
        y = matrix.conj().T @ (matrix @ x)
        norm_y = float(np.linalg.norm(y))
        if norm_y == 0:
            return 0.0, it, True
        x = y / norm_y
        previous, estimate = estimate, float(np.linalg.norm(matrix @ x))
        if abs(estimate - previous) <= tol * estimate:
            return estimate, it, True
    return estimate, max_iter, False


@dataclass(frozen=True, eq=False)
class WeightedKernelOperator:
    """The weighted matrix K̃ of a kernel on a grid."""

    grid: Grid
    weights: WeightSpec
    matrix: np.ndarray

    @classmethod
    def build(
        cls, K: KernelLike, grid: Grid, weights: WeightSpec
    ) -> "WeightedKernelOperator":
        x = grid.nodes
        root_w = np.sqrt(grid.weights)
        left = weights.target_factor(x) * root_w
        right = weights.source_factor(x) * root_w
        values = materialize(K, grid)
        return cls(grid, weights, left[:, None] * values * right[None, :])

    def norm(self, config: NumericsConfig | None = None) -> NormEstimate:
        config = config or NumericsConfig()
        value, iterations, converged = power_norm(
            self.matrix, config.POWER_ITERATION_TOL, config.POWER_ITERATION_MAX_ITER
        )
        svd_value = None
        if self.grid.size < config.SVD_CROSSCHECK_LIMIT:
            svd_value = float(svdvals(self.matrix)[0]) if self.matrix.size else 0.0
        return NormEstimate(value, iterations, converged, svd_value)


def weighted_norm(
    K: KernelLike,
    grid: Grid,
    weights: WeightSpec,
    config: NumericsConfig | None = None,
) -> float:
    """‖K‖ as an operator L²_s → L²_{−s′} (with the e^{−ν|x|} factors when ν > 0)."""
    return WeightedKernelOperator.build(K, grid, weights).norm(config).value


def weighted_function_norm(
    grid: Grid, u: np.ndarray, sigma: float, nu: float = 0.0
) -> float:
    """‖⟨x⟩^{−σ}e^{−ν|x|}u‖ in L²."""
    x = grid.nodes
    density = np.abs(bracket(x, -sigma) * np.exp(-nu * np.abs(x)) * u) ** 2
    return math.sqrt(max(float(np.real(grid.integrate(density))), 0.0))


def kernel_at(
    V: Potential,
    sp: SpectralParam,
    grid: Grid,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> SeparableKernel:
    """The resolvent kernel at ζ; the free operator uses the closed-form factors."""
    if V.is_zero:
        return free_separable_kernel(sp, grid)
    return resolvent_kernel(V, sp, grid, config=config, logger=logger).separable


def fit_exponent(radii: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log values against log radii."""
    values = np.maximum(np.asarray(values, dtype=float), 1e-300)
    return float(np.polyfit(np.log(np.asarray(radii)), np.log(values), 1)[0])


def threshold_kernel_bound(
    kernel: SeparableKernel,
    exponent: float,
    samples: int = 60,
    slack: float = 1.1,
    name: str = "threshold_kernel_bound",
) -> FittedBound:
    """
    |G(x, y)| ≤ C·min(⟨x⟩, ⟨y⟩)^p with C from the calibration nodes, checked
    on the interleaved fresh nodes at slack·C.
    """
    calib, fresh = sample_indices(kernel.grid, samples)
    x = kernel.grid.nodes

    def ratios(idx: np.ndarray) -> np.ndarray:
        values = np.abs(kernel.evaluate(idx[:, None], idx[None, :]))
        smaller = np.minimum(bracket(x[idx])[:, None], bracket(x[idx])[None, :])
        return values / smaller**exponent

    return fit_constant(name, ratios(calib), ratios(fresh), slack)


def lap_probe(
    V: Potential,
    grid: Grid,
    weights: WeightSpec,
    N: int = 3,
    radii: Sequence[float] | None = None,
    angle: float | None = None,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> LapReport:
    """
    Weighted norms of G(εe^{iφ}) and of successive differences along the ray.

    A fitted exponent below DIVERGENCE_EXPONENT means the norms blow up as
    ε → 0 (virtual level); otherwise the family is bounded and Cauchy (LAP).
    """
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    require_kernel_order(N)
    radii = tuple(radii or DEFAULT_LAP_RADII)
    angle = DEFAULT_LAP_ANGLE if angle is None else angle
    if not weights.is_admissible(N):
        logger.warning(
            f"weights s={weights.s}, s'={weights.s_prime} are not admissible for N={N}",
            LogContext.LAP,
        )

    zetas, norms, diffs = [], [], []
    previous: np.ndarray | None = None
    smallest: SeparableKernel | None = None
    with logger.timer_context("lap probe", LogContext.LAP):
        for eps in radii:
            sp = SpectralParam.on_ray(N, eps, angle)
            kernel = kernel_at(V, sp, grid, config, logger)
            matrix = kernel.matrix()
            norms.append(weighted_norm(matrix, grid, weights, config))
            if previous is not None:
                diffs.append(weighted_norm(previous - matrix, grid, weights, config))
            previous = matrix
            zetas.append(sp.zeta)
            if smallest is None or eps <= min(radii):
                smallest = kernel

    exponent = fit_exponent(radii, norms)
    verdict = "virtual_level" if exponent < DIVERGENCE_EXPONENT else "LAP"
    bound: dict[str, Any] | None = None
    if smallest is not None:
        slack = config.CONSTANT_SLACK
        general = threshold_kernel_bound(smallest, N - 1, slack=slack)
        regular = threshold_kernel_bound(
            smallest, N - 2, slack=slack, name="regular_threshold_kernel_bound"
        )
        # a regular threshold is held to the sharper min(⟨x⟩,⟨y⟩)^{N−2} bound
        primary = regular if verdict == "LAP" else general
        bound = {
            "exponent": N - 2 if verdict == "LAP" else N - 1,
            "constant": primary.constant,
            "fresh_ratio": primary.fresh_ratio,
            "passed": primary.passed,
            "general_exponent": N - 1,
            "general_passed": general.passed,
            "regular_exponent": N - 2,
            "regular_constant": regular.constant,
            "regular_fresh_ratio": regular.fresh_ratio,
            "regular_passed": regular.passed,
        }
    logger.info(
        f"LAP probe verdict: {verdict}",
        LogContext.LAP,
        {"fit_exponent": exponent, "norms": norms},
    )
    return LapReport(
        zetas=[ComplexValue.of(z) for z in zetas],
        norms=norms,
        diffs=diffs,
        verdict=verdict,
        fit_exponent=exponent,
        s=weights.s,
        s_prime=weights.s_prime,
        nu=weights.nu,
        kernel_bound=bound,
    )


@dataclass(frozen=True)
class RefinementReport:
    """Norms on a grid and on its refinement, with the Richardson extrapolation."""

    h: tuple[float, float]
    norms: tuple[float, float]
    extrapolated: float
    relative_change: float
    extrapolation_gap: float
    tolerance: float = 0.05

    @property
    def passed(self) -> bool:
        return (
            self.relative_change <= self.tolerance
            and self.extrapolation_gap <= self.tolerance
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "h": list(self.h),
            "norms": list(self.norms),
            "extrapolated": self.extrapolated,
            "relative_change": self.relative_change,
            "extrapolation_gap": self.extrapolation_gap,
            "passed": self.passed,
        }


def richardson_refinement(
    norm_on_grid: Callable[[float], float],
    h: float,
    ratio: float = 2.0,
    order: int = 2,
    tolerance: float = 0.05,
) -> RefinementReport:
    """
    Compare norm_on_grid(h) with norm_on_grid(h/ratio) and with the Richardson
    extrapolation assuming an error of order h^order.
    """
    coarse = norm_on_grid(h)
    fine = norm_on_grid(h / ratio)
    extrapolated = fine + (fine - coarse) / (ratio**order - 1)
    scale = max(abs(fine), 1e-300)
    return RefinementReport(
        h=(h, h / ratio),
        norms=(coarse, fine),
        extrapolated=extrapolated,
        relative_change=abs(fine - coarse) / scale,
        extrapolation_gap=abs(extrapolated - fine) / max(abs(extrapolated), 1e-300),
        tolerance=tolerance,
    )
