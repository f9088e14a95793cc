"""
Model kernels that dominate the threshold remainder on x, y ≥ 1:

    K₁(x, y) = 1_{ℝ₊}(x)⟨y⟩^{N−1}1_{[1, x]}(y),
    K₂(x, y) = 1_{[1, y]}(x)⟨x⟩^{N−1}1_{ℝ₊}(y).

Both are bounded L²_s → L²_{−s′} exactly when the weights beat the polynomial
growth; the audit watches their weighted norms as the domain grows.
"""

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from jostlab.analysis.lap import WeightedKernelOperator
from jostlab.core.grid import Grid
from jostlab.core.weights import WeightSpec, bracket
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger, resolve_logger

DYADIC_STEP = 0.1
BOUNDED_SPREAD = 0.10
GROWTH_RATIO = 2.0


def model_kernel_lower(N: int):
    """K₁ as a function of (x, y)."""

    def kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        inside = (x >= 0) & (y >= 1.0) & (y <= x)
        return np.where(inside, bracket(y, N - 1), 0.0)

    return kernel


def model_kernel_upper(N: int):
    """K₂ as a function of (x, y)."""

    def kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        inside = (y >= 0) & (x >= 1.0) & (x <= y)
        return np.where(inside, bracket(x, N - 1), 0.0)

    return kernel


@dataclass(frozen=True)
class DyadicReport:
    """Weighted norms of K₁ and K₂ on [−X, X] for each X."""

    N: int
    weights: WeightSpec
    domains: tuple[float, ...]
    lower_norms: tuple[float, ...]
    upper_norms: tuple[float, ...]

    @property
    def growth_ratio(self) -> float:
        """Largest norm at the biggest domain over the norm at the smallest."""
        ratios = []
        for norms in (self.lower_norms, self.upper_norms):
            if norms[0] > 0:
                ratios.append(norms[-1] / norms[0])
        return max(ratios, default=1.0)

    @property
    def spread(self) -> float:
        """Relative spread of the norms across domains."""
        worst = 0.0
        for norms in (self.lower_norms, self.upper_norms):
            top = max(norms)
            if top > 0:
                worst = max(worst, (top - min(norms)) / top)
        return worst

    @property
    def bounded(self) -> bool:
        return self.spread <= BOUNDED_SPREAD

    @property
    def diverging(self) -> bool:
        return self.growth_ratio > GROWTH_RATIO

    def to_dict(self) -> dict[str, Any]:
        return {
            "N": self.N,
            "s": self.weights.s,
            "s_prime": self.weights.s_prime,
            "domains": list(self.domains),
            "lower_norms": list(self.lower_norms),
            "upper_norms": list(self.upper_norms),
            "growth_ratio": self.growth_ratio,
            "bounded": self.bounded,
        }


def dyadic_bound_audit(
    N: int,
    weights: WeightSpec,
    domains: Sequence[float] = (10.0, 20.0, 40.0),
    h: float = DYADIC_STEP,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> DyadicReport:
    """
    Admissible weights (s, s′ > N − 3/2) keep both norms within ±10% as X
    grows; for s = s′ = 1 at N = 3 they more than double from X = 10 to 40.
    """
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    lower, upper = [], []
    pairs = ((model_kernel_lower(N), lower), (model_kernel_upper(N), upper))
    for X in domains:
        grid = Grid.build(X, h, breakpoints=(0.0, 1.0))
        for kernel, out in pairs:
            estimate = WeightedKernelOperator.build(kernel, grid, weights).norm(config)
            out.append(estimate.value)
        logger.debug(
            f"Dyadic kernels at X={X:g}",
            LogContext.AUDIT,
            {"lower": lower[-1], "upper": upper[-1], "nodes": grid.size},
        )
    report = DyadicReport(N, weights, tuple(domains), tuple(lower), tuple(upper))
    logger.audit_result(
        f"dyadic kernels s={weights.s:g}, s'={weights.s_prime:g}",
        report.bounded,
        report.spread,
    )
    return report
