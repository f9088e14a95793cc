"""
Classification of the threshold z₀ = 0.

At ζ = 0 every Jost solution is polynomial outside supp V: γ₁(x, 0) equals
a + bx + cx² for x ≥ L (N = 3) and a + bx for N = 2. The leading coefficient
decides the dichotomy: it is nonzero for a regular threshold, where Δ(ζ) has a
zero of order exactly N − 2, and zero for a virtual level, where the order is
higher and γ₁(·, 0) is the virtual state. Both criteria are computed
independently and must agree.
"""

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from jostlab.analysis.models import ComplexValue, ThresholdReport
from jostlab.core.grid import Grid
from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam, require_kernel_order, unit_root
from jostlab.core.weights import bracket
from jostlab.diagnostics.errors import CriteriaDisagreementError, NotAVirtualLevelError
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger, resolve_logger
from jostlab.solvers.jost import JostSolution, jost_family, solve_jost
from jostlab.solvers.resolvent import delta, relative_residual

DEFAULT_EPS_RAY = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
TWO_SIDED_DEGREE = 64


@dataclass(frozen=True)
class GrowthCoefficients:
    """
    Polynomial form of a ζ = 0 Jost solution outside the support.

    coeffs[j] multiplies xʲ on the side opposite to the prescribed one; residual
    is the largest deviation of the samples from that polynomial there.
    """

    side: Literal["left", "right"]
    coeffs: tuple[complex, ...]
    residual: float

    @property
    def a(self) -> complex:
        return self.coeffs[0]

    @property
    def b(self) -> complex:
        return self.coeffs[1]

    @property
    def c(self) -> complex:
        return self.coeffs[2] if len(self.coeffs) > 2 else 0j

    @property
    def top(self) -> complex:
        """The coefficient of x^{N−1}."""
        return self.coeffs[-1]

    def is_top_zero(self, tolerance: float) -> bool:
        lower = max([abs(c) for c in self.coeffs[:-1]] + [1.0])
        return abs(self.top) <= tolerance * lower

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return Polynomial(np.asarray(self.coeffs))(np.asarray(x, dtype=float))


def threshold_solution(
    V: Potential,
    N: int,
    side: Literal["left", "right"],
    grid: Grid,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> JostSolution:
    """γ₁(·, 0) (side "left", ≡ 1 left of −L) or θ(·, 0) (side "right")."""
    return solve_jost(V, N, 0j, side, grid, config, logger)


def taylor_to_power(derivs: np.ndarray, center: float) -> tuple[complex, ...]:
    """Σₖ dₖ(x − center)ᵏ/k! in powers of x."""
    shift = Polynomial([-center, 1.0])
    total = Polynomial([0j])
    for k, d in enumerate(derivs):
        total = total + complex(d) / math.factorial(k) * shift**k
    coeffs = np.zeros(len(derivs), dtype=complex)
    coeffs[: len(total.coef)] = total.coef[: len(derivs)]
    return tuple(complex(c) for c in coeffs)


def growth_coefficients(
    V: Potential,
    side: Literal["left", "right"],
    grid: Grid,
    N: int = 3,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> GrowthCoefficients:
    """
    Side "left": (a, b, c) of γ₁(x, 0) for x ≥ L, read from the Taylor data at
    +L (c = u″(L)/2, b = u′(L) − 2cL, a = u(L) − bL − cL² for N = 3).
    Side "right": the mirrored (A, B, C) of θ(x, 0) for x ≤ −L.
    """
    sol = threshold_solution(V, N, side, grid, config, logger)
    edge = V.L if side == "left" else -V.L
    coeffs = taylor_to_power(sol.at(edge), edge)
    poly = Polynomial(np.asarray(coeffs))
    far = grid.nodes >= V.L if side == "left" else grid.nodes <= -V.L
    deviation = np.abs(sol.values[far] - poly(grid.nodes[far]))
    scale = max(1.0, float(np.max(np.abs(sol.values[far]))))
    return GrowthCoefficients(side, coeffs, float(np.max(deviation)) / scale)


def reflected_growth_check(
    V: Potential, grid: Grid, config: NumericsConfig | None = None
) -> float:
    """
    |growth(−V(−x), right) − (a, −b, c)| for (a, b, c) = growth(V, left), N = 3.

    The substitution x → −x maps γ₁(·, 0) of V onto θ(·, 0) of −V(−x).
    """
    direct = growth_coefficients(V, "left", grid, 3, config)
    mirrored = growth_coefficients(V.reflected(), "right", grid, 3, config)
    expected = np.asarray([direct.a, -direct.b, direct.c])
    scale = max(1.0, float(np.max(np.abs(expected))))
    return float(np.max(np.abs(np.asarray(mirrored.coeffs) - expected))) / scale


def fit_zero_order(eps: Sequence[float], values: Sequence[complex]) -> float:
    """Slope of log|Δ| against log ε."""
    magnitudes = np.maximum(np.abs(np.asarray(values)), 1e-300)
    return float(np.polyfit(np.log(np.asarray(eps)), np.log(magnitudes), 1)[0])


def leading_coefficient_closed_form(growth: GrowthCoefficients, N: int) -> complex:
    """
    Leading Taylor coefficient of Δ at ζ = 0 for a regular threshold:
    2c·i(α − 1) for N = 3 (coefficient of ζ), b for N = 2 (value at 0).
    """
    if N == 3:
        return 2 * growth.c * 1j * (unit_root(3) - 1)
    return growth.b


def classify_threshold(
    V: Potential,
    grid: Grid,
    eps_ray: Sequence[float] | None = None,
    N: int = 3,
    angle: float | None = None,
    raise_on_disagreement: bool = True,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> ThresholdReport:
    """
    Regular point or virtual level, from the growth coefficient of γ₁(·, 0) and,
    independently, from the zero order of Δ(εe^{iφ}) along the ray.
    """
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    require_kernel_order(N)
    eps_ray = tuple(eps_ray or DEFAULT_EPS_RAY)
    logger.info(
        f"Classifying threshold for {V.label or 'potential'}", LogContext.THRESHOLD
    )

    with logger.timer_context("threshold classification", LogContext.THRESHOLD):
        growth = growth_coefficients(V, "left", grid, N, config, logger)
        mirrored = growth_coefficients(V, "right", grid, N, config, logger)
        deltas = []
        for eps in eps_ray:
            sp = SpectralParam.on_ray(N, eps, angle)
            deltas.append(delta(jost_family(V, sp, grid, config, logger), config=config))

    top_zero = growth.is_top_zero(config.C_TOLERANCE)
    values = [d.value for d in deltas]
    slope = fit_zero_order(eps_ray, values)
    order = int(round(slope))
    regular_order = N - 2
    agree = (top_zero == (order > regular_order)) and abs(
        slope - order
    ) <= config.ORDER_TOLERANCE
    classification = "virtual_level" if top_zero else "regular"

    smallest = int(np.argmin(eps_ray))
    zeta_small = SpectralParam.on_ray(N, eps_ray[smallest], angle).zeta
    leading = values[smallest] / zeta_small ** max(order, 0)
    expected = None if top_zero else leading_coefficient_closed_form(growth, N)

    two_sided = False
    if top_zero and N % 2 == 1:
        # θ(x, 0) = A + Bx + Cx² left of the support; C = 0 makes −V(−x) critical too
        two_sided = mirrored.is_top_zero(config.C_TOLERANCE)

    report = ThresholdReport(
        classification=classification,
        N=N,
        a=ComplexValue.of(growth.a),
        b=ComplexValue.of(growth.b),
        c=ComplexValue.of(growth.c),
        mirrored=[ComplexValue.of(c) for c in mirrored.coeffs],
        delta_zero_order=order,
        order_fit=slope,
        top_is_zero=top_zero,
        criteria_agree=agree,
        two_sided=two_sided,
        leading_coefficient=ComplexValue.of(leading),
        expected_leading_coefficient=None if expected is None else ComplexValue.of(expected),
        eps_ray=list(eps_ray),
        delta_abs=[abs(v) for v in values],
        residuals={
            "growth_exactness": growth.residual,
            "mirrored_exactness": mirrored.residual,
            "delta_spread": max(d.spread for d in deltas),
        },
    )
    logger.info(
        f"Threshold is {classification}",
        LogContext.THRESHOLD,
        {"order_fit": slope, "c": abs(growth.top), "two_sided": two_sided},
    )
    if not agree:
        error = CriteriaDisagreementError(
            "growth coefficient and zero order of Delta disagree",
            top=growth.top,
            order_fit=slope,
        )
        logger.diagnostic(error, LogContext.THRESHOLD)
        if raise_on_disagreement:
            raise error
    return report


@dataclass(frozen=True, eq=False)
class VirtualState:
    """Ψ = γ₁(·, 0), normalized by Ψ(−L) = 1, with its audits."""

    x: np.ndarray
    psi: np.ndarray
    equation_residual: float
    sup_left: float
    linear_constant: float
    growth_exponent: float

    def passed(self, residual_tolerance: float = 1e-8) -> bool:
        return (
            self.equation_residual <= residual_tolerance
            and np.isfinite(self.sup_left)
            and self.growth_exponent <= 1.05
        )


def extract_virtual_state(
    V: Potential,
    grid: Grid,
    N: int = 3,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> VirtualState:
    """
    Ψ with the checks ((−i∂ₓ)ᴺ + V)Ψ = 0, sup_{x≤0}|Ψ| < ∞, |Ψ(x)| ≤ C⟨x⟩ for
    x ≥ 0 and a log-log growth exponent of |Ψ| at large x.
    """
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    sol = threshold_solution(V, N, "left", grid, config, logger)
    edge = V.L
    growth = GrowthCoefficients("left", taylor_to_power(sol.at(edge), edge), 0.0)
    if not growth.is_top_zero(config.C_TOLERANCE):
        error = NotAVirtualLevelError(
            "threshold is regular; no virtual state", top=growth.top
        )
        logger.diagnostic(error, LogContext.THRESHOLD)
        raise error

    x = grid.nodes
    norm = sol.at(-V.L)[0]
    samples = sol.samples / norm
    psi = samples[0]
    top = grid.derivative(samples[N - 1], config.SPLINE_DEGREE)
    residual = (-1j) ** N * top + V(x) * psi
    scale = np.full(grid.size, np.max(np.abs(psi)))
    equation = relative_residual(grid, residual, scale)

    right = x >= 0
    linear = float(np.max(np.abs(psi[right]) / bracket(x[right], 1.0)))
    far = x >= V.L + 1.0
    if np.count_nonzero(far) >= 2 and np.all(np.abs(psi[far]) > 0):
        exponent = float(
            np.polyfit(np.log(bracket(x[far], 1.0)), np.log(np.abs(psi[far])), 1)[0]
        )
    else:
        exponent = 0.0
    return VirtualState(
        x=x,
        psi=psi,
        equation_residual=equation,
        sup_left=float(np.max(np.abs(psi[x <= 0]))),
        linear_constant=linear,
        growth_exponent=exponent,
    )


def build_two_sided_potential(amplitude: float = 0.5, width: float = 1.0) -> Potential:
    """
    V = −iΨ‴/Ψ for Ψ = 1 + amplitude·(1 − (x/width)²)⁴ on [−width, width].

    Ψ is C³, equals 1 outside the support and solves ((−i∂ₓ)³ + V)Ψ = 0, so it
    is a bounded threshold solution on both sides.
    """
    if amplitude <= -1.0:
        raise ValueError(f"amplitude must exceed -1 so that Psi > 0, got {amplitude}")
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    bump = Polynomial([1.0, 0.0, -1.0 / width**2]) ** 4
    psi = 1.0 + amplitude * bump
    psi3 = psi.deriv(3)

    def profile(t: np.ndarray) -> np.ndarray:
        return -1j * psi3(t) / psi(t)

    return Potential.from_function(
        profile, -width, width, degree=TWO_SIDED_DEGREE, label="two_sided"
    )
