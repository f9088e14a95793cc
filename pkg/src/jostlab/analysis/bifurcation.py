"""
A family of small potentials V_κ carrying the eigenvalue κ³ that emerges from
the threshold as κ → 0.

Internally the construction uses the real equation −u‴ + Vu = zu with z = κ³.
u_κ = 1 + Σⱼ aⱼxʲ (j = 0..7) on [−1, 1] is matched up to the third derivative
to e^{−κx} on the right and Re e^{−ακx} on the left, both solutions of the free
equation, and V_κ = (u_κ‴ + κ³u_κ)/u_κ on [−1, 1], zero outside.

For the (−i∂ₓ)³ convention used everywhere else, w(x) = u_κ(−x) solves
((−i∂ₓ)³ + W − z)w = 0 with W(x) = iV_κ(−x) and z = iκ³ = ζ³,
ζ = κe^{iπ/6}. There w = (θ₀ + θ₁)/2 to the right of the support and w = γ₂
to the left, so the Jost family of W is dependent at that ζ.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from jostlab.analysis.models import BifurcationReport
from jostlab.core.grid import Grid
from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam, unit_root
from jostlab.diagnostics.errors import SingularMatchingError
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger, resolve_logger
from jostlab.solvers.jost import jost_family
from jostlab.solvers.resolvent import DeltaReport, delta

MATCHING_DEGREE = 7
INTERPOLATION_DEGREE = 40
MATCHING_CONDITION_LIMIT = 1e12
JOINTS = (1.0, -1.0)


def right_tail(x: np.ndarray | float, kappa: float, k: int = 0) -> np.ndarray:
    """k-th derivative of e^{−κx}."""
    x = np.asarray(x, dtype=float)
    return (-kappa) ** k * np.exp(-kappa * x)


def left_tail(x: np.ndarray | float, kappa: float, k: int = 0) -> np.ndarray:
    """k-th derivative of Re e^{−ακx}; bounded as x → −∞."""
    x = np.asarray(x, dtype=float)
    rate = -unit_root(3) * kappa
    return np.real(rate**k * np.exp(rate * x))


def _monomial_derivative(j: int, k: int, x: float) -> float:
    if j < k:
        return 0.0
    return math.factorial(j) / math.factorial(j - k) * x ** (j - k)


def matching_matrix() -> np.ndarray:
    """Rows (x = ±1, k = 0..3), columns the monomials x⁰..x⁷."""
    rows = []
    for joint in JOINTS:
        for k in range(4):
            rows.append(
                [_monomial_derivative(j, k, joint) for j in range(MATCHING_DEGREE + 1)]
            )
    return np.asarray(rows)


def matching_rhs(kappa: float) -> np.ndarray:
    rhs = []
    for joint in JOINTS:
        tail = right_tail if joint > 0 else left_tail
        for k in range(4):
            rhs.append(float(tail(joint, kappa, k)) - (1.0 if k == 0 else 0.0))
    return np.asarray(rhs)


@dataclass(frozen=True, eq=False)
class BifurcationMember:
    """u_κ and V_κ for one κ."""

    kappa: float
    coefficients: np.ndarray
    potential: Potential

    @property
    def polynomial(self) -> Polynomial:
        coef = np.array(self.coefficients, dtype=float)
        coef[0] += 1.0
        return Polynomial(coef)

    def u(self, x: np.ndarray | float, k: int = 0) -> np.ndarray:
        """k-th derivative of u_κ on the whole line."""
        x = np.asarray(x, dtype=float)
        inner = self.polynomial.deriv(k) if k else self.polynomial
        return np.where(
            x > 1.0,
            right_tail(x, self.kappa, k),
            np.where(x < -1.0, left_tail(x, self.kappa, k), inner(x)),
        )

    def sample(self, grid: Grid) -> np.ndarray:
        return self.u(grid.nodes)

    def min_u(self, samples: int = 2001) -> float:
        return float(np.min(self.polynomial(np.linspace(-1.0, 1.0, samples))))


def build_bifurcation_potential(
    kappa: float,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> BifurcationMember:
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    if not 0.0 <= kappa < config.KAPPA_0:
        raise ValueError(f"kappa must lie in [0, {config.KAPPA_0}), got {kappa}")

    matrix = matching_matrix()
    condition = float(np.linalg.cond(matrix))
    if not np.isfinite(condition) or condition > MATCHING_CONDITION_LIMIT:
        error = SingularMatchingError(
            "matching system is singular", kappa=kappa, condition=condition
        )
        logger.diagnostic(error, LogContext.BIFURCATION)
        raise error
    coefficients = np.linalg.solve(matrix, matching_rhs(kappa))

    u = Polynomial(np.concatenate([[1.0 + coefficients[0]], coefficients[1:]]))
    u3 = u.deriv(3)
    z = kappa**3

    def profile(t: np.ndarray) -> np.ndarray:
        return (u3(t) + z * u(t)) / u(t)

    if kappa == 0:
        potential = Potential.zero()
    else:
        potential = Potential.from_function(
            profile, -1.0, 1.0, degree=INTERPOLATION_DEGREE,
            label=f"bifurcation(kappa={kappa:g})",
        )
    member = BifurcationMember(kappa, coefficients, potential)
    logger.debug(
        f"Built bifurcation member kappa={kappa:g}",
        LogContext.BIFURCATION,
        {
            "max_coefficient": float(np.max(np.abs(coefficients))),
            "min_u": member.min_u(),
        },
    )
    return member


def matched_parameter(kappa: float) -> SpectralParam:
    """ζ = κe^{iπ/6}, so that ζ³ = iκ³."""
    return SpectralParam(3, kappa * cmath.exp(1j * math.pi / 6))


def mapped_potential(member: BifurcationMember) -> Potential:
    """W(x) = iV_κ(−x)."""
    return member.potential.reflected().scaled(-1j)


def mapped_delta(
    member: BifurcationMember,
    sp: SpectralParam,
    grid: Grid | None = None,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> DeltaReport:
    W = mapped_potential(member)
    grid = grid or Grid.for_potential(W, X=4.0)
    return delta(jost_family(W, sp, grid, config, logger), config=config)


def eigen_residual(member: BifurcationMember, samples: int = 4001) -> float:
    """sup |−u‴ + V_κu − κ³u| over [−3, 3]."""
    x = np.linspace(-3.0, 3.0, samples)
    u = member.u(x)
    residual = -member.u(x, 3) + member.potential(x) * u - member.kappa**3 * u
    return float(np.max(np.abs(residual)))


def joint_mismatch(member: BifurcationMember) -> float:
    """Largest jump of u_κ, u_κ′, u_κ″, u_κ‴ at x = ±1."""
    worst = 0.0
    for joint in JOINTS:
        tail = right_tail if joint > 0 else left_tail
        for k in range(4):
            inner = member.polynomial.deriv(k) if k else member.polynomial
            worst = max(worst, abs(inner(joint) - float(tail(joint, member.kappa, k))))
    return worst


def verify_bifurcation_eigenvalue(
    kappa: float,
    grid: Grid | None = None,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> BifurcationReport:
    """
    κ³ is an eigenvalue of −∂ₓ³ + V_κ: equation residual, C³ joints, decay on
    the right, boundedness on the left, and a dependent Jost family for the
    mapped (−i∂ₓ)³ problem at ζ = κe^{iπ/6}.
    """
    config = config or NumericsConfig.create_strict_config()
    logger = resolve_logger(logger)
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")

    with logger.timer_context(f"bifurcation kappa={kappa:g}", LogContext.BIFURCATION):
        member = build_bifurcation_potential(kappa, config, logger)
        right = np.abs(member.u(np.array([1.0, 2.0, 4.0, 8.0, 16.0])))
        left = np.abs(member.u(np.linspace(-50.0, -1.0, 500)))
        report = mapped_delta(member, matched_parameter(kappa), grid, config, logger)

    result = BifurcationReport(
        kappa=kappa,
        coefficients=[float(a) for a in member.coefficients],
        sup_potential=member.potential.sup_norm(),
        min_u=member.min_u(),
        eigen_residual=eigen_residual(member),
        joint_mismatch=joint_mismatch(member),
        decays_right=bool(np.all(np.diff(right) < 0)),
        bounded_left=bool(np.max(left) <= 1.0 + 1e-12),
        delta_abs=abs(report.value),
        delta_scale=report.scale,
        dependent=report.dependent,
    )
    logger.audit_result(f"bifurcation kappa={kappa:g} dependence", result.dependent)
    return result


def bifurcation_scaling(
    kappas: Sequence[float], config: NumericsConfig | None = None
) -> dict[str, list[float] | float]:
    """
    max|aⱼ|/κ and sup|V_κ| over a κ sweep with the fitted power of sup|V_κ|.
    """
    members = [build_bifurcation_potential(k, config) for k in kappas]
    ratios = [float(np.max(np.abs(m.coefficients))) / m.kappa for m in members]
    sups = [m.potential.sup_norm() for m in members]
    rate = float(np.polyfit(np.log(kappas), np.log(sups), 1)[0])
    return {
        "kappas": list(kappas),
        "coefficient_ratios": ratios,
        "sup_potential": sups,
        "min_u": [m.min_u() for m in members],
        "sup_rate": rate,
    }
