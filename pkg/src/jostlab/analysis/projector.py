"""
The finite-rank projector P onto span{xʲ} along the dual functionals φⱼ, the
rank-one regularization B₀ = φ₀⊗φ₀ of the resolvent, and the rescaled basis
ψ₁, ψ₂, ψ₃ that keeps (A + B₀ − z)⁻¹ bounded as ζ → 0 for A = (−i∂ₓ)³.

All pairings ⟨f, g⟩ = ∫f g dx are bilinear, matching B₀u = φ₀⟨φ₀, u⟩. The φⱼ
jump at ±1, so they are sampled with both one-sided limits there.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np

from jostlab.analysis.lap import kernel_at, weighted_function_norm
from jostlab.core.grid import Grid, OneSidedSamples
from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam, unit_root
from jostlab.diagnostics.errors import RankOneDenominatorError
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger, resolve_logger
from jostlab.solvers.free_operator import taylor_split
from jostlab.solvers.kernel_apply import SeparableKernel, free_separable_kernel
from jostlab.solvers.resolvent import relative_residual

DENOMINATOR_TOLERANCE = 1e-12

Sampled = np.ndarray | OneSidedSamples | Callable[[np.ndarray], np.ndarray]


def _monomial_integral(n: int) -> float:
    """∫_{−1}^{1} xⁿ dx."""
    return 0.0 if n % 2 else 2.0 / (n + 1)


def require_unit_nodes(grid: Grid) -> None:
    """±1 must be grid breakpoints."""
    for point in (-1.0, 1.0):
        if not any(abs(point - b) < 1e-12 for b in grid.breakpoints):
            raise ValueError(f"x={point} must be a grid breakpoint")


def as_samples(f: Sampled, grid: Grid) -> OneSidedSamples:
    if isinstance(f, OneSidedSamples):
        return f
    return OneSidedSamples.smooth(np.asarray(f(grid.nodes) if callable(f) else f))


def pairing(grid: Grid, f: OneSidedSamples, g: np.ndarray) -> complex:
    """⟨f, g⟩ for g continuous."""
    return (f * np.asarray(g)).integrate(grid)


@dataclass(frozen=True)
class Projector:
    """
    P f = Σⱼ φⱼ⟨xʲ, f⟩, j = 0..N−2, with φₖ polynomials on [−1, 1].

    The φₖ are the dual basis of the monomials in L²(−1, 1): for N = 3,
    φ₀ = χ/2 and φ₁ = (3/2)x·χ.
    """

    N: int = 3

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be at least 2, got {self.N}")

    @property
    def rank(self) -> int:
        return self.N - 1

    @cached_property
    def dual_coefficients(self) -> np.ndarray:
        """Row k holds the monomial coefficients of φₖ."""
        size = self.rank
        gram = np.array(
            [[_monomial_integral(j + m) for m in range(size)] for j in range(size)]
        )
        return np.linalg.inv(gram)

    def phi(self, k: int, x: np.ndarray | float) -> np.ndarray:
        """φₖ on the closed interval [−1, 1]."""
        x = np.asarray(x, dtype=float)
        values = np.polynomial.polynomial.polyval(x, self.dual_coefficients[k])
        return np.where(np.abs(x) <= 1.0, values, 0.0).astype(complex)

    def phi_samples(self, k: int, grid: Grid) -> OneSidedSamples:
        require_unit_nodes(grid)
        x = grid.nodes
        values = np.polynomial.polynomial.polyval(x, self.dual_coefficients[k])
        return OneSidedSamples.indicator_times(grid, values, -1.0, 1.0)

    def biorthogonality(self) -> np.ndarray:
        """⟨xʲ, φₖ⟩ from the closed-form monomial integrals; the identity matrix."""
        out = np.zeros((self.rank, self.rank))
        for j in range(self.rank):
            for k in range(self.rank):
                out[j, k] = sum(
                    c * _monomial_integral(j + m)
                    for m, c in enumerate(self.dual_coefficients[k])
                )
        return out

    def moments(self, f: Sampled, grid: Grid) -> np.ndarray:
        """⟨xʲ, f⟩ for j = 0..N−2."""
        f = as_samples(f, grid)
        x = grid.nodes
        return np.array([(f * x**j).integrate(grid) for j in range(self.rank)])

    def project(self, f: Sampled, grid: Grid) -> OneSidedSamples:
        moments = self.moments(f, grid)
        total = OneSidedSamples.smooth(np.zeros(grid.size, dtype=complex))
        for k in range(self.rank):
            total = total + self.phi_samples(k, grid) * moments[k]
        return total

    def complement(self, f: Sampled, grid: Grid) -> OneSidedSamples:
        """(I − P)f, whose moments 0..N−2 vanish."""
        return as_samples(f, grid) - self.project(f, grid)


def singular_annihilation(
    projector: Projector, sp: SpectralParam, f: Sampled, grid: Grid
) -> float:
    """sup_x |singular part of R(ζ) applied to (I − P)f|, which vanishes."""
    rest = projector.complement(f, grid)
    x = grid.nodes
    moments = np.array([(rest * x**k).integrate(grid) for k in range(sp.N - 1)])
    return float(np.max(np.abs(taylor_split(sp).apply_singular(x, moments))))


@dataclass(frozen=True, eq=False)
class RegularizedSolution:
    """u = R_{B₀}(z)f together with the pieces of the rank-one update."""

    kernel: SeparableKernel
    f: OneSidedSamples
    u: np.ndarray
    update: complex
    denominator: complex

    @property
    def grid(self) -> Grid:
        return self.kernel.grid


def regularized_resolvent(
    kernel: SeparableKernel,
    f: Sampled,
    projector: Projector | None = None,
    logger: RunLogger | None = None,
) -> RegularizedSolution:
    """
    Solve (A + B₀ − z)u = f by the rank-one update of the base resolvent R:

        u = Rf − Rφ₀·⟨φ₀, Rf⟩ / (1 + ⟨φ₀, Rφ₀⟩).
    """
    projector = projector or Projector(kernel.N)
    logger = resolve_logger(logger)
    grid = kernel.grid
    samples = as_samples(f, grid)
    phi0 = projector.phi_samples(0, grid)
    rf = kernel.apply(samples)[0]
    rphi = kernel.apply(phi0)[0]
    inner = pairing(grid, phi0, rphi)
    denominator = 1.0 + inner
    if abs(denominator) <= DENOMINATOR_TOLERANCE * max(1.0, abs(inner)):
        error = RankOneDenominatorError(
            "1 + <phi0, R phi0> vanishes at this z", z=kernel.z, denominator=denominator
        )
        logger.diagnostic(error, LogContext.LAP)
        raise error
    update = pairing(grid, phi0, rf) / denominator
    return RegularizedSolution(kernel, samples, rf - update * rphi, update, denominator)


def regularized_residual(
    solution: RegularizedSolution,
    projector: Projector | None = None,
    config: NumericsConfig | None = None,
) -> float:
    """Relative ‖(A + B₀ − z)u − f‖ on interior nodes."""
    config = config or NumericsConfig()
    kernel = solution.kernel
    projector = projector or Projector(kernel.N)
    grid = kernel.grid
    phi0 = projector.phi_samples(0, grid)
    image = kernel.operator_image(solution.f, config.SPLINE_DEGREE)
    image = image - solution.update * kernel.operator_image(phi0, config.SPLINE_DEGREE)
    image = image + phi0.left * pairing(grid, phi0, solution.u)
    return relative_residual(grid, image - solution.f.left, solution.f.left)


@dataclass(frozen=True)
class DenseCheck:
    """Rank-one update against a dense solve of (I + G·B₀)u = Gf."""

    algebraic_mismatch: float
    quadrature_mismatch: float

    def to_dict(self) -> dict[str, float]:
        return {
            "algebraic_mismatch": self.algebraic_mismatch,
            "quadrature_mismatch": self.quadrature_mismatch,
        }


def dense_solve_check(
    kernel: SeparableKernel, f: Sampled, projector: Projector | None = None
) -> DenseCheck:
    """
    The dense system uses the materialized kernel matrix with the grid
    quadrature weights. algebraic_mismatch compares it with the rank-one formula
    evaluated through the same matrix; quadrature_mismatch compares it with
    regularized_resolvent, which integrates cumulatively.
    """
    projector = projector or Projector(kernel.N)
    grid = kernel.grid
    samples = as_samples(f, grid)
    phi0 = projector.phi_samples(0, grid)
    phi_w = grid.weighted(phi0.left, phi0.right)
    G = kernel.matrix()
    rf = G @ grid.weighted(samples.left, samples.right)
    rphi = G @ phi_w
    system = np.eye(grid.size, dtype=complex) + np.outer(rphi, phi_w)
    dense = np.linalg.solve(system, rf)

    rank_one = rf - rphi * (phi_w @ rf) / (1.0 + phi_w @ rphi)
    cumulative = regularized_resolvent(kernel, samples, projector).u

    scale = max(float(np.max(np.abs(dense))), 1e-300)
    interior = grid.interior_mask()
    return DenseCheck(
        algebraic_mismatch=float(np.max(np.abs(rank_one - dense))) / scale,
        quadrature_mismatch=float(np.max(np.abs((cumulative - dense)[interior]))) / scale,
    )


@dataclass(frozen=True, eq=False)
class PsiBasis:
    """Θ₀, Θ₁ and ψ₁, ψ₂ with derivatives 0..3 at the nodes, shape (4, n)."""

    sp: SpectralParam
    grid: Grid
    theta0: np.ndarray
    theta1: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray


def _polynomial_derivatives(coeffs: Sequence[complex], x: np.ndarray) -> np.ndarray:
    """Rows 0..3: derivatives of Σ cₖxᵏ."""
    poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=complex))
    return np.stack([poly.deriv(k)(x) if k else poly(x) for k in range(4)])


def psi_basis(
    sp: SpectralParam, grid: Grid, config: NumericsConfig | None = None
) -> PsiBasis:
    """
    Θⱼ = R₁(ζ)φⱼ = R(ζ)φⱼ − Sφⱼ for the free operator, where the singular parts
    are Sφ₀ = −iα²/(3ζ²) + αx/(3ζ) and Sφ₁ = −α/(3ζ); then
    ψ₁ = −α/3 + ζΘ₁ and ψ₂ = αx/3 + ζΘ₀ − iαΘ₁.
    """
    if sp.N != 3:
        raise ValueError(f"the psi basis is built for N = 3, got {sp.N}")
    config = config or NumericsConfig()
    projector = Projector(3)
    kernel = free_separable_kernel(sp, grid)
    x = grid.nodes
    zeta, alpha = sp.zeta, unit_root(3)

    full = [
        kernel.apply_with_top(projector.phi_samples(k, grid), config.SPLINE_DEGREE)
        for k in range(2)
    ]
    singular0 = _polynomial_derivatives(
        [-1j * alpha**2 / (3 * zeta**2), alpha / (3 * zeta)], x
    )
    singular1 = _polynomial_derivatives([-alpha / (3 * zeta)], x)
    theta0 = full[0] - singular0
    theta1 = full[1] - singular1
    psi1 = _polynomial_derivatives([-alpha / 3], x) + zeta * theta1
    psi2 = (
        _polynomial_derivatives([0.0, alpha / 3], x)
        + zeta * theta0
        - 1j * alpha * theta1
    )
    return PsiBasis(sp, grid, theta0, theta1, psi1, psi2)


def _apply_free(derivs: np.ndarray, z: complex) -> np.ndarray:
    """((−i∂ₓ)³ − z)u from the stacked derivatives of u."""
    return 1j * derivs[3] - z * derivs[0]


@dataclass(frozen=True)
class PsiBasisReport:
    """Relative residuals of the identities satisfied by the rescaled basis."""

    zeta: complex
    phi0_relation: float
    phi1_relation: float
    combined_relation: float
    regularized_psi1: float
    regularized_psi2: float

    @property
    def worst(self) -> float:
        return max(
            self.phi0_relation,
            self.phi1_relation,
            self.combined_relation,
            self.regularized_psi1,
            self.regularized_psi2,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "zeta": {"re": self.zeta.real, "im": self.zeta.imag},
            "phi0_relation": self.phi0_relation,
            "phi1_relation": self.phi1_relation,
            "combined_relation": self.combined_relation,
            "regularized_psi1": self.regularized_psi1,
            "regularized_psi2": self.regularized_psi2,
        }


def psi_basis_audit(
    sp: SpectralParam, grid: Grid, config: NumericsConfig | None = None
) -> PsiBasisReport:
    """
    Residuals, relative to the right-hand sides, of

        (A − z)(−iα²/3 + αζx/3 + ζ²Θ₀) = ζ²φ₀,
        (A − z)(−α/3 + ζΘ₁) = ζφ₁,
        (A − z)ψ₂ = ζφ₀ − iαφ₁,
        (A + B₀ − z)ψ₁ = ζφ₁ − (α/3)φ₀ + ζB₀Θ₁,
        (A + B₀ − z)ψ₂ = ζφ₀ − iαφ₁ + B₀(ζΘ₀ − iαΘ₁).
    """
    basis = psi_basis(sp, grid, config)
    x = grid.nodes
    z, zeta, alpha = sp.z, sp.zeta, unit_root(3)
    projector = Projector(3)
    phi0_samples = projector.phi_samples(0, grid)
    phi0, phi1 = phi0_samples.left, projector.phi_samples(1, grid).left

    def residual(image: np.ndarray, target: np.ndarray) -> float:
        return relative_residual(grid, image - target, target)

    scaled0 = (
        _polynomial_derivatives([-1j * alpha**2 / 3, alpha * zeta / 3], x)
        + zeta**2 * basis.theta0
    )
    image1 = _apply_free(basis.psi1, z)
    image2 = _apply_free(basis.psi2, z)
    t1 = pairing(grid, phi0_samples, basis.theta1[0])
    t2 = pairing(
        grid, phi0_samples, zeta * basis.theta0[0] - 1j * alpha * basis.theta1[0]
    )
    return PsiBasisReport(
        zeta=zeta,
        phi0_relation=residual(_apply_free(scaled0, z), zeta**2 * phi0),
        phi1_relation=residual(image1, zeta * phi1),
        combined_relation=residual(image2, zeta * phi0 - 1j * alpha * phi1),
        regularized_psi1=residual(
            image1 + phi0 * pairing(grid, phi0_samples, basis.psi1[0]),
            zeta * phi1 - alpha / 3 * phi0 + zeta * t1 * phi0,
        ),
        regularized_psi2=residual(
            image2 + phi0 * pairing(grid, phi0_samples, basis.psi2[0]),
            zeta * phi0 - 1j * alpha * phi1 + t2 * phi0,
        ),
    )


@dataclass(frozen=True, eq=False)
class PsiSolution:
    """u = c₁ψ₁ + c₂ψ₂ + c₃ψ₃ with ψ₃ = R(ζ)(I − P)f."""

    coefficients: tuple[complex, complex, complex]
    u: np.ndarray


def psi_basis_solution(sp: SpectralParam, grid: Grid, f: Sampled) -> PsiSolution:
    """
    Solve (A + B₀ − z)u = f in the ψ basis. With pⱼ = ⟨xʲ, f⟩, c₃ = 1 and

        c₁ζ − iαc₂ = p₁,
        c₁(−α/3 + ζt₁) + c₂(ζ + t₂) = p₀ − t₃,

    where t₁ = ⟨φ₀, Θ₁⟩, t₂ = ⟨φ₀, ζΘ₀ − iαΘ₁⟩ and t₃ = ⟨φ₀, ψ₃⟩.
    """
    basis = psi_basis(sp, grid)
    projector = Projector(3)
    zeta, alpha = sp.zeta, unit_root(3)
    samples = as_samples(f, grid)
    phi0 = projector.phi_samples(0, grid)
    p0, p1 = projector.moments(samples, grid)
    psi3 = projected_resolvent(Potential.zero(), sp, grid, samples, projector)
    t1 = pairing(grid, phi0, basis.theta1[0])
    t2 = pairing(grid, phi0, zeta * basis.theta0[0] - 1j * alpha * basis.theta1[0])
    t3 = pairing(grid, phi0, psi3)
    system = np.array([[zeta, -1j * alpha], [-alpha / 3 + zeta * t1, zeta + t2]])
    c1, c2 = np.linalg.solve(system, np.array([p1, p0 - t3]))
    u = c1 * basis.psi1[0] + c2 * basis.psi2[0] + psi3
    return PsiSolution((complex(c1), complex(c2), 1.0 + 0j), u)


def projected_resolvent(
    V: Potential,
    sp: SpectralParam,
    grid: Grid,
    f: Sampled,
    projector: Projector | None = None,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> np.ndarray:
    """v(ζ) = R(ζ)(I − P)f."""
    projector = projector or Projector(sp.N)
    rest = projector.complement(f, grid)
    return kernel_at(V, sp, grid, config, logger).apply(rest)[0]


@dataclass(frozen=True)
class ConvergenceReport:
    """Weighted norms along a ray and of successive differences."""

    radii: tuple[float, ...]
    norms: tuple[float, ...]
    diffs: tuple[float, ...]

    @property
    def bounded(self) -> bool:
        return max(self.norms) <= 10.0 * min(self.norms)

    @property
    def cauchy(self) -> bool:
        """Differences shrink as ε → 0."""
        return len(self.diffs) < 2 or self.diffs[-1] <= self.diffs[0]

    def to_dict(self) -> dict[str, Any]:
        return {
            "radii": list(self.radii),
            "norms": list(self.norms),
            "diffs": list(self.diffs),
            "bounded": self.bounded,
            "cauchy": self.cauchy,
        }


def _ray_convergence(
    values: Callable[[SpectralParam], np.ndarray],
    grid: Grid,
    N: int,
    radii: Sequence[float],
    angle: float,
    sigma: float,
) -> ConvergenceReport:
    norms, diffs = [], []
    previous = None
    for eps in radii:
        u = values(SpectralParam.on_ray(N, eps, angle))
        norms.append(weighted_function_norm(grid, u, sigma))
        if previous is not None:
            diffs.append(weighted_function_norm(grid, u - previous, sigma))
        previous = u
    return ConvergenceReport(tuple(radii), tuple(norms), tuple(diffs))


def projected_resolvent_limit(
    V: Potential,
    grid: Grid,
    f: Sampled,
    N: int = 3,
    radii: Sequence[float] = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3),
    angle: float = math.pi / 6,
    s_prime: float = 2.0,
    config: NumericsConfig | None = None,
) -> ConvergenceReport:
    """v(ζ) stays bounded in L²_{−s′} and converges as ζ → 0."""
    projector = Projector(N)
    return _ray_convergence(
        lambda sp: projected_resolvent(V, sp, grid, f, projector, config),
        grid,
        N,
        radii,
        angle,
        s_prime,
    )


def regularized_norms(
    grid: Grid,
    f: Sampled,
    V: Potential | None = None,
    N: int = 3,
    radii: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
    angle: float = math.pi / 6,
    s_prime: float = 2.0,
    config: NumericsConfig | None = None,
) -> ConvergenceReport:
    """‖R_{B₀}(ζᴺ)f‖ in L²_{−s′} along the ray."""
    V = V or Potential.zero()
    return _ray_convergence(
        lambda sp: regularized_resolvent(kernel_at(V, sp, grid, config), f).u,
        grid,
        N,
        radii,
        angle,
        s_prime,
    )
