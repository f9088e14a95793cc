"""
Resolvent kernel of (−i∂ₓ)ᴺ + V − ζᴺ assembled from Jost solutions.

For x ≥ y the kernel is a combination of the right solutions θₚ(x), for x < y
of the left solutions γ_q(x). The coefficients solve, at every y, the N×N system
expressing continuity of ∂ₓᵏG for k ≤ N−2 across x = y and a jump κ in
∂ₓ^{N−1}G. Its determinant is ±Δ(ζ), the Wronskian of the Jost family, which
depends on ζ only. κ is calibrated once per N on the free operator.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Sequence

import numpy as np

from jostlab.core.grid import Grid
from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam, require_kernel_order
from jostlab.core.weights import bracket as japanese_bracket
from jostlab.diagnostics.errors import DependenceError, GridMismatchError
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger, resolve_logger
from jostlab.solvers.jost import JostSolution, jost_family, jost_right
from jostlab.solvers.kernel_apply import SeparableKernel

JUMP_CANDIDATES = (1.0 + 0j, -1.0 + 0j, 1j, -1j)


def _require_shared_grid(solutions: Sequence[JostSolution]) -> Grid:
    grid = solutions[0].grid
    for sol in solutions[1:]:
        if not grid.same_nodes(sol.grid):
            raise GridMismatchError(
                "Jost solutions live on different grids",
                sizes=[s.grid.size for s in solutions],
            )
    return grid


@dataclass(frozen=True, eq=False)
class Bracket:
    """{f, g}(x) = f(x)g′(x) − f′(x)g(x) at the grid nodes."""

    f: JostSolution
    g: JostSolution
    values: np.ndarray

    @property
    def grid(self) -> Grid:
        return self.f.grid

    def at(self, x: float) -> complex:
        return complex(self.values[self.grid.index_of(x)])


def bracket(f: JostSolution, g: JostSolution) -> Bracket:
    _require_shared_grid([f, g])
    values = f.values * g.derivative(1) - f.derivative(1) * g.values
    return Bracket(f, g, values)


@dataclass(frozen=True)
class DeltaReport:
    """Δ(ζ) evaluated at several probe nodes."""

    value: complex
    values: tuple[complex, ...]
    probes: tuple[float, ...]
    spread: float
    scale: float
    dependent: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "abs": abs(self.value),
            "spread": self.spread,
            "scale": self.scale,
            "dependent": self.dependent,
            "probes": list(self.probes),
        }


def default_probes(grid: Grid, support_radius: float, count: int = 10) -> np.ndarray:
    reach = min(support_radius + 1.0, 0.9 * grid.X)
    return np.linspace(-reach, reach, count)


def delta(
    solutions: Sequence[JostSolution],
    x_probe: Sequence[float] | None = None,
    config: NumericsConfig | None = None,
) -> DeltaReport:
    """
    Δ = det[u_j^{(k)}(x)] for the family (θ…, γ…), k = 0..N−1.

    Probe points snap to the nearest grid node. Δ counts as numerically
    dependent when |Δ| falls below DEPENDENCE_THRESHOLD times the product of
    the column norms.
    """
    config = config or NumericsConfig()
    grid = _require_shared_grid(solutions)
    N = solutions[0].N
    if len(solutions) != N:
        raise ValueError(
            f"need {N} solutions for the determinant, got {len(solutions)}"
        )
    if x_probe is None:
        x_probe = default_probes(grid, solutions[0].support_radius)
    idx = np.unique([int(np.argmin(np.abs(grid.nodes - x))) for x in x_probe])
    # (probe, k, column)
    frames = np.stack([s.samples[:, idx] for s in solutions], axis=-1)
    frames = frames.transpose(1, 0, 2)
    values = np.linalg.det(frames)
    scales = np.prod(np.linalg.norm(frames, axis=1), axis=-1)
    value = complex(np.mean(values))
    magnitude = abs(value)
    if magnitude > 0:
        spread = float(np.max(np.abs(values - value)) / magnitude)
    else:
        spread = float(np.max(np.abs(values)))
    scale = float(np.mean(scales))
    return DeltaReport(
        value=value,
        values=tuple(complex(v) for v in values),
        probes=tuple(float(x) for x in grid.nodes[idx]),
        spread=spread,
        scale=scale,
        dependent=magnitude < config.DEPENDENCE_THRESHOLD * scale,
    )


def free_delta(sp: SpectralParam) -> complex:
    """Vandermonde determinant ∏_{j<k}(iαᵏζ − iαʲζ) of the free Jost family."""
    roots = 1j * sp.roots
    return complex(
        np.prod([roots[k] - roots[j] for j in range(sp.N) for k in range(j + 1, sp.N)])
    )


@dataclass(frozen=True, eq=False)
class ResolventKernel:
    """G(x, y; ζ) on a grid, with Δ(ζ) and the coefficient functions."""

    sp: SpectralParam
    potential: Potential
    solutions: tuple[JostSolution, ...]
    delta: DeltaReport
    right_coeffs: np.ndarray
    left_coeffs: np.ndarray
    jump: complex
    separable: SeparableKernel = field(repr=False)

    @property
    def N(self) -> int:
        return self.sp.N

    @property
    def grid(self) -> Grid:
        return self.separable.grid

    @property
    def right_solutions(self) -> tuple[JostSolution, ...]:
        return self.solutions[: len(self.sp.right_branches)]

    @property
    def left_solutions(self) -> tuple[JostSolution, ...]:
        return self.solutions[len(self.sp.right_branches) :]

    def __call__(self, x: np.ndarray | float, y: np.ndarray | float) -> np.ndarray:
        """G at grid nodes x, y (values must be nodes)."""
        xi = self.grid.indices_of(np.atleast_1d(x))
        yi = self.grid.indices_of(np.atleast_1d(y))
        out = self.separable.evaluate(xi, yi)
        return complex(out[0]) if np.ndim(x) == 0 and np.ndim(y) == 0 else out

    def matrix(self) -> np.ndarray:
        return self.separable.matrix()

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.separable.apply(f)


def _frames(solutions: Sequence[JostSolution], n_right: int) -> np.ndarray:
    """Per-node system matrices with columns θ…, −γ…, shape (n, N, N)."""
    columns = [
        s.samples if k < n_right else -s.samples for k, s in enumerate(solutions)
    ]
    return np.stack(columns, axis=-1).transpose(1, 0, 2)


def assemble_kernel(
    solutions: Sequence[JostSolution],
    potential: Potential,
    jump: complex | None = None,
    x_probe: Sequence[float] | None = None,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> ResolventKernel:
    """
    Assemble G from the Jost family (right solutions first, then left ones).

    Raises DependenceError when Δ(ζ) is numerically zero, i.e. z is an
    eigenvalue or ζ sits at the threshold.
    """
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    solutions = tuple(solutions)
    sp = solutions[0].sp
    if sp is None:
        raise ValueError("kernel assembly needs Jost solutions tagged with a branch")
    N = sp.N
    require_kernel_order(N)
    n_right = len(sp.right_branches)
    sides = [s.side for s in solutions]
    if sides != ["right"] * n_right + ["left"] * (N - n_right):
        raise ValueError(f"expected {n_right} right then {N - n_right} left solutions")
    grid = _require_shared_grid(solutions)

    report = delta(solutions, x_probe, config)
    if report.dependent:
        error = DependenceError(
            "Jost solutions are numerically dependent",
            delta=report.value,
            scale=report.scale,
            zeta=sp.zeta,
        )
        logger.diagnostic(error, LogContext.RESOLVENT)
        raise error
    if jump is None:
        jump = calibrate_jump_constant(N)

    rhs = np.zeros((grid.size, N, 1), dtype=complex)
    rhs[:, N - 1, 0] = jump
    coeffs = np.linalg.solve(_frames(solutions, n_right), rhs)[..., 0].T
    right_coeffs, left_coeffs = coeffs[:n_right], coeffs[n_right:]

    separable = SeparableKernel(
        grid=grid,
        N=N,
        z=sp.z,
        potential=potential,
        right_factors=np.stack([s.samples for s in solutions[:n_right]]),
        right_weights=right_coeffs,
        left_factors=np.stack([s.samples for s in solutions[n_right:]]),
        left_weights=left_coeffs,
    )
    logger.debug(
        "Assembled resolvent kernel",
        LogContext.RESOLVENT,
        {"zeta": str(sp.zeta), "delta": abs(report.value), "spread": report.spread},
    )
    return ResolventKernel(
        sp=sp,
        potential=potential,
        solutions=solutions,
        delta=report,
        right_coeffs=right_coeffs,
        left_coeffs=left_coeffs,
        jump=complex(jump),
        separable=separable,
    )


def resolvent_kernel(
    V: Potential,
    sp: SpectralParam,
    grid: Grid,
    jump: complex | None = None,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> ResolventKernel:
    """Solve the Jost family for (V, ζ) and assemble G."""
    family = jost_family(V, sp, grid, config, logger)
    return assemble_kernel(family, V, jump=jump, config=config, logger=logger)


def adjugate_coefficients(kernel: ResolventKernel) -> tuple[np.ndarray, np.ndarray]:
    """
    Coefficients from the closed-form cofactors instead of the linear solves.

    N = 3: c₁ = κ{θ₂,γ₁}/Δ, c₂ = κ{γ₁,θ₁}/Δ, k₁ = κ{θ₂,θ₁}/Δ with Δ evaluated
    pointwise. N = 2: c₀ = −κγ₁/Δ, k₁ = −κθ₀/Δ.
    """
    sols = kernel.solutions
    frames = np.stack([s.samples for s in sols], axis=-1).transpose(1, 0, 2)
    pointwise = np.linalg.det(frames)
    kappa = kernel.jump
    if kernel.N == 3:
        theta1, theta2, gamma1 = sols
        right = np.stack(
            [bracket(theta2, gamma1).values, bracket(gamma1, theta1).values]
        )
        left = bracket(theta2, theta1).values[None, :]
    else:
        theta, gamma = sols
        right = -gamma.values[None, :]
        left = -theta.values[None, :]
    return kappa * right / pointwise, kappa * left / pointwise


def operator_residual_field(
    kernel: ResolventKernel | SeparableKernel,
    f: np.ndarray | Callable[[np.ndarray], np.ndarray],
    config: NumericsConfig | None = None,
) -> np.ndarray:
    """((−i∂ₓ)ᴺ + V − z)(Gf) − f at every node."""
    config = config or NumericsConfig()
    separable = kernel.separable if isinstance(kernel, ResolventKernel) else kernel
    x = separable.grid.nodes
    samples = np.asarray(f(x) if callable(f) else f, dtype=complex)
    return separable.operator_image(samples, config.SPLINE_DEGREE) - samples


def relative_residual(grid: Grid, residual: np.ndarray, reference: np.ndarray) -> float:
    """Weighted L² ratio over the nodes away from breakpoints."""
    mask = grid.interior_mask()
    w = grid.weights[mask]
    num = math.sqrt(float(np.sum(w * np.abs(residual[mask]) ** 2)))
    den = math.sqrt(float(np.sum(w * np.abs(reference[mask]) ** 2)))
    return num / den if den > 0 else num


def apply_operator_residual(
    kernel: ResolventKernel | SeparableKernel,
    f: np.ndarray | Callable[[np.ndarray], np.ndarray],
    config: NumericsConfig | None = None,
) -> float:
    """Relative residual ‖(A − z)Gf − f‖/‖f‖ on interior nodes."""
    separable = kernel.separable if isinstance(kernel, ResolventKernel) else kernel
    x = separable.grid.nodes
    samples = np.asarray(f(x) if callable(f) else f, dtype=complex)
    residual = operator_residual_field(separable, samples, config)
    return relative_residual(separable.grid, residual, samples)


def gaussian_bump(
    center: float = 0.0, width: float = 0.5
) -> Callable[[np.ndarray], np.ndarray]:
    def bump(x: np.ndarray) -> np.ndarray:
        return np.exp(-(((np.asarray(x) - center) / width) ** 2)).astype(complex)

    return bump


@lru_cache(maxsize=None)
def calibrate_jump_constant(N: int) -> complex:
    """
    The constant κ in the ∂ₓ^{N−1} jump of G, chosen from {±1, ±i}.

    Each candidate is used to assemble the free kernel, and the one whose
    operator residual vanishes wins.
    """
    require_kernel_order(N)
    V = Potential.zero()
    sp = SpectralParam.on_ray(N, 0.8)
    grid = Grid.for_potential(V, X=6.0, h=0.05)
    family = jost_family(V, sp, grid)
    f = gaussian_bump()
    residuals = {
        kappa: apply_operator_residual(assemble_kernel(family, V, jump=kappa), f)
        for kappa in JUMP_CANDIDATES
    }
    return min(residuals, key=lambda kappa: residuals[kappa])


@dataclass(frozen=True)
class KernelStructureReport:
    """Diagonal behavior of an assembled kernel."""

    continuity_mismatch: float
    jump_mean: complex
    jump_modulus_error: float
    jump_spread: float
    expected_jump: complex
    adjugate_mismatch: float
    delta_spread: float

    def passed(self, tolerance: float = 1e-6, spread_tolerance: float = 1e-8) -> bool:
        return (
            self.continuity_mismatch <= tolerance
            and self.jump_modulus_error <= tolerance
            and self.jump_spread <= tolerance
            and abs(self.jump_mean - self.expected_jump) <= tolerance
            and self.adjugate_mismatch <= tolerance
            and self.delta_spread <= spread_tolerance
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "continuity_mismatch": self.continuity_mismatch,
            "jump_re": self.jump_mean.real,
            "jump_im": self.jump_mean.imag,
            "jump_modulus_error": self.jump_modulus_error,
            "jump_spread": self.jump_spread,
            "adjugate_mismatch": self.adjugate_mismatch,
            "delta_spread": self.delta_spread,
        }


def audit_kernel_structure(kernel: ResolventKernel) -> KernelStructureReport:
    """
    Continuity of ∂ₓᵏG (k ≤ N−2) and the (−i∂ₓ)^{N−1} jump across x = y.

    Mismatches are measured relative to the size of the one-sided limits.
    """
    N = kernel.N
    sep = kernel.separable
    profile = sep.jump_profile()
    one_sided = np.einsum("pkn,pn->kn", sep.right_factors, sep.right_weights)
    scale = np.maximum(np.abs(one_sided[: N - 1]), 1.0)
    continuity = float(np.max(np.abs(profile[: N - 1]) / scale)) if N > 1 else 0.0
    jumps = (-1j) ** (N - 1) * profile[N - 1]
    mean = complex(np.mean(jumps))
    right_adj, left_adj = adjugate_coefficients(kernel)
    coeff_scale = max(np.max(np.abs(kernel.right_coeffs)), 1e-300)
    adjugate = max(
        float(np.max(np.abs(right_adj - kernel.right_coeffs))),
        float(np.max(np.abs(left_adj - kernel.left_coeffs))),
    )
    return KernelStructureReport(
        continuity_mismatch=continuity,
        jump_mean=mean,
        jump_modulus_error=float(np.max(np.abs(np.abs(jumps) - 1.0))),
        jump_spread=float(np.max(np.abs(jumps - mean))),
        expected_jump=complex((-1j) ** (N - 1) * calibrate_jump_constant(N)),
        adjugate_mismatch=adjugate / coeff_scale,
        delta_spread=kernel.delta.spread,
    )


@dataclass(frozen=True)
class ConjugateReport:
    """Residuals of the conjugate equation satisfied by {θ₁, θ₂}."""

    equation_residual: float
    first_identity_residual: float
    second_identity_residual: float

    def to_dict(self) -> dict[str, float]:
        return {
            "equation_residual": self.equation_residual,
            "first_identity_residual": self.first_identity_residual,
            "second_identity_residual": self.second_identity_residual,
        }


def bracket_conjugate_check(
    theta1: JostSolution,
    theta2: JostSolution,
    potential: Potential,
    config: NumericsConfig | None = None,
) -> ConjugateReport:
    """
    Residual of the conjugate equation for u = {θ₁, θ₂} (N = 3).

    With θ₁, θ₂ solving ((−i∂ₓ)³ + V − z)θ = 0, the bracket u satisfies
    −i∂ₓ³u + (V − z)u = 0. u′ = θ₁θ₂″ − θ₁″θ₂ and u″ = θ₁′θ₂″ − θ₁″θ₂′ come
    from stored samples; u‴ is the spline derivative of u″.
    """
    if theta1.N != 3:
        raise ValueError("the conjugate bracket identity is stated for N = 3")
    config = config or NumericsConfig()
    grid = _require_shared_grid([theta1, theta2])
    t1, t2 = theta1.samples, theta2.samples
    u = bracket(theta1, theta2).values
    u1 = t1[0] * t2[2] - t1[2] * t2[0]
    u2 = t1[1] * t2[2] - t1[2] * t2[1]
    u3 = grid.derivative(u2, config.SPLINE_DEGREE)
    V = potential(grid.nodes)
    z = theta1.z
    residual = -1j * u3 + (V - z) * u
    fd1 = grid.derivative(u, config.SPLINE_DEGREE)
    fd2 = grid.derivative(u1, config.SPLINE_DEGREE)
    return ConjugateReport(
        equation_residual=relative_residual(grid, residual, np.abs(u3) + np.abs(u)),
        first_identity_residual=relative_residual(grid, fd1 - u1, np.abs(u1) + np.abs(u)),
        second_identity_residual=relative_residual(grid, fd2 - u2, np.abs(u2) + np.abs(u)),
    )


def classical_green(theta: JostSolution, gamma: JostSolution) -> np.ndarray:
    """N = 2: G(x, y) = θ(x_>)γ(x_<)/W(θ, γ) on all node pairs."""
    if theta.N != 2:
        raise ValueError("the classical Wronskian formula is for N = 2")
    _require_shared_grid([theta, gamma])
    wronskian = bracket(theta, gamma).values
    w = complex(np.mean(wronskian))
    n = theta.grid.size
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    upper = theta.values[i] * gamma.values[j]
    lower = gamma.values[i] * theta.values[j]
    return np.where(i >= j, upper, lower) / w


@dataclass(frozen=True)
class FittedBound:
    """
    Bound with an unspecified constant C.

    C is fitted on calibration samples and checked on fresh samples at slack·C.
    """

    name: str
    constant: float
    fresh_ratio: float
    slack: float

    @property
    def passed(self) -> bool:
        return self.fresh_ratio <= self.slack * self.constant

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "constant": self.constant,
            "fresh_ratio": self.fresh_ratio,
            "slack": self.slack,
            "passed": self.passed,
        }


def fit_constant(
    name: str, ratios_calibration: np.ndarray, ratios_fresh: np.ndarray, slack: float
) -> FittedBound:
    return FittedBound(
        name=name,
        constant=float(np.max(ratios_calibration)),
        fresh_ratio=float(np.max(ratios_fresh)),
        slack=slack,
    )


def sample_indices(grid: Grid, count: int) -> tuple[np.ndarray, np.ndarray]:
    picked = np.unique(np.linspace(0, grid.size - 1, 2 * count).astype(int))
    return picked[::2], picked[1::2]


def audit_kernel_growth(
    kernel: ResolventKernel, samples: int = 60, config: NumericsConfig | None = None
) -> FittedBound:
    """
    |G(x, y; ζ)| ≤ C·e^{2|ζ||x|}⟨x⟩^{3N−2}.

    C is the largest ratio over calibration nodes; the bound is then checked on
    the interleaved fresh nodes at CONSTANT_SLACK·C.
    """
    config = config or NumericsConfig()
    grid = kernel.grid
    calib, fresh = sample_indices(grid, samples)

    def ratios(idx: np.ndarray) -> np.ndarray:
        values = np.abs(kernel.separable.evaluate(idx[:, None], idx[None, :]))
        x = grid.nodes[idx][:, None]
        bound = np.exp(2 * abs(kernel.sp.zeta) * np.abs(x)) * japanese_bracket(
            x, 3 * kernel.N - 2
        )
        return values / bound

    return fit_constant(
        "kernel_growth", ratios(calib), ratios(fresh), config.CONSTANT_SLACK
    )


@dataclass(frozen=True)
class DecayReport:
    """sup_y |{θ₂, θ₁}(y, ε)| along a ray and its fitted power of ε."""

    radii: tuple[float, ...]
    sup_values: tuple[float, ...]
    rate: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "radii": list(self.radii),
            "sup": list(self.sup_values),
            "rate": self.rate,
        }


def bracket_threshold_decay(
    V: Potential,
    grid: Grid,
    radii: Sequence[float],
    N: int = 3,
    angle: float | None = None,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> DecayReport:
    """
    The coefficient {θ₂, θ₁} of γ₁ in G vanishes as ζ → 0.

    The supremum runs over |y| ≤ L + 1, where the two right solutions merge.
    """
    if N < 3:
        raise ValueError("two right Jost solutions exist only for N >= 3")
    window = np.abs(grid.nodes) <= V.L + 1.0
    sups = []
    for eps in radii:
        sp = SpectralParam.on_ray(N, eps, angle)
        theta1 = jost_right(V, sp, 0, grid, config, logger)
        theta2 = jost_right(V, sp, 1, grid, config, logger)
        sups.append(float(np.max(np.abs(bracket(theta2, theta1).values[window]))))
    rate = float(np.polyfit(np.log(radii), np.log(sups), 1)[0])
    return DecayReport(tuple(float(r) for r in radii), tuple(sups), rate)


def delta_sweep(
    V: Potential,
    N: int,
    zetas: Sequence[complex],
    grid: Grid,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> list[tuple[complex, DeltaReport]]:
    """Δ along a list of spectral parameters."""
    out = []
    for zeta in zetas:
        sp = SpectralParam(N, zeta)
        family = jost_family(V, sp, grid, config, logger)
        out.append((sp.zeta, delta(family, config=config)))
    return out
