"""
Jost solutions of ((−i∂ₓ)ᴺ + V − ζᴺ)u = 0.

θₘ is fixed by θₘ(x) = e^{iαᵐζx} to the right of supp V, γₘ by the same
formula to the left. Because V has compact support these data are exact at
x = ±L, so each solution is obtained by integrating the companion system

    ∂ₓ(u, u′, …, u^{(N−1)}) = (u′, …, u^{(N−1)}, iᴺ(z − V)u)

from the prescribed side across the support, one potential piece at a time.
Outside the support on the far side the closed-form constant-coefficient
propagator continues the solution exactly.
"""

import cmath
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.integrate import solve_ivp

from jostlab.core.grid import Grid
from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam
from jostlab.diagnostics.errors import IllConditionedError
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import LogContext, RunLogger, resolve_logger
from jostlab.solvers.transfer import constant_propagator

Side = Literal["right", "left"]

BRANCH_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class JostSolution:
    """Samples of u, u′, …, u^{(N−1)} at every grid node."""

    side: Side
    m: int | None
    N: int
    rho: complex
    grid: Grid
    samples: np.ndarray
    support_radius: float
    sp: SpectralParam | None = None
    amplification: float = 1.0

    @property
    def z(self) -> complex:
        return self.rho**self.N

    @property
    def values(self) -> np.ndarray:
        return self.samples[0]

    def derivative(self, k: int) -> np.ndarray:
        return self.samples[k]

    def tail(self, x: np.ndarray | float) -> np.ndarray:
        """e^{iρx}, the prescribed asymptotics."""
        return np.exp(1j * self.rho * np.asarray(x, dtype=float))

    def tail_derivatives(self, x: np.ndarray | float) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        powers = (1j * self.rho) ** np.arange(self.N)
        return powers[:, None] * np.exp(1j * self.rho * x)[None, :]

    def tail_mask(self) -> np.ndarray:
        """Nodes on the prescribed side beyond the support edge."""
        x = self.grid.nodes
        if self.side == "right":
            return x >= self.support_radius
        return x <= -self.support_radius

    def at(self, x: float) -> np.ndarray:
        return self.samples[:, self.grid.index_of(x)]


def _rhs(N: int, z: complex, piece):
    lam = 1j**N

    if piece is None:

        def free(t, y):
            return np.append(y[1:], lam * z * y[0])

        return free

    series = piece.series()

    def forced(t, y):
        return np.append(y[1:], lam * (z - complex(series(t))) * y[0])

    return forced


def solve_jost(
    V: Potential,
    N: int,
    rho: complex,
    side: Side,
    grid: Grid,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> JostSolution:
    """
    Jost solution for a raw wavenumber ρ (z = ρᴺ), without sector checks.

    The reflection map produces wavenumbers outside the sector, so the public
    constructors validate branches and delegate here.
    """
    config = config or NumericsConfig()
    logger = resolve_logger(logger)
    if grid.X <= V.L:
        raise ValueError(f"grid half-width {grid.X} must exceed support radius {V.L}")
    L = V.L
    x = grid.nodes
    z = complex(rho) ** N
    samples = np.zeros((N, grid.size), dtype=complex)
    powers = (1j * rho) ** np.arange(N)
    logger.solve_start(f"{side} rho={rho:.4g}", {"N": N, "L": L, "nodes": grid.size})

    edge = L if side == "right" else -L
    start_state = powers * cmath.exp(1j * rho * edge)

    beyond = x >= L if side == "right" else x <= -L
    samples[:, beyond] = powers[:, None] * np.exp(1j * rho * x[beyond])[None, :]

    segments = V.segments()
    if side == "right":
        segments = segments[::-1]
    state = start_state
    for a, b, piece in segments:
        t0, t1 = (b, a) if side == "right" else (a, b)
        inside = (x >= a) & (x <= b)
        t_eval = x[inside]
        if side == "right":
            t_eval = t_eval[::-1]
        sol = solve_ivp(
            _rhs(N, z, piece),
            (t0, t1),
            state,
            method=config.ODE_METHOD,
            t_eval=t_eval,
            rtol=config.ODE_RTOL,
            atol=config.ODE_ATOL,
        )
        if not sol.success:
            raise RuntimeError(f"ODE integration failed on [{a}, {b}]: {sol.message}")
        idx = np.flatnonzero(inside)
        if side == "right":
            idx = idx[::-1]
        samples[:, idx] = sol.y
        state = sol.y[:, -1]

    far_edge = -L if side == "right" else L
    far = x < -L if side == "right" else x > L
    if np.any(far):
        props = constant_propagator(N, z, x[far] - far_edge)
        samples[:, far] = np.einsum("tkl,l->kt", props, state)

    start = max(np.max(np.abs(start_state)), 1e-300)
    amplification = float(np.max(np.abs(samples)) / start)
    if amplification > config.AMPLIFICATION_LIMIT:
        logger.warning(
            "Jost integration amplified beyond limit",
            LogContext.JOST,
            IllConditionedError(
                "amplification above limit", amplification=amplification, rho=rho
            ).to_dict(),
        )
    logger.solve_done(f"{side} rho={rho:.4g}", {"amplification": amplification})

    return JostSolution(
        side=side,
        m=None,
        N=N,
        rho=complex(rho),
        grid=grid,
        samples=samples,
        support_radius=L,
        amplification=amplification,
    )


def _with_branch(sol: JostSolution, m: int, sp: SpectralParam) -> JostSolution:
    return JostSolution(
        side=sol.side,
        m=m,
        N=sol.N,
        rho=sol.rho,
        grid=sol.grid,
        samples=sol.samples,
        support_radius=sol.support_radius,
        sp=sp,
        amplification=sol.amplification,
    )


def jost_right(
    V: Potential,
    sp: SpectralParam,
    m: int,
    grid: Grid,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> JostSolution:
    """θₘ(x, ζ) with θₘ = e^{iαᵐζx} for x ≥ L; requires Im(αᵐζ) ≥ 0."""
    rho = sp.root(m)
    if rho.imag < -BRANCH_TOLERANCE * max(1.0, abs(rho)):
        raise ValueError(
            f"branch m={m} has Im(alpha^m zeta)={rho.imag:.3g} < 0 and grows at +inf"
        )
    sol = solve_jost(V, sp.N, rho, "right", grid, config, logger)
    return _with_branch(sol, m, sp)


def jost_left(
    V: Potential,
    sp: SpectralParam,
    m: int,
    grid: Grid,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> JostSolution:
    """γₘ(x, ζ) with γₘ = e^{iαᵐζx} for x ≤ −L; requires Im(αᵐζ) ≤ 0."""
    rho = sp.root(m)
    if rho.imag > BRANCH_TOLERANCE * max(1.0, abs(rho)):
        raise ValueError(
            f"branch m={m} has Im(alpha^m zeta)={rho.imag:.3g} > 0 and grows at -inf"
        )
    sol = solve_jost(V, sp.N, rho, "left", grid, config, logger)
    return _with_branch(sol, m, sp)


def jost_family(
    V: Potential,
    sp: SpectralParam,
    grid: Grid,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> list[JostSolution]:
    """All right Jost solutions followed by all left ones (θ₁, θ₂, γ₁ for N = 3)."""
    right = [jost_right(V, sp, m, grid, config, logger) for m in sp.right_branches]
    left = [jost_left(V, sp, m, grid, config, logger) for m in sp.left_branches]
    return right + left


def reflected_jost_left(
    V: Potential,
    sp: SpectralParam,
    m: int,
    grid: Grid,
    config: NumericsConfig | None = None,
    logger: RunLogger | None = None,
) -> JostSolution:
    """
    γₘ for (V, ζ) obtained from the reflected problem (odd N only).

    w(x) = u(−x) turns (−i∂)ᴺ + V − z into (−i∂)ᴺ − V(−x) + z, so γₘ(x) equals
    the right Jost solution of −V(−x) with wavenumber −αᵐζ evaluated at −x.
    The grid must be symmetric about 0.
    """
    if sp.N % 2 == 0:
        raise ValueError("the reflection map applies to odd N only")
    if not np.allclose(grid.nodes, -grid.nodes[::-1], atol=1e-12):
        raise ValueError("reflection requires a grid symmetric about 0")
    rho = -sp.root(m)
    mirrored = solve_jost(V.reflected(), sp.N, rho, "right", grid, config, logger)
    signs = (-1.0) ** np.arange(sp.N)
    samples = signs[:, None] * mirrored.samples[:, ::-1]
    return JostSolution(
        side="left",
        m=m,
        N=sp.N,
        rho=sp.root(m),
        grid=grid,
        samples=samples,
        support_radius=V.L,
        sp=sp,
        amplification=mirrored.amplification,
    )
