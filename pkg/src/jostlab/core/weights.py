"""
Japanese-bracket weights, weight exponents and the moment integrals M, M₊, M₋.
"""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad

from jostlab.core.grid import Grid
from jostlab.core.potential import Potential


def bracket(x: np.ndarray | float, sigma: float = 1.0) -> np.ndarray:
    """⟨x⟩^σ = (1 + x²)^{σ/2}."""
    x = np.asarray(x, dtype=float)
    return (1.0 + x * x) ** (sigma / 2.0)


def bracket_minus(x: np.ndarray | float, sigma: float = 1.0) -> np.ndarray:
    """⟨x⁻⟩^σ: equals ⟨x⟩^σ for x ≤ 0 and 1 for x > 0."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0, bracket(x, sigma), 1.0)


def bracket_plus(x: np.ndarray | float, sigma: float = 1.0) -> np.ndarray:
    """⟨x⁺⟩^σ: equals ⟨x⟩^σ for x ≥ 0 and 1 for x < 0."""
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, bracket(x, sigma), 1.0)


def weight(
    x: np.ndarray | float,
    sigma: float,
    side: Literal["both", "minus", "plus"] = "both",
) -> np.ndarray:
    if side == "minus":
        return bracket_minus(x, sigma)
    if side == "plus":
        return bracket_plus(x, sigma)
    return bracket(x, sigma)


class WeightSpec(BaseModel):
    """Weight exponents for L²_s → L²_{−s′}, with an optional exponential weight."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(..., description="Source weight exponent")
    s_prime: float = Field(..., description="Target weight exponent")
    nu: float = Field(0.0, ge=0.0, description="Exponential weight rate e^{ν|x|}")

    def is_admissible(self, N: int) -> bool:
        return self.s > N - 1.5 and self.s_prime > N - 1.5

    def source_factor(self, x: np.ndarray) -> np.ndarray:
        """⟨x⟩^{−s}e^{−ν|x|}."""
        return bracket(x, -self.s) * np.exp(-self.nu * np.abs(x))

    def target_factor(self, x: np.ndarray) -> np.ndarray:
        """⟨x⟩^{−s′}e^{−ν|x|}."""
        return bracket(x, -self.s_prime) * np.exp(-self.nu * np.abs(x))


def _moment_density(V: Potential, N: int, mu: float):
    def density(y: float) -> float:
        return float(
            bracket(y, N - 1) * np.exp(mu * abs(y)) * abs(complex(V(np.asarray([y]))[0]))
        )

    return density


def _integrate_pieces(V: Potential, N: int, mu: float, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    density = _moment_density(V, N, mu)
    total = 0.0
    for piece in V.pieces:
        a, b = max(piece.a, lo), min(piece.b, hi)
        if b <= a:
            continue
        cuts = [a, b] if not a < 0 < b else [a, 0.0, b]
        for left, right in zip(cuts, cuts[1:]):
            value, _ = quad(density, left, right, limit=200, epsabs=1e-14, epsrel=1e-12)
            total += value
    return total


def moment_M(V: Potential, N: int, mu: float = 0.0) -> float:
    """M = ∫⟨x⟩^{N−1}e^{μ|x|}|V(x)|dx."""
    if mu < 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    return _integrate_pieces(V, N, mu, -V.L, V.L)


def moment_tail(
    V: Potential,
    N: int,
    mu: float,
    x: np.ndarray | float,
    side: Literal["plus", "minus"] = "plus",
) -> np.ndarray:
    """M₊(x) = ∫_x^∞ ⟨y⟩^{N−1}e^{μ|y|}|V(y)|dy, or M₋(x) = ∫_{−∞}^x (same)."""
    if mu < 0:
        raise ValueError(f"mu must be nonnegative, got {mu}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.shape, dtype=float)
    for i, point in enumerate(x):
        if side == "plus":
            out[i] = _integrate_pieces(V, N, mu, max(point, -V.L), V.L)
        else:
            out[i] = _integrate_pieces(V, N, mu, -V.L, min(point, V.L))
    return out


def moment_tail_on_grid(V: Potential, N: int, mu: float, grid: Grid) -> np.ndarray:
    """M₊ at every grid node by cumulative quadrature of the moment density."""
    x = grid.nodes
    density = bracket(x, N - 1) * np.exp(mu * np.abs(x)) * np.abs(V(x))
    return np.real(grid.cumulative_from_right(density)).clip(min=0.0)
