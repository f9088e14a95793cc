"""
Separable kernels and their application by cumulative quadrature.

Every resolvent kernel in this package has the form

    G(x, y) = Σₚ Aₚ(x)aₚ(y)   for x ≥ y,
    G(x, y) = Σ_q B_q(x)b_q(y)  for x < y,

so u = ∫G(·, y)f(y)dy is a sum of one-sided cumulative integrals. Because the
derivatives of orders 0..N−2 of G are continuous across the diagonal, u⁽ᵏ⁾ for
k ≤ N−1 is obtained by differentiating the factors only.
"""

from dataclasses import dataclass

import numpy as np

from jostlab.core.grid import Grid, OneSidedSamples
from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam, left_branches, right_branches
from jostlab.solvers.free_operator import check_open_sector

Samples = np.ndarray | OneSidedSamples


def _one_sided(f: Samples, size: int) -> OneSidedSamples:
    if not isinstance(f, OneSidedSamples):
        f = OneSidedSamples.smooth(f)
    if f.left.shape != (size,) or f.right.shape != (size,):
        raise ValueError(f"f must be sampled on the {size} grid nodes")
    return f


@dataclass(frozen=True, eq=False)
class SeparableKernel:
    """
    Sampled factors of a kernel of (A − z)⁻¹ with A = (−i∂ₓ)ᴺ + V.

    right_factors[p, k] holds Aₚ⁽ᵏ⁾ at the nodes, right_weights[p] holds aₚ;
    left_factors and left_weights do the same for the x < y branch.
    """

    grid: Grid
    N: int
    z: complex
    potential: Potential
    right_factors: np.ndarray
    right_weights: np.ndarray
    left_factors: np.ndarray
    left_weights: np.ndarray

    def __post_init__(self):
        n = self.grid.size
        for name in ("right_factors", "left_factors"):
            arr = getattr(self, name)
            if arr.ndim != 3 or arr.shape[1:] != (self.N, n):
                raise ValueError(
                    f"{name} must have shape (P, {self.N}, {n}), got {arr.shape}"
                )
        for name in ("right_weights", "left_weights"):
            arr = getattr(self, name)
            if arr.ndim != 2 or arr.shape[1] != n:
                raise ValueError(f"{name} must have shape (P, {n}), got {arr.shape}")

    def _integrals(self, f: Samples) -> tuple[np.ndarray, np.ndarray]:
        f = _one_sided(f, self.grid.size)
        left_of = self.grid.cumulative_from_left
        right_of = self.grid.cumulative_from_right
        lower = np.stack([left_of(a * f.left, a * f.right) for a in self.right_weights])
        upper = np.stack([right_of(b * f.left, b * f.right) for b in self.left_weights])
        return lower, upper

    def apply(self, f: Samples) -> np.ndarray:
        """(u, u′, …, u^{(N−1)}) at the nodes, shape (N, n)."""
        lower, upper = self._integrals(f)
        return np.einsum("pkn,pn->kn", self.right_factors, lower) + np.einsum(
            "qkn,qn->kn", self.left_factors, upper
        )

    def apply_with_top(self, f: Samples, degree: int = 5) -> np.ndarray:
        """
        Derivatives 0..N of u, shape (N + 1, n).

        The N-th derivative differentiates the sampled factors A^{(N−1)},
        B^{(N−1)} by splines and adds the diagonal jump times f.
        """
        f = _one_sided(f, self.grid.size)
        lower, upper = self._integrals(f)
        out = np.empty((self.N + 1, self.grid.size), dtype=complex)
        out[: self.N] = np.einsum("pkn,pn->kn", self.right_factors, lower) + np.einsum(
            "qkn,qn->kn", self.left_factors, upper
        )
        top = self.jump_profile()[self.N - 1] * f.left
        for factor, integral in zip(self.right_factors, lower):
            top += self.grid.derivative(factor[self.N - 1], degree) * integral
        for factor, integral in zip(self.left_factors, upper):
            top += self.grid.derivative(factor[self.N - 1], degree) * integral
        out[self.N] = top
        return out

    def operator_image(self, f: Samples, degree: int = 5) -> np.ndarray:
        """((−i∂ₓ)ᴺ + V − z)u at the nodes for u = ∫G(·, y)f(y)dy."""
        derivs = self.apply_with_top(f, degree)
        V = self.potential(self.grid.nodes)
        return (-1j) ** self.N * derivs[self.N] + (V - self.z) * derivs[0]

    def jump_profile(self) -> np.ndarray:
        """
        ∂ₓᵏG(y+0, y) − ∂ₓᵏG(y−0, y) for k = 0..N−1 at every node y.
        """
        upper = np.einsum("pkn,pn->kn", self.right_factors, self.right_weights)
        lower = np.einsum("qkn,qn->kn", self.left_factors, self.left_weights)
        return upper - lower

    def matrix(self) -> np.ndarray:
        """G(xᵢ, yⱼ) on all node pairs (the diagonal uses the x ≥ y branch)."""
        idx = np.arange(self.grid.size)
        return self.evaluate(idx[:, None], idx[None, :])

    def evaluate(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """G at node-index pairs (i, j), broadcast together."""
        i, j = np.broadcast_arrays(np.asarray(i, dtype=int), np.asarray(j, dtype=int))
        upper = np.einsum(
            "p...,p...->...", self.right_factors[:, 0, i], self.right_weights[:, j]
        )
        lower = np.einsum(
            "q...,q...->...", self.left_factors[:, 0, i], self.left_weights[:, j]
        )
        return np.where(i >= j, upper, lower)

    def rows(self, i: np.ndarray) -> np.ndarray:
        """G(xᵢ, ·) for the selected node indices, shape (len(i), n)."""
        i = np.asarray(i, dtype=int)
        return self.evaluate(i[:, None], np.arange(self.grid.size)[None, :])


def free_separable_kernel(sp: SpectralParam, grid: Grid) -> SeparableKernel:
    """
    Factors of the free resolvent kernel on the grid.

    Aₚ(x) = (i/N)e^{iρₚx}/ρₚ^{N−1}, aₚ(y) = e^{−iρₚy} over the right roots and
    the same with a minus sign over the left roots.
    """
    check_open_sector(sp)
    N = sp.N
    x = grid.nodes
    powers = np.arange(N)

    def factors(branches: range, sign: float) -> tuple[np.ndarray, np.ndarray]:
        rhos = sp.roots[list(branches)]
        A = np.stack(
            [
                sign
                * (1j / N)
                * ((1j * rho) ** powers)[:, None]
                * np.exp(1j * rho * x)[None, :]
                / rho ** (N - 1)
                for rho in rhos
            ]
        )
        a = np.stack([np.exp(-1j * rho * x) for rho in rhos])
        return A, a

    right, right_w = factors(right_branches(N), 1.0)
    left, left_w = factors(left_branches(N), -1.0)
    return SeparableKernel(
        grid=grid,
        N=N,
        z=sp.z,
        potential=Potential.zero(),
        right_factors=right,
        right_weights=right_w,
        left_factors=left,
        left_weights=left_w,
    )
