"""
Closed-form propagators of (u, u′, …, u^{(N−1)}) across intervals of constant
potential.

On a piece with V ≡ V₀ the equation (−i∂ₓ)ᴺu = (z − V₀)u is solved by e^{iρx}
with ρᴺ = z − V₀. Away from confluence the propagator is W·diag(e^{iρⱼt})·W⁻¹
with the Vandermonde-type matrix Wₖⱼ = (iρⱼ)ᵏ. Near confluence (|ρ||t| small,
including z = V₀ exactly) the power series of the fundamental system is summed
instead; at z = V₀ it reduces to the polynomial system {1, x, …, x^{N−1}}.
"""

import math
from dataclasses import dataclass

import numpy as np

from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam
from jostlab.diagnostics.errors import NonConstantPieceError

SERIES_SWITCH = 2.0
SERIES_TERMS = 40


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """N×N propagator of the derivative vector from x0 to x1."""

    matrix: np.ndarray
    x0: float
    x1: float

    @property
    def determinant(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        # self: x1 <- x_mid, other: x_mid <- x0
        return TransferMatrix(self.matrix @ other.matrix, other.x0, self.x1)

    def apply(self, state: np.ndarray) -> np.ndarray:
        return self.matrix @ state


def companion_matrix(N: int, w: complex) -> np.ndarray:
    """Companion matrix of ∂ᴺu = iᴺ·w·u (w = z − V₀); trace-free."""
    C = np.zeros((N, N), dtype=complex)
    C[np.arange(N - 1), np.arange(1, N)] = 1.0
    C[N - 1, 0] = (1j**N) * w
    return C


def nth_roots(N: int, w: complex) -> np.ndarray:
    """ρⱼ = αʲ·w^{1/N} with the principal branch of w^{1/N}."""
    principal = complex(w) ** (1.0 / N) if w != 0 else 0j
    return principal * np.exp(2j * np.pi * np.arange(N) / N)


def _series_propagator(N: int, w: complex, t: np.ndarray) -> np.ndarray:
    """Mₖₗ(t) = Σₙ (iᴺw)ⁿ t^{l+nN−k}/(l+nN−k)!, shape (len(t), N, N)."""
    t = np.asarray(t, dtype=float)
    lam = (1j**N) * w
    out = np.zeros((t.size, N, N), dtype=complex)
    for k in range(N):
        for l in range(N):
            for n in range(SERIES_TERMS):
                power = l + n * N - k
                if power < 0:
                    continue
                term = lam**n * t**power / math.factorial(power)
                out[:, k, l] += term
                if n > 0 and np.all(np.abs(term) < 1e-18 * (1 + np.abs(out[:, k, l]))):
                    break
    return out


def _modal_propagator(N: int, w: complex, t: np.ndarray) -> np.ndarray:
    rho = nth_roots(N, w)
    W = (1j * rho)[None, :] ** np.arange(N)[:, None]
    W_inv = np.linalg.inv(W)
    phases = np.exp(1j * np.outer(np.asarray(t, dtype=float), rho))
    return np.einsum("kj,tj,jl->tkl", W, phases, W_inv)


def constant_propagator(N: int, w: complex, t: np.ndarray | float) -> np.ndarray:
    """
    Propagators over displacements t for the constant-coefficient equation.

    Returns an array of shape (len(t), N, N) (or (N, N) for scalar t).
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    size = abs(w) ** (1.0 / N) if w != 0 else 0.0
    out = np.empty((t.size, N, N), dtype=complex)
    near = size * np.abs(t) <= SERIES_SWITCH
    if np.any(near):
        out[near] = _series_propagator(N, w, t[near])
    if np.any(~near):
        out[~near] = _modal_propagator(N, w, t[~near])
    return out[0] if scalar else out


def transfer_matrix_oracle(
    V: Potential, sp: SpectralParam, x0: float, x1: float
) -> TransferMatrix:
    """Product of per-piece propagators from x0 to x1 for piecewise-constant V."""
    N, z = sp.N, sp.z
    direction = 1.0 if x1 >= x0 else -1.0
    lo, hi = min(x0, x1), max(x0, x1)
    for piece in V.pieces:
        if piece.b > lo and piece.a < hi and not piece.is_constant:
            raise NonConstantPieceError(
                f"piece [{piece.a}, {piece.b}] is not constant",
                interval=[piece.a, piece.b],
            )
    cuts = sorted({lo, hi, *(p for p in V.breakpoints() if lo < p < hi)})
    if direction < 0:
        cuts = cuts[::-1]
    M = np.eye(N, dtype=complex)
    for a, b in zip(cuts, cuts[1:]):
        mid = 0.5 * (a + b)
        v0 = complex(V(np.asarray([mid]))[0])
        M = constant_propagator(N, z - v0, b - a) @ M
    return TransferMatrix(M, x0, x1)
