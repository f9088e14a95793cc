"""
Spectral parameter ζ in the closed sector Γ_N and its branch roots αʲζ.
"""

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

SUPPORTED_KERNEL_ORDERS = (2, 3)
SECTOR_TOLERANCE = 1e-12


def unit_root(N: int) -> complex:
    """α = e^{2πi/N}."""
    return cmath.exp(2j * math.pi / N)


def right_branches(N: int) -> range:
    """Branch indices m with Im(αᵐζ) ≥ 0 for every ζ in the sector."""
    return range((N + 1) // 2)


def left_branches(N: int) -> range:
    """Branch indices m with Im(αᵐζ) ≤ 0 for every ζ in the sector."""
    return range((N + 1) // 2, N)


@dataclass(frozen=True)
class SpectralParam:
    """A point ζ of the closed sector Γ_N together with z = ζᴺ."""

    N: int
    zeta: complex

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be at least 2, got {self.N}")
        object.__setattr__(self, "zeta", complex(self.zeta))
        if self.zeta != 0:
            angle = cmath.phase(self.zeta)
            if angle < -SECTOR_TOLERANCE or angle > math.pi / self.N + SECTOR_TOLERANCE:
                raise ValueError(
                    f"zeta={self.zeta} lies outside the sector "
                    f"0 <= arg <= pi/{self.N} (arg={angle:.6g})"
                )

    @classmethod
    def on_ray(
        cls, N: int, radius: float, angle: float | None = None
    ) -> "SpectralParam":
        """ζ = radius·e^{i·angle}; the default angle π/(2N) bisects the sector."""
        if angle is None:
            angle = math.pi / (2 * N)
        return cls(N, radius * cmath.exp(1j * angle))

    @property
    def alpha(self) -> complex:
        return unit_root(self.N)

    @property
    def z(self) -> complex:
        return self.zeta**self.N

    @property
    def is_threshold(self) -> bool:
        return self.zeta == 0

    @cached_property
    def roots(self) -> np.ndarray:
        """αʲζ for j = 0..N−1."""
        return self.zeta * np.exp(2j * np.pi * np.arange(self.N) / self.N)

    def root(self, m: int) -> complex:
        if not 0 <= m < self.N:
            raise ValueError(f"branch index m={m} out of range for N={self.N}")
        return complex(self.roots[m])

    @property
    def right_branches(self) -> range:
        return right_branches(self.N)

    @property
    def left_branches(self) -> range:
        return left_branches(self.N)

    def with_zeta(self, zeta: complex) -> "SpectralParam":
        return SpectralParam(self.N, zeta)

    def reflected_wavenumber(self) -> complex:
        """ρ = e^{iπ/N}ζ, so that ρᴺ = −ζᴺ (used by the x → −x reflection)."""
        return cmath.exp(1j * math.pi / self.N) * self.zeta


def require_kernel_order(N: int) -> None:
    if N not in SUPPORTED_KERNEL_ORDERS:
        raise ValueError(
            f"kernel assembly is implemented for N in {SUPPORTED_KERNEL_ORDERS}, got {N}"
        )
