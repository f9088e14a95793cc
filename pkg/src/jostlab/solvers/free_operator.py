"""
Exact kernels of the free operator (−i∂ₓ)ᴺ.

free_green is the one-sided fundamental solution G₀, free_resolvent the kernel
of ((−i∂ₓ)ᴺ − ζᴺ)⁻¹ and taylor_split its decomposition into the polynomial part
singular as ζ → 0 plus the remainder R₁. Branch conventions: right roots αʲζ
(Im ≥ 0) build the kernel for x ≥ y, left roots (Im ≤ 0) for x ≤ y.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from jostlab.core.spectral import (
    SpectralParam,
    left_branches,
    right_branches,
    unit_root,
)
from jostlab.diagnostics.errors import MarginalRootError
from jostlab.diagnostics.numerics_config import NumericsConfig


def root_identity(N: int, r: int) -> complex:
    """(1/N)Σⱼ α^{j(r+1−N)}: 0 for r ≤ N−2 and 1 for r = N−1."""
    if not 0 <= r <= N - 1:
        raise ValueError(f"r must lie in [0, {N - 1}], got {r}")
    alpha = unit_root(N)
    return sum(alpha ** (j * (r + 1 - N)) for j in range(N)) / N


def _green_series(N: int, zeta: complex, x: np.ndarray, terms: int) -> np.ndarray:
    """iᴺ Σₖ (iᴺζᴺxᴺ)ᵏ x^{N−1}/(N−1+kN)!, the expansion of G₀ for small |ζx|."""
    lam = (1j**N) * zeta**N
    total = np.zeros(x.shape, dtype=complex)
    for k in range(terms):
        total += lam**k * x ** (N - 1 + k * N) / math.factorial(N - 1 + k * N)
    return (1j**N) * total


def free_green(
    x: np.ndarray | float, sp: SpectralParam, config: NumericsConfig | None = None
) -> np.ndarray:
    """
    G₀(x, ζ) = θ(x)(i/N)Σⱼ e^{iαʲζx}/(αʲζ)^{N−1}.

    The ζ = 0 branch is the polynomial iᴺx^{N−1}/(N−1)!.
    """
    config = config or NumericsConfig()
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    N, zeta = sp.N, sp.zeta
    out = np.zeros(x.shape, dtype=complex)
    pos = x > 0
    if sp.is_threshold:
        out[pos] = (1j**N) * x[pos] ** (N - 1) / math.factorial(N - 1)
    else:
        small = pos & (np.abs(zeta * x) < config.TAYLOR_SWITCH)
        large = pos & ~small
        out[small] = _green_series(N, zeta, x[small], config.SERIES_TERMS)
        if np.any(large):
            roots = sp.roots
            phases = np.exp(1j * np.outer(x[large], roots)) / roots ** (N - 1)
            out[large] = (1j / N) * phases.sum(axis=1)
    return complex(out[0]) if scalar else out


def free_green_derivative_at_zero(N: int, k: int, sp: SpectralParam) -> complex:
    """
    (−i∂ₓ)ᵏG₀(0+, ζ) from the explicit formula.

    For ζ ≠ 0 this is (i/N)Σⱼ (αʲζ)^{k−N+1}; for ζ = 0 only k = N−1 survives.
    Both give 0 for k ≤ N−2 and i for k = N−1. The explicit formula fixes the top
    value at i, the same constant as the (−i∂)^{N−1} resolvent jump.
    """
    if sp.N != N:
        raise ValueError(f"spectral parameter has N={sp.N}, expected {N}")
    if not 0 <= k <= N - 1:
        raise ValueError(f"k must lie in [0, {N - 1}], got {k}")
    if sp.is_threshold:
        if k < N - 1:
            return 0j
        return complex((-1j) ** (N - 1) * (1j**N))
    return complex((1j / N) * np.sum(sp.roots ** (k - N + 1)))


def check_open_sector(sp: SpectralParam, tol: float = 1e-12) -> None:
    """Reject ζ = 0 and boundary rays where a retained exponential stops decaying."""
    if sp.is_threshold:
        raise ValueError("the free resolvent needs zeta != 0")
    scale = abs(sp.zeta)
    for m in right_branches(sp.N):
        if sp.roots[m].imag <= tol * scale:
            raise MarginalRootError(
                f"root alpha^{m} zeta is marginal (Im = {sp.roots[m].imag:.3g})",
                root=m,
                zeta=sp.zeta,
            )
    for m in left_branches(sp.N):
        if sp.roots[m].imag >= -tol * scale:
            raise MarginalRootError(
                f"root alpha^{m} zeta is marginal (Im = {sp.roots[m].imag:.3g})",
                root=m,
                zeta=sp.zeta,
            )


def _branch_sum(
    N: int, roots: np.ndarray, d: np.ndarray, lmin: int, lmax: int
) -> np.ndarray:
    """Σ_roots Σ_{ℓ=lmin}^{lmax} (id)^ℓ ρ^{ℓ−N+1}/ℓ!."""
    total = np.zeros(d.shape, dtype=complex)
    for rho in roots:
        for ell in range(lmin, lmax + 1):
            total += (1j * d) ** ell * rho ** (ell - N + 1) / math.factorial(ell)
    return total


def free_resolvent(
    x: np.ndarray | float,
    y: np.ndarray | float,
    sp: SpectralParam,
    config: NumericsConfig | None = None,
) -> np.ndarray:
    """
    R(x, y; ζ) = (i/N)Σ_{right} e^{iαʲζ(x−y)}/(αʲζ)^{N−1} for x ≥ y and
    −(i/N)Σ_{left} (same) for x ≤ y.
    """
    config = config or NumericsConfig()
    check_open_sector(sp, config.MARGINAL_ROOT_TOL)
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    d = x - y
    split = taylor_split(sp, config)
    out = np.empty(d.shape, dtype=complex)
    small = np.abs(sp.zeta * d) < config.TAYLOR_SWITCH
    out[small] = split.singular(d[small]) + split.remainder_from_difference(d[small])
    if np.any(~small):
        out[~small] = _direct_resolvent(sp, d[~small])
    return complex(out.reshape(-1)[0]) if scalar else out


def _direct_resolvent(sp: SpectralParam, d: np.ndarray) -> np.ndarray:
    N = sp.N
    out = np.zeros(d.shape, dtype=complex)
    right = d >= 0
    for m in right_branches(N):
        rho = sp.roots[m]
        out[right] += np.exp(1j * rho * d[right]) / rho ** (N - 1)
    for m in left_branches(N):
        rho = sp.roots[m]
        out[~right] -= np.exp(1j * rho * d[~right]) / rho ** (N - 1)
    return (1j / N) * out


def free_resolvent_jump(N: int, k: int, sp: SpectralParam) -> complex:
    """∂ₓᵏR(y+0, y) − ∂ₓᵏR(y−0, y), from the explicit branch sums."""
    roots = sp.roots
    upper = sum((1j * roots[m]) ** k / roots[m] ** (N - 1) for m in right_branches(N))
    lower = -sum((1j * roots[m]) ** k / roots[m] ** (N - 1) for m in left_branches(N))
    return complex((1j / N) * (upper - lower))


@dataclass(frozen=True, eq=False)
class FreeKernelSplit:
    """R = singular + remainder, with the singular part a polynomial in x − y."""

    sp: SpectralParam
    config: NumericsConfig = field(default_factory=NumericsConfig)

    @property
    def coefficients(self) -> np.ndarray:
        """Coefficients s_ℓ of the singular part Σ_ℓ s_ℓ(x − y)^ℓ, ℓ = 0..N−2."""
        N = self.sp.N
        roots = self.sp.roots[list(right_branches(N))]
        return np.asarray(
            [
                (1j / N)
                * sum((1j) ** ell * rho ** (ell - N + 1) for rho in roots)
                / math.factorial(ell)
                for ell in range(N - 1)
            ]
        )

    def singular(self, d: np.ndarray) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        out = np.zeros(d.shape, dtype=complex)
        for ell, s in enumerate(self.coefficients):
            out += s * d**ell
        return out

    def remainder_from_difference(self, d: np.ndarray) -> np.ndarray:
        """R₁ as a function of d = x − y."""
        N, sp = self.sp.N, self.sp
        d = np.asarray(d, dtype=float)
        out = np.empty(d.shape, dtype=complex)
        small = np.abs(sp.zeta * d) < self.config.TAYLOR_SWITCH
        if np.any(small):
            ds = d[small]
            right = ds >= 0
            lmax = N - 1 + self.config.SERIES_TERMS
            part = np.empty(ds.shape, dtype=complex)
            part[right] = (1j / N) * _branch_sum(
                N, sp.roots[list(right_branches(N))], ds[right], N - 1, lmax
            )
            part[~right] = -(1j / N) * _branch_sum(
                N, sp.roots[list(left_branches(N))], ds[~right], N - 1, lmax
            )
            out[small] = part
        if np.any(~small):
            dl = d[~small]
            out[~small] = _direct_resolvent(sp, dl) - self.singular(dl)
        return out

    def remainder(self, x: np.ndarray | float, y: np.ndarray | float) -> np.ndarray:
        x, y = np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        )
        return self.remainder_from_difference(x - y)

    def singular_kernel(
        self, x: np.ndarray | float, y: np.ndarray | float
    ) -> np.ndarray:
        x, y = np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        )
        return self.singular(x - y)

    def apply_singular(self, x: np.ndarray, moments: np.ndarray) -> np.ndarray:
        """
        ∫ singular(x − y) f(y) dy given the moments μ_k = ∫ yᵏ f(y) dy.

        Expanding (x − y)^ℓ binomially shows the result only depends on μ_0..μ_{N−2}.
        """
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for ell, s in enumerate(self.coefficients):
            for k in range(ell + 1):
                out += (
                    s * math.comb(ell, k) * x ** (ell - k) * (-1) ** k * moments[k]
                )
        return out


def taylor_split(
    sp: SpectralParam, config: NumericsConfig | None = None
) -> FreeKernelSplit:
    if sp.is_threshold:
        raise ValueError("the Taylor split needs zeta != 0")
    return FreeKernelSplit(sp, config or NumericsConfig())


def remainder_limit(x: np.ndarray, y: np.ndarray, N: int) -> np.ndarray:
    """
    lim_{ζ→0} R₁(x, y; ζ): (i/N)·i^{N−1}(x−y)^{N−1}/(N−1)! times the number of
    right roots for x ≥ y, and times minus the number of left roots for x < y.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    d = x - y
    n_right = len(right_branches(N))
    n_left = N - n_right
    base = (1j / N) * (1j) ** (N - 1) * d ** (N - 1) / math.factorial(N - 1)
    return np.where(d >= 0, n_right * base, -n_left * base)


# looser N = 3 constant used by the regularized resolvent argument
WEAK_REMAINDER_CONSTANT_N3 = 2 / 3


def remainder_bound_constant(N: int) -> float:
    """⌊(N+1)/2⌋/N!, the C in |R₁(x, y; ζ)| ≤ C|x − y|^{N−1}."""
    return ((N + 1) // 2) / math.factorial(N)


def remainder_bound_ratio(
    split: FreeKernelSplit, d: np.ndarray, constant: float | None = None
) -> float:
    """max |R₁(d)| / (C|d|^{N−1}) over d ≠ 0; at most one when the bound holds."""
    N = split.sp.N
    C = remainder_bound_constant(N) if constant is None else constant
    d = np.asarray(d, dtype=float)
    d = d[d != 0]
    if d.size == 0:
        raise ValueError("need at least one nonzero separation")
    ratios = np.abs(split.remainder_from_difference(d)) / (C * np.abs(d) ** (N - 1))
    return float(np.max(ratios))
