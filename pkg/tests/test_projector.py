"""
Tests for the finite-rank projector and the rank-one regularized resolvent.
"""

import numpy as np
import pytest

from jostlab.analysis.projector import (
    Projector,
    dense_solve_check,
    projected_resolvent_limit,
    psi_basis,
    psi_basis_audit,
    psi_basis_solution,
    regularized_norms,
    regularized_residual,
    regularized_resolvent,
    require_unit_nodes,
    singular_annihilation,
)
from jostlab.core.grid import Grid
from jostlab.core.potential import Potential
from jostlab.core.spectral import SpectralParam
from jostlab.solvers.kernel_apply import free_separable_kernel


def bump(x: np.ndarray) -> np.ndarray:
    return np.exp(-2.0 * (x - 0.3) ** 2).astype(complex)


class TestProjector:
    """Test the dual basis and the complement."""

    def setup_method(self):
        """Set up a grid with ±1 as breakpoints."""
        self.grid = Grid.build(5.0, 0.02, breakpoints=(-1.0, 1.0))
        self.projector = Projector(3)

    def test_dual_basis(self):
        """Test that φ₀ = 1/2 and φ₁ = 3x/2 on [−1, 1]."""
        assert np.allclose(self.projector.dual_coefficients, [[0.5, 0], [0, 1.5]])
        assert np.allclose(self.projector.biorthogonality(), np.eye(2))
        assert self.projector.phi(0, 2.0) == 0

    def test_phi_jumps(self):
        """Test that the sampled φ₀ carries both one-sided limits at ±1."""
        samples = self.projector.phi_samples(0, self.grid)
        i = self.grid.index_of(1.0)
        assert samples.left[i] == pytest.approx(0.5)
        assert samples.right[i] == 0
        assert samples.integrate(self.grid) == pytest.approx(1.0)

    def test_complement_moments_vanish(self):
        """Test that (I − P)f has zero moments of order 0..N−2."""
        rest = self.projector.complement(bump, self.grid)
        assert np.max(np.abs(self.projector.moments(rest, self.grid))) < 1e-12

    def test_singular_part_annihilated(self):
        """Test that the polynomial part of R(ζ) kills (I − P)f."""
        sp = SpectralParam.on_ray(3, 1e-2)
        assert singular_annihilation(self.projector, sp, bump, self.grid) < 1e-6

    def test_unit_nodes_required(self):
        """Test that ±1 must be breakpoints."""
        with pytest.raises(ValueError, match="must be a grid breakpoint"):
            require_unit_nodes(Grid.build(5.0, 0.02))


class TestRegularizedResolvent:
    """Test the rank-one update R_{B₀}."""

    def setup_method(self):
        """Set up the free kernel on a grid with ±1 as breakpoints."""
        self.grid = Grid.build(5.0, 0.02, breakpoints=(-1.0, 1.0))
        self.sp = SpectralParam.on_ray(3, 0.3)
        self.kernel = free_separable_kernel(self.sp, self.grid)

    def test_residual(self):
        """Test that (A + B₀ − z)u = f holds on interior nodes."""
        solution = regularized_resolvent(self.kernel, bump)
        assert regularized_residual(solution) < 1e-3

    def test_dense_agreement(self):
        """Test the rank-one formula against a dense solve."""
        check = dense_solve_check(self.kernel, bump)
        assert check.algebraic_mismatch < 1e-10
        assert check.quadrature_mismatch < 1e-3

    def test_bounded_near_threshold(self):
        """Test that the regularized resolvent stays bounded as ζ → 0."""
        report = regularized_norms(self.grid, bump, radii=(1e-1, 1e-2, 1e-3))
        assert report.bounded

    def test_projected_limit(self):
        """Test that R(ζ)(I − P)f stays bounded along the ray."""
        report = projected_resolvent_limit(
            Potential.zero(), self.grid, bump, radii=(1e-1, 1e-2, 1e-3)
        )
        assert report.bounded


class TestPsiBasis:
    """Test the rescaled basis ψ₁, ψ₂, ψ₃."""

    def setup_method(self):
        """Set up a grid with ±1 as breakpoints."""
        self.grid = Grid.build(5.0, 0.02, breakpoints=(-1.0, 1.0))
        self.sp = SpectralParam.on_ray(3, 0.2)

    def test_identities(self):
        """Test the operator identities of the basis."""
        report = psi_basis_audit(self.sp, self.grid)
        assert report.worst < 1e-3

    def test_shapes(self):
        """Test that the basis holds derivatives 0..3 at every node."""
        basis = psi_basis(self.sp, self.grid)
        assert basis.psi1.shape == (4, self.grid.size)

    def test_solution_matches_rank_one_update(self):
        """Test that the ψ-basis solution equals the rank-one update."""
        kernel = free_separable_kernel(self.sp, self.grid)
        direct = regularized_resolvent(kernel, bump).u
        solution = psi_basis_solution(self.sp, self.grid, bump)
        interior = self.grid.interior_mask()
        scale = np.max(np.abs(direct))
        assert np.max(np.abs(solution.u - direct)[interior]) < 1e-3 * scale
        assert solution.coefficients[2] == 1

    def test_order_three_only(self):
        """Test that the basis is refused for N = 2."""
        with pytest.raises(ValueError, match="N = 3"):
            psi_basis(SpectralParam.on_ray(2, 0.2), self.grid)


if __name__ == "__main__":
    pytest.main([__file__])
