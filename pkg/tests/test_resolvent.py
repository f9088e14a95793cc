"""
Tests for Δ(ζ), kernel assembly and the kernel audits.
"""

import numpy as np
import pytest

from jostlab.core.grid import Grid
from jostlab.core.potential import Potential, random_potential
from jostlab.core.spectral import SpectralParam
from jostlab.diagnostics.errors import DependenceError
from jostlab.diagnostics.run_logger import RunLogger
from jostlab.solvers.free_operator import free_resolvent
from jostlab.solvers.jost import jost_family
from jostlab.solvers.resolvent import (
    apply_operator_residual,
    assemble_kernel,
    audit_kernel_growth,
    audit_kernel_structure,
    bracket,
    bracket_conjugate_check,
    bracket_threshold_decay,
    calibrate_jump_constant,
    classical_green,
    delta,
    delta_sweep,
    free_delta,
    gaussian_bump,
    resolvent_kernel,
)


def smooth_well() -> Potential:
    return Potential.from_function(
        lambda x: 0.5 * (1 - x**2) ** 2 - 0.2j * (1 - x**2), -1.0, 1.0, degree=8
    )


class TestDelta:
    """Test the Jost determinant."""

    def setup_method(self):
        """Set up a step potential and its grid."""
        self.V = Potential.steps([-1.0, 0.0, 1.0], [0.5, -0.25j])
        self.grid = Grid.for_potential(self.V, X=3.0, h=0.02)
        self.sp = SpectralParam.on_ray(3, 0.8)

    def test_free_vandermonde(self):
        """Test that Δ for V = 0 equals the Vandermonde product."""
        grid = Grid.for_potential(Potential.zero(), X=3.0, h=0.02)
        family = jost_family(Potential.zero(), self.sp, grid)
        report = delta(family)
        assert report.value == pytest.approx(free_delta(self.sp), rel=1e-8)
        assert not report.dependent

    def test_x_independence(self):
        """Test that Δ does not depend on the probe point."""
        report = delta(jost_family(self.V, self.sp, self.grid))
        assert report.spread < 1e-8
        assert len(report.probes) > 1

    def test_sweep(self):
        """Test that a sweep returns one report per spectral parameter."""
        zetas = [0.5 * np.exp(1j * np.pi / 6), 0.9 * np.exp(1j * np.pi / 8)]
        sweep = delta_sweep(self.V, 3, zetas, self.grid)
        assert [z for z, _ in sweep] == pytest.approx(zetas)
        assert all(not r.dependent for _, r in sweep)

    def test_count_mismatch(self):
        """Test that a family of the wrong size is rejected."""
        family = jost_family(self.V, self.sp, self.grid)
        with pytest.raises(ValueError, match="need 3 solutions"):
            delta(family[:2])


class TestResolventKernel:
    """Test assembled resolvent kernels."""

    def setup_method(self):
        """Set up a smooth complex well, a grid and a quiet logger."""
        self.V = smooth_well()
        self.grid = Grid.for_potential(self.V, X=4.0, h=0.02)
        self.sp = SpectralParam.on_ray(3, 0.7)
        self.logger = RunLogger(output_format="silent")

    def test_jump_calibration(self):
        """Test that the calibrated jump constant is iᴺ."""
        assert calibrate_jump_constant(3) == pytest.approx(1j**3)
        assert calibrate_jump_constant(2) == pytest.approx(1j**2)

    def test_free_kernel_matches_closed_form(self):
        """Test that V = 0 reproduces the explicit free resolvent."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=4.0, h=0.02)
        kernel = resolvent_kernel(V, self.sp, grid, logger=self.logger)
        idx = np.arange(0, grid.size, 20)
        x = grid.nodes[idx]
        values = kernel.separable.evaluate(idx[:, None], idx[None, :])
        expected = free_resolvent(x[:, None], x[None, :], self.sp)
        assert np.allclose(values, expected, atol=1e-7)

    def test_structure(self):
        """Test continuity, jump and cofactor agreement on a nonzero potential."""
        kernel = resolvent_kernel(self.V, self.sp, self.grid, logger=self.logger)
        report = audit_kernel_structure(kernel)
        assert report.passed()
        assert report.to_dict()["jump_modulus_error"] < 1e-6

    def test_operator_residual(self):
        """Test that G inverts the operator on a smooth bump."""
        kernel = resolvent_kernel(self.V, self.sp, self.grid, logger=self.logger)
        assert apply_operator_residual(kernel, gaussian_bump()) < 1e-3

    def test_growth_bound(self):
        """Test that the fitted growth constant holds on fresh nodes."""
        kernel = resolvent_kernel(self.V, self.sp, self.grid, logger=self.logger)
        assert audit_kernel_growth(kernel).passed

    def test_dependent_family(self):
        """Test that a repeated solution is reported as dependent."""
        family = jost_family(self.V, self.sp, self.grid)
        with pytest.raises(DependenceError):
            assemble_kernel(
                [family[0], family[0], family[2]], self.V, logger=self.logger
            )

    def test_order_of_solutions(self):
        """Test that left solutions may not come first."""
        family = jost_family(self.V, self.sp, self.grid)
        with pytest.raises(ValueError, match="expected 2 right"):
            assemble_kernel([family[2], family[0], family[1]], self.V)


class TestSecondOrder:
    """Test the N = 2 regression case against the classical formula."""

    def test_free_exponential(self):
        """Test that N = 2, V = 0, ζ = i gives e^{−|x−y|}/2."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=4.0, h=0.02)
        kernel = resolvent_kernel(V, SpectralParam(2, 1j), grid)
        idx = np.arange(0, grid.size, 20)
        x = grid.nodes[idx]
        values = kernel.separable.evaluate(idx[:, None], idx[None, :])
        expected = 0.5 * np.exp(-np.abs(x[:, None] - x[None, :]))
        assert np.allclose(values, expected, atol=1e-8)

    def test_classical_green(self):
        """Test that the assembled kernel equals θ(x_>)γ(x_<)/W."""
        V = smooth_well()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        kernel = resolvent_kernel(V, SpectralParam.on_ray(2, 0.8), grid)
        reference = classical_green(kernel.solutions[0], kernel.solutions[1])
        scale = np.max(np.abs(reference))
        assert np.max(np.abs(kernel.matrix() - reference)) < 1e-7 * scale


class TestBrackets:
    """Test identities of the bracket {θ₂, θ₁}."""

    def test_conjugate_equation(self):
        """Test that the bracket of two right solutions solves the conjugate equation."""
        V = smooth_well()
        grid = Grid.for_potential(V, X=3.0, h=0.02)
        sp = SpectralParam.on_ray(3, 0.6)
        family = jost_family(V, sp, grid)
        report = bracket_conjugate_check(family[0], family[1], V)
        assert report.equation_residual < 1e-3
        assert report.first_identity_residual < 1e-3

    def test_alternating(self):
        """Test that {f, f} = 0 and {f, g} = −{g, f}."""
        V = smooth_well()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        family = jost_family(V, SpectralParam.on_ray(3, 0.6), grid)
        assert np.max(np.abs(bracket(family[0], family[0]).values)) == 0.0
        forward = bracket(family[0], family[1]).values
        backward = bracket(family[1], family[0]).values
        np.testing.assert_allclose(forward, -backward, rtol=0, atol=1e-15)

    def test_free_closed_form(self):
        """Test that V = 0 gives {θ₀, θ₁} = i(α − 1)ζe^{i(1+α)ζx}."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        sp = SpectralParam.on_ray(3, 0.6)
        family = jost_family(V, sp, grid)
        x = grid.nodes
        phase = np.exp(1j * (1 + sp.alpha) * sp.zeta * x)
        expected = 1j * (sp.alpha - 1) * sp.zeta * phase
        values = bracket(family[0], family[1]).values
        np.testing.assert_allclose(values, expected, rtol=1e-7, atol=1e-9)

    def test_threshold_decay(self):
        """Test that the bracket vanishes linearly in ε for V = 0."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        report = bracket_threshold_decay(V, grid, [1e-2, 1e-3, 1e-4])
        assert report.rate == pytest.approx(1.0, abs=0.05)

    def test_threshold_decay_needs_two_right_roots(self):
        """Test that N = 2 is refused."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        with pytest.raises(ValueError, match="N >= 3"):
            bracket_threshold_decay(V, grid, [1e-2], N=2)


class TestRandomCorpus:
    """Test kernel structure and brackets over seeded random potentials."""

    def test_structure_and_brackets(self):
        """Test that ten random potentials pass the structural and bracket audits."""
        rng = np.random.default_rng(17)
        logger = RunLogger(output_format="silent")
        sp = SpectralParam.on_ray(3, 0.6)
        for _ in range(10):
            V = random_potential(rng, n_pieces=3, degree=2)
            grid = Grid.for_potential(V, X=3.0, h=0.02)
            kernel = resolvent_kernel(V, sp, grid, logger=logger)
            report = audit_kernel_structure(kernel)
            assert report.passed(), report.to_dict()
            theta0, theta1 = kernel.solutions[0], kernel.solutions[1]
            conjugate = bracket_conjugate_check(theta0, theta1, V)
            assert conjugate.equation_residual < 1e-3


if __name__ == "__main__":
    pytest.main([__file__])
