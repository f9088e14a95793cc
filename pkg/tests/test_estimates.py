"""
Tests for the Jost estimate audits.
"""

import math

import numpy as np
import pytest

from jostlab.analysis.estimates import (
    analyticity_probe,
    audit_derivative_bounds,
    audit_jost_estimates,
    sweep_parameters,
    threshold_continuity,
    zeta_derivative,
)
from jostlab.core.grid import Grid
from jostlab.core.potential import Potential, random_potential
from jostlab.core.spectral import SpectralParam
from jostlab.diagnostics.run_logger import RunLogger
from jostlab.solvers.jost import jost_left, jost_right


def smooth_well() -> Potential:
    return Potential.from_function(
        lambda x: 0.5 * (1 - x**2) ** 2 - 0.2j * (1 - x**2), -1.0, 1.0, degree=8
    )


class TestExplicitEstimates:
    """Test node-by-node margins of the explicit bounds."""

    def setup_method(self):
        """Set up a smooth well on a grid and a quiet logger."""
        self.V = smooth_well()
        self.grid = Grid.for_potential(self.V, X=4.0, h=0.02)
        self.logger = RunLogger(output_format="silent")

    @pytest.mark.parametrize("radius", [0.0, 0.3, 0.9])
    def test_bounds_hold(self, radius):
        """Test that every explicit bound holds on both right branches."""
        sp = SpectralParam(3, 0) if radius == 0 else SpectralParam.on_ray(3, radius)
        for m in sp.right_branches:
            sol = jost_right(self.V, sp, m, self.grid, logger=self.logger)
            report = audit_jost_estimates(sol, self.V, logger=self.logger)
            assert report.passed, report.to_dict()
            names = [c.name for c in report.checks]
            assert "theta_minus_tail" in names
            assert ("theta_bound_nonzero_zeta" in names) == (radius > 0)

    def test_free_margins_are_tight(self):
        """Test that V = 0 leaves zero deviation from the tail."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        sol = jost_right(V, SpectralParam.on_ray(3, 0.5), 0, grid)
        report = audit_jost_estimates(sol, V)
        assert report.passed
        assert np.max(report.check("theta_minus_tail").value) < 1e-9

    def test_left_solution_rejected(self):
        """Test that left Jost solutions are refused."""
        sol = jost_left(self.V, SpectralParam.on_ray(3, 0.5), 2, self.grid)
        with pytest.raises(ValueError, match="right Jost solutions"):
            audit_jost_estimates(sol, self.V)

    def test_radius_outside_disk(self):
        """Test that |ζ| above μ is refused."""
        sol = jost_right(self.V, SpectralParam.on_ray(3, 0.9), 0, self.grid)
        with pytest.raises(ValueError, match="exceeds the disk"):
            audit_jost_estimates(sol, self.V, mu=0.5)


class TestFittedBounds:
    """Test sweeps and fitted-constant audits."""

    def test_sweep_parameters(self):
        """Test the calibration lattice and the fresh midpoints."""
        calibration, fresh = sweep_parameters(3, [0.0, 0.1, 0.2])
        assert len(calibration) == 7
        assert calibration[0].is_threshold
        assert len(fresh) == 2
        assert abs(fresh[0].zeta) == pytest.approx(math.sqrt(0.02))

    def test_free_derivative_bounds(self):
        """Test that V = 0 gives vanishing fitted constants."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        audit = audit_derivative_bounds(V, 3, 0, grid, radii=(0.0, 0.2, 0.4))
        assert all(b.constant < 1e-8 for b in audit.bounds)
        assert [b.name for b in audit.bounds] == [
            "derivative_order_2",
            "derivative_order_1",
        ]

    def test_constants_stable_under_refinement(self):
        """Test that fitted constants move by less than 20% when h is halved."""
        V = smooth_well()
        radii = (0.0, 0.2, 0.4)
        coarse = Grid.for_potential(V, X=3.0, h=0.05)
        fine = Grid.for_potential(V, X=3.0, h=0.025)
        first = audit_derivative_bounds(V, 3, 0, coarse, radii=radii)
        second = audit_derivative_bounds(V, 3, 0, fine, radii=radii)
        for a, b in zip(first.bounds, second.bounds):
            assert a.name == b.name
            assert a.constant > 1e-3
            assert b.constant == pytest.approx(a.constant, rel=0.2)

    def test_radii_inside_disk(self):
        """Test that radii beyond μ are refused."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        with pytest.raises(ValueError, match="inside the disk"):
            audit_derivative_bounds(V, 3, 0, grid, radii=(0.5, 2.0))


class TestZetaDependence:
    """Test ζ-derivatives, analyticity and the threshold limit."""

    def test_free_zeta_derivative(self):
        """Test that ∂_ζ e^{iαᵐζx} equals iαᵐx e^{iαᵐζx}."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        sp = SpectralParam.on_ray(3, 0.5)
        x = grid.nodes
        for m in sp.right_branches:
            alpha_m = sp.alpha**m
            expected = 1j * alpha_m * x * np.exp(1j * alpha_m * sp.zeta * x)
            derivative = zeta_derivative(V, sp, m, grid)
            assert np.allclose(derivative, expected, atol=1e-6)

    def test_zeta_derivative_step_independent(self):
        """Test that halving the difference step leaves ∂_ζθₘ unchanged."""
        V = smooth_well()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        sp = SpectralParam.on_ray(3, 0.5)
        coarse = zeta_derivative(V, sp, 0, grid, step=2e-2)
        fine = zeta_derivative(V, sp, 0, grid, step=1e-2)
        scale = np.max(np.abs(fine))
        assert np.max(np.abs(coarse - fine)) < 1e-6 * scale

    def test_cauchy_riemann(self):
        """Test that θₘ(x, ·) is analytic inside the sector."""
        V = smooth_well()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        report = analyticity_probe(V, SpectralParam.on_ray(3, 0.5), 0, grid)
        assert report.passed()

    def test_boundary_rejected(self):
        """Test that the probe refuses a boundary ray."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        with pytest.raises(ValueError, match="sector boundary"):
            analyticity_probe(V, SpectralParam(3, 0.5), 0, grid)

    def test_threshold_continuity(self):
        """Test linear convergence to the ζ = 0 solution."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        report = threshold_continuity(V, 3, grid, radii=(1e-2, 1e-3, 1e-4))
        assert report.rate == pytest.approx(1.0, abs=0.05)
        assert report.branch_gap[-1] < report.branch_gap[0]


class TestRandomCorpus:
    """Test the explicit estimates over seeded random potentials."""

    def test_bounds_hold_on_corpus(self):
        """Test that twenty random potentials satisfy every explicit bound."""
        rng = np.random.default_rng(5)
        logger = RunLogger(output_format="silent")
        for _ in range(20):
            V = random_potential(rng, n_pieces=3, degree=2)
            grid = Grid.for_potential(V, X=3.0, h=0.02)
            sp = SpectralParam.on_ray(3, float(rng.uniform(0.1, 0.9)))
            for m in sp.right_branches:
                sol = jost_right(V, sp, m, grid, logger=logger)
                report = audit_jost_estimates(sol, V, logger=logger)
                assert report.passed, report.to_dict()


if __name__ == "__main__":
    pytest.main([__file__])
