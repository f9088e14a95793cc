"""
Tests for grids, quadrature and one-sided samples.
"""

import numpy as np
import pytest

from jostlab.core.grid import Grid, OneSidedSamples
from jostlab.core.potential import Potential


class TestGridBuild:
    """Test grid construction."""

    def test_breakpoints_are_nodes(self):
        """Test that every breakpoint is a node."""
        grid = Grid.build(2.0, 0.1, breakpoints=(-1.0, 0.5))
        for point in (-2.0, -1.0, 0.5, 2.0):
            grid.index_of(point)
        assert grid.breakpoints == (-2.0, -1.0, 0.5, 2.0)
        assert len(grid.segments) == 3

    def test_step_bound(self):
        """Test that no cell exceeds h."""
        grid = Grid.build(3.0, 0.07, breakpoints=(0.3,))
        assert np.max(np.diff(grid.nodes)) <= 0.07 + 1e-12

    def test_invalid_arguments(self):
        """Test argument validation."""
        with pytest.raises(ValueError, match="positive"):
            Grid.build(0.0, 0.1)
        with pytest.raises(ValueError, match="order"):
            Grid.build(1.0, 0.1, order=2)
        with pytest.raises(ValueError, match="not a grid node"):
            Grid.build(1.0, 0.1).index_of(0.05)

    def test_for_potential(self):
        """Test that potential breakpoints become nodes."""
        V = Potential.steps([-1.0, 0.25, 1.0], [1.0, 2.0])
        grid = Grid.for_potential(V, X=3.0, h=0.05)
        grid.index_of(0.25)
        assert grid.X == 3.0
        with pytest.raises(ValueError, match="must exceed"):
            Grid.for_potential(V, X=0.5)

    def test_same_nodes(self):
        """Test node comparison."""
        a = Grid.build(1.0, 0.1)
        b = Grid.build(1.0, 0.1)
        assert a.same_nodes(b)
        assert not a.same_nodes(Grid.build(1.0, 0.05))


class TestQuadrature:
    """Test integration and differentiation."""

    def setup_method(self):
        """Set up a Simpson grid."""
        self.grid = Grid.build(2.0, 0.05, breakpoints=(-1.0, 1.0))
        self.x = self.grid.nodes

    def test_integrate_polynomials(self):
        """Test that Simpson weights integrate cubics exactly."""
        assert self.grid.integrate(np.ones_like(self.x)) == pytest.approx(4.0)
        assert self.grid.integrate(self.x**2) == pytest.approx(16.0 / 3.0)
        assert self.grid.integrate(self.x**3) == pytest.approx(0.0, abs=1e-12)

    def test_trapezoid_order(self):
        """Test the trapezoid weights."""
        grid = Grid.build(1.0, 0.1, order=1)
        assert grid.integrate(np.ones(grid.size)) == pytest.approx(2.0)

    def test_cumulative(self):
        """Test left and right cumulative integrals."""
        left = self.grid.cumulative_from_left(np.ones_like(self.x))
        right = self.grid.cumulative_from_right(np.ones_like(self.x))
        np.testing.assert_allclose(left, self.x + 2.0, atol=1e-12)
        np.testing.assert_allclose(right, 2.0 - self.x, atol=1e-12)

    def test_derivative(self):
        """Test spline derivatives of a polynomial."""
        derivative = self.grid.derivative(self.x**3 - 2j * self.x)
        np.testing.assert_allclose(derivative, 3 * self.x**2 - 2j, atol=1e-8)

    def test_interior_mask(self):
        """Test that the mask drops nodes next to breakpoints."""
        mask = self.grid.interior_mask(margin=2)
        assert not mask[self.grid.index_of(-1.0)]
        assert not mask[self.grid.index_of(1.0)]
        assert mask[self.grid.index_of(0.0)]


class TestOneSidedSamples:
    """Test samples with jumps at breakpoints."""

    def setup_method(self):
        """Set up a grid with breakpoints at ±1."""
        self.grid = Grid.build(2.0, 0.1, breakpoints=(-1.0, 1.0))
        self.x = self.grid.nodes

    def test_indicator_limits(self):
        """Test left and right limits at the jumps."""
        f = OneSidedSamples.indicator_times(self.grid, np.ones(self.grid.size), -1, 1)
        lo, hi = self.grid.index_of(-1.0), self.grid.index_of(1.0)
        assert (f.left[lo], f.right[lo]) == (0, 1)
        assert (f.left[hi], f.right[hi]) == (1, 0)

    def test_integral_of_indicator_is_exact(self):
        """Test that resolved jumps leave no O(h) quadrature error."""
        f = OneSidedSamples.indicator_times(self.grid, np.ones(self.grid.size), -1, 1)
        assert f.integrate(self.grid) == pytest.approx(2.0, abs=1e-12)

        g = OneSidedSamples.indicator_times(self.grid, self.x**2, -1, 1)
        assert g.integrate(self.grid) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_cumulative_with_right_limits(self):
        """Test cumulative integrals of a jump function."""
        f = OneSidedSamples.indicator_times(self.grid, np.ones(self.grid.size), -1, 1)
        out = self.grid.cumulative_from_left(f.left, f.right)
        expected = np.clip(self.x + 1.0, 0.0, 2.0)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_arithmetic(self):
        """Test sums, differences and scalar or array products."""
        f = OneSidedSamples.smooth(np.ones(self.grid.size))
        g = OneSidedSamples.indicator_times(self.grid, np.ones(self.grid.size), -1, 1)
        total = 2 * f - g
        assert isinstance(total, OneSidedSamples)
        assert total.integrate(self.grid) == pytest.approx(8.0 - 2.0)

        weighted = self.x * g
        assert isinstance(weighted, OneSidedSamples)
        assert weighted.integrate(self.grid) == pytest.approx(0.0, abs=1e-12)


if __name__ == "__main__":
    pytest.main([__file__])
