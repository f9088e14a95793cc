"""
Tests for Jost solutions.
"""

import numpy as np
import pytest

from jostlab.core.grid import Grid
from jostlab.core.potential import Potential, random_potential
from jostlab.core.spectral import SpectralParam
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import RunLogger
from jostlab.solvers.jost import (
    jost_family,
    jost_left,
    jost_right,
    reflected_jost_left,
)
from jostlab.solvers.transfer import transfer_matrix_oracle


class TestJostSolutions:
    """Test Jost solutions on free and step potentials."""

    def setup_method(self):
        """Set up a step potential, its grid and a quiet logger."""
        self.V = Potential.steps([-1.0, 0.0, 1.0], [0.5, -0.25j])
        self.grid = Grid.for_potential(self.V, X=3.0, h=0.02)
        self.sp = SpectralParam.on_ray(3, 0.8)
        self.config = NumericsConfig()
        self.logger = RunLogger(output_format="silent")

    def test_free_solution_is_exponential(self):
        """Test that V = 0 reproduces e^{iρx} and its derivatives on the whole grid."""
        V = Potential.zero()
        grid = Grid.for_potential(V, X=3.0, h=0.02)
        for m in self.sp.right_branches:
            sol = jost_right(V, self.sp, m, grid, self.config, self.logger)
            expected = sol.tail_derivatives(grid.nodes)
            assert np.allclose(sol.samples, expected, rtol=1e-8, atol=1e-10)

    def test_tail_is_exact(self):
        """Test that the prescribed side carries the exact exponential."""
        sol = jost_right(self.V, self.sp, 0, self.grid, self.config, self.logger)
        mask = sol.tail_mask()
        assert np.allclose(
            sol.values[mask], sol.tail(self.grid.nodes[mask]), rtol=1e-15, atol=0
        )

    def test_matches_transfer_oracle(self):
        """Test that integration across the support agrees with the transfer matrices."""
        for m in self.sp.right_branches:
            sol = jost_right(self.V, self.sp, m, self.grid, self.config, self.logger)
            oracle = transfer_matrix_oracle(self.V, self.sp, 1.0, -1.0)
            expected = oracle.apply(sol.at(1.0))
            assert np.allclose(sol.at(-1.0), expected, rtol=1e-8, atol=1e-10)

    def test_wrong_branch_rejected(self):
        """Test that a growing branch cannot define a right Jost solution."""
        with pytest.raises(ValueError, match="grows at \\+inf"):
            jost_right(self.V, self.sp, 2, self.grid)
        with pytest.raises(ValueError, match="grows at -inf"):
            jost_left(self.V, self.sp, 0, self.grid)

    def test_family_order(self):
        """Test that the family lists right solutions before left ones."""
        family = jost_family(self.V, self.sp, self.grid, self.config, self.logger)
        assert [(s.side, s.m) for s in family] == [
            ("right", 0),
            ("right", 1),
            ("left", 2),
        ]

    def test_reflection_map(self):
        """Test that the reflected problem reproduces the left Jost solution."""
        direct = jost_left(self.V, self.sp, 2, self.grid, self.config, self.logger)
        mirrored = reflected_jost_left(
            self.V, self.sp, 2, self.grid, self.config, self.logger
        )
        assert np.allclose(mirrored.samples, direct.samples, rtol=1e-7, atol=1e-9)

    def test_reflection_needs_odd_order(self):
        """Test that the reflection map refuses even N."""
        sp = SpectralParam.on_ray(2, 0.8)
        with pytest.raises(ValueError, match="odd N"):
            reflected_jost_left(self.V, sp, 1, self.grid)


class TestRandomCorpus:
    """Test Jost solutions over seeded random step potentials."""

    def test_matches_transfer_oracle(self):
        """Test that ten random step potentials agree with their transfer matrices."""
        rng = np.random.default_rng(2024)
        logger = RunLogger(output_format="silent")
        for _ in range(10):
            V = random_potential(rng, n_pieces=4, degree=0)
            assert V.is_piecewise_constant
            grid = Grid.for_potential(V, X=2.0, h=0.05)
            sp = SpectralParam.on_ray(3, float(rng.uniform(0.2, 1.0)))
            oracle = transfer_matrix_oracle(V, sp, 1.0, -1.0)
            assert oracle.determinant == pytest.approx(1.0, abs=1e-10)
            for m in sp.right_branches:
                sol = jost_right(V, sp, m, grid, logger=logger)
                expected = oracle.apply(sol.at(1.0))
                scale = np.max(np.abs(expected))
                assert np.max(np.abs(sol.at(-1.0) - expected)) < 1e-8 * scale


if __name__ == "__main__":
    pytest.main([__file__])
