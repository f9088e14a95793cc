"""
Tests for the bifurcating eigenvalue family V_κ.
"""

import numpy as np
import pytest

from jostlab.analysis.bifurcation import (
    bifurcation_scaling,
    build_bifurcation_potential,
    eigen_residual,
    joint_mismatch,
    mapped_potential,
    matched_parameter,
    matching_matrix,
    verify_bifurcation_eigenvalue,
)
from jostlab.diagnostics.numerics_config import NumericsConfig
from jostlab.diagnostics.run_logger import RunLogger


class TestConstruction:
    """Test the matched polynomial and the potential."""

    def test_matching_matrix(self):
        """Test that the 8×8 matching system is invertible."""
        matrix = matching_matrix()
        assert matrix.shape == (8, 8)
        assert np.linalg.cond(matrix) < 1e6

    def test_zero_kappa_is_free(self):
        """Test that κ = 0 gives u ≡ 1 and V = 0."""
        member = build_bifurcation_potential(0.0)
        assert np.allclose(member.coefficients, 0.0, atol=1e-14)
        assert member.potential.is_zero

    def test_c3_joints(self):
        """Test that u_κ is C³ across x = ±1."""
        member = build_bifurcation_potential(0.1)
        assert joint_mismatch(member) < 1e-12

    def test_eigen_equation(self):
        """Test that −u‴ + V_κu = κ³u on and off the support."""
        member = build_bifurcation_potential(0.1)
        assert eigen_residual(member) < 1e-8
        assert member.min_u() > 0

    def test_kappa_range(self):
        """Test that κ ≥ κ₀ is refused."""
        config = NumericsConfig()
        with pytest.raises(ValueError, match="kappa must lie"):
            build_bifurcation_potential(config.KAPPA_0, config)

    def test_mapped_potential(self):
        """Test W(x) = iV_κ(−x)."""
        member = build_bifurcation_potential(0.1)
        W = mapped_potential(member)
        x = np.array([-0.7, 0.2, 0.9])
        assert np.allclose(W(x), 1j * member.potential(-x))

    def test_matched_parameter(self):
        """Test ζ³ = iκ³."""
        sp = matched_parameter(0.2)
        assert sp.z == pytest.approx(1j * 0.2**3)


class TestVerification:
    """Test the end-to-end eigenvalue verification."""

    def test_small_kappa(self):
        """Test that κ = 0.1 passes every check."""
        report = verify_bifurcation_eigenvalue(
            0.1, logger=RunLogger(output_format="silent")
        )
        assert report.eigen_residual < 1e-8
        assert report.joint_mismatch < 1e-12
        assert report.decays_right
        assert report.bounded_left
        assert report.dependent

    def test_positive_kappa_required(self):
        """Test that κ = 0 has no eigenvalue to verify."""
        with pytest.raises(ValueError, match="must be positive"):
            verify_bifurcation_eigenvalue(0.0)

    def test_scaling(self):
        """Test that coefficients stay O(κ) and sup|V_κ| shrinks with κ."""
        kappas = [0.02, 0.05, 0.1]
        scaling = bifurcation_scaling(kappas)
        ratios = scaling["coefficient_ratios"]
        assert isinstance(ratios, list)
        assert max(ratios) < 2 * min(ratios)
        sups = scaling["sup_potential"]
        assert isinstance(sups, list)
        assert sups[0] < sups[-1]
        assert scaling["sup_rate"] > 0.5


if __name__ == "__main__":
    pytest.main([__file__])
