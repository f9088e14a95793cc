"""
Tests for the spectral parameter and branch bookkeeping.
"""

import cmath
import math

import numpy as np
import pytest

from jostlab.core.spectral import (
    SpectralParam,
    left_branches,
    require_kernel_order,
    right_branches,
    unit_root,
)


class TestBranches:
    """Test branch index sets."""

    def test_branch_split(self):
        """Test right and left branches for N = 2 and N = 3."""
        assert list(right_branches(3)) == [0, 1]
        assert list(left_branches(3)) == [2]
        assert list(right_branches(2)) == [0]
        assert list(left_branches(2)) == [1]

    def test_branch_signs_on_sector(self):
        """Test Im(αᵐζ) ≥ 0 on right branches and ≤ 0 on left ones."""
        for N in (2, 3):
            for angle in np.linspace(0, math.pi / N, 7):
                sp = SpectralParam.on_ray(N, 0.7, angle)
                for m in sp.right_branches:
                    assert sp.root(m).imag >= -1e-12
                for m in sp.left_branches:
                    assert sp.root(m).imag <= 1e-12

    def test_unit_root(self):
        """Test α = e^{2πi/N}."""
        assert unit_root(3) == pytest.approx(cmath.exp(2j * math.pi / 3))
        assert unit_root(3) ** 3 == pytest.approx(1.0)


class TestSpectralParam:
    """Test SpectralParam validation and derived values."""

    def test_sector_validation(self):
        """Test that ζ must lie in the closed sector."""
        SpectralParam(3, cmath.exp(1j * math.pi / 3))
        SpectralParam(3, 0.0)
        with pytest.raises(ValueError, match="outside the sector"):
            SpectralParam(3, 1j)
        with pytest.raises(ValueError, match="outside the sector"):
            SpectralParam(2, -0.1j)

    def test_rejects_small_order(self):
        """Test that N ≥ 2 is required."""
        with pytest.raises(ValueError, match="at least 2"):
            SpectralParam(1, 0.5)

    def test_on_ray_default_angle(self):
        """Test that the default ray bisects the sector."""
        sp = SpectralParam.on_ray(3, 0.2)
        assert cmath.phase(sp.zeta) == pytest.approx(math.pi / 6)
        assert abs(sp.zeta) == pytest.approx(0.2)
        assert sp.z == pytest.approx(sp.zeta**3)

    def test_roots(self):
        """Test that every root has the same N-th power."""
        sp = SpectralParam.on_ray(3, 0.5)
        for m in range(3):
            assert sp.root(m) ** 3 == pytest.approx(sp.z)
        with pytest.raises(ValueError, match="out of range"):
            sp.root(3)

    def test_reflected_wavenumber(self):
        """Test ρᴺ = −ζᴺ."""
        sp = SpectralParam.on_ray(3, 0.4)
        assert sp.reflected_wavenumber() ** 3 == pytest.approx(-sp.z)

    def test_threshold(self):
        """Test the threshold flag."""
        assert SpectralParam(3, 0).is_threshold
        assert not SpectralParam.on_ray(3, 0.1).is_threshold

    def test_kernel_order(self):
        """Test that kernel assembly is limited to N = 2, 3."""
        require_kernel_order(2)
        require_kernel_order(3)
        with pytest.raises(ValueError, match="N in"):
            require_kernel_order(4)


if __name__ == "__main__":
    pytest.main([__file__])
