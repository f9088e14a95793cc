"""
Tests for piecewise-polynomial potentials.
"""

import numpy as np
import pytest

from jostlab.core.potential import (
    Potential,
    PolynomialPiece,
    eval_potential,
    random_potential,
)


class TestPolynomialPiece:
    """Test single polynomial pieces."""

    def test_rejects_empty_interval(self):
        """Test that a < b is enforced."""
        with pytest.raises(ValueError, match="a < b"):
            PolynomialPiece(1.0, 1.0, (1.0,))

    def test_rejects_unknown_basis(self):
        """Test that only power and chebyshev bases are accepted."""
        with pytest.raises(ValueError, match="basis"):
            PolynomialPiece(0.0, 1.0, (1.0,), "legendre")  # type: ignore[arg-type]

    def test_power_basis_uses_global_x(self):
        """Test that power coefficients are in the global variable."""
        piece = PolynomialPiece(0.0, 2.0, (1.0, 2.0, 3.0))
        assert piece(1.0) == pytest.approx(6.0)
        assert not piece.is_constant

    def test_chebyshev_basis_maps_interval(self):
        """Test that chebyshev coefficients live on the piece interval."""
        piece = PolynomialPiece(2.0, 4.0, (0.0, 1.0), "chebyshev")
        assert piece(3.0) == pytest.approx(0.0)
        assert piece(4.0) == pytest.approx(1.0)

    def test_reflection(self):
        """Test that the reflected piece evaluates to −V(−x)."""
        piece = PolynomialPiece(0.0, 1.0, (1.0, 2.0, 1j))
        reflected = piece.reflected()
        assert (reflected.a, reflected.b) == (-1.0, 0.0)
        for x in (-0.9, -0.5, -0.1):
            assert reflected(x) == pytest.approx(-piece(-x))

    def test_chebyshev_reflection(self):
        """Test reflection of a chebyshev piece."""
        piece = PolynomialPiece(0.5, 1.5, (0.3, -0.2, 0.7, 0.1j), "chebyshev")
        reflected = piece.reflected()
        x = np.linspace(-1.5, -0.5, 7)
        np.testing.assert_allclose(reflected(x), -piece(-x), atol=1e-13)


class TestPotential:
    """Test Potential construction and evaluation."""

    def test_indicator(self):
        """Test that the indicator is 1 on [a, b] and 0 outside."""
        V = Potential.indicator(-1.0, 1.0, value=2.0)
        values = V(np.array([-1.5, -1.0, 0.0, 1.0, 1.5]))
        np.testing.assert_allclose(values, [0, 2, 2, 2, 0])
        assert V.is_piecewise_constant
        assert V.sup_norm() == pytest.approx(2.0)

    def test_steps_take_right_value_at_joints(self):
        """Test that interior joints belong to the piece on their right."""
        V = Potential.steps([-1.0, 0.0, 1.0], [1.0, 3.0])
        assert V(0.0) == pytest.approx(3.0)
        assert V(-0.5) == pytest.approx(1.0)
        assert V.breakpoints() == [-1.0, 0.0, 1.0]

    def test_steps_length_mismatch(self):
        """Test that edges and values must match."""
        with pytest.raises(ValueError, match="len"):
            Potential.steps([-1.0, 1.0], [1.0, 2.0])

    def test_rejects_bad_support(self):
        """Test support and overlap validation."""
        with pytest.raises(ValueError, match="positive"):
            Potential(L=0.0)
        with pytest.raises(ValueError, match="leaves the support"):
            Potential(L=1.0, pieces=(PolynomialPiece(-2.0, 0.0, (1.0,)),))
        with pytest.raises(ValueError, match="overlap"):
            Potential(
                L=1.0,
                pieces=(
                    PolynomialPiece(-1.0, 0.5, (1.0,)),
                    PolynomialPiece(0.0, 1.0, (1.0,)),
                ),
            )

    def test_continuity_check(self):
        """Test that continuous=True rejects jumps at joints."""
        pieces = (
            PolynomialPiece(-1.0, 0.0, (1.0,)),
            PolynomialPiece(0.0, 1.0, (2.0,)),
        )
        with pytest.raises(ValueError, match="not continuous"):
            Potential(L=1.0, pieces=pieces, continuous=True)

    def test_zero(self):
        """Test the free potential."""
        V = Potential.zero()
        assert V.is_zero
        assert V.sup_norm() == 0.0
        assert np.all(V(np.linspace(-3, 3, 11)) == 0)

    def test_reflected_and_scaled(self):
        """Test −V(−x) and scalar multiples."""
        V = Potential(L=1.0, pieces=(PolynomialPiece(-0.5, 1.0, (1.0, 1.0)),))
        W = V.reflected().scaled(-1j)
        x = np.linspace(-0.9, 0.4, 9)
        np.testing.assert_allclose(W(x), 1j * V(-x))

    def test_serialization(self):
        """Test the JSON form of a potential."""
        V = Potential(
            L=2.0,
            pieces=(
                PolynomialPiece(-2.0, 0.0, (1.0, 0.5j)),
                PolynomialPiece(0.0, 1.0, (0.2, 0.3), "chebyshev"),
            ),
            label="mixed",
        )
        data = V.to_dict()
        assert data["pieces"][0]["coeffs_im"] == [0.0, 0.5]
        assert data["pieces"][1]["basis"] == "chebyshev"
        assert Potential.from_dict(data) == V

    def test_from_dict_real_only(self):
        """Test that coeffs_im may be omitted."""
        data = {"L": 1.0, "pieces": [{"a": -1.0, "b": 1.0, "coeffs_re": [1.0, 2.0]}]}
        V = Potential.from_dict(data)
        assert V(0.5) == pytest.approx(2.0)

    def test_from_function(self):
        """Test that smooth profiles are interpolated to high accuracy."""
        V = Potential.from_function(np.exp, -1.0, 1.0, degree=20)
        x = np.linspace(-1.0, 1.0, 31)
        np.testing.assert_allclose(V(x), np.exp(x), atol=1e-12)
        assert V.L == 1.0


class TestRandomPotential:
    """Test random corpus potentials."""

    def test_reproducible(self):
        """Test that the same seed gives the same potential."""
        a = random_potential(np.random.default_rng(7))
        b = random_potential(np.random.default_rng(7))
        assert a == b

    def test_support_and_size(self):
        """Test the support and the amplitude bound."""
        V = random_potential(np.random.default_rng(3), n_pieces=4, amplitude=0.5)
        assert len(V.pieces) == 4
        assert V.pieces[0].a == -1.0 and V.pieces[-1].b == 1.0
        assert V.sup_norm() <= np.sqrt(2) * 0.5 + 1e-12

    def test_eval_is_sum_of_pieces(self):
        """Test that eval_potential equals the sum of piece values times indicators."""
        rng = np.random.default_rng(11)
        V = random_potential(rng, n_pieces=4, degree=3)
        for x in rng.uniform(-1.5, 1.5, size=50):
            expected = sum(
                complex(piece(np.asarray([x]))[0])
                for piece in V.pieces
                if piece.a <= x < piece.b
            )
            assert eval_potential(V, float(x)) == pytest.approx(expected, abs=1e-14)


if __name__ == "__main__":
    pytest.main([__file__])
