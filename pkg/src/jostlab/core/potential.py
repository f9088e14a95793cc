"""
Compactly supported piecewise-polynomial potentials.

A Potential is a tuple of polynomial pieces on disjoint intervals inside
[−L, L]; it evaluates to exactly 0 elsewhere. Pieces use either the power basis
in the global variable x or a Chebyshev series mapped onto the piece interval,
the latter for smooth non-polynomial profiles that are stored as interpolants.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Sequence

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

Basis = Literal["power", "chebyshev"]

JOINT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PolynomialPiece:
    """One polynomial piece of a potential on [a, b]."""

    a: float
    b: float
    coeffs: tuple[complex, ...]
    basis: Basis = "power"

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(
                f"piece interval must satisfy a < b, got [{self.a}, {self.b}]"
            )
        if not self.coeffs:
            raise ValueError("piece needs at least one coefficient")
        if self.basis not in ("power", "chebyshev"):
            raise ValueError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    def series(self) -> Polynomial | Chebyshev:
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.basis == "chebyshev":
            return Chebyshev(coeffs, domain=[self.a, self.b])
        return Polynomial(coeffs)

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        return np.asarray(self.series()(np.asarray(x, dtype=float)), dtype=complex)

    @property
    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    @property
    def constant_value(self) -> complex:
        return self.coeffs[0]

    def reflected(self) -> "PolynomialPiece":
        """The piece of −V(−x) on [−b, −a]."""
        signs = [(-1) ** k for k in range(len(self.coeffs))]
        coeffs = tuple(-s * c for s, c in zip(signs, self.coeffs))
        return PolynomialPiece(-self.b, -self.a, coeffs, self.basis)

    def scaled(self, factor: complex) -> "PolynomialPiece":
        return PolynomialPiece(
            self.a, self.b, tuple(factor * c for c in self.coeffs), self.basis
        )

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "a": self.a,
            "b": self.b,
            "coeffs_re": [c.real for c in self.coeffs],
            "coeffs_im": [c.imag for c in self.coeffs],
        }
        if self.basis != "power":
            data["basis"] = self.basis
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PolynomialPiece":
        re = list(data["coeffs_re"])
        im = list(data.get("coeffs_im") or [0.0] * len(re))
        if len(im) != len(re):
            raise ValueError("coeffs_re and coeffs_im must have equal length")
        coeffs = tuple(complex(r, i) for r, i in zip(re, im))
        basis = data.get("basis", "power")
        return cls(float(data["a"]), float(data["b"]), coeffs, basis)


@dataclass(frozen=True)
class Potential:
    """Piecewise-polynomial complex potential supported in [−L, L]."""

    L: float
    pieces: tuple[PolynomialPiece, ...] = ()
    continuous: bool = False
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"support radius L must be positive, got {self.L}")
        pieces = tuple(sorted(self.pieces, key=lambda p: p.a))
        object.__setattr__(self, "pieces", pieces)
        for piece in pieces:
            if piece.a < -self.L or piece.b > self.L:
                raise ValueError(
                    f"piece [{piece.a}, {piece.b}] leaves the support [-{self.L}, {self.L}]"
                )
        for left, right in zip(pieces, pieces[1:]):
            if right.a < left.b:
                raise ValueError(
                    f"pieces [{left.a}, {left.b}] and [{right.a}, {right.b}] overlap"
                )
        if self.continuous:
            self._check_joints()

    def _check_joints(self):
        for left, right in zip(self.pieces, self.pieces[1:]):
            if right.a != left.b:
                continue
            lhs, rhs = complex(left(left.b)), complex(right(right.a))
            if abs(lhs - rhs) > JOINT_TOLERANCE * max(1.0, abs(lhs)):
                raise ValueError(f"potential is not continuous at x={left.b}")

    @classmethod
    def zero(cls, L: float = 1.0) -> "Potential":
        return cls(L=L, pieces=(), continuous=True, label="free")

    @classmethod
    def indicator(
        cls, a: float = -1.0, b: float = 1.0, value: complex = 1.0, L: float | None = None
    ) -> "Potential":
        """value·χ_[a,b]."""
        L = L if L is not None else max(abs(a), abs(b))
        return cls(L=L, pieces=(PolynomialPiece(a, b, (value,)),), label="indicator")

    @classmethod
    def steps(cls, edges: Sequence[float], values: Sequence[complex]) -> "Potential":
        """Piecewise-constant potential with values[k] on [edges[k], edges[k+1]]."""
        if len(edges) != len(values) + 1:
            raise ValueError("need len(edges) == len(values) + 1")
        pieces = tuple(
            PolynomialPiece(a, b, (v,)) for a, b, v in zip(edges, edges[1:], values)
        )
        L = max(abs(edges[0]), abs(edges[-1]))
        return cls(L=L, pieces=pieces, label="steps")

    @classmethod
    def from_function(
        cls,
        func: Callable[[np.ndarray], np.ndarray],
        a: float,
        b: float,
        degree: int = 40,
        L: float | None = None,
        label: str = "interpolated",
    ) -> "Potential":
        """Chebyshev interpolant of a smooth profile on [a, b]."""
        series = Chebyshev.interpolate(
            lambda t: np.asarray(func(t), dtype=complex), degree, domain=[a, b]
        )
        piece = PolynomialPiece(a, b, tuple(series.coef), "chebyshev")
        L = L if L is not None else max(abs(a), abs(b))
        return cls(L=L, pieces=(piece,), label=label)

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for k, piece in enumerate(self.pieces):
            last = k == len(self.pieces) - 1 or self.pieces[k + 1].a > piece.b
            mask = (x >= piece.a) & ((x < piece.b) | (last & (x == piece.b)))
            if np.any(mask):
                out[mask] = piece(x[mask])
        out[np.abs(x) > self.L] = 0
        return out

    @property
    def is_zero(self) -> bool:
        return all(all(c == 0 for c in p.coeffs) for p in self.pieces)

    @property
    def is_piecewise_constant(self) -> bool:
        return all(p.is_constant for p in self.pieces)

    def breakpoints(self) -> list[float]:
        """Sorted piece endpoints together with ±L."""
        points = {-self.L, self.L}
        for piece in self.pieces:
            points.update((piece.a, piece.b))
        return sorted(points)

    def segments(self) -> list[tuple[float, float, PolynomialPiece | None]]:
        """Consecutive intervals of [−L, L] with the piece active on each."""
        points = self.breakpoints()
        result = []
        for a, b in zip(points, points[1:]):
            active = next((p for p in self.pieces if p.a <= a and b <= p.b), None)
            result.append((a, b, active))
        return result

    def reflected(self) -> "Potential":
        """x ↦ −V(−x), the potential of the reflected problem for odd N."""
        return Potential(
            L=self.L,
            pieces=tuple(p.reflected() for p in self.pieces),
            continuous=self.continuous,
            label=f"reflected({self.label})" if self.label else "reflected",
        )

    def scaled(self, factor: complex) -> "Potential":
        return Potential(
            L=self.L,
            pieces=tuple(p.scaled(factor) for p in self.pieces),
            continuous=self.continuous,
            label=self.label,
        )

    def sup_norm(self, samples: int = 2001) -> float:
        if not self.pieces:
            return 0.0
        x = np.linspace(-self.L, self.L, samples)
        x = np.union1d(x, np.asarray(self.breakpoints()))
        return float(np.max(np.abs(self(x))))

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "L": self.L,
            "pieces": [p.to_dict() for p in self.pieces],
        }
        if self.continuous:
            data["continuous"] = True
        if self.label:
            data["label"] = self.label
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Potential":
        return cls(
            L=float(data["L"]),
            pieces=tuple(PolynomialPiece.from_dict(p) for p in data.get("pieces", [])),
            continuous=bool(data.get("continuous", False)),
            label=str(data.get("label", "")),
        )


def eval_potential(V: Potential, x: float) -> complex:
    return complex(V(np.asarray([x]))[0])


def random_potential(
    rng: np.random.Generator,
    n_pieces: int = 3,
    degree: int = 2,
    amplitude: float = 1.0,
    L: float = 1.0,
    complex_valued: bool = True,
) -> Potential:
    """Random piecewise polynomial on [−L, L] with sup-norm of order amplitude."""
    inner = np.sort(rng.uniform(-L, L, size=n_pieces - 1)) if n_pieces > 1 else []
    edges = [-L, *inner, L]
    pieces = []
    for a, b in zip(edges, edges[1:]):
        # Chebyshev coefficients on [a, b] keep the sup-norm under control
        re = rng.uniform(-1.0, 1.0, size=degree + 1)
        im = rng.uniform(-1.0, 1.0, size=degree + 1) if complex_valued else 0.0
        coeffs = amplitude * (re + 1j * im) / (degree + 1)
        series = Chebyshev(coeffs, domain=[a, b]).convert(kind=Polynomial)
        pieces.append(PolynomialPiece(float(a), float(b), tuple(series.coef)))
    return Potential(L=L, pieces=tuple(pieces), label="random")
