"""
Spatial grids with forced breakpoints, composite quadrature weights, cumulative
integrals and piecewise spline differentiation.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import make_interp_spline

from jostlab.core.potential import Potential

NODE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Grid:
    """Nodes on [−X, X] that contain every breakpoint exactly."""

    nodes: np.ndarray
    weights: np.ndarray
    breakpoints: tuple[float, ...]
    segments: tuple[tuple[int, int], ...]
    X: float
    h: float
    order: int

    @classmethod
    def build(
        cls,
        X: float,
        h: float,
        breakpoints: Iterable[float] = (),
        order: int = 3,
        min_cells: int = 6,
    ) -> "Grid":
        """
        Build a grid on [−X, X].

        Args:
            X: Half-width of the domain.
            h: Target step; each segment between breakpoints gets a uniform step <= h.
            breakpoints: Points that must be nodes (potential pieces, ±L, test supports).
            order: 1 for composite trapezoid weights, 3 for composite Simpson.
            min_cells: Minimum number of cells per segment (keeps splines well posed).
        """
        if X <= 0 or h <= 0:
            raise ValueError(f"X and h must be positive, got X={X}, h={h}")
        if order not in (1, 3):
            raise ValueError(f"quadrature order must be 1 or 3, got {order}")
        points = sorted({-X, X, *(float(b) for b in breakpoints if -X < b < X)})
        nodes: list[float] = [points[0]]
        weights: list[float] = [0.0]
        segments: list[tuple[int, int]] = []
        for a, b in zip(points, points[1:]):
            cells = max(min_cells, math.ceil((b - a) / h - 1e-9))
            if order == 3 and cells % 2:
                cells += 1
            step = (b - a) / cells
            local = np.linspace(a, b, cells + 1)
            if order == 3:
                w = np.ones(cells + 1)
                w[1:-1:2] = 4.0
                w[2:-1:2] = 2.0
                w *= step / 3.0
            else:
                w = np.full(cells + 1, step)
                w[0] = w[-1] = step / 2.0
            start = len(nodes) - 1
            weights[-1] += w[0]
            nodes.extend(local[1:])
            weights.extend(w[1:])
            segments.append((start, len(nodes)))
        return cls(
            nodes=np.asarray(nodes),
            weights=np.asarray(weights),
            breakpoints=tuple(points),
            segments=tuple(segments),
            X=float(X),
            h=float(h),
            order=order,
        )

    @classmethod
    def for_potential(
        cls,
        V: Potential,
        X: float | None = None,
        h: float = 0.02,
        extra_breakpoints: Sequence[float] = (),
        order: int = 3,
    ) -> "Grid":
        """Grid covering supp V with ±L and every piece boundary as nodes."""
        if X is None:
            X = max(2.0 * V.L, V.L + 4.0)
        if X <= V.L:
            raise ValueError(
                f"grid half-width X={X} must exceed support radius L={V.L}"
            )
        return cls.build(X, h, [*V.breakpoints(), *extra_breakpoints], order=order)

    @property
    def size(self) -> int:
        return len(self.nodes)

    def same_nodes(self, other: "Grid") -> bool:
        return self is other or (
            self.size == other.size and np.array_equal(self.nodes, other.nodes)
        )

    def index_of(self, x: float) -> int:
        idx = int(np.argmin(np.abs(self.nodes - x)))
        if abs(self.nodes[idx] - x) > NODE_TOLERANCE * max(1.0, abs(x)):
            raise ValueError(f"x={x} is not a grid node")
        return idx

    def indices_of(self, xs: Iterable[float]) -> np.ndarray:
        return np.asarray([self.index_of(x) for x in xs], dtype=int)

    def breakpoint_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        for start, _ in self.segments:
            mask[start] = True
        mask[-1] = True
        return mask

    def interior_mask(self, margin: int = 2) -> np.ndarray:
        """Nodes at least `margin` cells away from every breakpoint."""
        mask = np.ones(self.size, dtype=bool)
        for start, stop in self.segments:
            mask[start : start + margin] = False
            mask[stop - margin : stop] = False
        return mask

    def _start_weight(self, start: int) -> float:
        step = self.nodes[start + 1] - self.nodes[start]
        return step / 3.0 if self.order == 3 else step / 2.0

    def weighted(
        self, values: np.ndarray, right_limits: np.ndarray | None = None
    ) -> np.ndarray:
        """
        Quadrature weight times value at every node, so that the sum is the
        integral. With right_limits, each segment starts from the right limit.
        """
        out = self.weights * np.asarray(values, dtype=complex)
        if right_limits is not None:
            for start, _ in self.segments:
                out[start] += self._start_weight(start) * (
                    right_limits[start] - values[start]
                )
        return out

    def integrate(
        self, values: np.ndarray, right_limits: np.ndarray | None = None
    ) -> complex:
        return complex(np.sum(self.weighted(values, right_limits)))

    def cumulative_from_left(
        self, values: np.ndarray, right_limits: np.ndarray | None = None
    ) -> np.ndarray:
        """
        ∫_{−X}^{x_i} values, segment by segment.

        values holds left limits at breakpoints; right_limits, when given,
        supplies the value each segment starts from.
        """
        values = np.asarray(values)
        out = np.zeros(values.shape, dtype=complex)
        offset = 0j
        for start, stop in self.segments:
            x = self.nodes[start:stop]
            local_values = values[start:stop]
            if right_limits is not None:
                local_values = np.array(local_values, dtype=complex)
                local_values[0] = right_limits[start]
            local = _cumulative(local_values, x)
            out[start:stop] = offset + local
            offset = out[stop - 1]
        return out

    def cumulative_from_right(
        self, values: np.ndarray, right_limits: np.ndarray | None = None
    ) -> np.ndarray:
        """∫_{x_i}^{X} values."""
        left = self.cumulative_from_left(values, right_limits)
        return left[-1] - left

    def derivative(self, values: np.ndarray, degree: int = 5) -> np.ndarray:
        """
        Derivative of piecewise-smooth samples by splines fitted per segment.

        Breakpoint nodes take the value from the segment on their right (the
        last node takes it from the last segment).
        """
        values = np.asarray(values)
        out = np.zeros(values.shape, dtype=complex)
        for start, stop in reversed(self.segments):
            x = self.nodes[start:stop]
            k = min(degree, len(x) - 1)
            y = values[start:stop]
            re = make_interp_spline(x, y.real, k=k).derivative()(x)
            im = make_interp_spline(x, y.imag, k=k).derivative()(x)
            if stop == self.size:
                out[start:stop] = re + 1j * im
            else:
                out[start : stop - 1] = (re + 1j * im)[:-1]
        return out


def _cumulative(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    if len(x) < 3:
        steps = np.diff(x) * (values[1:] + values[:-1]) / 2.0
        return np.concatenate([[0.0], np.cumsum(steps)])
    re = cumulative_simpson(np.real(values), x=x, initial=0)
    im = cumulative_simpson(np.imag(values), x=x, initial=0)
    return re + 1j * im


@dataclass(frozen=True, eq=False)
class OneSidedSamples:
    """
    Samples of a function that may jump at grid breakpoints.

    left holds the left limit at every node and right the right limit; they
    differ only at breakpoints.
    """

    left: np.ndarray
    right: np.ndarray

    # ndarray * samples defers to __rmul__
    __array_ufunc__ = None

    @classmethod
    def smooth(cls, values: np.ndarray) -> "OneSidedSamples":
        values = np.asarray(values, dtype=complex)
        return cls(values, values)

    @classmethod
    def indicator_times(
        cls, grid: Grid, values: np.ndarray, a: float, b: float
    ) -> "OneSidedSamples":
        """values·χ_{[a, b]} with the jumps at a and b resolved."""
        x = grid.nodes
        values = np.asarray(values, dtype=complex)
        left = np.where((x > a) & (x <= b), values, 0.0)
        right = np.where((x >= a) & (x < b), values, 0.0)
        return cls(left, right)

    def integrate(self, grid: Grid) -> complex:
        return grid.integrate(self.left, self.right)

    def __add__(self, other: "OneSidedSamples") -> "OneSidedSamples":
        return OneSidedSamples(self.left + other.left, self.right + other.right)

    def __sub__(self, other: "OneSidedSamples") -> "OneSidedSamples":
        return OneSidedSamples(self.left - other.left, self.right - other.right)

    def __mul__(self, factor: complex | np.ndarray) -> "OneSidedSamples":
        return OneSidedSamples(self.left * factor, self.right * factor)

    __rmul__ = __mul__
