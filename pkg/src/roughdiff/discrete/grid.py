"""Uniform staggered grids on intervals and rectangles.

``u`` lives on interior nodes (homogeneous Dirichlet values are implicit),
the flux ``q`` on cell faces. In 1-D a face is a grid cell; in 2-D the
x-faces are the horizontal edges joining node ``(i, j)`` to ``(i + 1, j)`` and
the y-faces the vertical edges joining ``(i, j)`` to ``(i, j + 1)``. All
unknowns carry the same quadrature weight ``prod(h)``, so the Euclidean
adjoint of the discrete gradient is the discrete ``-div``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..coefficient import CoefficientField, Interval, PiecewiseFunction, mollify
from ..errors import DomainError, UsageError

__all__ = [
    "Grid",
    "cell_values",
    "face_values",
    "checkerboard",
    "mollified_checkerboard",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``cells[k]`` cells along axis ``k``."""

    lower: tuple
    upper: tuple
    cells: tuple

    def __post_init__(self):
        lower = tuple(float(x) for x in self.lower)
        upper = tuple(float(x) for x in self.upper)
        cells = tuple(int(n) for n in self.cells)
        if not (len(lower) == len(upper) == len(cells)) or len(cells) not in (1, 2):
            raise UsageError("grid must be 1-D or 2-D with matching bounds")
        if any(n < 2 for n in cells):
            raise UsageError("need at least two cells per axis")
        if any(not lo < hi for lo, hi in zip(lower, upper)):
            raise DomainError("grid bounds must satisfy lower < upper")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def line(cls, a: float, b: float, n: int) -> "Grid":
        return cls((a,), (b,), (n,))

    @classmethod
    def rectangle(cls, x: tuple, y: tuple, nx: int, ny: int | None = None) -> "Grid":
        return cls((x[0], y[0]), (x[1], y[1]), (nx, nx if ny is None else ny))

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def h(self) -> tuple:
        return tuple((hi - lo) / n for lo, hi, n in zip(self.lower, self.upper, self.cells))

    @property
    def weight(self) -> float:
        """Quadrature weight shared by every unknown."""
        return float(np.prod(self.h))

    @property
    def interval(self) -> Interval:
        return Interval(self.lower[0], self.upper[0])

    def axis_nodes(self, k: int) -> np.ndarray:
        return np.linspace(self.lower[k], self.upper[k], self.cells[k] + 1)

    def axis_centers(self, k: int) -> np.ndarray:
        x = self.axis_nodes(k)
        return 0.5 * (x[:-1] + x[1:])

    @property
    def node_shape(self) -> tuple:
        return tuple(n - 1 for n in self.cells)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.node_shape))

    @property
    def face_shapes(self) -> tuple:
        if self.dim == 1:
            return (self.cells,)
        nx, ny = self.cells
        return ((nx, ny - 1), (nx - 1, ny))

    @property
    def n_faces(self) -> int:
        return int(sum(np.prod(s) for s in self.face_shapes))

    def nodes(self) -> tuple:
        """Coordinates of the interior nodes, one array per axis (``ij`` order)."""
        axes = [self.axis_nodes(k)[1:-1] for k in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def faces(self) -> list:
        """Midpoint coordinates of each face family."""
        if self.dim == 1:
            return [(self.axis_centers(0),)]
        xc, yc = self.axis_centers(0), self.axis_centers(1)
        xn, yn = self.axis_nodes(0)[1:-1], self.axis_nodes(1)[1:-1]
        return [tuple(np.meshgrid(xc, yn, indexing="ij")),
                tuple(np.meshgrid(xn, yc, indexing="ij"))]


def _cell_averages_1d(pf: PiecewiseFunction, nodes: np.ndarray) -> np.ndarray:
    H = pf.antiderivative()
    return np.diff(H(nodes)) / np.diff(nodes)


def cell_values(grid: Grid, pbar) -> np.ndarray:
    """Per-cell values of an inverse diffusivity on ``grid``.

    Accepts a :class:`CoefficientField` or :class:`PiecewiseFunction` (1-D,
    exact cell averages), an array of shape ``grid.cells``, a scalar, or a
    callable evaluated at cell centers.
    """
    if isinstance(pbar, CoefficientField):
        pbar = pbar.shape
    if isinstance(pbar, PiecewiseFunction):
        if grid.dim != 1:
            raise UsageError("piecewise functions only describe 1-D coefficients")
        if not pbar.interval.same_as(grid.interval):
            raise DomainError("coefficient interval differs from the grid")
        vals = _cell_averages_1d(pbar, grid.axis_nodes(0))
    elif np.isscalar(pbar):
        vals = np.full(grid.cells, float(pbar))
    elif callable(pbar):
        centers = np.meshgrid(*[grid.axis_centers(k) for k in range(grid.dim)], indexing="ij")
        vals = np.asarray(pbar(*centers), dtype=float) * np.ones(grid.cells)
    else:
        vals = np.asarray(pbar, dtype=float)
        if vals.shape != grid.cells:
            raise UsageError(f"cell array has shape {vals.shape}, grid needs {grid.cells}")
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise DomainError("coefficient cell values must be finite and nonnegative")
    return vals


def face_values(grid: Grid, cells: np.ndarray) -> np.ndarray:
    """Face values: cell value in 1-D, mean of the two adjacent cells in 2-D."""
    if grid.dim == 1:
        return np.asarray(cells, dtype=float).copy()
    fx = 0.5 * (cells[:, :-1] + cells[:, 1:])
    fy = 0.5 * (cells[:-1, :] + cells[1:, :])
    return np.concatenate([fx.ravel(), fy.ravel()])


def _sign_steps(lo: float, hi: float, tiles: int) -> PiecewiseFunction:
    breaks = np.linspace(lo, hi, tiles + 1)
    return PiecewiseFunction.piecewise_constant(breaks, [(-1.0) ** k for k in range(tiles)])


def checkerboard(grid: Grid, values=(1.0, 0.25), tiles: int = 2) -> np.ndarray:
    """Cell values of a ``tiles x tiles`` checkerboard."""
    return mollified_checkerboard(grid, 0.0, values, tiles)


def mollified_checkerboard(grid: Grid, delta: float, values=(1.0, 0.25),
                           tiles: int = 2) -> np.ndarray:
    """Exact cell averages of a checkerboard whose jumps are ramped.

    The field is ``mean + half * s_x(x) * s_y(y)`` with ``s`` the alternating
    sign pattern of the tiles, each jump replaced by a linear ramp of
    half-width ``delta``. ``values[0]`` is taken on the lower-left tile.
    """
    if grid.dim != 2:
        raise UsageError("checkerboards need a 2-D grid")
    mean = 0.5 * (values[0] + values[1])
    half = 0.5 * (values[0] - values[1])
    avgs = []
    for k in range(2):
        s = mollify(_sign_steps(grid.lower[k], grid.upper[k], tiles), delta)
        avgs.append(_cell_averages_1d(s, grid.axis_nodes(k)))
    return mean + half * np.outer(avgs[0], avgs[1])
