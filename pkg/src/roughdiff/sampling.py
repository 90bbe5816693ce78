"""Random coefficients and data for audits and property tests.

All generators take an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import numpy as np

from .coefficient import CoefficientField, Interval, PiecewiseFunction

__all__ = ["random_breakpoints", "random_field", "random_data"]


def random_breakpoints(rng: np.random.Generator, interval: Interval, n_cells: int,
                       grid_n: int | None = None) -> np.ndarray:
    """Sorted partition with ``n_cells`` cells.

    With ``grid_n`` the interior breakpoints are drawn from the nodes of a
    uniform grid with ``grid_n`` cells, so coefficient jumps sit on nodes.
    """
    a, b = interval.a, interval.b
    if grid_n is not None:
        nodes = np.linspace(a, b, grid_n + 1)[1:-1]
        inner = np.sort(rng.choice(nodes, size=n_cells - 1, replace=False))
    else:
        inner = np.sort(rng.uniform(a, b, size=n_cells - 1))
        while inner.size and np.min(np.diff(np.concatenate([[a], inner, [b]]))) < 1e-3 * (b - a):
            inner = np.sort(rng.uniform(a, b, size=n_cells - 1))
    return np.concatenate([[a], inner, [b]])


def random_field(rng: np.random.Generator, interval: Interval, n_cells: int = 4,
                 low: float = 0.25, high: float = 4.0, *, grid_n: int | None = None,
                 linear: bool = False, zero_cell: bool = False) -> CoefficientField:
    """Random nonnegative inverse diffusivity.

    Values are log-uniform in ``[low, high]``. ``linear`` gives continuous
    per-cell ramps between random endpoint values, ``zero_cell`` forces one
    cell to vanish identically.
    """
    breaks = random_breakpoints(rng, interval, n_cells, grid_n)
    h = np.diff(breaks)
    if linear:
        ends = np.exp(rng.uniform(np.log(low), np.log(high), size=(n_cells, 2)))
        pieces = [[e0, (e1 - e0) / hi] for (e0, e1), hi in zip(ends, h)]
    else:
        pieces = [[v] for v in np.exp(rng.uniform(np.log(low), np.log(high), size=n_cells))]
    if zero_cell and n_cells > 1:
        pieces[int(rng.integers(n_cells))] = [0.0]
    return CoefficientField(PiecewiseFunction(breaks, pieces))


def random_data(rng: np.random.Generator, interval: Interval, n_cells: int = 3,
                degree: int = 2, scale: float = 1.0) -> PiecewiseFunction:
    """Random piecewise polynomial with normally distributed coefficients."""
    breaks = random_breakpoints(rng, interval, n_cells)
    pieces = scale * rng.standard_normal((n_cells, degree + 1))
    return PiecewiseFunction(breaks, pieces)
