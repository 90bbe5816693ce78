"""Discrete experiments: resolvent block formula, kernel dichotomy, strong limits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from ..bounds import resolvent_interval_J
from ..coefficient import CoefficientField
from ..errors import DomainError, MembershipError, PreconditionError, UsageError
from ..limits import ConvergenceRow, ConvergenceTable
from .grid import Grid, cell_values
from .system import HatSystem, assemble
from .linalg import min_singular_value

__all__ = [
    "grid_poincare_constant",
    "verify_resolvent_formula",
    "bump",
    "KernelField2D",
    "KernelResult",
    "kernel_experiment_2d",
    "vanishing_on_support",
    "solve_primal_discrete",
    "strong_convergence_2d",
]


def grid_poincare_constant(grid: Grid) -> float:
    """``pi / width`` of the first axis (slab bound for a rectangle)."""
    return math.pi / (grid.upper[0] - grid.lower[0])


class _Bounds(NamedTuple):
    ess_inf: float
    ess_sup: float


def _essential_bounds(pbar, cells: np.ndarray) -> _Bounds:
    if isinstance(pbar, CoefficientField):
        return _Bounds(pbar.ess_inf, pbar.ess_sup)
    return _Bounds(float(cells.min()), float(cells.max()))


def verify_resolvent_formula(grid: Grid, pbar, lam: float,
                             poincare_c: float | None = None) -> float:
    """Spectral-norm gap between ``(K - lam)^{-1}`` and its block formula.

    The formula expresses the mixed resolvent through the primal resolvent
    ``(A_lam - lam)^{-1}`` of the shifted coefficient ``pbar + lam``. ``lam``
    must lie in the open interval returned by ``resolvent_interval_J``.
    """
    system = assemble(grid, pbar)
    c = grid_poincare_constant(grid) if poincare_c is None else poincare_c
    lo, hi = resolvent_interval_J(_essential_bounds(pbar, system.cells), c)
    if not lo < lam < hi:
        raise PreconditionError(f"lambda={lam} outside the resolvent interval ({lo}, {hi})")
    K = system.block.toarray()
    direct = scipy.linalg.inv(K - lam * np.eye(K.shape[0]))

    shifted = system.shifted(lam)
    M = scipy.linalg.inv(shifted.primal.toarray() - lam * np.eye(system.n_u))
    G = system.G.toarray()
    P = np.diag(1.0 / shifted.pbar_faces)
    MGtP = M @ G.T @ P
    PGM = P @ G @ M
    formula = np.block([[M, MGtP], [PGM, -P + P @ G @ MGtP]])
    return float(np.linalg.norm(direct - formula, 2))


def bump(t, sharpness: float = 3.0):
    """Smooth profile ``exp(s (1 - 1/(1 - t^2)))`` on ``(-1, 1)``, zero outside.

    Larger ``sharpness`` concentrates the profile near ``t = 0`` and damps the
    higher derivatives near the edge of the support.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(sharpness * (1.0 - 1.0 / (1.0 - t[inside] ** 2)))
    return out


@dataclass(frozen=True)
class KernelField2D:
    """Rotational field ``h(|x - c|^2 / R^2) / 2 * alpha (x - c)``.

    Divergence-free for every antisymmetric ``alpha``; supported in the disc
    of radius ``radius`` around ``center``.
    """

    center: tuple = (0.5, 0.5)
    radius: float = 0.45
    alpha: tuple = ((0.0, 1.0), (-1.0, 0.0))
    profile: Callable = field(default=bump, compare=False)

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.shape != (2, 2) or not np.array_equal(a, -a.T) or not np.any(a):
            raise UsageError("alpha must be a nonzero antisymmetric 2x2 array")
        if not self.radius > 0:
            raise UsageError("radius must be positive")

    def __call__(self, x, y):
        a = np.asarray(self.alpha, dtype=float)
        dx, dy = np.asarray(x) - self.center[0], np.asarray(y) - self.center[1]
        w = 0.5 * self.profile((dx ** 2 + dy ** 2) / self.radius ** 2)
        return w * (a[0, 0] * dx + a[0, 1] * dy), w * (a[1, 0] * dx + a[1, 1] * dy)

    def sample(self, grid: Grid) -> np.ndarray:
        """Face values, x-faces then y-faces, matching :func:`gradient`."""
        (xf, yf), (xg, yg) = grid.faces()
        qx, _ = self(xf, yf)
        _, qy = self(xg, yg)
        return np.concatenate([qx.ravel(), qy.ravel()])

    def check_support(self, grid: Grid) -> None:
        (x0, y0), (x1, y1) = grid.lower, grid.upper
        cx, cy = self.center
        r = self.radius
        if not (x0 < cx - r and cx + r < x1 and y0 < cy - r and cy + r < y1):
            raise DomainError("field support is not contained in the grid domain")


class KernelResult(NamedTuple):
    div_residual: float
    min_singular_value: float


def vanishing_on_support(grid: Grid, fld: KernelField2D, base: float = 1.0) -> np.ndarray:
    """Cell values equal to ``base`` except zero on cells touching the support."""
    xc, yc = np.meshgrid(grid.axis_centers(0), grid.axis_centers(1), indexing="ij")
    r = np.hypot(xc - fld.center[0], yc - fld.center[1])
    cells = np.full(grid.cells, float(base))
    cells[r < fld.radius + max(grid.h)] = 0.0
    return cells


def kernel_experiment_2d(grid: Grid, pbar, fld: KernelField2D) -> KernelResult:
    """Divergence defect of the sampled field and ``sigma_min`` of the system."""
    if grid.dim != 2:
        raise UsageError("kernel experiment needs a 2-D grid")
    fld.check_support(grid)
    system = assemble(grid, pbar)
    q = fld.sample(grid)
    div = float(np.max(np.abs(system.G.T @ q)))
    return KernelResult(div, min_singular_value(system.block))


def _rhs(grid: Grid, f) -> np.ndarray:
    if np.isscalar(f):
        return np.full(grid.n_nodes, float(f))
    if callable(f):
        return np.asarray(f(*grid.nodes()), dtype=float).ravel() * np.ones(grid.n_nodes)
    f = np.asarray(f, dtype=float).ravel()
    if f.size != grid.n_nodes:
        raise UsageError(f"right-hand side has {f.size} entries, grid has {grid.n_nodes} nodes")
    return f


def solve_primal_discrete(grid: Grid, pbar, f) -> tuple[np.ndarray, np.ndarray, HatSystem]:
    """Solve ``G^T diag(1/pbar) G u = f``; returns ``(u, p G u, system)``."""
    system = assemble(grid, pbar)
    u = spla.spsolve(system.primal.tocsc(), _rhs(grid, f))
    return u, system.scaled_gradient(u), system


def strong_convergence_2d(grid: Grid, seq: Sequence, pbar_inf, f,
                          indices: Sequence[float] | None = None) -> ConvergenceTable:
    """Errors of discrete solutions and scaled gradients along a sequence.

    Every member and the limit must be strictly positive. Rows carry the
    discrete L1 distance of the coefficients, ``||u_nu - u_inf||_2`` and
    ``||p_nu G u_nu - p_inf G u_inf||_2`` (grid-weighted); no norm bound is
    available in 2-D, so the ratio column is ``nan``.
    """
    members = list(seq)
    if not members:
        raise UsageError("empty coefficient sequence")
    indices = list(range(1, len(members) + 1)) if indices is None else list(indices)
    w = grid.weight
    cells_inf = cell_values(grid, pbar_inf)
    if cells_inf.min() <= 0:
        raise MembershipError("limit coefficient must be bounded below by a positive constant")
    u_inf, q_inf, _ = solve_primal_discrete(grid, cells_inf, f)
    rows = []
    for idx, member in zip(indices, members):
        cells = cell_values(grid, member)
        if cells.min() <= 0:
            raise MembershipError(f"member {idx} is not bounded below by a positive constant")
        u, q, _ = solve_primal_discrete(grid, cells, f)
        rows.append(ConvergenceRow(
            float(idx),
            float(np.sum(np.abs(cells - cells_inf)) * w),
            float(np.linalg.norm(u - u_inf) * math.sqrt(w)),
            float(np.linalg.norm(q - q_inf) * math.sqrt(w)),
            math.nan))
    return ConvergenceTable(rows)
