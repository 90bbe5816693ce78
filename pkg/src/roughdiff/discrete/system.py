"""Assembly of the discrete mixed operator and the primal diffusion matrix."""

from __future__ import annotations

import json

import numpy as np
import scipy.io
import scipy.sparse as sp

from ..errors import MembershipError
from .grid import Grid, cell_values, face_values

__all__ = ["HatSystem", "assemble", "gradient", "adjointness_defect", "export_system"]


def _difference(n: int, h: float) -> sp.csr_matrix:
    """Forward differences from ``n - 1`` interior nodes to ``n`` cells."""
    d = sp.diags([np.ones(n - 1), -np.ones(n - 1)], [0, -1], shape=(n, n - 1))
    return (d / h).tocsr()


def gradient(grid: Grid) -> sp.csr_matrix:
    """Discrete gradient from interior nodes to faces."""
    if grid.dim == 1:
        return _difference(grid.cells[0], grid.h[0])
    (nx, ny), (hx, hy) = grid.cells, grid.h
    gx = sp.kron(_difference(nx, hx), sp.identity(ny - 1))
    gy = sp.kron(sp.identity(nx - 1), _difference(ny, hy))
    return sp.vstack([gx, gy]).tocsr()


class HatSystem:
    """Discrete counterpart of the mixed operator for one coefficient.

    Attributes
    ----------
    grid : Grid
    G : scipy.sparse.csr_matrix
        Gradient, nodes to faces. ``G.T`` is the discrete ``-div``.
    pbar_faces : numpy.ndarray
        Inverse diffusivity on the faces.
    cells : numpy.ndarray
        Cell values the face values were derived from.
    """

    def __init__(self, grid: Grid, G, pbar_faces, cells=None):
        self.grid = grid
        self.G = G
        self.pbar_faces = np.asarray(pbar_faces, dtype=float)
        self.cells = cells
        self._block = None
        self._primal = None

    @property
    def n_u(self) -> int:
        return self.G.shape[1]

    @property
    def n_q(self) -> int:
        return self.G.shape[0]

    @property
    def dim(self) -> int:
        return self.n_u + self.n_q

    @property
    def block(self) -> sp.csr_matrix:
        """``[[0, G^T], [G, -Pbar]]``, acting on ``(u, q)``."""
        if self._block is None:
            self._block = sp.bmat(
                [[None, self.G.T], [self.G, -sp.diags(self.pbar_faces)]], format="csr")
        return self._block

    @property
    def primal(self) -> sp.csr_matrix:
        """``G^T diag(1 / pbar_faces) G``; requires positive face values."""
        if self._primal is None:
            if np.any(self.pbar_faces <= 0):
                raise MembershipError("primal operator needs strictly positive face coefficients")
            self._primal = (self.G.T @ sp.diags(1.0 / self.pbar_faces) @ self.G).tocsr()
        return self._primal

    def shifted(self, lam: float) -> "HatSystem":
        """System for the coefficient ``pbar + lam``."""
        cells = None if self.cells is None else self.cells + lam
        return HatSystem(self.grid, self.G, self.pbar_faces + lam, cells)

    def apply(self, u: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.G.T @ q, self.G @ u - self.pbar_faces * q

    def scaled_gradient(self, u: np.ndarray) -> np.ndarray:
        """``p G u`` on the faces, i.e. the flux variable for ``g = 0``."""
        return (self.G @ u) / self.pbar_faces


def assemble(grid: Grid, pbar) -> HatSystem:
    """Assemble the discrete system for an inverse diffusivity ``pbar``.

    ``pbar`` is anything :func:`cell_values` accepts. Zeros are allowed; only
    the primal operator then refuses to assemble.
    """
    cells = cell_values(grid, pbar)
    return HatSystem(grid, gradient(grid), face_values(grid, cells), cells)


def adjointness_defect(G, u: np.ndarray, q: np.ndarray) -> float:
    """``|<G u, q> - <u, G^T q>|``."""
    return abs(float(np.dot(G @ u, q)) - float(np.dot(u, G.T @ q)))


def export_system(system: HatSystem, prefix) -> list:
    """Write the block and primal matrices in MatrixMarket format.

    Files: ``<prefix>_block.mtx``, ``<prefix>_primal.mtx`` (when defined) and
    ``<prefix>_grid.json`` describing the grid and unknown ordering.
    """
    prefix = str(prefix)
    written = [f"{prefix}_block.mtx"]
    scipy.io.mmwrite(written[0], system.block, symmetry="symmetric", precision=17)
    if np.all(system.pbar_faces > 0):
        written.append(f"{prefix}_primal.mtx")
        scipy.io.mmwrite(written[-1], system.primal, symmetry="symmetric", precision=17)
    g = system.grid
    meta = {"lower": list(g.lower), "upper": list(g.upper), "cells": list(g.cells),
            "n_u": system.n_u, "n_q": system.n_q,
            "ordering": "u at interior nodes (C order), then faces (x-faces, y-faces)"}
    written.append(f"{prefix}_grid.json")
    with open(written[-1], "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return written
