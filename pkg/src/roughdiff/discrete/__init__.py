"""Finite-difference counterparts of the continuous operators (1-D and 2-D)."""

from .experiments import (
    KernelField2D,
    KernelResult,
    bump,
    grid_poincare_constant,
    kernel_experiment_2d,
    solve_primal_discrete,
    strong_convergence_2d,
    vanishing_on_support,
    verify_resolvent_formula,
)
from .grid import Grid, cell_values, checkerboard, face_values, mollified_checkerboard
from .linalg import DENSE_LIMIT, inverse_operator_norm, min_eigenvalue, min_singular_value
from .system import HatSystem, adjointness_defect, assemble, export_system, gradient

__all__ = [
    "Grid", "cell_values", "face_values", "checkerboard", "mollified_checkerboard",
    "HatSystem", "assemble", "gradient", "adjointness_defect", "export_system",
    "DENSE_LIMIT", "min_eigenvalue", "inverse_operator_norm", "min_singular_value",
    "grid_poincare_constant", "verify_resolvent_formula", "bump", "KernelField2D",
    "KernelResult", "kernel_experiment_2d", "vanishing_on_support",
    "solve_primal_discrete", "strong_convergence_2d",
]
