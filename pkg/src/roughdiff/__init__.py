"""Mixed first-order treatment of diffusion with rough coefficients."""

from .coefficient import (
    CoefficientField,
    ContrastFamily,
    Interval,
    MollifiedSequence,
    PiecewiseFunction,
)
from .exact1d import MixedSolution, solve_hat, solve_primal

__version__ = "0.1.0"

__all__ = [
    "Interval", "PiecewiseFunction", "CoefficientField", "ContrastFamily",
    "MollifiedSequence", "MixedSolution", "solve_hat", "solve_primal",
]
