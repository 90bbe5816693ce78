"""Closed-form inverse of the mixed first-order operator on an interval.

On ``I = (a, b)`` the mixed operator maps ``(u, q)`` to
``(-q', u' - pbar q)`` with ``u(a) = u(b) = 0``. Its inverse is built by two
antiderivatives:

    q0(x) = -int_a^x f
    c     = -(int_a^b (g + pbar q0)) / ||pbar||_1
    q     = q0 + c
    u(x)  = int_a^x (g + pbar q)

Every step is exact piecewise-polynomial algebra, so the returned pair
satisfies the balance and constitutive relations cell by cell up to
rounding. ``pbar`` may vanish on whole cells (infinite diffusivity), only a
zero L1 norm is excluded.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .coefficient import CoefficientField, Interval, PiecewiseFunction, reciprocal
from .errors import DegeneracyError, DomainError, UsageError

__all__ = [
    "MixedSolution",
    "Residuals",
    "solve_hat",
    "solve_primal",
    "residual",
    "product_norm",
    "probe_operator_distance",
    "default_probes",
]


@dataclass(frozen=True)
class MixedSolution:
    """Solution ``u`` and scaled gradient ``q`` of the mixed system."""

    u: PiecewiseFunction
    q: PiecewiseFunction
    domain: Interval

    def __sub__(self, other: "MixedSolution") -> "MixedSolution":
        return MixedSolution(self.u - other.u, self.q - other.q, self.domain)

    def norm(self) -> float:
        """L2 norm on the product space."""
        return math.hypot(self.u.norm_l2(), self.q.norm_l2())

    def to_csv(self, path, n: int = 201) -> None:
        x = np.linspace(self.domain.a, self.domain.b, n)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "u", "q"])
            for row in zip(x, self.u(x), self.q(x)):
                w.writerow([f"{v:.17g}" for v in row])

    def to_dict(self) -> dict:
        return {"interval": [self.domain.a, self.domain.b],
                "u": self.u.to_dict(), "q": self.q.to_dict()}

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_dict(cls, data: dict) -> "MixedSolution":
        return cls(PiecewiseFunction.from_dict(data["u"]),
                   PiecewiseFunction.from_dict(data["q"]),
                   Interval(*data["interval"]))


class Residuals(NamedTuple):
    balance: float
    constitutive: float
    boundary: float


def _as_shape(pbar) -> PiecewiseFunction:
    return pbar.shape if isinstance(pbar, CoefficientField) else pbar


def _zero_like(interval: Interval) -> PiecewiseFunction:
    return PiecewiseFunction.constant(0.0, interval)


def _check_same(interval: Interval, *funcs):
    for fn in funcs:
        if not interval.same_as(fn.interval):
            raise DomainError(f"data lives on {fn.interval}, coefficient on {interval}")


def product_norm(f: PiecewiseFunction, g: PiecewiseFunction | None = None) -> float:
    """Root of the summed squared L2 norms of the two components."""
    return math.hypot(f.norm_l2(), 0.0 if g is None else g.norm_l2())


def solve_hat(pbar: CoefficientField, f: PiecewiseFunction,
              g: PiecewiseFunction | None = None) -> MixedSolution:
    """Apply the exact inverse of the mixed operator to ``(f, g)``.

    Parameters
    ----------
    pbar : CoefficientField
        Inverse diffusivity; may vanish on cells but not everywhere.
    f, g : PiecewiseFunction
        Source term and constitutive data; ``g`` defaults to zero.

    Returns
    -------
    MixedSolution
        ``(u, q)`` with ``-q' = f``, ``u' = g + pbar q`` and homogeneous
        Dirichlet values for ``u``.
    """
    p = _as_shape(pbar)
    interval = p.interval
    if g is None:
        g = _zero_like(interval)
    _check_same(interval, f, g)
    l1 = pbar.l1 if isinstance(pbar, CoefficientField) else p.norm_l1()
    if l1 <= 0.0:
        raise DegeneracyError("inverse diffusivity has zero L1 norm")
    q0 = -f.antiderivative()
    c = -(g + p * q0).integral() / l1
    q = q0.shift(c)
    u = (g + p * q).antiderivative()
    return MixedSolution(u, q, interval)


def solve_primal(p: CoefficientField, f: PiecewiseFunction) -> MixedSolution:
    """Solve ``-(p u')' = f`` with ``u = 0`` at both ends.

    ``p`` is the diffusivity (piecewise constant, bounded below). The returned
    ``q`` equals ``p u'``; the physical flux is ``-q``.
    """
    return solve_hat(reciprocal(p), f, None)


def residual(pbar: CoefficientField, f: PiecewiseFunction, g: PiecewiseFunction | None,
             sol: MixedSolution) -> Residuals:
    """L2 defects of both equations and the largest boundary value of ``u``."""
    p = _as_shape(pbar)
    if g is None:
        g = _zero_like(p.interval)
    _check_same(p.interval, f, g, sol.u, sol.q)
    balance = (-sol.q.derivative() - f).norm_l2()
    constitutive = (sol.u.derivative() - g - p * sol.q).norm_l2()
    ua, ub = sol.u.end_values()
    return Residuals(balance, constitutive, max(abs(ua), abs(ub)))


def default_probes(interval: Interval) -> list[tuple[PiecewiseFunction, PiecewiseFunction]]:
    """Low-degree probe pairs ``(f, g)`` spanning both components."""
    a, b = interval.a, interval.b
    m = interval.midpoint
    breaks = [a, b]
    one = PiecewiseFunction.constant(1.0, interval)
    zero = PiecewiseFunction.constant(0.0, interval)
    lin = PiecewiseFunction.from_polynomial([-m, 1.0], breaks)
    bump = PiecewiseFunction.from_polynomial([-a * b, a + b, -1.0], breaks)
    step = PiecewiseFunction.piecewise_constant([a, m, b], [1.0, -1.0])
    return [(one, zero), (lin, zero), (bump, zero), (step, zero),
            (zero, one), (zero, lin), (zero, step), (one, lin)]


def probe_operator_distance(pbar1: CoefficientField, pbar2: CoefficientField,
                            probes: Sequence[tuple]) -> float:
    """Largest relative difference of the two inverses over the probes.

    The value is a lower bound for the operator-norm distance of the inverses.
    """
    if not probes:
        raise UsageError("probe list is empty")
    best = 0.0
    for f, g in probes:
        scale = product_norm(f, g)
        if scale == 0.0:
            raise UsageError("probe pairs must be nonzero")
        diff = solve_hat(pbar1, f, g) - solve_hat(pbar2, f, g)
        best = max(best, diff.norm() / scale)
    return best
