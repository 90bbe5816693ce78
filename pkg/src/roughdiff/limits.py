"""Limit operators for diffusivities that blow up on subregions.

When the inverse diffusivity converges in L1 to a field ``pbar_inf`` that
vanishes on part of the interval, the solution operators converge in norm
to ``B`` (solution) and ``C`` (scaled gradient ``p u'``). Both are the
components of the exact mixed inverse for ``pbar_inf`` with ``g = 0``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bounds import lipschitz_rhs
from .coefficient import CoefficientField, PiecewiseFunction
from .errors import UsageError
from .exact1d import solve_hat

__all__ = ["ConvergenceRow", "ConvergenceTable", "apply_B", "apply_C", "convergence_study"]


def apply_B(pbar_inf: CoefficientField, f: PiecewiseFunction) -> PiecewiseFunction:
    """Limit solution operator applied to ``f``."""
    return solve_hat(pbar_inf, f).u


def apply_C(pbar_inf: CoefficientField, f: PiecewiseFunction) -> PiecewiseFunction:
    """Limit scaled-gradient operator applied to ``f``."""
    return solve_hat(pbar_inf, f).q


@dataclass(frozen=True)
class ConvergenceRow:
    index: float
    coef_distance: float
    u_error: float
    q_error: float
    bound_ratio: float


@dataclass
class ConvergenceTable:
    """Errors of a coefficient sequence against its limit.

    ``bound_ratio`` is the relative product-space error divided by the
    Lipschitz bound for the pair; it is ``nan`` where no bound applies.
    """

    rows: list = field(default_factory=list)

    HEADER = ("index", "coef_l1_distance", "u_error_l2", "q_error_l2", "bound_ratio")

    def column(self, name: str) -> list[float]:
        attr = {"index": "index", "coef_l1_distance": "coef_distance",
                "u_error_l2": "u_error", "q_error_l2": "q_error",
                "bound_ratio": "bound_ratio"}[name]
        return [getattr(r, attr) for r in self.rows]

    def to_csv(self, path, preamble: Sequence[str] = ()) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            for line in preamble:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.HEADER)
            for r in self.rows:
                w.writerow([f"{v:.17g}" for v in
                            (r.index, r.coef_distance, r.u_error, r.q_error, r.bound_ratio)])

    def to_records(self) -> list[dict]:
        return [dict(zip(self.HEADER, (r.index, r.coef_distance, r.u_error,
                                       r.q_error, r.bound_ratio))) for r in self.rows]


def _row(index, member: CoefficientField, pbar_inf: CoefficientField,
         f: PiecewiseFunction, ref) -> ConvergenceRow:
    sol = solve_hat(member, f)
    du = (sol.u - ref.u).norm_l2()
    dq = (sol.q - ref.q).norm_l2()
    dist = (member.shape - pbar_inf.shape).norm_l1()
    rel = math.hypot(du, dq) / f.norm_l2()
    if dist == 0.0:
        ratio = 0.0 if rel == 0.0 else math.inf
    else:
        ratio = rel / lipschitz_rhs(member, pbar_inf)
    return ConvergenceRow(float(index), dist, du, dq, ratio)


def convergence_study(seq: Iterable[CoefficientField], pbar_inf: CoefficientField,
                      f: PiecewiseFunction, indices: Sequence[float] | None = None,
                      jobs: int = 1) -> ConvergenceTable:
    """Exact errors ``||u_nu - Bf||``, ``||q_nu - Cf||`` along a sequence.

    Parameters
    ----------
    seq : iterable of CoefficientField
        Members, nonnegative with positive L1 norm.
    pbar_inf : CoefficientField
        Limit coefficient; zeros allowed.
    f : PiecewiseFunction
        Nonzero source term.
    indices : sequence of float, optional
        Labels for the rows (defaults to 1, 2, ...).
    jobs : int
        Number of worker threads; rows are independent.
    """
    members = list(seq)
    if not members:
        raise UsageError("empty coefficient sequence")
    if f.norm_l2() == 0.0:
        raise UsageError("source term must be nonzero")
    if indices is None:
        indices = range(1, len(members) + 1)
    indices = list(indices)
    if len(indices) != len(members):
        raise UsageError("indices and members differ in length")
    ref = solve_hat(pbar_inf, f)
    args = [(i, m, pbar_inf, f, ref) for i, m in zip(indices, members)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda a: _row(*a), args))
    else:
        rows = [_row(*a) for a in args]
    return ConvergenceTable(rows)
