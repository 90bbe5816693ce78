"""Closed-form operator bounds and their audit against measurements.

The bounds are evaluated literally. :func:`check` pairs a bound with a
measured value and records the slack; upper bounds (norms) are satisfied when
the measurement stays below, lower bounds (spectral gap) when it stays above.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

from .coefficient import CoefficientField, Interval, linear_combine
from .errors import DegeneracyError, MembershipError, UsageError

__all__ = [
    "BoundInputs",
    "BoundReport",
    "poincare_constant",
    "inverse_norm_bound",
    "resolvent_radius",
    "lipschitz_rhs",
    "spectral_gap_bound",
    "resolvent_interval_J",
    "check",
    "BOUNDS",
    "reports_to_json",
    "reports_to_csv",
]

DEFAULT_RTOL = 1e-9


def poincare_constant(interval: Interval) -> float:
    """Sharp constant ``pi / (b - a)`` of the Dirichlet Poincare inequality."""
    return math.pi / interval.length


@dataclass(frozen=True)
class BoundInputs:
    interval: Interval
    coefficient: CoefficientField
    other: CoefficientField | None = None
    poincare_c: float | None = None

    def __post_init__(self):
        if self.poincare_c is None:
            object.__setattr__(self, "poincare_c", poincare_constant(self.interval))
        if not self.poincare_c > 0:
            raise UsageError("Poincare constant must be positive")


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    bound_value: float
    empirical_value: float
    satisfied: bool
    slack: float
    kind: str = "upper"


def _l1(pbar: CoefficientField) -> float:
    l1 = pbar.l1
    if l1 <= 0:
        raise DegeneracyError("coefficient has zero L1 norm")
    return l1


def inverse_norm_bound(pbar: CoefficientField, interval: Interval | None = None) -> float:
    """``2 (b - a) (1 + ||pbar||_1)**2 / ||pbar||_1``."""
    interval = interval or pbar.interval
    n1 = _l1(pbar)
    return 2.0 * interval.length * (1.0 + n1) ** 2 / n1


def resolvent_radius(pbar: CoefficientField, interval: Interval | None = None) -> float:
    """Radius of the disc around 0 free of spectrum of the mixed operator."""
    interval = interval or pbar.interval
    n1 = _l1(pbar)
    return 0.5 * n1 / (interval.length * (1.0 + n1) ** 2)


def lipschitz_rhs(pbar1: CoefficientField, pbar2: CoefficientField,
                  interval: Interval | None = None) -> float:
    """Bound on the distance of the two mixed inverses.

    Not symmetric in its arguments: the prefactor uses ``||pbar1||_1``.
    """
    interval = interval or pbar1.interval
    n1, n2 = _l1(pbar1), _l1(pbar2)
    dist = linear_combine(1.0, pbar2, -1.0, pbar1).norm_l1()
    return (2.0 * interval.length / n1) * (2.0 + n1 + n2 + 1.0 / n2) * dist


def spectral_gap_bound(inputs: BoundInputs) -> float:
    """Lower end ``c**2 / ess sup pbar`` of the primal spectrum."""
    sup = inputs.coefficient.ess_sup
    if not sup > 0:
        raise DegeneracyError("essential supremum must be positive")
    return inputs.poincare_c ** 2 / sup


def resolvent_interval_J(pbar, poincare_c: float) -> tuple[float, float]:
    """Open interval ``(-C1, c**2 / (c + C2))`` in the resolvent set.

    ``pbar`` may be any object with ``ess_inf`` and ``ess_sup``.
    """
    c1, c2 = pbar.ess_inf, pbar.ess_sup
    if not c1 > 0:
        raise MembershipError("coefficient is not bounded below by a positive constant")
    return (-c1, poincare_c ** 2 / (poincare_c + c2))


#: name -> (bound evaluator on BoundInputs, kind)
BOUNDS: dict[str, tuple[Callable[[BoundInputs], float], str]] = {
    "inverse_norm": (lambda i: inverse_norm_bound(i.coefficient, i.interval), "upper"),
    "lipschitz": (lambda i: lipschitz_rhs(i.coefficient, i.other, i.interval), "upper"),
    "spectral_gap": (spectral_gap_bound, "lower"),
}


def check(bound_name: str, inputs: BoundInputs, empirical_source: Callable[[], float],
          rtol: float = DEFAULT_RTOL) -> BoundReport:
    """Evaluate a bound, run the measurement and compare.

    ``empirical_source`` is called without arguments and returns the measured
    quantity (e.g. a discrete operator norm or eigenvalue).
    """
    try:
        evaluator, kind = BOUNDS[bound_name]
    except KeyError:
        raise UsageError(f"unknown bound {bound_name!r}; known: {sorted(BOUNDS)}") from None
    if bound_name == "lipschitz" and inputs.other is None:
        raise UsageError("lipschitz bound needs two coefficients")
    value = float(evaluator(inputs))
    measured = float(empirical_source())
    if kind == "upper":
        ok = measured <= value * (1.0 + rtol)
        slack = value - measured
    else:
        ok = measured >= value * (1.0 - rtol)
        slack = measured - value
    return BoundReport(bound_name, value, measured, bool(ok), slack, kind)


def reports_to_json(reports: Sequence[BoundReport], path, meta: dict | None = None) -> None:
    payload = {"meta": meta or {}, "reports": [asdict(r) for r in reports]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def reports_to_csv(reports: Sequence[BoundReport], path, preamble: Sequence[str] = ()) -> None:
    fields = ["bound_name", "bound_value", "empirical_value", "satisfied", "slack", "kind"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in preamble:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in reports:
            w.writerow([r.bound_name, f"{r.bound_value:.17g}", f"{r.empirical_value:.17g}",
                        str(r.satisfied).lower(), f"{r.slack:.17g}", r.kind])
