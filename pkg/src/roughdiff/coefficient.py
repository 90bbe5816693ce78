"""Exact piecewise-polynomial functions and rough coefficient fields.

A :class:`PiecewiseFunction` stores one polynomial per cell of an interval
partition. Each cell polynomial is written in the *local* variable
``t = x - x_i`` where ``x_i`` is the left breakpoint of the cell, which keeps
the coefficients well scaled for short cells. All calculus (antiderivatives,
integrals, norms) is carried out in closed form on the coefficients, so the
only error is floating point rounding.

:class:`CoefficientField` wraps a nonnegative piecewise function that plays the
role of the inverse diffusivity (resistivity). Fields with a positive
essential infimum belong to the class of uniformly elliptic coefficients; the
remaining admissible fields may vanish on parts of the interval.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import comb

from .errors import DegeneracyError, DomainError, RepresentationError, UsageError

__all__ = [
    "DEGREE_CAP",
    "Interval",
    "PiecewiseFunction",
    "CoefficientField",
    "ContrastFamily",
    "MollifiedSequence",
    "evaluate",
    "antiderivative",
    "norm_l1",
    "norm_l2",
    "norm_linf",
    "reciprocal",
    "linear_combine",
    "multiply",
    "family_member",
    "mollify",
    "load_coefficient",
    "save_coefficient",
    "coefficient_from_dict",
]

#: Maximal polynomial degree of a single cell.
DEGREE_CAP = 6

# Breakpoints closer than this (relative to the interval length) are fused.
_FUSE_RTOL = 1e-14


@dataclass(frozen=True)
class Interval:
    """Bounded open interval ``(a, b)``."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"interval endpoints must be finite, got ({a}, {b})")
        if not a < b:
            raise DomainError(f"interval requires a < b, got ({a}, {b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def same_as(self, other: "Interval") -> bool:
        tol = _FUSE_RTOL * self.length
        return abs(self.a - other.a) <= tol and abs(self.b - other.b) <= tol


def _taylor_shift_matrix(s: float, size: int) -> np.ndarray:
    """Matrix ``T`` with ``(T @ c)`` the coefficients of ``p(t + s)``."""
    j = np.arange(size)
    k = j[:, None]
    expo = j[None, :] - k
    with np.errstate(invalid="ignore"):
        powers = np.where(expo >= 0, float(s) ** np.maximum(expo, 0), 0.0)
    return comb(j[None, :], k) * powers


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if nz.size else c[:1]


def _fuse(points: np.ndarray, a: float, b: float) -> np.ndarray:
    tol = _FUSE_RTOL * (b - a)
    pts = np.sort(points)
    out = [a]
    for x in pts:
        if x - out[-1] > tol and b - x > tol:
            out.append(float(x))
    out.append(b)
    return np.asarray(out)


def _real_roots_inside(c: np.ndarray, h: float) -> np.ndarray:
    """Real roots of the local polynomial ``c`` strictly inside ``(0, h)``."""
    c = _trim(c)
    # drop top terms that are negligible on the cell; they only destabilize polyroots
    size = np.abs(c) * float(h) ** np.arange(c.size)
    keep = np.flatnonzero(size > 1e-15 * size.max()) if size.max() > 0 else np.empty(0, int)
    c = c[: keep[-1] + 1] if keep.size else c[:1]
    if c.size < 2:
        return np.empty(0)
    r = npoly.polyroots(c)
    scale = max(h, 1.0)
    r = r[np.abs(r.imag) <= 1e-10 * scale].real
    return np.sort(r[(r > 0.0) & (r < h)])


def _definite(c: np.ndarray, lo: float, hi: float) -> float:
    ci = npoly.polyint(c)
    return float(npoly.polyval(hi, ci) - npoly.polyval(lo, ci))


class PiecewiseFunction:
    """Piecewise polynomial on a partition ``a = x_0 < ... < x_m = b``.

    Parameters
    ----------
    breakpoints : sequence of float
        Strictly increasing partition points, at least two.
    pieces : sequence of sequence of float
        One coefficient list per cell, ascending powers of ``x - x_i``.
        Lists may have different lengths; at most ``DEGREE_CAP + 1`` entries.

    Notes
    -----
    Values at interior breakpoints are taken from the right-hand cell; the
    value at ``b`` comes from the last cell. Instances are immutable.
    """

    __slots__ = ("_breaks", "_coeffs")

    def __init__(self, breakpoints, pieces):
        breaks = np.asarray(breakpoints, dtype=float).ravel()
        if breaks.size < 2:
            raise DomainError("a piecewise function needs at least two breakpoints")
        if not np.all(np.isfinite(breaks)):
            raise DomainError("breakpoints must be finite")
        if not np.all(np.diff(breaks) > 0):
            raise DomainError("breakpoints must be strictly increasing")
        m = breaks.size - 1
        if len(pieces) != m:
            raise DomainError(f"expected {m} cell polynomials, got {len(pieces)}")
        coeffs = np.zeros((m, DEGREE_CAP + 1))
        for i, piece in enumerate(pieces):
            c = np.atleast_1d(np.asarray(piece, dtype=float))
            if c.ndim != 1 or c.size == 0:
                raise RepresentationError(f"cell {i}: coefficient list must be a nonempty 1-D list")
            if c.size > DEGREE_CAP + 1:
                if np.any(c[DEGREE_CAP + 1:] != 0):
                    raise RepresentationError(
                        f"cell {i}: degree {c.size - 1} exceeds cap {DEGREE_CAP}")
                c = c[: DEGREE_CAP + 1]
            coeffs[i, : c.size] = c
        if not np.all(np.isfinite(coeffs)):
            raise RepresentationError("polynomial coefficients must be finite")
        breaks.flags.writeable = False
        coeffs.flags.writeable = False
        self._breaks = breaks
        self._coeffs = coeffs

    @classmethod
    def _raw(cls, breaks: np.ndarray, coeffs: np.ndarray) -> "PiecewiseFunction":
        # Internal constructor; inputs are already validated.
        if coeffs.shape[1] > DEGREE_CAP + 1:
            extra = coeffs[:, DEGREE_CAP + 1:]
            if np.any(extra != 0):
                raise RepresentationError(
                    f"result degree exceeds cap {DEGREE_CAP}")
            coeffs = coeffs[:, : DEGREE_CAP + 1]
        elif coeffs.shape[1] < DEGREE_CAP + 1:
            pad = np.zeros((coeffs.shape[0], DEGREE_CAP + 1 - coeffs.shape[1]))
            coeffs = np.hstack([coeffs, pad])
        obj = cls.__new__(cls)
        breaks = np.array(breaks, dtype=float)
        coeffs = np.array(coeffs, dtype=float)
        breaks.flags.writeable = False
        coeffs.flags.writeable = False
        obj._breaks = breaks
        obj._coeffs = coeffs
        return obj

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float, interval: Interval) -> "PiecewiseFunction":
        return cls([interval.a, interval.b], [[float(value)]])

    @classmethod
    def piecewise_constant(cls, breakpoints, values) -> "PiecewiseFunction":
        return cls(breakpoints, [[float(v)] for v in values])

    @classmethod
    def from_polynomial(cls, coeffs, breakpoints) -> "PiecewiseFunction":
        """Restrict a global polynomial ``sum c_k x**k`` to a partition."""
        c = np.asarray(coeffs, dtype=float)
        if c.size > DEGREE_CAP + 1:
            raise RepresentationError(f"degree {c.size - 1} exceeds cap {DEGREE_CAP}")
        breaks = np.asarray(breakpoints, dtype=float)
        pieces = [_taylor_shift_matrix(x0, c.size) @ c for x0 in breaks[:-1]]
        return cls(breaks, pieces)

    # -- basic properties --------------------------------------------------

    @property
    def breakpoints(self) -> np.ndarray:
        return self._breaks

    @property
    def coefficients(self) -> np.ndarray:
        """Array of shape ``(cells, DEGREE_CAP + 1)`` of local coefficients."""
        return self._coeffs

    @property
    def interval(self) -> Interval:
        return Interval(self._breaks[0], self._breaks[-1])

    @property
    def n_cells(self) -> int:
        return self._breaks.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self._breaks)

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(np.any(self._coeffs != 0, axis=0))
        return int(nz[-1]) if nz.size else 0

    @property
    def is_piecewise_constant(self) -> bool:
        return self.degree == 0

    def __repr__(self):
        return (f"PiecewiseFunction(cells={self.n_cells}, degree={self.degree}, "
                f"interval=({self._breaks[0]:g}, {self._breaks[-1]:g}))")

    # -- evaluation --------------------------------------------------------

    def cell_index(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        a, b = self._breaks[0], self._breaks[-1]
        if np.any((x < a) | (x > b)) or np.any(np.isnan(x)):
            raise DomainError(f"evaluation point outside [{a}, {b}]")
        idx = np.searchsorted(self._breaks, x, side="right") - 1
        return np.clip(idx, 0, self.n_cells - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = self.cell_index(x)
        t = x - self._breaks[idx]
        c = self._coeffs[idx]
        out = np.zeros_like(t)
        for k in range(DEGREE_CAP, -1, -1):
            out = out * t + c[..., k]
        return out if out.ndim else float(out)

    def left_limit(self, x: float) -> float:
        """Value of the cell to the left of ``x`` (for ``x > a``)."""
        i = int(np.searchsorted(self._breaks, x, side="left")) - 1
        if i < 0 or x > self._breaks[-1]:
            raise DomainError(f"no cell to the left of {x}")
        return float(npoly.polyval(x - self._breaks[i], self._coeffs[i]))

    def jumps(self) -> np.ndarray:
        """Right-minus-left jumps at the interior breakpoints."""
        h = self.widths[:-1]
        left = np.array([npoly.polyval(hi, c) for hi, c in zip(h, self._coeffs[:-1])])
        right = self._coeffs[1:, 0]
        return right - left

    def end_values(self) -> tuple[float, float]:
        return float(self._coeffs[0, 0]), float(npoly.polyval(self.widths[-1], self._coeffs[-1]))

    # -- partitions --------------------------------------------------------

    def refine(self, breakpoints) -> "PiecewiseFunction":
        """Re-express on the union of the current and the given breakpoints."""
        a, b = self._breaks[0], self._breaks[-1]
        extra = np.asarray(breakpoints, dtype=float).ravel()
        new = _fuse(np.concatenate([self._breaks[1:-1], extra[(extra > a) & (extra < b)]]), a, b)
        mids = 0.5 * (new[:-1] + new[1:])
        parent = np.clip(np.searchsorted(self._breaks, mids, side="right") - 1,
                         0, self.n_cells - 1)
        size = DEGREE_CAP + 1
        out = np.empty((new.size - 1, size))
        for k, (p, left) in enumerate(zip(parent, new[:-1])):
            s = left - self._breaks[p]
            c = self._coeffs[p]
            out[k] = c if s == 0.0 else _taylor_shift_matrix(s, size) @ c
        return PiecewiseFunction._raw(new, out)

    def _common(self, other: "PiecewiseFunction"):
        if not self.interval.same_as(other.interval):
            raise DomainError(
                f"interval mismatch: {self.interval} vs {other.interval}")
        a, b = self._breaks[0], self._breaks[-1]
        merged = _fuse(np.concatenate([self._breaks[1:-1], other._breaks[1:-1]]), a, b)
        return self.refine(merged), other.refine(merged)

    # -- algebra -----------------------------------------------------------

    def scale(self, alpha: float) -> "PiecewiseFunction":
        return PiecewiseFunction._raw(self._breaks, float(alpha) * self._coeffs)

    def shift(self, value: float) -> "PiecewiseFunction":
        c = self._coeffs.copy()
        c[:, 0] += float(value)
        return PiecewiseFunction._raw(self._breaks, c)

    def __add__(self, other):
        if np.isscalar(other):
            return self.shift(other)
        return linear_combine(1.0, self, 1.0, other)

    __radd__ = __add__

    def __sub__(self, other):
        if np.isscalar(other):
            return self.shift(-other)
        return linear_combine(1.0, self, -1.0, other)

    def __rsub__(self, other):
        return (-self).shift(other)

    def __neg__(self):
        return self.scale(-1.0)

    def __mul__(self, other):
        if np.isscalar(other):
            return self.scale(other)
        return multiply(self, other)

    __rmul__ = __mul__

    # -- calculus ----------------------------------------------------------

    def derivative(self) -> "PiecewiseFunction":
        k = np.arange(1, DEGREE_CAP + 1)
        d = self._coeffs[:, 1:] * k
        return PiecewiseFunction._raw(self._breaks, d)

    def cell_integrals(self) -> np.ndarray:
        h = self.widths
        k = np.arange(DEGREE_CAP + 1)
        return np.sum(self._coeffs * h[:, None] ** (k + 1) / (k + 1), axis=1)

    def integral(self) -> float:
        return float(np.sum(self.cell_integrals()))

    def antiderivative(self) -> "PiecewiseFunction":
        """Continuous antiderivative vanishing at the left endpoint."""
        if np.any(self._coeffs[:, DEGREE_CAP] != 0):
            raise RepresentationError(
                f"antiderivative would exceed degree cap {DEGREE_CAP}")
        k = np.arange(1, DEGREE_CAP + 1)
        out = np.zeros_like(self._coeffs)
        out[:, 1:] = self._coeffs[:, :-1] / k
        out[1:, 0] = np.cumsum(self.cell_integrals())[:-1]
        return PiecewiseFunction._raw(self._breaks, out)

    # -- norms and extrema -------------------------------------------------

    def norm_l1(self) -> float:
        total = 0.0
        for h, c in zip(self.widths, self._coeffs):
            cuts = np.concatenate([[0.0], _real_roots_inside(c, h), [h]])
            total += sum(abs(_definite(c, lo, hi)) for lo, hi in zip(cuts[:-1], cuts[1:]))
        return float(total)

    def norm_l2(self) -> float:
        total = 0.0
        for h, c in zip(self.widths, self._coeffs):
            c = _trim(c)
            total += _definite(npoly.polymul(c, c), 0.0, h)
        return math.sqrt(max(total, 0.0))

    def cell_extrema(self) -> tuple[np.ndarray, np.ndarray]:
        """Minimum and maximum of each cell polynomial over its closed cell."""
        lo = np.empty(self.n_cells)
        hi = np.empty(self.n_cells)
        for i, (h, c) in enumerate(zip(self.widths, self._coeffs)):
            cand = np.concatenate([[0.0, h], _real_roots_inside(npoly.polyder(_trim(c)), h)])
            vals = npoly.polyval(cand, c)
            lo[i], hi[i] = vals.min(), vals.max()
        return lo, hi

    def norm_linf(self) -> float:
        lo, hi = self.cell_extrema()
        return float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))

    def sample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Values at ``n`` equispaced points including both endpoints."""
        x = np.linspace(self._breaks[0], self._breaks[-1], n)
        return x, self(x)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "interval": [float(self._breaks[0]), float(self._breaks[-1])],
            "breakpoints": [float(x) for x in self._breaks],
            "pieces": [[float(v) for v in _trim(c)] for c in self._coeffs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseFunction":
        try:
            breaks = data["breakpoints"]
            pieces = data["pieces"]
        except KeyError as exc:
            raise UsageError(f"piecewise function is missing key {exc.args[0]!r}") from None
        pf = cls(breaks, pieces)
        if "interval" in data:
            a, b = data["interval"]
            if float(a) != pf._breaks[0] or float(b) != pf._breaks[-1]:
                raise DomainError("interval does not match the outer breakpoints")
        return pf


# -- functional interface ----------------------------------------------------

def evaluate(pf: PiecewiseFunction, x):
    """Evaluate ``pf`` at ``x`` (right-continuous at breakpoints)."""
    return pf(x)


def antiderivative(pf: PiecewiseFunction) -> PiecewiseFunction:
    return pf.antiderivative()


def norm_l1(pf) -> float:
    return _shape(pf).norm_l1()


def norm_l2(pf) -> float:
    return _shape(pf).norm_l2()


def norm_linf(pf) -> float:
    return _shape(pf).norm_linf()


def _shape(pf) -> PiecewiseFunction:
    return pf.shape if isinstance(pf, CoefficientField) else pf


def linear_combine(alpha: float, pf1, beta: float, pf2) -> PiecewiseFunction:
    """Exact ``alpha * pf1 + beta * pf2`` on the merged partition."""
    f1, f2 = _shape(pf1)._common(_shape(pf2))
    return PiecewiseFunction._raw(f1._breaks, alpha * f1._coeffs + beta * f2._coeffs)


def multiply(pf1, pf2) -> PiecewiseFunction:
    """Exact product on the merged partition."""
    f1, f2 = _shape(pf1)._common(_shape(pf2))
    d1, d2 = f1.degree, f2.degree
    if d1 + d2 > DEGREE_CAP:
        raise RepresentationError(
            f"product degree {d1 + d2} exceeds cap {DEGREE_CAP}")
    out = np.zeros((f1.n_cells, DEGREE_CAP + 1))
    for i in range(f1.n_cells):
        prod = npoly.polymul(f1._coeffs[i, : d1 + 1], f2._coeffs[i, : d2 + 1])
        out[i, : prod.size] = prod
    return PiecewiseFunction._raw(f1._breaks, out)


# -- coefficient fields ------------------------------------------------------

class CoefficientField:
    """Nonnegative inverse diffusivity with positive L1 norm.

    The essential bounds are computed exactly from per-cell extrema.
    ``in_class_L`` tells whether the field is bounded below by a positive
    constant, which is what makes the associated second order operator
    uniformly elliptic.
    """

    __slots__ = ("_shape", "_ess_inf", "_ess_sup", "_l1")

    def __init__(self, shape: PiecewiseFunction):
        if not isinstance(shape, PiecewiseFunction):
            raise UsageError("CoefficientField expects a PiecewiseFunction")
        lo, hi = shape.cell_extrema()
        atol = 1e-13 * max(1.0, float(np.max(np.abs(hi))))
        if lo.min() < -atol:
            raise DomainError(
                f"coefficient takes negative values (min {lo.min():.3e})")
        l1 = shape.norm_l1()
        if l1 <= 0.0:
            raise DegeneracyError("coefficient vanishes almost everywhere (zero L1 norm)")
        self._shape = shape
        self._ess_inf = max(float(lo.min()), 0.0)
        self._ess_sup = float(hi.max())
        self._l1 = l1

    @classmethod
    def constant(cls, value: float, interval: Interval) -> "CoefficientField":
        return cls(PiecewiseFunction.constant(value, interval))

    @classmethod
    def piecewise_constant(cls, breakpoints, values) -> "CoefficientField":
        return cls(PiecewiseFunction.piecewise_constant(breakpoints, values))

    @property
    def shape(self) -> PiecewiseFunction:
        return self._shape

    @property
    def interval(self) -> Interval:
        return self._shape.interval

    @property
    def ess_inf(self) -> float:
        return self._ess_inf

    @property
    def ess_sup(self) -> float:
        return self._ess_sup

    @property
    def l1(self) -> float:
        return self._l1

    @property
    def in_class_L(self) -> bool:
        return self._ess_inf > 0.0

    @property
    def is_piecewise_constant(self) -> bool:
        return self._shape.is_piecewise_constant

    def __call__(self, x):
        return self._shape(x)

    def __repr__(self):
        return (f"CoefficientField(cells={self._shape.n_cells}, "
                f"ess_inf={self._ess_inf:g}, ess_sup={self._ess_sup:g})")

    def shifted(self, lam: float) -> "CoefficientField":
        """The field ``pbar + lam``."""
        return CoefficientField(self._shape.shift(lam))

    def to_dict(self) -> dict:
        return {"kind": "coefficient", **self._shape.to_dict()}


def reciprocal(cf: CoefficientField) -> CoefficientField:
    """Cellwise ``1 / cf`` for a piecewise constant field in the class L."""
    if not cf.is_piecewise_constant:
        raise RepresentationError(
            "reciprocal is only representable for piecewise constant fields")
    if not cf.in_class_L:
        raise DegeneracyError("reciprocal of a field with zero essential infimum")
    shape = cf.shape
    return CoefficientField.piecewise_constant(shape.breakpoints, 1.0 / shape.coefficients[:, 0])


def mollify(pf: PiecewiseFunction, half_width: float) -> PiecewiseFunction:
    """Replace each jump of a piecewise constant function by a linear ramp.

    The ramp at a jump located at ``x_b`` spans ``[x_b - d, x_b + d]``.
    Breakpoints without a jump are dropped. ``d = 0`` returns ``pf``.
    """
    if not pf.is_piecewise_constant:
        raise RepresentationError("only piecewise constant functions can be mollified")
    d = float(half_width)
    if d == 0.0:
        return pf
    x, v = pf.breakpoints, pf.coefficients[:, 0]
    breaks = [x[0]]
    pieces = [[v[0]]]
    for i in range(1, x.size - 1):
        jump = v[i] - v[i - 1]
        if jump == 0.0:
            continue
        if not (breaks[-1] < x[i] - d and x[i] + d < x[-1]):
            raise DomainError(f"ramp half-width {d} too large near breakpoint {x[i]}")
        breaks += [x[i] - d, x[i] + d]
        pieces += [[v[i - 1], jump / (2.0 * d)], [v[i]]]
    breaks.append(x[-1])
    return PiecewiseFunction(breaks, pieces)


# -- coefficient families ----------------------------------------------------

@dataclass(frozen=True)
class ContrastFamily:
    """Unit resistivity with an inset of contrast ``M``.

    The generated inverse diffusivity is 1 outside ``[inset_left,
    inset_right]`` and ``1 / M`` inside, i.e. the diffusivity is ``M`` on the
    inset. ``M = inf`` yields the asymptotic field that vanishes on the inset.
    """

    interval: Interval
    inset_left: float
    inset_right: float
    contrast: float = 1.0

    def __post_init__(self):
        if not self.interval.a < self.inset_left < self.inset_right < self.interval.b:
            raise DomainError("inset must satisfy a < left < right < b")
        if not self.contrast > 0:
            raise DomainError("contrast must be positive")

    @property
    def breakpoints(self) -> list[float]:
        return [self.interval.a, self.inset_left, self.inset_right, self.interval.b]

    def member(self, contrast: float | None = None) -> CoefficientField:
        m = self.contrast if contrast is None else float(contrast)
        if not m > 0:
            raise DomainError("contrast must be positive")
        inner = 0.0 if math.isinf(m) else 1.0 / m
        return CoefficientField.piecewise_constant(self.breakpoints, [1.0, inner, 1.0])

    def limit(self) -> CoefficientField:
        return self.member(math.inf)

    def diffusivity(self, contrast: float | None = None) -> CoefficientField:
        m = self.contrast if contrast is None else float(contrast)
        if math.isinf(m):
            raise DegeneracyError("infinite diffusivity has no representation")
        return CoefficientField.piecewise_constant(self.breakpoints, [1.0, m, 1.0])


@dataclass(frozen=True)
class MollifiedSequence:
    """Continuous ramps approaching a piecewise constant target.

    Member ``nu`` (1-based) replaces every jump of the target at ``x_b`` by
    the linear interpolant on ``[x_b - d, x_b + d]`` with ``d = widths[nu-1]``.
    """

    target: CoefficientField
    widths: tuple

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(float(w) for w in self.widths))
        if not self.target.is_piecewise_constant:
            raise RepresentationError("mollification target must be piecewise constant")
        w = np.asarray(self.widths)
        if w.size == 0:
            raise UsageError("empty list of mollification widths")
        if np.any(w <= 0) or np.any(np.diff(w) >= 0):
            raise DomainError("widths must be positive and strictly decreasing")
        gaps = self.target.shape.widths
        limit = 0.5 * float(np.min(gaps[1:-1])) if gaps.size > 2 else math.inf
        limit = min(limit, float(gaps[0]), float(gaps[-1]))
        if w[0] >= limit:
            raise DomainError(f"width {w[0]} too large for breakpoint spacing")

    def __len__(self):
        return len(self.widths)

    def member(self, nu: int) -> CoefficientField:
        if not 1 <= nu <= len(self.widths):
            raise UsageError(f"index {nu} outside 1..{len(self.widths)}")
        return CoefficientField(mollify(self.target.shape, self.widths[nu - 1]))

    def members(self) -> list[CoefficientField]:
        return [self.member(nu) for nu in range(1, len(self.widths) + 1)]

    def distance_bound(self, nu: int) -> float:
        """Upper bound on the L1 distance of member ``nu`` to the target."""
        n_jumps = self.target.shape.n_cells - 1
        return n_jumps * self.widths[nu - 1] * (self.target.ess_sup - self.target.ess_inf)


def family_member(fam, index) -> CoefficientField:
    """Member of a coefficient family.

    For a :class:`ContrastFamily` the index is the contrast ``M`` (``inf``
    allowed); for a :class:`MollifiedSequence` it is the 1-based position.
    """
    if isinstance(fam, ContrastFamily):
        return fam.member(index)
    if isinstance(fam, MollifiedSequence):
        return fam.member(int(index))
    raise UsageError(f"unknown family type {type(fam).__name__}")


# -- JSON I/O ----------------------------------------------------------------

def coefficient_from_dict(data: dict):
    """Build a coefficient (or a family) from its JSON dictionary.

    Returns a :class:`CoefficientField`, :class:`ContrastFamily` or
    :class:`MollifiedSequence` depending on the ``family`` key.
    """
    family = data.get("family", "piecewise")
    if family == "piecewise":
        return CoefficientField(PiecewiseFunction.from_dict(data))
    if family == "constant":
        return CoefficientField.constant(data["value"], Interval(*data["interval"]))
    if family == "contrast":
        left, right = data["inset"]
        return ContrastFamily(Interval(*data["interval"]), left, right,
                              float(data.get("contrast", 1.0)))
    if family == "mollified":
        target = coefficient_from_dict(data["target"])
        return MollifiedSequence(target, tuple(data["widths"]))
    raise UsageError(f"unknown coefficient family {family!r}")


def _family_to_dict(obj) -> dict:
    if isinstance(obj, CoefficientField):
        return obj.to_dict()
    if isinstance(obj, ContrastFamily):
        return {"family": "contrast", "interval": [obj.interval.a, obj.interval.b],
                "inset": [obj.inset_left, obj.inset_right], "contrast": obj.contrast}
    if isinstance(obj, MollifiedSequence):
        return {"family": "mollified", "target": obj.target.to_dict(),
                "widths": list(obj.widths)}
    if isinstance(obj, PiecewiseFunction):
        return obj.to_dict()
    raise UsageError(f"cannot serialize {type(obj).__name__}")


def load_coefficient(path):
    with open(path, encoding="utf-8") as fh:
        return coefficient_from_dict(json.load(fh))


def save_coefficient(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_family_to_dict(obj), fh, indent=2)
        fh.write("\n")
