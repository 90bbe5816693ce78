import json
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from hypothesis import given, settings, strategies as st

from roughdiff.coefficient import (
    CoefficientField,
    ContrastFamily,
    Interval,
    MollifiedSequence,
    PiecewiseFunction,
    antiderivative,
    coefficient_from_dict,
    evaluate,
    family_member,
    linear_combine,
    load_coefficient,
    mollify,
    multiply,
    norm_l1,
    norm_l2,
    norm_linf,
    reciprocal,
    save_coefficient,
)
from roughdiff.errors import DegeneracyError, DomainError, RepresentationError, UsageError

UNIT = Interval(0.0, 1.0)
EX1 = ContrastFamily(Interval(-1.0, 1.0), -0.5, 0.5)


small = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def piecewise(draw, max_cells=4, max_degree=2):
    n = draw(st.integers(1, max_cells))
    deg = draw(st.integers(0, max_degree))
    inner = sorted(draw(st.lists(st.floats(0.05, 0.95), min_size=n - 1, max_size=n - 1,
                                 unique=True)))
    breaks = [0.0] + inner + [1.0]
    if np.min(np.diff(breaks)) < 1e-3:
        breaks = list(np.linspace(0, 1, n + 1))
    coeffs = [[draw(small) for _ in range(deg + 1)] for _ in range(n)]
    return PiecewiseFunction(breaks, coeffs)


class TestEvaluate:
    def test_example1_member(self):
        assert evaluate(EX1.member(4.0), 0.0) == 0.25

    def test_constant(self):
        one = PiecewiseFunction.constant(1.0, UNIT)
        assert np.all(one(np.linspace(0, 1, 11)) == 1.0)

    def test_local_ramp(self):
        ramp = PiecewiseFunction([0.0, 1.0], [[0.0, 2.0]])
        assert ramp(0.5) == pytest.approx(1.0)

    def test_outside_interval(self):
        with pytest.raises(DomainError):
            PiecewiseFunction.constant(1.0, UNIT)(1.5)

    def test_right_continuous(self):
        step = PiecewiseFunction.piecewise_constant([0, 0.5, 1], [1.0, 3.0])
        assert step(0.5) == 3.0
        assert step.left_limit(0.5) == 1.0
        assert step(1.0) == 3.0


class TestAntiderivative:
    def test_identity(self):
        H = antiderivative(PiecewiseFunction.constant(1.0, UNIT))
        x = np.linspace(0, 1, 7)
        np.testing.assert_allclose(H(x), x, atol=1e-15)

    def test_length(self):
        H = antiderivative(PiecewiseFunction.constant(1.0, Interval(-1, 1)))
        assert H(1.0) == pytest.approx(2.0)

    def test_example1_integral(self):
        H = EX1.member(4.0).shape.antiderivative()
        assert H(1.0) == pytest.approx(1.25)

    def test_degree_cap(self):
        top = PiecewiseFunction([0.0, 1.0], [[0, 0, 0, 0, 0, 0, 1.0]])
        with pytest.raises(RepresentationError):
            top.antiderivative()

    @given(piecewise())
    def test_derivative_roundtrip(self, pf):
        back = pf.antiderivative().derivative()
        x = np.linspace(0, 1, 23)
        np.testing.assert_allclose(back(x), pf(x), atol=1e-9 * (1 + pf.norm_linf()))


class TestNorms:
    def test_unit(self):
        one = PiecewiseFunction.constant(1.0, UNIT)
        assert (norm_l1(one), norm_l2(one), norm_linf(one)) == (1.0, 1.0, 1.0)

    def test_example1_l1(self):
        assert norm_l1(EX1.member(4.0)) == pytest.approx(1.25)

    def test_constant_difference(self):
        d = PiecewiseFunction.constant(2.0, UNIT) - PiecewiseFunction.constant(1.0, UNIT)
        assert norm_l1(d) == 1.0

    def test_sign_change(self):
        lin = PiecewiseFunction.from_polynomial([-0.5, 1.0], [0.0, 1.0])
        assert norm_l1(lin) == pytest.approx(0.25)
        assert norm_l2(lin) == pytest.approx(math.sqrt(1 / 12))

    @given(piecewise())
    def test_norm_ordering(self, pf):
        # |I| = 1 so L1 <= L2 <= Linf
        l1, l2, li = pf.norm_l1(), pf.norm_l2(), pf.norm_linf()
        assert l1 <= l2 * (1 + 1e-9) + 1e-12
        assert l2 <= li * (1 + 1e-9) + 1e-12

    @given(piecewise())
    def test_self_difference_zero(self, pf):
        assert norm_l1(pf - pf) == 0.0

    @given(piecewise())
    @settings(max_examples=50)
    def test_l1_against_quadrature(self, pf):
        x = np.linspace(0, 1, 200_001)
        ref = trapezoid(np.abs(pf(x)), x)
        assert pf.norm_l1() == pytest.approx(ref, rel=1e-4, abs=1e-6)


class TestArithmetic:
    def test_shift(self):
        s = CoefficientField.constant(1.0, UNIT).shifted(0.05)
        assert s.ess_inf == s.ess_sup == pytest.approx(1.05)

    def test_square(self):
        x = PiecewiseFunction.from_polynomial([0.0, 1.0], [0.0, 1.0])
        sq = multiply(x, x)
        t = np.linspace(0, 1, 9)
        np.testing.assert_allclose(sq(t), t ** 2, atol=1e-15)

    def test_mismatched(self):
        with pytest.raises(DomainError):
            PiecewiseFunction.constant(1.0, UNIT) + PiecewiseFunction.constant(1.0, Interval(0, 2))

    def test_multiply_degree_cap(self):
        c = PiecewiseFunction([0.0, 1.0], [[1, 1, 1, 1, 1]])
        with pytest.raises(RepresentationError):
            multiply(c, c)

    @given(piecewise(), piecewise(), small, small)
    def test_linearity(self, p1, p2, a, b):
        comb = linear_combine(a, p1, b, p2)
        x = np.linspace(0, 1, 31)
        ref = a * p1(x) + b * p2(x)
        np.testing.assert_allclose(comb(x), ref, atol=1e-9 * (1 + np.max(np.abs(ref))))

    @given(piecewise(), piecewise())
    def test_multiply_pointwise(self, p1, p2):
        x = np.linspace(0, 1, 31)
        ref = p1(x) * p2(x)
        np.testing.assert_allclose(multiply(p1, p2)(x), ref,
                                   atol=1e-9 * (1 + np.max(np.abs(ref))))

    @given(piecewise())
    def test_refine_preserves(self, pf):
        fine = pf.refine(np.linspace(0, 1, 8))
        x = np.linspace(0, 1, 41)
        np.testing.assert_allclose(fine(x), pf(x), atol=1e-10 * (1 + pf.norm_linf()))


class TestReciprocal:
    def test_middle_cell(self):
        p = EX1.diffusivity(4.0)
        assert reciprocal(p)(0.0) == 0.25

    def test_identity(self):
        assert reciprocal(CoefficientField.constant(1.0, UNIT))(0.3) == 1.0

    def test_degenerate(self):
        p = CoefficientField.piecewise_constant([0, 0.5, 1], [0.0, 1.0])
        with pytest.raises(DegeneracyError):
            reciprocal(p)

    def test_non_constant(self):
        ramp = CoefficientField(PiecewiseFunction([0.0, 1.0], [[1.0, 1.0]]))
        with pytest.raises(RepresentationError):
            reciprocal(ramp)


class TestCoefficientField:
    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            CoefficientField.constant(-1.0, UNIT)

    def test_rejects_zero(self):
        with pytest.raises(DegeneracyError):
            CoefficientField.constant(0.0, UNIT)

    def test_bounds(self):
        p = EX1.member(4.0)
        assert (p.ess_inf, p.ess_sup, p.l1) == (0.25, 1.0, pytest.approx(1.25))
        assert p.in_class_L
        assert not EX1.limit().in_class_L


class TestFamilies:
    def test_unit_contrast(self):
        p = family_member(EX1, 1.0)
        assert p.ess_inf == p.ess_sup == 1.0

    def test_limit_is_indicator(self):
        lim = family_member(EX1, math.inf)
        np.testing.assert_array_equal(lim(np.array([-0.75, 0.0, 0.75])), [1.0, 0.0, 1.0])

    def test_mollified_distance(self):
        step = CoefficientField.piecewise_constant([0, 0.5, 1], [0.5, 1.0])
        seq = MollifiedSequence(step, (0.1,))
        d = (seq.member(1).shape - step.shape).norm_l1()
        assert d <= 0.05
        assert d == pytest.approx(0.025)

    def test_mollified_invariants(self):
        step = CoefficientField.piecewise_constant([0, 0.3, 0.6, 1], [0.5, 2.0, 1.0])
        seq = MollifiedSequence(step, tuple(0.1 * 2.0 ** -k for k in range(6)))
        dists = []
        for nu in range(1, len(seq) + 1):
            m = seq.member(nu)
            assert step.ess_inf * (1 - 1e-14) <= m.ess_inf and m.ess_sup <= step.ess_sup * (1 + 1e-14)
            dists.append((m.shape - step.shape).norm_l1())
            assert dists[-1] <= seq.distance_bound(nu) + 1e-15
        assert all(b < a for a, b in zip(dists, dists[1:]))

    def test_mollify_keeps_continuity(self):
        m = mollify(PiecewiseFunction.piecewise_constant([0, 0.5, 1], [1.0, 3.0]), 0.1)
        assert np.max(np.abs(m.jumps())) < 1e-14

    def test_bad_widths(self):
        step = CoefficientField.piecewise_constant([0, 0.5, 1], [0.5, 1.0])
        with pytest.raises(UsageError):
            MollifiedSequence(step, ())
        with pytest.raises(DomainError):
            MollifiedSequence(step, (0.1, 0.2))
        with pytest.raises(DomainError):
            MollifiedSequence(step, (0.6,))

    def test_unknown_family(self):
        with pytest.raises(UsageError):
            family_member(object(), 1)


class TestJson:
    @given(piecewise(max_degree=3))
    def test_roundtrip_dict(self, pf):
        again = PiecewiseFunction.from_dict(json.loads(json.dumps(pf.to_dict())))
        np.testing.assert_array_equal(again.breakpoints, pf.breakpoints)
        np.testing.assert_array_equal(again.coefficients, pf.coefficients)

    @pytest.mark.parametrize("obj", [
        EX1.member(4.0),
        EX1,
        MollifiedSequence(CoefficientField.piecewise_constant([0, 0.5, 1], [0.5, 1.0]),
                          (0.1, 0.05)),
        CoefficientField(PiecewiseFunction([0, 1 / 3, 1], [[0.1, 0.7], [1 / 7]])),
    ])
    def test_file_roundtrip_bit_identical(self, tmp_path, obj):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        save_coefficient(obj, first)
        save_coefficient(load_coefficient(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_constant_family(self):
        c = coefficient_from_dict({"family": "constant", "value": 2.0, "interval": [0, 1]})
        assert c.l1 == 2.0

    def test_unknown(self):
        with pytest.raises(UsageError):
            coefficient_from_dict({"family": "spline"})
