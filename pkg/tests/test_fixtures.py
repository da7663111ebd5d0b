import math

import numpy as np
import pytest

from conftest import one, poly_space, xfun
from ectbernstein.basis import build_bernstein_basis, endpoint_rows
from ectbernstein.chain import Sufficiency
from ectbernstein.errors import OutOfRange, PreconditionFailed
from ectbernstein.expspace import Interval
from ectbernstein.fixtures import (RHO, counterexample_functions, counterexample_scan,
                                   crit_inequality, endpoint_coefficient, example1_closed_form,
                                   h_criterion, h_criterion_derivative, scan_point,
                                   u4_closed_form, u4_space)
from ectbernstein.operator import expand_in_basis

SEVEN_QUARTERS = 7 * math.pi / 4


class TestU4ClosedForm:
    def test_p44_vector(self):
        assert list(u4_closed_form(3.0)[4].coeffs) == [-1.0, 0.0, 0.5, 1.0, 0.0]

    @pytest.mark.parametrize("b", [0.5, 3.0, SEVEN_QUARTERS, 6.2])
    def test_reflection_value(self, b):
        p = u4_closed_form(b)
        expected = math.cos(b) - 1 + b * b / 2
        assert p[0](0.0) == pytest.approx(expected, rel=1e-12)
        assert p[4](b) == pytest.approx(expected, rel=1e-12)
        assert expected > 0

    @pytest.mark.parametrize("b", [1.0, SEVEN_QUARTERS, 6.0])
    def test_zero_orders(self, b):
        space = u4_space()
        ra, rb = endpoint_rows(space, 0.0, 5), endpoint_rows(space, b, 5)
        for k, p in enumerate(u4_closed_form(b)):
            c = p.coeffs
            scale = np.abs(c).sum()
            assert np.all(np.abs(ra[:k] @ c) < 1e-10 * scale * (1 + b) ** 4)
            assert np.all(np.abs(rb[:4 - k] @ c) < 1e-10 * scale * (1 + b) ** 4)
            assert abs(ra[k] @ c) > 1e-6
            assert abs(rb[4 - k] @ c) > 1e-6

    def test_p42_two_zeros_each_end(self):
        p = u4_closed_form(SEVEN_QUARTERS)[2]
        for x in (0.0, SEVEN_QUARTERS):
            assert abs(p.deriv(x, 0)) < 1e-12 and abs(p.deriv(x, 1)) < 1e-12
            assert abs(p.deriv(x, 2)) > 1e-3

    @pytest.mark.parametrize("b", [0.0, 2 * math.pi, 7.0])
    def test_out_of_range(self, b):
        with pytest.raises(OutOfRange):
            u4_closed_form(b)

    def test_rho(self):
        assert math.tan(RHO / 2) == pytest.approx(RHO / 2, rel=1e-6)


class TestExample1:
    def test_p22(self):
        p = example1_closed_form(1.0)[2]
        x = np.linspace(0, 1, 5)
        assert np.allclose(p(x), 1 - np.cos(x), atol=1e-15)

    @pytest.mark.parametrize("b", [math.pi / 2, math.pi, 3 * math.pi - 0.1])
    def test_slopes(self, b):
        p21 = example1_closed_form(b)[1]
        assert p21.deriv(b, 1) == pytest.approx(-1.0, abs=1e-12)
        assert p21.deriv(0.0, 1) > 0

    def test_sign_change_past_two_pi(self):
        b = 3 * math.pi - 0.1
        p21 = example1_closed_form(b)[1]
        assert np.min(p21(np.linspace(0, b, 4000))) < 0

    def test_no_basis_at_two_pi(self):
        with pytest.raises(OutOfRange):
            example1_closed_form(4 * math.pi)


class TestHCriterion:
    def test_bound_on_grid(self):
        for b in np.linspace(SEVEN_QUARTERS, 2 * math.pi, 100, endpoint=False):
            assert h_criterion(b) < b - b * b / 2 < 0

    def test_value_at_seven_quarters(self):
        assert h_criterion(SEVEN_QUARTERS) < -9.6

    @pytest.mark.parametrize("b", [1.0, 5.6, SEVEN_QUARTERS])
    def test_two_paths(self, b):
        h1, h2 = h_criterion(b), h_criterion_derivative(b)
        assert abs(h1 - h2) <= 1e-10 * abs(h1)

    @pytest.mark.parametrize("b", [2.0, 5.9])
    def test_hand_derivatives(self, b):
        # f1' = 1 + sin, f1'' = cos; p43 derivatives written out by hand
        sb, cb = math.sin(b), math.cos(b)
        A, B = sb - b, cb - 1 + b * b / 2
        dp = B + A * b - A * sb - B * cb
        ddp = A - A * cb + B * sb
        assert h_criterion(b) == pytest.approx(cb * dp - (1 + sb) * ddp, rel=1e-12)


class TestCritInequality:
    def test_classical_positive(self):
        space = poly_space(4)
        basis = build_bernstein_basis(space, Interval(0, 1))
        assert crit_inequality(basis, one(space), xfun(space)) > 0

    @pytest.mark.parametrize("b, sign", [(SEVEN_QUARTERS, -1), (math.pi, 1)])
    def test_counterexample_signs(self, b, sign):
        f0, f1 = counterexample_functions()
        basis = build_bernstein_basis(u4_space(), Interval(0, b))
        assert np.sign(crit_inequality(basis, f0, f1)) == sign

    def test_proportional_to_h(self):
        b = SEVEN_QUARTERS
        f0, f1 = counterexample_functions()
        basis = build_bernstein_basis(u4_space(), Interval(0, b))
        crit = crit_inequality(basis, f0, f1)
        closed = u4_closed_form(b)[3]
        # generic p_{4,3} = s * closed p_{4,3} with s > 0
        s = basis.eval(b / 2)[3] / closed(b / 2)
        assert s > 0
        assert crit == pytest.approx(s * h_criterion(b), rel=1e-9)

    def test_endpoint_coefficient_matches_expansion(self):
        f0, f1 = counterexample_functions()
        for b in (2.0, SEVEN_QUARTERS):
            basis = build_bernstein_basis(u4_space(), Interval(0, b))
            for f in (f0, f1):
                direct = expand_in_basis(f, basis)[2]
                assert endpoint_coefficient(f, basis) == pytest.approx(direct, rel=1e-8)

    def test_precondition(self):
        space = poly_space(1)
        basis = build_bernstein_basis(space, Interval(0, 1))
        with pytest.raises(PreconditionFailed):
            crit_inequality(basis, one(space), xfun(space))


class TestScan:
    def test_counterexample_range(self):
        scan = counterexample_scan(SEVEN_QUARTERS, 2 * math.pi - 0.01, 50)
        assert len(scan.rows) == 50
        for row in scan.rows:
            assert row.error is None
            assert not row.feasible
            assert row.h_b < 0
            assert row.t2_overshoot > row.b
            assert row.sufficiency is Sufficiency.SOME_NEGATIVE
            assert row.violations == [2]
            assert row.crit < 0

    def test_small_b_feasible(self):
        scan = counterexample_scan(0.5, 1.5, 10)
        assert all(r.feasible for r in scan.rows)

    def test_h_matches_closed_form_at_ends(self):
        scan = counterexample_scan(SEVEN_QUARTERS, 6.0, 3)
        assert scan.rows[0].h_b == h_criterion(SEVEN_QUARTERS)
        assert scan.rows[-1].h_b == h_criterion(6.0)

    def test_sign_chain(self):
        for b in (1.0, 3.0, SEVEN_QUARTERS, 6.1):
            row = scan_point(b)
            assert (row.crit >= 0) == (2 not in row.violations)

    def test_csv(self):
        text = counterexample_scan(5.5, 5.6, 2).to_csv()
        lines = text.strip().splitlines()
        assert lines[0] == "b,h_b,feasible,t2_overshoot,w_min"
        assert len(lines) == 3
        assert lines[1].split(",")[0] == "5.5"

    def test_range_validation(self):
        with pytest.raises(OutOfRange):
            counterexample_scan(1.0, 7.0, 3)
