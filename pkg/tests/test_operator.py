import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import binom_basis, expfun, one, poly_space, xfun
from ectbernstein.basis import build_bernstein_basis
from ectbernstein.errors import (Infeasible, PreconditionFailed, RatioOutOfRange,
                                 SingularExpansion)
from ectbernstein.expspace import ExpSpace, Interval, Spectrum
from ectbernstein.fixtures import counterexample_functions, u4_space
from ectbernstein.operator import (ExpansionCoeffs, apply, apply_csv, build_operator,
                                   expand_in_basis, ratio_check, residual_report,
                                   solve_nodes)


def classical(n):
    space = poly_space(n)
    return build_operator(space, Interval(0, 1), one(space), xfun(space))


class TestExpand:
    def test_one_in_quadratic_basis(self):
        space = poly_space(2)
        basis = build_bernstein_basis(space, Interval(0, 1))
        assert np.allclose(expand_in_basis(one(space), basis), [1, 2, 1], atol=1e-12)
        assert np.allclose(expand_in_basis(xfun(space), basis), [0, 1, 1], atol=1e-12)

    def test_basis_function_gives_unit_vector(self):
        basis = build_bernstein_basis(u4_space(), Interval(0, 4))
        for j in range(5):
            assert np.allclose(expand_in_basis(basis[j], basis), np.eye(5)[j], atol=1e-9)

    def test_foreign_function_is_rejected(self):
        basis = build_bernstein_basis(poly_space(2), Interval(0, 1))
        with pytest.raises(SingularExpansion):
            expand_in_basis(expfun(ExpSpace(Spectrum.from_values([1])), 1), basis)


class TestRatioCheck:
    def test_classical_quadratic(self):
        space = poly_space(2)
        basis = build_bernstein_basis(space, Interval(0, 1))
        coeffs = ExpansionCoeffs(expand_in_basis(one(space), basis),
                                 expand_in_basis(xfun(space), basis))
        rep = ratio_check(coeffs, one(space), xfun(space), Interval(0, 1))
        assert rep.feasible
        assert np.allclose(rep.ratios, [0, 0.5, 1], atol=1e-12)

    def test_counterexample_violation_at_two(self):
        b = 7 * math.pi / 4
        f0, f1 = counterexample_functions()
        basis = build_bernstein_basis(u4_space(), Interval(0, b))
        coeffs = ExpansionCoeffs(expand_in_basis(f0, basis), expand_in_basis(f1, basis))
        rep = ratio_check(coeffs, f0, f1, Interval(0, b))
        assert not rep.feasible
        assert [(k, side) for k, _, side in rep.violations] == [(2, "upper")]
        assert rep.ratios[2] > rep.ratios[4]

    def test_constant_ratio_rejected(self):
        space = poly_space(2)
        basis = build_bernstein_basis(space, Interval(0, 1))
        coeffs = ExpansionCoeffs(expand_in_basis(one(space), basis),
                                 expand_in_basis(one(space), basis))
        with pytest.raises(PreconditionFailed):
            ratio_check(coeffs, one(space), one(space), Interval(0, 1))

    def test_nonpositive_f0_rejected(self):
        space = poly_space(2)
        with pytest.raises(PreconditionFailed):
            build_operator(space, Interval(-1, 1), xfun(space), one(space) * -1.0)


class TestNodes:
    def test_quadratic(self):
        assert np.allclose(classical(2).nodes, [0, 0.5, 1], atol=1e-12)

    def test_exponential_inverse(self):
        space = ExpSpace(Spectrum.from_values([0, 1, 2]))
        iv = Interval(0, 1)
        f0, f1 = one(space), expfun(space, 1)
        basis = build_bernstein_basis(space, iv)
        coeffs = ExpansionCoeffs(expand_in_basis(f0, basis), expand_in_basis(f1, basis))
        t = solve_nodes(coeffs, f0, f1, iv)
        r = coeffs.gamma / coeffs.beta
        assert t[1] == pytest.approx(math.log(r[1]), abs=1e-12)
        assert abs(math.exp(t[1]) - r[1]) < 1e-12
        assert t[0] == 0.0 and t[2] == 1.0

    def test_counterexample_ratio_out_of_range(self):
        b = 7 * math.pi / 4
        f0, f1 = counterexample_functions()
        basis = build_bernstein_basis(u4_space(), Interval(0, b))
        coeffs = ExpansionCoeffs(expand_in_basis(f0, basis), expand_in_basis(f1, basis))
        with pytest.raises(RatioOutOfRange) as info:
            solve_nodes(coeffs, f0, f1, Interval(0, b))
        assert info.value.k == 2
        assert info.value.ratio > info.value.upper

    @pytest.mark.parametrize("spec, lam", [
        (Spectrum.from_values([0, 1, 2, 3]), 1.0),
        (Spectrum.from_values([0, 0.5, 1.3, 2.7, 4]), 0.5),
    ])
    def test_monotone_order_for_real_exponents(self, spec, lam):
        space = ExpSpace(spec)
        op = build_operator(space, Interval(0, 1), one(space), expfun(space, lam))
        assert np.all(np.diff(op.nodes) > 0)


class TestBuildOperator:
    @pytest.mark.parametrize("n", range(1, 9))
    def test_classical(self, n):
        op = classical(n)
        assert np.allclose(op.nodes, np.arange(n + 1) / n, atol=1e-10)
        x = np.linspace(0, 1, 101)
        got = op.weights * op.basis.eval(x)
        want = np.stack([binom_basis(n, k, x) for k in range(n + 1)], axis=-1)
        assert np.max(np.abs(got - want)) <= 1e-9 * np.max(np.abs(want))

    def test_weights_positive(self):
        space = ExpSpace(Spectrum.from_values([0, 1, 2, 3]))
        op = build_operator(space, Interval(0, 1), one(space), expfun(space, 1))
        assert np.all(op.weights > 0)
        assert np.allclose(op.f0(op.nodes) * op.weights, op.coeffs.beta, rtol=1e-14)

    def test_counterexample_infeasible(self):
        f0, f1 = counterexample_functions()
        with pytest.raises(Infeasible) as info:
            build_operator(u4_space(), Interval(0, 15 * math.pi / 8), f0, f1)
        assert 2 in [v[0] for v in info.value.report.violations]

    def test_repeatable(self):
        a, b = classical(5), classical(5)
        assert np.allclose(a.nodes, b.nodes, atol=1e-10, rtol=0)
        assert np.allclose(a.weights, b.weights, atol=1e-10, rtol=0)

    def test_json(self):
        data = classical(2).to_json()
        assert data["interval"] == {"a": 0.0, "b": 1.0}
        assert len(data["nodes"]) == len(data["weights"]) == 3


class TestApply:
    def test_x_squared(self):
        assert apply(classical(2), lambda t: t ** 2, 0.5) == pytest.approx(0.375, abs=1e-12)

    def test_x_squared_direct_sum(self):
        for n in (3, 6):
            x = np.linspace(0, 1, 11)
            direct = sum((k / n) ** 2 * binom_basis(n, k, x) for k in range(n + 1))
            assert np.allclose(apply(classical(n), lambda t: t ** 2, x), direct, atol=1e-12)

    def test_zero(self):
        out = apply(classical(4), lambda t: np.zeros_like(t), np.linspace(0, 1, 9))
        assert np.all(out == 0)

    def test_endpoint_interpolation(self):
        op = classical(5)
        f = lambda t: np.sin(3 * t) + 2
        assert apply(op, f, 0.0) == pytest.approx(f(0.0), abs=1e-12)
        assert apply(op, f, 1.0) == pytest.approx(f(1.0), abs=1e-12)

    def test_fixes_f0(self):
        space = ExpSpace(Spectrum.from_values([0, 1, 2]))
        op = build_operator(space, Interval(0, 1), one(space), expfun(space, 1))
        x = np.linspace(0, 1, 101)
        assert np.max(np.abs(op(op.f0, x) - 1.0)) < 1e-8

    def test_csv(self):
        lines = apply_csv(classical(2), lambda t: t ** 2, [0.5]).splitlines()
        assert lines[0] == "x,Bf,f"
        assert [float(v) for v in lines[1].split(",")] == pytest.approx([0.5, 0.375, 0.25])


class TestResiduals:
    def test_classical_four(self):
        rep = residual_report(classical(4))
        assert rep.res_f0 < 1e-12 and rep.res_f1 < 1e-12 and rep.positive

    def test_exponential(self):
        space = ExpSpace(Spectrum.from_values([0, 1, 2]))
        rep = residual_report(build_operator(space, Interval(0, 1), one(space),
                                             expfun(space, 1)))
        assert rep.res_f0 < 1e-8 and rep.res_f1 < 1e-8 and rep.positive

    def test_negated_weight_detected(self):
        op = classical(4)
        w = op.weights.copy()
        w[2] = -w[2]
        assert not residual_report(replace(op, weights=w)).positive


class TestRescaling:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(0.01, 100), min_size=5, max_size=5))
    def test_operator_values_unchanged(self, scales):
        space = u4_space()
        iv = Interval(0, 3.0)
        f0, f1 = counterexample_functions()
        base = build_bernstein_basis(space, iv)
        op1 = build_operator(space, iv, f0, f1, basis=base)
        op2 = build_operator(space, iv, f0, f1, basis=base.rescaled(scales))
        x = iv.grid(101)
        f = lambda t: np.cos(t) + t ** 3
        v1, v2 = op1(f, x), op2(f, x)
        assert np.max(np.abs(v1 - v2)) <= 1e-10 * np.max(np.abs(v1))


class TestFixingProperty:
    SPEC = Spectrum.from_values([0, 0.5, 1.3, 2.7, 4])

    def test_second_exponent(self):
        space = ExpSpace(self.SPEC)
        op = build_operator(space, Interval(0, 1), one(space), expfun(space, 0.5))
        rep = residual_report(op)
        assert rep.res_f0 < 1e-8 and rep.res_f1 < 1e-8 and rep.positive

    def test_exponential_outside_span(self):
        space = ExpSpace(self.SPEC)
        outside = expfun(ExpSpace(Spectrum.from_values([1])), 1)
        with pytest.raises(SingularExpansion):
            build_operator(space, Interval(0, 1), one(space), outside)
