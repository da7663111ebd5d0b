"""Closed-form bases and the counterexample family on <1, x, x^2, cos x, sin x>.

These serve as ground truth for the generic construction.  The counterexample
uses f0 = 1 and f1 = 1 + x - cos x on [0, b]; for b >= 7 pi / 4 the node
t_2 = f1^{-1}(gamma_2 / beta_2) lands to the right of b.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BernsteinBasis, build_bernstein_basis
from .chain import Sufficiency, compute_w, derived_space, sufficiency_check
from .errors import BernsteinError, Infeasible, OutOfRange, PreconditionFailed
from .expspace import ExpSpace, Interval, SpaceElement, Spectrum
from .operator import (ExpansionCoeffs, build_operator, expand_in_basis,
                       invert_monotone, ratio_check)

U4_SPECTRUM = Spectrum(((0.0, 0.0, 3), (0.0, 1.0, 1), (0.0, -1.0, 1)))
TRIG_SPECTRUM = Spectrum(((0.0, 0.0, 1), (0.0, 1.0, 1), (0.0, -1.0, 1)))
RHO = 8.9868189  # first positive root of tan(x/2) = x/2
OVERSHOOT_REACH = 4.0


def u4_space() -> ExpSpace:
    return ExpSpace(U4_SPECTRUM)


def trig_space() -> ExpSpace:
    return ExpSpace(TRIG_SPECTRUM)


def counterexample_functions():
    """f0 = 1 and f1 = 1 + x - cos x in U_4."""
    space = u4_space()
    return space.element([1, 0, 0, 0, 0]), space.element([1, 1, 0, -1, 0])


def u4_closed_form(b: float) -> list[SpaceElement]:
    """p_{4,0..4} for {0, b} over (1, x, x^2, cos x, sin x).

    p_{4,0} and p_{4,1} are the reflections p_{4,4}(b - x) and p_{4,3}(b - x),
    expanded with the addition theorems.
    """
    if not 0 < b < 2 * math.pi:
        raise OutOfRange(f"b = {b} outside (0, 2 pi)")
    sb, cb = math.sin(b), math.cos(b)
    A = sb - b
    B = cb - 1 + 0.5 * b * b
    K = (2 * cb - 2 + b * sb) / (b + b * cb - 2 * sb)
    p4 = [-1.0, 0.0, 0.5, 1.0, 0.0]
    p3 = [-A, B, 0.5 * A, A, -B]
    p2 = [1.0, K, -(sb + K * (1 - cb)) / (2 * b), -1.0, -K]
    p0 = [0.5 * b * b - 1, -b, 0.5, cb, sb]
    p1 = [A * (0.5 * b * b - 1) + B * b, -A * b - B, 0.5 * A,
          A * cb - B * sb, A * sb + B * cb]
    space = u4_space()
    return [space.element(c) for c in (p0, p1, p2, p3, p4)]


def example1_closed_form(b: float) -> list[SpaceElement]:
    """p_{2,0..2} for {0, b} over (1, cos x, sin x)."""
    if math.isclose(math.cos(b), 1.0, rel_tol=0.0, abs_tol=1e-14):
        raise OutOfRange(f"no Bernstein basis for {{0, {b}}}: b is a multiple of 2 pi")
    sb, cb = math.sin(b), math.cos(b)
    r = sb / (1 - cb)
    space = trig_space()
    return [space.element(c) for c in ([1.0, -cb, -sb], [-r, r, 1.0], [1.0, -1.0, 0.0])]


def h_criterion(b: float) -> float:
    """f1''(b) p_{4,3}'(b) - f1'(b) p_{4,3}''(b), expanded trigonometric form."""
    sb, cb = math.sin(b), math.cos(b)
    return (cb * sb * b - 0.5 * b * b * cb + 2 * cb * cb - 2 * cb + b - b * cb
            - 0.5 * sb * b * b + sb * b - 0.5 * b * b)


def h_criterion_derivative(b: float) -> float:
    """Same quantity evaluated through derivatives of the closed-form p_{4,3}."""
    p43 = u4_closed_form(b)[3]
    _, f1 = counterexample_functions()
    return float(f1.deriv(b, 2) * p43.deriv(b, 1) - f1.deriv(b, 1) * p43.deriv(b, 2))


def classical_closed_form(n: int) -> BernsteinBasis:
    """x^k (1-x)^(n-k) on [0, 1] in the monomial basis, exact coefficients."""
    space = ExpSpace(Spectrum(((0.0, 0.0, n + 1),)))
    coeffs = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        for i in range(n - k + 1):
            coeffs[k, k + i] = math.comb(n - k, i) * (-1) ** i
    norm = np.array([float(math.factorial(k)) for k in range(n + 1)])
    return BernsteinBasis(space, Interval(0.0, 1.0), coeffs, norm)


def endpoint_coefficient(f, basis: BernsteinBasis) -> float:
    """Coefficient of p_{n,n-2} in f from derivatives up to order two at b."""
    n = basis.n
    b = basis.iv.b
    p0, p1, p2 = (basis.eval(b, m) for m in range(3))
    f0_, f1_, f2_ = (float(f.deriv(b, m)) for m in range(3))
    pn, pn1, pn2 = n, n - 1, n - 2
    lhs = p0[pn] * p1[pn1] * p2[pn2]
    rhs = (p0[pn] * (f2_ * p1[pn1] - f1_ * p2[pn1])
           + f0_ * (p1[pn] * p2[pn1] - p1[pn1] * p2[pn]))
    return rhs / lhs


def crit_inequality(p_basis: BernsteinBasis, f0, f1, b: float | None = None) -> float:
    """Left-hand side of the k = n-2 endpoint criterion at b.

    Non-negative iff gamma_{n-2}/beta_{n-2} <= gamma_n/beta_n, provided
    beta_{n-2}, beta_{n-1}, beta_n > 0 and f0(b) > 0.
    """
    n = p_basis.n
    b = p_basis.iv.b if b is None else b
    if n < 2:
        raise PreconditionFailed("criterion needs n >= 2")
    beta = expand_in_basis(f0, p_basis)
    if np.any(beta[n - 2:] <= 0):
        raise PreconditionFailed("beta_{n-2}, beta_{n-1}, beta_n must be positive")
    g = [float(f0.deriv(b, m)) for m in range(3)]
    f = [float(f1.deriv(b, m)) for m in range(3)]
    if g[0] <= 0:
        raise PreconditionFailed("f0(b) must be positive")
    dp = p_basis.eval(b, 1)[n - 1]
    ddp = p_basis.eval(b, 2)[n - 1]
    return (g[0] * f[2] - g[2] * f[0]) * dp - (g[0] * f[1] - g[1] * f[0]) * ddp


@dataclass
class ScanRow:
    b: float
    h_b: float
    feasible: bool
    t2_overshoot: float
    w_min: float
    sufficiency: Sufficiency
    violations: list = field(default_factory=list)
    crit: float = math.nan
    error: str | None = None


@dataclass
class CounterexampleScan:
    rows: list

    @property
    def b(self) -> np.ndarray:
        return np.array([r.b for r in self.rows])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("b,h_b,feasible,t2_overshoot,w_min\n")
        for r in self.rows:
            out.write(f"{r.b:.17g},{r.h_b:.17g},{int(r.feasible)},"
                      f"{r.t2_overshoot:.17g},{r.w_min:.17g}\n")
        return out.getvalue()


def scan_point(b: float) -> ScanRow:
    """Everything the scan records for one right endpoint b."""
    iv = Interval(0.0, b)
    space = u4_space()
    f0, f1 = counterexample_functions()
    h_b = h_criterion(b)
    basis = build_bernstein_basis(space, iv)
    beta = expand_in_basis(f0, basis)
    gamma = expand_in_basis(f1, basis)
    report = ratio_check(ExpansionCoeffs(beta, gamma), f0, f1, iv)
    # diagnostic: f1 is increasing on the whole line, so t_2 may be sought past b
    t2 = invert_monotone(f1, gamma[2] / beta[2], 0.0, b + OVERSHOOT_REACH,
                         1e-13 * (abs(f1(0.0)) + abs(f1(b))))
    q = derived_space(space, iv, f0, cross_check=False).basis
    w = compute_w(f0, f1, q)
    feasible, error = True, None
    try:
        build_operator(space, iv, f0, f1, basis=basis)
    except Infeasible:
        feasible = False
    except BernsteinError as exc:
        feasible, error = False, str(exc)
    row = ScanRow(b, h_b, feasible, float(t2), float(np.min(w)), sufficiency_check(w),
                  [v[0] for v in report.violations], crit_inequality(basis, f0, f1), error)
    if h_b < 0 and feasible:
        raise AssertionError(f"h({b}) < 0 but an operator was built")
    return row


def counterexample_scan(b_min: float, b_max: float, steps: int) -> CounterexampleScan:
    if not (0 < b_min <= b_max < 2 * math.pi):
        raise OutOfRange("scan range must lie in (0, 2 pi)")
    bs = np.linspace(b_min, b_max, steps) if steps > 1 else np.array([b_min])
    rows = []
    for b in bs:
        try:
            rows.append(scan_point(float(b)))
        except BernsteinError as exc:
            rows.append(ScanRow(float(b), h_criterion(float(b)), False, math.nan,
                                math.nan, Sufficiency.SOME_NEGATIVE, error=str(exc)))
    return CounterexampleScan(rows)
