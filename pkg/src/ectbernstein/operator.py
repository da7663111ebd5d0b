"""Bernstein operators B_n f = sum_k f(t_k) alpha_k p_{n,k} fixing f0 and f1.

With f0 = sum beta_k p_{n,k} and f1 = sum gamma_k p_{n,k}, the operator
exists iff every beta_k > 0 and each ratio gamma_k / beta_k lies in
[h(a), h(b)] for h = f1 / f0.  The node t_k then solves h(t_k) =
gamma_k / beta_k and the weight is alpha_k = beta_k / f0(t_k).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BernsteinBasis, as_space, build_bernstein_basis
from .errors import (Infeasible, NumericalMismatch, PreconditionFailed,
                     RatioOutOfRange, SingularExpansion)
from .expspace import Interval, quotient_deriv

EXPANSION_TOL = 1e-8
CLAMP_TOL = 1e-10
AUDIT_GRID = 1000


@dataclass
class ExpansionCoeffs:
    beta: np.ndarray
    gamma: np.ndarray


def _triangular_expansion(f, basis: BernsteinBasis) -> np.ndarray:
    """Match derivatives at a for the lower half and at b for the upper half.

    Each half is a triangular system, since p_{n,k} vanishes to order k at a
    and to order n-k at b.
    """
    n = basis.n
    a, b = basis.iv.a, basis.iv.b
    mid = n // 2
    coef = np.zeros(n + 1)
    for j in range(mid + 1):
        rhs = f.deriv(a, j) - basis.eval(a, j)[:j] @ coef[:j]
        coef[j] = rhs / basis.eval(a, j)[j]
    for j in range(n - mid):
        k = n - j
        row = basis.eval(b, j)
        rhs = f.deriv(b, j) - row[k + 1:] @ coef[k + 1:]
        coef[k] = rhs / row[k]
    return coef


def _expansion_residual(f, basis: BernsteinBasis, coef, x) -> float:
    target = np.asarray(f.deriv(x, 0), dtype=float)
    approx = basis.eval(x) @ coef
    scale = max(np.max(np.abs(target)), 1e-300)
    return float(np.max(np.abs(approx - target)) / scale)


def expand_in_basis(f, basis: BernsteinBasis, tol: float = EXPANSION_TOL) -> np.ndarray:
    """Coefficients of ``f`` in ``basis``.

    ``f`` needs a ``deriv(x, m)`` method.  Collocation at n+1 Chebyshev
    points first; endpoint-derivative matching if the collocation residual
    on a 10(n+1)-point audit grid exceeds ``tol``.
    """
    n = basis.n
    check = basis.iv.grid(10 * (n + 1))
    x = basis.iv.chebyshev_points(n + 1)
    coef = None
    try:
        coef = np.linalg.solve(basis.eval(x), f.deriv(x, 0))
        res = _expansion_residual(f, basis, coef, check)
    except np.linalg.LinAlgError:
        res = math.inf
    if res <= tol:
        return coef
    coef = _triangular_expansion(f, basis)
    res2 = _expansion_residual(f, basis, coef, check)
    if res2 <= tol:
        return coef
    raise SingularExpansion(
        f"expansion residual {min(res, res2):.3g} exceeds {tol:g}"
    )


@dataclass
class FeasibilityReport:
    ratios: np.ndarray
    lower: float
    upper: float
    violations: list
    beta_positive: bool
    h_a: float = math.nan
    h_b: float = math.nan

    @property
    def feasible(self) -> bool:
        return self.beta_positive and not self.violations

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "beta_positive": self.beta_positive,
            "ratios": [float(r) for r in self.ratios],
            "lower": float(self.lower),
            "upper": float(self.upper),
            "violations": [{"k": k, "ratio": float(r), "bound": which}
                           for k, r, which in self.violations],
        }


def check_preconditions(f0, f1, iv: Interval, grid: int = AUDIT_GRID):
    """f0 > 0 and f1/f0 strictly increasing, audited on a uniform grid."""
    x = iv.grid(grid)
    v0 = f0.deriv(x, 0)
    if np.any(v0 <= 0):
        raise PreconditionFailed("f0 is not strictly positive on the audit grid")
    h = f1.deriv(x, 0) / v0
    dh = quotient_deriv(f1, f0, x, 1)
    hscale = max(np.max(np.abs(h)), 1e-300)
    if np.any(np.diff(h) <= 0) or np.any(dh < -1e-12 * hscale / iv.length):
        raise PreconditionFailed("f1/f0 is not strictly increasing on the audit grid")


def ratio_tolerance(lower: float, upper: float, rel: float = CLAMP_TOL) -> float:
    return rel * max(abs(lower), abs(upper), upper - lower)


def ratio_check(coeffs: ExpansionCoeffs, f0, f1, iv: Interval,
                grid: int = AUDIT_GRID, clamp_tol: float = CLAMP_TOL,
                endpoint_tol: float = 1e-10) -> FeasibilityReport:
    check_preconditions(f0, f1, iv, grid)
    beta, gamma = coeffs.beta, coeffs.gamma
    beta_positive = bool(np.all(beta > 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = gamma / beta
    h_a = float(f1.deriv(iv.a, 0) / f0.deriv(iv.a, 0))
    h_b = float(f1.deriv(iv.b, 0) / f0.deriv(iv.b, 0))
    lower, upper = float(ratios[0]), float(ratios[-1])
    scale = max(abs(h_a), abs(h_b), h_b - h_a)
    if abs(lower - h_a) > endpoint_tol * scale or abs(upper - h_b) > endpoint_tol * scale:
        raise NumericalMismatch(
            f"endpoint ratios ({lower!r}, {upper!r}) differ from h(a), h(b) "
            f"= ({h_a!r}, {h_b!r})"
        )
    tol = ratio_tolerance(h_a, h_b, clamp_tol)
    violations = []
    for k, r in enumerate(ratios):
        if not np.isfinite(r):
            violations.append((k, float(r), "undefined"))
        elif r < lower - tol:
            violations.append((k, float(r), "lower"))
        elif r > upper + tol:
            violations.append((k, float(r), "upper"))
    return FeasibilityReport(ratios, lower, upper, violations, beta_positive, h_a, h_b)


def invert_monotone(h, target: float, lo: float, hi: float, tol: float,
                    max_iter: int = 200) -> float:
    """Bisection for h(t) = target with h increasing on [lo, hi]."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = h(mid) - target
        if abs(val) < tol:
            return mid
        if val < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_nodes(coeffs: ExpansionCoeffs, f0, f1, iv: Interval,
                clamp_tol: float = CLAMP_TOL) -> np.ndarray:
    """Nodes t_0 = a, t_n = b and interior t_k with h(t_k) = gamma_k/beta_k."""

    def h(t):
        return float(f1.deriv(t, 0) / f0.deriv(t, 0))

    ratios = coeffs.gamma / coeffs.beta
    n = len(ratios) - 1
    h_a, h_b = h(iv.a), h(iv.b)
    slack = ratio_tolerance(h_a, h_b, clamp_tol)
    stop = 1e-13 * (abs(h_a) + abs(h_b))
    nodes = np.empty(n + 1)
    nodes[0], nodes[n] = iv.a, iv.b
    for k in range(1, n):
        r = ratios[k]
        if not np.isfinite(r) or r < h_a - slack or r > h_b + slack:
            raise RatioOutOfRange(k, float(r), h_a, h_b)
        if r <= h_a:
            nodes[k] = iv.a
        elif r >= h_b:
            nodes[k] = iv.b
        else:
            nodes[k] = invert_monotone(h, r, iv.a, iv.b, stop)
    return nodes


@dataclass
class BernsteinOperator:
    basis: BernsteinBasis
    nodes: np.ndarray
    weights: np.ndarray
    f0: object
    f1: object
    coeffs: ExpansionCoeffs
    report: FeasibilityReport = field(repr=False, default=None)

    @property
    def iv(self) -> Interval:
        return self.basis.iv

    def __call__(self, f, x):
        return apply(self, f, x)

    def to_json(self) -> dict:
        spectrum = getattr(self.basis.space, "spectrum", None)
        return {
            "nodes": [float(t) for t in self.nodes],
            "weights": [float(w) for w in self.weights],
            "interval": {"a": self.iv.a, "b": self.iv.b},
            "spectrum": spectrum.to_json() if spectrum is not None else None,
        }


def build_operator(space, iv: Interval, f0, f1, basis: BernsteinBasis | None = None,
                   clamp_tol: float = CLAMP_TOL,
                   expansion_tol: float = EXPANSION_TOL) -> BernsteinOperator:
    """Basis, expansions, feasibility, nodes and weights in one pass.

    Raises :class:`Infeasible` carrying the :class:`FeasibilityReport` when
    the ratio conditions fail.
    """
    space = as_space(space)
    if space.dim < 2:
        raise PreconditionFailed("an operator needs a space of dimension >= 2")
    if basis is None:
        basis = build_bernstein_basis(space, iv)
    coeffs = ExpansionCoeffs(expand_in_basis(f0, basis, expansion_tol),
                             expand_in_basis(f1, basis, expansion_tol))
    report = ratio_check(coeffs, f0, f1, iv, clamp_tol=clamp_tol)
    if not report.feasible:
        raise Infeasible(report)
    nodes = solve_nodes(coeffs, f0, f1, iv, clamp_tol)
    weights = coeffs.beta / f0.deriv(nodes, 0)
    return BernsteinOperator(basis, nodes, weights, f0, f1, coeffs, report)


def apply(op: BernsteinOperator, f, x):
    """(B_n f)(x); ``f`` is any callable accepting an array of nodes."""
    fvals = np.asarray(f(op.nodes), dtype=float)
    return op.basis.eval(x) @ (fvals * op.weights)


@dataclass
class ResidualReport:
    res_f0: float
    res_f1: float
    positive: bool
    min_value: float


def residual_report(op: BernsteinOperator, grid_points: int = 1001,
                    samples: int = 20, seed=0) -> ResidualReport:
    """Sup-norm fixing residuals and a positivity audit on a uniform grid.

    Positivity is probed with max(0, g) for random elements g of the space
    and with narrow hat functions centred at each node, so that a single
    negative weight shows up as a negative output.
    """
    x = op.iv.grid(grid_points)
    r0 = float(np.max(np.abs(apply(op, op.f0, x) - op.f0(x))))
    r1 = float(np.max(np.abs(apply(op, op.f1, x) - op.f1(x))))
    rng = np.random.default_rng(seed)
    space = op.basis.space
    probes = []
    for _ in range(samples):
        c = rng.standard_normal(space.dim)
        probes.append(lambda t, c=c: np.maximum(0.0, space.basis_derivs(t, 0) @ c))
    gaps = np.diff(np.unique(op.nodes))
    width = 0.5 * (gaps.min() if gaps.size else op.iv.length)
    for t0 in np.unique(op.nodes):
        probes.append(lambda t, t0=t0: np.maximum(0.0, 1.0 - np.abs(t - t0) / width))
    lowest = math.inf
    for g in probes:
        out = apply(op, g, x)
        scale = max(np.max(np.abs(out)), 1e-300)
        lowest = min(lowest, float(np.min(out) / scale))
    return ResidualReport(r0, r1, lowest >= -1e-10, lowest)


def apply_csv(op: BernsteinOperator, f, x) -> str:
    x = np.asarray(x, dtype=float)
    bf = apply(op, f, x)
    fx = np.asarray(f(x), dtype=float)
    out = io.StringIO()
    out.write("x,Bf,f\n")
    for row in zip(x, bf, fx):
        out.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return out.getvalue()
