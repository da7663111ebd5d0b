"""The space of derivatives modulo f0 and the coefficient recursions built on it.

D_{f0} U = {(f/f0)' : f in U} has dimension n.  When f0 = c e^{l0 x} it is
again an exponential-polynomial space with the spectrum shifted by -l0 and
one copy of l0 removed; otherwise it is represented by the functions
(b_i/f0)' of the parent basis, with one redundant member dropped.

With Bernstein bases p (of U) and q (of D_{f0} U) one has

    (p_{n,k}/f0)' = c_k q_{n-1,k-1} + d_k q_{n-1,k},

from which beta_{k+1} = -beta_k d_k / c_{k+1} and, with
(f1/f0)' = sum w_k q_{n-1,k}, the recursion
c_{k+1} delta_{k+1} = w_k - delta_k d_k.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .basis import BernsteinBasis, build_bernstein_basis, endpoint_rows
from .errors import DegenerateDenominator, NotInSpectrum, RankDeficiency
from .expspace import (POLY_EXP, ExpSpace, Interval, QuotientDerivative,
                       SpaceElement, Spectrum, _quotient_series)
from .operator import ExpansionCoeffs, expand_in_basis

RANK_TOL = 1e-10
W_ZERO_TOL = 1e-12


def shift_spectrum(spec: Spectrum, lambda0: float) -> Spectrum:
    """Spectrum of D_{f0} E when f0 = e^{lambda0 x}."""
    lambda0 = float(lambda0)
    if spec.multiplicity(lambda0) == 0:
        raise NotInSpectrum(f"{lambda0} is not a real eigenvalue of the spectrum")
    entries = []
    for re, im, m in spec.entries:
        if im == 0.0 and re == lambda0:
            m -= 1
        if m:
            entries.append((re - lambda0, im, m))
    return Spectrum(tuple(entries))


class QuotientFamily:
    """Functions u_i = (b_i/f0)' for the parent basis b_i, one member dropped.

    The dropped member is the one where f0 has its largest coefficient;
    (b_drop/f0)' is then a combination of the others, and the remaining n
    members are independent.
    """

    def __init__(self, parent: ExpSpace, f0: SpaceElement, floor: float = 1e-300):
        self.parent = parent
        self.f0 = f0
        self.floor = floor
        c0 = f0.coeffs
        if not np.any(c0):
            raise RankDeficiency("f0 is the zero function")
        self.drop = int(np.argmax(np.abs(c0)))
        self.members = [i for i in range(parent.dim) if i != self.drop]

    @property
    def dim(self) -> int:
        return len(self.members)

    def basis_derivs(self, x, m: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        fd = [self.parent.basis_derivs(x, k) for k in range(m + 2)]
        gd = [self.f0.deriv(x, k) for k in range(m + 2)]
        return _quotient_series(fd, gd, self.floor)[m + 1][..., self.members]

    def reduce(self, f: SpaceElement) -> SpaceElement:
        """(f/f0)' as an element of this family."""
        c0, c = self.f0.coeffs, f.coeffs
        ratio = c[self.drop] / c0[self.drop]
        return SpaceElement(self, (c - ratio * c0)[self.members])

    def check_rank(self, iv: Interval, tol: float = RANK_TOL):
        n = self.dim
        rows = np.vstack([endpoint_rows(self, iv.a, n), endpoint_rows(self, iv.b, n),
                          self.basis_derivs(iv.grid(4 * n + 4), 0)])
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        s = np.linalg.svd(rows / np.where(norms == 0, 1, norms), compute_uv=False)
        if s[-1] <= tol * s[0]:
            raise RankDeficiency(
                f"quotient family has numerical rank < {n} (s_min/s_max = {s[-1] / s[0]:.3g})"
            )


def pure_exponential(f0: SpaceElement):
    """Return (lambda0, c) if f0 = c e^{lambda0 x} with c > 0, else None."""
    space = f0.space
    if not isinstance(space, ExpSpace):
        return None
    nz = np.flatnonzero(f0.coeffs)
    if len(nz) != 1:
        return None
    fn = space.functions[nz[0]]
    c = f0.coeffs[nz[0]]
    if fn.kind != POLY_EXP or fn.j != 0 or c <= 0:
        return None
    return fn.alpha, c


def _agreement(p: BernsteinBasis, q: BernsteinBasis, num: int = 200) -> float:
    """Worst relative misfit of q_k against the best positive multiple of p_k."""
    x = p.iv.grid(num)
    vp, vq = p.eval(x), q.eval(x)
    worst = 0.0
    for k in range(vp.shape[1]):
        s = (vp[:, k] @ vq[:, k]) / (vp[:, k] @ vp[:, k])
        if s <= 0:
            return math.inf
        err = np.max(np.abs(s * vp[:, k] - vq[:, k])) / np.max(np.abs(vq[:, k]))
        worst = max(worst, float(err))
    return worst


@dataclass
class DerivedSpace:
    parent: ExpSpace
    f0: SpaceElement
    representation: str
    space: object
    basis: BernsteinBasis
    agreement: float | None = None


def derived_space(spec, iv: Interval, f0: SpaceElement,
                  representation: str = "auto", cross_check: bool = True) -> DerivedSpace:
    """D_{f0} U together with its Bernstein basis q_{n-1,k} for {a, b}.

    ``representation`` is ``"shifted"``, ``"quotient"`` or ``"auto"`` (the
    closed form when f0 is a positive pure exponential).  With
    ``cross_check`` both bases are built when possible and the worst
    relative disagreement up to positive scalars is stored in ``agreement``.
    """
    parent = spec if isinstance(spec, ExpSpace) else ExpSpace(spec)
    expo = pure_exponential(f0)
    if representation == "shifted" and expo is None:
        raise ValueError("shifted representation needs f0 = c exp(lambda0 x), c > 0")
    if representation == "auto":
        representation = "shifted" if expo is not None else "quotient"

    def quotient():
        fam = QuotientFamily(parent, f0)
        fam.check_rank(iv)
        return fam, build_bernstein_basis(fam, iv)

    agreement = None
    if representation == "shifted":
        space = ExpSpace(shift_spectrum(parent.spectrum, expo[0]))
        basis = build_bernstein_basis(space, iv)
        if cross_check:
            _, qbasis = quotient()
            agreement = _agreement(basis, qbasis)
    else:
        space, basis = quotient()
        if cross_check and expo is not None:
            sbasis = build_bernstein_basis(ExpSpace(shift_spectrum(parent.spectrum, expo[0])), iv)
            agreement = _agreement(basis, sbasis)
    return DerivedSpace(parent, f0, representation, space, basis, agreement)


def compute_ck_dk(p_basis: BernsteinBasis, q_basis: BernsteinBasis, f0,
                  tol: float = 1e-12):
    """c_1..c_n and d_0..d_{n-1} from endpoint derivatives of p, q and f0."""
    n = p_basis.n
    a, b = p_basis.iv.a, p_basis.iv.b
    f0a, f0b = float(f0.deriv(a, 0)), float(f0.deriv(b, 0))
    c = np.empty(n)
    d = np.empty(n)
    for k in range(1, n + 1):
        qrow = q_basis.space.basis_derivs(a, k - 1)
        den = qrow @ q_basis.coeffs[k - 1]
        _guard(den, qrow, q_basis.coeffs[k - 1], tol, f"q_{k - 1}^({k - 1})(a)")
        c[k - 1] = p_basis.eval(a, k)[k] / (f0a * den)
    for k in range(n):
        qrow = q_basis.space.basis_derivs(b, n - 1 - k)
        den = qrow @ q_basis.coeffs[k]
        _guard(den, qrow, q_basis.coeffs[k], tol, f"q_{k}^({n - 1 - k})(b)")
        d[k] = p_basis.eval(b, n - k)[k] / (f0b * den)
    return c, d


def _guard(den, row, coeffs, tol, what):
    scale = np.linalg.norm(row) * np.linalg.norm(coeffs)
    if abs(den) <= tol * scale:
        raise DegenerateDenominator(f"{what} = {den!r} is numerically zero")


def beta_via_recursion(c, d, f0, p_basis: BernsteinBasis) -> np.ndarray:
    """beta_k = (-1)^k (d_0...d_{k-1})/(c_1...c_k) * f0(a)/p_{n,0}(a)."""
    n = p_basis.n
    a = p_basis.iv.a
    beta = np.empty(n + 1)
    beta[0] = f0.deriv(a, 0) / p_basis.eval(a, 0)[0]
    for k in range(n):
        beta[k + 1] = -beta[k] * d[k] / c[k]
    return beta


def compute_w(f0, f1, q_basis: BernsteinBasis, tol: float = 1e-8) -> np.ndarray:
    """Coefficients of (f1/f0)' in the q-basis."""
    return expand_in_basis(QuotientDerivative(f1, f0), q_basis, tol)


class Sufficiency(enum.Enum):
    ALL_POSITIVE = "AllPositive"
    ALL_NON_NEGATIVE = "AllNonNegative"
    SOME_NEGATIVE = "SomeNegative"


def sufficiency_check(w, tol: float = W_ZERO_TOL) -> Sufficiency:
    w = np.asarray(w, dtype=float)
    scale = np.max(np.abs(w)) if w.size else 0.0
    wn = w / scale if scale > 0 else w
    if np.any(wn < -tol):
        return Sufficiency.SOME_NEGATIVE
    if np.all(wn > tol):
        return Sufficiency.ALL_POSITIVE
    return Sufficiency.ALL_NON_NEGATIVE


@dataclass
class DeltaReport:
    delta: np.ndarray
    Delta: np.ndarray
    endpoints_ok: bool
    signs_ok: bool | None = None
    recursion_residual: float | None = None


def proof_deltas(coeffs: ExpansionCoeffs, f0, f1, iv: Interval,
                 c=None, d=None, w=None, tol: float = 1e-10) -> DeltaReport:
    """delta_k = gamma_k - h(a) beta_k and Delta_k = gamma_k - h(b) beta_k.

    With ``c``, ``d`` and ``w`` supplied, also returns the relative residual
    of c_{k+1} delta_{k+1} = w_k - delta_k d_k (k = 0..n-1, delta_0 taken
    as computed) and, unless some w_k < 0, whether delta >= 0 >= Delta.
    """
    beta, gamma = coeffs.beta, coeffs.gamma
    h_a = float(f1.deriv(iv.a, 0) / f0.deriv(iv.a, 0))
    h_b = float(f1.deriv(iv.b, 0) / f0.deriv(iv.b, 0))
    delta = gamma - h_a * beta
    Delta = gamma - h_b * beta
    scale = max(np.max(np.abs(gamma)), np.max(np.abs(beta)) * max(abs(h_a), abs(h_b)), 1e-300)
    endpoints_ok = abs(delta[0]) <= tol * scale and abs(Delta[-1]) <= tol * scale
    report = DeltaReport(delta, Delta, bool(endpoints_ok))
    if c is None or d is None or w is None:
        return report
    c, d, w = (np.asarray(v, dtype=float) for v in (c, d, w))
    lhs = c * delta[1:]
    rhs = w - delta[:-1] * d
    rscale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
    report.recursion_residual = float(np.max(np.abs(lhs - rhs)) / rscale)
    if sufficiency_check(w) is not Sufficiency.SOME_NEGATIVE:
        stol = tol * scale
        report.signs_ok = bool(np.all(delta >= -stol) and np.all(Delta <= stol))
    return report


@dataclass
class ChainData:
    c: np.ndarray
    d: np.ndarray
    w: np.ndarray
    delta: np.ndarray
    Delta: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    beta_recursion: np.ndarray
    sufficiency: Sufficiency
    derived: DerivedSpace

    def to_json(self) -> dict:
        out = {key: [float(v) for v in getattr(self, key)]
               for key in ("c", "d", "w", "delta", "Delta", "beta", "gamma")}
        out["sufficiency"] = self.sufficiency.value
        return out


def chain_data(p_basis: BernsteinBasis, f0, f1, representation: str = "auto") -> ChainData:
    """All auxiliary scalars for one (basis, f0, f1) configuration."""
    derived = derived_space(p_basis.space, p_basis.iv, f0, representation,
                            cross_check=False)
    q = derived.basis
    c, d = compute_ck_dk(p_basis, q, f0)
    beta = expand_in_basis(f0, p_basis)
    gamma = expand_in_basis(f1, p_basis)
    w = compute_w(f0, f1, q)
    rep = proof_deltas(ExpansionCoeffs(beta, gamma), f0, f1, p_basis.iv, c, d, w)
    return ChainData(c, d, w, rep.delta, rep.Delta, beta, gamma,
                     beta_via_recursion(c, d, f0, p_basis), sufficiency_check(w), derived)
