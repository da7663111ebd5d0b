"""Exponential-polynomial spaces E_(lambda_0, ..., lambda_n).

A space is described by its spectrum, the roots of the characteristic
polynomial of a constant-coefficient ODE together with multiplicities.  All
arithmetic is real: a conjugate pair alpha +/- i*beta contributes the
functions x^j e^{alpha x} cos(beta x) and x^j e^{alpha x} sin(beta x).

Derivatives of every order are evaluated in closed form, never by finite
differences, because the Bernstein construction prescribes high-order zeros
at the interval endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConjugationViolation, DivisionByZero

POLY_EXP = "poly-exp"
POLY_EXP_COS = "poly-exp-cos"
POLY_EXP_SIN = "poly-exp-sin"


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def grid(self, num: int) -> np.ndarray:
        return np.linspace(self.a, self.b, num)

    def chebyshev_points(self, num: int) -> np.ndarray:
        """Chebyshev-Lobatto points, endpoints included, ascending."""
        if num == 1:
            return np.array([0.5 * (self.a + self.b)])
        t = np.cos(np.pi * np.arange(num) / (num - 1))[::-1]
        x = 0.5 * (self.a + self.b) + 0.5 * (self.b - self.a) * t
        x[0], x[-1] = self.a, self.b
        return x


@dataclass(frozen=True)
class Spectrum:
    """Multiset of eigenvalues ``(re, im, mult)``.

    Entries are stored sorted by ``(re, |im|)`` with the positive imaginary
    part first; the dimension of the space is the total multiplicity.
    """

    entries: tuple

    def __post_init__(self):
        clean = []
        for entry in self.entries:
            re, im, mult = entry
            if int(mult) != mult or mult < 1:
                raise ValueError(f"multiplicity must be a positive integer: {entry}")
            clean.append((float(re), float(im), int(mult)))
        clean.sort(key=lambda e: (e[0], abs(e[1]), -e[1]))
        seen = set()
        for re, im, _ in clean:
            if (re, im) in seen:
                raise ValueError(f"duplicate eigenvalue {complex(re, im)}; use mult")
            seen.add((re, im))
        if not clean:
            raise ValueError("empty spectrum")
        object.__setattr__(self, "entries", tuple(clean))

    @classmethod
    def from_values(cls, values: Sequence[complex]) -> "Spectrum":
        """Build from a flat list of eigenvalues; repeats become multiplicity."""
        counts: dict = {}
        for v in values:
            v = complex(v)
            counts[(v.real, v.imag)] = counts.get((v.real, v.imag), 0) + 1
        return cls(tuple((re, im, m) for (re, im), m in counts.items()))

    @classmethod
    def from_json(cls, data: dict) -> "Spectrum":
        return cls(tuple(
            (e.get("re", 0.0), e.get("im", 0.0), e.get("mult", 1))
            for e in data["eigenvalues"]
        ))

    def to_json(self) -> dict:
        return {"eigenvalues": [
            {"re": re, "im": im, "mult": m} for re, im, m in self.entries
        ]}

    @property
    def dim(self) -> int:
        return sum(m for _, _, m in self.entries)

    @property
    def n(self) -> int:
        return self.dim - 1

    def multiplicity(self, value: complex) -> int:
        value = complex(value)
        for re, im, m in self.entries:
            if re == value.real and im == value.imag:
                return m
        return 0


@dataclass(frozen=True)
class RealBasisFunction:
    """One of x^j e^{alpha x}, x^j e^{alpha x} cos(beta x), x^j e^{alpha x} sin(beta x)."""

    kind: str
    j: int
    alpha: float
    beta: float = 0.0

    def derivative(self, x, m: int = 0):
        x = np.asarray(x, dtype=float)
        lam = complex(self.alpha, self.beta)
        # Leibniz on x^j * e^{lam x}; real/imag parts give cos/sin
        poly = np.zeros(x.shape, dtype=complex)
        for i in range(min(m, self.j) + 1):
            coef = math.comb(m, i) * math.perm(self.j, i) * lam ** (m - i)
            if coef != 0:
                poly = poly + coef * x ** (self.j - i)
        val = poly * np.exp(lam * x)
        if self.kind == POLY_EXP_SIN:
            return val.imag
        return val.real

    def label(self) -> str:
        parts = []
        if self.j:
            parts.append("x" if self.j == 1 else f"x^{self.j}")
        if self.alpha:
            parts.append(f"exp({self.alpha:g}x)")
        if self.kind == POLY_EXP_COS:
            parts.append(f"cos({self.beta:g}x)")
        elif self.kind == POLY_EXP_SIN:
            parts.append(f"sin({self.beta:g}x)")
        return "*".join(parts) or "1"


def build_space(spec: Spectrum) -> list[RealBasisFunction]:
    """Canonical real basis of E_spec.

    Order: spectrum entries as sorted in ``Spectrum``; within an entry ``j``
    ascending; within a conjugate pair cos before sin for each ``j``.
    """
    funcs = []
    for re, im, mult in spec.entries:
        if im == 0.0:
            funcs.extend(RealBasisFunction(POLY_EXP, j, re) for j in range(mult))
            continue
        if spec.multiplicity(complex(re, -im)) != mult:
            raise ConjugationViolation(
                f"eigenvalue {complex(re, im)} (mult {mult}) lacks its conjugate"
            )
        if im < 0:
            continue
        for j in range(mult):
            funcs.append(RealBasisFunction(POLY_EXP_COS, j, re, im))
            funcs.append(RealBasisFunction(POLY_EXP_SIN, j, re, im))
    return funcs


class ExpSpace:
    """The space E_spec together with its canonical real basis."""

    def __init__(self, spectrum: Spectrum):
        self.spectrum = spectrum
        self.functions = build_space(spectrum)

    @property
    def dim(self) -> int:
        return len(self.functions)

    def basis_derivs(self, x, m: int = 0) -> np.ndarray:
        """m-th derivatives of all basis functions, shape ``x.shape + (dim,)``."""
        x = np.asarray(x, dtype=float)
        return np.stack([f.derivative(x, m) for f in self.functions], axis=-1)

    def element(self, coeffs) -> "SpaceElement":
        return SpaceElement(self, np.asarray(coeffs, dtype=float))

    def member(self, kind: str, j: int, alpha: float, beta: float = 0.0) -> "SpaceElement":
        """The canonical basis function with the given parameters, as an element."""
        target = RealBasisFunction(kind, j, float(alpha), float(beta))
        coeffs = np.zeros(self.dim)
        for i, f in enumerate(self.functions):
            if f == target:
                coeffs[i] = 1.0
                return SpaceElement(self, coeffs)
        raise KeyError(f"{target.label()} is not a member of this space")

    def __eq__(self, other):
        return isinstance(other, ExpSpace) and other.spectrum == self.spectrum

    def __hash__(self):
        return hash(self.spectrum)

    def __repr__(self):
        return f"ExpSpace<{', '.join(f.label() for f in self.functions)}>"


@dataclass(frozen=True, eq=False)
class SpaceElement:
    """A function sum_i coeffs[i] * basis_i of ``space``.

    ``space`` is any object exposing ``dim`` and ``basis_derivs(x, m)``; in
    practice an :class:`ExpSpace` or a derived quotient family.
    """

    space: object
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.space.dim,):
            raise ValueError(f"expected {self.space.dim} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def deriv(self, x, m: int = 0):
        return self.space.basis_derivs(x, m) @ self.coeffs

    def __call__(self, x):
        return self.deriv(x, 0)

    def _check(self, other):
        if other.space != self.space:
            raise ValueError("elements belong to different spaces")

    def __add__(self, other):
        self._check(other)
        return SpaceElement(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SpaceElement(self.space, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpaceElement(self.space, float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return SpaceElement(self.space, -self.coeffs)


def deriv_eval(f, x, m: int = 0):
    """f^{(m)}(x) for a space element (vectorised over ``x``)."""
    if m < 0:
        raise ValueError("derivative order must be non-negative")
    return f.deriv(x, m)


def _quotient_series(fd, gd, floor):
    """Orders 0..m of (f/g)^{(k)} from the derivative lists of f and g.

    ``fd[k]`` may carry a trailing member axis that ``gd[k]`` lacks.
    """
    g0 = gd[0]
    if np.any(np.abs(g0) < floor):
        raise DivisionByZero("denominator vanishes")
    extra = np.ndim(fd[0]) - np.ndim(g0)
    gd = [np.reshape(g, np.shape(g) + (1,) * extra) for g in gd]
    r = []
    for k in range(len(fd)):
        acc = fd[k]
        for j in range(1, k + 1):
            acc = acc - math.comb(k, j) * gd[j] * r[k - j]
        r.append(acc / gd[0])
    return r


def quotient_deriv(f, g, x, m: int = 0, floor: float = 1e-300):
    """(f/g)^{(m)}(x) via Leibniz on f = g * (f/g)."""
    if m < 0:
        raise ValueError("derivative order must be non-negative")
    x = np.asarray(x, dtype=float)
    fd = [f.deriv(x, k) for k in range(m + 1)]
    gd = [g.deriv(x, k) for k in range(m + 1)]
    return _quotient_series(fd, gd, floor)[m]


class QuotientDerivative:
    """The function (f/g)', with derivatives through :func:`quotient_deriv`."""

    def __init__(self, f, g, floor: float = 1e-300):
        self.f, self.g, self.floor = f, g, floor

    def deriv(self, x, m: int = 0):
        return quotient_deriv(self.f, self.g, x, m + 1, self.floor)

    def __call__(self, x):
        return self.deriv(x, 0)


def mn_bound(spec: Spectrum) -> float:
    """pi / max|Im lambda|, the sufficient interval length for the ECT property."""
    mn = max(abs(im) for _, im, _ in spec.entries)
    return math.inf if mn == 0 else math.pi / mn


@dataclass
class EctReport:
    ok: bool
    n: int
    max_zeros: int
    trials: int
    witness: np.ndarray | None = None

    def __bool__(self):
        return self.ok


def count_zeros(values: np.ndarray, rel_tol: float = 1e-9) -> int:
    """Heuristic zero count of a sampled function, with multiplicity guesses.

    Strict sign changes count once; a run of near-zero samples counts once if
    the sign flips across it and twice (a touching zero) otherwise; a run at
    either end of the grid counts once.  A near-tangency without a sampled
    zero is a local minimum of |f| under the tolerance and counts twice.
    """
    v = np.asarray(values, dtype=float)
    scale = np.max(np.abs(v))
    if scale == 0.0:
        return len(v)
    tol = rel_tol * scale
    s = np.where(np.abs(v) <= tol, 0, np.sign(v)).astype(int)
    zeros = 0
    i, n = 0, len(s)
    prev_sign = 0
    while i < n:
        if s[i] == 0:
            j = i
            while j < n and s[j] == 0:
                j += 1
            left = prev_sign
            right = s[j] if j < n else 0
            if left == 0 or right == 0 or left != right:
                zeros += 1
            else:
                zeros += 2
            prev_sign = right
            i = j
            continue
        if prev_sign and s[i] != prev_sign:
            zeros += 1
        prev_sign = s[i]
        i += 1
    a = np.abs(v)
    interior = (a[1:-1] < a[:-2]) & (a[1:-1] < a[2:]) & (a[1:-1] > tol)
    close = a[1:-1] < 1e3 * tol
    same = s[:-2] == s[2:]
    zeros += 2 * int(np.count_nonzero(interior & close & same))
    return zeros


def verify_ect_heuristic(spec: Spectrum, iv: Interval, trials: int = 1000,
                         grid: int | None = None, seed=None) -> EctReport:
    """Randomised check that no element has more than n zeros on ``iv``.

    A ``True`` result is evidence, not proof.  On failure the report carries
    a witness coefficient vector.  The canonical basis functions are always
    tried in addition to ``trials`` random unit vectors.
    """
    space = ExpSpace(spec)
    n = space.dim - 1
    grid = grid or max(2000, 10 * (n + 1))
    if trials < 1 or grid < 10 * (n + 1):
        raise ValueError("need trials >= 1 and grid >= 10(n+1)")
    x = iv.grid(grid)
    vals = space.basis_derivs(x, 0)
    rng = np.random.default_rng(seed)
    cand = rng.standard_normal((trials, space.dim))
    cand /= np.linalg.norm(cand, axis=1, keepdims=True)
    cand = np.vstack([np.eye(space.dim), cand])
    worst, witness = 0, None
    for c in cand:
        z = count_zeros(vals @ c)
        if z > worst:
            worst, witness = z, c
    ok = worst <= n
    return EctReport(ok, n, worst, trials, None if ok else witness)
