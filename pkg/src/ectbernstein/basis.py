"""Bernstein bases for {a, b} by confluent endpoint collocation.

p_{n,k} is the (unique up to scale) element with a zero of order k at a and
a zero of order n-k at b.  Its coefficient vector spans the nullspace of the
n x (n+1) matrix of endpoint derivative conditions.  Each p_{n,k} is scaled
so that p_{n,k}^{(k)}(a) = k!, which makes it positive just right of a and
reproduces x^k (1-x)^(n-k) for polynomials on [0, 1].
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeWarning, IllConditioned, NotChebyshevAtEndpoints
from .expspace import ExpSpace, Interval, SpaceElement, Spectrum

RANK_TOL = 1e-10
RESIDUAL_TOL = 1e-8
SOFT_DEGREE_CAP = 12
HARD_DEGREE_CAP = 20
LOCAL_WINDOW = 0.05


def as_space(space):
    if isinstance(space, Spectrum):
        return ExpSpace(space)
    return space


def endpoint_rows(space, x: float, count: int) -> np.ndarray:
    """Derivatives of orders 0..count-1 of every basis function at ``x``."""
    if count == 0:
        return np.zeros((0, space.dim))
    return np.array([space.basis_derivs(x, j) for j in range(count)])


def collocation_matrix(space, iv: Interval, k: int) -> np.ndarray:
    space = as_space(space)
    n = space.dim - 1
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}]")
    return np.vstack([endpoint_rows(space, iv.a, k),
                      endpoint_rows(space, iv.b, n - k)])


def _cosine(row, v) -> float:
    denom = np.linalg.norm(row) * np.linalg.norm(v)
    return 0.0 if denom == 0 else abs(row @ v) / denom


def _null_vector(mat: np.ndarray, rank_tol: float, rng) -> np.ndarray:
    rows, cols = mat.shape
    if rows == 0:
        return np.ones(cols)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    scaled = mat / np.where(norms == 0, 1.0, norms)
    if rng is not None:
        # an orthogonal mixing of the rows leaves the nullspace unchanged
        q, _ = np.linalg.qr(rng.standard_normal((rows, rows)))
        scaled = q @ scaled
    _, s, vt = np.linalg.svd(scaled)
    rank = int(np.count_nonzero(s > rank_tol * s[0])) if s[0] > 0 else 0
    if rank != rows:
        raise NotChebyshevAtEndpoints(
            f"collocation matrix has nullspace dimension {cols - rank}, expected 1"
        )
    return vt[-1]


@dataclass
class BernsteinBasis:
    """p_{n,0..n} as rows of ``coeffs`` over the canonical basis of ``space``.

    ``normalization[k]`` records p_{n,k}^{(k)}(a); it is k! unless the basis
    has been rescaled.
    """

    space: object
    iv: Interval
    coeffs: np.ndarray
    normalization: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def functions(self) -> list[SpaceElement]:
        return [SpaceElement(self.space, c) for c in self.coeffs]

    def __getitem__(self, k) -> SpaceElement:
        return SpaceElement(self.space, self.coeffs[k])

    def eval(self, x, m: int = 0) -> np.ndarray:
        """p_{n,k}^{(m)}(x) for all k, shape ``x.shape + (n+1,)``."""
        return self.space.basis_derivs(x, m) @ self.coeffs.T

    def rescaled(self, scales) -> "BernsteinBasis":
        s = np.asarray(scales, dtype=float)
        return BernsteinBasis(self.space, self.iv, self.coeffs * s[:, None],
                              self.normalization * s, list(self.warnings))

    def to_csv(self, x) -> str:
        x = np.asarray(x, dtype=float)
        vals = self.eval(x)
        out = io.StringIO()
        out.write("x," + ",".join(f"p_{k}" for k in range(self.n + 1)) + "\n")
        for xi, row in zip(x, vals):
            out.write(",".join(f"{v:.17g}" for v in (xi, *row)) + "\n")
        return out.getvalue()


def build_bernstein_basis(space, iv: Interval, rank_tol: float = RANK_TOL,
                          residual_tol: float = RESIDUAL_TOL,
                          seed=None) -> BernsteinBasis:
    """Construct the Bernstein basis of ``space`` for {iv.a, iv.b}.

    ``seed`` randomises the row mixing ahead of the SVD; the result is the
    same basis for every seed up to round-off.
    """
    space = as_space(space)
    n = space.dim - 1
    if n > HARD_DEGREE_CAP:
        raise ValueError(f"n = {n} exceeds the hard cap {HARD_DEGREE_CAP}")
    notes = []
    if n > SOFT_DEGREE_CAP:
        msg = f"n = {n} > {SOFT_DEGREE_CAP}: collocation is badly conditioned"
        warnings.warn(msg, DegreeWarning, stacklevel=2)
        notes.append(msg)
    rng = None if seed is None else np.random.default_rng(seed)
    rows_a = endpoint_rows(space, iv.a, n + 1)
    rows_b = endpoint_rows(space, iv.b, n + 1)
    coeffs = np.empty((n + 1, n + 1))
    for k in range(n + 1):
        mat = np.vstack([rows_a[:k], rows_b[:n - k]])
        v = _null_vector(mat, rank_tol, rng)
        if _cosine(rows_a[k], v) < rank_tol or _cosine(rows_b[n - k], v) < rank_tol:
            raise NotChebyshevAtEndpoints(
                f"p_{n},{k} has a zero of excess order at an endpoint"
            )
        v = v * (math.factorial(k) / (rows_a[k] @ v))
        if mat.shape[0]:
            scale = np.linalg.norm(mat, axis=1).max() * np.linalg.norm(v)
            resid = np.abs(mat @ v).max() / scale
            if resid > residual_tol:
                msg = f"p_{n},{k}: collocation residual {resid:.3g}"
                warnings.warn(msg, IllConditioned, stacklevel=2)
                notes.append(msg)
        coeffs[k] = v
    norm = np.array([float(math.factorial(k)) for k in range(n + 1)])
    return BernsteinBasis(space, iv, coeffs, norm, notes)


def verify_zero_orders(basis: BernsteinBasis, tol: float = RESIDUAL_TOL):
    """Check zero orders, normalization, and non-vanishing leading derivatives.

    Residuals are normalised as |row . c| / (|row| |c|).  Returns
    ``(ok, worst_residual)``.
    """
    n = basis.n
    rows_a = endpoint_rows(basis.space, basis.iv.a, n + 1)
    rows_b = endpoint_rows(basis.space, basis.iv.b, n + 1)
    worst = 0.0
    ok = True
    for k, c in enumerate(basis.coeffs):
        for j in range(k):
            worst = max(worst, _cosine(rows_a[j], c))
        for j in range(n - k):
            worst = max(worst, _cosine(rows_b[j], c))
        lead = rows_a[k] @ c
        worst = max(worst, abs(lead - basis.normalization[k]) / abs(basis.normalization[k]))
        if _cosine(rows_b[n - k], c) < tol:
            ok = False
    return bool(ok and worst <= tol), float(worst)


@dataclass
class NonNegReport:
    global_ok: np.ndarray
    local_a: np.ndarray
    local_b: np.ndarray
    min_value: np.ndarray
    argmin: np.ndarray

    @property
    def all_global(self) -> bool:
        return bool(np.all(self.global_ok))

    @property
    def all_local(self) -> bool:
        return bool(np.all(self.local_a & self.local_b))


def verify_nonneg(basis: BernsteinBasis, grid_points: int | None = None,
                  tol: float = 1e-10) -> NonNegReport:
    """Sample each p_{n,k} on a uniform grid plus clustered endpoint windows.

    The endpoint windows cover 5% of the interval at each end.  A value counts
    as negative when below ``-tol`` times the max |p_{n,k}| on the samples.
    """
    n = basis.n
    grid_points = grid_points or max(1000, 50 * (n + 1))
    if grid_points < 50 * (n + 1):
        raise ValueError("grid_points must be at least 50(n+1)")
    a, b = basis.iv.a, basis.iv.b
    w = LOCAL_WINDOW * (b - a)
    m = max(200, grid_points // 5)
    cluster = w * (1.0 - np.cos(np.linspace(0.0, 0.5 * np.pi, m)))
    near_a = a + cluster
    near_b = b - cluster
    uniform = basis.iv.grid(grid_points)
    x = np.concatenate([uniform, near_a, near_b])
    vals = basis.eval(x)
    scale = np.max(np.abs(vals), axis=0)
    floor = -tol * np.where(scale == 0, 1.0, scale)
    in_a = (x - a) <= w
    in_b = (b - x) <= w
    global_ok = np.all(vals >= floor, axis=0)
    local_a = np.all(vals[in_a] >= floor, axis=0)
    local_b = np.all(vals[in_b] >= floor, axis=0)
    idx = np.argmin(vals, axis=0)
    return NonNegReport(global_ok, local_a, local_b,
                        vals[idx, np.arange(n + 1)], x[idx])
