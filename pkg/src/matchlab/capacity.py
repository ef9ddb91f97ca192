"""Positive hyperbolic polynomials and their capacity.

``Cap p = inf { p(x) : x > 0, x_1 ... x_n = 1 }``.  In log coordinates
``y = log x`` the objective ``log p(exp y)`` is a log-sum-exp of affine
functions, hence convex, and the constraint is the hyperplane ``sum y = 0``.

The upper end of the returned bracket is an attained value.  The lower end
is a geometric-programming dual certificate: for any probability vector
``w`` on the monomials with mean exponent ``(m/n, ..., m/n)``, weighted
AM-GM gives ``p(x) >= prod (c_a / w_a)^{w_a}`` on the constraint set.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from .errors import DomainError
from .matching import perm_k

Monomials = dict[tuple[int, ...], object]


# --- sparse polynomial arithmetic ----------------------------------------


def poly_mul(p: Monomials, q: Monomials) -> Monomials:
    out: Monomials = {}
    for a, ca in p.items():
        for b, cb in q.items():
            e = tuple(x + y for x, y in zip(a, b))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


def poly_add(p: Monomials, q: Monomials) -> Monomials:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c}


def linear_form(coeffs: Sequence) -> Monomials:
    n = len(coeffs)
    return {tuple(int(i == j) for i in range(n)): c for j, c in enumerate(coeffs) if c}


# --- structured polynomials ------------------------------------------------


class StructuredPolynomial:
    """Common interface: ``nvars``, ``degree``, ``evaluate`` and ``expand``."""

    nvars: int
    degree: int
    hyperbolic: bool = True

    def evaluate(self, x: Sequence) -> Fraction:
        raise NotImplementedError

    def expand(self) -> Monomials:
        raise NotImplementedError

    def _check_point(self, x: Sequence) -> list:
        if len(x) != self.nvars:
            raise DomainError(f"point has {len(x)} coordinates, polynomial has {self.nvars} variables")
        if any(v <= 0 for v in x):
            raise DomainError("evaluation point must be strictly positive")
        return [v if isinstance(v, float) else Fraction(v) for v in x]

    def __mul__(self, other: StructuredPolynomial) -> Product:
        return Product([self, other])


def _elementary(values: Sequence, k: int):
    """``e_k`` of a list of numbers (or of polynomials, via the same recursion)."""
    e = [1] + [0] * k
    for v in values:
        for j in range(k, 0, -1):
            e[j] = e[j] + e[j - 1] * v
    return e[k]


def expand_elementary(rows: Sequence[Sequence], k: int, nvars: int) -> Monomials:
    """Monomials of ``e_k`` applied to the linear forms given by ``rows``."""
    e: list[Monomials] = [{(0,) * nvars: 1}] + [{} for _ in range(k)]
    for row in rows:
        lin = linear_form(row)
        for j in range(k, 0, -1):
            e[j] = poly_add(e[j], poly_mul(e[j - 1], lin))
    return e[k]


class ElementaryOnRows(StructuredPolynomial):
    """``p_{k,A}(x) = e_k((Ax)_1, ..., (Ax)_m)`` for nonnegative A without zero rows."""

    def __init__(self, a: Sequence[Sequence], k: int):
        rows = [list(r) for r in a]
        if not rows or not rows[0]:
            raise DomainError("matrix must be nonempty")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DomainError("ragged matrix")
        if any(v < 0 for r in rows for v in r):
            raise DomainError("matrix must be nonnegative")
        if any(not any(r) for r in rows):
            raise DomainError("matrix has a zero row")
        if not 0 <= k <= len(rows):
            raise DomainError(f"k={k} outside 0..{len(rows)}")
        self.a = rows
        self.k = k
        self.nvars = width
        self.degree = k

    def evaluate(self, x):
        x = self._check_point(x)
        ax = [sum(aij * xj for aij, xj in zip(row, x)) for row in self.a]
        return _elementary(ax, self.k)

    def expand(self) -> Monomials:
        return expand_elementary(self.a, self.k, self.nvars)

    def partial_at_zero(self, x, i: int):
        """``dp/dx_i`` evaluated with ``x_i = 0``; ``x`` gives the other coordinates."""
        full = list(x[:i]) + [0] + list(x[i:])
        ax = [sum(aij * xj for aij, xj in zip(row, full)) for row in self.a]
        return sum(row[i] * _elementary(ax[:j] + ax[j + 1:], self.k - 1) for j, row in enumerate(self.a))


class QuadraticForm(StructuredPolynomial):
    """``x^T B x``; hyperbolic iff B (nonnegative, symmetric) has one positive eigenvalue."""

    def __init__(self, b: Sequence[Sequence], tol: float = 1e-9):
        rows = [list(r) for r in b]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise DomainError("quadratic form needs a square matrix")
        if any(rows[i][j] != rows[j][i] for i in range(n) for j in range(n)):
            raise DomainError("quadratic form needs a symmetric matrix")
        self.b = rows
        self.nvars = n
        self.degree = 2
        nonneg = all(v >= 0 for r in rows for v in r)
        self.hyperbolic = nonneg and count_positive_eigenvalues(rows, tol) == 1

    def evaluate(self, x):
        x = self._check_point(x)
        return sum(self.b[i][j] * x[i] * x[j] for i in range(self.nvars) for j in range(self.nvars))

    def expand(self) -> Monomials:
        out: Monomials = {}
        n = self.nvars
        for i in range(n):
            for j in range(n):
                if self.b[i][j]:
                    e = [0] * n
                    e[i] += 1
                    e[j] += 1
                    out[tuple(e)] = out.get(tuple(e), 0) + self.b[i][j]
        return out


class Product(StructuredPolynomial):
    def __init__(self, factors: Sequence[StructuredPolynomial]):
        if not factors:
            raise DomainError("empty product")
        widths = {f.nvars for f in factors}
        if len(widths) != 1:
            raise DomainError("factors have different numbers of variables")
        self.factors = list(factors)
        self.nvars = widths.pop()
        self.degree = sum(f.degree for f in factors)
        self.hyperbolic = all(f.hyperbolic for f in factors)

    def evaluate(self, x):
        out = 1
        for f in self.factors:
            out *= f.evaluate(x)
        return out

    def expand(self) -> Monomials:
        out: Monomials = {(0,) * self.nvars: 1}
        for f in self.factors:
            out = poly_mul(out, f.expand())
        return out


class Expanded(StructuredPolynomial):
    """A polynomial given by its monomials (used for derivatives)."""

    def __init__(self, monomials: Monomials, nvars: int, hyperbolic: bool = True):
        self.monomials = {e: c for e, c in monomials.items() if c}
        self.nvars = nvars
        degrees = {sum(e) for e in self.monomials}
        self.degree = max(degrees) if degrees else 0
        self.homogeneous = len(degrees) <= 1
        self.hyperbolic = hyperbolic

    def evaluate(self, x):
        x = self._check_point(x)
        total = 0
        for e, c in self.monomials.items():
            term = c
            for xi, ei in zip(x, e):
                term *= xi**ei
            total += term
        return total

    def expand(self) -> Monomials:
        return dict(self.monomials)


def sum_power(n: int, power: int) -> StructuredPolynomial:
    """``(x_1 + ... + x_n)^power``."""
    return ElementaryOnRows([[1] * n for _ in range(power)], power) if power else Expanded({(0,) * n: 1}, n)


def mixed_polynomial(a: Sequence[Sequence], k: int) -> Product:
    """``(x_1 + ... + x_n)^{n-k} p_{k,A}``."""
    n = len(a)
    return Product([sum_power(n, n - k), ElementaryOnRows(a, k)])


def partial_at_zero(poly: StructuredPolynomial, i: int) -> Expanded:
    """``dp/dx_i`` with ``x_i = 0``, as a polynomial in the remaining variables."""
    out: Monomials = {}
    for e, c in poly.expand().items():
        if e[i] == 1:
            rest = e[:i] + e[i + 1:]
            out[rest] = out.get(rest, 0) + c
    return Expanded(out, poly.nvars - 1, poly.hyperbolic)


def degree_in(poly: StructuredPolynomial, i: int) -> int:
    return max((e[i] for e in poly.expand()), default=0)


def count_positive_eigenvalues(b: Sequence[Sequence], tol: float = 1e-9) -> int:
    """Eigenvalues above ``tol * spectral radius`` of a symmetric matrix."""
    m = np.array([[float(v) for v in row] for row in b])
    if not np.allclose(m, m.T, atol=0):
        raise DomainError("matrix must be symmetric")
    ev = np.linalg.eigvalsh(m)
    radius = float(np.max(np.abs(ev))) if ev.size else 0.0
    return int(np.sum(ev > tol * radius)) if radius > 0 else 0


# --- capacity ------------------------------------------------------------------


@dataclass
class CapacityResult:
    lower: float
    upper: float
    iterations: int
    converged: bool
    point: np.ndarray = field(repr=False)
    message: str = ""

    @property
    def value(self) -> float:
        return math.sqrt(self.lower * self.upper) if self.lower > 0 else self.upper

    def csv(self) -> str:
        return f"value_lower,value_upper,iterations\n{self.lower!r},{self.upper!r},{self.iterations}\n"


def _log_terms(poly: StructuredPolynomial):
    mons = poly.expand()
    if not mons:
        raise DomainError("zero polynomial")
    exps = np.array(list(mons.keys()), dtype=float).reshape(len(mons), poly.nvars)
    coeffs = np.array([float(c) for c in mons.values()])
    if np.any(coeffs < 0):
        raise DomainError("capacity needs nonnegative coefficients")
    degrees = exps.sum(axis=1)
    if not np.all(degrees == degrees[0]):
        raise DomainError("capacity needs a homogeneous polynomial")
    return exps, np.log(coeffs), int(degrees[0])


def dual_lower_bound(exps: np.ndarray, logc: np.ndarray, weights: np.ndarray) -> float:
    """Log of the AM-GM certificate after projecting ``weights`` onto the barycenter constraint.

    Returns ``-inf`` when the barycenter is outside the Newton polytope
    (capacity zero).
    """
    n_mon, n = exps.shape
    m = exps[0].sum()
    target = np.full(n, m / n)
    # variables: w (n_mon), t (n_mon) with t >= |w - weights|
    c = np.concatenate([np.zeros(n_mon), np.ones(n_mon)])
    a_eq = np.hstack([np.vstack([exps.T, np.ones((1, n_mon))]), np.zeros((n + 1, n_mon))])
    b_eq = np.concatenate([target, [1.0]])
    eye = np.eye(n_mon)
    a_ub = np.vstack([np.hstack([eye, -eye]), np.hstack([-eye, -eye])])
    b_ub = np.concatenate([weights, -weights])
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, None)] * (2 * n_mon), method="highs")
    if res.status != 0:
        return -math.inf
    w = np.clip(res.x[:n_mon], 0, None)
    w /= w.sum()
    keep = w > 0
    return float(np.sum(w[keep] * (logc[keep] - np.log(w[keep]))))


def capacity(
    poly: StructuredPolynomial,
    tol: float = 1e-8,
    *,
    max_iter: int = 20000,
    start: Sequence[float] | None = None,
) -> CapacityResult:
    """Capacity with a bracket ``[lower, upper]``, ``upper / lower <= 1 + tol`` on success.

    Projected gradient descent on ``sum y = 0`` with Barzilai-Borwein steps
    and Armijo backtracking.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    exps, logc, m = _log_terms(poly)
    n = poly.nvars
    if m < 1:
        raise DomainError("capacity needs degree >= 1")
    if not poly.hyperbolic:
        raise DomainError("polynomial is not marked positive hyperbolic")

    def f_and_grad(y):
        z = logc + exps @ y
        lse = logsumexp(z)
        w = np.exp(z - lse)
        g = exps.T @ w
        return lse, g - g.mean(), w

    if dual_lower_bound(exps, logc, np.full(len(logc), 1.0 / len(logc))) == -math.inf:
        # barycenter outside the Newton polytope: the infimum is exactly 0
        return CapacityResult(0.0, 0.0, 0, True, np.ones(n), "zero capacity")
    y = np.zeros(n) if start is None else np.asarray(start, dtype=float) - np.mean(start)
    fy, gy, wy = f_and_grad(y)
    best_upper = fy
    lower = -math.inf
    step = 1.0
    y_prev = g_prev = None
    it = 0
    converged = False
    gap_target = math.log1p(tol)
    while it < max_iter:
        gnorm = float(np.linalg.norm(gy))
        if gnorm < 1e-7 or it % 25 == 0:
            lower = max(lower, dual_lower_bound(exps, logc, wy))
            if best_upper - lower <= gap_target:
                converged = True
                break
        if gnorm == 0.0:
            break
        if y_prev is not None:
            s, d = y - y_prev, gy - g_prev
            sd = float(s @ d)
            if sd > 0:
                step = float(s @ s) / sd
        t = step
        while True:
            y_new = y - t * gy
            f_new, g_new, w_new = f_and_grad(y_new)
            if f_new <= fy - 1e-4 * t * gnorm**2 or t < 1e-16:
                break
            t *= 0.5
        y_prev, g_prev = y, gy
        y, fy, gy, wy = y_new, f_new, g_new, w_new
        best_upper = min(best_upper, fy)
        it += 1
        if t < 1e-16:
            break
    if not converged:
        lower = max(lower, dual_lower_bound(exps, logc, wy))
        converged = best_upper - lower <= gap_target
    msg = "" if converged else f"bracket ratio {math.exp(best_upper - lower):.3e} after {it} iterations"
    # float rounding in the certificate can overshoot the attained value by an ulp or so
    lower = min(lower, best_upper)
    with np.errstate(over="ignore"):
        point = np.exp(y)
    return CapacityResult(math.exp(lower), math.exp(best_upper), it, converged, point, msg)


# --- lemma checks -----------------------------------------------------------------


@dataclass(frozen=True)
class StepVerdict:
    holds: bool
    coordinate: int
    degree_in_coordinate: int
    factor: float
    cap_p: tuple[float, float]
    cap_derivative: tuple[float, float] | None
    ratio: float | None
    zero_derivative: bool = False


def check_capacity_step(poly: StructuredPolynomial, i: int, tol: float = 1e-6) -> StepVerdict:
    """``Cap(dp/dx_i |_{x_i=0}) >= ((d-1)/d)^{d-1} Cap p`` with ``d = deg_i p``."""
    n = poly.nvars
    if poly.degree != n or n < 2:
        raise DomainError("the capacity-step inequality needs degree = number of variables >= 2")
    if not 0 <= i < n:
        raise DomainError(f"coordinate {i} outside 0..{n - 1}")
    d = degree_in(poly, i)
    factor = 1.0 if d <= 1 else ((d - 1) / d) ** (d - 1)
    cap_p = capacity(poly, tol * 1e-2)
    q = partial_at_zero(poly, i)
    if not q.monomials:
        return StepVerdict(True, i, d, factor, (cap_p.lower, cap_p.upper), None, None, True)
    cap_q = capacity(q, tol * 1e-2)
    holds = cap_q.upper >= factor * cap_p.lower * (1 - tol)
    ratio = cap_q.value / (factor * cap_p.value) if cap_p.value > 0 else math.inf
    return StepVerdict(holds, i, d, factor, (cap_p.lower, cap_p.upper), (cap_q.lower, cap_q.upper), ratio)


@dataclass(frozen=True)
class MixedDerivativeVerdict:
    holds: bool
    derivative: Fraction
    expected: Fraction


def mixed_derivative_identity_check(a: Sequence[Sequence], k: int) -> MixedDerivativeVerdict:
    """Coefficient of ``x_1 ... x_n`` in ``(sum x)^{n-k} p_{k,A}`` versus ``(n-k)! perm_k A``."""
    rows = [[Fraction(v) for v in r] for r in a]
    n = len(rows)
    if n > 6:
        raise DomainError("mixed-derivative check is limited to n <= 6")
    if not 1 <= k <= n:
        raise DomainError(f"k={k} outside 1..{n}")
    if any(len(r) != n or any(v < 0 for v in r) for r in rows):
        raise DomainError("need a square nonnegative matrix")
    # expanded directly so that zero rows (allowed here) need no special case
    mons = poly_mul(sum_power(n, n - k).expand(), expand_elementary(rows, k, n))
    lhs = Fraction(mons.get((1,) * n, 0))
    rhs = math.factorial(n - k) * perm_k(rows, k)
    return MixedDerivativeVerdict(lhs == rhs, lhs, rhs)


# --- doubly stochastic instances ----------------------------------------------


def sinkhorn_balance(m: np.ndarray, tol: float = 1e-12, max_iter: int = 100000):
    """Scale a positive matrix to doubly stochastic: ``A = D1 M D2``.

    Returns ``(A, d1, d2, residual)`` where residual is the largest
    row/column-sum deviation from 1.
    """
    m = np.asarray(m, dtype=float)
    if np.any(m <= 0):
        raise DomainError("Sinkhorn balancing here needs a strictly positive matrix")
    d1 = np.ones(m.shape[0])
    d2 = np.ones(m.shape[1])
    resid = math.inf
    for _ in range(max_iter):
        d1 = 1.0 / (m @ d2)
        d2 = 1.0 / (m.T @ d1)
        a = d1[:, None] * m * d2[None, :]
        resid = max(np.max(np.abs(a.sum(axis=1) - 1)), np.max(np.abs(a.sum(axis=0) - 1)))
        if resid < tol:
            break
    return a, d1, d2, float(resid)


def random_doubly_stochastic(n: int, rng: np.random.Generator, tol: float = 1e-12) -> np.ndarray:
    raw = rng.uniform(0.05, 1.0, size=(n, n))
    raw /= raw.sum(axis=1, keepdims=True)
    a, _, _, resid = sinkhorn_balance(raw, tol)
    if resid >= tol:
        raise RuntimeError(f"Sinkhorn did not reach residual {tol}")
    return a


def all_subsets(n: int, k: int):
    return itertools.combinations(range(n), k)
