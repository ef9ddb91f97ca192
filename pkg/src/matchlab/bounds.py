"""Closed-form upper and lower bounds on k-matching counts.

Bounds whose value is rational are returned exactly; bounds involving
fractional powers such as ``(r!)^{k/r}`` are evaluated in log space with
mpmath at 50 significant digits, so the float ``log_value`` is within
``LOG_TOL`` of the true logarithm.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import DomainError
from .graphs import MultiGraph, bipartite_adjacency, is_regular
from .matching import Number, match_series, permanent

LOG_TOL = 1e-12
_MP = mpmath.mp.clone()
_MP.dps = 50


def _mplog(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return _MP.log(x.numerator) - _MP.log(x.denominator)
    return _MP.log(x)


@dataclass(frozen=True)
class BoundReport:
    """One bound value and, once compared, its verdict against a quantity.

    ``kind`` is ``"exact"`` (``exact`` holds a Fraction, tolerance 0) or
    ``"log"`` (only ``log_value`` is meaningful, tolerance ``LOG_TOL``).
    ``proven`` is False for conjectured bounds.
    """

    name: str
    direction: str  # "upper" | "lower"
    kind: str
    log_value: float | None
    exact: Fraction | None = None
    proven: bool = True
    params: dict = field(default_factory=dict)
    bounded_quantity: str = ""
    branch: str | None = None
    observed: Fraction | None = None
    verdict: str | None = None

    @property
    def available(self) -> bool:
        return self.log_value is not None or self.exact is not None

    @property
    def tolerance(self) -> float:
        return 0.0 if self.kind == "exact" else LOG_TOL

    @property
    def value(self) -> float | None:
        if self.exact is not None:
            return float(self.exact)
        if self.log_value is None:
            return None
        return math.exp(self.log_value)

    def check(self, quantity: Number, tol: float | None = None) -> str:
        """``"holds"``, ``"violated"`` or ``"unavailable"`` for the given quantity."""
        if not self.available:
            return "unavailable"
        q = Fraction(quantity)
        if self.kind == "exact":
            ok = q <= self.exact if self.direction == "upper" else q >= self.exact
            return "holds" if ok else "violated"
        tol = self.tolerance if tol is None else tol
        if q <= 0:
            if self.direction == "upper":
                return "holds"
            return "violated"
        gap = float(_mplog(q)) - self.log_value
        if self.direction == "upper":
            return "violated" if gap > tol else "holds"
        return "violated" if -gap > tol else "holds"

    def compared(self, quantity: Number, description: str | None = None, tol: float | None = None) -> BoundReport:
        return dataclasses.replace(
            self,
            observed=Fraction(quantity),
            verdict=self.check(quantity, tol),
            bounded_quantity=description or self.bounded_quantity,
        )

    def csv_row(self) -> str:
        p = self.params
        val = "" if self.value is None else (str(self.exact) if self.exact is not None else repr(self.value))
        logv = "" if self.log_value is None else repr(self.log_value)
        cols = [self.name, p.get("k", ""), p.get("n", ""), p.get("r", ""), val, logv,
                self.bounded_quantity, self.verdict or ("unavailable" if not self.available else "")]
        return ",".join(str(c) for c in cols)


CSV_HEADER = "bound,k,n,r,value,log_value,bounded_quantity,verdict"


def reports_to_csv(reports: Sequence[BoundReport]) -> str:
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in reports]) + "\n"


def _exact_report(name, direction, value: Fraction, *, proven=True, **kw) -> BoundReport:
    log_value = float(_mplog(value)) if value > 0 else -math.inf
    return BoundReport(name, direction, "exact", log_value, Fraction(value), proven, **kw)


def _log_report(name, direction, log_value, *, proven=True, **kw) -> BoundReport:
    return BoundReport(name, direction, "log", float(log_value), None, proven, **kw)


def _log_factorial(m: int):
    return _MP.log(math.factorial(m))


# --- upper bounds -------------------------------------------------------------


def _check_01_square(b: Sequence[Sequence[Number]]) -> list[list[int]]:
    n = len(b)
    out = []
    for row in b:
        if len(row) != n:
            raise DomainError("Bregman bound needs a square matrix")
        if any(x not in (0, 1) for x in row):
            raise DomainError("Bregman bound needs a 0/1 matrix")
        out.append([int(x) for x in row])
    return out


def bregman_upper(b: Sequence[Sequence[Number]]) -> BoundReport:
    """``prod_i (r_i!)^{1/r_i}`` for a 0/1 square matrix (zero rows contribute 1)."""
    m = _check_01_square(b)
    log_value = _MP.mpf(0)
    for row in m:
        ri = sum(row)
        if ri:
            log_value += _log_factorial(ri) / ri
    return _log_report("bregman", "upper", log_value, params={"n": len(m)}, bounded_quantity="perm B")


def bregman_certificate(b: Sequence[Sequence[Number]], perm: int | None = None) -> bool:
    """Integer check ``perm(B)^L <= prod (r_i!)^{L/r_i}`` with ``L = lcm(r_i)``."""
    m = _check_01_square(b)
    perm = permanent(m) if perm is None else perm
    sums = [sum(row) for row in m]
    if any(s == 0 for s in sums):
        return perm == 0
    big = math.lcm(*sums)
    rhs = 1
    for s in sums:
        rhs *= math.factorial(s) ** (big // s)
    return perm**big <= rhs


def aef_upper(g: MultiGraph) -> BoundReport:
    """``prod_v ((deg v)!)^{1/(2 deg v)}`` bounding perfect matchings of a simple graph."""
    _check_aef(g)
    log_value = sum((_log_factorial(d) / (2 * d) for d in g.degrees), _MP.mpf(0))
    return _log_report("aef", "upper", log_value, params={"n": g.n // 2}, bounded_quantity="phi(n,G)")


def _check_aef(g: MultiGraph):
    if not g.is_simple:
        raise DomainError("the AEF bound is stated for simple graphs")
    if any(d == 0 for d in g.degrees):
        raise DomainError("the AEF bound needs a graph without isolated vertices")
    if g.n % 2:
        raise DomainError("the AEF bound needs an even vertex count")


def aef_certificate(g: MultiGraph, count: int) -> bool:
    """Integer check ``count^L <= prod (d!)^{L/(2d)}`` with ``L = lcm(2d)``."""
    _check_aef(g)
    big = math.lcm(*(2 * d for d in g.degrees))
    rhs = 1
    for d in g.degrees:
        rhs *= math.factorial(d) ** (big // (2 * d))
    return count**big <= rhs


def _check_knr(k: int, n: int, r: int):
    if not (1 <= k <= n):
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if r < 1:
        raise DomainError("degree r must be at least 1")


def theta_upper(k: int, n: int, r: int) -> BoundReport:
    """``min(C(2n,2k) (r!)^{k/r}, 2^-k C(2n,k) r^k)`` for simple r-regular graphs on 2n vertices."""
    _check_knr(k, n, r)
    b1 = _MP.log(math.comb(2 * n, 2 * k)) + _log_factorial(r) * k / r
    b2 = _mplog(Fraction(math.comb(2 * n, k) * r**k, 2**k))
    branch = "subgraph" if b1 <= b2 else "vertex-choice"
    return _log_report("theta_upper", "upper", min(b1, b2), params={"k": k, "n": n, "r": r},
                       bounded_quantity="Theta(k,n,r)", branch=branch)


def lambda_upper(k: int, n: int, r: int) -> BoundReport:
    """``min(C(n,k)^2 (r!)^{k/r}, C(n,k) r^k)`` for simple bipartite r-regular graphs."""
    _check_knr(k, n, r)
    c = math.comb(n, k)
    b1 = 2 * _MP.log(c) + _log_factorial(r) * k / r
    b2 = _MP.log(c * r**k)
    branch = "bregman" if b1 <= b2 else "edge-choice"
    return _log_report("lambda_upper", "upper", min(b1, b2), params={"k": k, "n": n, "r": r},
                       bounded_quantity="Lambda(k,n,r)", branch=branch)


def perfect_upper(n: int, r: int) -> BoundReport:
    """``(r!)^{n/r}`` on perfect matchings of simple r-regular graphs on 2n vertices."""
    if n < 1 or r < 1:
        raise DomainError("need n, r >= 1")
    return _log_report("perfect_upper", "upper", _log_factorial(r) * n / r,
                       params={"k": n, "n": n, "r": r}, bounded_quantity="Theta(n,n,r)")


# --- lower bounds ---------------------------------------------------------------


def lmc_lower(k: int, n: int, r: int) -> BoundReport:
    """Conjectured ``C(n,k)^2 ((nr-k)/(nr))^{nr-k} (kr/n)^k`` lower bound on lambda."""
    _check_knr(k, n, r)
    nr = n * r
    value = Fraction(math.comb(n, k) ** 2) * Fraction(nr - k, nr) ** (nr - k) * Fraction(k * r, n) ** k
    return _exact_report("lmc", "lower", value, proven=False, params={"k": k, "n": n, "r": r},
                         bounded_quantity="lambda(k,n,r)")


def _check_r2(r: int):
    if r < 2:
        raise DomainError("degree r must be at least 2")


def schrijver_lower(n: int, r: int) -> BoundReport:
    """``((r-1)^{r-1} / r^{r-2})^n`` lower bound on lambda(n,n,r)."""
    _check_r2(r)
    value = Fraction((r - 1) ** (r - 1), 1) / Fraction(r) ** (r - 2)
    return _exact_report("schrijver", "lower", value**n, params={"k": n, "n": n, "r": r},
                         bounded_quantity="lambda(n,n,r)")


def _gurvits_constant(r: int) -> Fraction:
    return Fraction(math.factorial(r), r**r) * Fraction(r, r - 1) ** (r * (r - 1))


def _gurvits_perm_value(n: int, r: int) -> Fraction:
    # a column of an n x n matrix has at most n nonzeros, and the
    # inequality is only valid with the cap min(r, n)
    r = min(r, n)
    if r == 1:
        return Fraction(1)
    return _gurvits_constant(r) * Fraction(r - 1, r) ** ((r - 1) * n)


def gurvits_lower(n: int, r: int) -> BoundReport:
    """Gurvits' improvement of the Schrijver bound on lambda(n,n,r).

    ``r^n`` times the permanent bound for ``A/r``; for ``n < r`` the
    support cap is lowered to ``n``.
    """
    _check_r2(r)
    value = Fraction(r) ** n * _gurvits_perm_value(n, r)
    return _exact_report("gurvits", "lower", value, params={"k": n, "n": n, "r": r},
                         bounded_quantity="lambda(n,n,r)")


def column_support(b: Sequence[Sequence[Number]]) -> int:
    n = len(b)
    return max(sum(1 for i in range(n) if b[i][j]) for j in range(len(b[0])))


def check_doubly_stochastic(b: Sequence[Sequence[Number]]) -> list[list[Fraction]]:
    m = [[Fraction(x) for x in row] for row in b]
    n = len(m)
    if any(len(row) != n for row in m):
        raise DomainError("doubly stochastic matrices are square")
    if any(x < 0 for row in m for x in row):
        raise DomainError("doubly stochastic matrices are nonnegative")
    if any(sum(row) != 1 for row in m) or any(sum(m[i][j] for i in range(n)) != 1 for j in range(n)):
        raise DomainError("row and column sums must equal 1")
    return m


def gurvits_perm_lower(b: Sequence[Sequence[Number]], r: int | None = None) -> BoundReport:
    """Lower bound on ``perm B`` for doubly stochastic B with at most r nonzeros per column."""
    m = check_doubly_stochastic(b)
    n = len(m)
    support = column_support(m)
    if r is None:
        r = support
    elif support > r:
        raise DomainError(f"a column has {support} > r={r} nonzero entries")
    value = _gurvits_perm_value(n, r)
    return _exact_report("gurvits_perm", "lower", value, params={"n": n, "r": r}, bounded_quantity="perm B")


def fg_terms(k: int, n: int, r: int) -> dict[int, Fraction]:
    """Exact value of the FG capacity expression for each ``s`` in ``1..n-r``."""
    _check_knr(k, n, r)
    out = {}
    for s in range(1, n - r + 1):
        t = Fraction(math.factorial(s * n) * math.comb(n, k),
                     s ** (n - k) * math.factorial(n - k) * math.factorial((s - 1) * n + k))
        t *= Fraction(r**k * math.factorial(r + s), (r + s) ** (r + s))
        t *= Fraction(r + s - 1, r + s) ** ((r + s - 1) * (n - r - s))
        out[s] = t
    return out


def fg_lower(k: int, n: int, r: int) -> BoundReport:
    """FG lower bound (Gurvits-type capacity argument with an auxiliary s-regular factor) on lambda(k,n,r); unavailable when ``n <= r``."""
    terms = fg_terms(k, n, r)
    params = {"k": k, "n": n, "r": r}
    if not terms:
        return BoundReport("fg", "lower", "exact", None, None, True, params, "lambda(k,n,r)", "empty s-range")
    s_best = max(terms, key=lambda s: (terms[s], -s))
    return _exact_report("fg", "lower", terms[s_best], params=params, bounded_quantity="lambda(k,n,r)",
                         branch=f"s={s_best}")


def tverberg_mu(k: int, n: int) -> Fraction:
    """``min perm_k`` over n x n doubly stochastic matrices: ``C(n,k)^2 k! / n^k``."""
    if not (1 <= k <= n):
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    return Fraction(math.comb(n, k) ** 2 * math.factorial(k), n**k)


def tverberg_lower(k: int, n: int, r: int) -> BoundReport:
    """``r^k mu(k,n)`` lower bound on lambda(k,n,r)."""
    _check_knr(k, n, r)
    return _exact_report("tverberg", "lower", r**k * tverberg_mu(k, n), params={"k": k, "n": n, "r": r},
                         bounded_quantity="lambda(k,n,r)")


def ekkkn_line(n: int) -> BoundReport:
    """Sanity line ``2^{2n/3656}`` for perfect matchings of bridgeless cubic graphs."""
    return _log_report("ekkkn", "lower", _MP.log(2) * 2 * n / 3656, params={"k": n, "n": n, "r": 3},
                       bounded_quantity="phi(n,G), G bridgeless cubic")


def bipartite_catalog(k: int, n: int, r: int) -> list[BoundReport]:
    """Lower bounds applicable to every r-regular bipartite multigraph on 2n vertices."""
    out = [lmc_lower(k, n, r), tverberg_lower(k, n, r)]
    if r >= 2:
        fg = fg_lower(k, n, r)
        if fg.available:
            out.append(fg)
        if k == n:
            out += [schrijver_lower(n, r), gurvits_lower(n, r)]
    return out


def graph_bounds(g: MultiGraph, k: int) -> list[BoundReport]:
    """Every catalog bound that applies to ``g``, compared with ``phi(k, g)``.

    Upper bounds are stated for simple graphs; lower bounds for bipartite
    (multi)graphs.
    """
    r = is_regular(g)
    if not r or g.n % 2:
        raise DomainError("bounds need a regular graph on an even number of vertices")
    n = g.n // 2
    _check_knr(k, n, r)
    count = match_series(g)[k]
    halves = bipartite_adjacency(g)
    reports = []
    if g.is_simple:
        reports.append(theta_upper(k, n, r))
        if k == n:
            reports += [perfect_upper(n, r), aef_upper(g)]
        if halves is not None:
            reports.append(lambda_upper(k, n, r))
            if k == n:
                reports.append(bregman_upper(halves))
    if halves is not None:
        reports += bipartite_catalog(k, n, r)
    return [rep.compared(count, f"phi({k},G)") for rep in reports]
