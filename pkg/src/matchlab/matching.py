"""k-matching counts, k-haffnians, k-permanents and the matching polynomial.

All arithmetic is exact (``int`` / ``fractions.Fraction``).
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError
from .graphs import MultiGraph

Number = int | Fraction


@dataclass(frozen=True)
class MatchSeries:
    """Coefficients ``c_0 .. c_{N//2}`` of the matching polynomial."""

    coefficients: tuple[Number, ...]
    n_vertices: int
    source: str = ""

    def __post_init__(self):
        if not self.coefficients or self.coefficients[0] != 1:
            raise DomainError("a match series starts with c_0 = 1")

    def __getitem__(self, k: int) -> Number:
        if k < 0:
            raise DomainError("match size must be nonnegative")
        return self.coefficients[k] if k < len(self.coefficients) else 0

    def __len__(self):
        return len(self.coefficients)

    def __iter__(self):
        return iter(self.coefficients)

    @property
    def max_matching(self) -> int:
        """Largest ``k`` with a nonzero coefficient."""
        return max(k for k, c in enumerate(self.coefficients) if c)

    def convolve(self, other: MatchSeries) -> MatchSeries:
        """Series of the disjoint union."""
        n = self.n_vertices + other.n_vertices
        coeffs = poly_mul(self.coefficients, other.coefficients) + [0] * (n // 2 + 1)
        return MatchSeries(
            tuple(coeffs[: n // 2 + 1]),
            n,
            f"({self.source}) + ({other.source})",
        )

    def to_csv(self) -> str:
        lines = ["k,value"] + [f"{k},{c}" for k, c in enumerate(self.coefficients)]
        return "\n".join(lines) + "\n"


def poly_mul(a: Sequence[Number], b: Sequence[Number]) -> list[Number]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _series_dp(weights: Sequence[Sequence[Number]], n: int) -> list[Number]:
    """Weighted matching generating polynomial by vertex elimination.

    ``M(S) = M(S - v) + t * sum_u w[v][u] * M(S - v - u)`` with ``v`` the
    lowest vertex of ``S``; memoized on the residual vertex set.
    """
    nbrs = [[(u, weights[v][u]) for u in range(n) if u != v and weights[v][u]] for v in range(n)]
    memo: dict[int, list[Number]] = {0: [1]}

    def rec(mask: int) -> list[Number]:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        v = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << v)
        out = list(rec(rest))
        for u, w in nbrs[v]:
            if rest >> u & 1:
                sub = rec(rest & ~(1 << u))
                if len(sub) + 1 > len(out):
                    out.extend([0] * (len(sub) + 1 - len(out)))
                for k, c in enumerate(sub):
                    if c:
                        out[k + 1] += w * c
        memo[mask] = out
        return out

    coeffs = rec((1 << n) - 1) if n else [1]
    coeffs = list(coeffs) + [0] * (n // 2 + 1 - len(coeffs))
    return coeffs[: n // 2 + 1]


def match_series(g: MultiGraph) -> MatchSeries:
    """Exact ``phi(k, G)`` for ``k = 0 .. n//2`` (multiplicities multiply)."""
    return MatchSeries(tuple(_series_dp(g.adjacency, g.n)), g.n, "graph")


def phi(k: int, g: MultiGraph) -> int:
    """Number of k-matchings of ``g``; 0 for ``k > n//2``."""
    if k < 0:
        raise DomainError("match size must be nonnegative")
    return int(match_series(g)[k])


def _as_fraction_matrix(w) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in w]


def check_weighted_adjacency(w: Sequence[Sequence[Number]]) -> list[list[Fraction]]:
    m = _as_fraction_matrix(w)
    n = len(m)
    for i in range(n):
        if len(m[i]) != n:
            raise DomainError("weighted adjacency must be square")
        if m[i][i] != 0:
            raise DomainError(f"nonzero diagonal entry at {i}")
        for j in range(n):
            if m[i][j] < 0:
                raise DomainError(f"negative entry at ({i}, {j})")
            if m[i][j] != m[j][i]:
                raise DomainError(f"matrix not symmetric at ({i}, {j})")
    return m


def haffnian_series(w: Sequence[Sequence[Number]]) -> MatchSeries:
    """``haf_k W`` for ``k = 0 .. N//2`` for symmetric nonnegative zero-diagonal ``W``."""
    m = check_weighted_adjacency(w)
    return MatchSeries(tuple(_series_dp(m, len(m))), len(m), "weighted")


def haffnian(w: Sequence[Sequence[Number]], k: int | None = None) -> Fraction:
    """``haf_k W``; the full haffnian (``k = N/2``) by default."""
    s = haffnian_series(w)
    return Fraction(s[len(w) // 2 if k is None else k])


# --- permanents ---------------------------------------------------------------


def _perm_direct(a: Sequence[Sequence[Number]]) -> Number:
    n = len(a)
    total = 0
    for p in itertools.permutations(range(n)):
        prod = 1
        for i in range(n):
            x = a[i][p[i]]
            if not x:
                break
            prod *= x
        else:
            total += prod
    return total


def _perm_ryser(a: Sequence[Sequence[Number]]) -> Number:
    n = len(a)
    total = 0
    row_sums = [0] * n
    # Gray-code walk over column subsets
    prev_gray = 0
    for idx in range(1, 1 << n):
        gray = idx ^ (idx >> 1)
        j = (gray ^ prev_gray).bit_length() - 1
        sign = 1 if gray & (1 << j) else -1
        for i in range(n):
            row_sums[i] += sign * a[i][j]
        prev_gray = gray
        prod = 1
        for s in row_sums:
            prod *= s
            if not prod:
                break
        size = bin(gray).count("1")
        total += prod if (n - size) % 2 == 0 else -prod
    return total


def permanent(a: Sequence[Sequence[Number]]) -> Number:
    n = len(a)
    if n == 0:
        return 1
    if any(len(row) != n for row in a):
        raise DomainError("permanent needs a square matrix")
    return _perm_direct(a) if n < 6 else _perm_ryser(a)


def perm_k(b: Sequence[Sequence[Number]], k: int) -> Fraction:
    """Sum of the permanents of all ``k x k`` submatrices of ``b``."""
    m = len(b)
    n = len(b[0]) if m else 0
    if not 0 <= k <= min(m, n):
        raise DomainError(f"k={k} outside 0..{min(m, n)}")
    if k == 0:
        return Fraction(1)
    if k > 12:
        raise DomainError("perm_k supports k <= 12")
    bf = _as_fraction_matrix(b)
    total = Fraction(0)
    for rows in itertools.combinations(range(m), k):
        for cols in itertools.combinations(range(n), k):
            total += permanent([[bf[i][j] for j in cols] for i in rows])
    return total


def block_embedding(b: Sequence[Sequence[Number]]) -> list[list[Number]]:
    """Symmetric ``[[0, B], [B^T, 0]]``."""
    m = len(b)
    n = len(b[0]) if m else 0
    w = [[0] * (m + n) for _ in range(m + n)]
    for i in range(m):
        for j in range(n):
            w[i][m + j] = w[m + j][i] = b[i][j]
    return w


# --- analytic certificates --------------------------------------------------


@dataclass(frozen=True)
class NewtonVerdict:
    passed: bool
    min_slack: Fraction | None
    worst: tuple[int, int, int] | None
    checked: int


def newton_check(
    series: MatchSeries | Sequence[Number],
    n_vertices: int | None = None,
    *,
    triples: str = "adjacent",
) -> NewtonVerdict:
    """Newton inequalities for the normalized coefficients ``a_j = haf_j / C(N//2, j)``.

    With ``triples="adjacent"`` checks ``a_l^2 >= a_{l-1} a_{l+1}`` for
    ``1 <= l-1``, ``l+1 <= N//2``; these follow from real-rootedness.
    ``triples="all"`` checks every ``1 <= p < l < q <= N//2``; that stronger
    form fails for e.g. ``(1 + 2t)^4`` and is kept as a diagnostic.
    Returns the smallest slack and the triple where it occurs.
    """
    if triples not in ("adjacent", "all"):
        raise DomainError("triples must be 'adjacent' or 'all'")
    if isinstance(series, MatchSeries):
        n_vertices = series.n_vertices if n_vertices is None else n_vertices
        coeffs = series.coefficients
    else:
        coeffs = tuple(series)
    if n_vertices is None:
        raise DomainError("vertex count required")
    half = n_vertices // 2
    a = [Fraction(coeffs[j] if j < len(coeffs) else 0) / math.comb(half, j) for j in range(half + 1)]
    best = None
    where = None
    count = 0
    for l in range(2, half):
        sq = a[l] * a[l]
        if triples == "adjacent":
            pairs = [(l - 1, l + 1)]
        else:
            pairs = [(p, q) for p in range(1, l) for q in range(l + 1, half + 1)]
        for p, q in pairs:
            slack = sq - a[p] * a[q]
            count += 1
            if best is None or slack < best:
                best, where = slack, (p, l, q)
    return NewtonVerdict(best is None or best >= 0, best, where, count)


def _trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    while len(a) - 1 >= db and a:
        coef = a[-1] / lead
        shift = len(a) - 1 - db
        for i, c in enumerate(b):
            a[shift + i] -= coef * c
        a.pop()
        _trim(a)
    return a


def _derivative(p: Sequence[Fraction]) -> list[Fraction]:
    return [i * p[i] for i in range(1, len(p))]


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    while b:
        a, b = b, _poly_rem(a, b)
    return a


def sturm_sequence(p: Sequence[Number]) -> list[list[Fraction]]:
    seq = [_trim([Fraction(c) for c in p])]
    seq.append(_trim(_derivative(seq[0])))
    while seq[-1]:
        r = _poly_rem(seq[-2], seq[-1])
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _sign_changes(values: Sequence[int]) -> int:
    signs = [v for v in values if v]
    return sum(1 for x, y in zip(signs, signs[1:]) if x != y)


def count_distinct_real_roots(p: Sequence[Number]) -> int:
    seq = sturm_sequence(p)
    at_pos = [1 if s[-1] > 0 else -1 for s in seq]
    at_neg = [(1 if s[-1] > 0 else -1) * (1 if (len(s) - 1) % 2 == 0 else -1) for s in seq]
    return _sign_changes(at_neg) - _sign_changes(at_pos)


def real_rooted(series: MatchSeries | Sequence[Number]) -> bool:
    """True iff every root of ``sum c_k t^k`` is real (Sturm count, exact)."""
    coeffs = _trim([Fraction(c) for c in series])
    if not coeffs:
        raise DomainError("zero polynomial")
    if len(coeffs) == 1:
        return True
    g = _trim(_poly_gcd(list(coeffs), _trim(_derivative(coeffs))))
    squarefree_degree = (len(coeffs) - 1) - (len(g) - 1)
    return count_distinct_real_roots(coeffs) == squarefree_degree
