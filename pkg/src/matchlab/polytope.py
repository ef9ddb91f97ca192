"""Symmetric doubly stochastic matrices and the perfect matching polytope.

``Psi_{2n}`` is the convex hull of the adjacency matrices of perfect
matchings of ``K_{2n}``.  Membership uses the odd-set description summed
over ordered pairs: ``sum_{i != j in S} b_ij <= |S| - 1`` for odd
``3 <= |S| <= 2n - 3``.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO

import mpmath
import numpy as np

from .capacity import count_positive_eigenvalues
from .errors import DomainError, GuardError
from .graphs import GUARD_ENV, MultiGraph, guard_overridden, is_regular
from .matching import haffnian_series

EDMONDS_MAX = 16
MINIMIZE_MAX = 10

Matrix = list[list[Fraction]]


def as_fraction_matrix(b: Sequence[Sequence]) -> Matrix:
    m = [[Fraction(v) for v in row] for row in b]
    if any(len(row) != len(m) for row in m):
        raise DomainError("matrix must be square")
    return m


def check_symmetric_ds(b: Sequence[Sequence], *, zero_diagonal: bool = False) -> Matrix:
    m = as_fraction_matrix(b)
    n = len(m)
    for i in range(n):
        if zero_diagonal and m[i][i] != 0:
            raise DomainError(f"nonzero diagonal entry at {i}")
        if sum(m[i]) != 1:
            raise DomainError(f"row {i} sums to {sum(m[i])}, not 1")
        for j in range(n):
            if m[i][j] < 0:
                raise DomainError(f"negative entry at ({i}, {j})")
            if m[i][j] != m[j][i]:
                raise DomainError(f"matrix not symmetric at ({i}, {j})")
    return m


def scaled_adjacency(g: MultiGraph, r: int | None = None) -> Matrix:
    r = r if r is not None else is_regular(g)
    if not r:
        raise DomainError("graph is not regular")
    return [[Fraction(v, r) for v in row] for row in g.adjacency]


def perfect_matching_matrices(two_n: int) -> list[tuple[tuple[int, int], ...]]:
    """All perfect matchings of ``K_{two_n}`` as edge tuples."""

    def rec(rest: tuple[int, ...]):
        if not rest:
            yield ()
            return
        v = rest[0]
        for idx in range(1, len(rest)):
            u = rest[idx]
            for tail in rec(rest[1:idx] + rest[idx + 1:]):
                yield ((v, u),) + tail

    return list(rec(tuple(range(two_n))))


def matching_combination(two_n: int, weights: dict[tuple[tuple[int, int], ...], Fraction]) -> Matrix:
    b = [[Fraction(0)] * two_n for _ in range(two_n)]
    for m, w in weights.items():
        for u, v in m:
            b[u][v] += w
            b[v][u] += w
    return b


# --- Edmonds membership ------------------------------------------------------


@dataclass(frozen=True)
class EdmondsVerdict:
    member: bool
    violating_set: tuple[int, ...] | None = None
    excess: Fraction | None = None  # inner ordered sum minus (|S| - 1)
    checked: int = 0


def _odd_subsets(n: int):
    for size in range(3, n - 2, 2):
        yield from itertools.combinations(range(n), size)


def in_edmonds_polytope(b: Sequence[Sequence]) -> EdmondsVerdict:
    """Exact membership test for the perfect matching polytope (2n <= 16)."""
    m = check_symmetric_ds(b, zero_diagonal=True)
    n = len(m)
    if n % 2:
        raise DomainError("the perfect matching polytope needs an even vertex count")
    if n > EDMONDS_MAX and not guard_overridden():
        raise GuardError(f"2n={n} exceeds the exhaustive odd-set guard 2n <= {EDMONDS_MAX}; "
                         f"set {GUARD_ENV}=1 to override")
    subsets = list(_odd_subsets(n))
    if not subsets:
        return EdmondsVerdict(True, checked=0)
    denom = math.lcm(*(v.denominator for row in m for v in row))
    ints = np.array([[int(v * denom) for v in row] for row in m], dtype=object)
    ind = np.zeros((len(subsets), n), dtype=object)
    for idx, s in enumerate(subsets):
        ind[idx, list(s)] = 1
    inner = ((ind @ ints) * ind).sum(axis=1)
    sizes = ind.sum(axis=1)
    excess = inner - (sizes - 1) * denom
    bad = np.nonzero(excess > 0)[0]
    if bad.size:
        i = int(bad[0])
        return EdmondsVerdict(False, subsets[i], Fraction(int(excess[i]), denom), len(subsets))
    return EdmondsVerdict(True, checked=len(subsets))


@dataclass(frozen=True)
class OddCutVerdict:
    member: bool
    odd_cut_ok: bool
    agree: bool
    edmonds: EdmondsVerdict
    small_cut: tuple[int, ...] | None = None
    cut_size: int | None = None


def regular_graph_in_polytope(g: MultiGraph) -> OddCutVerdict:
    """``(1/r) A(G)`` membership, cross-checked with the odd-cut criterion."""
    r = is_regular(g)
    if not r:
        raise DomainError("graph is not regular")
    if g.n % 2:
        raise DomainError("need an even vertex count")
    ver = in_edmonds_polytope(scaled_adjacency(g, r))
    small = None
    cut_size = None
    for s in _odd_subsets(g.n):
        inside = set(s)
        cut = sum(g.adjacency[u][v] for u in s for v in range(g.n) if v not in inside)
        if cut < r:
            small, cut_size = s, cut
            break
    ok = small is None
    return OddCutVerdict(ver.member, ok, ver.member == ok, ver, small, cut_size)


# --- extreme points ---------------------------------------------------------------


@dataclass(frozen=True)
class KatzBlock:
    kind: str  # "singleton" | "transposition" | "odd-cycle"
    vertices: tuple[int, ...]  # in cycle order for odd cycles


@dataclass(frozen=True)
class KatzDecomposition:
    n: int
    permutation: tuple[int, ...]  # new position -> original vertex
    blocks: tuple[KatzBlock, ...]

    def block_matrix(self, block: KatzBlock) -> Matrix:
        size = len(block.vertices)
        if block.kind == "singleton":
            return [[Fraction(1)]]
        if block.kind == "transposition":
            return [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]
        out = [[Fraction(0)] * size for _ in range(size)]
        for i in range(size):
            j = (i + 1) % size
            out[i][j] = out[j][i] = Fraction(1, 2)
        return out

    def reassemble(self) -> Matrix:
        """Place the blocks back on the original vertices."""
        out = [[Fraction(0)] * self.n for _ in range(self.n)]
        for block in self.blocks:
            local = self.block_matrix(block)
            for a, u in enumerate(block.vertices):
                for c, v in enumerate(block.vertices):
                    out[u][v] = local[a][c]
        return out


def _support_components(m: Matrix) -> list[list[int]]:
    n = len(m)
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in range(n):
                if m[u][v] and not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def _cycle_order(m: Matrix, comp: list[int]) -> tuple[int, ...] | None:
    """Vertices of ``comp`` in cycle order if its support is a simple cycle."""
    nbrs = {u: [v for v in comp if v != u and m[u][v]] for u in comp}
    if any(len(x) != 2 for x in nbrs.values()):
        return None
    order = [comp[0]]
    prev, cur = None, comp[0]
    while True:
        nxt = nbrs[cur][0] if nbrs[cur][0] != prev else nbrs[cur][1]
        if nxt == comp[0]:
            break
        order.append(nxt)
        prev, cur = cur, nxt
    return tuple(order) if len(order) == len(comp) else None


def katz_is_extreme(f: Sequence[Sequence]) -> KatzDecomposition | None:
    """Decomposition into 1x1 ones, transpositions and half odd cycles, or None."""
    m = check_symmetric_ds(f)
    blocks = []
    for comp in _support_components(m):
        if len(comp) == 1:
            blocks.append(KatzBlock("singleton", tuple(comp)))  # row sum 1 forces m[u][u] = 1
            continue
        if any(m[u][u] for u in comp):
            return None
        if len(comp) == 2:
            blocks.append(KatzBlock("transposition", tuple(comp)))
            continue
        if len(comp) % 2 == 0:
            return None
        order = _cycle_order(m, comp)
        if order is None:
            return None
        if any(m[order[i]][order[(i + 1) % len(order)]] != Fraction(1, 2) for i in range(len(order))):
            return None
        blocks.append(KatzBlock("odd-cycle", order))
    perm = tuple(v for b in blocks for v in b.vertices)
    return KatzDecomposition(len(m), perm, tuple(blocks))


def _exact_nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    a = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fc]
        basis.append(v)
    return basis


def non_extreme_witness(f: Sequence[Sequence]) -> tuple[Matrix, Matrix] | None:
    """Two distinct symmetric doubly stochastic matrices with midpoint ``f``.

    Uses an exact nullspace vector of the row-sum map restricted to the
    support of ``f``; None when the nullspace is trivial (``f`` extreme).
    """
    m = check_symmetric_ds(f)
    n = len(m)
    entries = [(i, j) for i in range(n) for j in range(i, n) if m[i][j]]
    rows = [[Fraction(int(i == v) + int(j == v and i != j)) for i, j in entries] for v in range(n)]
    basis = _exact_nullspace(rows, len(entries))
    if not basis:
        return None
    d = basis[0]
    eps = min(m[i][j] / abs(x) for (i, j), x in zip(entries, d) if x)
    plus = [row[:] for row in m]
    minus = [row[:] for row in m]
    for (i, j), x in zip(entries, d):
        for a, b in {(i, j), (j, i)}:
            plus[a][b] += eps * x
            minus[a][b] -= eps * x
    return plus, minus


# --- exact formulas and lower bounds ---------------------------------------------


def exact_haffnian_scaled(kind: str, n: int, k: int) -> Fraction:
    """``haf_k`` of ``A(K_{2n})/(2n-1)`` or ``perm_k`` of ``J_n/n``, exactly."""
    if not 2 <= k <= n:
        raise DomainError(f"formula needs 2 <= k <= n, got k={k}, n={n}")
    if kind == "complete":
        prod = math.prod(math.comb(2 * k - 2 * j, 2) for j in range(k))
        return Fraction(math.comb(2 * n, 2 * k) * prod, math.factorial(k) * (2 * n - 1) ** k)
    if kind == "bipartite":
        return Fraction(math.comb(n, k) ** 2 * math.factorial(k), n**k)
    raise DomainError("kind must be 'complete' or 'bipartite'")


def uniform_complete(two_n: int) -> Matrix:
    return [[Fraction(int(i != j), two_n - 1) for j in range(two_n)] for i in range(two_n)]


@dataclass(frozen=True)
class HypBound:
    k: int
    n: int
    exact: Fraction

    @property
    def log_value(self) -> float:
        return float(mpmath.log(mpmath.mpf(self.exact.numerator)) - mpmath.log(mpmath.mpf(self.exact.denominator)))

    @property
    def value(self) -> float:
        return float(self.exact)


def hypest_bounds(k: int, n: int) -> HypBound:
    """Lower bound on ``haf_k B`` for ``B`` in Psi_{2n} with one positive eigenvalue."""
    if not 2 <= k <= n:
        raise DomainError(f"need 2 <= k <= n, got k={k}, n={n}")
    if k == n:
        return HypBound(k, n, Fraction(n - 1, n) ** ((n - 1) * n))
    m = 2 * n
    head = Fraction(m ** (m - 2 * k) * math.factorial(m - k) * m**k,
                    math.factorial(m - 2 * k) * (m - k) ** (m - k) * 2**k * math.factorial(k))
    return HypBound(k, n, head * Fraction(m - k - 1, m - k) ** ((m - k - 1) * k))


def one_positive_eigenvalue(b: Sequence[Sequence], tol: float = 1e-9) -> bool:
    return count_positive_eigenvalues(b, tol) == 1


def approximation_errors(ns: Sequence[int]) -> list[tuple[int, float, float]]:
    """Relative errors of ``e^{-n} sqrt(2e)`` and ``e^{-n} sqrt(2 pi n)`` as approximations."""
    out = []
    with mpmath.workdps(40):
        for n in ns:
            comp = exact_haffnian_scaled("complete", n, n)
            bip = exact_haffnian_scaled("bipartite", n, n)
            a1 = mpmath.exp(-n) * mpmath.sqrt(2 * mpmath.e)
            a2 = mpmath.exp(-n) * mpmath.sqrt(2 * mpmath.pi * n)
            out.append((n, float(abs(mpmath.mpf(comp.numerator) / comp.denominator - a1) / a1),
                        float(abs(mpmath.mpf(bip.numerator) / bip.denominator - a2) / a2)))
    return out


def sandwich_holds(n: int) -> bool:
    """``e^{-n} sqrt 2 < haf_n(uniform K_2n) < n!/n^n`` checked with 60-digit enclosures."""
    comp = exact_haffnian_scaled("complete", n, n)
    bip = exact_haffnian_scaled("bipartite", n, n)
    with mpmath.workdps(60):
        low = mpmath.exp(-n) * mpmath.sqrt(2)
        lhs = mpmath.mpf(comp.numerator) / comp.denominator
        slack = mpmath.mpf(10) ** -50
        return bool(low + slack < lhs) and comp < bip


# --- experimental minimizer -------------------------------------------------------


def _haf_series_float(b: np.ndarray) -> list[float]:
    n = b.shape[0]
    memo: dict[int, list[float]] = {0: [1.0]}

    def rec(mask: int) -> list[float]:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        v = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << v)
        out = list(rec(rest))
        u_mask = rest
        while u_mask:
            u = (u_mask & -u_mask).bit_length() - 1
            u_mask &= u_mask - 1
            w = b[v, u]
            if w:
                sub = rec(rest & ~(1 << u))
                if len(sub) + 1 > len(out):
                    out.extend([0.0] * (len(sub) + 1 - len(out)))
                for j, c in enumerate(sub):
                    out[j + 1] += w * c
        memo[mask] = out
        return out

    s = rec((1 << n) - 1)
    return s + [0.0] * (n // 2 + 1 - len(s))


def _haf_gradient(b: np.ndarray, k: int) -> np.ndarray:
    """``d haf_k / d b_uv`` (edge variable) = ``haf_{k-1}`` of B without u, v."""
    n = b.shape[0]
    g = np.zeros((n, n))
    for u in range(n):
        for v in range(u + 1, n):
            keep = [x for x in range(n) if x not in (u, v)]
            g[u, v] = g[v, u] = _haf_series_float(b[np.ix_(keep, keep)])[k - 1] if k >= 1 else 0.0
    return g


def project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u * idx > css - 1)[0][-1]
    theta = (css[rho] - 1) / (rho + 1)
    return np.maximum(v - theta, 0.0)


@dataclass
class MinimizeRecord:
    k: int
    two_n: int
    best_value: Fraction  # an upper bound on mu_{k,n}, exact for the returned matrix
    best_matrix: Matrix
    exact_minimum: bool  # True only where the minimum is known in closed form
    certified_lower: Fraction | None
    starts: int
    iterations: int
    search_value: float = math.nan  # best value reached by the descent itself
    notes: list[str] = field(default_factory=list)


def _rational_weights(lam: np.ndarray, bits: int = 30) -> list[Fraction]:
    scale = 1 << bits
    ints = [int(round(x * scale)) for x in lam]
    total = sum(ints)
    if total <= 0:
        raise DomainError("infeasible projection: all weights vanished")
    return [Fraction(i, total) for i in ints]


def minimize_haffnian(
    k: int,
    two_n: int,
    budget: int = 200,
    *,
    seed: int = 0,
    starts: int = 4,
    trace: IO[str] | None = None,
) -> MinimizeRecord:
    """Search Psi_{2n} for small ``haf_k``; the result bounds ``mu_{k,n}`` from above."""
    if two_n % 2 or two_n < 2:
        raise DomainError("2n must be a positive even number")
    n = two_n // 2
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}")
    if two_n > MINIMIZE_MAX and not guard_overridden():
        raise GuardError(f"2n={two_n} exceeds the minimizer guard 2n <= {MINIMIZE_MAX}; "
                         f"set {GUARD_ENV}=1 to override")
    if budget < 1:
        raise DomainError("budget must be positive")
    if k == 1:
        # haf_1 is half the total weight, n, on all of Psi_{2n}
        b = uniform_complete(two_n)
        return MinimizeRecord(k, two_n, Fraction(n), b, True, Fraction(n), 0, 0, float(n), ["haf_1 is constant"])

    matchings = perfect_matching_matrices(two_n)
    n_m = len(matchings)
    edge_idx = np.zeros((n_m, n), dtype=int), np.zeros((n_m, n), dtype=int)
    for a, m in enumerate(matchings):
        for e, (u, v) in enumerate(m):
            edge_idx[0][a, e], edge_idx[1][a, e] = u, v

    def matrix(lam: np.ndarray) -> np.ndarray:
        b = np.zeros((two_n, two_n))
        np.add.at(b, (edge_idx[0], edge_idx[1]), lam[:, None])
        return b + b.T

    rng = np.random.default_rng(seed)
    best_lam, best_val = None, math.inf
    total_iter = 0
    for s in range(starts):
        if s == 0:
            lam = np.zeros(n_m)
            lam[0] = 1.0  # an extreme point
        else:
            lam = rng.dirichlet(np.full(n_m, 0.5))
        val = _haf_series_float(matrix(lam))[k]
        step = 0.5
        for it in range(budget):
            b = matrix(lam)
            g_edge = _haf_gradient(b, k)
            g = g_edge[edge_idx[0], edge_idx[1]].sum(axis=1)
            while True:
                cand = project_simplex(lam - step * g)
                cval = _haf_series_float(matrix(cand))[k]
                if cval <= val - 1e-4 * float(g @ (lam - cand)) or step < 1e-12:
                    break
                step *= 0.5
            moved = float(np.abs(cand - lam).sum())
            lam, val = cand, min(val, cval)
            step = min(step * 2.0, 4.0)
            total_iter += 1
            if trace is not None:
                bm = matrix(lam)
                resid = float(np.max(np.abs(bm.sum(axis=1) - 1.0)))
                trace.write(json.dumps({"start": s, "iter": it, "value": val, "feasibility_residual": resid}) + "\n")
            if moved < 1e-13:
                break
        if val < best_val:
            best_val, best_lam = val, lam.copy()

    weights = _rational_weights(best_lam)
    b_exact = matching_combination(two_n, {m: w for m, w in zip(matchings, weights) if w})
    best = Fraction(haffnian_series(b_exact)[k])
    notes = []
    exact_min = False
    certified = None
    if two_n == 4 and k == 2:
        # Psi_4 is the simplex of the three perfect matchings; haf_2 = a^2 + b^2 + c^2
        b_exact = uniform_complete(4)
        best = Fraction(1, 3)
        exact_min = True
        certified = Fraction(1, 3)
        notes.append("closed-form minimum on the 2-simplex")
    else:
        verdict = in_edmonds_polytope(b_exact)
        if not verdict.member:
            notes.append(f"rounded matrix failed membership at {verdict.violating_set}")
    return MinimizeRecord(k, two_n, best, b_exact, exact_min, certified, starts, total_iter, best_val, notes)
