"""Loopless multigraphs, named graph families and regular-graph enumeration.

Graphs are stored as a symmetric nonnegative-integer multiplicity table with
zero diagonal.  Enumeration of regular (multi)graphs up to isomorphism uses
orderly generation: vertices are appended one at a time and every partial
graph must already be in canonical form, so each isomorphism class is emitted
exactly once without a seen-set.

The canonical labeling of a graph is the one maximizing the column-wise
upper-triangular string ``a[0][1], a[0][2], a[1][2], a[0][3], ...``.  That
order is prefix-closed (the first ``m`` columns describe the subgraph induced
on the first ``m`` vertices), which is what makes the orderly scheme valid.
"""

from __future__ import annotations

import enum
import os
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, GuardError

MAX_VERTICES = 12
MAX_DEGREE = 4
GUARD_ENV = "MATCHLAB_GUARD_OVERRIDE"


def guard_overridden() -> bool:
    return os.environ.get(GUARD_ENV, "").strip().lower() not in ("", "0", "false", "no")


class GraphClass(enum.Enum):
    SimpleRegular = "simple"
    SimpleBipartiteRegular = "simple-bipartite"
    MultiRegular = "mult"
    BipartiteMultiRegular = "bi-mult"
    ColorableMultiRegular = "co-mult"


@dataclass(frozen=True)
class MultiGraph:
    """Loopless multigraph on vertices ``0..n-1``.

    ``adjacency[i][j]`` is the multiplicity of the edge ``{i, j}``.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.adjacency) != self.n or any(len(row) != self.n for row in self.adjacency):
            raise DomainError("adjacency must be an n x n table")
        for i in range(self.n):
            if self.adjacency[i][i] != 0:
                raise DomainError(f"loop at vertex {i}")
            for j in range(i + 1, self.n):
                a = self.adjacency[i][j]
                if a != self.adjacency[j][i]:
                    raise DomainError(f"adjacency not symmetric at ({i}, {j})")
                if a < 0:
                    raise DomainError(f"negative multiplicity at ({i}, {j})")

    @classmethod
    def from_matrix(cls, matrix) -> MultiGraph:
        rows = tuple(tuple(int(x) for x in row) for row in matrix)
        return cls(len(rows), rows)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.adjacency)

    @property
    def is_simple(self) -> bool:
        return all(a <= 1 for row in self.adjacency for a in row)

    @property
    def num_edges(self) -> int:
        """Total edge count, multiplicities included."""
        return sum(self.degrees) // 2

    def edges(self) -> list[tuple[int, int, int]]:
        """``(u, v, multiplicity)`` for every adjacent pair with ``u < v``."""
        return [
            (i, j, self.adjacency[i][j])
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if self.adjacency[i][j]
        ]

    def to_numpy(self) -> np.ndarray:
        return np.array(self.adjacency, dtype=np.int64).reshape(self.n, self.n)

    def relabel(self, perm: Sequence[int]) -> MultiGraph:
        """Graph whose vertex ``i`` is vertex ``perm[i]`` of this graph."""
        a = self.adjacency
        return MultiGraph(self.n, tuple(tuple(a[pi][pj] for pj in perm) for pi in perm))

    def __str__(self):
        return f"MultiGraph(n={self.n}, edges={self.edges()})"


# --- constructors -----------------------------------------------------------


def build_graph(n: int, edges: Iterable[tuple[int, int, int] | tuple[int, int]]) -> MultiGraph:
    """Build a multigraph from ``(u, v[, multiplicity])`` triples.

    Repeated pairs accumulate.  Loops and out-of-range vertices are rejected.
    """
    if n < 0:
        raise DomainError("vertex count must be nonnegative")
    adj = [[0] * n for _ in range(n)]
    for e in edges:
        u, v = int(e[0]), int(e[1])
        mult = int(e[2]) if len(e) > 2 else 1
        if not (0 <= u < n and 0 <= v < n):
            raise DomainError(f"edge ({u}, {v}) has a vertex outside 0..{n - 1}")
        if u == v:
            raise DomainError(f"loop edge at vertex {u}")
        if mult < 1:
            raise DomainError(f"edge ({u}, {v}) has multiplicity {mult} < 1")
        adj[u][v] += mult
        adj[v][u] += mult
    return MultiGraph.from_matrix(adj)


def make_complete_bipartite(r: int, s: int | None = None) -> MultiGraph:
    """``K_{r,s}`` (``K_{r,r}`` by default) with sides ``0..r-1`` and ``r..r+s-1``."""
    s = r if s is None else s
    if r < 1 or s < 1:
        raise DomainError("complete bipartite graph needs both sides nonempty")
    return build_graph(r + s, [(i, r + j, 1) for i in range(r) for j in range(s)])


def make_cycle(m: int) -> MultiGraph:
    """Cycle ``C_m``; ``m = 2`` gives a doubled edge."""
    if m < 2:
        raise DomainError("cycle length must be at least 2")
    if m == 2:
        return build_graph(2, [(0, 1, 2)])
    return build_graph(m, [(i, (i + 1) % m, 1) for i in range(m)])


def make_complete(n: int) -> MultiGraph:
    if n < 1:
        raise DomainError("complete graph needs at least one vertex")
    return build_graph(n, [(i, j, 1) for i in range(n) for j in range(i + 1, n)])


def disjoint_union(*graphs: MultiGraph) -> MultiGraph:
    edges = []
    offset = 0
    for g in graphs:
        edges.extend((u + offset, v + offset, m) for u, v, m in g.edges())
        offset += g.n
    return build_graph(offset, edges)


def disjoint_copies(g: MultiGraph, q: int) -> MultiGraph:
    """``qG``: ``q`` disjoint copies, copy ``c`` occupying ``c*n .. c*n+n-1``."""
    if q < 1:
        raise DomainError("number of copies must be at least 1")
    return disjoint_union(*([g] * q))


def scale_multiplicity(g: MultiGraph, factor: int) -> MultiGraph:
    if factor < 1:
        raise DomainError("multiplicity factor must be at least 1")
    return MultiGraph(g.n, tuple(tuple(factor * a for a in row) for row in g.adjacency))


def biadjacency_graph(b: Sequence[Sequence[int]]) -> MultiGraph:
    """Bipartite multigraph whose bipartite adjacency matrix is ``b``."""
    m = len(b)
    k = len(b[0]) if m else 0
    return build_graph(m + k, [(i, m + j, int(b[i][j])) for i in range(m) for j in range(k) if b[i][j]])


# --- structural tests -------------------------------------------------------


def is_regular(g: MultiGraph) -> int | None:
    """Common degree if ``g`` is regular, otherwise ``None``."""
    if g.n == 0:
        return None
    d = g.degrees[0]
    return d if all(x == d for x in g.degrees) else None


def is_bipartite(g: MultiGraph) -> tuple[list[int], list[int]] | None:
    """Two-color every component; return the sides or ``None``."""
    color = [-1] * g.n
    for s in range(g.n):
        if color[s] != -1:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in range(g.n):
                if g.adjacency[u][v]:
                    if color[v] == -1:
                        color[v] = 1 - color[u]
                        stack.append(v)
                    elif color[v] == color[u]:
                        return None
    return [v for v in range(g.n) if color[v] == 0], [v for v in range(g.n) if color[v] == 1]


def bipartite_adjacency(g: MultiGraph) -> list[list[int]] | None:
    """Bipartite adjacency matrix rows=left side, cols=right side, or ``None``."""
    sides = is_bipartite(g)
    if sides is None:
        return None
    left, right = sides
    return [[g.adjacency[u][v] for v in right] for u in left]


def perfect_matchings(g: MultiGraph) -> Iterator[tuple[tuple[int, int], ...]]:
    """Perfect matchings of the support of ``g`` as sorted pair tuples."""
    adj = g.adjacency

    def rec(free: int) -> Iterator[list[tuple[int, int]]]:
        if not free:
            yield []
            return
        u = (free & -free).bit_length() - 1
        rest = free & ~(1 << u)
        v_bits = rest
        while v_bits:
            v = (v_bits & -v_bits).bit_length() - 1
            v_bits &= v_bits - 1
            if adj[u][v]:
                for tail in rec(rest & ~(1 << v)):
                    yield [(u, v)] + tail

    if g.n % 2:
        return
    for m in rec((1 << g.n) - 1):
        yield tuple(m)


def color_classes(g: MultiGraph) -> list[tuple[tuple[int, int], ...]] | None:
    """Partition the edge multiset into perfect matchings, or ``None``.

    Recursive peeling: remove one perfect matching of the support and recurse
    on the residual multigraph, backtracking over the choice.
    """
    r = is_regular(g)
    if r is None or g.n % 2:
        return None
    failed: set[tuple[tuple[int, ...], ...]] = set()

    def rec(adj: list[list[int]], left: int):
        if left == 0:
            return []
        key = tuple(tuple(row) for row in adj)
        if key in failed:
            return None
        for m in perfect_matchings(MultiGraph(g.n, key)):
            for u, v in m:
                adj[u][v] -= 1
                adj[v][u] -= 1
            sub = rec(adj, left - 1)
            for u, v in m:
                adj[u][v] += 1
                adj[v][u] += 1
            if sub is not None:
                return [m] + sub
        failed.add(key)
        return None

    return rec([list(row) for row in g.adjacency], r)


def is_colorable(g: MultiGraph) -> bool:
    return color_classes(g) is not None


def classify(g: MultiGraph) -> set[GraphClass]:
    r = is_regular(g)
    if r is None:
        return set()
    tags = {GraphClass.MultiRegular}
    bip = is_bipartite(g) is not None
    if g.is_simple:
        tags.add(GraphClass.SimpleRegular)
        if bip:
            tags.add(GraphClass.SimpleBipartiteRegular)
    if bip:
        tags.add(GraphClass.BipartiteMultiRegular)
    if (bip and g.n % 2 == 0) or is_colorable(g):
        # regular bipartite => sum of permutation matrices (Birkhoff)
        tags.add(GraphClass.ColorableMultiRegular)
    return tags


# --- canonical labeling -----------------------------------------------------


def _twin_classes(adj: Sequence[Sequence[int]], n: int) -> list[int]:
    """Representative index of each vertex's twin class.

    Vertices ``u, v`` are twins when they agree on every third vertex; the
    transposition ``(u v)`` is then an automorphism.
    """
    rep = list(range(n))
    for u in range(n):
        if rep[u] != u:
            continue
        au = list(adj[u])
        au[u] = 0
        for v in range(u + 1, n):
            if rep[v] != v:
                continue
            av = list(adj[v])
            av[u] = av[v] = 0
            keep = au[v]
            au[v] = 0
            if au == av:
                rep[v] = u
            au[v] = keep
    return rep


def _is_max_labeling(adj: Sequence[Sequence[int]], n: int) -> bool:
    """True iff the identity labeling maximizes the column string."""
    if n <= 2:
        return True
    target = [tuple(adj[i][j] for i in range(j)) for j in range(n)]
    rep = _twin_classes(adj, n)
    perm: list[int] = []
    used = [False] * n

    def rec(j: int) -> bool:
        # returns False as soon as a strictly larger labeling is found
        if j == n:
            return True
        tj = target[j]
        seen = set()
        for v in range(n):
            if used[v] or rep[v] in seen:
                continue
            # compare column of v against the target, stopping at the first difference
            cmp = 0
            for i, p in enumerate(perm):
                a = adj[p][v]
                if a != tj[i]:
                    cmp = 1 if a > tj[i] else -1
                    break
            if cmp > 0:
                return False
            if cmp == 0:
                seen.add(rep[v])
                used[v] = True
                perm.append(v)
                ok = rec(j + 1)
                perm.pop()
                used[v] = False
                if not ok:
                    return False
        return True

    return rec(0)


def canonical_labeling(g: MultiGraph) -> list[int]:
    """Permutation ``perm`` with ``g.relabel(perm)`` in canonical form."""
    n = g.n
    adj = g.adjacency
    if n == 0:
        return []
    rep = _twin_classes(adj, n)
    best: list[tuple[int, ...]] | None = None
    best_perm: list[int] = []
    cols: list[tuple[int, ...]] = []
    perm: list[int] = []
    used = [False] * n

    def rec(j: int, state: int):
        # state: 0 = equal to best so far, 1 = already larger than best
        nonlocal best, best_perm
        if j == n:
            if best is None or state == 1:
                best = list(cols)
                best_perm = list(perm)
            return
        cands = {}
        for v in range(n):
            if used[v]:
                continue
            cands.setdefault(rep[v], (v, tuple(adj[p][v] for p in perm)))
        top = max(c for _, c in cands.values())
        if best is not None and state == 0:
            if top < best[j]:
                return
            if top > best[j]:
                state = 1
        for v, col in cands.values():
            if col != top:
                continue
            used[v] = True
            perm.append(v)
            cols.append(col)
            rec(j + 1, state)
            cols.pop()
            perm.pop()
            used[v] = False
            # a new best may now equal this prefix; later siblings compare to it
            if state == 1:
                state = 0

    rec(0, 0)
    return best_perm


def canonical_graph(g: MultiGraph) -> MultiGraph:
    return g.relabel(canonical_labeling(g))


def encode(g: MultiGraph) -> str:
    """Row-major digit string of the adjacency table, prefixed by ``n:``."""
    digits = "".join(_digit(a) for row in g.adjacency for a in row)
    return f"{g.n}:{digits}"


def decode(code: str) -> MultiGraph:
    head, _, digits = code.partition(":")
    n = int(head)
    if len(digits) != n * n:
        raise DomainError("encoding length does not match vertex count")
    vals = [int(c, 36) for c in digits]
    return MultiGraph.from_matrix([vals[i * n:(i + 1) * n] for i in range(n)])


def _digit(a: int) -> str:
    if a < 10:
        return str(a)
    if a < 36:
        return chr(ord("a") + a - 10)
    raise DomainError("multiplicity too large to encode")


def canonical_form(g: MultiGraph) -> str:
    """Isomorphism-invariant encoding of ``g``."""
    return encode(canonical_graph(g))


def is_isomorphic(g: MultiGraph, h: MultiGraph) -> bool:
    return g.n == h.n and canonical_form(g) == canonical_form(h)


# --- orderly enumeration ----------------------------------------------------


def check_guard(n_vertices: int, r: int, max_vertices: int = MAX_VERTICES, max_degree: int = MAX_DEGREE):
    if guard_overridden():
        return
    if n_vertices > max_vertices or r > max_degree:
        raise GuardError(
            f"enumeration of {r}-regular graphs on {n_vertices} vertices exceeds the desk-scale guard "
            f"(n <= {max_vertices}, r <= {max_degree}); set {GUARD_ENV}=1 to override"
        )


def _columns(m: int, prev: Sequence[int] | None, room: Sequence[int], lo: int, hi: int) -> Iterator[list[int]]:
    """New-vertex columns ``c`` in decreasing lex order.

    ``c[i] <= room[i]``, ``lo <= sum(c) <= hi`` and ``c[:m-1] <= prev`` (swapping
    the last two vertices must not yield a larger string).
    """
    c = [0] * m
    suffix_room = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix_room[i] = suffix_room[i + 1] + room[i]

    def rec(i: int, total: int, tight: bool):
        if i == m:
            if total >= lo:
                yield list(c)
            return
        if total + suffix_room[i] < lo:
            return
        top = min(room[i], hi - total)
        if tight and prev is not None and i < m - 1:
            top = min(top, prev[i])
        for a in range(top, -1, -1):
            c[i] = a
            still = tight and prev is not None and i < m - 1 and a == prev[i]
            yield from rec(i + 1, total + a, still)
        c[i] = 0

    yield from rec(0, 0, True)


def _extend(adj: list[list[int]], deg: list[int], m: int, n: int, r: int, cap: int) -> Iterator[tuple]:
    """Canonical completions of the canonical partial graph on ``m`` vertices."""
    if m == n:
        if all(d == r for d in deg):
            yield tuple(tuple(row) for row in adj)
        return
    remaining = n - m - 1  # vertices still to come after this one
    room = [min(cap, r - deg[i]) for i in range(m)]
    lo = max(0, r - cap * remaining)
    prev = [adj[i][m - 1] for i in range(m - 1)] if m >= 2 else None
    for col in _columns(m, prev, room, lo, r):
        d_new = sum(col)
        for i, a in enumerate(col):
            adj[i][m] = adj[m][i] = a
            deg[i] += a
        deg[m] = d_new
        if _feasible(deg, m + 1, remaining, r, cap) and _is_max_labeling(adj, m + 1):
            yield from _extend(adj, deg, m + 1, n, r, cap)
        for i, a in enumerate(col):
            adj[i][m] = adj[m][i] = 0
            deg[i] -= a
        deg[m] = 0


def _feasible(deg: Sequence[int], placed: int, remaining: int, r: int, cap: int) -> bool:
    deficit = 0
    for i in range(placed):
        d = r - deg[i]
        if d > cap * remaining:
            return False
        deficit += d
    free = remaining * r - deficit
    return free >= 0 and free % 2 == 0


def _worker(args) -> list[tuple]:
    adj, deg, m, n, r, cap = args
    return list(_extend([list(row) for row in adj], list(deg), m, n, r, cap))


def _raw_regular(n: int, r: int, cap: int, jobs: int = 1) -> list[MultiGraph]:
    """All canonical ``r``-regular graphs on ``n`` vertices, multiplicity <= cap."""
    if n == 0 or (n * r) % 2:
        return []
    if r == 0:
        return [MultiGraph(n, tuple((0,) * n for _ in range(n)))]
    if n == 1:
        return []
    adj = [[0] * n for _ in range(n)]
    deg = [0] * n
    if jobs <= 1 or n < 6:
        tables = list(_extend(adj, deg, 1, n, r, cap))
    else:
        split = min(n - 1, 4)
        seeds = list(_prefixes(adj, deg, 1, split, n, r, cap))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            tables = [t for chunk in pool.map(_worker, seeds) for t in chunk]
    return [MultiGraph(n, t) for t in tables]


def _prefixes(adj, deg, m, depth, n, r, cap):
    """Canonical partial states with ``depth`` vertices placed."""
    if m == depth:
        yield tuple(tuple(row) for row in adj), tuple(deg), m, n, r, cap
        return
    remaining = n - m - 1
    room = [min(cap, r - deg[i]) for i in range(m)]
    lo = max(0, r - cap * remaining)
    prev = [adj[i][m - 1] for i in range(m - 1)] if m >= 2 else None
    for col in _columns(m, prev, room, lo, r):
        for i, a in enumerate(col):
            adj[i][m] = adj[m][i] = a
            deg[i] += a
        deg[m] = sum(col)
        if _feasible(deg, m + 1, remaining, r, cap) and _is_max_labeling(adj, m + 1):
            yield from _prefixes(adj, deg, m + 1, depth, n, r, cap)
        for i, a in enumerate(col):
            adj[i][m] = adj[m][i] = 0
            deg[i] -= a
        deg[m] = 0


def enumerate_regular(
    n_vertices: int,
    r: int,
    graph_class: GraphClass = GraphClass.SimpleRegular,
    *,
    jobs: int = 1,
    max_vertices: int = MAX_VERTICES,
    max_degree: int = MAX_DEGREE,
) -> Iterator[MultiGraph]:
    """Yield one canonical representative per isomorphism class.

    Output is sorted by :func:`encode` so it does not depend on ``jobs``.
    Infeasible parameters (``n*r`` odd, or an odd vertex count for the
    perfect-matching classes) give an empty stream.
    """
    if n_vertices < 0 or r < 0:
        raise DomainError("vertex count and degree must be nonnegative")
    check_guard(n_vertices, r, max_vertices, max_degree)
    needs_even = graph_class in (
        GraphClass.SimpleBipartiteRegular,
        GraphClass.BipartiteMultiRegular,
        GraphClass.ColorableMultiRegular,
    )
    if (n_vertices * r) % 2 or (needs_even and n_vertices % 2):
        return
    simple = graph_class in (GraphClass.SimpleRegular, GraphClass.SimpleBipartiteRegular)
    graphs = _raw_regular(n_vertices, r, 1 if simple else max(r, 1), jobs)
    if graph_class in (GraphClass.SimpleBipartiteRegular, GraphClass.BipartiteMultiRegular):
        graphs = [g for g in graphs if is_bipartite(g) is not None]
    elif graph_class is GraphClass.ColorableMultiRegular:
        graphs = [g for g in graphs if is_colorable(g)]
    yield from sorted(graphs, key=encode)
