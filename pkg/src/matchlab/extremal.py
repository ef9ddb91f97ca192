"""Exact extremal k-matching counts over small regular graph classes.

The five quantities are optima of ``phi(k, G)`` over r-regular graphs on
``2n`` vertices:

=========  ===  =====================================
Theta      max  simple graphs
Lambda     max  simple bipartite graphs
theta      min  multigraphs
omega      min  multigraphs split into r perfect matchings
lambda     min  bipartite multigraphs
=========  ===  =====================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import DomainError, GuardError
from .graphs import (
    GUARD_ENV,
    GraphClass,
    MultiGraph,
    disjoint_copies,
    disjoint_union,
    encode,
    enumerate_regular,
    guard_overridden,
    make_complete_bipartite,
    make_cycle,
    scale_multiplicity,
)
from .matching import MatchSeries, match_series

QUANTITIES = {
    "Theta": (GraphClass.SimpleRegular, max),
    "Lambda": (GraphClass.SimpleBipartiteRegular, max),
    "theta": (GraphClass.MultiRegular, min),
    "omega": (GraphClass.ColorableMultiRegular, min),
    "lambda": (GraphClass.BipartiteMultiRegular, min),
}


@dataclass(frozen=True)
class ExtremalResult:
    quantity: str
    k: int
    n: int
    r: int
    value: int | None  # None when the class is empty
    witnesses: tuple[str, ...] = ()
    enumeration_size: int = 0

    @property
    def empty(self) -> bool:
        return self.enumeration_size == 0

    def csv_row(self) -> str:
        value = "empty" if self.empty else self.value
        return f"{self.quantity},{self.k},{self.n},{self.r},{value},{len(self.witnesses)}"


EXTREMAL_CSV_HEADER = "quantity,k,n,r,value,num_witnesses"


def check_extremal_guard(n: int, r: int):
    limit = 12 if r == 2 else 10
    if 2 * n > limit and not guard_overridden():
        raise GuardError(f"2n={2 * n} exceeds the extremal-search guard 2n <= {limit} for r={r}; "
                         f"set {GUARD_ENV}=1 to override")


@lru_cache(maxsize=64)
def class_series(n_vertices: int, r: int, graph_class: GraphClass, jobs: int = 1) -> tuple[tuple[str, MatchSeries], ...]:
    """Canonical encodings and match series of every graph in a class."""
    graphs = enumerate_regular(n_vertices, r, graph_class, jobs=jobs, max_vertices=max(12, n_vertices))
    return tuple((encode(g), match_series(g)) for g in graphs)


def extremal(quantity: str, k: int, n: int, r: int, *, jobs: int = 1) -> ExtremalResult:
    """Exact optimum of ``phi(k, .)`` with every attaining graph as witness."""
    if quantity not in QUANTITIES:
        raise DomainError(f"unknown quantity {quantity!r}; expected one of {sorted(QUANTITIES)}")
    if not (1 <= k <= n):
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if r < 1:
        raise DomainError("degree r must be at least 1")
    check_extremal_guard(n, r)
    graph_class, pick = QUANTITIES[quantity]
    items = class_series(2 * n, r, graph_class, jobs)
    if not items:
        return ExtremalResult(quantity, k, n, r, None, (), 0)
    value = pick(s[k] for _, s in items)
    witnesses = tuple(code for code, s in items if s[k] == value)
    return ExtremalResult(quantity, k, n, r, int(value), witnesses, len(items))


# --- conjecture and closed-form checks -----------------------------------


@dataclass(frozen=True)
class CheckRow:
    check: str
    k: int
    expected: int
    observed: int | None
    holds: bool
    counterexamples: tuple[str, ...] = ()

    def csv_row(self) -> str:
        obs = "empty" if self.observed is None else self.observed
        return f"{self.check},{self.k},{self.expected},{obs},{'pass' if self.holds else 'fail'}"


CHECK_CSV_HEADER = "check,k,expected,observed,verdict"


def verify_umc(q: int, r: int, k_max: int | None = None, *, jobs: int = 1) -> list[CheckRow]:
    """Compare ``Theta(k, qr, r)`` with ``phi(k, qK_{r,r})`` for ``k = 1..k_max``."""
    if q < 1 or r < 1:
        raise DomainError("need q, r >= 1")
    within = (r <= 2 and q * r <= 6) or (r == 3 and q == 1)
    if not within and not guard_overridden():
        raise GuardError(f"UMC check for q={q}, r={r} is beyond desk scale (r=2, q<=3 or r=3, q=1); "
                         f"set {GUARD_ENV}=1 to override")
    n = q * r
    k_max = n if k_max is None else k_max
    if not (1 <= k_max <= n):
        raise DomainError(f"k_max must lie in 1..{n}")
    target = match_series(disjoint_copies(make_complete_bipartite(r), q))
    items = class_series(2 * n, r, GraphClass.SimpleRegular, jobs)
    rows = []
    for k in range(1, k_max + 1):
        best = max(s[k] for _, s in items)
        beaters = tuple(code for code, s in items if s[k] > target[k])
        rows.append(CheckRow(f"umc q={q} r={r}", k, int(target[k]), int(best), best == target[k], beaters))
    return rows


def theta_r2_extremizer(n: int) -> MultiGraph:
    """``qC_3``, ``qC_3 + C_4`` or ``qC_3 + C_5`` according to ``2n mod 3``."""
    m = 2 * n
    tri = make_cycle(3)
    if m % 3 == 0:
        return disjoint_copies(tri, m // 3)
    if m % 3 == 1:
        q, extra = (m - 4) // 3, make_cycle(4)
    else:
        q, extra = (m - 5) // 3, make_cycle(5)
    if q < 0:
        raise DomainError(f"no triangle decomposition for 2n={m}")
    return disjoint_union(*([tri] * q), extra) if q else extra


def verify_r2_formulas(n: int, *, jobs: int = 1) -> list[CheckRow]:
    """lambda(k,n,2) = phi(k,C_2n), omega = lambda, theta from the triangle covers."""
    if n < 2:
        raise DomainError("need n >= 2")
    check_extremal_guard(n, 2)
    cyc = match_series(make_cycle(2 * n))
    tri = match_series(theta_r2_extremizer(n))
    rows = []
    for k in range(1, n + 1):
        lam = extremal("lambda", k, n, 2, jobs=jobs)
        om = extremal("omega", k, n, 2, jobs=jobs)
        th = extremal("theta", k, n, 2, jobs=jobs)
        rows.append(CheckRow("lambda=phi(C_2n)", k, int(cyc[k]), lam.value, lam.value == cyc[k]))
        rows.append(CheckRow("omega=lambda", k, int(lam.value), om.value, om.value == lam.value))
        rows.append(CheckRow("theta=phi(qC3+...)", k, int(tri[k]), th.value, th.value == tri[k]))
    return rows


@dataclass(frozen=True)
class GuaranteedMatchVerdict:
    n_vertices: int
    r: int
    bound: int  # ceil(m / 3)
    holds: bool
    min_max_matching: int | None
    enumeration_size: int
    tight_witnesses: tuple[str, ...] = ()
    violators: tuple[str, ...] = ()
    # the "phi(k,G) >= 1 for k <= 2n/3" reading with 2n = m vertices
    floor_reading_bound: int = 0
    floor_reading_holds: bool = True
    notes: tuple[str, ...] = field(default_factory=tuple)


def verify_guaranteed_match(n_vertices: int, r: int, *, jobs: int = 1) -> GuaranteedMatchVerdict:
    """Every r-regular loopless multigraph on m vertices has a ceil(m/3)-matching."""
    m = n_vertices
    if m < 1 or r < 1:
        raise DomainError("need at least one vertex and r >= 1")
    bound = math.ceil(m / 3)
    floor_bound = (2 * m) // 6  # k <= 2n/3 with 2n = m
    items = class_series(m, r, GraphClass.MultiRegular, jobs)
    if not items:
        return GuaranteedMatchVerdict(m, r, bound, True, None, 0, floor_reading_bound=floor_bound,
                                      notes=("empty class",))
    sizes = {code: s.max_matching for code, s in items}
    low = min(sizes.values())
    violators = tuple(c for c, v in sizes.items() if v < bound)
    tight = tuple(c for c, v in sizes.items() if v == bound)
    notes = []
    if floor_bound != bound:
        notes.append(f"ceil(m/3)={bound} and floor(2n/3)={floor_bound} differ; ceil form is the stronger claim")
    return GuaranteedMatchVerdict(
        m, r, bound, not violators, low, len(items), tight, violators,
        floor_bound, all(v >= floor_bound for v in sizes.values()), tuple(notes),
    )


def triangle_multigraph(l: int) -> MultiGraph:
    """Three vertices pairwise joined by ``l`` parallel edges (2l-regular)."""
    return scale_multiplicity(make_cycle(3), l)
