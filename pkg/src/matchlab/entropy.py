"""Monomer-dimer entropy curves in natural log, per vertex.

``h_aumc`` is the p-matching entropy of the disjoint union of infinitely
many ``K_{r,r}``.  It is the Legendre transform of the per-block matching
generating polynomial ``Phi(t) = sum_k C(r,k)^2 k! t^k``:

    h(p) = (1/(2r)) * min_s ( log Phi(e^s) - p r s ).

The minimizer solves ``t Phi'(t) / (r Phi(t)) = p``; the left side is the
mean dimer density of the block under fugacity ``t`` and increases in ``t``.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import IO

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import DomainError

CURVE_HEADER = ["p", "f_almc", "h_aumc", "upp1", "upp2"]


def _check_p(p: float):
    if not 0 <= p <= 1:
        raise DomainError(f"density p={p} outside [0, 1]")


def _xlogx(x: float) -> float:
    return x * math.log(x) if x > 0 else 0.0


def binary_entropy(p: float) -> float:
    _check_p(p)
    return -_xlogx(p) - _xlogx(1 - p)


def f_almc(p: float, r: int) -> float:
    """The conjectured lower curve ``f(p, r)``."""
    _check_p(p)
    if r < 2:
        raise DomainError("f(p, r) needs r >= 2")
    last = (r - p) * math.log1p(-p / r)
    return 0.5 * (p * math.log(r) - _xlogx(p) - 2 * _xlogx(1 - p) + last)


def block_series(r: int) -> list[int]:
    """Matching counts ``C(r,k)^2 k!`` of ``K_{r,r}``."""
    if r < 1:
        raise DomainError("need r >= 1")
    return [math.comb(r, k) ** 2 * math.factorial(k) for k in range(r + 1)]


def _log_phi(s: float, logc: np.ndarray, ks: np.ndarray) -> float:
    return float(logsumexp(logc + ks * s))


def _density(s: float, logc: np.ndarray, ks: np.ndarray, r: int) -> float:
    z = logc + ks * s
    w = np.exp(z - logsumexp(z))
    return float(w @ ks) / r


def saddle_point(p: float, r: int, tol: float = 1e-14) -> float:
    """``log t`` with block density ``p`` (for ``0 < p < 1``)."""
    _check_p(p)
    if not 0 < p < 1:
        raise DomainError("the saddle point exists only for 0 < p < 1")
    coeffs = block_series(r)
    logc = np.log(np.array(coeffs, dtype=float))
    ks = np.arange(r + 1, dtype=float)
    lo = math.log(p) - math.log(r) - 2.0
    hi = math.log(r / (1 - p)) + 2.0
    while _density(lo, logc, ks, r) > p:
        lo -= 5.0
    while _density(hi, logc, ks, r) < p:
        hi += 5.0
    return brentq(lambda s: _density(s, logc, ks, r) - p, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)


def h_infty_krr(p: float, r: int, tol: float = 1e-12) -> float:
    """p-matching entropy of the infinite disjoint union of ``K_{r,r}``."""
    _check_p(p)
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if r < 1:
        raise DomainError("need r >= 1")
    if p == 0:
        return 0.0
    if p == 1:
        return math.lgamma(r + 1) / (2 * r)
    s = saddle_point(p, r, min(tol, 1e-14))
    logc = np.log(np.array(block_series(r), dtype=float))
    ks = np.arange(r + 1, dtype=float)
    return (_log_phi(s, logc, ks) - p * r * s) / (2 * r)


@dataclass(frozen=True)
class OracleValue:
    value: float  # log phi(m, qK_{r,r}) / (2rq)
    count: int  # phi(m, qK_{r,r}), exact
    m: int
    realized_p: float


def _conv(a: Sequence[int], b: Sequence[int], cap: int) -> list[int]:
    out = [0] * min(len(a) + len(b) - 1, cap + 1)
    for i, x in enumerate(a):
        if x and i <= cap:
            for j in range(min(len(b), cap - i + 1)):
                out[i + j] += x * b[j]
    return out


def series_power(series: Sequence[int], q: int, cap: int | None = None) -> list[int]:
    """Coefficients of ``series^q`` up to degree ``cap`` by binary powering."""
    if q < 0:
        raise DomainError("power must be nonnegative")
    cap = (len(series) - 1) * q if cap is None else cap
    result, base = [1], list(series)
    while q:
        if q & 1:
            result = _conv(result, base, cap)
        q >>= 1
        if q:
            base = _conv(base, base, cap)
    return result


def finite_q_oracle(p: float, r: int, q: int) -> OracleValue:
    """Exact ``log phi(m, qK_{r,r}) / (2rq)`` with ``m = round(p r q)``."""
    _check_p(p)
    if q < 1 or r < 1:
        raise DomainError("need q, r >= 1")
    m = round(p * r * q)
    count = series_power(block_series(r), q, m)[m]
    return OracleValue(math.log(count) / (2 * r * q), count, m, m / (r * q))


def upp_curves(p: float, r: int) -> tuple[float, float]:
    """Per-vertex rates of the two k-matching upper bounds for bipartite r-regular graphs."""
    _check_p(p)
    if r < 1:
        raise DomainError("need r >= 1")
    h = binary_entropy(p)
    return h + p * math.lgamma(r + 1) / (2 * r), 0.5 * (h + p * math.log(r))


def curve_rows(r: int, grid: int) -> list[tuple[float, float, float, float, float]]:
    if grid < 2:
        raise DomainError("grid resolution must be at least 2")
    if r < 2:
        raise DomainError("curves need r >= 2")
    rows = []
    for i in range(grid):
        p = i / (grid - 1)
        u1, u2 = upp_curves(p, r)
        rows.append((p, f_almc(p, r), h_infty_krr(p, r), u1, u2))
    return rows


def emit_curves(r: int, grid: int, out: IO[str], annotations: dict[str, Sequence[float]] | None = None):
    """CSV ``p,f_almc,h_aumc,upp1,upp2`` (nats per vertex), plus optional annotation columns."""
    rows = curve_rows(r, grid)
    extra = sorted(annotations or {})
    for name in extra:
        if len(annotations[name]) != grid:
            raise DomainError(f"annotation column {name!r} has the wrong length")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CURVE_HEADER + extra)
    for i, row in enumerate(rows):
        writer.writerow([f"{v:.12g}" for v in row] + [f"{annotations[n][i]:.12g}" for n in extra])
    return rows
