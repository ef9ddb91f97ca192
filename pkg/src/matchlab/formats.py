"""Plain-text graph and matrix files.

Edge list::

    # comment lines and blank lines are ignored
    6 6          <- vertex count, number of edge lines
    0 1          <- u v [multiplicity]
    1 2 2

Rational matrix::

    3 3          <- rows cols
    1/3 1/3 1/3
    0 1/2 1/2
    ...

Matrix entries are integers, ``p/q`` fractions or decimals (read exactly).
"""

from __future__ import annotations

from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path

from .errors import DomainError
from .graphs import MultiGraph, build_graph


def _content_lines(text: str) -> list[list[str]]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line.split())
    return out


def _int(tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise DomainError(f"expected an integer for {what}, got {tok!r}") from None


def parse_graph(text: str) -> MultiGraph:
    lines = _content_lines(text)
    if not lines or len(lines[0]) != 2:
        raise DomainError("edge list must start with a 'n m' header")
    n, m = (_int(t, "header") for t in lines[0])
    body = lines[1:]
    if len(body) != m:
        raise DomainError(f"header announces {m} edge lines, found {len(body)}")
    edges = []
    for toks in body:
        if len(toks) not in (2, 3):
            raise DomainError(f"edge line needs 'u v [mult]', got {' '.join(toks)!r}")
        edges.append(tuple(_int(t, "edge") for t in toks))
    return build_graph(n, edges)


def format_graph(g: MultiGraph) -> str:
    edges = list(g.edges())
    lines = [f"{g.n} {len(edges)}"]
    lines += [f"{u} {v}" if mult == 1 else f"{u} {v} {mult}" for u, v, mult in edges]
    return "\n".join(lines) + "\n"


def _fraction(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a rational number: {tok!r}") from None


def parse_matrix(text: str) -> list[list[Fraction]]:
    lines = _content_lines(text)
    if not lines or len(lines[0]) != 2:
        raise DomainError("matrix file must start with a 'rows cols' header")
    rows, cols = (_int(t, "header") for t in lines[0])
    body = lines[1:]
    if len(body) != rows:
        raise DomainError(f"header announces {rows} rows, found {len(body)}")
    out = []
    for toks in body:
        if len(toks) != cols:
            raise DomainError(f"row has {len(toks)} entries, expected {cols}")
        out.append([_fraction(t) for t in toks])
    return out


def format_matrix(m: Sequence[Sequence]) -> str:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    lines = [f"{rows} {cols}"] + [" ".join(str(Fraction(v)) for v in row) for row in m]
    return "\n".join(lines) + "\n"


def read_graph(path: str | Path) -> MultiGraph:
    return parse_graph(Path(path).read_text())


def write_graph(g: MultiGraph, path: str | Path):
    Path(path).write_text(format_graph(g))


def read_matrix(path: str | Path) -> list[list[Fraction]]:
    return parse_matrix(Path(path).read_text())


def write_matrix(m: Sequence[Sequence], path: str | Path):
    Path(path).write_text(format_matrix(m))
