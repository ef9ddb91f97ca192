"""``matchlab`` command line.

Machine-readable output (CSV, JSON lines) goes to stdout or ``--out``;
human-readable summaries go to stderr.  Exit codes: 0 success, 1 rejected
input, 2 resource guard, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from collections.abc import Sequence
from fractions import Fraction

from . import bounds, capacity, entropy, extremal, formats, matching, polytope
from .errors import DomainError, GuardError

EXIT_OK, EXIT_DOMAIN, EXIT_GUARD, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(f"{self.prog}: {message}")


def _note(msg: str):
    print(msg, file=sys.stderr)


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError(f"{args.command} needs {', '.join(missing)}")


# --- subcommands -----------------------------------------------------------------


def cmd_count(args, out):
    _require(args, "graph")
    g = formats.read_graph(args.graph)
    series = matching.match_series(g)
    if args.k is not None:
        out.write(f"{matching.phi(args.k, g)}\n")
    else:
        out.write(series.to_csv())
    _note(f"{g.n} vertices, {g.num_edges} edges, largest matching {series.max_matching}")


def cmd_haffnian(args, out):
    _require(args, "matrix")
    m = formats.read_matrix(args.matrix)
    if args.perm:
        _require(args, "k")
        out.write(f"{matching.perm_k(m, args.k)}\n")
        return
    if args.k is not None:
        out.write(f"{matching.haffnian(m, args.k)}\n")
    else:
        out.write(matching.haffnian_series(m).to_csv())


def cmd_bounds(args, out):
    if args.graph is not None:
        _require(args, "k")
        reports = bounds.graph_bounds(formats.read_graph(args.graph), args.k)
        bad = [r.name for r in reports if r.verdict == "violated"]
        _note("all applicable bounds hold" if not bad else f"violated: {', '.join(bad)}")
    else:
        _require(args, "k", "n", "r")
        reports = [bounds.theta_upper(args.k, args.n, args.r), bounds.lambda_upper(args.k, args.n, args.r)]
        reports += bounds.bipartite_catalog(args.k, args.n, args.r)
    out.write(bounds.reports_to_csv(reports))


def cmd_search(args, out):
    _require(args, "quantity", "k", "n", "r")
    res = extremal.extremal(args.quantity, args.k, args.n, args.r, jobs=args.jobs)
    if args.emit_witnesses:
        out.write("quantity,k,n,r,value,witness\n")
        for code in res.witnesses:
            out.write(f"{res.quantity},{res.k},{res.n},{res.r},{res.value},{code}\n")
    else:
        out.write(extremal.EXTREMAL_CSV_HEADER + "\n" + res.csv_row() + "\n")
    _note(f"{args.quantity}({args.k},{args.n},{args.r}) over {res.enumeration_size} graphs: "
          f"{'empty class' if res.empty else res.value}")


def cmd_verify(args, out):
    chosen = [args.r2_formulas, args.umc, args.guaranteed_match]
    if sum(chosen) != 1:
        raise DomainError("verify needs exactly one of --r2-formulas, --umc, --guaranteed-match")
    if args.r2_formulas:
        _require(args, "n")
        rows = extremal.verify_r2_formulas(args.n, jobs=args.jobs)
    elif args.umc:
        _require(args, "q", "r")
        rows = extremal.verify_umc(args.q, args.r, args.k, jobs=args.jobs)
    else:
        _require(args, "n", "r")
        v = extremal.verify_guaranteed_match(2 * args.n, args.r, jobs=args.jobs)
        out.write("vertices,r,bound,min_max_matching,graphs,verdict\n")
        verdict = "pass" if v.holds else "fail"
        out.write(f"{v.n_vertices},{v.r},{v.bound},{v.min_max_matching},{v.enumeration_size},{verdict}\n")
        for note in v.notes:
            _note(note)
        return
    out.write(extremal.CHECK_CSV_HEADER + "\n")
    for row in rows:
        out.write(row.csv_row() + "\n")
    failed = sum(not r.holds for r in rows)
    _note(f"{len(rows) - failed}/{len(rows)} checks pass")


def cmd_capacity(args, out):
    _require(args, "matrix", "k")
    a = formats.read_matrix(args.matrix)
    poly = capacity.mixed_polynomial(a, args.k) if args.mixed else capacity.ElementaryOnRows(a, args.k)
    tol = 1e-8 if args.tol is None else args.tol
    res = capacity.capacity(poly, tol, max_iter=args.budget or 20000)
    out.write(res.csv())
    if res.converged:
        _note(f"capacity in [{res.lower!r}, {res.upper!r}] after {res.iterations} iterations")
    else:
        _note(f"NOT CONVERGED: {res.message}")


def cmd_polytope(args, out):
    if args.action == "check":
        if args.graph is not None:
            v = polytope.regular_graph_in_polytope(formats.read_graph(args.graph))
            out.write("member,odd_cut_ok,violating_set\n")
            bad = v.edmonds.violating_set or v.small_cut
            out.write(f"{v.member},{v.odd_cut_ok},{' '.join(map(str, bad or ()))}\n")
            return
        _require(args, "matrix")
        ver = polytope.in_edmonds_polytope(formats.read_matrix(args.matrix))
        out.write("member,violating_set,excess\n")
        vs = " ".join(map(str, ver.violating_set or ()))
        out.write(f"{ver.member},{vs},{'' if ver.excess is None else ver.excess}\n")
    elif args.action == "extreme":
        _require(args, "matrix")
        dec = polytope.katz_is_extreme(formats.read_matrix(args.matrix))
        out.write("extreme,blocks\n")
        if dec is None:
            out.write("False,\n")
        else:
            blocks = ";".join(f"{b.kind}:{' '.join(map(str, b.vertices))}" for b in dec.blocks)
            out.write(f"True,{blocks}\n")
    else:
        _require(args, "k", "n")
        trace = io.StringIO()
        rec = polytope.minimize_haffnian(args.k, 2 * args.n, args.budget or 200, seed=args.seed, trace=trace)
        if args.trace:
            with open(args.trace, "w") as fh:
                fh.write(trace.getvalue())
        else:
            sys.stderr.write(trace.getvalue())
        out.write("k,two_n,upper_bound_on_mu,upper_bound_float,exact_minimum\n")
        out.write(f"{rec.k},{rec.two_n},{rec.best_value},{float(rec.best_value)!r},{rec.exact_minimum}\n")
        for note in rec.notes:
            _note(note)


def cmd_entropy(args, out):
    _require(args, "r")
    rows = entropy.emit_curves(args.r, args.grid or 101, out)
    _note(f"{len(rows)} rows, values in nats per vertex")


COMMANDS = {
    "count": cmd_count,
    "haffnian": cmd_haffnian,
    "bounds": cmd_bounds,
    "search": cmd_search,
    "verify": cmd_verify,
    "capacity": cmd_capacity,
    "polytope": cmd_polytope,
    "entropy": cmd_entropy,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--k", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--r", type=int)
    common.add_argument("--q", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--grid", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--graph", help="edge-list file")
    common.add_argument("--matrix", help="rational matrix file")

    parser = _Parser(prog="matchlab", description="Exact k-matching counts, bounds and related experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("count", parents=[common], help="k-matching counts of a graph")
    p = sub.add_parser("haffnian", parents=[common], help="k-haffnian of a symmetric matrix")
    p.add_argument("--perm", action="store_true", help="k-permanent of a general matrix instead")
    sub.add_parser("bounds", parents=[common], help="bound catalog for (k, n, r) or a graph")
    p = sub.add_parser("search", parents=[common], help="exact extremal k-matching counts")
    p.add_argument("--quantity", choices=sorted(extremal.QUANTITIES))
    p.add_argument("--emit-witnesses", action="store_true")
    p = sub.add_parser("verify", parents=[common], help="conjecture and closed-form checks")
    p.add_argument("--r2-formulas", action="store_true")
    p.add_argument("--umc", action="store_true")
    p.add_argument("--guaranteed-match", action="store_true")
    p = sub.add_parser("capacity", parents=[common], help="capacity of p_{k,A}")
    p.add_argument("--mixed", action="store_true", help="use (x_1+...+x_n)^{n-k} p_{k,A}")
    p = sub.add_parser("polytope", parents=[common], help="perfect matching polytope tools")
    p.add_argument("action", choices=["check", "extreme", "minimize"])
    p.add_argument("--trace", help="JSON-lines trace file for minimize")
    sub.add_parser("entropy", parents=[common], help="entropy curves as CSV")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.jobs < 1:
            raise DomainError("--jobs must be positive")
        buf = io.StringIO()
        COMMANDS[args.command](args, buf)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return EXIT_OK
    except GuardError as exc:
        _note(f"guard: {exc}")
        return EXIT_GUARD
    except DomainError as exc:
        _note(f"error: {exc}")
        return EXIT_DOMAIN
    except OSError as exc:
        _note(f"i/o error: {exc}")
        return EXIT_IO


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
