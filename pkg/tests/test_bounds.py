import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchlab.bounds import (
    CSV_HEADER,
    LOG_TOL,
    aef_certificate,
    aef_upper,
    bregman_certificate,
    bregman_upper,
    fg_lower,
    fg_terms,
    graph_bounds,
    gurvits_lower,
    gurvits_perm_lower,
    lambda_upper,
    lmc_lower,
    reports_to_csv,
    schrijver_lower,
    theta_upper,
    tverberg_lower,
    tverberg_mu,
)
from matchlab.errors import DomainError
from matchlab.graphs import (
    GraphClass,
    build_graph,
    enumerate_regular,
    make_complete,
    make_complete_bipartite,
    make_cycle,
    scale_multiplicity,
)
from matchlab.matching import match_series, perm_k, permanent, phi


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


# --- Bregman ---------------------------------------------------------------


def test_bregman_examples():
    ones = [[1] * 3 for _ in range(3)]
    assert close(bregman_upper(ones).value, 6)
    assert bregman_upper(ones).check(permanent(ones)) == "holds"
    ident = [[int(i == j) for j in range(3)] for i in range(3)]
    assert close(bregman_upper(ident).value, 1)
    circ = [[1, 1, 0], [0, 1, 1], [1, 0, 1]]
    assert permanent(circ) == 2
    assert close(bregman_upper(circ).value, 2 ** 1.5)


def test_bregman_rejects_non_binary():
    with pytest.raises(DomainError):
        bregman_upper([[2, 0], [0, 1]])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_bregman_certificate_agrees_with_log_comparison_exhaustively(n):
    for bits in itertools.product((0, 1), repeat=n * n):
        b = [list(bits[i * n:(i + 1) * n]) for i in range(n)]
        p = permanent(b)
        log_verdict = bregman_upper(b).check(p)
        assert bregman_certificate(b, p)
        assert log_verdict == "holds"


@settings(max_examples=300, deadline=None)
@given(st.just(5).flatmap(lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                                                      min_size=n, max_size=n)))
def test_bregman_certificate_agrees_sampled(b):
    p = permanent(b)
    assert bregman_certificate(b, p) == (bregman_upper(b).check(p) == "holds")


# --- AEF -----------------------------------------------------------------------


def test_aef_examples():
    c4 = make_cycle(4)
    rep = aef_upper(c4)
    assert close(rep.value, 2) and rep.check(phi(2, c4)) == "holds"
    k4 = make_complete(4)
    assert close(aef_upper(k4).value, 6 ** (4 / 6))
    assert aef_certificate(k4, phi(2, k4))
    two_edges = build_graph(4, [(0, 1), (2, 3)])
    assert close(aef_upper(two_edges).value, 1)


def test_aef_rejections():
    with pytest.raises(DomainError):
        aef_upper(make_cycle(2))
    with pytest.raises(DomainError):
        aef_upper(build_graph(4, [(0, 1)]))


# --- theta / lambda upper bounds ----------------------------------------------------


def test_theta_upper_examples():
    rep = theta_upper(3, 3, 3)
    assert close(rep.value, 6) and rep.branch == "subgraph"
    rep = theta_upper(2, 3, 2)
    assert close(rep.value, 15) and rep.branch == "vertex-choice"
    with pytest.raises(DomainError):
        theta_upper(4, 3, 3)


@pytest.mark.parametrize("n,r", [(2, 2), (3, 3), (5, 4)])
def test_lambda_upper_k1_is_edge_count(n, r):
    rep = lambda_upper(1, n, r)
    assert close(rep.value, n * r, 1e-9)


# --- lower bounds ----------------------------------------------------------------------


@pytest.mark.parametrize("r", [2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_lmc_at_k_equal_n_is_schrijver(n, r):
    assert lmc_lower(n, n, r).exact == schrijver_lower(n, r).exact


def test_lmc_examples():
    assert lmc_lower(1, 1, 3).exact == Fraction(4, 3)
    assert lmc_lower(1, 2, 2).exact == Fraction(27, 16)
    assert not lmc_lower(1, 2, 2).proven


def test_schrijver_examples():
    assert schrijver_lower(1, 3).exact == Fraction(4, 3)
    for n in range(1, 6):
        assert schrijver_lower(n, 2).exact == 1
        assert phi(n, make_cycle(2 * n)) == 2
    with pytest.raises(DomainError):
        schrijver_lower(3, 1)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_gurvits_perm_lower_on_uniform(n):
    u = [[Fraction(1, n)] * n for _ in range(n)]
    rep = gurvits_perm_lower(u, n)
    assert rep.check(Fraction(math.factorial(n), n**n)) == "holds"


def test_gurvits_perm_lower_rejects_wide_columns():
    u = [[Fraction(1, 3)] * 3 for _ in range(3)]
    with pytest.raises(DomainError):
        gurvits_perm_lower(u, 2)
    with pytest.raises(DomainError):
        gurvits_perm_lower([[1, 0], [1, 0]])


def test_gurvits_improves_schrijver():
    for r in (2, 3, 4):
        for n in (2, 5):
            assert gurvits_lower(n, r).exact >= schrijver_lower(n, r).exact


def test_gurvits_lower_when_r_exceeds_n():
    # a triple edge: lambda(1,1,3) = 3, while the uncapped formula gives 27/8
    assert gurvits_lower(1, 3).exact <= 3
    for two_n in (2, 4):
        for r in (3, 4):
            for g in enumerate_regular(two_n, r, GraphClass.BipartiteMultiRegular):
                assert gurvits_lower(two_n // 2, r).check(phi(two_n // 2, g)) == "holds"


def test_fg_examples():
    assert fg_lower(2, 4, 2).exact <= phi(2, make_cycle(8)) == 20
    rep = fg_lower(1, 3, 3)
    assert not rep.available and rep.branch == "empty s-range"
    assert rep.check(5) == "unavailable"
    assert set(fg_terms(2, 6, 2)) == {1, 2, 3, 4}


def test_fg_at_k_n_below_enumerated_minimum():
    for n in (3, 4):
        for r in (2, 3):
            if n <= r:
                continue
            least = min(s[n] for s in map(match_series,
                        enumerate_regular(2 * n, r, GraphClass.BipartiteMultiRegular)))
            assert fg_lower(n, n, r).check(least) == "holds"
            assert schrijver_lower(n, r).check(least) == "holds"


@pytest.mark.parametrize("n", range(1, 7))
def test_tverberg_mu_is_perm_k_of_uniform(n):
    u = [[Fraction(1, n)] * n for _ in range(n)]
    for k in range(1, n + 1):
        assert tverberg_mu(k, n) == perm_k(u, k)


def test_tverberg_examples():
    assert tverberg_mu(1, 2) == 2
    assert tverberg_mu(3, 3) == Fraction(2, 9)
    assert tverberg_mu(1, 3) == 3
    assert tverberg_lower(2, 3, 2).exact == 4 * tverberg_mu(2, 3)


# --- reports -----------------------------------------------------------------------


def test_log_verdict_uses_tolerance():
    rep = theta_upper(3, 3, 3)  # value 6 in log space
    assert rep.check(6) == "holds"
    assert rep.check(Fraction(6) * (1 + Fraction(1, 10**6))) == "violated"
    assert rep.tolerance == LOG_TOL


def test_csv_report():
    text = reports_to_csv([theta_upper(3, 3, 3).compared(6, "Theta(3,3,3)")])
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("theta_upper,3,3,3,") and lines[1].endswith("Theta(3,3,3),holds")


def test_graph_bounds_on_k33():
    reps = graph_bounds(make_complete_bipartite(3), 3)
    names = {r.name for r in reps}
    assert {"theta_upper", "lambda_upper", "aef", "bregman", "schrijver", "gurvits", "lmc"} <= names
    assert all(r.verdict == "holds" for r in reps)


def test_multigraph_gets_only_lower_bounds():
    reps = graph_bounds(scale_multiplicity(make_cycle(4), 2), 2)
    assert all(r.direction == "lower" for r in reps)
    with pytest.raises(DomainError):
        graph_bounds(build_graph(3, [(0, 1)]), 1)
