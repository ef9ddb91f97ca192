import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchlab.errors import DomainError, GuardError
from matchlab.graphs import (
    GUARD_ENV,
    GraphClass,
    MultiGraph,
    build_graph,
    canonical_form,
    classify,
    color_classes,
    decode,
    disjoint_copies,
    encode,
    enumerate_regular,
    is_bipartite,
    is_colorable,
    is_isomorphic,
    is_regular,
    make_complete,
    make_complete_bipartite,
    make_cycle,
    perfect_matchings,
    scale_multiplicity,
)

from oracles import brute_canon, brute_colorable, brute_regular


@st.composite
def multigraphs(draw, max_n=6, max_mult=3):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mults = draw(st.lists(st.integers(0, max_mult), min_size=len(pairs), max_size=len(pairs)))
    return build_graph(n, [(i, j, m) for (i, j), m in zip(pairs, mults) if m])


def test_build_accumulates_repeated_pairs():
    g = build_graph(3, [(0, 1), (1, 0), (1, 2, 3)])
    assert g.adjacency[0][1] == 2 and g.adjacency[1][2] == 3
    assert g.degrees == (2, 5, 3)
    assert g.num_edges == 5


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 3)], [(0, 1, 0)], [(-1, 1)]])
def test_build_rejects_bad_edges(edges):
    with pytest.raises(DomainError):
        build_graph(3, edges)


def test_asymmetric_table_rejected():
    with pytest.raises(DomainError):
        MultiGraph(2, ((0, 1), (0, 0)))


def test_constructors():
    assert is_regular(make_complete_bipartite(3)) == 3
    assert is_regular(make_cycle(5)) == 2
    assert make_cycle(2).adjacency == ((0, 2), (2, 0))
    assert is_regular(make_complete(5)) == 4
    assert disjoint_copies(make_cycle(3), 2).n == 6
    with pytest.raises(DomainError):
        make_cycle(1)


def test_bipartite_detection():
    assert is_bipartite(make_cycle(6)) is not None
    assert is_bipartite(make_cycle(5)) is None
    left, right = is_bipartite(make_complete_bipartite(2, 3))
    assert sorted(map(len, (left, right))) == [2, 3]


def test_perfect_matchings_of_k4():
    assert len(list(perfect_matchings(make_complete(4)))) == 3
    assert list(perfect_matchings(make_cycle(3))) == []


def test_color_classes_partition_edges():
    g = scale_multiplicity(make_cycle(4), 2)
    classes = color_classes(g)
    assert classes is not None and len(classes) == 4
    used = [e for m in classes for e in m]
    assert sorted(used) == sorted((u, v) for u, v, m in g.edges() for _ in range(m))


def test_triangle_multigraph_not_colorable():
    # odd vertex count has no perfect matching
    assert not is_colorable(scale_multiplicity(make_cycle(3), 2))


def test_classify_tags():
    tags = classify(make_complete_bipartite(3))
    assert tags == {GraphClass.SimpleRegular, GraphClass.SimpleBipartiteRegular, GraphClass.MultiRegular,
                    GraphClass.BipartiteMultiRegular, GraphClass.ColorableMultiRegular}
    assert GraphClass.BipartiteMultiRegular not in classify(make_complete(4))
    assert classify(build_graph(3, [(0, 1)])) == set()


def test_encode_decode_roundtrip():
    g = build_graph(4, [(0, 1, 3), (2, 3, 12)])
    assert decode(encode(g)) == g
    assert encode(g).startswith("4:")


@settings(max_examples=60, deadline=None)
@given(multigraphs(), st.randoms(use_true_random=False))
def test_canonical_form_is_invariant(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    assert canonical_form(g.relabel(perm)) == canonical_form(g)


@settings(max_examples=60, deadline=None)
@given(multigraphs(max_n=5), multigraphs(max_n=5))
def test_canonical_form_separates_like_brute_force(g, h):
    assert (canonical_form(g) == canonical_form(h)) == (g.n == h.n and brute_canon(g) == brute_canon(h))


@pytest.mark.parametrize("n,r,count", [(4, 1, 1), (6, 2, 2), (6, 3, 2), (8, 3, 6), (10, 3, 21), (10, 4, 60)])
def test_simple_regular_counts(n, r, count):
    # counts of all (not necessarily connected) r-regular graphs
    assert len(list(enumerate_regular(n, r))) == count


@pytest.mark.parametrize("n,r", [(4, 2), (4, 3), (5, 2), (5, 4), (6, 2), (6, 3)])
def test_multigraph_enumeration_matches_brute_force(n, r):
    got = {brute_canon(g) for g in enumerate_regular(n, r, GraphClass.MultiRegular)}
    assert got == brute_regular(n, r, r)


@pytest.mark.parametrize("n,r", [(5, 2), (6, 3), (6, 4), (7, 2)])
def test_simple_enumeration_matches_brute_force(n, r):
    got = [brute_canon(g) for g in enumerate_regular(n, r)]
    assert len(got) == len(set(got))
    assert set(got) == brute_regular(n, r, 1)


@pytest.mark.parametrize("n,r", [(4, 2), (6, 2), (6, 3)])
def test_colorable_filter_matches_brute_force(n, r):
    ours = {encode(g) for g in enumerate_regular(n, r, GraphClass.ColorableMultiRegular)}
    brute = {encode(g) for g in enumerate_regular(n, r, GraphClass.MultiRegular) if brute_colorable(g, r)}
    assert ours == brute


def test_enumeration_output_is_canonical_and_regular():
    for g in enumerate_regular(8, 3, GraphClass.MultiRegular):
        assert is_regular(g) == 3
        assert canonical_form(g) == encode(g)


def test_empty_streams():
    assert list(enumerate_regular(5, 3)) == []
    assert list(enumerate_regular(5, 2, GraphClass.BipartiteMultiRegular)) == []


def test_parallel_enumeration_is_identical():
    a = [encode(g) for g in enumerate_regular(10, 3, jobs=1)]
    b = [encode(g) for g in enumerate_regular(10, 3, jobs=2)]
    assert a == b


def test_guard(monkeypatch):
    monkeypatch.delenv(GUARD_ENV, raising=False)
    with pytest.raises(GuardError):
        list(enumerate_regular(14, 3))
    with pytest.raises(GuardError):
        list(enumerate_regular(6, 5, GraphClass.MultiRegular))


def test_isomorphism_of_relabelled_petersen_like_prism():
    prism = build_graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)])
    perm = [3, 1, 5, 0, 4, 2]
    assert is_isomorphic(prism, prism.relabel(perm))
    assert not is_isomorphic(prism, make_complete_bipartite(3))
