import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchlab.capacity import (
    ElementaryOnRows,
    Expanded,
    Product,
    QuadraticForm,
    capacity,
    check_capacity_step,
    mixed_derivative_identity_check,
    mixed_polynomial,
    partial_at_zero,
    random_doubly_stochastic,
    sinkhorn_balance,
    sum_power,
)
from matchlab.errors import DomainError
from matchlab.graphs import make_complete
from matchlab.matching import perm_k

half = Fraction(1, 2)
J2 = [[half, half], [half, half]]

pos = st.fractions(min_value=Fraction(1, 5), max_value=5, max_denominator=9)


def test_evaluate_examples():
    assert ElementaryOnRows(J2, 1).evaluate([1, 1]) == 2
    assert ElementaryOnRows(J2, 2).evaluate([2, half]) == Fraction(25, 16)
    assert QuadraticForm(make_complete(4).adjacency).evaluate([1] * 4) == 12
    prod = ElementaryOnRows(J2, 1) * ElementaryOnRows(J2, 2)
    assert prod.evaluate([2, half]) == Fraction(5, 2) * Fraction(25, 16)


@pytest.mark.parametrize("bad", [
    lambda: ElementaryOnRows([[1, 0], [0, 0]], 1),
    lambda: ElementaryOnRows([[1, -1], [0, 1]], 1),
    lambda: ElementaryOnRows(J2, 3),
    lambda: ElementaryOnRows(J2, 1).evaluate([1, 1, 1]),
    lambda: ElementaryOnRows(J2, 1).evaluate([1, 0]),
    lambda: QuadraticForm([[0, 1], [2, 0]]),
])
def test_rejections(bad):
    with pytest.raises(DomainError):
        bad()


@st.composite
def structured(draw):
    n = draw(st.integers(1, 4))
    a = [[draw(pos) for _ in range(n)] for _ in range(draw(st.integers(1, 4)))]
    k = draw(st.integers(0, len(a)))
    e = ElementaryOnRows(a, k)
    if draw(st.booleans()):
        return Product([e, sum_power(n, draw(st.integers(0, 2)))])
    return e


@settings(max_examples=60, deadline=None)
@given(structured(), st.data())
def test_homogeneity_and_expansion(poly, data):
    x = [data.draw(pos) for _ in range(poly.nvars)]
    c = data.draw(pos)
    v = poly.evaluate(x)
    assert v > 0
    assert poly.evaluate([c * xi for xi in x]) == c**poly.degree * v
    assert Expanded(poly.expand(), poly.nvars).evaluate(x) == v


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(
    st.lists(st.lists(pos, min_size=n, max_size=n), min_size=n, max_size=n),
    st.lists(pos, min_size=n - 1, max_size=n - 1),
    st.integers(0, n - 1), st.integers(1, n))))
def test_structural_partial_matches_expanded(args):
    a, rest, i, k = args
    e = ElementaryOnRows(a, k)
    assert e.partial_at_zero(rest, i) == partial_at_zero(e, i).evaluate(rest) if rest else True


def test_quadratic_hyperbolicity_flag():
    assert QuadraticForm(make_complete(4).adjacency).hyperbolic
    assert not QuadraticForm([[1, 0], [0, 1]]).hyperbolic
    with pytest.raises(DomainError):
        capacity(QuadraticForm([[1, 0], [0, 1]]))


def test_capacity_examples():
    r = capacity(ElementaryOnRows(J2, 1), 1e-10)
    assert r.converged and r.lower <= 2 <= r.upper * (1 + 1e-12)
    r = capacity(ElementaryOnRows(J2, 2), 1e-10)
    assert abs(r.value - 1) < 1e-9
    r = capacity(ElementaryOnRows([[1, 1]], 1), 1e-10)
    assert abs(r.value - 2) < 1e-9


def test_capacity_of_uniform_quadratic_form():
    # x^T (J - I) x / 3 on K4 is minimized at the all-ones point
    w = [[Fraction(int(i != j), 3) for j in range(4)] for i in range(4)]
    r = capacity(QuadraticForm(w), 1e-9)
    assert abs(r.value - 4) < 1e-7


def test_capacity_bracket_from_far_start():
    rng = np.random.default_rng(3)
    a = random_doubly_stochastic(4, rng)
    r = capacity(ElementaryOnRows(a, 2), 1e-9, start=[3.0, -2.0, 0.5, -1.5])
    assert r.converged and r.upper / r.lower <= 1 + 1e-9
    assert abs(r.value / 6 - 1) < 1e-6


def test_non_convergence_is_reported():
    a = [[1, 2, 3], [3, 1, 2], [2, 3, 1]]
    r = capacity(ElementaryOnRows(a, 3), 1e-12, max_iter=1, start=[5.0, -5.0, 0.0])
    assert not r.converged and "bracket ratio" in r.message
    assert r.lower <= r.upper


def test_zero_capacity_has_zero_lower_bound():
    # x1^2: the barycenter (1,1) is outside the Newton polytope
    r = capacity(Expanded({(2, 0): 1}, 2), 1e-6, max_iter=200)
    assert r.lower == r.upper == 0.0 and r.converged


def test_capacity_rejects_non_homogeneous():
    with pytest.raises(DomainError):
        capacity(Expanded({(1, 0): 1, (0, 0): 1}, 2))
    with pytest.raises(DomainError):
        capacity(ElementaryOnRows(J2, 1), 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_capacity_scale_law(n):
    rng = np.random.default_rng(n)
    a = np.full((n, n), 1.0 / n)
    for _ in range(3):
        d1 = rng.uniform(0.3, 3.0, n)
        d2 = rng.uniform(0.3, 3.0, n)
        b = d1[:, None] * a * d2[None, :]
        r = capacity(ElementaryOnRows(b.tolist(), n), 1e-9)
        assert abs(r.value / (np.prod(d1) * np.prod(d2)) - 1) < 1e-6
        # the inverse reading: A = E1 B E2 with E = D^{-1} gives Cap p_{n,B} = 1 / det(E1 E2)
        assert abs(r.value * np.prod(1 / d1) * np.prod(1 / d2) - 1) < 1e-6


def test_convexity_in_log_coordinates():
    rng = np.random.default_rng(11)
    poly = mixed_polynomial(random_doubly_stochastic(3, rng).tolist(), 2)
    mons = poly.expand()
    exps = np.array(list(mons), dtype=float)
    logc = np.log([float(c) for c in mons.values()])

    def f(y):
        z = logc + exps @ y
        return z.max() + math.log(np.exp(z - z.max()).sum())

    for _ in range(200):
        y0, y1 = rng.normal(size=3) * 2, rng.normal(size=3) * 2
        assert f((y0 + y1) / 2) <= (f(y0) + f(y1)) / 2 + 1e-10


def test_sinkhorn_balances():
    rng = np.random.default_rng(0)
    a, d1, d2, resid = sinkhorn_balance(rng.uniform(0.1, 1, (5, 5)))
    assert resid < 1e-12
    assert np.allclose(a.sum(axis=0), 1) and np.allclose(a.sum(axis=1), 1)
    with pytest.raises(DomainError):
        sinkhorn_balance(np.zeros((2, 2)))


def test_step_monomial():
    v = check_capacity_step(Expanded({(1, 1): 1}, 2), 1)
    assert v.holds and v.degree_in_coordinate == 1 and v.factor == 1.0
    assert abs(v.cap_derivative[1] - 1) < 1e-9


def test_step_uniform_square():
    v = check_capacity_step(ElementaryOnRows(J2, 2), 0)
    # derivative at x_1 = 0 is x_2 / 2, capacity 1/2 = (1/2)^1 * Cap p
    assert v.holds and v.degree_in_coordinate == 2
    assert abs(v.ratio - 1) < 1e-6


def test_step_zero_derivative_passes():
    v = check_capacity_step(Expanded({(2, 0): 1, (1, 1): 1}, 2), 1)
    assert v.degree_in_coordinate == 1
    v = check_capacity_step(Expanded({(0, 2): 1}, 2), 0)
    assert v.holds and v.zero_derivative


def test_step_requires_square_case():
    with pytest.raises(DomainError):
        check_capacity_step(ElementaryOnRows([[1, 1, 1]], 1), 0)


def test_step_random_instances():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = random_doubly_stochastic(4, rng)
        assert check_capacity_step(ElementaryOnRows(a, 4), 1, 1e-6).holds


def test_mixed_derivative_examples():
    assert mixed_derivative_identity_check([[1, 1], [1, 1]], 2).derivative == 2
    v = mixed_derivative_identity_check([[1, 1], [1, 1]], 1)
    assert v.holds and v.derivative == 4
    ident = [[int(i == j) for j in range(3)] for i in range(3)]
    v = mixed_derivative_identity_check(ident, 2)
    assert v.holds and perm_k(ident, 2) == 3


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.lists(st.lists(st.fractions(0, 3, max_denominator=5), min_size=n, max_size=n), min_size=n, max_size=n),
    st.integers(1, n))))
def test_mixed_derivative_identity_random(args):
    a, k = args
    assert mixed_derivative_identity_check(a, k).holds
