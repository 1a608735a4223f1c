import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opmon.catalog import catalog_lookup
from opmon.divided import derivative_lemma, divdiff1, divdiff2, kraus_matrices, loewner_matrix
from opmon.errors import DomainError
from opmon.functions import ScalarFunction
from opmon.hermitian import HALF_LINE, random_hermitian

sqrt = catalog_lookup("sqrt")
square = catalog_lookup("square")
cube = catalog_lookup("cube")
ident = catalog_lookup("id")

nodes = st.floats(0.01, 50.0)


def test_divdiff1_examples():
    assert divdiff1(sqrt, 1.0, 4.0) == pytest.approx(1 / 3, rel=1e-14)
    assert divdiff1(sqrt, 4.0, 4.0) == pytest.approx(0.25, rel=1e-14)
    assert divdiff1(ident, 3.0, -7.5) == pytest.approx(1.0)


def test_divdiff2_examples():
    assert divdiff2(square, 1.0, 2.0, 7.0) == pytest.approx(1.0, rel=1e-12)
    assert divdiff2(cube, 1.0, 1.0, 1.0) == pytest.approx(3.0, rel=1e-12)
    vals = [divdiff2(sqrt, *p) for p in itertools.permutations((1.0, 2.0, 5.0))]
    assert max(vals) - min(vals) < 1e-10


def test_confluent_without_analytic_derivative():
    f = ScalarFunction(np.sqrt, HALF_LINE, name="sqrt-numeric")
    assert divdiff1(f, 4.0, 4.0) == pytest.approx(0.25, rel=1e-8)
    assert divdiff2(f, 4.0, 4.0, 4.0) == pytest.approx(-(4.0**-1.5) / 8, rel=1e-3)


@settings(max_examples=100, deadline=None)
@given(nodes, nodes)
def test_divdiff1_symmetric_and_accurate(t, s):
    a, b = divdiff1(sqrt, t, s), divdiff1(sqrt, s, t)
    assert a == b
    # exact closed form 1 / (sqrt t + sqrt s)
    assert a == pytest.approx(1 / (np.sqrt(t) + np.sqrt(s)), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(nodes, nodes, nodes)
def test_divdiff2_permutation_symmetric(t, s, r):
    vals = [divdiff2(sqrt, *p) for p in itertools.permutations((t, s, r))]
    ref = max(abs(v) for v in vals)
    assert max(vals) - min(vals) <= 1e-9 * ref


@settings(max_examples=100, deadline=None)
@given(nodes, nodes, nodes)
def test_divdiff2_closed_form(t, s, r):
    # for sqrt: [t,s,r] = -1 / ((a+b)(b+c)(a+c)) with a, b, c the square roots
    a, b, c = np.sqrt([t, s, r])
    assert divdiff2(sqrt, t, s, r) == pytest.approx(-1 / ((a + b) * (b + c) * (a + c)), rel=1e-8)


def test_near_confluent_grid_is_stable():
    # where the plain difference quotient loses about half the mantissa
    for gap in (1e-6, 1e-8, 1e-10):
        assert divdiff1(sqrt, 2.0, 2.0 + gap) == pytest.approx(1 / (np.sqrt(2) + np.sqrt(2 + gap)), rel=1e-13)


def test_loewner_matrix_examples():
    lm = loewner_matrix(sqrt, [1.0, 4.0])
    assert np.allclose(lm.entries, [[0.5, 1 / 3], [1 / 3, 0.25]], atol=1e-15)
    assert np.linalg.det(lm.entries) == pytest.approx(1 / 72)
    lm = loewner_matrix(square, [1.0, 3.0])
    assert np.allclose(lm.entries, [[2, 4], [4, 6]])
    assert lm.min_eigenvalue() < 0
    assert np.allclose(loewner_matrix(ident, [0.1, 5.0, -3.0]).entries, 1.0)


def test_kraus_matrices_examples():
    km = kraus_matrices(square, [0.5, 1.0, 4.0])
    for p in range(3):
        assert np.allclose(km[p], 2.0)
    km = kraus_matrices(catalog_lookup("affine", {"a": 3, "b": 1}), [0.5, 1.0, 4.0])
    assert np.allclose(km.matrices, 0.0, atol=1e-12)
    km = kraus_matrices(cube, [1.0, 2.0])
    assert np.allclose(km[0], 2 * np.array([[3, 4], [4, 5]]))
    assert np.allclose(km[1], 2 * np.array([[4, 5], [5, 6]]))
    for m in km.matrices:
        assert np.array_equal(m, m.T)


def test_grid_outside_domain():
    with pytest.raises(DomainError):
        loewner_matrix(sqrt, [-1.0, 2.0])


def test_repeated_nodes():
    lm = loewner_matrix(sqrt, [2.0, 2.0, 3.0])
    assert lm.entries[0, 1] == pytest.approx(0.5 / np.sqrt(2))


@settings(max_examples=50, deadline=None)
@given(st.lists(nodes, min_size=1, max_size=5), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity_in_the_function(grid, a, b):
    f, g = sqrt, catalog_lookup("log")
    h = a * f + b * g
    lhs = loewner_matrix(h, grid).entries
    rhs = a * loewner_matrix(f, grid).entries + b * loewner_matrix(g, grid).entries
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(rhs)))
    lhs = kraus_matrices(h, grid).matrices
    rhs = a * kraus_matrices(f, grid).matrices + b * kraus_matrices(g, grid).matrices
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(rhs)))


def test_json_shapes():
    lm = loewner_matrix(sqrt, [1.0, 2.0])
    assert lm.to_json()["dim"] == 2
    km = kraus_matrices(sqrt, [1.0, 2.0])
    assert len(km.to_json()["matrices"]) == 2


@pytest.mark.parametrize("name", ["sqrt", "log", "exp", "cube"])
def test_derivative_lemmas(name):
    f = catalog_lookup(name)
    rng = np.random.default_rng(11)
    for _ in range(10):
        grid = np.sort(rng.uniform(0.2, 3.0, 4))
        h = random_hermitian(4, rng)
        h /= np.linalg.norm(h, 2)
        xi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        assert derivative_lemma(f, grid, h, xi, 1)["rel_error"] < 1e-4
        assert derivative_lemma(f, grid, h, xi, 2)["rel_error"] < 1e-3


def test_cancellation_in_far_quotient():
    # f = t(1+l)/(t+l) with tiny l is nearly constant for large t; the plain
    # quotient would lose about eight digits here
    lam = 1e-4
    f = ScalarFunction(
        lambda t: t * (1 + lam) / (t + lam),
        HALF_LINE,
        lambda t: lam * (1 + lam) / (t + lam) ** 2,
        name="kernel",
    )
    for t, s in ((97.26, 82.24), (1e3, 2.0), (5.0, 0.01)):
        exact = lam * (1 + lam) / ((t + lam) * (s + lam))
        assert divdiff1(f, t, s) == pytest.approx(exact, rel=1e-12)
