import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opmon.catalog import catalog_lookup, constant
from opmon.errors import DomainError, SamplingError, SymmetryError
from opmon.hermitian import (
    HALF_LINE,
    REAL_LINE,
    UNIT_INTERVAL,
    HermitianMatrix,
    Interval,
    apply_function,
    eigen_decompose,
    loewner_leq,
    min_eigenvalue,
    random_hermitian,
    random_unitary,
    sample_ordered_pair,
)


def test_eigen_decompose_examples():
    d = eigen_decompose(np.diag([1.0, 2.0]))
    assert np.allclose(d.eigenvalues, [1, 2])
    assert np.allclose(np.abs(d.eigenvectors), np.eye(2))
    assert np.allclose(eigen_decompose([[2.0, 1.0], [1.0, 2.0]]).eigenvalues, [1, 3])
    assert eigen_decompose([[5.0]]).eigenvalues.tolist() == [5.0]


def test_non_hermitian_rejected_with_report():
    with pytest.raises(SymmetryError, match="Hermitian"):
        HermitianMatrix([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(SymmetryError):
        HermitianMatrix([[1.0, 1j], [1j, 1.0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_reconstruction_and_unitarity(n, seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(n, rng)
    d = eigen_decompose(h)
    scale = max(1.0, np.max(np.abs(h)))
    assert np.max(np.abs(d.reconstruct() - h)) < 1e-10 * scale
    u = d.eigenvectors
    assert np.max(np.abs(u.conj().T @ u - np.eye(n))) < 1e-10
    assert np.all(np.diff(d.eigenvalues) >= 0)


def test_apply_function_examples():
    sq = catalog_lookup("square")
    assert np.allclose(apply_function(sq, np.diag([1.0, 2.0])).entries, np.diag([1, 4]))
    r = apply_function(catalog_lookup("sqrt"), [[2.0, 1.0], [1.0, 2.0]]).entries
    # eigenvectors (1,-1)/sqrt2 and (1,1)/sqrt2 with eigenvalues 1, 3
    p1 = np.array([[1, -1], [-1, 1]]) / 2
    p3 = np.array([[1, 1], [1, 1]]) / 2
    assert np.allclose(r, p1 + math.sqrt(3) * p3, atol=1e-14)
    one = apply_function(constant(1.0), random_hermitian(4, np.random.default_rng(0)))
    assert np.allclose(one.entries, np.eye(4))


def test_apply_function_names_bad_eigenvalue():
    with pytest.raises(DomainError, match=r"-1"):
        apply_function(catalog_lookup("sqrt"), np.diag([-1.0, 2.0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_unitary_invariance(n, seed):
    rng = np.random.default_rng(seed)
    f = catalog_lookup("exp")
    h = random_hermitian(n, rng)
    u = random_unitary(n, rng)
    lhs = apply_function(f, u @ h @ u.conj().T).entries
    rhs = u @ apply_function(f, h).entries @ u.conj().T
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1.0, np.max(np.abs(rhs)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_polynomial_homomorphism(n, seed):
    # f(h) for f = t^2 agrees with the matrix product h @ h
    h = random_hermitian(n, np.random.default_rng(seed))
    got = apply_function(catalog_lookup("square"), h).entries
    assert np.max(np.abs(got - h @ h)) < 1e-10 * max(1.0, np.max(np.abs(h)) ** 2 * n)


def test_loewner_leq_partial_order():
    rng = np.random.default_rng(3)
    a = random_hermitian(3, rng)
    p = rng.standard_normal((3, 3))
    b = a + p @ p.T
    assert loewner_leq(a, a)
    assert loewner_leq(a, b)
    assert not loewner_leq(b, a)
    c = b + np.eye(3)
    assert loewner_leq(a, c)  # transitivity
    assert not loewner_leq(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    assert not loewner_leq(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))  # not total


def test_min_eigenvalue():
    assert min_eigenvalue([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(1.0)


@pytest.mark.parametrize("interval", [HALF_LINE, UNIT_INTERVAL, REAL_LINE, Interval.parse("(1,2)")])
@pytest.mark.parametrize("n", [1, 2, 4])
def test_sample_ordered_pair(interval, n):
    for seed in range(10):
        x, y = sample_ordered_pair(interval, n, seed)
        assert loewner_leq(x, y, tol=0.0)
        assert np.all(interval.contains(np.linalg.eigvalsh(x.entries)))
        assert np.all(interval.contains(np.linalg.eigvalsh(y.entries)))


def test_sample_ordered_pair_is_seeded():
    a = sample_ordered_pair(HALF_LINE, 3, 42)
    b = sample_ordered_pair(HALF_LINE, 3, 42)
    assert np.array_equal(a[0].entries, b[0].entries) and np.array_equal(a[1].entries, b[1].entries)


def test_sample_ordered_pair_gives_up():
    with pytest.raises(SamplingError):
        sample_ordered_pair(Interval(1e8, 1e8 + 1e-7), 3, 0, max_attempts=3)


def test_interval_parse_and_json():
    iv = Interval.parse("[0,1)")
    assert iv.contains(0.0) and not iv.contains(1.0)
    assert Interval.from_json(HALF_LINE.to_json()) == HALF_LINE
    assert Interval.parse("0,inf") == HALF_LINE
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)


def test_hermitian_json_round_trip():
    h = HermitianMatrix(random_hermitian(3, np.random.default_rng(1)))
    back = HermitianMatrix.from_json(h.to_json())
    assert np.array_equal(back.entries, h.entries)
