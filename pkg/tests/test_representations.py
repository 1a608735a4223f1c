import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from opmon.catalog import catalog_lookup
from opmon.criteria import check_monotone
from opmon.errors import DomainError
from opmon.hermitian import HALF_LINE
from opmon.representations import (
    PickRepresentation,
    RepresentingMeasure,
    convert_measure,
    discretize_density,
    eval_measure,
    eval_pick,
    measure_function,
    pick_from_positive,
    to_pick,
    upper_half_plane_grid,
)
from opmon.transforms import derivative_at_one, t_transform

T = np.geomspace(1e-3, 1e3, 50)


def measures(kind):
    upper = 1.0 if kind == "unit-interval" else 1e4
    node = st.floats(1e-4, upper * (1 - 1e-4)).filter(lambda x: 0 < x < upper)
    w = st.floats(0.0, 5.0)
    return st.builds(
        lambda pairs, a0, a1: RepresentingMeasure(kind, [p[0] for p in pairs], [p[1] for p in pairs], a0, a1),
        st.lists(st.tuples(node, w), max_size=6),
        w,
        w,
    )


def test_eval_measure_examples():
    mu = RepresentingMeasure("unit-interval", [0.5], [1.0])
    assert np.allclose(eval_measure(mu, T), 2 * T / (1 + T))
    mu = RepresentingMeasure("unit-interval", atom0=0.5, atom_end=0.5)
    assert np.allclose(eval_measure(mu, T), (1 + T) / 2)


def test_probability_iff_value_one_at_one():
    mu = RepresentingMeasure("half-line", [0.1, 3.0], [0.25, 0.5], atom0=0.125, atom_end=0.125)
    assert mu.is_probability()
    assert abs(eval_measure(mu, 1.0) - 1) < 1e-12
    assert not mu.scaled(1.1).is_probability()


def test_eval_measure_domain():
    with pytest.raises(DomainError):
        eval_measure(RepresentingMeasure("half-line"), 0.0)


def test_measure_validation():
    with pytest.raises(ValueError):
        RepresentingMeasure("half-line", [1.0], [-1.0])
    with pytest.raises(ValueError):
        RepresentingMeasure("unit-interval", [1.0], [1.0])  # endpoint mass lives in atom_end
    with pytest.raises(ValueError):
        RepresentingMeasure("half-line", [0.0], [1.0])
    with pytest.raises(ValueError):
        RepresentingMeasure("pick", atom_end=1.0)
    with pytest.raises(ValueError):
        RepresentingMeasure("weird")


def test_convert_examples():
    mu = RepresentingMeasure("unit-interval", [0.5], [0.7], atom0=0.1, atom_end=0.2)
    hl = convert_measure(mu, "half-line")
    assert hl.nodes.tolist() == [1.0] and hl.weights.tolist() == [0.7]
    assert hl.atom0 == 0.1 and hl.atom_end == 0.2
    assert np.allclose(eval_measure(hl, T), eval_measure(mu, T), rtol=1e-12)
    with pytest.raises(ValueError):
        convert_measure(mu, "pick")


@settings(max_examples=60, deadline=None)
@given(measures("unit-interval"))
def test_conversion_preserves_values(mu):
    hl = convert_measure(mu, "half-line")
    a, b = eval_measure(mu, T), eval_measure(hl, T)
    assert np.all(np.abs(a - b) <= 1e-12 * np.maximum(1, np.abs(a)))
    back = convert_measure(hl, "unit-interval")
    assert np.allclose(back.nodes, mu.nodes, rtol=1e-15, atol=0)


@settings(max_examples=60, deadline=None)
@given(measures("half-line"))
def test_round_trip_half_line(mu):
    back = convert_measure(convert_measure(mu, "unit-interval"), "half-line")
    assert np.allclose(back.nodes, mu.nodes, rtol=1e-10)
    a, b = eval_measure(mu, T), eval_measure(back, T)
    assert np.all(np.abs(a - b) <= 1e-12 * np.maximum(1, np.abs(a)))


@settings(max_examples=20, deadline=None)
@given(measures("half-line"))
@example(RepresentingMeasure("half-line", atom0=2.0, atom_end=0.015625))
def test_represented_functions_are_monotone(mu):
    f = measure_function(mu)
    assert check_monotone(f, HALF_LINE, 3, 50, seed=0).passed


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["unit-interval", "half-line"]).flatmap(measures))
def test_measure_function_derivatives(mu):
    f = measure_function(mu)
    t = np.geomspace(0.05, 20, 15)
    assert np.allclose(f(t), eval_measure(mu, t), rtol=1e-14, atol=1e-300)
    h = 1e-5 * t
    assert np.allclose(f.deriv(t), (f(t + h) - f(t - h)) / (2 * h), rtol=1e-5, atol=1e-9 * max(1, np.max(f(t))))
    assert np.allclose(f.complex(t + 0j).real, f(t), rtol=1e-13, atol=1e-300)


def test_to_pick_examples():
    # identity: mu = atom at infinity
    rep = to_pick(1.0, 1.0, RepresentingMeasure("half-line", atom_end=1.0))
    assert (rep.alpha, rep.beta, rep.nu.weights.size) == (1.0, 0.0, 0)
    z = np.array([1j, 2 + 3j])
    assert np.allclose(eval_pick(rep, z), z)
    # t/(t+1): f(1) = 1/2, f'(1) = 1/4, Tf = 2t/(1+t) = atom at 1
    rep = to_pick(0.5, 0.25, RepresentingMeasure("half-line", [1.0], [1.0]))
    assert rep.alpha == 0.0 and rep.beta == pytest.approx(0.5, abs=1e-15)
    assert rep.nu.nodes.tolist() == [1.0] and rep.nu.weights[0] == pytest.approx(1.0)
    assert abs(eval_pick(rep, 1j) - (1 + 1j) / 2) < 1e-12
    assert eval_pick(rep, 4.0) == pytest.approx(0.8 + 0j, abs=1e-15)


def test_to_pick_requires_probability():
    with pytest.raises(ValueError):
        to_pick(1.0, 0.5, RepresentingMeasure("half-line", [1.0], [0.5]))


@settings(max_examples=40, deadline=None)
@given(measures("half-line").filter(lambda m: m.total_mass() > 1e-3), st.floats(-3, 3), st.floats(0.01, 3))
def test_to_pick_matches_reconstruction(mu, f1, fp1):
    mu = mu.scaled(1 / mu.total_mass())
    rep = to_pick(f1, fp1, mu)
    expected = f1 + fp1 * (T - 1) / T * eval_measure(mu, T)
    got = eval_pick(rep, T)
    assert np.all(np.abs(got.imag) <= 1e-14 * np.maximum(1, np.abs(got)))
    assert np.all(np.abs(got.real - expected) <= 1e-10 * np.maximum(1, np.abs(expected)))


def test_pick_of_sqrt_from_density():
    # Tf for sqrt is 2t/(sqrt t + 1); build its measure by quadrature of the exact density
    f = catalog_lookup("sqrt")
    tf = t_transform(f)
    # Tf = 2 * sqrt(t) * sqrt(t)/(1 + sqrt t); compare through the positive representation of sqrt
    mu = discretize_density(lambda l: np.sqrt(l) ** -1 / (1 + l) / np.pi, "half-line", 1e-8, 1e8, 4000)
    t = np.array([0.1, 1.0, 10.0])
    assert np.allclose(eval_measure(mu, t), np.sqrt(t), rtol=1e-3)
    rep = pick_from_positive(mu)
    assert np.allclose(eval_pick(rep, t).real, np.sqrt(t), rtol=1e-3)
    assert tf(1.0) == pytest.approx(1.0)
    assert derivative_at_one(f) == pytest.approx(0.5)


def test_log_pick_representation():
    # nu = Lebesgue measure, alpha = beta = 0
    # trapezoid rule on [0, 1e4]; the half weight at 0 is the atom at zero
    lam = np.linspace(0.0, 1e4, 2_000_001)
    h = lam[1] - lam[0]
    w = np.full(lam.size - 1, h)
    w[-1] /= 2
    rep = PickRepresentation(0.0, 0.0, RepresentingMeasure("pick", lam[1:], w, atom0=h / 2))
    t = np.array([0.5, 1.0, 3.0])
    assert np.allclose(eval_pick(rep, t).real, np.log(t), atol=1e-3)


def _reps():
    yield to_pick(0.5, 0.25, RepresentingMeasure("half-line", [1.0], [1.0]))
    yield to_pick(1.0, 1.0, RepresentingMeasure("half-line", atom_end=1.0))
    yield to_pick(2.0, 0.3, RepresentingMeasure("half-line", [0.01, 2.0, 50.0], [0.2, 0.3, 0.4], 0.05, 0.05))
    yield pick_from_positive(RepresentingMeasure("unit-interval", [0.2, 0.7], [0.5, 0.5], atom0=0.3))
    yield PickRepresentation(0.0, 1.0, RepresentingMeasure("pick", atom0=1.0))


@pytest.mark.parametrize("rep", list(_reps()))
def test_pick_positivity_and_analyticity(rep):
    z = upper_half_plane_grid(200)
    assert z.size == 200 and np.all(z.imag > 0)
    assert np.min(eval_pick(rep, z).imag) >= -1e-12
    # Cauchy-Riemann: the difference quotient does not depend on direction
    for z0 in (0.5 + 0.5j, 2 + 1j, -3 + 0.5j):
        d = [(eval_pick(rep, z0 + 1e-6 * u) - eval_pick(rep, z0)) / (1e-6 * u) for u in (1, 1j, np.exp(0.7j))]
        assert max(abs(a - b) for a in d for b in d) < 1e-5


def test_eval_pick_domain():
    rep = next(_reps())
    with pytest.raises(DomainError):
        eval_pick(rep, -1.0)
    with pytest.raises(DomainError):
        eval_pick(rep, 1 - 1j)


def test_json_round_trip():
    mu = RepresentingMeasure("half-line", [0.5, 2.0], [0.1, 0.2], 0.3, 0.4)
    data = mu.to_json()
    assert set(data) == {"kind", "nodes", "weights", "atom0", "atom1_or_inf"}
    back = RepresentingMeasure.from_json(data)
    assert np.array_equal(back.nodes, mu.nodes) and back.atom_end == 0.4
    rep = next(_reps())
    assert PickRepresentation.from_json(rep.to_json()).beta == rep.beta


def test_negative_alpha_rejected():
    with pytest.raises(ValueError):
        PickRepresentation(-1.0, 0.0, RepresentingMeasure("pick"))
