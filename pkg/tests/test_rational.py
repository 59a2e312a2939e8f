import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isomono.rational import PoleEvaluationError, RationalFunction, UnmarkedPointError

cplx = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def random_rational(rng, npoles=2, order=3, deg=2):
    poles = {}
    while len(poles) < npoles:
        c = complex(*rng.uniform(-2, 2, 2))
        if all(abs(c - d) > 0.5 for d in poles):
            poles[c] = rng.normal(size=order) + 1j * rng.normal(size=order)
    return RationalFunction(rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1), poles)


def far_point(f, rng):
    while True:
        z = complex(*rng.uniform(-3, 3, 2))
        if all(abs(z - c) > 0.3 for c in f.points()):
            return z


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_multiplication_matches_pointwise(seed):
    rng = np.random.default_rng(seed)
    f, g = random_rational(rng), random_rational(rng, npoles=1, order=2, deg=1)
    z = far_point(f * g, rng)
    assert abs((f * g)(z) - f(z) * g(z)) <= 1e-9 * max(1, abs(f(z) * g(z)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_add_sub_and_derivative(seed):
    rng = np.random.default_rng(seed)
    f, g = random_rational(rng), random_rational(rng)
    z = far_point(f + g, rng)
    assert abs((f + g)(z) - f(z) - g(z)) < 1e-10 * max(1, abs(f(z)) + abs(g(z)))
    assert abs((f - f)(z)) < 1e-12 * max(1, abs(f(z)))
    h = 1e-5
    fd = (f(z + h) - f(z - h)) / (2 * h)
    assert abs(f.derivative()(z) - fd) < 1e-5 * max(1, abs(fd))


def test_residues_against_contour_integral():
    rng = np.random.default_rng(0)
    f = random_rational(rng)
    theta = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    for c in f.points():
        z = c + 0.2 * np.exp(1j * theta)
        for w in (0, 1, -2):
            contour = np.mean(f(z) * (z - c) ** w * (z - c))
            assert abs(f.residue_at(c, w) - contour) < 1e-10
    R = 10.0
    z = R * np.exp(1j * theta)
    for w in (0, 1, 2):
        contour = -np.mean(f(z) * z ** w * z)
        assert abs(f.residue_at("inf", w) - contour) < 1e-8


def test_expansion_at_infinity():
    f = RationalFunction([1.0, 2.0], {0.5: [3.0, 1.0]})
    # 3/(l-0.5) + 1/(l-0.5)^2 = 3/l + (1.5 + 1)/l^2 + ...
    assert f.coefficient_at_infinity(1) == 2.0
    assert f.coefficient_at_infinity(-1) == pytest.approx(3.0)
    assert f.coefficient_at_infinity(-2) == pytest.approx(2.5)


def test_laurent_and_taylor():
    f = RationalFunction([0, 0, 1.0], {1.0: [2.0]})
    coeffs, d = f.laurent(1.0, 2)
    assert d == 1
    np.testing.assert_allclose(coeffs, [2.0, 1.0, 2.0, 1.0])


def test_reciprocal_of_roots():
    roots = {0.3 + 0.1j: 2, -1.0: 1, 1.5j: 3}
    f = RationalFunction.reciprocal_of_roots(roots)
    p = RationalFunction.from_roots(roots)
    z = 0.7 - 0.4j
    assert abs(f(z) * p(z) - 1) < 1e-12


def test_errors():
    f = RationalFunction.pole(1.0, 2)
    with pytest.raises(PoleEvaluationError):
        f(1.0)
    with pytest.raises(UnmarkedPointError):
        f.residue_at(2.0)
    assert RationalFunction.zero().is_polynomial()
    assert (f * 0).scale() == 0
