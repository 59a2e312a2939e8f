import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isomono.linalg import (RamifiedPoleError, SingularMatrixError, dense_solve, determinant, lower_toeplitz_solve,
                            toeplitz_matrix)


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 12))
def test_dense_solve_residual(seed, n):
    rng = np.random.default_rng(seed)
    A = crandn(rng, n, n) + n * np.eye(n)
    b = crandn(rng, n)
    x = dense_solve(A, b)
    assert np.max(np.abs(A @ x - b)) < 1e-10 * max(1, np.max(np.abs(b)))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 10))
def test_determinant_matches_numpy(seed, n):
    A = crandn(np.random.default_rng(seed), n, n)
    ref = np.linalg.det(A)
    assert abs(determinant(A) - ref) < 1e-10 * max(1, abs(ref))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 10))
def test_toeplitz_solve(seed, n):
    rng = np.random.default_rng(seed)
    col = crandn(rng, n)
    col[0] += 3
    b = crandn(rng, n)
    x = lower_toeplitz_solve(col, b)
    np.testing.assert_allclose(toeplitz_matrix(col) @ x, b, atol=1e-10)


def test_singular_cases():
    with pytest.raises(SingularMatrixError):
        dense_solve(np.ones((3, 3)), np.ones(3))
    assert determinant(np.ones((3, 3))) == 0
    with pytest.raises(RamifiedPoleError):
        lower_toeplitz_solve([0.0, 1.0], [1.0, 2.0])
    assert dense_solve(np.zeros((0, 0)), np.zeros(0)).shape == (0,)
    assert determinant(np.zeros((0, 0))) == 1
