import numpy as np
from hypothesis import given, settings, strategies as st

from isomono.connection import DeformationVector
from isomono.deformation import deformation_coefficients, evolution_field, solve_nu
from isomono.flow import field_along
from isomono.lax import solve_isospectral_H
from isomono.verify import (CASES, check_hamiltonianity, check_trace_gauge, check_zero_curvature,
                            sample_configuration, sample_lambdas, sample_structure)

seeds = st.integers(0, 2**31)
cases = st.sampled_from(CASES)


def _sample(seed, case, g_max=4):
    rng = np.random.default_rng(seed)
    return (rng,) + sample_configuration(rng, sample_structure(rng, case, g_max))


def _flat(co):
    return np.concatenate([co.nu_inf] + list(co.nu_X))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, case=cases)
def test_nu_toeplitz_matches_recursion(seed, case):
    _, cfg, _, alpha = _sample(seed, case)
    a, b = _flat(solve_nu(cfg, alpha)), _flat(solve_nu(cfg, alpha, recursion=True))
    assert np.max(np.abs(a - b)) <= 1e-10 * max(1, np.max(np.abs(a)))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, case=cases, s=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_field_is_linear_in_alpha(seed, case, s):
    rng, cfg, state, alpha = _sample(seed, case)
    beta = sample_configuration(rng, cfg.structure.with_positions(np.zeros(cfg.n)))[2]
    beta = DeformationVector(beta.a_inf, beta.a_X, beta.a_pos)
    f = lambda al: np.concatenate(field_along(cfg, state, al)[:2])
    lhs = f(alpha + s * beta)
    rhs = f(alpha) + s * f(beta)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1, np.max(np.abs(rhs)))


def test_zero_alpha_is_stationary():
    rng = np.random.default_rng(4)
    for case in CASES:
        cfg, state, _ = sample_configuration(rng, sample_structure(rng, case, 4))
        zero = DeformationVector.zero(cfg.structure)
        dq, dp, _, _ = field_along(cfg, state, zero)
        assert np.max(np.abs(dq)) == 0 or np.max(np.abs(dq)) < 1e-13
        assert np.max(np.abs(dp)) < 1e-12


def test_field_consistent_with_coefficients():
    rng = np.random.default_rng(8)
    cfg, state, alpha = sample_configuration(rng, sample_structure(rng, "rinf=2", 4))
    H = solve_isospectral_H(cfg, state)
    co = deformation_coefficients(cfg, state, alpha)
    dq, dp = evolution_field(cfg, state, co, H)[:2]
    dq2, dp2 = field_along(cfg, state, alpha)[:2]
    np.testing.assert_allclose(dq, dq2)
    np.testing.assert_allclose(dp, dp2)


@settings(max_examples=20, deadline=None)
@given(seed=seeds, case=cases)
def test_zero_curvature_and_hamiltonianity_random(seed, case):
    rng, cfg, state, alpha = _sample(seed, case)
    lam = sample_lambdas(rng, cfg, state)
    for r in check_zero_curvature(cfg, state, alpha, lam) + check_hamiltonianity(cfg, state, alpha):
        assert r.passed, r
    for r in check_trace_gauge(cfg, state, alpha, lam):
        assert r.passed, r


def test_hamiltonianity_negative_control():
    rng = np.random.default_rng(0)
    for case in ("rinf=2", "rinf=1,n>=2"):
        cfg, state, alpha = sample_configuration(rng, sample_structure(rng, case, 4))
        assert all(r.passed for r in check_hamiltonianity(cfg, state, alpha))
        res = check_hamiltonianity(cfg, state, alpha, corrupt=-1)
        assert not all(r.passed for r in res)
