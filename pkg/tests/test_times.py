import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import polynomial as P

from isomono.connection import PoleStructure
from isomono.times import (ChartError, branch_count, canonical_chart, continued_chart, dual_derivative_coefficients,
                           dual_derivative_numeric, forward_time_map, inverse_time_map, is_canonical,
                           shift_coordinates, specialize_canonical, unshift_coordinates)
from isomono.verify import (CASES, check_trivial_identities, sample_canonical, sample_configuration,
                            sample_structure)

STRUCTURES = [(3, (1,)), (4, ()), (5, (2,)), (6, (1, 1)), (7, ()), (7, (3,)), (2, (2, 1)), (2, (1, 1)),
              (2, (3,)), (1, (1, 1, 2)), (1, (2, 2)), (1, (3,)), (1, (4,)), (1, (7,))]


def _cfg(seed, r_inf, r):
    rng = np.random.default_rng(seed)
    return sample_configuration(rng, PoleStructure(r_inf, r, tuple(np.zeros(len(r)))))


def _all(config):
    return np.concatenate([config.t_inf.ravel()] + [t.ravel() for t in config.t_X] + [config.X])


@pytest.mark.parametrize("r_inf,r", STRUCTURES)
def test_round_trip(r_inf, r):
    for seed in range(5):
        cfg = _cfg(seed, r_inf, r)[0]
        for b in range(branch_count(cfg.structure)):
            back = inverse_time_map(forward_time_map(cfg, b))
            assert np.max(np.abs(_all(back) - _all(cfg))) < 1e-10 * max(1, np.max(np.abs(_all(cfg))))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), case=st.sampled_from(CASES))
def test_round_trip_random_charts(seed, case):
    # inverse first: any chart values map back to themselves
    rng = np.random.default_rng(seed)
    cfg = sample_configuration(rng, sample_structure(rng, case, 6))[0]
    ch = forward_time_map(cfg)
    ch2 = ch.with_iso_times(ch.iso_times() + 0.1 * (rng.normal(size=len(ch.iso_times())) + 0j))
    again = forward_time_map(inverse_time_map(ch2), ch.branch)
    np.testing.assert_allclose(again.iso_times(), ch2.iso_times(), atol=1e-10)
    assert abs(again.T1 - ch2.T1) < 1e-10 and abs(again.T2 - ch2.T2) < 1e-10


def _tau_oracle(d, r, T1, T2):
    """Coefficients j * V_j of V(lam~) = sum_k d_k lam^k / k with lam = (lam~ - T1) / T2."""
    V = np.zeros(1, dtype=complex)
    base = np.array([-T1 / T2, 1 / T2])
    pw = np.array([1 + 0j])
    for k in range(1, r):
        pw = P.polymul(pw, base)
        V = P.polyadd(V, d[k] / k * pw)
    return np.array([j * V[j] for j in range(1, r - 2)])


@pytest.mark.parametrize("r_inf", [4, 5, 6, 7, 8])
def test_tau_inf_matches_reexpansion(r_inf):
    for seed in range(5):
        cfg = _cfg(seed, r_inf, ())[0]
        ch = forward_time_map(cfg)
        oracle = _tau_oracle(cfg.t_inf[0] - cfg.t_inf[1], r_inf, ch.T1, ch.T2)
        np.testing.assert_allclose(ch.tau_inf, oracle, atol=1e-10)


def test_canonical_values():
    cfg = specialize_canonical(PoleStructure(4), [0.8 - 0.2j], 0.3)
    assert is_canonical(cfg)
    assert cfg.t_inf[0, 1] * 2 == pytest.approx(0.8 - 0.2j)
    assert cfg.t_inf[0, 3] == pytest.approx(1.0) and cfg.t_inf[0, 2] == pytest.approx(0)
    cfg = specialize_canonical(PoleStructure(1, (1, 1, 1), (0, 0, 0)), [2.5], 0.1, [0.2, 0.3, 0.1])
    np.testing.assert_allclose(cfg.X, [0, 1, 2.5])
    cfg = specialize_canonical(PoleStructure(2, (2,), (0,)), [1.5], 0.1, [0.2])
    assert cfg.X[0] == 0 and cfg.t_X[0][0, 1] * 2 == pytest.approx(1.5)
    with pytest.raises(ChartError):
        canonical_chart(PoleStructure(4), [1.0, 2.0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), case=st.sampled_from(CASES))
def test_shift_round_trip(seed, case):
    rng = np.random.default_rng(seed)
    cfg, state, _ = sample_configuration(rng, sample_structure(rng, case, 6))
    back = unshift_coordinates(cfg, shift_coordinates(cfg, state))
    np.testing.assert_allclose(back.q, state.q, atol=1e-12)
    np.testing.assert_allclose(back.p, state.p, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), case=st.sampled_from(CASES))
def test_dual_vectors(seed, case):
    rng = np.random.default_rng(seed)
    cfg = sample_configuration(rng, sample_structure(rng, case, 6))[0]
    ch = forward_time_map(cfg)
    for nm in ch.iso_names():
        a, b = dual_derivative_coefficients(ch, nm), dual_derivative_numeric(ch, nm)
        va = np.concatenate([a.a_inf.ravel()] + [x.ravel() for x in a.a_X] + [a.a_pos])
        vb = np.concatenate([b.a_inf.ravel()] + [x.ravel() for x in b.a_X] + [b.a_pos])
        assert np.max(np.abs(va - vb)) < 1e-6 * max(1, np.max(np.abs(va)))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), case=st.sampled_from(CASES))
def test_trivial_identities(seed, case):
    rng = np.random.default_rng(seed)
    cfg, state, _ = sample_configuration(rng, sample_structure(rng, case, 5))
    for r in check_trivial_identities(cfg, state):
        assert r.passed, r


def test_continued_chart_follows_branch():
    cfg = _cfg(3, 5, ())[0]
    for b in range(branch_count(cfg.structure)):
        ch = forward_time_map(cfg, b)
        assert continued_chart(cfg, ch).branch == b


def test_canonical_sampler_is_canonical():
    rng = np.random.default_rng(0)
    for case in CASES:
        cfg, _ = sample_canonical(rng, sample_structure(rng, case, 6))
        assert is_canonical(cfg)


def test_single_simple_pole_has_no_chart():
    cfg = _cfg(0, 1, (4,))[0]
    bad = cfg.structure.__class__(1, (1,), (0,))
    assert bad.genus < 1
    with pytest.raises(ChartError):
        forward_time_map(cfg.replace(structure=bad, t_X=(cfg.t_X[0][:, :1],)))
