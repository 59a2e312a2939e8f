import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isomono.connection import DarbouxState, ValidationError, genus
from isomono.deformation import build_A_tilde
from isomono.flow import field_along
from isomono.presets import (PRESET_IDS, SingularPointError, UnknownPresetError, displayed_A_tilde, fuchsian_preset,
                             p2h2_polynomial_check, painleve_preset, painleve_rhs_oracle)
from isomono.lax import solve_isospectral_H
from isomono.deformation import deformation_coefficients

from conftest import HBAR, coefficient_errors, field_error, hamiltonian_gap, preset_point

FLOWS = [(pid, f) for pid in PRESET_IDS for f in ((1, 2) if pid == "P2H2" else (1,))]


@pytest.mark.parametrize("pid,flow", FLOWS)
def test_field_matches_closed_form(pid, flow):
    rng = np.random.default_rng(7)
    for _ in range(5):
        pr, t, q, p = preset_point(rng, pid, flow)
        assert field_error(pid, pr, t, q, p, flow=flow) < 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), pid=st.sampled_from(["P2", "P3", "P4", "P4_JM", "P5", "P6"]),
       hre=st.floats(0.5, 1.5), him=st.floats(-0.5, 0.5))
def test_field_matches_closed_form_any_hbar(seed, pid, hre, him):
    pr, t, q, p = preset_point(np.random.default_rng(seed), pid)
    assert field_error(pid, pr, t, q, p, hbar=complex(hre, him)) < 1e-11


@pytest.mark.parametrize("pid,flow", FLOWS)
def test_coefficients_match_closed_form(pid, flow):
    q = np.array([2.2 + 0.3j, -0.6 + 1.1j][:2 if pid == "P2H2" else 1])
    p = np.full(q.shape, 0.4 - 0.1j)
    t = (0.4 + 0.1j, -0.3 + 0.5j) if pid == "P2H2" else 1.7 + 0.4j
    errs = coefficient_errors(pid, t, q, p, flow=flow)
    assert errs and max(errs.values()) < 1e-12, errs


@pytest.mark.parametrize("pid,flow", FLOWS)
def test_hamiltonian_differs_by_function_of_time_only(pid, flow):
    rng = np.random.default_rng(3)
    pr, t, q, p = preset_point(rng, pid, flow)
    g1 = hamiltonian_gap(pid, pr, t, q, p, flow=flow)
    g2 = hamiltonian_gap(pid, pr, t, q * 0.7 + 0.1j, p + 0.3, flow=flow)
    assert abs(g1 - g2) < 1e-10


def _A_residual(diff, traceless):
    if traceless:
        diff = diff - np.trace(diff, axis1=-2, axis2=-1)[..., None, None] / 2 * np.eye(2)
    return np.max(np.abs(diff))


@pytest.mark.parametrize("pid", ["P2", "P6"])
def test_deformation_matrix_closed_form(pid):
    rng = np.random.default_rng(11)
    pr, t, q, p = preset_point(rng, pid)
    cfg, al, s = painleve_preset(pid, pr, t, q, p, HBAR)
    dq, dp, H, co = field_along(cfg, s, al)
    lam = np.array([0.3 + 0.9j, -1.2 + 0.2j, 2.5 - 0.7j])
    ours = build_A_tilde(cfg, s, co, H, al, (dq, dp))(lam)
    disp = displayed_A_tilde(pid, pr, t, q, p, lam, HBAR)
    assert _A_residual(ours - disp, traceless=(pid == "P6")) < 1e-10


def test_deformation_matrix_p4_jm_swapped_sheets():
    rng = np.random.default_rng(5)
    pr, t, q, p = preset_point(rng, "P4_JM")
    shifted = dict(pr, theta_inf=pr["theta_inf"] - HBAR)
    cfg, al, s = painleve_preset("P4_JM", shifted, t, q, p, HBAR)
    cs = cfg.swapped_sheets()
    als = type(al)(al.a_inf[::-1].copy(), al.a_X, al.a_pos)
    dq, dp, H, co = field_along(cs, s, als)
    c0, a0, s0 = painleve_preset("P4_JM", pr, t, q, p, HBAR)
    Dq, Dp = field_along(c0, s0, a0)[:2]
    assert np.max(np.abs(np.concatenate([dq - Dq, dp - Dp]))) < 1e-10
    lam = np.array([0.3 + 0.9j, -1.2 + 0.2j, 2.5 - 0.7j])
    A = build_A_tilde(cs, s, co, H, als, (dq, dp))(lam)
    assert np.max(np.abs(A - displayed_A_tilde("P4_JM", pr, t, q, p, lam, HBAR))) < 1e-10


@pytest.mark.parametrize("flow", [1, 2])
def test_p2h2_polynomial_variables(flow):
    q = np.array([1.1 + 0.3j, -0.6 + 0.8j])
    p = np.array([0.3 - 0.2j, 0.5 + 0.4j])
    assert p2h2_polynomial_check(0.3 - 0.2j, 0.4 + 0.1j, -0.3 + 0.5j, q, p, HBAR, flow) < 1e-8


def test_oracle_hand_values():
    # P2: hbar^2 q'' = 2 q^3 + t q + theta - hbar/2
    assert painleve_rhs_oracle("P2", 1.0, 5.0, 2.0, {"theta": 0.5}, 1.0) == pytest.approx(2 + 2 + 0.5 - 0.5)
    # P5 with q' = 0, t = 1, q = 2, hbar = 1
    pr = {"theta_inf": 0.5, "theta1": 0.5, "theta2": 0.5}
    a, b, c, d = 0.0, -0.5, -1.0, -0.5
    expect = (a * 2 + b / 2) + c * 2 + d * 2 * 3 / 1
    assert painleve_rhs_oracle("P5", 2.0, 0.0, 1.0, pr, 1.0) == pytest.approx(expect)


def test_oracle_singular_points():
    with pytest.raises(SingularPointError):
        painleve_rhs_oracle("P6", 1.0, 0.0, 0.5, {"theta_inf": 0, "theta1": 0, "theta2": 0, "theta3": 0})
    with pytest.raises(UnknownPresetError):
        painleve_rhs_oracle("P7", 1.0, 0.0, 0.5, {})


def test_unknown_preset():
    with pytest.raises(UnknownPresetError):
        painleve_preset("P1", {}, 1.0, [0.5], [0.1])


def test_fuchsian_three_poles_is_p6():
    th = {"theta_inf": 0.3 + 0.1j, "theta1": 0.2 - 0.3j, "theta2": 0.4, "theta3": -0.1 + 0.2j}
    t, q, p = 1.7 + 0.4j, np.array([0.6 + 0.4j]), np.array([0.2 - 0.1j])
    cfg6, al6, st6 = painleve_preset("P6", th, t, q, p, HBAR)
    cfg, alphas = fuchsian_preset(3, th["theta_inf"], [th["theta1"], th["theta2"], th["theta3"]], [t], HBAR)
    assert cfg.g == 1 and len(alphas) == 1
    np.testing.assert_allclose(cfg.X, cfg6.X, atol=1e-14)
    f1 = np.concatenate(field_along(cfg, st6, alphas[0])[:2])
    f6 = np.concatenate(field_along(cfg6, st6, al6)[:2])
    np.testing.assert_allclose(f1, f6, atol=1e-12)


def test_fuchsian_four_poles_genus_two():
    cfg, alphas = fuchsian_preset(4, 0.3, [0.1, 0.2, 0.3, 0.4], [2.0 + 0.5j, -1.0 + 1.0j])
    assert genus(cfg.structure) == 2 and len(alphas) == 2
    st = DarbouxState(np.array([0.5 + 0.5j, 1.5 - 0.5j]), np.array([0.1, 0.2]))
    H = solve_isospectral_H(cfg, st)
    co = deformation_coefficients(cfg, st, alphas[0])
    assert np.all(np.isfinite(H.as_vector())) and np.all(np.isfinite(co.mu))


def test_fuchsian_residue_sum_violation():
    with pytest.raises((ValidationError, ValueError)):
        fuchsian_preset(3, 0.3, [(0.1, 0.2), (0.2, -0.2), (0.3, -0.3)], [2.0])
