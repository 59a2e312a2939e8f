import numpy as np
import pytest
from hypothesis import given, strategies as st

from isomono.connection import (ConnectionConfig, DarbouxState, DeformationVector, PoleStructure, ValidationError,
                                check_state, compute_P1, config_from_sheet1, genus, require_valid, validate)


def _config(r_inf=4, r=(), X=(), res=0.0):
    rng = np.random.default_rng(1)
    t_inf = rng.normal(size=(2, r_inf)) + 0j
    t_X = tuple(rng.normal(size=(2, rs)) + 0j for rs in r)
    t_inf[1, 0] = -t_inf[0, 0] - sum(t[:, 0].sum() for t in t_X) + res
    return ConnectionConfig(PoleStructure(r_inf, r, X), t_inf, t_X, 0.8)


@given(r_inf=st.integers(1, 8), r=st.lists(st.integers(1, 4), max_size=4))
def test_genus_formula(r_inf, r):
    s = PoleStructure(r_inf, tuple(r), tuple(range(len(r))))
    assert genus(s) == r_inf - 3 + sum(r) == s.genus


def test_valid_config():
    assert validate(_config(4)).ok
    assert validate(_config(2, (2, 1), (0.0, 1.0))).ok


def test_residue_sum_violation():
    rep = validate(_config(4, res=1e-3))
    assert not rep.ok and "SumResidues" in rep.failures
    assert validate(_config(4, res=1e-3), residue_as_warning=True).warnings == ["SumResidues"]
    with pytest.raises(ValidationError):
        require_valid(_config(4, res=1e-3))


def test_validation_failures():
    cfg = _config(2, (1, 1), (0.5, 0.5))
    assert "poles not distinct" in validate(cfg).failures
    cfg = _config(3)
    cfg.t_inf[1, -1] = cfg.t_inf[0, -1]
    assert "ramified pole at infinity" in validate(cfg).failures
    assert "genus must be positive" in validate(_config(3)).failures
    cfg = _config(4)
    cfg.t_inf[0, 1] = np.nan
    assert "non-finite data" in validate(cfg).failures


def test_state_checks():
    cfg = _config(2, (1, 1), (0.0, 1.0))
    assert check_state(cfg, DarbouxState([0.3], [0.1])) == []
    assert check_state(cfg, DarbouxState([0.0], [0.1])) == ["apparent singularity on a pole"]
    assert check_state(cfg, DarbouxState([0.3, 0.4], [0.1, 0.2]))


def test_P1_is_sheet_sum():
    cfg = _config(3, (2,), (0.5,))
    P1 = compute_P1(cfg)
    lam = 1.3 - 0.2j
    ti, tx = cfg.t_inf, cfg.t_X[0]
    expect = -(ti[0, 1] + ti[1, 1]) - (ti[0, 2] + ti[1, 2]) * lam
    expect += (tx[0, 0] + tx[1, 0]) / (lam - 0.5) + (tx[0, 1] + tx[1, 1]) / (lam - 0.5) ** 2
    assert abs(P1(lam) - expect) < 1e-13


def test_sheet1_layout_and_vectors():
    s = PoleStructure(2, (2,), (0.0,))
    cfg = config_from_sheet1(s, [0.1, 1.0], [[-0.1, 0.5]])
    np.testing.assert_allclose(cfg.t_inf[1], -cfg.t_inf[0])
    assert validate(cfg).ok
    z = DeformationVector.zero(s)
    assert z.dimension() == 2 * 1 + 2 * 1 + 1
    v = DeformationVector(np.ones((2, 2)), (np.ones((2, 2)),), [1.0])
    assert np.all(v.a_inf[:, 0] == 0)
    w = 2 * v + z
    moved = cfg.advanced(w, 0.5)
    assert moved.X[0] == 1.0
    np.testing.assert_allclose(moved.t_inf[:, 1], cfg.t_inf[:, 1] + 1.0)
