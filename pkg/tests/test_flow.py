import numpy as np
import pytest

from isomono.connection import DarbouxState
from isomono.flow import NodeCollisionError, integrate_flow
from isomono.presets import preset_config_at

from conftest import ODE_CASES, ode_residual

P2 = ODE_CASES["P2"][0]


def _run(**kw):
    config_at, direction = preset_config_at("P2", P2, 1.0)
    st = DarbouxState(np.array([0.6 + 0.4j]), np.array([0.2 - 0.1j]))
    return integrate_flow(config_at, direction, st, (1.0, 1.1), **kw)


def test_csv_layout():
    tr = _run(step=1e-2)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "time_re,time_im,q1_re,q1_im,p1_re,p1_im,ham_re,ham_im"
    assert len(lines) == 1 + 11
    assert float(lines[-1].split(",")[0]) == pytest.approx(1.1)
    assert tr.stopped is None


def test_rk4_matches_rk45():
    a = _run(step=1e-2)
    b = _run(step=1e-2, method="rk45", rtol=1e-11, atol=1e-13)
    assert len(a.states) == len(b.states)
    assert np.max(np.abs(a.q() - b.q())) < 1e-8
    assert np.max(np.abs(a.p() - b.p())) < 1e-8


def test_collision_stops_or_raises():
    config_at, direction = preset_config_at("P6", ODE_CASES["P6"][0], 1.0)
    t0 = ODE_CASES["P6"][1]
    st = DarbouxState(np.array([t0 + 0.05]), np.array([0.1]))
    tr = integrate_flow(config_at, direction, st, (t0, t0 + 0.1), step=1e-2, tol_sep=0.2)
    assert tr.stopped and "X_3" in tr.stopped and len(tr.states) == 1
    with pytest.raises(NodeCollisionError):
        integrate_flow(config_at, direction, st, (t0, t0 + 0.1), step=1e-2, tol_sep=0.2, raise_on_collision=True)


def test_p2_trajectory_short_span():
    res, tr = ode_residual("P2", span=0.1)
    assert tr.stopped is None and res < 1e-6
