"""Hamiltonians of the isomonodromic flows and integration of the Darboux coordinates."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .connection import (TOL_SEP, ConnectionConfig, DarbouxState, DeformationVector, compute_P1,
                         compute_P2_tilde)
from .deformation import DeformationCoefficients, deformation_coefficients, evolution_field
from .lax import IsospectralHamiltonians, solve_isospectral_H


class NodeCollisionError(RuntimeError):
    def __init__(self, msg: str, trajectory=None):
        super().__init__(msg)
        self.trajectory = trajectory


def _sum_H1(config, H):
    return sum(H.pole(s, 1) for s in range(config.n))


def _sum_XH1_H2(config, H):
    return sum(x * H.pole(s, 1) + (H.pole(s, 2) if rs >= 2 else 0)
               for s, (x, rs) in enumerate(zip(config.X, config.r)))


def c_potential(config: ConnectionConfig, coeffs: DeformationCoefficients, q: np.ndarray,
                include_c0: bool = True) -> complex:
    """sum_j [sum_k c_{inf,k} q_j^k + sum_s sum_k c_{X_s,k} (q_j - X_s)^-k]."""
    acc = 0j
    start = 0 if include_c0 else 1
    for qj in q:
        for k in range(start, len(coeffs.c_inf)):
            acc += coeffs.c_inf[k] * qj ** k
        for x, c in zip(config.X, coeffs.c_X):
            for k in range(1, len(c) + 1):
                acc += c[k - 1] * (qj - x) ** (-k)
    return acc


def hamiltonian_value(config: ConnectionConfig, state: DarbouxState, coeffs: DeformationCoefficients,
                      H: IsospectralHamiltonians, alpha: DeformationVector | None = None,
                      include_c0: bool | None = None) -> complex:
    """Hamiltonian generating the flow along alpha, as a combination of the isospectral coefficients.

    ``alpha`` is only needed for the pole-motion components; when omitted they
    are read back from nu_{X_s,0} = -alpha_{X_s}.

    The c_{inf,0} = nu_{inf,-1}/2 contribution is kept for r_inf >= 2, where it is a
    function of the times only. For r_inf = 1, nu_{inf,-1} depends on (q, p) and that
    term would spoil dH/dp = L q, so it is dropped unless include_c0=True.
    """
    if include_c0 is None:
        include_c0 = config.r_inf >= 2
    hb = config.hbar
    r = config.r_inf
    q, p = state.q, state.p
    a_pos = -np.array([nus[0] for nus in coeffs.nu_X]) if alpha is None else alpha.a_pos
    acc = 0j
    for k in range(max(r - 3, 0)):
        acc += coeffs.nu(k + 1) * H.H_inf[k]
    for s, (rs, nus) in enumerate(zip(config.r, coeffs.nu_X)):
        for k in range(2, rs + 1):
            acc -= nus[k - 1] * H.pole(s, k)
        acc += a_pos[s] * H.pole(s, 1)
    acc -= hb * c_potential(config, coeffs, q, include_c0)
    n1, n0 = coeffs.nu(-1), coeffs.nu(0)
    sxh, sh1 = _sum_XH1_H2(config, H), _sum_H1(config, H)
    acc += n1 * sxh + n0 * sh1
    if r in (1, 2):
        acc -= (sh1 - hb * p.sum()) * n0
    if r == 1:
        acc -= (sxh - hb * np.sum(q * p)) * n1
    acc -= hb * n0 * p.sum() + hb * n1 * np.sum(q * p)
    return complex(acc)


def hamiltonian_value_expanded(config: ConnectionConfig, state: DarbouxState,
                               coeffs: DeformationCoefficients, include_c0: bool = False) -> complex:
    """Equivalent form written directly in (q, p), without the isospectral coefficients.

    Omits the c_{inf,0} term by default; it only shifts the value by a function of the times
    whenever nu_{inf,-1} does not depend on the state.
    """
    hb = config.hbar
    r = config.r_inf
    q, p = state.q, state.p
    mu = coeffs.mu
    g = len(q)
    P1, P2t = compute_P1(config), compute_P2_tilde(config)
    acc = 0j
    for i in range(g):
        for j in range(g):
            if i != j:
                acc -= 0.5 * hb * (mu[i] + mu[j]) * (p[i] - p[j]) / (q[i] - q[j])
    acc -= hb * np.sum(coeffs.nu(0) * p + coeffs.nu(-1) * q * p)
    for j in range(g):
        S = sum(hb * rs / (q[j] - x) for x, rs in zip(config.X, config.r))
        acc += mu[j] * p[j] * S
        v = p[j] ** 2 - P1(q[j]) * p[j] + P2t(q[j])
        if r >= 3:
            v += hb * config.t_inf[0, r - 1] * q[j] ** (r - 3)
        acc += mu[j] * v
    acc -= hb * c_potential(config, coeffs, q, include_c0)
    ti = config.t_inf
    if r == 2:
        acc += (ti[0, 1] * ti[1, 0] + ti[1, 1] * ti[0, 0] + hb * ti[0, 1]) * coeffs.nu(0)
    if r == 1:
        tt = sum(t[0, 0] * t[1, 0] for t, rs in zip(config.t_X, config.r) if rs == 1)
        acc -= (tt - ti[0, 0] * (ti[1, 0] + hb)) * coeffs.nu(-1)
    return complex(acc)


# -- vector field along a deformation vector ------------------------------------------

def field_along(config: ConnectionConfig, state: DarbouxState, alpha: DeformationVector):
    """(dq, dp, H, coeffs) with (dq, dp) = hbar d/dtau (q, p)."""
    H = solve_isospectral_H(config, state)
    coeffs = deformation_coefficients(config, state, alpha)
    dq, dp = evolution_field(config, state, coeffs, H)
    return dq, dp, H, coeffs


# -- integration ------------------------------------------------------------------------

@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    hams: list = field(default_factory=list)
    stopped: str | None = None

    def q(self) -> np.ndarray:
        return np.array([s.q for s in self.states])

    def p(self) -> np.ndarray:
        return np.array([s.p for s in self.states])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        g = len(self.states[0].q) if self.states else 0
        head = ["time_re", "time_im"]
        head += [f"q{j + 1}_{c}" for j in range(g) for c in ("re", "im")]
        head += [f"p{j + 1}_{c}" for j in range(g) for c in ("re", "im")]
        head += ["ham_re", "ham_im"]
        w.writerow(head)
        for t, s, h in zip(self.times, self.states, self.hams):
            row = [complex(t).real, complex(t).imag]
            for v in list(s.q) + list(s.p) + [h]:
                row += [complex(v).real, complex(v).imag]
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def _collision(config: ConnectionConfig, q: np.ndarray, tol: float) -> str | None:
    for i in range(len(q)):
        for j in range(i + 1, len(q)):
            if abs(q[i] - q[j]) < tol:
                return f"nodes q_{i + 1} and q_{j + 1} collided"
        for s, x in enumerate(config.X):
            if abs(q[i] - x) < tol:
                return f"node q_{i + 1} hit the pole X_{s + 1}"
    return None


def integrate_flow(config_at: Callable[[complex], ConnectionConfig], direction: Callable[[complex], DeformationVector],
                   state0: DarbouxState, t_span, step: float = 1e-3, method: str = "rk4",
                   rtol: float = 1e-9, atol: float = 1e-12, tol_sep: float = TOL_SEP,
                   raise_on_collision: bool = False) -> Trajectory:
    """Integrate d(q, p)/dtau = field/hbar along the isomonodromic time tau.

    ``config_at(tau)`` returns the connection data at time tau (times moved through
    the inverse time chart) and ``direction(tau)`` the deformation vector dual to tau.
    """
    t0, t1 = complex(t_span[0]), complex(t_span[1])
    g = state0.g

    # the first stage of each step sits at the point just recorded; share its solves
    last: dict = {}

    def solved(tau, y):
        key = (complex(tau), y.tobytes())
        if last.get("key") != key:
            cfg, al = config_at(tau), direction(tau)
            st = DarbouxState(y[:g], y[g:])
            H = solve_isospectral_H(cfg, st)
            co = deformation_coefficients(cfg, st, al)
            last.update(key=key, val=(cfg, al, st, H, co))
        return last["val"]

    def rhs(tau, y):
        cfg, al, st, H, co = solved(tau, y)
        dq, dp = evolution_field(cfg, st, co, H)
        return np.concatenate([dq, dp]) / cfg.hbar

    def ham(tau, st):
        cfg, al, st, H, co = solved(tau, st.as_vector())
        return hamiltonian_value(cfg, st, co, H, al)

    traj = Trajectory()

    def record(tau, y):
        st = DarbouxState(y[:g], y[g:])
        traj.times.append(tau)
        traj.states.append(st)
        traj.hams.append(ham(tau, st))

    y = state0.as_vector()
    record(t0, y)
    if method == "rk45":
        return _integrate_scipy(rhs, record, traj, config_at, t0, t1, y, g, step, rtol, atol, tol_sep,
                                raise_on_collision)
    total = t1 - t0
    nsteps = max(1, int(round(abs(total) / step)))
    h = total / nsteps
    tau = t0
    for i in range(nsteps):
        k1 = rhs(tau, y)
        k2 = rhs(tau + h / 2, y + h / 2 * k1)
        k3 = rhs(tau + h / 2, y + h / 2 * k2)
        k4 = rhs(tau + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        tau = t0 + (i + 1) * h
        msg = _collision(config_at(tau), y[:g], tol_sep)
        if msg:
            traj.stopped = msg
            if raise_on_collision:
                raise NodeCollisionError(msg, traj)
            break
        record(tau, y)
    return traj


def _integrate_scipy(rhs, record, traj, config_at, t0, t1, y, g, step, rtol, atol, tol_sep, raise_on_collision):
    from scipy.integrate import solve_ivp

    # integrate along the straight segment t0 -> t1 with a real parameter s in [0, 1]
    d = t1 - t0

    def f(s, yr):
        yc = yr[:2 * g] + 1j * yr[2 * g:]
        v = rhs(t0 + s * d, yc) * d
        return np.concatenate([v.real, v.imag])

    n = max(1, int(round(abs(d) / step)))
    s_eval = np.linspace(0.0, 1.0, n + 1)
    sol = solve_ivp(f, (0.0, 1.0), np.concatenate([y.real, y.imag]), method="RK45",
                    t_eval=s_eval, rtol=rtol, atol=atol)
    for s, yr in zip(sol.t[1:], sol.y.T[1:]):
        yc = yr[:2 * g] + 1j * yr[2 * g:]
        tau = t0 + s * d
        msg = _collision(config_at(tau), yc[:g], tol_sep)
        if msg:
            traj.stopped = msg
            if raise_on_collision:
                raise NodeCollisionError(msg, traj)
            break
        record(tau, yc)
    if not sol.success and traj.stopped is None:
        traj.stopped = sol.message
    return traj
