"""Ready-made configurations for the Painleve equations, the second P2-hierarchy member
and Fuchsian systems, plus closed-form first-order systems and second-order ODE oracles.

Every preset uses sheet-antisymmetric data (t^(2) = -t^(1)), so P1 = 0 and the shifted
coordinates coincide with (q, p). Parameters are monodromy exponents on sheet 1:
``theta`` / ``theta_inf`` at infinity and ``theta1``, ``theta2``, ``theta3`` at the finite poles.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .connection import ConnectionConfig, DarbouxState, DeformationVector, PoleStructure

PRESET_IDS = ("P2", "P3", "P4", "P4_JM", "P5", "P6", "P2H2")

PARAMS = {
    "P2": ("theta",),
    "P3": ("theta_inf", "theta1"),
    "P4": ("theta_inf", "theta1"),
    "P4_JM": ("theta_inf", "theta1"),
    "P5": ("theta_inf", "theta1", "theta2"),
    "P6": ("theta_inf", "theta1", "theta2", "theta3"),
    "P2H2": ("theta",),
}


class UnknownPresetError(KeyError):
    pass


class SingularPointError(ValueError):
    pass


def _antisym(row) -> np.ndarray:
    row = np.asarray(row, dtype=complex)
    return np.vstack([row, -row])


def _params(pid: str, params) -> dict:
    if pid not in PARAMS:
        raise UnknownPresetError(f"unknown preset id {pid!r}; expected one of {', '.join(PRESET_IDS)}")
    params = dict(params or {})
    missing = [k for k in PARAMS[pid] if k not in params]
    extra = [k for k in params if k not in PARAMS[pid]]
    if missing or extra:
        raise ValueError(f"{pid} takes parameters {PARAMS[pid]}; missing {missing}, unexpected {extra}")
    return {k: complex(v) for k, v in params.items()}


def _alpha(structure: PoleStructure, inf=None, X=None, pos=None) -> DeformationVector:
    a_inf = np.zeros((2, structure.r_inf), dtype=complex)
    a_X = [np.zeros((2, rs), dtype=complex) for rs in structure.r]
    a_pos = np.zeros(structure.n, dtype=complex)
    for k, v in (inf or {}).items():
        a_inf[:, k] = v
    for (s, k), v in (X or {}).items():
        a_X[s][:, k] = v
    for s, v in (pos or {}).items():
        a_pos[s] = v
    return DeformationVector(a_inf, tuple(a_X), a_pos)


HALF = (0.5, -0.5)


def painleve_preset(pid: str, params: dict, t, q, p, hbar=1.0, flow: int = 1):
    """(config, alpha, state) for the canonical-time setup of the given equation.

    ``t`` is the isomonodromic time; for P2H2 it is the pair (tau_1, tau_2) and ``flow``
    selects which of the two times alpha differentiates.
    """
    pr = _params(pid, params)
    q = np.atleast_1d(np.asarray(q, dtype=complex))
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    state = DarbouxState(q, p)
    if pid == "P2":
        t = complex(t)
        st = PoleStructure(4)
        cfg = ConnectionConfig(st, _antisym([pr["theta"], t / 2, 0, 1]), (), hbar)
        al = _alpha(st, inf={1: HALF})
    elif pid == "P3":
        t = complex(t)
        st = PoleStructure(2, (2,), (0.0,))
        cfg = ConnectionConfig(st, _antisym([pr["theta_inf"], 1]), (_antisym([pr["theta1"], t / 2]),), hbar)
        al = _alpha(st, X={(0, 1): HALF})
    elif pid == "P4":
        t = complex(t)
        st = PoleStructure(3, (1,), (t,))
        cfg = ConnectionConfig(st, _antisym([pr["theta_inf"], 0, 1]), (_antisym([pr["theta1"]]),), hbar)
        al = _alpha(st, pos={0: 1.0})
    elif pid == "P4_JM":
        t = complex(t)
        st = PoleStructure(3, (1,), (0.0,))
        cfg = ConnectionConfig(st, _antisym([pr["theta_inf"], t, 1]), (_antisym([pr["theta1"]]),), hbar)
        al = _alpha(st, inf={1: (1.0, -1.0)})
    elif pid == "P5":
        t = complex(t)
        st = PoleStructure(1, (1, 2), (0.0, 1.0))
        cfg = ConnectionConfig(st, _antisym([pr["theta_inf"]]),
                               (_antisym([pr["theta1"]]), _antisym([pr["theta2"], t / 2])), hbar)
        al = _alpha(st, X={(1, 1): HALF})
    elif pid == "P6":
        t = complex(t)
        st = PoleStructure(1, (1, 1, 1), (0.0, 1.0, t))
        cfg = ConnectionConfig(st, _antisym([pr["theta_inf"]]),
                               tuple(_antisym([pr[k]]) for k in ("theta1", "theta2", "theta3")), hbar)
        al = _alpha(st, pos={2: 1.0})
    else:
        tau1, tau2 = (complex(v) for v in t)
        st = PoleStructure(5)
        cfg = ConnectionConfig(st, _antisym([pr["theta"], tau1 / 2, tau2 / 2, 0, 1]), (), hbar)
        if flow not in (1, 2):
            raise ValueError("P2H2 flow must be 1 or 2")
        al = _alpha(st, inf={flow: HALF})
    if state.g != cfg.g:
        raise ValueError(f"{pid} has genus {cfg.g}; got {state.g} Darboux pairs")
    return cfg, al, state


def preset_config_at(pid: str, params: dict, hbar=1.0, flow: int = 1, other_time=0.0):
    """config_at(t) and direction(t) callables for integrate_flow.

    For P2H2 the time not being integrated is frozen at ``other_time``.
    """
    g = 2 if pid == "P2H2" else 1
    q0, p0 = np.arange(1, g + 1) * (0.5 + 0.25j), np.zeros(g)

    def times(t):
        if pid != "P2H2":
            return t
        return (t, other_time) if flow == 1 else (other_time, t)

    @lru_cache(maxsize=8)
    def built(t):
        return painleve_preset(pid, params, times(t), q0, p0, hbar, flow)

    def config_at(t):
        return built(complex(t))[0]

    def direction(t):
        return built(complex(t))[1]
    return config_at, direction


# -- displayed closed forms ------------------------------------------------------------

def displayed_field(pid: str, params: dict, t, q, p, hbar=1.0, flow: int = 1):
    """hbar d/dt (q, p) written out in closed form for each preset."""
    pr = _params(pid, params)
    hb = complex(hbar)
    q = np.atleast_1d(np.asarray(q, dtype=complex))
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    if pid == "P2H2":
        return _p2h2_field(pr["theta"], t, q, p, hb, flow)
    t = complex(t)
    x, y = q[0], p[0]
    if pid == "P2":
        th = pr["theta"]
        dq, dp = y, 2 * x ** 3 + t * x + th - hb / 2
    elif pid == "P3":
        ti, t1 = pr["theta_inf"], pr["theta1"]
        dq = 2 * x ** 2 * y / t + hb * x / t
        dp = (-2 * x * y ** 2 / t - hb * y / t - t / (2 * x ** 3) - t1 / x ** 2 + 2 * x / t
              + (2 * ti - hb) / t)
    elif pid == "P4":
        ti, t1 = pr["theta_inf"], pr["theta1"]
        dq = 2 * y * (x - t) + hb
        dp = -y ** 2 - t1 ** 2 / (x - t) ** 2 + 3 * x ** 2 - 2 * t * x + 2 * ti - hb
    elif pid == "P4_JM":
        ti, t1 = pr["theta_inf"], pr["theta1"]
        dq = 2 * y * x
        dp = -y ** 2 - t1 ** 2 / x ** 2 + (t ** 2 - hb + 2 * ti) + 4 * t * x + 3 * x ** 2
    elif pid == "P5":
        ti, t1, t2 = pr["theta_inf"], pr["theta1"], pr["theta2"]
        dq = 2 * x * (x - 1) ** 2 * y / t + hb * x * (x - 1) / t
        dp = (-(3 * x - 1) * (x - 1) / t * y ** 2 - hb * (2 * x - 1) / t * y - t1 ** 2 / (t * x ** 2)
              - t / (2 * (x - 1) ** 3) - (4 * t2 + t) / (4 * (x - 1) ** 2) + ti * (ti - hb) / t)
    else:
        ti, t1, t2, t3 = pr["theta_inf"], pr["theta1"], pr["theta2"], pr["theta3"]
        d = t * (t - 1)
        dq = 2 * x * (x - 1) * (x - t) / d * y + hb * x * (x - 1) / d
        dp = (-(3 * x ** 2 - 2 * t * x - 2 * x + t) / d * y ** 2 - hb * (2 * x - 1) * y / d
              - t1 ** 2 / ((t - 1) * x ** 2) + t2 ** 2 / (t * (x - 1) ** 2) - t3 ** 2 / (x - t) ** 2
              + ti * (ti - hb) / d)
    return np.array([dq]), np.array([dp])


def _p2h2_field(th, t, q, p, hb, flow):
    tau1, tau2 = (complex(v) for v in t)
    q1, q2 = q
    p1, p2 = p
    d = q1 - q2
    if flow == 1:
        dq = np.array([p1 / d, -p2 / d])
        common = (p1 ** 2 - p2 ** 2) / (2 * d ** 2)
        dp1 = (common + 0.5 * (5 * q1 ** 4 + 4 * q1 ** 3 * q2 + 3 * q1 ** 2 * q2 ** 2 + 2 * q1 * q2 ** 3 + q2 ** 4)
               + (q1 + q2 / 2) * tau1 + 0.5 * (3 * q1 ** 2 + 2 * q1 * q2 + q2 ** 2) * tau2 + tau2 ** 2 / 8
               + th - hb / 2)
        dp2 = (-common + 0.5 * (5 * q2 ** 4 + 4 * q2 ** 3 * q1 + 3 * q2 ** 2 * q1 ** 2 + 2 * q2 * q1 ** 3 + q1 ** 4)
               + (q2 + q1 / 2) * tau1 + 0.5 * (3 * q2 ** 2 + 2 * q2 * q1 + q1 ** 2) * tau2 + tau2 ** 2 / 8
               + th - hb / 2)
        return dq, np.array([dp1, dp2])
    dq = np.array([-p1 * q2 / (2 * d) - hb / (4 * d), p2 * q1 / (2 * d) + hb / (4 * d)])
    s1 = (p1 ** 2 - p2 ** 2) / (4 * d ** 2)
    s2 = hb * (p1 - p2) / (4 * d ** 2)
    dp1 = (-q2 * s1 - s2 - q2 * (5 * q1 ** 4 + 4 * q1 ** 3 * q2 + 3 * q1 ** 2 * q2 ** 2 + 2 * q1 * q2 ** 3 + q2 ** 4) / 4
           - q2 * (2 * q1 + q2) / 4 * tau1 - q2 * (3 * q1 ** 2 + 2 * q1 * q2 + q2 ** 2) / 4 * tau2
           - q2 / 16 * tau2 ** 2 - q2 * (2 * th - hb) / 4)
    dp2 = (q1 * s1 + s2 - q1 * (5 * q2 ** 4 + 4 * q2 ** 3 * q1 + 3 * q2 ** 2 * q1 ** 2 + 2 * q2 * q1 ** 3 + q1 ** 4) / 4
           - q1 * (2 * q2 + q1) / 4 * tau1 - q1 * (3 * q2 ** 2 + 2 * q2 * q1 + q1 ** 2) / 4 * tau2
           - q1 / 16 * tau2 ** 2 - q1 * (2 * th - hb) / 4)
    return dq, np.array([dp1, dp2])


def displayed_hamiltonian(pid: str, params: dict, t, q, p, hbar=1.0, flow: int = 1) -> complex:
    pr = _params(pid, params)
    hb = complex(hbar)
    q = np.atleast_1d(np.asarray(q, dtype=complex))
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    if pid == "P2H2":
        tau1, tau2 = (complex(v) for v in t)
        th = pr["theta"]
        q1, q2 = q
        p1, p2 = p
        d = q1 - q2
        e2 = q1 ** 2 + q1 * q2 + q2 ** 2
        if flow == 1:
            return complex((p1 ** 2 - p2 ** 2) / (2 * d) - (q1 + q2) * ((q1 ** 2 + q2 ** 2) ** 2 - q1 ** 2 * q2 ** 2) / 2
                           - e2 / 2 * tau1 - (q1 + q2) * (q1 ** 2 + q2 ** 2) / 2 * tau2 - (q1 + q2) / 8 * tau2 ** 2
                           - (q1 + q2) * (2 * th - hb) / 2)
        return complex((q1 * p2 ** 2 - q2 * p1 ** 2 - hb * (p1 - p2)) / (4 * d)
                       + (q1 ** 4 + q1 ** 3 * q2 + q1 ** 2 * q2 ** 2 + q1 * q2 ** 3 + q2 ** 4) * q1 * q2 / 4
                       + (q1 + q2) * q1 * q2 / 4 * tau1 + e2 * q1 * q2 / 4 * tau2 + q1 * q2 / 16 * tau2 ** 2
                       + (2 * th - hb) * q1 * q2 / 4)
    t = complex(t)
    x, y = q[0], p[0]
    if pid == "P2":
        th = pr["theta"]
        return complex(y ** 2 / 2 - x ** 4 / 2 - t / 2 * x ** 2 - x / 2 * (2 * th - hb))
    if pid == "P3":
        ti, t1 = pr["theta_inf"], pr["theta1"]
        return complex((x ** 2 * y ** 2 + hb * x * y - x ** 2 - (2 * ti - hb) * x - t1 * t / x
                        - t ** 2 / (4 * x ** 2)) / t)
    if pid == "P4":
        ti, t1 = pr["theta_inf"], pr["theta1"]
        return complex(y ** 2 * (x - t) + hb * y - t1 ** 2 / (x - t) - (x ** 2 + 2 * ti - hb) * (x - t))
    if pid == "P4_JM":
        ti, t1 = pr["theta_inf"], pr["theta1"]
        return complex(x * y ** 2 - x ** 3 - 2 * t * x ** 2 - (t ** 2 + 2 * ti - hb) * x - t1 ** 2 / x)
    if pid == "P5":
        ti, t1, t2 = pr["theta_inf"], pr["theta1"], pr["theta2"]
        return complex((x * (x - 1) ** 2 * y ** 2 + hb * x * (x - 1) * y - t1 ** 2 / x - t ** 2 / (4 * (x - 1) ** 2)
                        - (4 * t2 + t) * t / (4 * (x - 1)) + ti * (hb - ti) * (x - 1) - t2 * t + t1 ** 2) / t)
    ti, t1, t2, t3 = pr["theta_inf"], pr["theta1"], pr["theta2"], pr["theta3"]
    d = t * (t - 1)
    return complex(x * (x - 1) * (x - t) / d * y ** 2 + hb * x * (x - 1) / d * y - t1 ** 2 / ((t - 1) * x)
                   + t2 ** 2 / (t * (x - 1)) - t3 ** 2 / (x - t) - ti * (ti - hb) * x / d)


def displayed_coefficients(pid: str, t, q, flow: int = 1) -> dict:
    """Closed forms of the nu and mu coefficients quoted for each preset.

    Keys: "nu_inf_k" (k = -1, 0, 1, ...), "nu_X{s}_{k}" and "mu_j" (1-based).
    """
    q = np.atleast_1d(np.asarray(q, dtype=complex))
    x = q[0]
    if pid == "P2":
        return {"nu_inf_-1": 0, "nu_inf_0": 0, "nu_inf_1": 0.5, "mu_1": 0.5}
    if pid == "P3":
        t = complex(t)
        return {"nu_inf_-1": 0, "nu_X1_0": 0, "nu_X1_1": -1 / t, "nu_inf_0": x / t, "mu_1": x ** 2 / t}
    if pid == "P4":
        t = complex(t)
        return {"nu_inf_-1": 0, "nu_inf_0": 0, "mu_1": x - t}
    if pid == "P4_JM":
        return {"nu_inf_-1": 0, "nu_inf_0": 1, "mu_1": x}
    if pid == "P5":
        t = complex(t)
        return {"nu_X2_1": -1 / t, "nu_inf_-1": (x - 1) / t, "nu_inf_0": (x - 1) ** 2 / t,
                "mu_1": x * (x - 1) ** 2 / t}
    if pid == "P6":
        t = complex(t)
        mu = x * (x - 1) * (x - t) / (t * (t - 1))
        return {"nu_inf_0": mu / x, "nu_inf_-1": mu / (x * (x - 1)), "mu_1": mu}
    if pid == "P2H2":
        q1, q2 = q
        if flow == 1:
            return {"nu_inf_1": 0, "nu_inf_2": 0.5, "mu_1": 1 / (2 * (q1 - q2)), "mu_2": -1 / (2 * (q1 - q2))}
        return {"nu_inf_1": 0.25, "nu_inf_2": 0, "mu_1": -q2 / (4 * (q1 - q2)), "mu_2": q1 / (4 * (q1 - q2))}
    raise UnknownPresetError(pid)


def displayed_A_tilde(pid: str, params: dict, t, q, p, lam, hbar=1.0) -> np.ndarray:
    """Deformation matrix in the gauge without apparent singularities, written in closed form.

    P2: as computed with the preset's own conventions.
    P4_JM: this closed form belongs to the opposite sheet labelling, i.e. the preset with
    sheets swapped and theta_inf replaced by theta_inf - hbar (same (q, p) dynamics).
    P6: A = A_t/(lam - t) + A_inf; equal to the computed matrix up to a scalar multiple of
    the identity (a t-dependent scalar gauge).
    """
    pr = _params(pid, params)
    hb = complex(hbar)
    x = complex(np.atleast_1d(q)[0])
    y = complex(np.atleast_1d(p)[0])
    lam = np.asarray(lam, dtype=complex)
    out = np.zeros(lam.shape + (2, 2), dtype=complex)
    t = complex(t)
    if pid == "P2":
        out[..., 0, 0] = -(lam + x) / 2
        out[..., 0, 1] = 0.5
        out[..., 1, 0] = x ** 2 + y + t / 2
        out[..., 1, 1] = (lam + x) / 2
    elif pid == "P4_JM":
        ti = pr["theta_inf"]
        out[..., 0, 0] = lam + x + t
        out[..., 0, 1] = 1.0
        out[..., 1, 0] = 2 * (x ** 2 + t * x - y * x + ti - hb)
        out[..., 1, 1] = -(lam + x + t)
    elif pid == "P6":
        ti, t3 = pr["theta_inf"], pr["theta3"]
        d = t * (t - 1)
        eta0 = p6_eta0(pr, t, x, y)
        e = eta0 + y * x * (x - 1) + ti * t
        At = np.array([[-e * (x - t) / d, (x - t) / d],
                       [-(x - t) / d * (e ** 2 - t3 ** 2 * t ** 2 * (t - 1) ** 2 / (x - t) ** 2), e * (x - t) / d]])
        Ainf = np.diag([-ti * (x - t) / d, (ti - hb) * (x - t) / d])
        out[...] = At / (lam[..., None, None] - t) + Ainf
    else:
        raise ValueError(f"no displayed deformation matrix wired for {pid}")
    return out


def p6_eta0(pr: dict, t, x, y) -> complex:
    ti, t1, t2, t3 = pr["theta_inf"], pr["theta1"], pr["theta2"], pr["theta3"]
    return complex((x * (x - 1) * (x - t) * y ** 2 - t1 ** 2 * t / x + t2 ** 2 * (t - 1) / (x - 1)
                    - t3 ** 2 * t * (t - 1) / (x - t) + ti ** 2 * (x - 1 - t)) / (2 * ti))


# -- second-order ODE oracles ---------------------------------------------------------------

def painleve_rhs_oracle(pid: str, q, dq, t, params: dict, hbar=1.0) -> complex:
    """Value hbar^2 q'' must take given q, q' = dq/dt and t.

    Written independently of the rest of the package from the second-order equations.
    The P4 entry (canonical times) is the P4_JM equation applied to u = q - t.
    """
    pr = _params(pid, params)
    hb = complex(hbar)
    q, v, t = complex(q), complex(dq), complex(t)
    w = hb * v
    if pid == "P2":
        return 2 * q ** 3 + t * q + pr["theta"] - hb / 2
    if pid == "P3":
        if q == 0 or t == 0:
            raise SingularPointError("P3 is singular at q = 0 or t = 0")
        a, b, c, d = 2 * (2 * pr["theta_inf"] - hb), -2 * pr["theta1"], 4.0, -1.0
        return w ** 2 / q - hb ** 2 * v / t + (a * q ** 2 + c * q ** 3) / t ** 2 + b / t + d / q
    if pid in ("P4", "P4_JM"):
        u, wu = (q - t, hb * (v - 1)) if pid == "P4" else (q, w)
        if u == 0:
            raise SingularPointError("P4 is singular at u = 0")
        th, t1 = pr["theta_inf"], pr["theta1"]
        return (0.5 * wu ** 2 + 6 * u ** 4 + 8 * t * u ** 3 + 2 * (t ** 2 + 2 * th - hb) * u ** 2
                - 2 * t1 ** 2) / u
    if pid == "P5":
        if q in (0, 1) or t == 0:
            raise SingularPointError("P5 is singular at q in {0, 1} or t = 0")
        a = (2 * pr["theta_inf"] - hb) ** 2 / 2
        b = -2 * pr["theta1"] ** 2
        c = -2 * pr["theta2"]
        d = -0.5
        return ((1 / (2 * q) + 1 / (q - 1)) * w ** 2 - hb ** 2 * v / t
                + (q - 1) ** 2 / t ** 2 * (a * q + b / q) + c * q / t + d * q * (q + 1) / (q - 1))
    if pid == "P6":
        if q in (0, 1, t) or t in (0, 1):
            raise SingularPointError("P6 is singular at q in {0, 1, t} or t in {0, 1}")
        a = (2 * pr["theta_inf"] - hb) ** 2 / 2
        b = -2 * pr["theta1"] ** 2
        c = 2 * pr["theta2"] ** 2
        d = -(2 * pr["theta3"] ** 2 - hb ** 2 / 2)
        return (0.5 * (1 / q + 1 / (q - 1) + 1 / (q - t)) * w ** 2
                - hb * w * (1 / t + 1 / (t - 1) + 1 / (q - t))
                + q * (q - 1) * (q - t) / (t ** 2 * (t - 1) ** 2)
                * (a + b * t / q ** 2 + c * (t - 1) / (q - 1) ** 2 + d * t * (t - 1) / (q - t) ** 2))
    raise UnknownPresetError(f"no second-order oracle for {pid}")


# -- P2H2 polynomial variables -------------------------------------------------------------

def p2h2_polynomial_variables(q, p, tau1, tau2):
    q1, q2 = q
    p1, p2 = p
    d = q1 - q2
    Q1 = -(q1 + q2)
    Q2 = q1 * q2 - tau2 / 4
    P1 = (-(p1 * q1 - p2 * q2) / d + q1 ** 3 + q1 ** 2 * q2 + q1 * q2 ** 2 + q2 ** 3
          + 0.5 * (q1 + q2) * tau2 + 0.5 * tau1)
    P2 = -(p1 - p2) / d + q1 ** 2 + q1 * q2 + q2 ** 2 + 0.5 * tau2
    return np.array([Q1, Q2, P1, P2])


def p2h2_polynomial_flow(Y, tau1, tau2, theta, hbar=1.0, flow: int = 1) -> np.ndarray:
    """hbar d/dtau (Q1, Q2, P1, P2) in the polynomial variables."""
    Q1, Q2, P1, P2 = Y
    th, hb = theta, hbar
    if flow == 1:
        return np.array([
            P2 - Q1 ** 2 + Q2 - tau2 / 4,
            P2 * Q1 - Q1 * Q2 + P1 - tau2 * Q1 / 4 - tau1 / 2,
            -P2 ** 2 / 2 + Q2 * P2 + 2 * P1 * Q1 + tau2 * P2 / 4 - th + hb,
            P2 * Q1 - P1])
    return np.array([
        P2 * Q1 / 2 - Q1 * Q2 / 2 - tau2 * Q1 / 8 + P1 / 2 - tau1 / 4,
        Q1 ** 2 * P2 / 2 - Q2 * P2 / 2 + P1 * Q1 / 2 - Q2 ** 2 / 2 - tau2 * P2 / 8 - tau1 * Q1 / 4 + tau2 ** 2 / 32,
        -P2 ** 2 * Q1 / 2 - P1 * P2 / 2 + Q2 * P1 / 2 + tau2 * P1 / 8 + tau1 * P2 / 4,
        P2 ** 2 / 4 + P2 * Q2 + P1 * Q1 / 2 - (th - hb) / 2])


def p2h2_polynomial_check(theta, tau1, tau2, q, p, hbar=1.0, flow: int = 1, eps: float = 1e-6) -> float:
    """Max deviation between the chain-rule image of the (q, p) flow and the polynomial flow.

    hbar dY/dtau = J(q, p) (dq, dp) + hbar dY/dtau|explicit, with both pieces by central
    differences of p2h2_polynomial_variables and the flow from the deformation solver.
    """
    from .flow import field_along
    cfg, al, st = painleve_preset("P2H2", {"theta": theta}, (tau1, tau2), q, p, hbar, flow)
    dq, dp, _, _ = field_along(cfg, st, al)
    q = np.asarray(q, dtype=complex)
    p = np.asarray(p, dtype=complex)
    taus = np.array([tau1, tau2], dtype=complex)
    dtau = np.zeros(2, dtype=complex)
    dtau[flow - 1] = eps

    def Y(s):
        tt = taus + s * dtau / eps
        return p2h2_polynomial_variables(q + s * dq / hbar, p + s * dp / hbar, *tt)
    dY = hbar * (Y(eps) - Y(-eps)) / (2 * eps)
    Y0 = p2h2_polynomial_variables(q, p, tau1, tau2)
    target = p2h2_polynomial_flow(Y0, tau1, tau2, theta, hbar, flow)
    return float(np.max(np.abs(dY - target)) / max(1.0, float(np.max(np.abs(target)))))


# -- Fuchsian systems ------------------------------------------------------------------------

def fuchsian_preset(n: int, theta_inf, thetas, positions, hbar=1.0):
    """Canonical Fuchsian configuration with X_1 = 0, X_2 = 1, X_s = positions[s-3].

    ``thetas`` holds one sheet-1 monodromy per pole (sheet 2 is minus it), or explicit
    (sheet1, sheet2) pairs, in which case the residue sum must vanish.
    Returns (config, [alpha for each free position X_3..X_n]).
    """
    if n < 3:
        raise ValueError("a Fuchsian preset needs n >= 3 poles")
    if len(thetas) != n or len(positions) != n - 2:
        raise ValueError(f"need {n} monodromies and {n - 2} free positions")
    X = (0.0, 1.0) + tuple(complex(x) for x in positions)
    st = PoleStructure(1, (1,) * n, X)
    pairs = []
    for th in thetas:
        if np.ndim(th) == 0:
            pairs.append(_antisym([th]))
        else:
            pairs.append(np.array(th, dtype=complex).reshape(2, 1))
    if np.ndim(theta_inf) == 0:
        tinf = _antisym([theta_inf])
    else:
        tinf = np.array(theta_inf, dtype=complex).reshape(2, 1)
    total = tinf.sum() + sum(pr.sum() for pr in pairs)
    if abs(total) > 1e-12:
        raise ValueError(f"SumResidues: monodromies sum to {total}, not 0")
    cfg = ConnectionConfig(st, tinf, tuple(pairs), hbar)
    alphas = [_alpha(st, pos={s: 1.0}) for s in range(2, n)]
    return cfg, alphas
