"""Trivial and isomonodromic time charts, shifted Darboux coordinates and reduced Hamiltonians.

Four charts are used depending on (r_inf, n): "rinf>=3", "rinf=2", "rinf=1,n>=2" and
"rinf=1,n=1". Every chart is an affine change lam -> T2 lam + T1 together with the
sheet sums T and the rescaled sheet differences tau.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .connection import (ConnectionConfig, DarbouxState, DeformationVector, PoleStructure,
                         compute_P1)
from .lax import IsospectralHamiltonians
from .linalg import lower_toeplitz_solve

CASES = ("rinf>=3", "rinf=2", "rinf=1,n>=2", "rinf=1,n=1")


class ChartError(ValueError):
    pass


class NotCanonicalError(ValueError):
    pass


def chart_case(structure: PoleStructure) -> str:
    r, n = structure.r_inf, structure.n
    if r >= 3:
        return "rinf>=3"
    if r == 2:
        return "rinf=2"
    return "rinf=1,n>=2" if n >= 2 else "rinf=1,n=1"


def _root(z: complex, m: int, branch: int = 0) -> complex:
    """m-th root, principal branch rotated by exp(2 i pi branch / m)."""
    return complex(z) ** (1.0 / m) * np.exp(2j * np.pi * branch / m)


@dataclass
class TimeChart:
    structure: PoleStructure
    case: str
    T1: complex
    T2: complex
    T_inf: np.ndarray                  # T_{inf,k}, k = 1..r_inf-1 (index k-1)
    T_X: tuple                         # per pole T_{X_s,k}, k = 1..r_s-1
    tau_inf: np.ndarray                # tau_{inf,j}, j = 1..r_inf-3
    tau_X: tuple                       # per pole tau_{X_s,k}
    X_tilde: dict                      # pole index (0-based) -> tilde X_s
    monodromies_inf: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=complex))
    monodromies_X: tuple = ()
    branch: int = 0
    hbar: complex = 1.0

    def iso_names(self) -> list[str]:
        names = [f"tau_inf_{j}" for j in range(1, len(self.tau_inf) + 1)]
        for s, t in enumerate(self.tau_X):
            names += [f"tau_X{s + 1}_{k}" for k in range(1, len(t) + 1)]
        names += [f"Xt_{s + 1}" for s in sorted(self.X_tilde)]
        return names

    def iso_times(self) -> np.ndarray:
        v = list(self.tau_inf)
        for t in self.tau_X:
            v += list(t)
        v += [self.X_tilde[s] for s in sorted(self.X_tilde)]
        return np.array(v, dtype=complex)

    def with_iso_times(self, values) -> "TimeChart":
        values = np.asarray(values, dtype=complex)
        pos = len(self.tau_inf)
        tau_inf = values[:pos].copy()
        tau_X = []
        for t in self.tau_X:
            tau_X.append(values[pos:pos + len(t)].copy())
            pos += len(t)
        Xt = {s: values[pos + i] for i, s in enumerate(sorted(self.X_tilde))}
        return TimeChart(self.structure, self.case, self.T1, self.T2, self.T_inf, self.T_X, tau_inf,
                         tuple(tau_X), Xt, self.monodromies_inf, self.monodromies_X, self.branch, self.hbar)

    def trivial_times(self) -> dict:
        out = {"T1": self.T1, "T2": self.T2}
        for k, v in enumerate(self.T_inf, start=1):
            out[f"T_inf_{k}"] = v
        for s, t in enumerate(self.T_X):
            for k, v in enumerate(t, start=1):
                out[f"T_X{s + 1}_{k}"] = v
        return out


# -- forward map -----------------------------------------------------------------

def _tau_inf_formula(d: np.ndarray, r: int, T1: complex, T2: complex) -> np.ndarray:
    """tau_{inf,j}, j = 1..r-3, written with Delta t_k = t^(1)_k - t^(2)_k.

    Fractional powers of Delta t_{r-1} are taken as (2^{1/(r-1)} T2)^m so the
    result stays on the chart's branch.
    """
    root = _root(2.0, r - 1) * T2           # Delta_{r-1}^{1/(r-1)} on the chart branch
    out = np.zeros(max(r - 3, 0), dtype=complex)
    for j in range(1, r - 2):
        acc = 0j
        for i in range(0, r - j - 2):
            coef = (-1) ** i * factorial(j + i - 1) / (factorial(i) * factorial(j - 1) * (r - 2) ** i)
            acc += coef * d[r - 2] ** i * d[j + i] / (root ** (i * (r - 1) + j))
        m = r - 1 - j
        last = ((-1) ** (r - j - 2) * factorial(r - 3)
                / (m * factorial(r - j - 3) * factorial(j - 1) * (r - 2) ** (r - j - 2)))
        acc += last * d[r - 2] ** m / root ** ((r - 2) * m)
        out[j - 1] = _root(2.0, r - 1) ** j * acc
    return out


def forward_time_map(config: ConnectionConfig, branch: int = 0) -> TimeChart:
    st = config.structure
    case = chart_case(st)
    r = st.r_inf
    ti = config.t_inf
    X = config.X
    T_inf = ti[0, 1:] + ti[1, 1:]
    T_X = tuple(t[0, 1:] + t[1, 1:] for t in config.t_X)
    d_inf = ti[0] - ti[1]
    d_X = [t[0] - t[1] for t in config.t_X]
    tau_inf = np.zeros(0, dtype=complex)
    Xt: dict = {}
    if case == "rinf>=3":
        if abs(d_inf[r - 1]) == 0:
            raise ChartError("T2 vanishes (leading times at infinity coincide)")
        T2 = _root(d_inf[r - 1] / 2, r - 1, branch)
        T1 = d_inf[r - 2] / (2 * (r - 2) * T2 ** (r - 2))
        tau_inf = _tau_inf_formula(d_inf, r, T1, T2)
        tau_X = tuple(d[1:rs] * T2 ** np.arange(1, rs) for d, rs in zip(d_X, st.r))
        Xt = {s: X[s] * T2 + T1 for s in range(st.n)}
    elif case == "rinf=2":
        T2 = d_inf[1] / 2
        T1 = -X[0] * T2
        tau_X = tuple(d[1:rs] * T2 ** np.arange(1, rs) for d, rs in zip(d_X, st.r))
        Xt = {s: (X[s] - X[0]) * T2 for s in range(1, st.n)}
    elif case == "rinf=1,n>=2":
        T2 = 1.0 / (X[1] - X[0])
        T1 = -X[0] * T2
        tau_X = tuple(d[1:rs] * T2 ** np.arange(1, rs) for d, rs in zip(d_X, st.r))
        Xt = {s: (X[s] - X[0]) * T2 for s in range(2, st.n)}
    else:
        r1 = st.r[0]
        if r1 < 2:
            raise ChartError("a single finite pole needs order >= 2")
        # T2 = (Delta t_{X1,r1-1}/2)^{-1/(r1-1)}
        T2 = 1.0 / _root(d_X[0][r1 - 1] / 2, r1 - 1, branch)
        T1 = -X[0] * T2
        tau_X = (d_X[0][1:r1 - 1] * T2 ** np.arange(1, r1 - 1),)
    if abs(T2) == 0:
        raise ChartError("T2 vanishes")
    return TimeChart(st, case, complex(T1), complex(T2), T_inf, T_X, tau_inf, tau_X, Xt,
                     ti[:, 0].copy(), tuple(t[:, 0].copy() for t in config.t_X), branch, config.hbar)


def branch_count(structure: PoleStructure) -> int:
    case = chart_case(structure)
    if case == "rinf>=3":
        return structure.r_inf - 1
    if case == "rinf=1,n=1":
        return structure.r[0] - 1
    return 1


def continued_chart(config: ConnectionConfig, reference: TimeChart) -> TimeChart:
    """Chart on the root branch whose T2 is closest to the reference chart's T2.

    Used to follow a chart continuously along a path of configurations.
    """
    charts = [forward_time_map(config, b) for b in range(branch_count(config.structure))]
    return min(charts, key=lambda c: abs(c.T2 - reference.T2))


# -- inverse map -----------------------------------------------------------------

def inverse_time_map(chart: TimeChart) -> ConnectionConfig:
    st = chart.structure
    r = st.r_inf
    T1, T2 = chart.T1, chart.T2
    if abs(T2) == 0:
        raise ChartError("T2 must be nonzero")
    if chart.case != chart_case(st):
        raise ChartError("chart case does not match the pole structure")
    sgn = np.array([1.0, -1.0])
    ti = np.zeros((2, r), dtype=complex)
    ti[:, 0] = chart.monodromies_inf
    ti[:, 1:] = 0.5 * chart.T_inf[None, :]
    if chart.case == "rinf>=3":
        ti[:, r - 1] += sgn * T2 ** (r - 1)
        ti[:, r - 2] += sgn * (r - 2) * T1 * T2 ** (r - 2)
        tau = chart.tau_inf
        for k in range(1, r - 2):
            acc = 2 * factorial(r - 2) / (factorial(k - 1) * factorial(r - 1 - k)) * T1 ** (r - 1 - k)
            for j in range(2, r - k):
                acc += (factorial(r - 2 - j) / (factorial(k - 1) * factorial(r - 1 - k - j))
                        * T1 ** (r - 1 - j - k) * tau[r - 1 - j - 1])
            ti[:, k] += sgn * 0.5 * T2 ** k * acc
    elif chart.case == "rinf=2":
        ti[:, 1] += sgn * T2
    tX = []
    for s, rs in enumerate(st.r):
        t = np.zeros((2, rs), dtype=complex)
        t[:, 0] = chart.monodromies_X[s]
        t[:, 1:] = 0.5 * chart.T_X[s][None, :]
        tau = chart.tau_X[s]
        for k in range(1, len(tau) + 1):
            t[:, k] += sgn * 0.5 * T2 ** (-k) * tau[k - 1]
        if chart.case == "rinf=1,n=1":
            t[:, rs - 1] += sgn * T2 ** (-(rs - 1))
        tX.append(t)
    X = np.zeros(st.n, dtype=complex)
    if chart.case == "rinf>=3":
        for s in range(st.n):
            X[s] = (chart.X_tilde[s] - T1) / T2
    else:
        X[0] = -T1 / T2
        if chart.case == "rinf=1,n>=2":
            X[1] = (1 - T1) / T2
        for s, v in chart.X_tilde.items():
            X[s] = (v - T1) / T2
    return ConnectionConfig(st.with_positions(X), ti, tX, chart.hbar)


# -- dual derivatives -------------------------------------------------------------

def dual_derivative_coefficients(chart: TimeChart, iso_time: str) -> DeformationVector:
    """Deformation vector alpha with L_alpha = hbar d/d(iso_time) at fixed trivial times."""
    st = chart.structure
    r = st.r_inf
    T1, T2 = chart.T1, chart.T2
    a_inf = np.zeros((2, r), dtype=complex)
    a_X = [np.zeros((2, rs), dtype=complex) for rs in st.r]
    a_pos = np.zeros(st.n, dtype=complex)
    if iso_time not in chart.iso_names():
        raise ChartError(f"{iso_time} is not an isomonodromic time of the {chart.case} chart")
    if iso_time.startswith("tau_inf_"):
        m = int(iso_time.split("_")[-1])
        for k in range(1, m + 1):
            c = 0.5 * T2 ** k * comb(m - 1, k - 1) * T1 ** (m - k)
            a_inf[0, k] += c
            a_inf[1, k] -= c
    elif iso_time.startswith("tau_X"):
        s_str, k_str = iso_time[len("tau_X"):].split("_")
        s, k = int(s_str) - 1, int(k_str)
        a_X[s][0, k] = 0.5 * T2 ** (-k)
        a_X[s][1, k] = -0.5 * T2 ** (-k)
    else:
        s = int(iso_time.split("_")[-1]) - 1
        a_pos[s] = 1.0 / T2
    return DeformationVector(a_inf, tuple(a_X), a_pos)


def dual_derivative_numeric(chart: TimeChart, iso_time: str, eps: float = 1e-6) -> DeformationVector:
    """Same vector from a central difference of the inverse map (used as a cross-check)."""
    names = chart.iso_names()
    i = names.index(iso_time)
    v = chart.iso_times()
    e = np.zeros(len(v), dtype=complex)
    e[i] = eps
    cp = inverse_time_map(chart.with_iso_times(v + e))
    cm = inverse_time_map(chart.with_iso_times(v - e))
    return DeformationVector((cp.t_inf - cm.t_inf) / (2 * eps),
                             tuple((a - b) / (2 * eps) for a, b in zip(cp.t_X, cm.t_X)),
                             (cp.X - cm.X) / (2 * eps))


# -- shifted coordinates ------------------------------------------------------------

def shift_coordinates(config: ConnectionConfig, state: DarbouxState, chart: TimeChart | None = None) -> DarbouxState:
    chart = forward_time_map(config) if chart is None else chart
    P1 = compute_P1(config)
    q, p = state.q, state.p
    return DarbouxState(chart.T2 * q + chart.T1, (p - 0.5 * P1(q)) / chart.T2)


def unshift_coordinates(config: ConnectionConfig, shifted: DarbouxState, chart: TimeChart | None = None) -> DarbouxState:
    chart = forward_time_map(config) if chart is None else chart
    q = (shifted.q - chart.T1) / chart.T2
    P1 = compute_P1(config)
    return DarbouxState(q, chart.T2 * shifted.p + 0.5 * P1(q))


# -- canonical chart ----------------------------------------------------------------

def canonical_chart(structure: PoleStructure, iso_times, monodromies_inf1: complex = 0.0,
                    monodromies_X1=None, hbar=1.0) -> TimeChart:
    """Chart with every trivial time at its canonical value (T = 0, T1 = 0, T2 = 1)."""
    case = chart_case(structure)
    r = structure.r_inf
    n = structure.n
    if monodromies_X1 is None:
        monodromies_X1 = np.zeros(n)
    mono_inf = np.array([monodromies_inf1, -monodromies_inf1], dtype=complex)
    mono_X = tuple(np.array([m, -m], dtype=complex) for m in monodromies_X1)
    tau_inf_len = max(r - 3, 0)
    if case == "rinf=1,n=1":
        tau_X_len = [structure.r[0] - 2]
    else:
        tau_X_len = [rs - 1 for rs in structure.r]
    Xt_keys = {"rinf>=3": range(n), "rinf=2": range(1, n), "rinf=1,n>=2": range(2, n),
               "rinf=1,n=1": range(0)}[case]
    proto = TimeChart(structure, case, 0j, 1.0 + 0j, np.zeros(r - 1, dtype=complex),
                      tuple(np.zeros(rs - 1, dtype=complex) for rs in structure.r),
                      np.zeros(tau_inf_len, dtype=complex),
                      tuple(np.zeros(m, dtype=complex) for m in tau_X_len),
                      {s: 0j for s in Xt_keys}, mono_inf, mono_X, 0, hbar)
    iso_times = np.asarray(iso_times, dtype=complex)
    if len(iso_times) != len(proto.iso_names()):
        raise ChartError(f"expected {len(proto.iso_names())} isomonodromic times, got {len(iso_times)}")
    return proto.with_iso_times(iso_times)


def specialize_canonical(structure: PoleStructure, iso_times, monodromies_inf1: complex = 0.0,
                         monodromies_X1=None, hbar=1.0) -> ConnectionConfig:
    """Connection data with all trivial times canonical; sheet 2 is minus sheet 1.

    ``structure.X`` is ignored: positions follow from the chart (X_1 = 0, X_2 = 1, ...).
    """
    st = PoleStructure(structure.r_inf, structure.r, tuple(np.zeros(structure.n)))
    return inverse_time_map(canonical_chart(st, iso_times, monodromies_inf1, monodromies_X1, hbar))


def is_canonical(config: ConnectionConfig, tol: float = 1e-10) -> bool:
    try:
        ch = forward_time_map(config)
    except ChartError:
        return False
    sums = [abs(v) for v in ch.T_inf] + [abs(v) for t in ch.T_X for v in t]
    sums += [abs(config.t_inf[0, 0] + config.t_inf[1, 0])]
    sums += [abs(t[0, 0] + t[1, 0]) for t in config.t_X]
    return abs(ch.T1) <= tol and abs(ch.T2 - 1) <= tol and all(v <= tol for v in sums)


# -- reduced Hamiltonians -------------------------------------------------------------

def reduced_hamiltonians(config: ConnectionConfig, H: IsospectralHamiltonians,
                         tol: float = 1e-10) -> dict:
    """Hamiltonians of the isomonodromic times as combinations of the isospectral coefficients."""
    if not is_canonical(config, tol):
        raise NotCanonicalError("trivial times are not at their canonical values")
    ch = forward_time_map(config)
    r = config.r_inf
    out = {}
    if r >= 4:
        # 2 on the diagonal, 0 below it, then tau_{inf,r-3}, ..., tau_{inf,3}
        col = [2.0, 0.0] + [ch.tau_inf[r - 1 - i - 1] for i in range(2, r - 3)]
        col = col[:r - 3]
        rhs = [H.H_inf[r - 4 - i] for i in range(r - 3)]
        sol = lower_toeplitz_solve(col, rhs)
        for j in range(1, r - 2):
            out[f"tau_inf_{j}"] = sol[j - 1] / j
    for s, rs in enumerate(config.r):
        tau = ch.tau_X[s]
        m = len(tau)
        if m == 0:
            continue
        if ch.case == "rinf=1,n=1":
            full = np.concatenate([tau, [2.0]])
        else:
            full = tau
        d = len(full)
        col = [full[d - 1 - i] for i in range(d)]
        rhs = [H.pole(s, rs - i) for i in range(d)]
        sol = lower_toeplitz_solve(col, rhs)
        for k in range(1, m + 1):
            out[f"tau_X{s + 1}_{k}"] = sol[k - 1] / k
    for s in ch.X_tilde:
        out[f"Xt_{s + 1}"] = H.pole(s, 1)
    return out


# -- trivial deformation vectors --------------------------------------------------------

def _zero(structure: PoleStructure):
    return (np.zeros((2, structure.r_inf), dtype=complex),
            [np.zeros((2, rs), dtype=complex) for rs in structure.r],
            np.zeros(structure.n, dtype=complex))


def vector_v_inf(config: ConnectionConfig, k: int) -> DeformationVector:
    a_inf, a_X, a_pos = _zero(config.structure)
    a_inf[:, k] = 1.0
    return DeformationVector(a_inf, tuple(a_X), a_pos)


def vector_v_X(config: ConnectionConfig, s: int, k: int) -> DeformationVector:
    a_inf, a_X, a_pos = _zero(config.structure)
    a_X[s][:, k] = 1.0
    return DeformationVector(a_inf, tuple(a_X), a_pos)


def vector_u_inf(config: ConnectionConfig, k: int) -> DeformationVector:
    a_inf, a_X, a_pos = _zero(config.structure)
    r = config.r_inf
    for j in range(1, k + 1):
        a_inf[:, j] = j * config.t_inf[:, r - 1 - k + j]
    return DeformationVector(a_inf, tuple(a_X), a_pos)


def vector_u_X(config: ConnectionConfig, s: int, k: int) -> DeformationVector:
    a_inf, a_X, a_pos = _zero(config.structure)
    rs = config.r[s]
    for j in range(1, k + 1):
        a_X[s][:, j] = j * config.t_X[s][:, rs - 1 - k + j]
    return DeformationVector(a_inf, tuple(a_X), a_pos)


def vector_a(config: ConnectionConfig) -> DeformationVector:
    a_inf, a_X, a_pos = _zero(config.structure)
    for k in range(1, config.r_inf):
        a_inf[:, k] = k * config.t_inf[:, k]
    for s, rs in enumerate(config.r):
        for k in range(1, rs):
            a_X[s][:, k] = -k * config.t_X[s][:, k]
    a_pos[:] = -config.X
    return DeformationVector(a_inf, tuple(a_X), a_pos)


def vector_b(config: ConnectionConfig) -> DeformationVector:
    a_inf, a_X, a_pos = _zero(config.structure)
    for k in range(1, config.r_inf - 1):
        a_inf[:, k] = k * config.t_inf[:, k + 1]
    a_pos[:] = -1.0
    return DeformationVector(a_inf, tuple(a_X), a_pos)


def vector_w(config: ConnectionConfig, s: int) -> DeformationVector:
    a_inf, a_X, a_pos = _zero(config.structure)
    a_pos[s] = 1.0
    return DeformationVector(a_inf, tuple(a_X), a_pos)


def trivial_vectors(config: ConnectionConfig) -> dict:
    """The trivial directions: v_{inf,k}, v_{X_s,k}, a and b."""
    out = {}
    for k in range(1, config.r_inf):
        out[f"v_inf_{k}"] = vector_v_inf(config, k)
    for s, rs in enumerate(config.r):
        for k in range(1, rs):
            out[f"v_X{s + 1}_{k}"] = vector_v_X(config, s, k)
    out["a"] = vector_a(config)
    out["b"] = vector_b(config)
    return out


def reduced_hamiltonian_value(config: ConnectionConfig, H: IsospectralHamiltonians, coeffs,
                              alpha: DeformationVector) -> complex:
    """Hamiltonian of alpha once the trivial times are canonical.

    sum_k nu_{inf,k+1} H_{inf,k} - sum_{s,k>=2} nu_{X_s,k-1} H_{X_s,k} + sum_s alpha_{X_s} H_{X_s,1}
    """
    acc = 0j
    for k in range(max(config.r_inf - 3, 0)):
        acc += coeffs.nu(k + 1) * H.H_inf[k]
    for s, (rs, nus) in enumerate(zip(config.r, coeffs.nu_X)):
        for k in range(2, rs + 1):
            acc -= nus[k - 1] * H.pole(s, k)
        acc += alpha.a_pos[s] * H.pole(s, 1)
    return complex(acc)
