"""Coefficients of the auxiliary matrix A_alpha and its assembly.

The nu and c blocks come from lower triangular Toeplitz systems built from the
sheet differences of the irregular times; mu (plus nu_{inf,-1}, nu_{inf,0}
when r_inf <= 2) comes from the Vandermonde-like system in the q_j.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .connection import (ConnectionConfig, DarbouxState, DeformationVector, compute_P1,
                         compute_P2_tilde)
from .lax import (IsospectralHamiltonians, LaxMatrix, V_matrix, build_Q_polynomial,
                  companion_L21, companion_L22, compute_eta0, isospectral_system, pi_X_at)
from .linalg import dense_solve, lower_toeplitz_solve
from .rational import RationalFunction

R = RationalFunction


@dataclass
class DeformationCoefficients:
    nu_inf: np.ndarray          # nu_{inf,-1} .. nu_{inf,r_inf-3}; index i+1 holds nu_{inf,i}
    nu_X: tuple                 # per pole: nu_{X_s,0} .. nu_{X_s,r_s-1}
    mu: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    c_inf: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))  # c_{inf,0..r_inf-1}
    c_X: tuple = ()             # per pole: c_{X_s,1} .. c_{X_s,r_s-1}
    rho: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    undetermined: tuple = ()    # names of nu_inf entries left for the mu system

    def nu(self, i: int) -> complex:
        """nu_{inf,i} for i >= -1 (zero beyond the stored range)."""
        k = i + 1
        return self.nu_inf[k] if 0 <= k < len(self.nu_inf) else 0j

    def c(self, k: int) -> complex:
        return self.c_inf[k] if 0 <= k < len(self.c_inf) else 0j


def _diff(a: np.ndarray) -> np.ndarray:
    return a[0] - a[1]


# -- nu --------------------------------------------------------------------------

def solve_nu(config: ConnectionConfig, alpha: DeformationVector, recursion: bool = False) -> DeformationCoefficients:
    """nu blocks from the Toeplitz systems; recursion=True uses the explicit recursions instead."""
    r = config.r_inf
    nu_X = []
    for s, (t, a, rs) in enumerate(zip(config.t_X, alpha.a_X, config.r)):
        dt, da = _diff(t), _diff(a)
        nus = np.zeros(rs, dtype=complex)
        nus[0] = -alpha.a_pos[s]
        if rs >= 2:
            if recursion:
                nus[1:] = _nu_pole_recursion(dt, da, rs)
            else:
                col = [dt[rs - 1 - i] for i in range(rs - 1)]
                rhs = [-da[rs - 1 - i] / (rs - 1 - i) for i in range(rs - 1)]
                nus[1:] = lower_toeplitz_solve(col, rhs)
        nu_X.append(nus)
    dt, da = _diff(config.t_inf), _diff(alpha.a_inf)
    undetermined: tuple = ()
    if r >= 3:
        if recursion:
            nu_inf = _nu_inf_recursion(dt, da, r)
        else:
            col = [dt[r - 1 - i] for i in range(r - 1)]
            rhs = [da[r - 1 - i] / (r - 1 - i) for i in range(r - 1)]
            nu_inf = lower_toeplitz_solve(col, rhs)
    elif r == 2:
        nu_inf = np.array([da[1] / dt[1], 0.0], dtype=complex)
        undetermined = ("nu_inf_0",)
    else:
        nu_inf = np.zeros(2, dtype=complex)
        undetermined = ("nu_inf_-1", "nu_inf_0")
    return DeformationCoefficients(np.asarray(nu_inf, dtype=complex), tuple(nu_X),
                                   undetermined=undetermined)


def _nu_inf_recursion(dt, da, r):
    # nu[i+1] = nu_{inf,i}
    nu = np.zeros(r - 1, dtype=complex)
    lead = dt[r - 1]
    nu[0] = da[r - 1] / ((r - 1) * lead)
    if r - 1 >= 2:
        nu[1] = -dt[r - 2] * da[r - 1] / ((r - 1) * lead ** 2) + da[r - 2] / ((r - 2) * lead)
    for k in range(r - 3, 0, -1):
        idx = r - 2 - k
        acc = da[k] / k
        for i in range(-1, r - 2 - k):
            acc -= dt[k + i + 1] * nu[i + 1]
        nu[idx + 1] = acc / lead
    return nu


def _nu_pole_recursion(dt, da, rs):
    # returns nu_{X_s,1..rs-1}
    nu = np.zeros(rs, dtype=complex)
    lead = dt[rs - 1]
    for k in range(rs - 1, 0, -1):
        acc = -da[k] / k
        for i in range(1, rs - k):
            acc -= dt[k + i - 1] * nu[i]
        nu[rs - k] = acc / lead
    return nu[1:]


# -- mu ----------------------------------------------------------------------------

def mu_system(config: ConnectionConfig, state: DarbouxState, nu: DeformationCoefficients):
    """Square system for mu, with nu_{inf,0} (r_inf <= 2) and nu_{inf,-1} (r_inf = 1) appended as unknowns."""
    r = config.r_inf
    q = state.q
    V = V_matrix(config, q)
    rhs = []
    for k in range(1, max(r - 3, 0) + 1):
        rhs.append(nu.nu(k))
    extra_cols = []
    if r <= 2:
        extra_cols.append(np.zeros(V.shape[0], dtype=complex))  # nu_{inf,0}
    if r == 1:
        extra_cols.append(np.zeros(V.shape[0], dtype=complex))  # nu_{inf,-1}
    row = max(r - 3, 0)
    for x, rs, nus in zip(config.X, config.r, nu.nu_X):
        first = -nus[0]
        if r >= 2:
            first += nu.nu(-1) * x
        if r >= 3:
            first += nu.nu(0)
        if r <= 2:
            extra_cols[0][row] = -1.0
        if r == 1:
            extra_cols[1][row] = -x
        rhs.append(first)
        if rs >= 2:
            second = -nus[1]
            if r >= 2:
                second += nu.nu(-1)
            else:
                extra_cols[1][row + 1] = -1.0
            rhs.append(second)
        for k in range(2, rs):
            rhs.append(-nus[k])
        row += rs
    A = np.column_stack([V] + extra_cols) if extra_cols else V
    return A, np.array(rhs, dtype=complex)


def solve_mu(config: ConnectionConfig, state: DarbouxState, nu: DeformationCoefficients) -> DeformationCoefficients:
    A, b = mu_system(config, state, nu)
    sol = dense_solve(A, b)
    g = len(state.q)
    nu_inf = nu.nu_inf.copy()
    if config.r_inf <= 2:
        nu_inf[1] = sol[g]
    if config.r_inf == 1:
        nu_inf[0] = sol[g + 1]
    return DeformationCoefficients(nu_inf, nu.nu_X, sol[:g].copy(), nu.c_inf, nu.c_X,
                                   -sol[:g] * state.p, ())


# -- c -----------------------------------------------------------------------------

def _c_block(t: np.ndarray, a: np.ndarray, rr: int) -> np.ndarray:
    """Returns c_1 .. c_{rr-1} for one pole."""
    if rr < 2:
        return np.zeros(0, dtype=complex)
    dt = _diff(t)
    col = [dt[rr - 1 - i] for i in range(rr - 1)]
    rhs = []
    for j in range(rr - 1):
        acc = 0j
        for k in range(rr - 1 - j, rr):
            m = 2 * rr - 2 - j - k
            acc += (t[1, m] * a[0, k] - t[0, m] * a[1, k]) / k
        rhs.append(acc)
    sol = lower_toeplitz_solve(col, rhs)  # (c_{rr-1}, ..., c_1)
    return sol[::-1].copy()


def solve_c(config: ConnectionConfig, alpha: DeformationVector, nu: DeformationCoefficients) -> DeformationCoefficients:
    r = config.r_inf
    c_inf = np.zeros(max(r, 1), dtype=complex)
    c_inf[1:] = _c_block(config.t_inf, alpha.a_inf, r)
    c_inf[0] = 0.5 * nu.nu(-1)
    c_X = tuple(_c_block(t, a, rs) for t, a, rs in zip(config.t_X, alpha.a_X, config.r))
    return DeformationCoefficients(nu.nu_inf, nu.nu_X, nu.mu, c_inf, c_X, nu.rho, nu.undetermined)


def deformation_coefficients(config: ConnectionConfig, state: DarbouxState,
                             alpha: DeformationVector) -> DeformationCoefficients:
    nu = solve_nu(config, alpha)
    full = solve_mu(config, state, nu)
    return solve_c(config, alpha, full)


# -- A in the companion gauge ------------------------------------------------------

def A12_function(coeffs: DeformationCoefficients, state: DarbouxState) -> RationalFunction:
    return R([coeffs.nu(0), coeffs.nu(-1)], {q: [m] for q, m in zip(state.q, coeffs.mu)})


def A11_function(config: ConnectionConfig, coeffs: DeformationCoefficients, state: DarbouxState) -> RationalFunction:
    parts = {x: c for x, c in zip(config.X, coeffs.c_X) if len(c)}
    for q, rho in zip(state.q, coeffs.rho):
        parts[q] = [rho]
    return R(coeffs.c_inf, parts)


def build_A_companion(config: ConnectionConfig, state: DarbouxState, coeffs: DeformationCoefficients,
                      H: IsospectralHamiltonians, L: LaxMatrix | None = None) -> LaxMatrix:
    hb = config.hbar
    if L is None:
        L21, L22 = companion_L21(config, state, H), companion_L22(config, state)
    else:
        L21, L22 = L[1, 0], L[1, 1]
    A12 = A12_function(coeffs, state)
    A11 = A11_function(config, coeffs, state)
    A21 = hb * A11.derivative() + A12 * L21
    A22 = hb * A12.derivative() + A11 + A12 * L22
    return LaxMatrix([[A11, A12], [A21, A22]], "companion")


# -- evolution of the Darboux coordinates --------------------------------------------

def evolution_field(config: ConnectionConfig, state: DarbouxState, coeffs: DeformationCoefficients,
                    H: IsospectralHamiltonians):
    """(L q_j, L p_j), i.e. hbar times the derivatives along alpha."""
    hb = config.hbar
    q, p = state.q, state.p
    g = len(q)
    r = config.r_inf
    mu = coeffs.mu
    P1 = compute_P1(config)
    dP1 = P1.derivative()
    dP2 = compute_P2_tilde(config).derivative()
    t_lead = config.t_inf[0, r - 1]
    dq = np.zeros(g, dtype=complex)
    dp = np.zeros(g, dtype=complex)
    for j in range(g):
        qj, pj = q[j], p[j]
        S1 = sum(hb * rs / (qj - x) for x, rs in zip(config.X, config.r))
        S2 = sum(hb * rs / (qj - x) ** 2 for x, rs in zip(config.X, config.r))
        v = 2 * mu[j] * (pj - 0.5 * P1(qj) + 0.5 * S1) - hb * coeffs.nu(0) - hb * coeffs.nu(-1) * qj
        w = 0j
        for i in range(g):
            if i != j:
                v -= hb * (mu[j] + mu[i]) / (qj - q[i])
                w += hb * (mu[i] + mu[j]) * (p[i] - pj) / (qj - q[i]) ** 2
        dq[j] = v
        bracket = pj * dP1(qj) + pj * S2 - dP2(qj)
        for k in range(1, len(H.H_inf)):
            bracket += k * H.H_inf[k] * qj ** (k - 1)
        for x, h in zip(config.X, H.H_X):
            for k in range(1, len(h) + 1):
                bracket -= k * h[k - 1] * (qj - x) ** (-k - 1)
        if r >= 4:
            bracket -= hb * (r - 3) * t_lead * qj ** (r - 4)
        w += mu[j] * bracket + hb * coeffs.nu(-1) * pj
        for k in range(1, len(coeffs.c_inf)):
            w += hb * k * coeffs.c_inf[k] * qj ** (k - 1)
        for x, c in zip(config.X, coeffs.c_X):
            for k in range(1, len(c) + 1):
                w -= hb * k * c[k - 1] * (qj - x) ** (-k - 1)
        dp[j] = w
    return dq, dp


# -- explicit (parameter) variations -----------------------------------------------

def position_variation(F: RationalFunction, X, dX) -> RationalFunction:
    """Variation of F coming from moving its marked points X_s by dX_s."""
    out = R.zero()
    for x, d in zip(X, dX):
        a = F.part(x)
        if len(a) == 0 or d == 0:
            continue
        b = np.zeros(len(a) + 1, dtype=complex)
        for k in range(1, len(a) + 1):
            b[k] = k * a[k - 1]
        out = out + R(None, {x: b * d})
    return out


def explicit_P1_variation(config: ConnectionConfig, alpha: DeformationVector) -> RationalFunction:
    hb = config.hbar
    lin = config.with_data(alpha.a_inf, alpha.a_X)
    F = compute_P1(lin) * hb
    return F + position_variation(compute_P1(config), config.X, hb * alpha.a_pos)


def explicit_P2_variation(config: ConnectionConfig, alpha: DeformationVector) -> RationalFunction:
    hb = config.hbar
    ti, tX = config.t_inf, config.t_X
    a1 = np.stack([alpha.a_inf[0], ti[1]])
    a2 = np.stack([ti[0], alpha.a_inf[1]])
    x1 = [np.stack([a[0], t[1]]) for a, t in zip(alpha.a_X, tX)]
    x2 = [np.stack([t[0], a[1]]) for a, t in zip(alpha.a_X, tX)]
    F = (compute_P2_tilde(config, a1, x1) + compute_P2_tilde(config, a2, x2)) * hb
    return F + position_variation(compute_P2_tilde(config), config.X, hb * alpha.a_pos)


def lie_derivative_H(config: ConnectionConfig, state: DarbouxState, alpha: DeformationVector,
                     H: IsospectralHamiltonians, dq, dp) -> IsospectralHamiltonians:
    """Variation of the isospectral coefficients along alpha (differentiated linear system)."""
    hb = config.hbar
    q, p = state.q, state.p
    g = len(q)
    r = config.r_inf
    dX = hb * alpha.a_pos
    M, _ = isospectral_system(config, state)
    h = H.as_vector()
    dM = np.zeros_like(M)
    col = 0
    for k in range(max(r - 3, 0)):
        if k > 0:
            dM[:g, col] = k * q ** (k - 1) * dq
        col += 1
    for x, rs, d in zip(config.X, config.r, dX):
        for k in range(1, rs + 1):
            dM[:g, col] = -k * (q - x) ** (-k - 1) * (dq - d)
            col += 1
    if r == 1:
        col = 0
        for rs, d in zip(config.r, dX):
            dM[g, col] = d
            col += rs
    P1 = compute_P1(config)
    P2t = compute_P2_tilde(config)
    dP1, dP2 = P1.derivative(), P2t.derivative()
    vP1 = explicit_P1_variation(config, alpha)
    vP2 = explicit_P2_variation(config, alpha)
    db = np.zeros(M.shape[0], dtype=complex)
    t_lead = config.t_inf[0, r - 1]
    for j in range(g):
        qj, pj = q[j], p[j]
        S = sum(hb * rs / (qj - x) for x, rs in zip(config.X, config.r))
        dS = sum(-hb * rs * (dq[j] - d) / (qj - x) ** 2 for x, rs, d in zip(config.X, config.r, dX))
        v = 2 * pj * dp[j] - (dP1(qj) * dq[j] + vP1(qj)) * pj - P1(qj) * dp[j]
        v += dP2(qj) * dq[j] + vP2(qj) + dp[j] * S + pj * dS
        for i in range(g):
            if i != j:
                v += hb * ((dp[i] - dp[j]) / (qj - q[i]) - (p[i] - pj) * (dq[j] - dq[i]) / (qj - q[i]) ** 2)
        if r >= 3:
            v += hb * hb * alpha.a_inf[0, r - 1] * qj ** (r - 3)
            if r >= 4:
                v += hb * t_lead * (r - 3) * qj ** (r - 4) * dq[j]
        db[j] = v
    ti, ai = config.t_inf, alpha.a_inf
    if r == 2:
        db[g] = hb * dp.sum() - hb * (ai[0, 1] * ti[1, 0] + ai[1, 1] * ti[0, 0] + hb * ai[0, 1])
    elif r == 1:
        db[g] = hb * np.sum(dq * p + q * dp)
        db[g + 1] = hb * dp.sum()
    dh = dense_solve(M, db - dM @ h)
    return IsospectralHamiltonians.from_vector(dh, r, config.r)


def lie_derivative_eta0(config: ConnectionConfig, state: DarbouxState, alpha: DeformationVector,
                        H: IsospectralHamiltonians, dq, dp) -> complex:
    hb = config.hbar
    r = config.r_inf
    q, p = state.q, state.p
    X = config.X
    dX = hb * alpha.a_pos
    shift = q.sum() - sum(rs * x for rs, x in zip(config.r, X))
    dshift = dq.sum() - sum(rs * d for rs, d in zip(config.r, dX))
    t1 = config.t_inf[0]
    if r >= 2:
        out = hb * alpha.a_inf[0, r - 1] * shift + t1[r - 1] * dshift
        if r - 2 >= 1:
            out += hb * alpha.a_inf[0, r - 2]
        return out
    dH = lie_derivative_H(config, state, alpha, H, dq, dp)
    th1, th2 = config.t_inf[0, 0], config.t_inf[1, 0]
    acc = 0j
    for s, (x, rs, t, a, d) in enumerate(zip(X, config.r, config.t_X, alpha.a_X, dX)):
        if rs == 1:
            acc -= 2 * d * t[0, 0] * t[1, 0]
        elif rs == 2:
            acc -= hb * (t[0, 0] * a[1, 1] + a[0, 1] * t[1, 0])
        acc += 2 * x * d * H.pole(s, 1) + x ** 2 * dH.pole(s, 1)
        if rs >= 2:
            acc += 2 * d * H.pole(s, 2) + 2 * x * dH.pole(s, 2)
        if rs >= 3:
            acc += dH.pole(s, 3)
        tsum = d * (t[0, 0] + t[1, 0])
        if rs >= 2:
            tsum += hb * (a[0, 1] + a[1, 1])
        acc -= th1 * tsum
    acc -= hb * np.sum(dp * q ** 2 + 2 * p * q * dq)
    acc += th1 * (th1 - th2 - hb) * dshift
    return acc / (th1 - th2)


# -- A in the tilde gauge ---------------------------------------------------------------

class TildeA:
    """Evaluable tilde-gauge auxiliary matrix, A~ = G A G^-1 + (L_alpha G) G^-1.

    G = [[1, 0], [a, b]] maps companion-gauge wave functions to the tilde gauge,
    with a = t lam + eta0 + Q/prod(lam - q) and b = prod(lam - X)^r / prod(lam - q).
    """

    def __init__(self, config, state, coeffs, H, alpha, dq, dp, A: LaxMatrix | None = None,
                 L_G=None):
        self.config, self.state = config, state
        self.A = A if A is not None else build_A_companion(config, state, coeffs, H)
        hb = config.hbar
        r = config.r_inf
        self.t_lead = config.t_inf[0, r - 1]
        self.eta0 = compute_eta0(config, state, H)
        Q = build_Q_polynomial(config, state)
        q = state.q
        self.w = np.array([Q(qi) / np.prod(qi - np.delete(q, i)) for i, qi in enumerate(q)])
        self.L_G = L_G
        if L_G is None:
            dX = hb * alpha.a_pos
            Rr = np.array([pi_X_at(config, qi) / np.prod(qi - np.delete(q, i)) for i, qi in enumerate(q)])
            dlogR = np.zeros(len(q), dtype=complex)
            for i, qi in enumerate(q):
                v = sum(rs * (dq[i] - d) / (qi - x) for x, rs, d in zip(config.X, config.r, dX))
                v -= sum((dq[i] - dq[j]) / (qi - q[j]) for j in range(len(q)) if j != i)
                dlogR[i] = v
            self.dw = -dp * Rr + self.w * dlogR
            self.dq, self.dX = np.asarray(dq), dX
            self.d_t_lead = hb * alpha.a_inf[0, r - 1]
            self.d_eta0 = lie_derivative_eta0(config, state, alpha, H, np.asarray(dq), np.asarray(dp))

    def gauge_entries(self, lam):
        lam = np.asarray(lam, dtype=complex)
        q = self.state.q
        d = lam[..., None] - q
        a = self.t_lead * lam + self.eta0 + np.sum(self.w / d, axis=-1)
        b = np.prod(d, axis=-1) ** -1 * pi_X_at(self.config, lam)
        return a, b

    def lie_gauge_entries(self, lam):
        """(L a, L b / b) at lam."""
        lam = np.asarray(lam, dtype=complex)
        if self.L_G is not None:
            return self.L_G(lam)
        d = lam[..., None] - self.state.q
        La = self.d_t_lead * lam + self.d_eta0 + np.sum(self.dw / d + self.w * self.dq / d ** 2, axis=-1)
        Lb_b = np.sum(self.dq / d, axis=-1)
        for x, rs, dx in zip(self.config.X, self.config.r, self.dX):
            Lb_b = Lb_b - rs * dx / (lam - x)
        return La, Lb_b

    def evaluate(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        A = self.A.evaluate(lam)
        a, b = self.gauge_entries(lam)
        La, Lb_b = self.lie_gauge_entries(lam)
        G = np.zeros(lam.shape + (2, 2), dtype=complex)
        Gi = np.zeros_like(G)
        G[..., 0, 0] = 1.0
        G[..., 1, 0] = a
        G[..., 1, 1] = b
        Gi[..., 0, 0] = 1.0
        Gi[..., 1, 0] = -a / b
        Gi[..., 1, 1] = 1.0 / b
        out = G @ A @ Gi
        out[..., 1, 0] += La - Lb_b * a
        out[..., 1, 1] += Lb_b
        return out

    __call__ = evaluate


def build_A_tilde(config, state, coeffs, H, alpha, field=None) -> TildeA:
    if field is None:
        field = evolution_field(config, state, coeffs, H)
    dq, dp = field
    return TildeA(config, state, coeffs, H, alpha, np.asarray(dq), np.asarray(dp))
