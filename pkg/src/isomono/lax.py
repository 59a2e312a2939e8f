"""Lax matrices in the companion, check, tilde and c gauges.

The companion matrix carries the isospectral coefficients H, obtained from the
linear system expressing that the apparent singularities q_j are regular
points of the check-gauge matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .connection import (ConnectionConfig, DarbouxState, compute_P1, compute_P2_tilde,
                         p2_pole_coeffs)
from .linalg import dense_solve
from .rational import PoleEvaluationError, RationalFunction

R = RationalFunction


class MissingHamiltoniansError(ValueError):
    pass


@dataclass
class IsospectralHamiltonians:
    H_inf: np.ndarray
    H_X: tuple[np.ndarray, ...]

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.H_inf] + list(self.H_X)) if (len(self.H_inf) or self.H_X) \
            else np.zeros(0, dtype=complex)

    @classmethod
    def from_vector(cls, v, r_inf: int, r: Sequence[int]) -> "IsospectralHamiltonians":
        v = np.asarray(v, dtype=complex)
        ni = max(r_inf - 3, 0)
        out, pos = [], ni
        for rs in r:
            out.append(v[pos:pos + rs].copy())
            pos += rs
        return cls(v[:ni].copy(), tuple(out))

    def pole(self, s: int, j: int) -> complex:
        """H_{X_s, j} with zero outside the stored range (s 0-based, j 1-based)."""
        h = self.H_X[s]
        return h[j - 1] if 1 <= j <= len(h) else 0j


@dataclass
class LaxMatrix:
    entries: list  # [[L11, L12], [L21, L22]] of RationalFunction
    gauge: str
    dropped: float = 0.0  # largest principal-part coefficient removed at the q_j

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def evaluate(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        out = np.empty(lam.shape + (2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[..., i, j] = self.entries[i][j].evaluate(lam)
        return out

    def trace(self) -> RationalFunction:
        return self.entries[0][0] + self.entries[1][1]

    def det(self) -> RationalFunction:
        e = self.entries
        return e[0][0] * e[1][1] - e[0][1] * e[1][0]


# -- elementary pieces ----------------------------------------------------------

def pole_roots(config: ConnectionConfig) -> dict:
    return {x: r for x, r in zip(config.X, config.r)}


def pi_X_at(config: ConnectionConfig, lam) -> complex:
    out = 1.0 + 0j
    for x, r in zip(config.X, config.r):
        out = out * (lam - x) ** r
    return out


def build_Q_polynomial(config: ConnectionConfig, state: DarbouxState) -> RationalFunction:
    """Interpolant of degree g-1 with Q(q_i) = -p_i prod_s (q_i - X_s)^{r_s}."""
    q, p = state.q, state.p
    g = len(q)
    coeffs = np.zeros(g, dtype=complex)
    for i in range(g):
        others = np.delete(q, i)
        diff = q[i] - others
        if np.any(np.abs(diff) <= 1e-14 * (1 + abs(q[i]))):
            raise ValueError("coincident interpolation nodes")
        w = -p[i] * pi_X_at(config, q[i]) / np.prod(diff)
        basis = R.from_roots(others).poly
        coeffs[:len(basis)] += w * basis
    return R(coeffs)


def _p2_value(config: ConnectionConfig, s: int, j: int) -> complex:
    t = config.t_X[s]
    return p2_pole_coeffs(t[0], t[1]).get(j, 0j)


def compute_eta0(config: ConnectionConfig, state: DarbouxState,
                 H: IsospectralHamiltonians | None = None) -> complex:
    q, p = state.q, state.p
    t1 = config.t_inf[0]
    r = config.r_inf
    X = config.X
    shift = q.sum() - sum(rs * x for rs, x in zip(config.r, X))
    if r >= 2:
        return t1[r - 2] + t1[r - 1] * shift
    if H is None:
        raise MissingHamiltoniansError("eta0 for r_inf = 1 needs the isospectral coefficients")
    hb = config.hbar
    th1, th2 = config.t_inf[0, 0], config.t_inf[1, 0]
    acc = 0j
    for s, (x, rs, t) in enumerate(zip(X, config.r, config.t_X)):
        if rs == 1:
            acc -= 2 * x * _p2_value(config, s, 2)
        elif rs == 2:
            acc -= _p2_value(config, s, 3)
        acc += x ** 2 * H.pole(s, 1)
        if rs >= 2:
            acc += 2 * x * H.pole(s, 2)
        if rs >= 3:
            acc += H.pole(s, 3)
        tsum = x * (t[0, 0] + t[1, 0])
        if rs >= 2:
            tsum += t[0, 1] + t[1, 1]
        acc -= th1 * tsum
    acc -= hb * np.sum(p * q ** 2)
    acc += th1 * (th1 - th2 - hb) * shift
    return acc / (th1 - th2)


def V_matrix(config: ConnectionConfig, q) -> np.ndarray:
    """Stacked [V_inf; V_1; ...; V_n]: rows q_j^k (k < r_inf-3), then (q_j - X_s)^-k."""
    q = np.asarray(q, dtype=complex)
    rows = [q ** k for k in range(max(config.r_inf - 3, 0))]
    for x, rs in zip(config.X, config.r):
        for k in range(1, rs + 1):
            rows.append((q - x) ** (-k))
    return np.array(rows, dtype=complex).reshape(len(rows), len(q))


def isospectral_rhs(config: ConnectionConfig, state: DarbouxState,
                    P1: RationalFunction | None = None,
                    P2t: RationalFunction | None = None) -> np.ndarray:
    q, p = state.q, state.p
    hb = config.hbar
    P1 = compute_P1(config) if P1 is None else P1
    P2t = compute_P2_tilde(config) if P2t is None else P2t
    r = config.r_inf
    out = np.zeros(len(q), dtype=complex)
    for j in range(len(q)):
        v = p[j] ** 2 - P1(q[j]) * p[j] + P2t(q[j])
        v += p[j] * sum(hb * rs / (q[j] - x) for x, rs in zip(config.X, config.r))
        for i in range(len(q)):
            if i != j:
                v += hb * (p[i] - p[j]) / (q[j] - q[i])
        if r >= 3:
            v += hb * config.t_inf[0, r - 1] * q[j] ** (r - 3)
        out[j] = v
    return out


def isospectral_system(config: ConnectionConfig, state: DarbouxState):
    """Square system (matrix, rhs) for the isospectral coefficients."""
    q, p = state.q, state.p
    hb = config.hbar
    M = V_matrix(config, q).T
    b = isospectral_rhs(config, state)
    r = config.r_inf
    ni = max(r - 3, 0)
    ncols = M.shape[1]
    extra_rows, extra_b = [], []
    ti = config.t_inf
    if r <= 2:
        row1 = np.zeros(ncols, dtype=complex)
        pos = ni
        for rs in config.r:
            row1[pos] = 1.0
            pos += rs
        if r == 2:
            extra_rows.append(row1)
            extra_b.append(hb * p.sum() - (ti[0, 1] * ti[1, 0] + ti[1, 1] * ti[0, 0] + hb * ti[0, 1]))
        else:
            row2 = np.zeros(ncols, dtype=complex)
            pos = 0
            rhs2 = hb * np.sum(q * p) - ti[0, 0] * (ti[1, 0] + hb)
            for x, rs, t in zip(config.X, config.r, config.t_X):
                row2[pos] = x
                if rs >= 2:
                    row2[pos + 1] = 1.0
                else:
                    rhs2 += t[0, 0] * t[1, 0]
                pos += rs
            extra_rows += [row2, row1]
            extra_b += [rhs2, hb * p.sum()]
    if extra_rows:
        M = np.vstack([M, np.array(extra_rows)])
        b = np.concatenate([b, np.array(extra_b)])
    return M, b


def solve_isospectral_H(config: ConnectionConfig, state: DarbouxState) -> IsospectralHamiltonians:
    M, b = isospectral_system(config, state)
    return IsospectralHamiltonians.from_vector(dense_solve(M, b), config.r_inf, config.r)


# -- Lax matrices ---------------------------------------------------------------

def companion_L21(config: ConnectionConfig, state: DarbouxState,
                  H: IsospectralHamiltonians) -> RationalFunction:
    hb = config.hbar
    r = config.r_inf
    f = -compute_P2_tilde(config)
    if len(H.H_inf):
        f = f + R(H.H_inf)
    parts = {x: h for x, h in zip(config.X, H.H_X)}
    for qj, pj in zip(state.q, state.p):
        parts[qj] = [-hb * pj]
    f = f + R(None, parts)
    if r >= 3:
        f = f - R.monomial(r - 3, hb * config.t_inf[0, r - 1])
    return f


def companion_L22(config: ConnectionConfig, state: DarbouxState) -> RationalFunction:
    hb = config.hbar
    parts = {x: [-hb * rs] for x, rs in zip(config.X, config.r)}
    for qj in state.q:
        parts[qj] = [hb]
    return compute_P1(config) + R(None, parts)


def build_L_companion(config, state, H) -> LaxMatrix:
    return LaxMatrix([[R.zero(), R.constant(1.0)],
                      [companion_L21(config, state, H), companion_L22(config, state)]],
                     "companion")


def _gauge_pieces(config, state):
    Q = build_Q_polynomial(config, state)
    Piq = R.from_roots(state.q)
    PiX = R.from_roots(pole_roots(config))
    inv_PiX = R.reciprocal_of_roots(pole_roots(config))
    inv_Piq = R.reciprocal_of_roots(state.q)
    return Q, Piq, PiX, inv_PiX, inv_Piq


def build_L_check(config, state, H) -> LaxMatrix:
    hb = config.hbar
    Q, Piq, PiX, inv_PiX, inv_Piq = _gauge_pieces(config, state)
    P1 = compute_P1(config)
    L21 = companion_L21(config, state, H)
    Q_X = Q * inv_PiX
    Q_q = Q * inv_Piq
    c11 = -Q_X
    c12 = Piq * inv_PiX
    c22 = P1 + Q_X
    c21 = hb * Q_q.derivative() + L21 * (PiX * inv_Piq) - P1 * Q_q - Q_q * Q_X
    dropped = 0.0
    out = []
    for e in (c11, c12, c21, c22):
        e, d = e.drop_points(state.q)
        dropped = max(dropped, d)
        out.append(e)
    return LaxMatrix([[out[0], out[1]], [out[2], out[3]]], "check", dropped)


def build_L_tilde(config, state, H, eta0: complex | None = None) -> LaxMatrix:
    hb = config.hbar
    Lc = build_L_check(config, state, H)
    t = config.t_inf[0, config.r_inf - 1]
    if eta0 is None:
        eta0 = compute_eta0(config, state, H)
    G = R([eta0, t])
    c11, c12, c21, c22 = Lc[0, 0], Lc[0, 1], Lc[1, 0], Lc[1, 1]
    Gc12 = G * c12
    t11 = c11 - Gc12
    t22 = c22 + Gc12
    t21 = c21 - G * Gc12 + G * (c11 - c22) + hb * t
    return LaxMatrix([[t11, c12], [t21, t22]], "tilde", Lc.dropped)


def build_L_c(config, state, H) -> LaxMatrix:
    Piq = R.from_roots(state.q)
    PiX = R.from_roots(pole_roots(config))
    c12 = Piq * R.reciprocal_of_roots(pole_roots(config))
    ratio = PiX * R.reciprocal_of_roots(state.q)
    c21 = ratio * companion_L21(config, state, H)
    return LaxMatrix([[R.zero(), c12], [c21, compute_P1(config)]], "c")


def half_trace_square_minus(Lc: LaxMatrix, P1: RationalFunction) -> RationalFunction:
    """1/2 Tr(L_c^2) - 1/2 P1^2."""
    a, b, c, d = Lc[0, 0], Lc[0, 1], Lc[1, 0], Lc[1, 1]
    return 0.5 * (a * a) + b * c + 0.5 * (d * d) - 0.5 * (P1 * P1)


def hamiltonians_from_residues(config, Lc: LaxMatrix) -> IsospectralHamiltonians:
    F = half_trace_square_minus(Lc, compute_P1(config))
    H_inf = np.array([-F.residue_at("inf", -j - 1) for j in range(max(config.r_inf - 3, 0))],
                     dtype=complex)
    H_X = tuple(np.array([F.residue_at(x, j - 1) for j in range(1, rs + 1)], dtype=complex)
                for x, rs in zip(config.X, config.r))
    return IsospectralHamiltonians(H_inf, H_X)


def hamiltonians_from_contours(config: ConnectionConfig, state: DarbouxState, H: IsospectralHamiltonians,
                               npts: int = 64) -> IsospectralHamiltonians:
    """Residues of 1/2 Tr L_c^2 - 1/2 P1^2 by trapezoidal contour integrals.

    L_c is evaluated pointwise from its factors, which avoids the cancellations of
    multiplying partial fractions when the coefficients are large. Finite poles use a
    circle of half the distance to the nearest other singular point; infinity uses a
    circle enclosing every pole and node.
    """
    q, X, r = state.q, config.X, config.r
    L21 = companion_L21(config, state, H)
    P1 = compute_P1(config)
    th = np.exp(2j * np.pi * np.arange(npts) / npts)

    def F(lam):
        piq = np.prod(lam[:, None] - q, axis=1)
        pix = np.prod((lam[:, None] - X) ** np.array(r), axis=1) if len(X) else np.ones_like(lam)
        c12 = piq / pix
        c21 = pix / piq * L21(lam)
        d = P1(lam)
        return 0.5 * (2 * c12 * c21 + d * d) - 0.5 * d * d

    H_X = []
    for s, (x, rs) in enumerate(zip(X, r)):
        others = [abs(x - w) for w in q] + [abs(x - X[t]) for t in range(len(X)) if t != s]
        z = 0.5 * min(others) * th
        f = F(x + z)
        # Res_x f (lam - x)^(j-1) = mean(f z^j)
        H_X.append(np.array([np.mean(f * z ** j) for j in range(1, rs + 1)], dtype=complex))
    nI = max(config.r_inf - 3, 0)
    H_inf = np.zeros(nI, dtype=complex)
    if nI:
        R = 1.5 * max([1.0] + [abs(v) for v in q] + [abs(v) for v in X])
        lam = R * th
        f = F(lam)
        # coefficient of lam^j in the expansion at infinity
        H_inf = np.array([np.mean(f * lam ** (-j)) for j in range(nI)], dtype=complex)
    return IsospectralHamiltonians(H_inf, tuple(H_X))


def hamiltonians_from_regularity(config: ConnectionConfig, state: DarbouxState) -> IsospectralHamiltonians:
    """Independent route: demand that the check-gauge entry (2,1) is regular at every q_j.

    L21 is affine in H, so the residues of the check-gauge entry at the q_j are
    affine too; each unit H contributes one column. The asymptotic rows needed
    for r_inf <= 2 are the Laurent coefficients of L21 at infinity.
    """
    hb = config.hbar
    r = config.r_inf
    ni = max(r - 3, 0)
    nunk = ni + sum(config.r)
    Q, Piq, PiX, inv_PiX, inv_Piq = _gauge_pieces(config, state)
    P1 = compute_P1(config)
    Q_q = Q * inv_Piq
    ratio = PiX * inv_Piq
    base = hb * Q_q.derivative() - P1 * Q_q - Q_q * (Q * inv_PiX)

    def residues(L21, include_base=True):
        f = L21 * ratio
        if include_base:
            f = f + base
        return np.array([f.residue_at(qj, 0) for qj in state.q], dtype=complex)

    zero = IsospectralHamiltonians.from_vector(np.zeros(nunk), r, config.r)
    L0 = companion_L21(config, state, zero)
    b0 = residues(L0)
    cols = []
    for k in range(nunk):
        e = np.zeros(nunk, dtype=complex)
        e[k] = 1.0
        Hk = IsospectralHamiltonians.from_vector(e, r, config.r)
        # unit contribution only: the H-dependent part of L21
        unit = companion_L21(config, state, Hk) - L0
        cols.append(residues(unit, include_base=False))
    A = np.array(cols, dtype=complex).T.reshape(len(state.q), nunk)
    rhs = -b0
    if r <= 2:
        # normalization of L21 at infinity: its lam^-1 (and lam^-2 when r_inf = 1)
        # coefficients are fixed by the exponents at infinity
        ti = config.t_inf
        if r == 2:
            targets = {1: -(ti[0, 1] * ti[1, 0] + ti[1, 1] * ti[0, 0] + hb * ti[0, 1])}
        else:
            targets = {2: -ti[0, 0] * (ti[1, 0] + hb), 1: 0j}
        units = []
        for k in range(nunk):
            e = np.zeros(nunk, dtype=complex)
            e[k] = 1.0
            units.append(companion_L21(config, state, IsospectralHamiltonians.from_vector(e, r, config.r)) - L0)
        rows, vals = [], []
        for m, target in targets.items():
            rows.append([u.coefficient_at_infinity(-m) for u in units])
            vals.append(target - L0.coefficient_at_infinity(-m))
        A = np.vstack([A, np.array(rows)])
        rhs = np.concatenate([rhs, np.array(vals)])
    return IsospectralHamiltonians.from_vector(dense_solve(A, rhs), r, config.r)


def classical_spectral_curve(config, state, H=None):
    """(P1, P2) of y^2 - P1 y + P2 = 0 at hbar = 0."""
    c0 = config.with_data(hbar=0.0)
    H0 = solve_isospectral_H(c0, state) if H is None else H
    L = build_L_companion(c0, state, H0)
    return L.trace(), -L[1, 0]


def wronskian_shape(config: ConnectionConfig, state: DarbouxState, lam) -> complex:
    lam = complex(lam)
    for x in config.X:
        if abs(lam - x) <= 1e-8:
            raise PoleEvaluationError("wronskian evaluated at a pole")
    P1 = compute_P1(config)
    integ = 0j
    for k, a in enumerate(P1.poly):
        integ += a * lam ** (k + 1) / (k + 1)
    for x, a in P1.parts.items():
        for k in range(1, len(a) + 1):
            if k == 1:
                integ += a[0] * (np.log(lam - x) - (np.log(-x) if abs(x) > 0 else 0.0))
            else:
                base = (-x) ** (1 - k) if abs(x) > 0 else 0.0
                integ += a[k - 1] * ((lam - x) ** (1 - k) - base) / (1 - k)
    shape = np.prod(lam - state.q) / pi_X_at(config, lam)
    return complex(shape * np.exp(integ / config.hbar))


def det_V_closed_form(config: ConnectionConfig, q) -> complex:
    """Closed form of det V for r_inf >= 3 (V square).

    prod_{i<j}(q_i - q_j) prod_{s'<s}(X_s - X_s')^{r_s r_s'} / prod_{i,s}(q_i - X_s)^{r_s},
    times (-1)^{m(m-1)/2} with m = r_inf - 3 (row order of V as built by V_matrix).
    """
    if config.r_inf < 3:
        raise ValueError("V is square only for r_inf >= 3")
    q = np.asarray(q, dtype=complex)
    X, r = config.X, config.r
    g = len(q)
    m = config.r_inf - 3
    val = complex((-1) ** (m * (m - 1) // 2))
    for i in range(g):
        for j in range(i + 1, g):
            val *= q[i] - q[j]
        for x, rs in zip(X, r):
            val /= (q[i] - x) ** rs
    for s in range(len(X)):
        for sp in range(s):
            val *= (X[s] - X[sp]) ** (r[s] * r[sp])
    return val
