"""Input data of a rank-2 connection with unramified poles.

Times are stored per pole as arrays of shape (2, r) indexed [sheet, k], with
k = 0 holding the monodromy exponent. Deformation vectors use the same layout
with the k = 0 column ignored.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .rational import RationalFunction

TOL_SEP = 1e-8
TOL_RES = 1e-10


class ValidationError(ValueError):
    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(report.failures))
        self.report = report


@dataclass(frozen=True)
class PoleStructure:
    r_inf: int
    r: tuple[int, ...] = ()
    X: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        object.__setattr__(self, "X", tuple(complex(x) for x in self.X))
        if len(self.r) != len(self.X):
            raise ValueError("pole orders and positions differ in length")

    @property
    def n(self) -> int:
        return len(self.r)

    @property
    def genus(self) -> int:
        return genus(self)

    def with_positions(self, X: Sequence[complex]) -> "PoleStructure":
        return PoleStructure(self.r_inf, self.r, tuple(X))


def genus(structure: PoleStructure) -> int:
    return structure.r_inf - 3 + sum(structure.r)


@dataclass(frozen=True)
class ConnectionConfig:
    structure: PoleStructure
    t_inf: np.ndarray
    t_X: tuple[np.ndarray, ...] = ()
    hbar: complex = 1.0

    def __post_init__(self):
        t_inf = np.array(self.t_inf, dtype=complex).reshape(2, self.structure.r_inf)
        t_X = tuple(np.array(t, dtype=complex).reshape(2, r)
                    for t, r in zip(self.t_X, self.structure.r))
        if len(t_X) != self.structure.n:
            raise ValueError("one time block per finite pole is required")
        object.__setattr__(self, "t_inf", t_inf)
        object.__setattr__(self, "t_X", t_X)
        object.__setattr__(self, "hbar", complex(self.hbar))

    @property
    def r_inf(self) -> int:
        return self.structure.r_inf

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def g(self) -> int:
        return genus(self.structure)

    @property
    def X(self) -> np.ndarray:
        return np.array(self.structure.X, dtype=complex)

    @property
    def r(self) -> tuple[int, ...]:
        return self.structure.r

    def replace(self, **kw) -> "ConnectionConfig":
        return replace(self, **kw)

    def with_data(self, t_inf=None, t_X=None, X=None, hbar=None) -> "ConnectionConfig":
        st = self.structure if X is None else self.structure.with_positions(X)
        return ConnectionConfig(st,
                                self.t_inf if t_inf is None else t_inf,
                                self.t_X if t_X is None else tuple(t_X),
                                self.hbar if hbar is None else hbar)

    def swapped_sheets(self) -> "ConnectionConfig":
        return self.with_data(self.t_inf[::-1], [t[::-1] for t in self.t_X])

    def advanced(self, alpha: "DeformationVector", eps: complex) -> "ConnectionConfig":
        """Move every deformed parameter by eps * alpha (monodromies untouched)."""
        ti = self.t_inf.copy()
        ti[:, 1:] += eps * alpha.a_inf[:, 1:]
        tx = []
        for t, a in zip(self.t_X, alpha.a_X):
            t = t.copy()
            t[:, 1:] += eps * a[:, 1:]
            tx.append(t)
        X = self.X + eps * alpha.a_pos
        return self.with_data(ti, tx, X)


@dataclass(frozen=True)
class DarbouxState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_1d(np.array(self.q, dtype=complex)))
        object.__setattr__(self, "p", np.atleast_1d(np.array(self.p, dtype=complex)))
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have the same length")

    @property
    def g(self) -> int:
        return len(self.q)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, v) -> "DarbouxState":
        v = np.asarray(v, dtype=complex)
        g = len(v) // 2
        return cls(v[:g], v[g:])


@dataclass(frozen=True)
class DeformationVector:
    a_inf: np.ndarray
    a_X: tuple[np.ndarray, ...] = ()
    a_pos: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        a_inf = np.array(self.a_inf, dtype=complex)
        a_inf[:, 0] = 0.0
        a_X = []
        for a in self.a_X:
            a = np.array(a, dtype=complex)
            a[:, 0] = 0.0
            a_X.append(a)
        object.__setattr__(self, "a_inf", a_inf)
        object.__setattr__(self, "a_X", tuple(a_X))
        object.__setattr__(self, "a_pos", np.atleast_1d(np.array(self.a_pos, dtype=complex)))

    @classmethod
    def zero(cls, structure: PoleStructure) -> "DeformationVector":
        return cls(np.zeros((2, structure.r_inf), dtype=complex),
                   tuple(np.zeros((2, r), dtype=complex) for r in structure.r),
                   np.zeros(structure.n, dtype=complex))

    def __add__(self, other: "DeformationVector") -> "DeformationVector":
        return DeformationVector(self.a_inf + other.a_inf,
                                 tuple(a + b for a, b in zip(self.a_X, other.a_X)),
                                 self.a_pos + other.a_pos)

    def __mul__(self, s) -> "DeformationVector":
        return DeformationVector(self.a_inf * s, tuple(a * s for a in self.a_X), self.a_pos * s)

    __rmul__ = __mul__

    def dimension(self) -> int:
        return 2 * (self.a_inf.shape[1] - 1) + sum(2 * (a.shape[1] - 1) for a in self.a_X) + len(self.a_pos)


@dataclass
class ValidationReport:
    ok: bool
    failures: list[str]
    warnings: list[str]


def validate(config: ConnectionConfig, tol_sep: float = TOL_SEP, tol_res: float = TOL_RES,
             residue_as_warning: bool = False) -> ValidationReport:
    fails: list[str] = []
    warns: list[str] = []
    st = config.structure
    if st.r_inf < 1 or any(r < 1 for r in st.r):
        fails.append("pole orders must be positive")
    if genus(st) <= 0:
        fails.append("genus must be positive")
    X = config.X
    for a in range(len(X)):
        for b in range(a + 1, len(X)):
            if abs(X[a] - X[b]) <= tol_sep:
                fails.append("poles not distinct")
                break
        else:
            continue
        break
    allvals = [config.t_inf.ravel()] + [t.ravel() for t in config.t_X] + [X, [config.hbar]]
    if not all(np.all(np.isfinite(v)) for v in allvals):
        fails.append("non-finite data")
    if abs(config.t_inf[0, -1] - config.t_inf[1, -1]) <= tol_sep:
        fails.append("ramified pole at infinity")
    for s, t in enumerate(config.t_X):
        if abs(t[0, -1] - t[1, -1]) <= tol_sep:
            fails.append(f"ramified pole at X_{s + 1}")
    res = config.t_inf[:, 0].sum() + sum(t[:, 0].sum() for t in config.t_X)
    if abs(res) >= tol_res:
        (warns if residue_as_warning else fails).append("SumResidues")
    return ValidationReport(not fails, fails, warns)


def check_state(config: ConnectionConfig, state: DarbouxState, tol_sep: float = TOL_SEP) -> list[str]:
    out = []
    if state.g != config.g:
        out.append(f"state has {state.g} pairs, genus is {config.g}")
    q = state.q
    for i in range(len(q)):
        for j in range(i + 1, len(q)):
            if abs(q[i] - q[j]) <= tol_sep:
                out.append("apparent singularities not distinct")
        for x in config.X:
            if abs(q[i] - x) <= tol_sep:
                out.append("apparent singularity on a pole")
    return out


def require_valid(config: ConnectionConfig, **kw) -> ConnectionConfig:
    rep = validate(config, **kw)
    if not rep.ok:
        raise ValidationError(rep)
    for w in rep.warnings:
        warnings.warn(w)
    return config


def compute_P1(config: ConnectionConfig) -> RationalFunction:
    ti = config.t_inf
    r = config.r_inf
    poly = [-(ti[0, k + 1] + ti[1, k + 1]) for k in range(r - 1)]
    parts = {}
    for x, t, rs in zip(config.X, config.t_X, config.r):
        parts[x] = [t[0, k - 1] + t[1, k - 1] for k in range(1, rs + 1)]
    return RationalFunction(poly if poly else [0.0], parts)


def p2_inf_coeffs(t1: np.ndarray, t2: np.ndarray) -> dict[int, complex]:
    """P2 coefficients at infinity fixed by the times: power -> value."""
    r = len(t1)
    out = {}
    for k in range(r):
        out[2 * r - 4 - k] = sum(t1[r - 1 - j] * t2[r - 1 - (k - j)] for j in range(k + 1))
    return out


def p2_pole_coeffs(t1: np.ndarray, t2: np.ndarray) -> dict[int, complex]:
    """P2 coefficients at a finite pole fixed by the times: order -> value."""
    r = len(t1)
    return {2 * r - k: sum(t1[r - 1 - j] * t2[r - 1 - (k - j)] for j in range(k + 1))
            for k in range(r)}


def compute_P2_tilde(config: ConnectionConfig, t_inf=None, t_X=None) -> RationalFunction:
    """Casimir part of P2; optional time overrides are used for variations."""
    ti = config.t_inf if t_inf is None else t_inf
    tX = config.t_X if t_X is None else t_X
    r = config.r_inf
    lo = max(0, r - 3)
    poly = np.zeros(max(2 * r - 3, 1), dtype=complex)
    for j, v in p2_inf_coeffs(ti[0], ti[1]).items():
        if lo <= j <= 2 * r - 4:
            poly[j] += v
    parts = {}
    for x, t, rs in zip(config.X, tX, config.r):
        c = p2_pole_coeffs(t[0], t[1])
        a = np.zeros(2 * rs, dtype=complex)
        for j in range(rs + 1, 2 * rs + 1):
            a[j - 1] = c[j]
        parts[x] = a
    return RationalFunction(poly, parts)


def config_from_sheet1(structure: PoleStructure, t_inf1, t_X1=(), hbar=1.0) -> ConnectionConfig:
    """Sheet-antisymmetric config (t2 = -t1), the canonical-times layout."""
    t_inf1 = np.asarray(t_inf1, dtype=complex)
    t_inf = np.stack([t_inf1, -t_inf1])
    t_X = tuple(np.stack([np.asarray(t, dtype=complex), -np.asarray(t, dtype=complex)]) for t in t_X1)
    return ConnectionConfig(structure, t_inf, t_X, hbar)
