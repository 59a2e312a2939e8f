"""Rational functions of lambda stored as polynomial part plus principal parts.

A function is kept as

    f(lam) = sum_k poly[k] lam^k + sum_c sum_k parts[c][k-1] (lam - c)^(-k)

Products are re-expanded exactly: the principal part of f*g at a marked point
is read off the product of the two Laurent series there, and the polynomial
part from the product of the expansions at infinity.
"""
from __future__ import annotations

from math import comb
from typing import Iterable, Mapping

import numpy as np

TRIM_RTOL = 1e-13
POINT_TOL = 1e-13
EVAL_TOL = 1e-8


class PoleEvaluationError(ValueError):
    pass


class UnmarkedPointError(KeyError):
    pass


def _arr(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=complex)).copy()


def _same(a: complex, b: complex) -> bool:
    return abs(a - b) <= POINT_TOL * (1.0 + abs(a))


def shift_poly(coeffs: np.ndarray, c: complex, order: int) -> np.ndarray:
    """Taylor coefficients of the polynomial at c, i.e. poly(c + h) in powers of h."""
    out = np.zeros(order + 1, dtype=complex)
    d = len(coeffs) - 1
    for m in range(min(order, d) + 1):
        s = 0j
        for k in range(m, d + 1):
            s += coeffs[k] * comb(k, m) * c ** (k - m)
        out[m] = s
    return out


def pole_taylor(e: complex, k: int, c: complex, order: int) -> np.ndarray:
    """Taylor coefficients of (lam - e)^(-k) around lam = c (c != e)."""
    d = c - e
    m = np.arange(order + 1)
    binom = np.array([(-1) ** j * comb(k + j - 1, j) for j in m], dtype=float)
    return binom * d ** (-k - m.astype(float))


def pole_at_infinity(e: complex, k: int, nterms: int) -> np.ndarray:
    """Coefficients of lam^-1 .. lam^-nterms in the expansion of (lam - e)^(-k)."""
    out = np.zeros(nterms, dtype=complex)
    for m in range(k, nterms + 1):
        out[m - 1] = comb(m - 1, k - 1) * e ** (m - k)
    return out


class RationalFunction:
    __slots__ = ("poly", "parts")

    def __init__(self, poly: Iterable | None = None,
                 parts: Mapping[complex, Iterable] | None = None, trim: bool = True):
        self.poly = _arr(poly if poly is not None else [0.0])
        self.parts: dict[complex, np.ndarray] = {}
        for c, a in (parts or {}).items():
            self._accumulate(complex(c), _arr(a))
        if trim:
            self._trim()

    # -- construction helpers -------------------------------------------------
    @classmethod
    def zero(cls) -> "RationalFunction":
        return cls([0.0])

    @classmethod
    def constant(cls, a) -> "RationalFunction":
        return cls([a])

    @classmethod
    def monomial(cls, k: int, a=1.0) -> "RationalFunction":
        p = np.zeros(k + 1, dtype=complex)
        p[k] = a
        return cls(p)

    @classmethod
    def pole(cls, c, k: int = 1, a=1.0) -> "RationalFunction":
        v = np.zeros(k, dtype=complex)
        v[k - 1] = a
        return cls(None, {complex(c): v})

    @classmethod
    def from_roots(cls, roots: Mapping[complex, int] | Iterable) -> "RationalFunction":
        """Monic polynomial prod (lam - a)^m."""
        p = np.array([1.0 + 0j])
        items = roots.items() if isinstance(roots, Mapping) else ((r, 1) for r in roots)
        for a, m in items:
            for _ in range(int(m)):
                p = np.convolve(p, np.array([-a, 1.0], dtype=complex))
        return cls(p, trim=False)

    @classmethod
    def reciprocal_of_roots(cls, roots: Mapping[complex, int] | Iterable) -> "RationalFunction":
        """Partial fractions of 1 / prod (lam - a)^m for distinct a."""
        items = list(roots.items()) if isinstance(roots, Mapping) else [(r, 1) for r in roots]
        items = [(complex(a), int(m)) for a, m in items if int(m) > 0]
        if not items:
            return cls.constant(1.0)
        parts = {}
        for i, (a, m) in enumerate(items):
            series = np.zeros(m, dtype=complex)
            series[0] = 1.0
            for j, (b, mb) in enumerate(items):
                if j != i:
                    series = np.convolve(series, pole_taylor(b, mb, a, m - 1))[:m]
            # 1/(lam-a)^m * sum_l series[l] (lam-a)^l
            parts[a] = series[::-1]
        return cls(None, parts)

    def copy(self) -> "RationalFunction":
        return RationalFunction(self.poly, {c: a for c, a in self.parts.items()}, trim=False)

    def _key(self, c: complex) -> complex | None:
        for k in self.parts:
            if _same(k, c):
                return k
        return None

    def _accumulate(self, c: complex, a: np.ndarray) -> None:
        k = self._key(c)
        if k is None:
            self.parts[c] = a.copy()
            return
        cur = self.parts[k]
        n = max(len(cur), len(a))
        out = np.zeros(n, dtype=complex)
        out[:len(cur)] += cur
        out[:len(a)] += a
        self.parts[k] = out

    def _trim(self) -> None:
        scale = self.scale()
        thr = TRIM_RTOL * scale
        p = self.poly
        n = len(p)
        while n > 1 and abs(p[n - 1]) <= thr:
            n -= 1
        self.poly = p[:n]
        if n == 1 and abs(self.poly[0]) <= thr:
            self.poly = np.zeros(1, dtype=complex)
        for c in list(self.parts):
            a = self.parts[c]
            d = len(a)
            while d > 0 and abs(a[d - 1]) <= thr:
                d -= 1
            if d == 0:
                del self.parts[c]
            else:
                self.parts[c] = a[:d]

    # -- inspection -----------------------------------------------------------
    def scale(self) -> float:
        m = float(np.abs(self.poly).max()) if len(self.poly) else 0.0
        for a in self.parts.values():
            if len(a):
                m = max(m, float(np.abs(a).max()))
        return m

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    def points(self) -> list[complex]:
        return list(self.parts)

    def part(self, c) -> np.ndarray:
        k = self._key(complex(c))
        if k is None:
            return np.zeros(0, dtype=complex)
        return self.parts[k]

    def poly_coeff(self, k: int) -> complex:
        return self.poly[k] if 0 <= k < len(self.poly) else 0j

    def is_polynomial(self) -> bool:
        return not self.parts

    def __repr__(self) -> str:
        return f"RationalFunction(poly={self.poly!r}, parts={self.parts!r})"

    # -- evaluation -----------------------------------------------------------
    def __call__(self, lam):
        return self.evaluate(lam)

    def evaluate(self, lam):
        lam = np.asarray(lam, dtype=complex)
        val = np.polynomial.polynomial.polyval(lam, self.poly)
        for c, a in self.parts.items():
            d = lam - c
            if np.any(np.abs(d) <= EVAL_TOL):
                raise PoleEvaluationError(f"evaluation at marked point {c}")
            inv = 1.0 / d
            acc = np.zeros_like(lam)
            for k in range(len(a), 0, -1):
                acc = (acc + a[k - 1]) * inv
            val = val + acc
        return val if val.ndim else complex(val)

    def derivative(self) -> "RationalFunction":
        dp = self.poly[1:] * np.arange(1, len(self.poly)) if len(self.poly) > 1 else [0.0]
        parts = {}
        for c, a in self.parts.items():
            b = np.zeros(len(a) + 1, dtype=complex)
            for k in range(1, len(a) + 1):
                b[k] = -k * a[k - 1]
            parts[c] = b
        return RationalFunction(dp, parts)

    def taylor(self, c, order: int) -> np.ndarray:
        """Taylor coefficients at c of f minus its own principal part at c."""
        c = complex(c)
        out = shift_poly(self.poly, c, order)
        for e, a in self.parts.items():
            if _same(e, c):
                continue
            for k in range(1, len(a) + 1):
                if a[k - 1] != 0:
                    out += a[k - 1] * pole_taylor(e, k, c, order)
        return out

    def laurent(self, c, order: int) -> tuple[np.ndarray, int]:
        """Laurent coefficients at c from the most singular term up to (lam-c)^order.

        Returns (coeffs, d) where coeffs[i] multiplies (lam-c)^(i-d).
        """
        a = self.part(c)
        d = len(a)
        reg = self.taylor(c, max(order, 0))
        return np.concatenate([a[::-1], reg]), d

    def expansion_at_infinity(self, nneg: int) -> tuple[np.ndarray, int]:
        """Coefficients from lam^deg down to lam^-nneg (descending order)."""
        deg = self.degree
        out = np.zeros(deg + 1 + nneg, dtype=complex)
        out[:deg + 1] = self.poly[::-1]
        if nneg > 0:
            tail = np.zeros(nneg, dtype=complex)
            for e, a in self.parts.items():
                for k in range(1, len(a) + 1):
                    tail += a[k - 1] * pole_at_infinity(e, k, nneg)
            out[deg + 1:] = tail
        return out, deg

    def coefficient_at_infinity(self, power: int) -> complex:
        """Coefficient of lam^power in the expansion of f at infinity."""
        if power >= 0:
            return self.poly_coeff(power)
        coeffs, deg = self.expansion_at_infinity(-power)
        return coeffs[deg - power]

    def residue_at(self, c, weight_power: int = 0) -> complex:
        """Res f(lam) (lam-c)^w at a marked point, or Res_inf f(lam) lam^w for c=inf."""
        if c is None or (isinstance(c, float) and np.isinf(c)) or c == "inf":
            # Res_inf g = -(coefficient of lam^-1 of g)
            return -self.coefficient_at_infinity(-1 - weight_power)
        c = complex(c)
        k = self._key(c)
        if k is None:
            raise UnmarkedPointError(f"{c} is not a marked point")
        a = self.parts[k]
        # coefficient of (lam-c)^(-1-w) in f
        idx = 1 + weight_power
        if idx >= 1:
            return a[idx - 1] if idx <= len(a) else 0j
        return self.taylor(c, -idx)[-idx]

    # -- arithmetic -----------------------------------------------------------
    def __neg__(self):
        return RationalFunction(-self.poly, {c: -a for c, a in self.parts.items()}, trim=False)

    def __add__(self, other):
        if not isinstance(other, RationalFunction):
            other = RationalFunction.constant(other)
        n = max(len(self.poly), len(other.poly))
        p = np.zeros(n, dtype=complex)
        p[:len(self.poly)] += self.poly
        p[:len(other.poly)] += other.poly
        out = RationalFunction(p, self.parts, trim=False)
        for c, a in other.parts.items():
            out._accumulate(c, a)
        out._trim()
        return out

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, RationalFunction) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RationalFunction):
            s = complex(other)
            return RationalFunction(self.poly * s, {c: a * s for c, a in self.parts.items()})
        return multiply(self, other)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / complex(s))

    def drop_points(self, points: Iterable) -> tuple["RationalFunction", float]:
        """Remove principal parts at the given points; return the largest dropped coefficient."""
        out = self.copy()
        dropped = 0.0
        for q in points:
            k = out._key(complex(q))
            if k is not None:
                dropped = max(dropped, float(np.max(np.abs(out.parts[k]))))
                del out.parts[k]
        return out, dropped


def multiply(f: RationalFunction, g: RationalFunction) -> RationalFunction:
    parts = {}
    keys = list(f.parts)
    for c in g.parts:
        if not any(_same(c, k) for k in keys):
            keys.append(c)
    for c in keys:
        df, dg = len(f.part(c)), len(g.part(c))
        d = df + dg
        if d == 0:
            continue
        lf, _ = f.laurent(c, dg)
        lg, _ = g.laurent(c, df)
        prod = np.convolve(lf, lg)[:d]
        # prod[i] multiplies (lam-c)^(i-d); store a_k for k = d..1
        parts[c] = prod[::-1]
    # polynomial part from the expansions at infinity
    degf, degg = f.degree, g.degree
    ef, _ = f.expansion_at_infinity(max(degg, 0))
    eg, _ = g.expansion_at_infinity(max(degf, 0))
    prod = np.convolve(ef, eg)[:degf + degg + 1]
    return RationalFunction(prod[::-1], parts)


def evaluate(f: RationalFunction, lam):
    return f.evaluate(lam)


def differentiate(f: RationalFunction) -> RationalFunction:
    return f.derivative()


def residue_at(f: RationalFunction, c, weight_power: int = 0) -> complex:
    return f.residue_at(c, weight_power)
