"""Finite-dimensional GL2 models P(k) and V(k) = P(k)^dual.

A :class:`PkPoly` of weight k stores the coefficients ``c[j]`` of
``X^j Y^(k-j)``; a :class:`VkDual` stores the values ``mu(X^j Y^(k-j))``.
Matrices act by ``(gP)(X,Y) = det(g)^(-k/2) P(aX+cY, bX+dY)`` and on duals by
``(g mu)(P) = mu(g^-1 P)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

from .exactalg import MultiPoly, NFElem, NumberField, QQzeta8, _solve_square, zeta8_i

Mat2 = tuple[tuple[NFElem, NFElem], tuple[NFElem, NFElem]]


class SingularMatrix(ValueError):
    pass


class BadIndex(ValueError):
    pass


class NotTraceZero(ValueError):
    pass


class WeightMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# 2x2 matrices
# ---------------------------------------------------------------------------


def mat2(K: NumberField, a, b, c, d) -> Mat2:
    return ((K(a), K(b)), (K(c), K(d)))


def mat2_mul(g: Mat2, h: Mat2) -> Mat2:
    return (
        (g[0][0] * h[0][0] + g[0][1] * h[1][0], g[0][0] * h[0][1] + g[0][1] * h[1][1]),
        (g[1][0] * h[0][0] + g[1][1] * h[1][0], g[1][0] * h[0][1] + g[1][1] * h[1][1]),
    )


def mat2_det(g: Mat2) -> NFElem:
    return g[0][0] * g[1][1] - g[0][1] * g[1][0]


def mat2_inv(g: Mat2) -> Mat2:
    d = mat2_det(g)
    if d.is_zero():
        raise SingularMatrix("singular 2x2 matrix")
    di = d.inverse()
    return ((g[1][1] * di, -g[0][1] * di), (-g[1][0] * di, g[0][0] * di))


def mat2_sub(g: Mat2, h: Mat2) -> Mat2:
    return tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(g, h))  # type: ignore[return-value]


def mat2_scale(c, g: Mat2) -> Mat2:
    return tuple(tuple(c * x for x in r) for r in g)  # type: ignore[return-value]


def bracket(x: Mat2, y: Mat2) -> Mat2:
    return mat2_sub(mat2_mul(x, y), mat2_mul(y, x))


def lie_element(name: str, K: NumberField = QQzeta8) -> Mat2:
    """Named trace-zero matrices used at the real and complex places."""
    i = zeta8_i(K) if K.degree == 4 else (K.gen() if K.minpoly == (1, 0, 1) else None)
    table = {
        "Hhat": (1, 0, 0, -1),
        "Wtilde": (0, 1, 1, 0),
        "W": (0, 1, -1, 0),
        "D": (1, 0, 0, 0),
        "N1": (0, 1, 0, 0),
    }
    if name in table:
        return mat2(K, *table[name])
    if i is None:
        raise ValueError(f"{name} needs i in the coefficient field")
    z = K.zero()
    complex_table = {
        "H": (z, -i, i, z),
        "Hhat_i": (i, z, z, -i),
        "Wtilde_i": (z, i, i, z),
        "N2": (z, i, z, z),
    }
    if name not in complex_table:
        raise ValueError(f"unknown Lie element {name!r}")
    return mat2(K, *complex_table[name])


# ---------------------------------------------------------------------------
# P(k) and V(k)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PkPoly:
    """Homogeneous polynomial sum_j c[j] X^j Y^(k-j)."""

    field: NumberField
    weight: int
    coeffs: tuple[NFElem, ...]

    @classmethod
    def from_coeffs(cls, K: NumberField, coeffs: Sequence) -> "PkPoly":
        cs = tuple(K(c) for c in coeffs)
        return cls(K, len(cs) - 1, cs)

    @classmethod
    def monomial(cls, K: NumberField, k: int, j: int) -> "PkPoly":
        return cls.from_coeffs(K, [int(t == j) for t in range(k + 1)])

    @classmethod
    def zero(cls, K: NumberField, k: int) -> "PkPoly":
        return cls.from_coeffs(K, [0] * (k + 1))

    def __add__(self, o: "PkPoly") -> "PkPoly":
        _same(self, o)
        return PkPoly(self.field, self.weight, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    def __sub__(self, o: "PkPoly") -> "PkPoly":
        _same(self, o)
        return PkPoly(self.field, self.weight, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __neg__(self) -> "PkPoly":
        return PkPoly(self.field, self.weight, tuple(-a for a in self.coeffs))

    def scale(self, c) -> "PkPoly":
        return PkPoly(self.field, self.weight, tuple(a * c for a in self.coeffs))

    def __mul__(self, o: "PkPoly") -> "PkPoly":
        out = [self.field.zero()] * (self.weight + o.weight + 1)
        for s, a in enumerate(self.coeffs):
            if a:
                for t, b in enumerate(o.coeffs):
                    if b:
                        out[s + t] = out[s + t] + a * b
        return PkPoly(self.field, self.weight + o.weight, tuple(out))

    def __pow__(self, e: int) -> "PkPoly":
        res = PkPoly.from_coeffs(self.field, [1])
        for _ in range(e):
            res = res * self
        return res

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def to_multipoly(self, names=("X", "Y")) -> MultiPoly:
        k = self.weight
        return MultiPoly.build(self.field, names, {(j, k - j): c for j, c in enumerate(self.coeffs)})

    def diff_x(self) -> "PkPoly":
        if self.weight == 0:
            return PkPoly.zero(self.field, 0)
        return PkPoly(self.field, self.weight - 1, tuple(self.coeffs[j] * j for j in range(1, self.weight + 1)))

    def diff_y(self) -> "PkPoly":
        k = self.weight
        if k == 0:
            return PkPoly.zero(self.field, 0)
        return PkPoly(self.field, k - 1, tuple(self.coeffs[j] * (k - j) for j in range(k)))


@dataclass(frozen=True)
class VkDual:
    """Functional on P(k) given by its values on X^j Y^(k-j)."""

    field: NumberField
    weight: int
    values: tuple[NFElem, ...]

    @classmethod
    def from_values(cls, K: NumberField, values: Sequence) -> "VkDual":
        vs = tuple(K(v) for v in values)
        return cls(K, len(vs) - 1, vs)

    @classmethod
    def zero(cls, K: NumberField, k: int) -> "VkDual":
        return cls.from_values(K, [0] * (k + 1))

    def __call__(self, P: PkPoly) -> NFElem:
        if P.weight != self.weight:
            raise WeightMismatch(f"{P.weight} vs {self.weight}")
        acc = self.field.zero()
        for a, b in zip(self.values, P.coeffs):
            if a and b:
                acc = acc + a * b
        return acc

    def __add__(self, o: "VkDual") -> "VkDual":
        _same(self, o)
        return VkDual(self.field, self.weight, tuple(a + b for a, b in zip(self.values, o.values)))

    def __sub__(self, o: "VkDual") -> "VkDual":
        _same(self, o)
        return VkDual(self.field, self.weight, tuple(a - b for a, b in zip(self.values, o.values)))

    def __neg__(self) -> "VkDual":
        return VkDual(self.field, self.weight, tuple(-a for a in self.values))

    def scale(self, c) -> "VkDual":
        return VkDual(self.field, self.weight, tuple(a * c for a in self.values))

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values)


def _same(a, b) -> None:
    if a.weight != b.weight:
        raise WeightMismatch(f"{a.weight} vs {b.weight}")


def _linear_powers(K: NumberField, p: NFElem, q: NFElem, n: int) -> list[PkPoly]:
    """[(pX + qY)^e for e = 0..n] as PkPolys."""
    lin = PkPoly(K, 1, (q, p))
    out = [PkPoly.from_coeffs(K, [1])]
    for _ in range(n):
        out.append(out[-1] * lin)
    return out


def substitution_matrix(g: Mat2, k: int) -> list[list[NFElem]]:
    """Matrix of P -> P(aX+cY, bX+dY) on the monomial basis (no det factor)."""
    (a, b), (c, d) = g
    K = a.field
    first = _linear_powers(K, a, c, k)
    second = _linear_powers(K, b, d, k)
    cols = []
    for j in range(k + 1):
        cols.append((first[j] * second[k - j]).coeffs)
    return [[cols[j][r] for j in range(k + 1)] for r in range(k + 1)]


def act_gl2(g: Mat2, P: PkPoly) -> PkPoly:
    det = mat2_det(g)
    if det.is_zero():
        raise SingularMatrix("singular matrix")
    k = P.weight
    if k % 2:
        raise WeightMismatch("odd weights are not supported")
    (a, b), (c, d) = g
    K = P.field
    first = _linear_powers(K, a, c, k)
    second = _linear_powers(K, b, d, k)
    out = PkPoly.zero(K, k)
    for j, cj in enumerate(P.coeffs):
        if cj:
            out = out + (first[j] * second[k - j]).scale(cj)
    return out.scale(det ** (-(k // 2)))


def dual_act(g: Mat2, mu: VkDual) -> VkDual:
    k = mu.weight
    ginv = mat2_inv(g)
    A = substitution_matrix(ginv, k)
    scale = mat2_det(ginv) ** (-(k // 2))
    vals = []
    for j in range(k + 1):
        acc = mu.field.zero()
        for i in range(k + 1):
            if mu.values[i] and A[i][j]:
                acc = acc + mu.values[i] * A[i][j]
        vals.append(acc * scale)
    return VkDual(mu.field, k, tuple(vals))


def lie_act_findim(x: Mat2, v: PkPoly | VkDual) -> PkPoly | VkDual:
    """Derivative at t=0 of the action of exp(tx)."""
    (a, b), (c, d) = x
    if not (a + d).is_zero():
        raise NotTraceZero("Lie element must have trace zero")
    if isinstance(v, PkPoly):
        return _lie_poly(a, b, c, d, v)
    k = v.weight
    K = v.field
    # (x mu)(P) = -mu(x P): transpose of the polynomial derivation
    vals = []
    for j in range(k + 1):
        img = _lie_poly(a, b, c, d, PkPoly.monomial(K, k, j))
        vals.append(-v(img))
    return VkDual(K, k, tuple(vals))


def _lie_poly(a, b, c, d, P: PkPoly) -> PkPoly:
    K = P.field
    k = P.weight
    if k == 0:
        return P.scale(0)
    px = P.diff_x()
    py = P.diff_y()
    lx = PkPoly(K, 1, (c, a))  # aX + cY
    ly = PkPoly(K, 1, (d, b))  # bX + dY
    return lx * px + ly * py


def mu_basis(k: int, m: int, K: NumberField = QQzeta8) -> VkDual:
    """The functional mu_m on P(k-2)."""
    w = k - 2
    h = w // 2
    if k % 2 or k < 2 or abs(m) > h:
        raise BadIndex(f"m={m} out of range for k={k}")
    vals = [Fraction(0)] * (w + 1)
    vals[h + m] = Fraction((-1) ** (h - m), comb(w, h + m))
    return VkDual.from_values(K, vals)


def dual_iso(mu: VkDual) -> PkPoly:
    """mu((Xy - Yx)^w) as a polynomial in (x, y)."""
    w = mu.weight
    # coefficient of x^j y^(w-j)  comes from X^(w-j) Y^j x^j y^(w-j)
    out = []
    for j in range(w + 1):
        out.append(mu.values[w - j] * (comb(w, j) * (-1) ** j))
    return PkPoly(mu.field, w, tuple(out))


@dataclass(frozen=True)
class DualTensor2:
    """Element sum T[(j1, j2)] e_j1^dual (x) e_j2^dual of V(w) (x) V(w)."""

    field: NumberField
    weight: int
    entries: dict

    def act(self, g: Mat2) -> "DualTensor2":
        w = self.weight
        K = self.field
        out: dict = {}
        basis = [VkDual.from_values(K, [int(t == j) for t in range(w + 1)]) for j in range(w + 1)]
        images = [dual_act(g, e) for e in basis]
        for (j1, j2), c in self.entries.items():
            for s, u in enumerate(images[j1].values):
                if u:
                    for t, v in enumerate(images[j2].values):
                        if v:
                            out[(s, t)] = out.get((s, t), K.zero()) + c * u * v
        return DualTensor2(K, w, {key: c for key, c in out.items() if not c.is_zero()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, DualTensor2) or other.weight != self.weight:
            return False
        keys = set(self.entries) | set(other.entries)
        z = self.field.zero()
        return all(self.entries.get(key, z) == other.entries.get(key, z) for key in keys)


def upsilon(k: int, K: NumberField = QQzeta8) -> DualTensor2:
    """sum_m C(k-2, h+m) (-1)^(h-m) mu_m (x) mu_-m."""
    w = k - 2
    h = w // 2
    entries = {}
    for m in range(-h, h + 1):
        c = Fraction(comb(w, h + m) * (-1) ** (h - m))
        mu1 = mu_basis(k, m, K)
        mu2 = mu_basis(k, -m, K)
        key = (h + m, h - m)
        entries[key] = K(c) * mu1.values[h + m] * mu2.values[h - m]
    return DualTensor2(K, w, entries)


def pairing_pk(P: PkPoly, Q: PkPoly) -> NFElem:
    """SL2-invariant pairing with <X^k, Y^k> = 1."""
    if P.weight != Q.weight:
        raise WeightMismatch(f"{P.weight} vs {Q.weight}")
    k = P.weight
    acc = P.field.zero()
    for j in range(k + 1):
        a, b = P.coeffs[j], Q.coeffs[k - j]
        if a and b:
            acc = acc + a * b * Fraction((-1) ** (k - j), comb(k, j))
    return acc


# ---------------------------------------------------------------------------
# The P_m basis used at the real place
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def pm_matrix(w: int, K: NumberField = QQzeta8) -> tuple[tuple[NFElem, ...], ...]:
    """Columns are the monomial coefficients of P_m = (Y+iX)^m (Y-iX)^(w-m)."""
    i = zeta8_i(K)
    plus = PkPoly(K, 1, (K.one(), i))
    minus = PkPoly(K, 1, (K.one(), -i))
    cols = [(plus ** m * minus ** (w - m)).coeffs for m in range(w + 1)]
    return tuple(tuple(cols[m][j] for m in range(w + 1)) for j in range(w + 1))


def pm_poly(w: int, m: int, K: NumberField = QQzeta8) -> PkPoly:
    M = pm_matrix(w, K)
    return PkPoly(K, w, tuple(M[j][m] for j in range(w + 1)))


def to_pm_coords(mu: VkDual) -> list[NFElem]:
    """Coordinates c_m of mu in the dual basis P_m^dual, i.e. c_m = mu(P_m)."""
    w = mu.weight
    return [mu(pm_poly(w, m, mu.field)) for m in range(w + 1)]


@lru_cache(maxsize=None)
def _pm_inverse(w: int, K: NumberField) -> tuple[tuple[NFElem, ...], ...]:
    M = [list(r) for r in pm_matrix(w, K)]
    n = w + 1
    cols = []
    for j in range(n):
        cols.append(_solve_square(M, [K(int(r == j)) for r in range(n)]))
    # inverse[m][j] = cols[j][m]
    return tuple(tuple(cols[j][m] for j in range(n)) for m in range(n))


def from_pm_coords(coords: Sequence, K: NumberField = QQzeta8) -> VkDual:
    """The functional sum_m coords[m] P_m^dual."""
    w = len(coords) - 1
    inv = _pm_inverse(w, K)
    vals = []
    for j in range(w + 1):
        acc = K.zero()
        for m, c in enumerate(coords):
            c = K(c)
            if c and inv[m][j]:
                acc = acc + c * inv[m][j]
        vals.append(acc)
    return VkDual(K, w, tuple(vals))
