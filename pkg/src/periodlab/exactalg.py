"""Exact arithmetic: number fields, multivariate polynomials and linear algebra.

Rationals are the standard library :class:`fractions.Fraction`, which is always
reduced with a positive denominator.  Number fields are declared explicitly by a
monic minimal polynomial; nothing is ever factored or extended automatically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

Rational = Fraction


class DivisionByZero(ZeroDivisionError):
    pass


class FieldMismatch(ValueError):
    pass


class BadVariable(ValueError):
    pass


class BadInput(ValueError):
    pass


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ---------------------------------------------------------------------------
# Number fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NumberField:
    """The field Q[x]/(minpoly).

    ``minpoly`` is given by its coefficients in increasing degree and must be
    monic.  ``embedding`` is an optional complex root used only for numeric
    cross-checks.
    """

    minpoly: tuple[Fraction, ...]
    label: str = "x"
    embedding: Optional[complex] = None
    _reduction: tuple[tuple[Fraction, ...], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        mp = tuple(_q(c) for c in self.minpoly)
        if len(mp) < 2:
            raise ValueError("minimal polynomial must have degree >= 1")
        if mp[-1] != 1:
            raise ValueError("minimal polynomial must be monic")
        object.__setattr__(self, "minpoly", mp)
        d = len(mp) - 1
        # x^m mod minpoly for m = d .. 2d-2, as length-d coefficient tuples
        red = []
        cur = [-c for c in mp[:-1]]  # x^d
        for _ in range(max(d - 1, 1)):
            red.append(tuple(cur))
            top = cur[-1]
            cur = [Fraction(0)] + cur[:-1]
            if top:
                cur = [c - top * m for c, m in zip(cur, mp[:-1])]
        object.__setattr__(self, "_reduction", tuple(red))

    @property
    def degree(self) -> int:
        return len(self.minpoly) - 1

    def __call__(self, x) -> "NFElem":
        if isinstance(x, NFElem):
            if x.field is not self:
                raise FieldMismatch(f"{x.field.label} vs {self.label}")
            return x
        if isinstance(x, (Sequence,)) and not isinstance(x, str):
            cs = [_q(c) for c in x]
            if len(cs) > self.degree:
                return self.from_poly(cs)
            return NFElem(self, tuple(cs) + (Fraction(0),) * (self.degree - len(cs)))
        return NFElem(self, (_q(x),) + (Fraction(0),) * (self.degree - 1))

    def from_poly(self, coeffs: Sequence) -> "NFElem":
        """Reduce an arbitrary-length polynomial in the generator."""
        d = self.degree
        cs = [_q(c) for c in coeffs]
        out = cs[:d] + [Fraction(0)] * max(0, d - len(cs))
        for m in range(d, len(cs)):
            c = cs[m]
            if c:
                r = self._power(m)
                for t in range(d):
                    out[t] += c * r[t]
        return NFElem(self, tuple(out))

    def _power(self, m: int) -> tuple[Fraction, ...]:
        d = self.degree
        if m < d:
            return tuple(Fraction(int(t == m)) for t in range(d))
        if m - d < len(self._reduction):
            return self._reduction[m - d]
        acc = self.gen()
        res = self.one()
        e = m
        while e:
            if e & 1:
                res = res * acc
            acc = acc * acc
            e >>= 1
        return res.coeffs

    def zero(self) -> "NFElem":
        return NFElem(self, (Fraction(0),) * self.degree)

    def one(self) -> "NFElem":
        return self(1)

    def gen(self) -> "NFElem":
        if self.degree == 1:
            return self(-self.minpoly[0])
        return NFElem(self, tuple(Fraction(int(t == 1)) for t in range(self.degree)))

    def __repr__(self) -> str:
        return f"NumberField({self.label}, minpoly={[str(c) for c in self.minpoly]})"


@dataclass(frozen=True, eq=False)
class NFElem:
    """An element sum(coeffs[t] * gen**t) of a number field."""

    field: NumberField
    coeffs: tuple[Fraction, ...]

    def _coerce(self, other) -> Optional["NFElem"]:
        if isinstance(other, NFElem):
            if other.field is not self.field:
                raise FieldMismatch(f"{other.field.label} vs {self.field.label}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return NFElem(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return NFElem(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return NFElem(self.field, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return NFElem(self.field, tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = self.field.degree
        if d == 1:
            return NFElem(self.field, (self.coeffs[0] * o.coeffs[0],))
        prod_ = [Fraction(0)] * (2 * d - 1)
        for s, a in enumerate(self.coeffs):
            if a:
                for t, b in enumerate(o.coeffs):
                    if b:
                        prod_[s + t] += a * b
        out = prod_[:d]
        red = self.field._reduction
        for m in range(d, 2 * d - 1):
            c = prod_[m]
            if c:
                r = red[m - d]
                for t in range(d):
                    if r[t]:
                        out[t] += c * r[t]
        return NFElem(self.field, tuple(out))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def inverse(self) -> "NFElem":
        if self.is_zero():
            raise DivisionByZero("inverse of zero in number field")
        d = self.field.degree
        if d == 1:
            return NFElem(self.field, (1 / self.coeffs[0],))
        # columns: self * gen^t ; solve M c = e_0
        cols = []
        g = self.field.gen()
        cur = self
        for _ in range(d):
            cols.append(cur.coeffs)
            cur = cur * g
        m = [[cols[c][r] for c in range(d)] for r in range(d)]
        rhs = [Fraction(int(r == 0)) for r in range(d)]
        sol = _solve_square(m, rhs)
        return NFElem(self.field, tuple(sol))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DivisionByZero("division by zero")
            return NFElem(self.field, tuple(a / other for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        res = self.field.one()
        acc = self
        while e:
            if e & 1:
                res = res * acc
            acc = acc * acc
            e >>= 1
        return res

    def __eq__(self, other) -> bool:
        if isinstance(other, NFElem):
            return other.field is self.field and other.coeffs == self.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and not any(self.coeffs[1:])
        return NotImplemented

    def __hash__(self) -> int:
        if not any(self.coeffs[1:]):
            return hash(self.coeffs[0])
        return hash((id(self.field), self.coeffs))

    def to_complex(self, root: Optional[complex] = None) -> complex:
        r = self.field.embedding if root is None else root
        if r is None:
            if self.field.degree == 1:
                r = complex(-self.field.minpoly[0])
            else:
                raise ValueError("no complex embedding declared")
        return sum(complex(float(c)) * r**t for t, c in enumerate(self.coeffs))

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def __repr__(self) -> str:
        terms = []
        for t, c in enumerate(self.coeffs):
            if c:
                if t == 0:
                    terms.append(str(c))
                elif t == 1:
                    terms.append(f"{c}*{self.field.label}")
                else:
                    terms.append(f"{c}*{self.field.label}^{t}")
        return " + ".join(terms) if terms else "0"


def _solve_square(m: list[list], rhs: list) -> list:
    n = len(m)
    a = [row[:] + [rhs[i]] for i, row in enumerate(m)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise DivisionByZero("singular system")
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[r][n] for r in range(n)]


def nf_arith(a: NFElem, b: Optional[NFElem], op: str) -> NFElem:
    """Dispatch ``add``, ``mul`` or ``inv`` (inverse of ``a``)."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    raise ValueError(f"unknown op {op!r}")


QQ = NumberField((0, 1), "1")
QQi = NumberField((1, 0, 1), "i", embedding=1j)
QQzeta8 = NumberField((1, 0, 0, 0, 1), "z8", embedding=complex(math.sqrt(0.5), math.sqrt(0.5)))


@lru_cache(maxsize=None)
def quadratic_field(d: int, label: Optional[str] = None) -> NumberField:
    """Q(sqrt(d)) with generator s, s^2 = d.  Cached so equal calls share one field."""
    emb = complex(math.sqrt(d)) if d >= 0 else complex(0, math.sqrt(-d))
    return NumberField((-d, 0, 1), label or f"sqrt({d})", embedding=emb)


def zeta8_i(K: NumberField = QQzeta8) -> NFElem:
    """i = zeta8^2."""
    return K((0, 0, 1, 0))


def zeta8_sqrt2(K: NumberField = QQzeta8) -> NFElem:
    """sqrt(2) = zeta8 - zeta8^3 (= zeta8 + zeta8^-1)."""
    return K((0, 1, 0, -1))


# ---------------------------------------------------------------------------
# Multivariate polynomials
# ---------------------------------------------------------------------------

Monomial = tuple[int, ...]
SU2_VARS = ("a", "b", "ac", "bc")  # alpha, beta, conj(alpha), conj(beta)


def _grlex_key(m: Monomial):
    return (sum(m), m)


@dataclass(frozen=True, eq=False)
class MultiPoly:
    """Sparse polynomial with NFElem coefficients.

    ``relation`` is either ``None`` or ``"su2"``; in the latter case every
    result is reduced to the sphere normal form (no monomial has both b and bc).
    """

    field: NumberField
    variables: tuple[str, ...]
    terms: Mapping[Monomial, NFElem]
    relation: Optional[str] = None

    @staticmethod
    def build(K: NumberField, variables: Sequence[str], terms: Mapping, relation: Optional[str] = None) -> "MultiPoly":
        clean = {}
        for mono, c in terms.items():
            c = K(c)
            if not c.is_zero():
                clean[tuple(mono)] = c
        p = MultiPoly(K, tuple(variables), clean, relation)
        if relation == "su2":
            p = su2_normal_form(p)
        elif relation is not None:
            raise ValueError(f"unsupported relation {relation!r}")
        return p

    @classmethod
    def const(cls, K, variables, c, relation=None) -> "MultiPoly":
        return cls.build(K, variables, {(0,) * len(variables): c}, relation)

    @classmethod
    def var(cls, K, variables, name, relation=None) -> "MultiPoly":
        idx = tuple(variables).index(name)
        mono = tuple(int(t == idx) for t in range(len(variables)))
        return cls.build(K, variables, {mono: 1}, relation)

    def _like(self, terms) -> "MultiPoly":
        return MultiPoly.build(self.field, self.variables, terms, self.relation)

    def _check(self, other: "MultiPoly") -> None:
        if other.variables != self.variables or other.field is not self.field:
            raise FieldMismatch("polynomials over different rings")

    def _lift(self, other) -> Optional["MultiPoly"]:
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, NFElem)):
            return MultiPoly.const(self.field, self.variables, other, self.relation)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for m, c in o.terms.items():
            out[m] = out[m] + c if m in out else c
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.field, self.variables, {m: -c for m, c in self.terms.items()}, self.relation)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, NFElem)):
            c = self.field(other)
            return self._like({m: v * c for m, v in self.terms.items()})
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out: dict[Monomial, NFElem] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                v = c1 * c2
                out[m] = out[m] + v if m in out else v
        return self._like(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "MultiPoly":
        res = MultiPoly.const(self.field, self.variables, 1, self.relation)
        acc = self
        while e:
            if e & 1:
                res = res * acc
            acc = acc * acc
            e >>= 1
        return res

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        o = self._lift(other) if not isinstance(other, MultiPoly) else other
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]))))

    def diff(self, name: str) -> "MultiPoly":
        idx = self.variables.index(name)
        out = {}
        for m, c in self.terms.items():
            e = m[idx]
            if e:
                mm = list(m)
                mm[idx] -= 1
                out[tuple(mm)] = c * e
        # derivatives are taken on the free polynomial ring
        return MultiPoly.build(self.field, self.variables, out, None)

    def coeff(self, mono: Monomial) -> NFElem:
        return self.terms.get(tuple(mono), self.field.zero())

    def sorted_terms(self) -> list[tuple[Monomial, NFElem]]:
        """Terms in decreasing graded-lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def with_relation(self, relation: Optional[str]) -> "MultiPoly":
        return MultiPoly.build(self.field, self.variables, dict(self.terms), relation)

    def substitute(self, values: Mapping[str, "MultiPoly | NFElem | int | Fraction"], target: "MultiPoly") -> "MultiPoly":
        """Evaluate at polynomials living in ``target``'s ring."""
        zero = target * 0
        one = zero + 1
        images = []
        for v in self.variables:
            x = values[v]
            images.append(x if isinstance(x, MultiPoly) else one * x)
        cache: dict[tuple[int, int], MultiPoly] = {}

        def pw(i, e):
            if (i, e) not in cache:
                cache[(i, e)] = images[i] ** e
            return cache[(i, e)]

        out = zero
        for m, c in self.terms.items():
            t = one * c
            for i, e in enumerate(m):
                if e:
                    t = t * pw(i, e)
            out = out + t
        return out

    def evaluate(self, point: Mapping[str, complex]) -> complex:
        total = 0j
        for m, c in self.terms.items():
            t = c.to_complex()
            for v, e in zip(self.variables, m):
                if e:
                    t *= point[v] ** e
            total += t
        return total

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mon = "*".join(f"{v}^{e}" if e > 1 else v for v, e in zip(self.variables, m) if e)
            parts.append(f"({c})" + (f"*{mon}" if mon else ""))
        return " + ".join(parts)


def su2_normal_form(p: MultiPoly, names: Sequence[str] = SU2_VARS) -> MultiPoly:
    """Rewrite b*bc as 1 - a*ac until no monomial contains both b and bc."""
    try:
        ia, ib, iac, ibc = (p.variables.index(n) for n in names)
    except ValueError:
        raise BadVariable(f"variables {list(p.variables)} are not the sphere variables") from None
    extra = [i for i, v in enumerate(p.variables) if v not in names]
    out: dict[Monomial, NFElem] = {}
    for m, c in p.terms.items():
        if any(m[i] for i in extra):
            raise BadVariable(f"foreign variable {p.variables[next(i for i in extra if m[i])]}")
        t = min(m[ib], m[ibc])
        base = list(m)
        base[ib] -= t
        base[ibc] -= t
        for j in range(t + 1):
            coef = c * (math.comb(t, j) * (-1) ** j)
            mm = base[:]
            mm[ia] += j
            mm[iac] += j
            key = tuple(mm)
            out[key] = out[key] + coef if key in out else coef
    clean = {m: c for m, c in out.items() if not c.is_zero()}
    return MultiPoly(p.field, p.variables, clean, p.relation)


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Matrix:
    """Rectangular matrix; entries are NFElem or Fraction."""

    entries: tuple[tuple, ...]

    @classmethod
    def of(cls, rows: Iterable[Iterable]) -> "Matrix":
        ent = tuple(tuple(r) for r in rows)
        if ent and len({len(r) for r in ent}) != 1:
            raise ValueError("matrix rows must have equal length")
        return cls(ent)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return Matrix.of(
            [sum((self.entries[i][t] * other.entries[t][j] for t in range(self.cols)), 0 * self.entries[i][0])
             for j in range(other.cols)]
            for i in range(self.rows)
        )

    def apply(self, v: Sequence) -> list:
        return [sum((a * b for a, b in zip(row, v)), 0 * row[0]) for row in self.entries]


def rref(rows: list[list]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = [[Fraction(x) if isinstance(x, int) else x for x in r] for r in rows]
    nr = len(a)
    nc = len(a[0]) if a else 0
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nr):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return a, pivots


def kernel_basis(m: Matrix | Sequence[Sequence], zero=None) -> list[list]:
    """Basis of the right kernel; each vector has leading nonzero entry 1."""
    rows = [[Fraction(x) if isinstance(x, int) else x for x in r] for r in (m.entries if isinstance(m, Matrix) else m)]
    if not rows:
        return []
    nc = len(rows[0])
    if zero is None:
        sample = rows[0][0] if nc else Fraction(0)
        zero = sample * 0
    red, pivots = rref(rows)
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * nc
        v[f] = zero + 1
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][f]
        lead = next(x for x in v if x != 0)
        basis.append([x / lead for x in v])
    return basis


def solve_linear(rows: list[list], rhs: list) -> Optional[list]:
    """One particular solution of rows * x = rhs, or None when inconsistent."""
    if not rows:
        return []
    nc = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    if nc in pivots:
        return None
    zero = rhs[0] * 0 if rhs else Fraction(0)
    x = [zero] * nc
    for r, pc in enumerate(pivots):
        x[pc] = red[r][nc]
    return x


# ---------------------------------------------------------------------------
# Rational reconstruction
# ---------------------------------------------------------------------------


def convergents(x: Fraction) -> Iterator[Fraction]:
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    num, den = x.numerator, x.denominator
    while den:
        a, r = divmod(num, den)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        num, den = den, r


def rationalize(x: float, max_denominator: int, tolerance: float) -> Optional[Fraction]:
    """First continued-fraction convergent within ``tolerance`` of ``x``."""
    if not math.isfinite(x):
        raise BadInput(f"non-finite input {x!r}")
    if max_denominator < 1 or tolerance <= 0:
        raise BadInput("max_denominator must be >= 1 and tolerance > 0")
    exact = Fraction(x)
    for c in convergents(exact):
        if c.denominator > max_denominator:
            return None
        if abs(float(exact - c)) <= tolerance:
            return c
    return None
