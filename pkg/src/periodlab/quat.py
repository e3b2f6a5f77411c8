"""Quaternion algebras (a,b/F), harmonic tensors V_k and the map to P(k).

Symmetric tensors in Sym^n(B0) are stored as homogeneous polynomials in the
basis i, j, k of B0: the key ``(p, q, r)`` stands for the symmetric product of
p copies of i, q copies of j and r copies of k.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Mapping, Optional, Sequence

from .exactalg import FieldMismatch, MultiPoly, NFElem, NumberField, QQ, kernel_basis, quadratic_field
from .repcore import Mat2, PkPoly, mat2

Exps = tuple[int, int, int]


class AlgebraMismatch(ValueError):
    pass


class DegreeTooSmall(ValueError):
    pass


class BadWeight(ValueError):
    pass


class MissingRoot(ValueError):
    pass


class NonUniqueInvariant(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class QuaternionAlgebra:
    """B = F + Fi + Fj + Fk with i^2 = a, j^2 = b, k = ij = -ji."""

    field: NumberField
    a: NFElem
    b: NFElem

    @classmethod
    def over_q(cls, a: int | Fraction, b: int | Fraction) -> "QuaternionAlgebra":
        if a == 0 or b == 0:
            raise ValueError("a and b must be nonzero")
        return cls(QQ, QQ(a), QQ(b))

    def elem(self, x0=0, x1=0, x2=0, x3=0) -> "QuatElem":
        K = self.field
        return QuatElem(self, (K(x0), K(x1), K(x2), K(x3)))

    def basis(self) -> tuple["QuatElem", "QuatElem", "QuatElem"]:
        return self.elem(0, 1), self.elem(0, 0, 1), self.elem(0, 0, 0, 1)

    def norms(self) -> tuple[NFElem, NFElem, NFElem]:
        """<e,e> = Tr(e * conj(e)) for e = i, j, k."""
        return (-2 * self.a, -2 * self.b, 2 * self.a * self.b)


@dataclass(frozen=True)
class QuatElem:
    algebra: QuaternionAlgebra
    coords: tuple[NFElem, NFElem, NFElem, NFElem]

    def _check(self, o: "QuatElem") -> None:
        if o.algebra is not self.algebra:
            raise AlgebraMismatch("elements of different quaternion algebras")

    def __add__(self, o: "QuatElem") -> "QuatElem":
        self._check(o)
        return QuatElem(self.algebra, tuple(x + y for x, y in zip(self.coords, o.coords)))  # type: ignore[arg-type]

    def __sub__(self, o: "QuatElem") -> "QuatElem":
        self._check(o)
        return QuatElem(self.algebra, tuple(x - y for x, y in zip(self.coords, o.coords)))  # type: ignore[arg-type]

    def scale(self, c) -> "QuatElem":
        return QuatElem(self.algebra, tuple(x * c for x in self.coords))  # type: ignore[arg-type]

    def __mul__(self, o: "QuatElem") -> "QuatElem":
        self._check(o)
        a, b = self.algebra.a, self.algebra.b
        x0, x1, x2, x3 = self.coords
        y0, y1, y2, y3 = o.coords
        # i^2=a, j^2=b, k^2=-ab, ij=k, ji=-k, ik=aj, ki=-aj, jk=-bi, kj=bi
        z0 = x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3
        z1 = x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2
        z2 = x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1
        z3 = x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1
        return QuatElem(self.algebra, (z0, z1, z2, z3))

    def conj(self) -> "QuatElem":
        x0, x1, x2, x3 = self.coords
        return QuatElem(self.algebra, (x0, -x1, -x2, -x3))

    def trace(self) -> NFElem:
        return 2 * self.coords[0]

    def norm(self) -> NFElem:
        return (self * self.conj()).coords[0]

    def inverse(self) -> "QuatElem":
        return self.conj().scale(self.norm().inverse())


def trace_pairing(b1: QuatElem, b2: QuatElem) -> NFElem:
    """<b1, b2> = Tr(b1 * conj(b2)) on trace-zero elements."""
    b1._check(b2)
    if not (b1.trace().is_zero() and b2.trace().is_zero()):
        raise ValueError("trace pairing is defined on trace-zero elements")
    return (b1 * b2.conj()).trace()


# ---------------------------------------------------------------------------
# Symmetric tensors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymTensor:
    algebra: QuaternionAlgebra
    degree: int
    terms: Mapping[Exps, NFElem]

    @classmethod
    def build(cls, B: QuaternionAlgebra, degree: int, terms: Mapping) -> "SymTensor":
        clean = {}
        for e, c in terms.items():
            if sum(e) != degree:
                raise ValueError("inhomogeneous symmetric tensor")
            c = B.field(c)
            if not c.is_zero():
                clean[tuple(e)] = c
        return cls(B, degree, clean)

    @classmethod
    def from_elem(cls, b: QuatElem) -> "SymTensor":
        if not b.trace().is_zero():
            raise ValueError("tensor factors must be trace-zero")
        _, x1, x2, x3 = b.coords
        return cls.build(b.algebra, 1, {(1, 0, 0): x1, (0, 1, 0): x2, (0, 0, 1): x3})

    @classmethod
    def scalar(cls, B: QuaternionAlgebra, c=1) -> "SymTensor":
        return cls.build(B, 0, {(0, 0, 0): c})

    def __add__(self, o: "SymTensor") -> "SymTensor":
        if o.degree != self.degree:
            raise ValueError("degree mismatch")
        out = dict(self.terms)
        for e, c in o.terms.items():
            out[e] = out[e] + c if e in out else c
        return SymTensor.build(self.algebra, self.degree, out)

    def __sub__(self, o: "SymTensor") -> "SymTensor":
        return self + o.scale(-1)

    def scale(self, c) -> "SymTensor":
        return SymTensor.build(self.algebra, self.degree, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, o: "SymTensor") -> "SymTensor":
        out: dict[Exps, NFElem] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out[e] + c1 * c2 if e in out else c1 * c2
        return SymTensor.build(self.algebra, self.degree + o.degree, out)

    def __pow__(self, n: int) -> "SymTensor":
        res = SymTensor.scalar(self.algebra)
        for _ in range(n):
            res = res * self
        return res

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, o) -> bool:
        return isinstance(o, SymTensor) and o.degree == self.degree and (self - o).is_zero()

    def vector(self, basis: Sequence[Exps]) -> list[NFElem]:
        z = self.algebra.field.zero()
        return [self.terms.get(e, z) for e in basis]


def sym_monomials(n: int) -> list[Exps]:
    """Exponent triples of degree n in decreasing lexicographic order."""
    return [(p, q, n - p - q) for p in range(n, -1, -1) for q in range(n - p, -1, -1)]


def delta_k(t: SymTensor) -> SymTensor:
    """Contract one pair of factors with the trace pairing, summed over pairs."""
    if t.degree < 2:
        raise DegreeTooSmall("contraction needs degree >= 2")
    na, nb, nk = t.algebra.norms()
    out: dict[Exps, NFElem] = {}
    for (p, q, r), c in t.terms.items():
        for e, cnt, nrm in (((p - 2, q, r), comb(p, 2), na), ((p, q - 2, r), comb(q, 2), nb), ((p, q, r - 2), comb(r, 2), nk)):
            if cnt:
                v = c * nrm * cnt
                out[e] = out[e] + v if e in out else v
    return SymTensor.build(t.algebra, t.degree - 2, out)


def sym_pairing(v: SymTensor, w: SymTensor) -> NFElem:
    """(1/n!) sum over permutations of products of trace pairings."""
    if v.degree != w.degree:
        raise ValueError("degree mismatch")
    n = v.degree
    na, nb, nk = v.algebra.norms()
    acc = v.algebra.field.zero()
    for e, c in v.terms.items():
        d = w.terms.get(e)
        if d is not None:
            p, q, r = e
            mult = Fraction(factorial(p) * factorial(q) * factorial(r), factorial(n))
            acc = acc + c * d * (na ** p) * (nb ** q) * (nk ** r) * mult
    return acc


def _delta_matrix(B: QuaternionAlgebra, n: int) -> list[list[NFElem]]:
    src = sym_monomials(n)
    dst = sym_monomials(n - 2)
    cols = [delta_k(SymTensor.build(B, n, {e: 1})).vector(dst) for e in src]
    return [[cols[c][r] for c in range(len(src))] for r in range(len(dst))]


def vk_basis(B: QuaternionAlgebra, k: int) -> list[SymTensor]:
    """Echelonized basis of V_k = ker(Delta_k) in Sym^(k/2)(B0)."""
    if k % 2 or k < 0:
        raise BadWeight(f"weight {k} must be even and nonnegative")
    n = k // 2
    src = sym_monomials(n)
    if n < 2:
        return [SymTensor.build(B, n, {e: 1}) for e in src]
    ker = kernel_basis(_delta_matrix(B, n))
    return [SymTensor.build(B, n, dict(zip(src, v))) for v in ker]


# ---------------------------------------------------------------------------
# Splitting over L = F(sqrt(a)) and the map to P(k)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Splitting:
    """The embedding iota: B -> M_2(L) attached to a root s of x^2 - a."""

    algebra: QuaternionAlgebra
    sqrt_a: NFElem

    @classmethod
    def standard(cls, B: QuaternionAlgebra) -> "Splitting":
        if B.field.degree != 1:
            raise MissingRoot("standard splitting only for algebras over Q")
        L = quadratic_field(int(B.a.coeffs[0]) if B.a.coeffs[0].denominator == 1 else B.a.coeffs[0])
        return cls(B, L.gen())

    @property
    def target(self) -> NumberField:
        return self.sqrt_a.field

    def lift(self, x: NFElem) -> NFElem:
        L = self.target
        if x.field is L:
            return x
        if x.is_rational():
            return L(x.coeffs[0])
        raise FieldMismatch("cannot move coefficient into the splitting field")

    def conj_e(self, x: NFElem) -> NFElem:
        """Galois conjugation s -> -s on L, assuming L = Q(s)."""
        L = self.target
        if L.degree != 2 or L.minpoly[1] != 0:
            raise MissingRoot("conjugation needs L = Q(s) with s^2 rational")
        return L((x.coeffs[0], -x.coeffs[1]))


def iota_embed(b: QuatElem, sqrt_a: NFElem | Splitting) -> Mat2:
    sp = sqrt_a if isinstance(sqrt_a, Splitting) else Splitting(b.algebra, sqrt_a)
    s = sp.sqrt_a
    if s * s != sp.lift(b.algebra.a):
        raise MissingRoot("given element is not a square root of a")
    x0, x1, x2, x3 = (sp.lift(c) for c in b.coords)
    bb = sp.lift(b.algebra.b)
    e1 = x0 + x1 * s
    e2 = x2 + x3 * s
    e1c = x0 - x1 * s
    e2c = x2 - x3 * s
    L = sp.target
    return mat2(L, e1, bb * e2, e2c, e1c)


def _kappa_factors(sp: Splitting) -> tuple[PkPoly, PkPoly, PkPoly]:
    """kappa of i, j, k: Tr((Y;-X)(X Y) iota(b)) = XY p - X^2 q + Y^2 r - XY t."""
    B = sp.algebra
    out = []
    L = sp.target
    for e in B.basis():
        (p, q), (r, t) = iota_embed(e, sp)
        # coefficients of X^j Y^(2-j): j=0 -> Y^2, j=1 -> XY, j=2 -> X^2
        out.append(PkPoly(L, 2, (r, p - t, -q)))
    return out[0], out[1], out[2]


def kappa_embed(v: SymTensor, sp: Splitting) -> PkPoly:
    fi, fj, fk = _kappa_factors(sp)
    L = sp.target
    n = v.degree
    out = PkPoly.zero(L, 2 * n)
    for (p, q, r), c in v.terms.items():
        out = out + (fi ** p * fj ** q * fk ** r).scale(sp.lift(c))
    return out


def conjugate_tensor(v: SymTensor, g: QuatElem) -> SymTensor:
    """Action b -> g b g^-1 extended to Sym^n(B0)."""
    B = v.algebra
    gi = g.inverse()
    imgs = [SymTensor.from_elem(g * e * gi) for e in B.basis()]
    out = SymTensor.build(B, v.degree, {})
    for (p, q, r), c in v.terms.items():
        out = out + (imgs[0] ** p * imgs[1] ** q * imgs[2] ** r).scale(c)
    return out


# ---------------------------------------------------------------------------
# Torus-invariant vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Laurent:
    """Finite Laurent polynomial sum c[e] u^e."""

    field: NumberField
    coeffs: Mapping[int, NFElem]

    @classmethod
    def build(cls, K: NumberField, coeffs: Mapping[int, object]) -> "Laurent":
        return cls(K, {e: K(c) for e, c in coeffs.items() if not K(c).is_zero()})

    def __mul__(self, o: "Laurent") -> "Laurent":
        out: dict[int, NFElem] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in o.coeffs.items():
                out[e1 + e2] = out.get(e1 + e2, self.field.zero()) + c1 * c2
        return Laurent.build(self.field, out)

    def __add__(self, o: "Laurent") -> "Laurent":
        out = dict(self.coeffs)
        for e, c in o.coeffs.items():
            out[e] = out.get(e, self.field.zero()) + c
        return Laurent.build(self.field, out)

    def scale(self, c) -> "Laurent":
        return Laurent.build(self.field, {e: v * c for e, v in self.coeffs.items()})

    def __pow__(self, n: int) -> "Laurent":
        res = Laurent.build(self.field, {0: 1})
        for _ in range(n):
            res = res * self
        return res

    def is_constant(self) -> bool:
        return set(self.coeffs) <= {0}

    def constant(self) -> NFElem:
        return self.coeffs.get(0, self.field.zero())


def torus_eval(v: SymTensor, sp: Splitting) -> Laurent:
    """prod Tr(((1, u), (-1/u, -1)) iota(b_i)) as a Laurent polynomial in u."""
    L = sp.target
    factors = []
    for e in v.algebra.basis():
        (p, q), (r, t) = iota_embed(e, sp)
        factors.append(Laurent.build(L, {0: p - t, 1: r, -1: -q}))
    out = Laurent.build(L, {})
    for (p, q, r), c in v.terms.items():
        out = out + (factors[0] ** p * factors[1] ** q * factors[2] ** r).scale(sp.lift(c))
    return out


def quartic_invariant(B: QuaternionAlgebra) -> SymTensor:
    """(j.j) - (1/a)(k.k) - 2(b/a)(i.i)."""
    a, b = B.a, B.b
    return SymTensor.build(B, 2, {(0, 2, 0): 1, (0, 0, 2): -a.inverse(), (2, 0, 0): -2 * b / a})


def _torus_action_poly(v: SymTensor) -> tuple[MultiPoly, MultiPoly]:
    """v and its image under i->i, j->a'j+b'k, k->a b' j+a'k, reduced mod a'^2 = 1 + a b'^2."""
    B = v.algebra
    K = B.field
    names = ("I", "J", "K", "ap", "bp")
    I, J, Kk, ap, bp = (MultiPoly.var(K, names, n) for n in names)
    orig = MultiPoly.build(K, names, {(p, q, r, 0, 0): c for (p, q, r), c in v.terms.items()})
    imgJ = ap * J + bp * Kk
    imgK = bp * J * B.a + ap * Kk
    moved = orig.substitute({"I": I, "J": imgJ, "K": imgK, "ap": ap, "bp": bp}, orig)
    return orig, _reduce_norm_one(moved, B.a)


def _reduce_norm_one(p: MultiPoly, a: NFElem) -> MultiPoly:
    K = p.field
    out: dict = {}
    for m, c in p.terms.items():
        e = m[3]
        base = list(m)
        base[3] = e % 2
        # a'^(2t) = (1 + a b'^2)^t
        t = e // 2
        for j in range(t + 1):
            mm = base[:]
            mm[4] += 2 * j
            key = tuple(mm)
            val = c * comb(t, j) * a ** j
            out[key] = out.get(key, K.zero()) + val
    return MultiPoly.build(K, p.variables, out)


def torus_invariant(v: SymTensor) -> bool:
    orig, moved = _torus_action_poly(v)
    return orig == moved


def invariant_vector(B: QuaternionAlgebra, k: int, sp: Optional[Splitting] = None) -> SymTensor:
    """The torus-invariant harmonic tensor, solved inside span{v4^n v2^(k/2-2n)}."""
    if k % 2 or k < 2:
        raise BadWeight(f"weight {k} must be even and >= 2")
    n = k // 2
    v2 = SymTensor.build(B, 1, {(1, 0, 0): 1})
    v4 = quartic_invariant(B)
    span = [v4 ** t * v2 ** (n - 2 * t) for t in range(n // 2 + 1)]
    if n < 2:
        coeffs = [[B.field.one()]]
    else:
        dst = sym_monomials(n - 2)
        imgs = [delta_k(s).vector(dst) for s in span]
        rows = [[imgs[c][r] for c in range(len(span))] for r in range(len(dst))]
        coeffs = kernel_basis(rows)
    if len(coeffs) != 1:
        raise NonUniqueInvariant(f"kernel of dimension {len(coeffs)} inside the spanning set")
    v = SymTensor.build(B, n, {})
    for c, s in zip(coeffs[0], span):
        v = v + s.scale(c)
    lead = next(v.terms[e] for e in sym_monomials(n) if e in v.terms)
    v = v.scale(lead.inverse())
    if n >= 2 and not delta_k(v).is_zero():
        raise NonUniqueInvariant("solution is not harmonic")
    if not torus_invariant(v):
        raise NonUniqueInvariant("solution is not torus invariant")
    if sp is not None:
        f = torus_eval(v, sp)
        if not f.is_constant():
            raise NonUniqueInvariant("torus evaluation is not constant")
    return v


def invariant_subspace_dim(B: QuaternionAlgebra, k: int) -> int:
    """Dimension of the torus-fixed subspace of V_k, solved over all of Sym^(k/2)."""
    n = k // 2
    src = sym_monomials(n)
    unknown_rows: dict = {}
    for c, e in enumerate(src):
        t = SymTensor.build(B, n, {e: 1})
        orig, moved = _torus_action_poly(t)
        diff = moved - orig
        for m, val in diff.terms.items():
            unknown_rows.setdefault(("t", m), {})[c] = val
        if n >= 2:
            for m, val in delta_k(t).terms.items():
                unknown_rows.setdefault(("d", m), {})[c] = val
    K = B.field
    rows = [[r.get(c, K.zero()) for c in range(len(src))] for r in unknown_rows.values()]
    if not rows:
        return len(src)
    return len(kernel_basis(rows))
