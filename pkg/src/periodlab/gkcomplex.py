"""Complex-place principal series, the Hhat recurrence and the cocycles c1, c2, c3.

Functions on SU(2) are polynomials in a, b, ac, bc (alpha, beta and their
conjugates) reduced by the sphere relation.  A vector ``sum_n phi_n(mu_n)`` is a
:class:`PhiVec` holding ``{n: mu_n}`` with ``mu_n`` in V(2n).  The coefficient
field is Q(zeta8), which contains i and sqrt(2).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Mapping, Optional, Sequence

from .exactalg import (
    SU2_VARS,
    MultiPoly,
    NFElem,
    QQzeta8,
    rref,
    solve_linear,
    zeta8_i,
    zeta8_sqrt2,
)
from .repcore import Mat2, VkDual, dual_act, lie_act_findim, lie_element, mat2, mat2_inv, upsilon

K8 = QQzeta8


class BadLevel(ValueError):
    pass


class FormulaMismatch(AssertionError):
    pass


class PVCheckFailed(AssertionError):
    pass


class InternalError(RuntimeError):
    pass


def conj8(x: NFElem) -> NFElem:
    """Complex conjugation on Q(zeta8): zeta8 -> zeta8^-1 = -zeta8^3."""
    c0, c1, c2, c3 = x.coeffs
    return K8((c0, -c3, -c2, -c1))


def conj_mat(g: Mat2) -> Mat2:
    return tuple(tuple(conj8(x) for x in r) for r in g)  # type: ignore[return-value]


def kappa(alpha, beta) -> Mat2:
    """kappa(alpha, beta) = ((alpha, beta), (-conj beta, conj alpha))."""
    a, b = K8(alpha), K8(beta)
    return mat2(K8, a, b, -conj8(b), conj8(a))


def kappa1() -> Mat2:
    r = zeta8_sqrt2(K8).inverse()
    return kappa(r, r)


def kappa2() -> Mat2:
    r = zeta8_sqrt2(K8).inverse()
    return kappa(r, -zeta8_i(K8) * r)


# ---------------------------------------------------------------------------
# Characters and sphere polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharC:
    """chi(r e^(i theta)) = r^N e^(i lambda theta)."""

    N: int
    lam: int

    @classmethod
    def of_weight(cls, k_id: int, k_c: int) -> "CharC":
        return cls((k_id + k_c) // 2, (k_id - k_c) // 2)

    def hat(self) -> "CharC":
        return CharC(self.lam + 1, self.N - 1)


@dataclass(frozen=True)
class SpherePoly:
    """r^rpow times a polynomial on the unit sphere (in normal form)."""

    rpow: int
    poly: MultiPoly

    def __add__(self, o: "SpherePoly") -> "SpherePoly":
        if o.rpow != self.rpow:
            raise ValueError("r-powers differ")
        return SpherePoly(self.rpow, self.poly + o.poly)

    def __sub__(self, o: "SpherePoly") -> "SpherePoly":
        return self + SpherePoly(o.rpow, -o.poly)

    def scale(self, c) -> "SpherePoly":
        return SpherePoly(self.rpow, self.poly * c)

    def __eq__(self, o) -> bool:
        return isinstance(o, SpherePoly) and o.rpow == self.rpow and (self.poly - o.poly).is_zero()


def sphere_zero() -> MultiPoly:
    return MultiPoly.build(K8, SU2_VARS, {}, "su2")


def sphere_var(name: str) -> MultiPoly:
    return MultiPoly.var(K8, SU2_VARS, name, "su2")


@lru_cache(maxsize=None)
def _phi_forms(n: int, lam: int) -> tuple[MultiPoly, ...]:
    """Coefficient of x^j y^(2n-j) in (a y - b x)^(n+lam) (-bc y - ac x)^(n-lam)."""
    a, b, ac, bc = (sphere_var(v) for v in SU2_VARS)
    zero = sphere_zero()
    # binary forms as lists indexed by the power of x
    l1 = [a, -b]
    l2 = [-bc, -ac]

    def mul(p, q):
        out = [zero] * (len(p) + len(q) - 1)
        for s, u in enumerate(p):
            for t, v in enumerate(q):
                out[s + t] = out[s + t] + u * v
        return out

    form = [zero + 1]
    for _ in range(n + lam):
        form = mul(form, l1)
    for _ in range(n - lam):
        form = mul(form, l2)
    return tuple(form)


def phi_expand(n: int, mu: VkDual, chi: CharC) -> SpherePoly:
    """phi_n(mu)(r, kappa(alpha, beta)) = r^(2N) mu(P_(n+lam, n-lam))."""
    if n < abs(chi.lam):
        raise BadLevel(f"level {n} below |lambda| = {abs(chi.lam)}")
    if mu.weight != 2 * n:
        raise BadLevel("functional weight must be 2n")
    forms = _phi_forms(n, chi.lam)
    acc = sphere_zero()
    for j, c in enumerate(mu.values):
        if c:
            acc = acc + forms[j] * c
    return SpherePoly(2 * chi.N, acc)


def hatH_oracle(f: SpherePoly) -> SpherePoly:
    """The coordinate operator for Hhat on s-independent functions r^(2N) g."""
    a, b, ac, bc = (sphere_var(v) for v in SU2_VARS)
    g = f.poly
    aa = a * ac
    bb = b * bc
    two_n = f.rpow  # r d/dr r^(2N) = 2N r^(2N)
    res = (aa - bb) * g * two_n
    res = res - a * bb * g.diff("a").with_relation("su2") * 2
    res = res - ac * bb * g.diff("ac").with_relation("su2") * 2
    res = res + b * aa * g.diff("b").with_relation("su2") * 2
    res = res + bc * aa * g.diff("bc").with_relation("su2") * 2
    return SpherePoly(f.rpow, res)


# ---------------------------------------------------------------------------
# PhiVec and the Hhat recurrence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiVec:
    chi: CharC
    comps: Mapping[int, VkDual]

    @classmethod
    def build(cls, chi: CharC, comps: Mapping[int, VkDual]) -> "PhiVec":
        return cls(chi, {n: mu for n, mu in comps.items() if not mu.is_zero()})

    @classmethod
    def zero(cls, chi: CharC) -> "PhiVec":
        return cls(chi, {})

    def __add__(self, o: "PhiVec") -> "PhiVec":
        out = dict(self.comps)
        for n, mu in o.comps.items():
            out[n] = out[n] + mu if n in out else mu
        return PhiVec.build(self.chi, out)

    def __sub__(self, o: "PhiVec") -> "PhiVec":
        return self + o.scale(-1)

    def scale(self, c) -> "PhiVec":
        return PhiVec.build(self.chi, {n: mu.scale(c) for n, mu in self.comps.items()})

    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, o) -> bool:
        return isinstance(o, PhiVec) and (self - o).is_zero()

    def levels(self) -> list[int]:
        return sorted(self.comps)

    def expand(self) -> SpherePoly:
        acc = SpherePoly(2 * self.chi.N, sphere_zero())
        for n, mu in self.comps.items():
            acc = acc + phi_expand(n, mu, self.chi)
        return acc

    def act(self, g: Mat2) -> "PhiVec":
        """Right translation by g in SU(2): phi_n(mu) -> phi_n(g mu)."""
        return PhiVec.build(self.chi, {n: dual_act(g, mu) for n, mu in self.comps.items()})


def _mu0(mu: VkDual, n: int) -> VkDual:
    return VkDual(K8, 2 * n, tuple(mu.values[j] * Fraction(2 * n - 2 * j, n * (n + 1)) for j in range(2 * n + 1)))


def _mu1(mu: VkDual, n: int) -> VkDual:
    f = Fraction(2, (n + 1) * (2 * n + 1))
    vals = [K8.zero()] + [mu.values[j - 1] * (f * j * (2 * n + 2 - j)) for j in range(1, 2 * n + 2)] + [K8.zero()]
    return VkDual(K8, 2 * n + 2, tuple(vals))


def _mum1(mu: VkDual, n: int) -> VkDual:
    f = Fraction(2, n * (2 * n + 1))
    return VkDual(K8, 2 * n - 2, tuple(mu.values[j + 1] * f for j in range(2 * n - 1)))


def hatH_recurrence(v: PhiVec) -> PhiVec:
    """Hhat phi_n(mu) = lam(N-1) phi_n(mu_0) - (N+n) phi_(n+1)(mu_1)
    + (n+lam)(n-lam)(n-N+1) phi_(n-1)(mu_-1)."""
    N, lam = v.chi.N, v.chi.lam
    out = PhiVec.zero(v.chi)
    for n, mu in v.comps.items():
        c0 = lam * (N - 1)
        if c0:
            out = out + PhiVec.build(v.chi, {n: _mu0(mu, n).scale(c0)})
        out = out + PhiVec.build(v.chi, {n + 1: _mu1(mu, n).scale(-(N + n))})
        cm = (n + lam) * (n - lam) * (n - N + 1)
        if cm:
            out = out + PhiVec.build(v.chi, {n - 1: _mum1(mu, n).scale(cm)})
    return out


def lie_act_phi(x: str, v: PhiVec) -> PhiVec:
    """Hhat by the recurrence; Wtilde and H by conjugating Hhat with kappa1, kappa2."""
    if x == "Hhat":
        return hatH_recurrence(v)
    g = {"Wtilde": kappa1(), "H": kappa2()}[x]
    return hatH_recurrence(v.act(g)).act(mat2_inv(g))


# ---------------------------------------------------------------------------
# SU(2) integration
# ---------------------------------------------------------------------------


def moment_su2(n1: int, m1: int, n2: int, m2: int) -> Fraction:
    """Integral of a^n1 b^m1 ac^n2 bc^m2 over SU(2) with total mass 1."""
    if n1 != n2 or m1 != m2:
        return Fraction(0)
    return Fraction(1, (n1 + m1 + 1) * comb(n1 + m1, n1))


def integrate(p: MultiPoly) -> NFElem:
    acc = K8.zero()
    for (n1, m1, n2, m2), c in p.terms.items():
        w = moment_su2(n1, m1, n2, m2)
        if w:
            acc = acc + c * w
    return acc


# ---------------------------------------------------------------------------
# V(k_id - 2) (x) V(k_c - 2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VPair:
    """Functional on P(w1) (x) P(w2); values[j1][j2] on X^j1 Y^(w1-j1) (x) X^j2 Y^(w2-j2)."""

    w1: int
    w2: int
    values: tuple[tuple[NFElem, ...], ...]

    @classmethod
    def build(cls, w1: int, w2: int, values) -> "VPair":
        return cls(w1, w2, tuple(tuple(K8(x) for x in row) for row in values))

    @classmethod
    def basis(cls, w1: int, w2: int, j1: int, j2: int) -> "VPair":
        return cls.build(w1, w2, [[int((s, t) == (j1, j2)) for t in range(w2 + 1)] for s in range(w1 + 1)])

    @classmethod
    def from_flat(cls, w1: int, w2: int, flat: Sequence) -> "VPair":
        return cls.build(w1, w2, [flat[s * (w2 + 1):(s + 1) * (w2 + 1)] for s in range(w1 + 1)])

    @classmethod
    def tensor(cls, mu1: VkDual, mu2: VkDual) -> "VPair":
        return cls.build(mu1.weight, mu2.weight, [[x * y for y in mu2.values] for x in mu1.values])

    def flat(self) -> list[NFElem]:
        return [x for row in self.values for x in row]

    def __add__(self, o: "VPair") -> "VPair":
        return VPair(self.w1, self.w2, tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(self.values, o.values)))

    def __sub__(self, o: "VPair") -> "VPair":
        return self + o.scale(-1)

    def scale(self, c) -> "VPair":
        return VPair(self.w1, self.w2, tuple(tuple(x * c for x in r) for r in self.values))

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.values for x in r)

    def __eq__(self, o) -> bool:
        return isinstance(o, VPair) and (self - o).is_zero()

    def _map_slots(self, f1: Callable[[VkDual], VkDual], f2: Callable[[VkDual], VkDual]) -> "VPair":
        # apply f1 to the first slot (columns), then f2 to the second (rows)
        cols = []
        for t in range(self.w2 + 1):
            col = VkDual(K8, self.w1, tuple(self.values[s][t] for s in range(self.w1 + 1)))
            cols.append(f1(col).values)
        tmp = [[cols[t][s] for t in range(self.w2 + 1)] for s in range(self.w1 + 1)]
        rows = [f2(VkDual(K8, self.w2, tuple(tmp[s]))).values for s in range(self.w1 + 1)]
        return VPair(self.w1, self.w2, tuple(tuple(r) for r in rows))

    def act(self, g: Mat2) -> "VPair":
        """g on the first slot, conj(g) on the second."""
        gc = conj_mat(g)
        return self._map_slots(lambda m: dual_act(g, m), lambda m: dual_act(gc, m))

    def lie(self, x: Mat2) -> "VPair":
        """Derivation: x on the first slot plus conj(x) on the second."""
        xc = conj_mat(x)
        first = self._map_slots(lambda m: lie_act_findim(x, m), lambda m: m)
        second = self._map_slots(lambda m: m, lambda m: lie_act_findim(xc, m))
        return first + second


# ---------------------------------------------------------------------------
# rho and the section
# ---------------------------------------------------------------------------


def rho_complex(f: PhiVec, k_id: int, k_c: int) -> VPair:
    """rho(f)(P_id (x) P_c) = int f(alpha, beta) P_id(-bc, ac) P_c(-b, a)."""
    w1, w2 = k_id - 2, k_c - 2
    g = f.expand().poly
    vals = []
    for j1 in range(w1 + 1):
        row = []
        for j2 in range(w2 + 1):
            sgn = (-1) ** (j1 + j2)
            acc = K8.zero()
            for (p, q, r, s), c in g.terms.items():
                w = moment_su2(p + w2 - j2, q + j2, r + w1 - j1, s + j1)
                if w:
                    acc = acc + c * w
            row.append(acc * sgn)
        vals.append(row)
    return VPair.build(w1, w2, vals)


def low_levels(k_id: int, k_c: int) -> list[int]:
    chi = CharC.of_weight(k_id, k_c)
    return list(range(abs(chi.lam), chi.N - 1))


def discrete_levels_start(k_id: int, k_c: int) -> int:
    """D(k) is spanned by the levels n > (k_id + k_c - 4)/2."""
    return (k_id + k_c - 4) // 2 + 1


@lru_cache(maxsize=None)
def _section_data(k_id: int, k_c: int):
    chi = CharC.of_weight(k_id, k_c)
    w1, w2 = k_id - 2, k_c - 2
    cols = []
    labels = []
    for n in low_levels(k_id, k_c):
        for j in range(2 * n + 1):
            e = VkDual.from_values(K8, [int(t == j) for t in range(2 * n + 1)])
            cols.append(rho_complex(PhiVec.build(chi, {n: e}), k_id, k_c).flat())
            labels.append((n, j))
    dim = (w1 + 1) * (w2 + 1)
    if len(cols) != dim:
        raise InternalError("level count does not match dim V(k-2)")
    M = [[cols[c][r] for c in range(dim)] for r in range(dim)]
    red, piv = rref([row + [K8(int(r == t)) for t in range(dim)] for r, row in enumerate(M)])
    if len(piv) < dim or piv[dim - 1] != dim - 1:
        raise InternalError("rho is not injective on the low levels")
    inv = [row[dim:] for row in red]
    return chi, labels, inv


def section_complex(mu: VPair, k_id: int, k_c: int) -> PhiVec:
    """The unique K-equivariant section of rho, supported on levels |lam| .. N-2."""
    chi, labels, inv = _section_data(k_id, k_c)
    flat = mu.flat()
    coeffs = [sum((inv[r][c] * flat[c] for c in range(len(flat)) if flat[c]), K8.zero()) for r in range(len(flat))]
    comps: dict[int, list] = {}
    for (n, j), c in zip(labels, coeffs):
        comps.setdefault(n, [K8.zero()] * (2 * n + 1))[j] = c
    return PhiVec.build(chi, {n: VkDual(K8, 2 * n, tuple(v)) for n, v in comps.items()})


def casimir_eigen_ok(v: PhiVec, n: int) -> bool:
    """phi_n-images are eigenvectors of the K-Casimir with eigenvalue -4n(n+1)."""
    mu = v.comps[n]
    gens = [lie_element(g, K8) for g in ("Hhat_i", "W", "Wtilde_i")]
    acc = VkDual.zero(K8, 2 * n)
    for x in gens:
        acc = acc + lie_act_findim(x, lie_act_findim(x, mu))
    return acc == mu.scale(-4 * n * (n + 1))


# ---------------------------------------------------------------------------
# delta s and c1
# ---------------------------------------------------------------------------


def t_map(mu: VPair, n: int, chi: CharC) -> list[NFElem]:
    """t_n(mu) in P(2n): mu applied to |X_id Y_id; x y|^r1 |-Y_c X_c; x y|^r2 |X_id Y_id; -Y_c X_c|^r3.

    Returned as coefficients of x^j y^(2n-j)."""
    r1, r2, r3 = n + chi.lam, n - chi.lam, chi.N - 2 - n
    w1, w2 = mu.w1, mu.w2
    # polynomial in (X_id, Y_id, X_c, Y_c, x, y) as dict of exponent tuples
    factors = [
        ({(1, 0, 0, 0, 0, 1): 1, (0, 1, 0, 0, 1, 0): -1}, r1),  # X_id y - Y_id x
        ({(0, 0, 0, 1, 0, 1): -1, (0, 0, 1, 0, 1, 0): -1}, r2),  # -Y_c y - X_c x
        ({(1, 0, 1, 0, 0, 0): 1, (0, 1, 0, 1, 0, 0): 1}, r3),  # X_id X_c + Y_id Y_c
    ]
    poly = {(0,) * 6: 1}
    for f, e in factors:
        for _ in range(e):
            nxt: dict = {}
            for m1, c1 in poly.items():
                for m2, c2 in f.items():
                    m = tuple(u + v for u, v in zip(m1, m2))
                    nxt[m] = nxt.get(m, 0) + c1 * c2
            poly = {m: c for m, c in nxt.items() if c}
    out = [K8.zero()] * (2 * n + 1)
    for (xi, yi, xc, yc, x, y), c in poly.items():
        if xi + yi != w1 or xc + yc != w2:
            raise InternalError("t_n degree mismatch")
        val = mu.values[xi][xc]
        if val:
            out[x] = out[x] + val * c
    return out


def _poly_to_dual(coeffs: Sequence[NFElem]) -> VkDual:
    """The functional <P, .> attached to a polynomial through the invariant pairing."""
    w = len(coeffs) - 1
    vals = [coeffs[w - j] * Fraction((-1) ** (w - (w - j)), comb(w, w - j)) for j in range(w + 1)]
    return VkDual(K8, w, tuple(vals))


def delta_s_closed(mu: VPair, k_id: int, k_c: int) -> PhiVec:
    """-2 C(2N-4, k_id-2) phi_(N-1)(t_(N-2)(mu)^*)."""
    chi = CharC.of_weight(k_id, k_c)
    N = chi.N
    tau = _poly_to_dual(t_map(mu, N - 2, chi))
    w = 2 * N - 2
    # t^*(x^j y^(w-j)) = tau(d^2/dxdy x^j y^(w-j)) = j (w-j) tau(x^(j-1) y^(w-j-1))
    star = [K8.zero()] + [tau.values[j - 1] * (j * (w - j)) for j in range(1, w)] + [K8.zero()]
    val = VkDual(K8, w, tuple(star))
    return PhiVec.build(chi, {N - 1: val.scale(-2 * comb(2 * N - 4, k_id - 2))})


def c1_first_principles(mu: VPair, k_id: int, k_c: int, x: str = "Hhat") -> PhiVec:
    """c1(X)(mu) = X(s mu) - s(X mu)."""
    X = lie_element(x, K8)
    return lie_act_phi(x, section_complex(mu, k_id, k_c)) - section_complex(mu.lie(X), k_id, k_c)


def delta_s_complex(mu: VPair, k_id: int, k_c: int) -> PhiVec:
    """delta s = c1(Hhat)/2 from first principles, checked against the closed form."""
    first = c1_first_principles(mu, k_id, k_c).scale(Fraction(1, 2))
    closed = delta_s_closed(mu, k_id, k_c)
    if first != closed:
        raise FormulaMismatch(f"delta s mismatch for k=({k_id},{k_c})")
    return first


def vpair_basis(k_id: int, k_c: int) -> list[VPair]:
    w1, w2 = k_id - 2, k_c - 2
    return [VPair.basis(w1, w2, s, t) for s in range(w1 + 1) for t in range(w2 + 1)]


# ---------------------------------------------------------------------------
# Cochains: c1 and c2 on the generators Hhat, Wtilde, H
# ---------------------------------------------------------------------------

HomVD = Callable[[VPair], PhiVec]


def conj_hom(g: Mat2, phi: HomVD) -> HomVD:
    """(g phi)(mu) = g phi(g^-1 mu)."""
    gi = mat2_inv(g)
    return lambda mu: phi(mu.act(gi)).act(g)


@dataclass
class ComplexCocycles:
    k_id: int
    k_c: int
    c2_scale: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        self.chi = CharC.of_weight(self.k_id, self.k_c)
        self._c1h: dict = {}

    def c1(self, x: str) -> HomVD:
        """c1(Hhat) = 2 delta s; c1(Wtilde) = kappa1^-1 c1(Hhat) kappa1; c1(H) likewise with kappa2."""
        if x == "Hhat":
            return self._c1_hhat
        g = {"Wtilde": kappa1(), "H": kappa2()}[x]
        return conj_hom(mat2_inv(g), self._c1_hhat)

    def _c1_hhat(self, mu: VPair) -> PhiVec:
        key = mu.values
        if key not in self._c1h:
            self._c1h[key] = delta_s_closed(mu, self.k_id, self.k_c).scale(2)
        return self._c1h[key]

    def c2(self, x: str, y: str) -> HomVD:
        """c2(Wtilde, H) = c1(Hhat), extended by K-equivariance and antisymmetry."""
        base = lambda mu: self._c1_hhat(mu).scale(self.c2_scale)
        table = {
            ("Wtilde", "H"): base,
            ("Hhat", "H"): conj_hom(kappa1(), base),
            ("Wtilde", "Hhat"): conj_hom(kappa2(), base),
        }
        if (x, y) in table:
            return table[(x, y)]
        if (y, x) in table:
            f = table[(y, x)]
            return lambda mu: f(mu).scale(-1)
        if x == y:
            return lambda mu: PhiVec.zero(self.chi)
        raise KeyError((x, y))


def hom_action(x: str, phi: HomVD, k_id: int, k_c: int) -> HomVD:
    """(X phi)(mu) = X(phi(mu)) - phi(X mu)."""
    X = lie_element(x, K8)
    return lambda mu: lie_act_phi(x, phi(mu)) - phi(mu.lie(X))


def c1_cocycle_ok(cc: ComplexCocycles) -> bool:
    """d c1 (X, Y) = X c1(Y) - Y c1(X) vanishes; every bracket lies in k."""
    pairs = [("Hhat", "Wtilde"), ("Hhat", "H"), ("Wtilde", "H")]
    for x, y in pairs:
        for mu in vpair_basis(cc.k_id, cc.k_c):
            val = hom_action(x, cc.c1(y), cc.k_id, cc.k_c)(mu) - hom_action(y, cc.c1(x), cc.k_id, cc.k_c)(mu)
            if not val.is_zero():
                return False
    return True


def c1_direct_matches(cc: ComplexCocycles) -> bool:
    """c1(Wtilde), c1(H) by equivariance agree with X(s mu) - s(X mu)."""
    for x in ("Wtilde", "H"):
        for mu in vpair_basis(cc.k_id, cc.k_c):
            if cc.c1(x)(mu) != c1_first_principles(mu, cc.k_id, cc.k_c, x):
                return False
    return True


def c2_cocycle_ok(cc: ComplexCocycles) -> bool:
    """d c2 (Hhat, Wtilde, H) = Hhat c2(Wtilde,H) - Wtilde c2(Hhat,H) + H c2(Hhat,Wtilde)."""
    for mu in vpair_basis(cc.k_id, cc.k_c):
        val = (
            hom_action("Hhat", cc.c2("Wtilde", "H"), cc.k_id, cc.k_c)(mu)
            - hom_action("Wtilde", cc.c2("Hhat", "H"), cc.k_id, cc.k_c)(mu)
            + hom_action("H", cc.c2("Hhat", "Wtilde"), cc.k_id, cc.k_c)(mu)
        )
        if not val.is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# psi: B(chi_hat) -> D(k)
# ---------------------------------------------------------------------------


def psi_coeff(n: int, chi_hat: CharC, offset: int = 0) -> int:
    """C(n + lam_hat, N_hat + n - 1 + offset)."""
    return comb(n + chi_hat.lam, chi_hat.N + n - 1 + offset)


def psi_map(v: PhiVec, chi: CharC, offset: int = 0) -> PhiVec:
    return PhiVec.build(chi, {n: mu.scale(psi_coeff(n, v.chi, offset)) for n, mu in v.comps.items()})


def psi_inverse(v: PhiVec, chi_hat: CharC) -> PhiVec:
    return PhiVec.build(chi_hat, {n: mu.scale(Fraction(1, psi_coeff(n, chi_hat))) for n, mu in v.comps.items()})


def psi_intertwine_check(k_id: int, k_c: int, n_max: int, mus: Optional[dict] = None, offset: int = 0) -> bool:
    """psi(Hhat_chihat phi_n(mu)) = Hhat_chi psi(phi_n(mu)) for N-1 <= n <= n_max."""
    chi = CharC.of_weight(k_id, k_c)
    chat = chi.hat()
    for n in range(abs(chat.lam), n_max + 1):
        if mus is not None and n in mus:
            basis = [mus[n]]
        else:
            basis = [VkDual.from_values(K8, [int(t == j) for t in range(2 * n + 1)]) for j in range(2 * n + 1)]
        for mu in basis:
            v = PhiVec.build(chat, {n: mu})
            lhs = psi_map(hatH_recurrence(v), chi, offset)
            rhs = hatH_recurrence(psi_map(v, chi, offset))
            if lhs != rhs:
                return False
    return True


# ---------------------------------------------------------------------------
# Borel model and the contraction by Hhat^*
# ---------------------------------------------------------------------------

BOREL = ("Hhat", "N1", "N2")


def _eval_identity(v: PhiVec, chi_hat: CharC) -> NFElem:
    """Value at the identity (alpha=1, beta=0) of psi^-1(v) in B(chi_hat)."""
    w = psi_inverse(v, chi_hat)
    acc = K8.zero()
    for n, mu in w.comps.items():
        # |1 0; x y|^(n+lam) |0 1; x y|^(n-lam) = y^(n+lam) (-x)^(n-lam)
        e = n - chi_hat.lam
        acc = acc + mu.values[e] * (-1) ** e
    return acc


def borel_c1(cc: ComplexCocycles) -> dict[str, list[NFElem]]:
    """Phi(c1)(X) on Hhat, N1 = Wtilde/2, N2 = -H/2 (mod k), as functionals on V(k-2)."""
    chat = cc.chi.hat()
    basis = vpair_basis(cc.k_id, cc.k_c)
    scale = {"Hhat": ("Hhat", Fraction(1)), "N1": ("Wtilde", Fraction(1, 2)), "N2": ("H", Fraction(-1, 2))}
    out = {}
    for b, (g, s) in scale.items():
        phi = cc.c1(g)
        out[b] = [_eval_identity(phi(mu), chat) * s for mu in basis]
    return out


def borel_c2(cc: ComplexCocycles) -> dict[tuple[str, str], list[NFElem]]:
    chat = cc.chi.hat()
    basis = vpair_basis(cc.k_id, cc.k_c)
    lift = {"Hhat": ("Hhat", Fraction(1)), "N1": ("Wtilde", Fraction(1, 2)), "N2": ("H", Fraction(-1, 2))}
    out = {}
    for x, y in (("N1", "N2"), ("N1", "Hhat"), ("N2", "Hhat")):
        gx, sx = lift[x]
        gy, sy = lift[y]
        phi = cc.c2(gx, gy)
        out[(x, y)] = [_eval_identity(phi(mu), chat) * (sx * sy) for mu in basis]
    return out


def contract_hhat_star(omega1: dict[str, list[NFElem]]) -> dict[tuple[str, str], list[NFElem]]:
    """(Hhat^* omega)(x1, x2) = <Hhat^*, x1> omega(x2) - <Hhat^*, x2> omega(x1)."""
    pair = {"Hhat": 1, "N1": 0, "N2": 0}
    out = {}
    for x, y in (("N1", "N2"), ("N1", "Hhat"), ("N2", "Hhat")):
        out[(x, y)] = [a * pair[x] - b * pair[y] for a, b in zip(omega1[y], omega1[x])]
    return out


def _borel_matrices(cc: ComplexCocycles):
    """Action of Hhat, N1, N2 on Hom(V(k-2), C_chi_hat) and of kappa_alpha, alpha=(3+4i)/5."""
    chat = cc.chi.hat()
    basis = vpair_basis(cc.k_id, cc.k_c)
    dim = len(basis)
    dchi = {"Hhat": 2 * chat.N, "N1": 0, "N2": 0}

    def lie_matrix(name):
        X = lie_element(name, K8)
        # (X w)(mu) = dchi(X) w(mu) - w(X mu); w is a row vector over the basis
        cols = [mu.lie(X).flat() for mu in basis]  # X e_c expanded in the basis
        return [[(K8(dchi[name]) if r == c else K8.zero()) - cols[c][r] for r in range(dim)] for c in range(dim)]

    i = zeta8_i(K8)
    alpha = (K8(3) + 4 * i) / 5
    ka = mat2(K8, alpha, 0, 0, conj8(alpha))
    kai = mat2_inv(ka)
    chi_val = (alpha * alpha) ** chat.lam
    cols = [mu.act(kai).flat() for mu in basis]
    # (k w)(mu) = chi(k) w(k^-1 mu)
    kmat = [[cols[c][r] * chi_val for r in range(dim)] for c in range(dim)]
    return {n: lie_matrix(n) for n in BOREL}, kmat, ka, dim


def _apply(M, w):
    # M[c][r]: new w at c = sum_r M[c][r] w[r]
    return [sum((M[c][r] * w[r] for r in range(len(w)) if w[r]), K8.zero()) for c in range(len(M))]


def _adjoint_borel(ka: Mat2) -> dict[str, dict[str, NFElem]]:
    """Ad(kappa_alpha) on span(Hhat, N1, N2) modulo k_B."""
    names = {n: lie_element(n, K8) for n in BOREL}
    kai = mat2_inv(ka)
    from .repcore import mat2_mul

    out = {}
    for n, X in names.items():
        Y = mat2_mul(mat2_mul(ka, X), kai)
        # Y = h Hhat + (upper-right entry) -> N1, N2 components via real/imaginary parts
        h = Y[0][0]
        ur = Y[0][1]
        re = (ur + conj8(ur)) / 2
        im = (ur - conj8(ur)) / (2 * zeta8_i(K8))
        out[n] = {"Hhat": h, "N1": re, "N2": im}
    return out


def pv_check(k_id: int, k_c: int, c2_scale: Fraction = Fraction(1)) -> dict:
    """Compare Hhat^* c1 with i c2 in the Borel model and solve d psi = difference."""
    cc = ComplexCocycles(k_id, k_c, c2_scale)
    w1 = borel_c1(cc)
    contracted = contract_hhat_star(w1)
    w2 = borel_c2(cc)
    i = zeta8_i(K8)
    diff = {key: [a - i * b for a, b in zip(contracted[key], w2[key])] for key in contracted}
    lie, kmat, ka, dim = _borel_matrices(cc)
    ad = _adjoint_borel(ka)
    brackets = {("N1", "N2"): {}, ("N1", "Hhat"): {"N1": -2}, ("N2", "Hhat"): {"N2": -2}}
    idx = {n: t for t, n in enumerate(BOREL)}
    nunk = 3 * dim

    def unk(name, r):
        return idx[name] * dim + r

    rows, rhs = [], []
    # d psi (x, y) = x psi(y) - y psi(x) - psi([x, y])
    for (x, y), target in diff.items():
        for c in range(dim):
            row = [K8.zero()] * nunk
            for r in range(dim):
                row[unk(y, r)] = row[unk(y, r)] + lie[x][c][r]
                row[unk(x, r)] = row[unk(x, r)] - lie[y][c][r]
            for z, coef in brackets[(x, y)].items():
                row[unk(z, c)] = row[unk(z, c)] - coef
            rows.append(row)
            rhs.append(target[c])
    # K_B-equivariance: kappa psi(X) = psi(Ad(kappa) X)
    for x in BOREL:
        for c in range(dim):
            row = [K8.zero()] * nunk
            for r in range(dim):
                row[unk(x, r)] = row[unk(x, r)] + kmat[c][r]
            for z, coef in ad[x].items():
                if coef:
                    row[unk(z, c)] = row[unk(z, c)] - coef
            rows.append(row)
            rhs.append(K8.zero())
    sol = solve_linear(rows, rhs)
    if sol is None:
        raise PVCheckFailed(f"Hhat^* c1 - i c2 is not a coboundary for k=({k_id},{k_c})")
    return {
        "difference_zero": all(x.is_zero() for v in diff.values() for x in v),
        "c1_borel": w1,
        "c2_borel": w2,
        "psi": sol,
    }


# ---------------------------------------------------------------------------
# Triple cup product
# ---------------------------------------------------------------------------

Tensor = dict  # ((n1, j1), (n2, j2)) -> NFElem


def _tensor_add(a: Tensor, b: Tensor, sb=1) -> Tensor:
    out = dict(a)
    for key, c in b.items():
        out[key] = out.get(key, K8.zero()) + c * sb
    return {key: c for key, c in out.items() if not c.is_zero()}


def upsilon_pair(k_id: int, k_c: int) -> list[tuple[NFElem, VPair, VPair]]:
    """The invariant tensor |x1 y1; x2 y2|^(k-2) in each slot, as a list of simple tensors."""
    U1 = upsilon(k_id, K8)
    U2 = upsilon(k_c, K8)
    w1, w2 = k_id - 2, k_c - 2
    out = []
    for (a1, a2), c1 in U1.entries.items():
        for (b1, b2), c2 in U2.entries.items():
            out.append((c1 * c2, VPair.basis(w1, w2, a1, b1), VPair.basis(w1, w2, a2, b2)))
    return out


def pair_through(phi1: HomVD, phi2: HomVD, k_id: int, k_c: int) -> Tensor:
    out: Tensor = {}
    for c, m1, m2 in upsilon_pair(k_id, k_c):
        v1, v2 = phi1(m1), phi2(m2)
        for n1, mu1 in v1.comps.items():
            for j1, x in enumerate(mu1.values):
                if not x:
                    continue
                for n2, mu2 in v2.comps.items():
                    for j2, y in enumerate(mu2.values):
                        if y:
                            key = ((n1, j1), (n2, j2))
                            out[key] = out.get(key, K8.zero()) + c * x * y
    return {key: v for key, v in out.items() if not v.is_zero()}


def cup3_by_cocycles(cc: ComplexCocycles) -> Tensor:
    k_id, k_c = cc.k_id, cc.k_c
    t1 = pair_through(cc.c1("Hhat"), cc.c2("Wtilde", "H"), k_id, k_c)
    t2 = pair_through(cc.c1("Wtilde"), cc.c2("Hhat", "H"), k_id, k_c)
    t3 = pair_through(cc.c1("H"), cc.c2("Hhat", "Wtilde"), k_id, k_c)
    return _tensor_add(_tensor_add(t1, t2, -1), t3)


def _delta_s_tensor(cc: ComplexCocycles) -> Tensor:
    half = Fraction(1, 2)
    ds = lambda mu: cc.c1("Hhat")(mu).scale(half)
    return pair_through(ds, ds, cc.k_id, cc.k_c)


@lru_cache(maxsize=None)
def _symbolic_dual_matrix(w: int) -> tuple[tuple[MultiPoly, ...], ...]:
    """A[l][i]: (kappa(a,b) e_l)(X^i Y^(w-i)), a polynomial on the sphere."""
    a, b, ac, bc = (sphere_var(v) for v in SU2_VARS)
    zero = sphere_zero()
    # kappa^-1 P (X, Y) = P(ac X + bc Y, -b X + a Y)
    lin1 = [bc, ac]  # index = power of X
    lin2 = [a, -b]

    def mul(p, q):
        out = [zero] * (len(p) + len(q) - 1)
        for s, u in enumerate(p):
            for t, v in enumerate(q):
                out[s + t] = out[s + t] + u * v
        return out

    def power(lin, e):
        res = [zero + 1]
        for _ in range(e):
            res = mul(res, lin)
        return res

    cols = []
    for i in range(w + 1):
        cols.append(mul(power(lin1, i), power(lin2, w - i)))  # image of X^i Y^(w-i)
    return tuple(tuple(cols[i][l] for i in range(w + 1)) for l in range(w + 1))


def su2_average(t: Tensor) -> Tensor:
    """Exact Haar average of kappa acting diagonally on D (x) D, through SU(2) moments."""
    out: Tensor = {}
    cache: dict = {}
    for ((n1, j1), (n2, j2)), c in t.items():
        A1 = _symbolic_dual_matrix(2 * n1)
        A2 = _symbolic_dual_matrix(2 * n2)
        for i1 in range(2 * n1 + 1):
            for i2 in range(2 * n2 + 1):
                key = (n1, j1, i1, n2, j2, i2)
                if key not in cache:
                    cache[key] = integrate(A1[j1][i1] * A2[j2][i2])
                w = cache[key]
                if w:
                    k2 = ((n1, i1), (n2, i2))
                    out[k2] = out.get(k2, K8.zero()) + c * w
    return {key: v for key, v in out.items() if not v.is_zero()}


def act_tensor(t: Tensor, g: Mat2) -> Tensor:
    out: Tensor = {}
    for ((n1, j1), (n2, j2)), c in t.items():
        e1 = dual_act(g, VkDual.from_values(K8, [int(s == j1) for s in range(2 * n1 + 1)]))
        e2 = dual_act(g, VkDual.from_values(K8, [int(s == j2) for s in range(2 * n2 + 1)]))
        for i1, x in enumerate(e1.values):
            if x:
                for i2, y in enumerate(e2.values):
                    if y:
                        key = ((n1, i1), (n2, i2))
                        out[key] = out.get(key, K8.zero()) + c * x * y
    return {key: v for key, v in out.items() if not v.is_zero()}


def tensors_equal(a: Tensor, b: Tensor) -> bool:
    return not _tensor_add(a, b, -1)


def cup3_complex(k_id: int = 2, k_c: int = 2) -> dict:
    """Cup route against 12 times the SU(2) average of (delta s (x) delta s)(Upsilon)."""
    if not psi_intertwine_check(k_id, k_c, CharC.of_weight(k_id, k_c).N + 1):
        raise FormulaMismatch("psi does not intertwine Hhat")
    cc = ComplexCocycles(k_id, k_c)
    cup = cup3_by_cocycles(cc)
    X = _delta_s_tensor(cc)
    avg = su2_average(X)
    route_avg = {key: v * 12 for key, v in avg.items()}
    reduced = _tensor_add(_tensor_add(X, act_tensor(X, kappa1())), act_tensor(X, kappa2()))
    route_reduced = {key: v * 4 for key, v in reduced.items()}
    if not tensors_equal(cup, route_avg):
        raise FormulaMismatch(f"triple cup routes disagree for k=({k_id},{k_c})")
    return {
        "cup": cup,
        "average_route": route_avg,
        "three_term_route": route_reduced,
        "three_term_agrees": tensors_equal(cup, route_reduced),
    }
