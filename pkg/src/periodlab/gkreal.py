"""Real-place principal series B(chi_k), its sections and the cocycles c1 and c2.

A vector ``sum c_n f_n`` with ``f_n = y^(k/2) e^(2 i n theta)`` is stored as
``{n: c_n}`` over Q(zeta8).  The finite-dimensional quotient is V(k-2), which
is written in the basis P_m^dual with P_m = (Y+iX)^m (Y-iX)^(k-2-m).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .exactalg import NFElem, QQzeta8, zeta8_i, zeta8_sqrt2
from .repcore import (
    DualTensor2,
    Mat2,
    VkDual,
    dual_act,
    from_pm_coords,
    lie_act_findim,
    lie_element,
    mat2,
    mu_basis,
    to_pm_coords,
    upsilon,
)

K8 = QQzeta8
GENERATORS = ("Hhat", "Wtilde", "W")


class BadGenerator(ValueError):
    pass


class FormulaMismatch(AssertionError):
    pass


def _i() -> NFElem:
    return zeta8_i(K8)


@dataclass(frozen=True)
class GKVecR:
    weight: int
    coeffs: Mapping[int, NFElem]

    @classmethod
    def build(cls, k: int, coeffs: Mapping[int, object]) -> "GKVecR":
        out = {}
        for n, c in coeffs.items():
            c = K8(c)
            if not c.is_zero():
                out[n] = c
        return cls(k, out)

    @classmethod
    def basis(cls, k: int, n: int) -> "GKVecR":
        return cls.build(k, {n: 1})

    def __add__(self, o: "GKVecR") -> "GKVecR":
        out = dict(self.coeffs)
        for n, c in o.coeffs.items():
            out[n] = out[n] + c if n in out else c
        return GKVecR.build(self.weight, out)

    def __sub__(self, o: "GKVecR") -> "GKVecR":
        return self + o.scale(-1)

    def scale(self, c) -> "GKVecR":
        return GKVecR.build(self.weight, {n: v * c for n, v in self.coeffs.items()})

    def coeff(self, n: int) -> NFElem:
        return self.coeffs.get(n, K8.zero())

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, o) -> bool:
        return isinstance(o, GKVecR) and (self - o).is_zero()

    def support(self) -> list[int]:
        return sorted(self.coeffs)


def lie_act_principal(x: str, v: GKVecR) -> GKVecR:
    """Action of Hhat, Wtilde or W on sum c_n f_n."""
    if x not in GENERATORS:
        raise BadGenerator(f"unsupported generator {x!r}")
    A = Fraction(v.weight, 2)
    i = _i()
    out: dict[int, NFElem] = {}

    def add(n, c):
        out[n] = out[n] + c if n in out else c

    for n, c in v.coeffs.items():
        if x == "W":
            add(n, c * i * (2 * n))
        elif x == "Hhat":
            add(n + 1, c * (A + n))
            add(n - 1, c * (A - n))
        else:
            add(n + 1, -c * i * (A + n))
            add(n - 1, c * i * (A - n))
    return GKVecR.build(v.weight, out)


# Coordinate model: y^(k/2) g(z) with z = e^(2 i theta); the operators below come
# from the first-order differential operators in (x, y, theta) coordinates.


def lie_act_oracle(x: str, v: GKVecR) -> GKVecR:
    """Apply W = d/dtheta, Hhat = 2y cos(2t) d/dy + sin(2t) d/dtheta,
    Wtilde = 2y sin(2t) d/dy - cos(2t) d/dtheta to y^(k/2) g(z)."""
    k = v.weight
    i = _i()
    g = dict(v.coeffs)
    # d/dtheta acts on z^n by 2 i n; y d/dy acts on y^(k/2) by k/2
    dtheta = {n: c * i * (2 * n) for n, c in g.items()}
    ydy = {n: c * Fraction(k, 2) for n, c in g.items()}
    half = Fraction(1, 2)
    cos2 = {1: K8(half), -1: K8(half)}
    sin2 = {1: -i * half, -1: i * half}  # (z - 1/z) / (2i)

    def mul(a, b):
        out: dict[int, NFElem] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                out[e1 + e2] = out.get(e1 + e2, K8.zero()) + c1 * c2
        return out

    def add(a, b, sb=1):
        out = dict(a)
        for e, c in b.items():
            out[e] = out.get(e, K8.zero()) + c * sb
        return out

    if x == "W":
        res = dtheta
    elif x == "Hhat":
        res = add(mul(cos2, {n: c * 2 for n, c in ydy.items()}), mul(sin2, dtheta))
    elif x == "Wtilde":
        res = add(mul(sin2, {n: c * 2 for n, c in ydy.items()}), mul(cos2, dtheta), -1)
    else:
        raise BadGenerator(f"unsupported generator {x!r}")
    return GKVecR.build(k, res)


def rotate(v: GKVecR, e2itheta: NFElem) -> GKVecR:
    """Right translation by kappa(theta): f_n -> e^(2 i n theta) f_n."""
    return GKVecR.build(v.weight, {n: c * e2itheta ** n for n, c in v.coeffs.items()})


def weyl_act(v: GKVecR, sign: int) -> GKVecR:
    """The O(2) element Hhat on B(chi_k)^sign: f_n -> sign (-1)^((k-2)/2) f_-n."""
    h = (v.weight - 2) // 2
    return GKVecR.build(v.weight, {-n: c * (sign * (-1) ** h) for n, c in v.coeffs.items()})


def iota_twist(v: GKVecR, sign: int) -> GKVecR:
    """f_n -> sign^((1 - sgn n)/2) f_n, the embedding of D(k) into B(chi_k)^sign."""
    if sign == 1:
        return v
    return GKVecR.build(v.weight, {n: (-c if n < 0 else c) for n, c in v.coeffs.items()})


def rho_real(v: GKVecR, sign: int = 1) -> VkDual:
    """rho(f_n) = P_(n+h)^dual for |n| <= h, and 0 otherwise."""
    k = v.weight
    h = (k - 2) // 2
    coords = [K8.zero()] * (k - 1)
    for n, c in v.coeffs.items():
        if abs(n) <= h:
            coords[n + h] = coords[n + h] + c
    return from_pm_coords(coords, K8)


def section_real(mu: VkDual, sign: int = 1) -> GKVecR:
    """The K-equivariant section: P_m^dual -> f_(m-h)."""
    w = mu.weight
    h = w // 2
    coords = to_pm_coords(mu)
    return GKVecR.build(w + 2, {m - h: c for m, c in enumerate(coords)})


def in_discrete_series(v: GKVecR) -> bool:
    return all(abs(n) >= v.weight // 2 for n in v.coeffs)


# ---------------------------------------------------------------------------
# Cocycles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HomVDR:
    """A map V(k-2) -> D(k) given by its values on mu_m, m = -h..h."""

    weight: int
    sign: int
    values: Mapping[int, GKVecR]

    def __call__(self, mu: VkDual) -> GKVecR:
        """Evaluate on an arbitrary functional by expanding in the mu_m basis."""
        k = self.weight
        h = (k - 2) // 2
        out = GKVecR.build(k, {})
        # mu_m has a single nonzero value at index h+m
        for m in range(-h, h + 1):
            base = mu_basis(k, m, K8).values[h + m]
            c = mu.values[h + m] / base
            if not c.is_zero():
                out = out + self.values[m].scale(c)
        return out

    def perturbed(self, m: int, n: int, delta=1) -> "HomVDR":
        vals = dict(self.values)
        vals[m] = vals[m] + GKVecR.build(self.weight, {n: delta})
        return HomVDR(self.weight, self.sign, vals)


def c1_first_principles(k: int, sign: int, x: str = "Hhat") -> HomVDR:
    """c1(X)(mu) = X(s mu) - s(X mu), written in D(k) coordinates."""
    h = (k - 2) // 2
    X = lie_element(x, K8)
    vals = {}
    for m in range(-h, h + 1):
        mu = mu_basis(k, m, K8)
        val = lie_act_principal(x, section_real(mu, sign)) - section_real(lie_act_findim(X, mu), sign)
        vals[m] = iota_twist(val, sign)
    return HomVDR(k, sign, vals)


def c1_closed_form(k: int, sign: int) -> HomVDR:
    """(k-1)((-i)^(h+m) f_(k/2) + sign i^(h+m) f_(-k/2))."""
    h = (k - 2) // 2
    i = _i()
    vals = {}
    for m in range(-h, h + 1):
        vals[m] = GKVecR.build(k, {k // 2: (-i) ** (h + m) * (k - 1), -(k // 2): i ** (h + m) * (sign * (k - 1))})
    return HomVDR(k, sign, vals)


def cocycle_c1_real(k: int, sign: int) -> HomVDR:
    """c1(Hhat) from first principles, checked against the closed form."""
    if k % 2 or k < 2:
        raise ValueError("k must be even and >= 2")
    first = c1_first_principles(k, sign)
    closed = c1_closed_form(k, sign)
    for m in first.values:
        if first.values[m] != closed.values[m]:
            raise FormulaMismatch(f"c1 mismatch at k={k}, sign={sign}, m={m}")
    return first


def kappa_matrix(cos, sin) -> Mat2:
    return mat2(K8, cos, sin, -sin, cos)


def kappa1() -> Mat2:
    r = zeta8_sqrt2(K8).inverse()
    return kappa_matrix(r, r)


def c_wtilde_by_equivariance(c: HomVDR) -> HomVDR:
    """c(Wtilde)(mu) = kappa1^-1 c(Hhat)(kappa1 mu), kappa1 = kappa(pi/4)."""
    k = c.weight
    h = (k - 2) // 2
    k1 = kappa1()
    rot_inv = K8(1) / _i()  # e^(2 i (-pi/4)) = -i
    vals = {}
    for m in range(-h, h + 1):
        mu = dual_act(k1, mu_basis(k, m, K8))
        # kappa acts on D(k) diagonally, so it commutes with the iota twist
        vals[m] = rotate(c(mu), rot_inv)
    return HomVDR(k, c.sign, vals)


def cocycle_check_real(c: HomVDR) -> bool:
    """Compare both routes to c(Wtilde) and check d c (Hhat, Wtilde) = 0."""
    k = c.weight
    h = (k - 2) // 2
    sign = c.sign
    via_k = c_wtilde_by_equivariance(c)
    direct = c1_first_principles(k, sign, "Wtilde")
    if any(via_k.values[m] != direct.values[m] for m in range(-h, h + 1)):
        return False
    Hh = lie_element("Hhat", K8)
    Wt = lie_element("Wtilde", K8)
    for m in range(-h, h + 1):
        mu = mu_basis(k, m, K8)
        # (X phi)(Y)(mu) = X(phi(Y)(mu)) - phi(Y)(X mu); the bracket [Hhat, Wtilde] = 2W lies in k
        left = iota_twist(lie_act_principal("Hhat", iota_twist(via_k(mu), sign)), sign) - via_k(lie_act_findim(Hh, mu))
        right = iota_twist(lie_act_principal("Wtilde", iota_twist(c(mu), sign)), sign) - c(lie_act_findim(Wt, mu))
        if left != right:
            return False
        if not (in_discrete_series(c.values[m]) and in_discrete_series(via_k.values[m])):
            return False
    return True


# ---------------------------------------------------------------------------
# Cup product
# ---------------------------------------------------------------------------

Tensor = dict  # (n1, n2) -> NFElem


def _tensor_add(a: Tensor, b: Tensor, sb=1) -> Tensor:
    out = dict(a)
    for key, c in b.items():
        out[key] = out.get(key, K8.zero()) + c * sb
    return {key: c for key, c in out.items() if not c.is_zero()}


def pair_through(phi1: Callable[[VkDual], GKVecR], phi2: Callable[[VkDual], GKVecR], U: DualTensor2) -> Tensor:
    """phi1 phi2 (Upsilon) = sum T[j1, j2] phi1(e_j1) (x) phi2(e_j2)."""
    w = U.weight
    basis = [VkDual.from_values(K8, [int(t == j) for t in range(w + 1)]) for j in range(w + 1)]
    out: Tensor = {}
    for (j1, j2), c in U.entries.items():
        a = phi1(basis[j1])
        b = phi2(basis[j2])
        for n1, c1 in a.coeffs.items():
            for n2, c2 in b.coeffs.items():
                key = (n1, n2)
                out[key] = out.get(key, K8.zero()) + c * c1 * c2
    return {key: c for key, c in out.items() if not c.is_zero()}


def cup_closed_form(k: int) -> Tensor:
    """-(2i)^(k-1) (k-1)^2 (f_(k/2) (x) f_(-k/2) + f_(-k/2) (x) f_(k/2))."""
    c = -((2 * _i()) ** (k - 1)) * (k - 1) ** 2
    return {(k // 2, -(k // 2)): c, (-(k // 2), k // 2): c}


def cup_by_cocycles(k: int) -> Tensor:
    U = upsilon(k, K8)
    cp = cocycle_c1_real(k, 1)
    cm = cocycle_c1_real(k, -1)
    cpw = c_wtilde_by_equivariance(cp)
    cmw = c_wtilde_by_equivariance(cm)
    return _tensor_add(pair_through(cp, cmw, U), pair_through(cpw, cm, U), -1)


def delta_s(k: int, sign: int, ambient: bool = False) -> Callable[[VkDual], GKVecR]:
    """delta s = c1(D) = c1(Hhat)/2; ``ambient`` keeps B(chi_k)^sign coordinates."""
    c = c1_first_principles(k, sign)
    half = Fraction(1, 2)
    if ambient:
        return lambda mu: iota_twist(c(mu), sign).scale(half)
    return lambda mu: c(mu).scale(half)


def weight_zero_average(t: Tensor) -> Tensor:
    """Average over SO(2): keep f_a (x) f_b with a + b = 0."""
    return {key: c for key, c in t.items() if key[0] + key[1] == 0}


def cup_by_k_average(k: int, second: str = "plus") -> Tensor:
    """-8i times the K-average of delta s (x) delta s applied to Upsilon.

    ``second`` selects the second factor: ``plus`` (delta s_+), ``minus_ambient``
    (delta s_- in B(chi_k)^- coordinates) or ``minus_dk`` (delta s_- in D(k)
    coordinates).
    """
    U = upsilon(k, K8)
    first = delta_s(k, 1)
    if second == "plus":
        other = delta_s(k, 1)
    elif second == "minus_ambient":
        other = delta_s(k, -1, ambient=True)
    elif second == "minus_dk":
        other = delta_s(k, -1)
    else:
        raise ValueError(second)
    avg = weight_zero_average(pair_through(first, other, U))
    f = -8 * _i()
    return {key: c * f for key, c in avg.items()}


def tensors_equal(a: Tensor, b: Tensor) -> bool:
    return not _tensor_add(a, b, -1)


def cup2_real(k: int) -> Tensor:
    """Cup value at (Hhat, Wtilde), checked against the closed form and the K-average."""
    cup = cup_by_cocycles(k)
    if not tensors_equal(cup, cup_closed_form(k)):
        raise FormulaMismatch(f"cup product closed form fails at k={k}")
    if not tensors_equal(cup, cup_by_k_average(k, "plus")):
        raise FormulaMismatch(f"K-average route fails at k={k}")
    return cup
