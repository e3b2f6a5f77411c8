"""Local arithmetic over Q_p: Gauss sums, local L-factors and Kirillov newvectors.

Characters take values in complex doubles.  The additive character is
``psi(a) = exp(-2 pi i [a]_p)`` with ``[a]_p`` the p-adic fractional part, and
units are averaged with total mass one.
"""
from __future__ import annotations

import cmath
import math
import random
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from sympy.ntheory import isprime, primitive_root


class PoleAtS(ValueError):
    pass


class BadIndex(ValueError):
    pass


class TruncationTooSmall(ValueError):
    pass


class BadConductorShift(UserWarning):
    """The y exponent does not cancel the conductor; the sum is still computed."""


class BadCharacter(ValueError):
    pass


def _root_of_unity(num: int, den: int) -> complex:
    return cmath.exp(2j * math.pi * num / den)


# ---------------------------------------------------------------------------
# Characters of Q_p^x
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _unit_generators(p: int, n: int) -> tuple[int, ...]:
    if n == 0 or (p == 2 and n == 1):
        return ()
    if p == 2:
        return (-1 % 4,) if n == 2 else (2 ** n - 1, 5)
    return (primitive_root(p ** n),)


@lru_cache(maxsize=None)
def _log_table(p: int, n: int) -> dict[int, tuple[int, ...]]:
    """u mod p^n -> exponents on the fixed generators."""
    m = p ** n
    gens = _unit_generators(p, n)
    table: dict[int, tuple[int, ...]] = {}
    if not gens:
        return {u: () for u in range(m) if u % p}
    if len(gens) == 1:
        g = gens[0]
        u = 1
        for e in range(m - m // p):
            table[u] = (e,)
            u = u * g % m
        return table
    # p = 2, n >= 3: u = (-1)^s 5^e
    u = 1
    for e in range(2 ** (n - 2)):
        table[u] = (0, e)
        table[(-u) % m] = (1, e)
        u = u * 5 % m
    return table


def _gen_orders(p: int, n: int) -> tuple[int, ...]:
    if p == 2:
        return () if n <= 1 else ((2,) if n == 2 else (2, 2 ** (n - 2)))
    return () if n == 0 else (p ** n - p ** (n - 1),)


@dataclass(frozen=True)
class LocalChar:
    """Character of Q_p^x with conductor exponent ``cond_exp``.

    ``exps`` gives the values on the unit generators as roots of unity:
    generator ``t`` maps to exp(2 pi i exps[t] / order_t).  ``value_on_p`` is the
    image of the uniformizer p."""

    p: int
    cond_exp: int
    exps: tuple[int, ...] = ()
    value_on_p: complex = 1.0

    def __post_init__(self) -> None:
        if not isprime(self.p):
            raise BadCharacter(f"{self.p} is not prime")
        if len(self.exps) != len(_gen_orders(self.p, self.cond_exp)):
            raise BadCharacter("wrong number of generator exponents")
        if not self.is_primitive():
            raise BadCharacter("character is not primitive of the stated conductor")

    @property
    def unit_values(self) -> tuple[complex, ...]:
        return tuple(_root_of_unity(e, o) for e, o in zip(self.exps, _gen_orders(self.p, self.cond_exp)))

    def unit(self, u: int) -> complex:
        """chi(u) for an integer u prime to p."""
        if u % self.p == 0:
            raise BadCharacter("not a unit")
        if self.cond_exp == 0:
            return 1.0
        m = self.p ** self.cond_exp
        logs = _log_table(self.p, self.cond_exp)[u % m]
        phase = sum(_phase(e * l, o) for e, l, o in zip(self.exps, logs, _gen_orders(self.p, self.cond_exp)))
        return cmath.exp(2j * math.pi * phase)

    def __call__(self, x_val: int, u: int = 1) -> complex:
        """chi(p^x_val * u)."""
        return self.value_on_p ** x_val * self.unit(u)

    def inverse(self) -> "LocalChar":
        orders = _gen_orders(self.p, self.cond_exp)
        return LocalChar(self.p, self.cond_exp, tuple((-e) % o for e, o in zip(self.exps, orders)), 1 / self.value_on_p)

    def is_primitive(self) -> bool:
        n, p = self.cond_exp, self.p
        if n == 0:
            return True
        if p == 2 and n == 1:
            return False
        m = p ** n
        # nontrivial on 1 + p^(n-1) Z_p (for n = 1: on all units)
        sub = [1 + p ** (n - 1) * t for t in range(p)] if n >= 2 else list(range(1, p))
        if p == 2 and n >= 2:
            sub = [1 + 2 ** (n - 1) * t for t in range(2)] if n >= 3 else [1, 3]
        return any(abs(self.unit(u % m) - 1) > 1e-9 for u in sub)

    def parity(self) -> complex:
        """chi(-1)."""
        return self.unit(-1 % max(self.p ** max(self.cond_exp, 1), 3))


def _phase(num: int, den: int) -> float:
    return (num % den) / den


def trivial_char(p: int, value_on_p: complex = 1.0) -> LocalChar:
    return LocalChar(p, 0, (), value_on_p)


def random_character(p: int, cond_exp: int, rng: random.Random, value_on_p: Optional[complex] = None) -> LocalChar:
    """A uniformly chosen primitive character of the given conductor."""
    orders = _gen_orders(p, cond_exp)
    if value_on_p is None:
        value_on_p = _root_of_unity(rng.randrange(12), 12)
    for _ in range(1000):
        exps = tuple(rng.randrange(o) for o in orders)
        try:
            return LocalChar(p, cond_exp, exps, value_on_p)
        except BadCharacter:
            continue
    raise BadCharacter(f"no primitive character mod {p}^{cond_exp}")


def quadratic_char(p: int) -> LocalChar:
    """The Legendre symbol mod an odd prime p, trivial on p."""
    if p == 2:
        raise BadCharacter("use an explicit 2-adic character")
    return LocalChar(p, 1, ((p - 1) // 2,), 1.0)


# ---------------------------------------------------------------------------
# zeta factors, Gauss sums
# ---------------------------------------------------------------------------


def zeta_local(kind: str, s: float, q: Optional[int] = None) -> complex:
    """(1 - q^-s)^-1, pi^(-s/2) Gamma(s/2) or 2 (2 pi)^-s Gamma(s)."""
    if kind == "finite":
        if q is None:
            raise ValueError("finite zeta needs q")
        den = 1 - q ** (-s)
        if abs(den) < 1e-15:
            raise PoleAtS(f"q^-s = 1 at s={s}")
        return complex(1 / den)
    if kind == "real":
        if s <= 0 and float(s / 2).is_integer():
            raise PoleAtS(f"Gamma(s/2) pole at s={s}")
        return complex(math.pi ** (-s / 2) * math.gamma(s / 2))
    if kind == "complex":
        if s <= 0 and float(s).is_integer():
            raise PoleAtS(f"Gamma(s) pole at s={s}")
        return complex(2 * (2 * math.pi) ** (-s) * math.gamma(s))
    raise ValueError(f"unknown place kind {kind!r}")


def _psi_unit(p: int, y_exp: int, u: int) -> complex:
    """psi(p^y_exp * u) = exp(-2 pi i [p^y_exp u]_p) for an integer u."""
    if y_exp >= 0:
        return 1.0
    m = p ** (-y_exp)
    return cmath.exp(-2j * math.pi * (u % m) / m)


def shell_average(chi: LocalChar, y_exp: int) -> complex:
    """(1/#units) sum over units u mod p^M of chi(u) psi(p^y_exp u)."""
    p = chi.p
    M = max(chi.cond_exp, -y_exp, 1)
    m = p ** M
    acc = 0j
    count = 0
    for u in range(1, m):
        if u % p:
            acc += chi.unit(u) * _psi_unit(p, y_exp, u)
            count += 1
    return acc / count


def gauss_sum(chi: LocalChar, y_exp: Optional[int] = None, strict: bool = False) -> complex:
    """g(chi, y) = average over units of chi^-1(u) psi(y u), with v(y) = y_exp.

    The default y_exp cancels the conductor.  Other shifts are computed but
    flagged with :class:`BadConductorShift`."""
    if y_exp is None:
        y_exp = -chi.cond_exp
    if y_exp != -chi.cond_exp:
        msg = f"y_exp={y_exp} does not match conductor exponent {chi.cond_exp}"
        if strict:
            raise BadConductorShift(msg)
        warnings.warn(msg, BadConductorShift, stacklevel=2)
    return shell_average(chi.inverse(), y_exp)


def gauss_product_expected(chi: LocalChar) -> complex:
    """|c(chi)| zeta(1)^2 chi(-1) for ramified chi, 1 otherwise."""
    if chi.cond_exp == 0:
        return 1.0
    p = chi.p
    return p ** (-chi.cond_exp) * zeta_local("finite", 1, p) ** 2 * chi.parity()


# ---------------------------------------------------------------------------
# Newvectors and local integrals
# ---------------------------------------------------------------------------

KINDS = ("spherical", "steinberg", "supercuspidal")


@dataclass(frozen=True)
class SatakeData:
    kind: str
    p: int
    alpha: complex = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")


def kirillov_newvector(data: SatakeData, y_valuation: int) -> complex:
    """phi^0(y) for y of the given valuation (delta = 1)."""
    v = y_valuation
    p, a = data.p, data.alpha
    if data.kind == "supercuspidal":
        return 1.0 if v == 0 else 0.0
    if v < 0:
        return 0.0
    if data.kind == "spherical":
        return p ** (-v / 2) * sum(a ** (k - (v - k)) for k in range(v + 1))
    return p ** (-v / 2) * a ** v


def local_L(data: SatakeData, twist: Optional[LocalChar], s: float) -> complex:
    if twist is not None and twist.cond_exp > 0:
        return 1.0
    if data.kind == "supercuspidal":
        return 1.0
    r = 1.0 if twist is None else twist.value_on_p
    q = data.p ** (-s)
    if data.kind == "spherical":
        d = (1 - r * data.alpha * q) * (1 - r / data.alpha * q)
    else:
        d = 1 - r * data.alpha * q
    if abs(d) < 1e-15:
        raise PoleAtS(f"local L-factor has a pole at s={s}")
    return 1 / d


def twisted_local_integral(data: SatakeData, rho: LocalChar, truncation: int, tol: float = 1e-10) -> complex:
    """sum_{n<T} rho(p)^n phi^0(p^n) I_n with I_n the unit average of rho(x) psi(y p^n x)."""
    if truncation < 1:
        raise TruncationTooSmall("truncation must be at least 1")
    p = data.p
    if data.kind != "supercuspidal":
        a = abs(data.alpha)
        ratio = max(a, 1 / a) * p ** -0.5
        if ratio >= 1:
            raise TruncationTooSmall("series does not converge for this Satake parameter")
        tail = (truncation + 1) * ratio ** truncation / (1 - ratio) ** 2
        if tail > tol:
            raise TruncationTooSmall(f"tail bound {tail:.2e} exceeds {tol:.0e}")
    y_exp = -rho.cond_exp
    total = 0j
    for n in range(truncation):
        w = kirillov_newvector(data, n)
        if w == 0:
            continue
        total += rho.value_on_p ** n * w * shell_average(rho, y_exp + n)
    return total


def twisted_local_expected(data: SatakeData, rho: LocalChar) -> complex:
    """rho(delta)^-1 g(rho^-1, y) L(1/2, Pi, rho) with delta = 1."""
    return gauss_sum(rho.inverse()) * local_L(data, rho, 0.5)


# ---------------------------------------------------------------------------
# Archimedean constants
# ---------------------------------------------------------------------------


def constants_CK(
    k: Sequence[int],
    m: Sequence[int],
    r1B: int,
    r2: int,
    r1_B_complement: int,
    outside_B: Sequence[int] = (),
) -> tuple[complex, complex]:
    """C(k, m) and K.  ``outside_B`` lists indices of k at places outside Sigma_B."""
    if len(k) != len(m):
        raise BadIndex("k and m differ in length")
    for kv, mv in zip(k, m):
        if abs(mv) > (kv - 2) // 2:
            raise BadIndex(f"|m|={abs(mv)} exceeds (k-2)/2 for k={kv}")
    sign = (-1) ** sum((k[i] - 2) // 2 for i in outside_B)
    c = sign * 4 ** (r1B + 2 * r2) * math.pi ** (-r1_B_complement)
    for kv, mv in zip(k, m):
        c *= math.gamma(kv / 2 - mv) * math.gamma(kv / 2 + mv) / ((-1) ** mv * (2 * math.pi) ** kv)
    K = 3 ** r2 * (2j) ** r1B / ((2 * math.pi ** 2) ** (r1_B_complement + r2) * math.pi ** r1B)
    return complex(c), complex(K)
