"""Elliptic curves over Q: periods, central L-values of quadratic twists and
rationality detection.

The conductor is supplied by the caller (a small table covers the standard
test curves).  Numeric work is in double precision except the period lattice,
which uses mpmath at a configurable precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import mpmath
import numpy as np
from sympy import factorint
from sympy.functions.combinatorial.numbers import kronecker_symbol

from .exactalg import rationalize


class BadModel(ValueError):
    pass


class SingularCurve(BadModel):
    pass


class NumericFailure(ArithmeticError):
    pass


class TruncationTooSmall(ValueError):
    pass


class NotCoprime(ValueError):
    pass


class HypothesisViolated(ValueError):
    pass


class SearchExhausted(LookupError):
    pass


class DegenerateTwist(ValueError):
    pass


CONDUCTORS = {
    (0, -1, 1, -10, -20): 11,
    (0, -1, 1, 0, 0): 11,
    (1, 0, 1, 4, -6): 14,
    (1, 1, 1, -10, -10): 15,
    (1, -1, 1, -1, -14): 17,
    (0, 1, 1, -9, -15): 19,
}


@dataclass(frozen=True)
class CurveQ:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: int

    def __post_init__(self) -> None:
        if self.discriminant == 0:
            raise SingularCurve("discriminant is zero")
        if self.conductor < 1:
            raise BadModel("conductor must be positive")

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = a1 * a3 + 2 * a4
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c4(self) -> int:
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self) -> int:
        b2, b4, b6, _ = self.b_invariants
        return -b2 ** 3 + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def is_square_N(self) -> bool:
        r = math.isqrt(self.conductor)
        return r * r == self.conductor

    def scaled(self, u: int) -> "CurveQ":
        """The model with a_i replaced by u^i a_i."""
        a1, a2, a3, a4, a6 = self.ainvs
        return CurveQ(u * a1, u ** 2 * a2, u ** 3 * a3, u ** 4 * a4, u ** 6 * a6, self.conductor)

    def label(self) -> str:
        return ",".join(str(a) for a in self.ainvs)


def parse_curve(text: str, conductor: Optional[int] = None) -> CurveQ:
    """Parse "a1,a2,a3,a4,a6" with an optional ",N=<int>" suffix."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    n_from_text = None
    coeffs = []
    for p in parts:
        if p.upper().startswith("N="):
            n_from_text = int(p[2:])
        else:
            try:
                coeffs.append(int(p))
            except ValueError as exc:
                raise BadModel(f"non-integral coefficient {p!r}") from exc
    if len(coeffs) != 5:
        raise BadModel("expected five Weierstrass coefficients")
    N = conductor or n_from_text or CONDUCTORS.get(tuple(coeffs))
    CurveQ(*coeffs, conductor=N or 1)  # singular models fail before the conductor lookup
    if N is None:
        raise BadModel("conductor unknown; pass it explicitly")
    return CurveQ(*coeffs, conductor=N)


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------


def count_points(E: CurveQ, p: int) -> int:
    """Projective points of the reduction mod p, including a singular point."""
    a1, a2, a3, a4, a6 = (a % p for a in E.ainvs)
    if p == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    n += 1
        return n
    x = np.arange(p, dtype=np.int64)
    disc = ((a1 * x + a3) ** 2 + 4 * (x ** 3 + a2 * x * x + a4 * x + a6)) % p
    squares = np.zeros(p, dtype=np.int64)
    squares[(x * x) % p] = 1
    # y^2 + b y - f = 0 has 1 + (disc/p) solutions
    legendre = np.where(disc == 0, 0, 2 * squares[disc] - 1)
    return int(1 + p + legendre.sum())


def _primes_upto(n: int) -> list[int]:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return [int(i) for i in np.nonzero(sieve)[0]]


def multiplicative_type(E: CurveQ, p: int) -> int:
    """+1 split, -1 nonsplit, from the quadratic character of -c6 mod p (p >= 3)."""
    return int(kronecker_symbol(-E.c6, p))


@lru_cache(maxsize=32)
def _an_cached(ainvs: tuple, N: int, bound: int) -> np.ndarray:
    E = CurveQ(*ainvs, conductor=N)
    an = np.zeros(bound + 1, dtype=np.float64)
    an[1] = 1.0
    for p in _primes_upto(bound):
        ap = p + 1 - count_points(E, p)
        good = N % p != 0
        pk = p
        prev, cur = 1.0, float(ap)
        while pk <= bound:
            # multiply into every n with exact p-power pk
            m = np.arange(1, bound // pk + 1)
            m = m[m % p != 0]
            an[pk * m] = an[m] * cur
            nxt = ap * cur - p * prev if good else ap * cur
            prev, cur = cur, nxt
            pk *= p
    return an


def ap_table(E: CurveQ, bound: int) -> np.ndarray:
    """a_n for 0 <= n <= bound (a_0 = 0).  Computed multiplicatively from a_p."""
    if bound > 10 ** 6:
        raise ValueError("bound exceeds the naive counting budget")
    return _an_cached(E.ainvs, E.conductor, bound).copy()


# ---------------------------------------------------------------------------
# Periods
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodPair:
    omega1: float
    omega2_im: float
    eta1: float
    eta2_im: float
    legendre_residual: float
    lattice_index: int
    basis: tuple[complex, complex] = field(repr=False, default=(0j, 0j))

    @property
    def tau(self) -> complex:
        return self.omega1 / complex(0, self.omega2_im)


def _e2(tau) -> mpmath.mpc:
    q = mpmath.exp(2j * mpmath.pi * tau)
    s = mpmath.mpf(0)
    n = 1
    qn = q
    while True:
        term = n * qn / (1 - qn)
        s += term
        if abs(term) < mpmath.mpf(2) ** (-mpmath.mp.prec - 10):
            break
        n += 1
        qn *= q
        if n > 100000:
            raise NumericFailure("E2 series did not converge")
    return 1 - 24 * s


def _e4(tau) -> mpmath.mpc:
    q = mpmath.exp(2j * mpmath.pi * tau)
    s = mpmath.mpf(0)
    n = 1
    qn = q
    while True:
        term = n ** 3 * qn / (1 - qn)
        s += term
        if abs(term) < mpmath.mpf(2) ** (-mpmath.mp.prec - 10):
            break
        n += 1
        qn *= q
    return 1 + 240 * s


def lattice_basis(E: CurveQ, precision_bits: int = 113) -> tuple[mpmath.mpc, mpmath.mpc]:
    """(w1, w2) with w1 > 0 real and Im(w2/w1) > 0, for the differential dx/(2y + a1 x + a3)."""
    with mpmath.workprec(precision_bits):
        b2, b4, b6, _ = E.b_invariants
        roots = mpmath.polyroots([4, b2, 2 * b4, b6], maxsteps=200, extraprec=precision_bits)
        pi = mpmath.pi
        if E.discriminant > 0:
            e3, e2, e1 = sorted(mpmath.re(r) for r in roots)
            w1 = pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            w2 = 1j * pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3))
        else:
            e1 = min(roots, key=lambda r: abs(mpmath.im(r)))
            e1 = mpmath.re(e1)
            a = 3 * e1 + mpmath.mpf(b2) / 4
            b = mpmath.sqrt(3 * e1 * e1 + mpmath.mpf(b2) / 2 * e1 + mpmath.mpf(b4) / 2)
            w1 = 2 * pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b + a))
            w2 = -w1 / 2 + 1j * pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b - a))
        return mpmath.mpc(w1), mpmath.mpc(w2)


def quasi_periods(w1, w2, precision_bits: int = 113):
    """eta(w1), eta(w2) from the Eisenstein series E2 of each basis orientation."""
    with mpmath.workprec(precision_bits):
        tau = w2 / w1
        g2_1 = mpmath.pi ** 2 / 3 * _e2(tau)
        g2_2 = mpmath.pi ** 2 / 3 * _e2(-1 / tau)
        return g2_1 / w1, g2_2 / w2


def g2_from_lattice(w1, w2, precision_bits: int = 113):
    with mpmath.workprec(precision_bits):
        return 4 * mpmath.pi ** 4 / 3 * _e4(w2 / w1) / w1 ** 4


def periods_agm(E: CurveQ, precision_bits: int = 113) -> PeriodPair:
    """Real period, the imaginary generator of the rectangular sublattice, and
    their quasi-periods.  The Legendre residual is |eta1 W2 - eta(W2) W1 - 2 pi i [L:L']|."""
    w1, w2 = lattice_basis(E, precision_bits)
    with mpmath.workprec(precision_bits):
        eta1, eta2 = quasi_periods(w1, w2, precision_bits)
        if E.discriminant > 0:
            W2, etaW2, index = w2, eta2, 1
        else:
            W2, etaW2, index = 2 * w2 + w1, 2 * eta2 + eta1, 2
        res = abs(eta1 * W2 - etaW2 * w1 - 2j * mpmath.pi * index)
        if mpmath.im(W2) <= 0 or abs(mpmath.re(W2)) > abs(W2) * mpmath.mpf(2) ** (-precision_bits // 2):
            raise NumericFailure("imaginary period is not on the imaginary axis")
        return PeriodPair(
            omega1=float(mpmath.re(w1)),
            omega2_im=float(mpmath.im(W2)),
            eta1=float(mpmath.re(eta1)),
            eta2_im=float(mpmath.im(etaW2)),
            legendre_residual=float(res),
            lattice_index=index,
            basis=(complex(w1), complex(w2)),
        )


# ---------------------------------------------------------------------------
# Twists and L-values
# ---------------------------------------------------------------------------


def is_fundamental(d: int) -> bool:
    if d == 1:
        return True
    if d in (0,):
        return False
    if d % 4 == 1:
        return all(e == 1 for p, e in factorint(abs(d)).items())
    if d % 4 == 0:
        m = d // 4
        if m % 4 not in (2, 3):
            return False
        return all(e == 1 for p, e in factorint(abs(m)).items())
    return False


def fundamental_discriminants(sign: int, limit: int, coprime_to: int = 1) -> list[int]:
    out = []
    for a in range(1, limit + 1):
        d = sign * a
        if d != 1 and is_fundamental(d) and math.gcd(d, coprime_to) == 1:
            out.append(d)
    return out


def twist_character(d: int, n: np.ndarray) -> np.ndarray:
    if d == 1:
        return np.ones_like(n, dtype=np.float64)
    return np.array([kronecker_symbol(d, int(k)) for k in n], dtype=np.float64)


@lru_cache(maxsize=256)
def _chi_cached(d: int, bound: int) -> np.ndarray:
    return twist_character(d, np.arange(bound + 1))


def root_number_twist(w_E: int, d: int, N: int) -> int:
    """sgn(E^d) = w_E sign(d) (d/N)."""
    if math.gcd(d, N) != 1:
        raise NotCoprime(f"gcd({d}, {N}) != 1")
    if d == 1:
        return w_E
    return w_E * (1 if d > 0 else -1) * int(kronecker_symbol(d, N))


@dataclass(frozen=True)
class LValue:
    d: int
    value: float
    root_number: float
    terms: int
    tail_bound: float


def _needed_terms(sqrtN: float, t: float, tol: float) -> int:
    c = 2 * math.pi * t / sqrtN
    # 4 e^{-cT}/(1-e^{-c}) < tol
    return int(math.ceil((math.log(4 / tol) - math.log1p(-math.exp(-c))) / c)) + 1


def _theta(an: np.ndarray, n: np.ndarray, sqrtN: float, t: float) -> float:
    return float(np.sum(an * np.exp(-2 * math.pi * n * t / sqrtN)))


def lvalue_center(E: CurveQ, d: int = 1, terms: Optional[int] = None, tol: float = 1e-8) -> LValue:
    """L(1, E^d) from the smoothed sum, with the root number read off the theta relation
    Theta(1/t) = w t^2 Theta(t) at t = 1.2 rather than assumed."""
    if math.gcd(d, E.conductor) != 1:
        raise NotCoprime(f"gcd({d}, {E.conductor}) != 1")
    sqrtN = math.sqrt(E.conductor) * abs(d)
    t = 1.2
    need = _needed_terms(sqrtN, 1 / t, 1e-16)
    if terms is None:
        terms = need
    c = 2 * math.pi / sqrtN
    tail = 4 * math.exp(-c * terms) / (-math.expm1(-c))
    if tail > tol:
        raise TruncationTooSmall(f"{terms} terms leave a tail bound {tail:.1e}")
    bound = max(terms, need)
    an = ap_table(E, bound)[1:]
    chi = _chi_cached(d, bound)[1:]
    coef = an * chi
    n = np.arange(1, bound + 1, dtype=np.float64)
    w = _theta(coef, n, sqrtN, 1 / t) / (t * t * _theta(coef, n, sqrtN, t))
    head = coef[:terms] / n[:terms] * np.exp(-c * n[:terms])
    value = (1 + w) * float(np.sum(head))
    return LValue(d, value, w, terms, tail)


def root_number_numeric(E: CurveQ, d: int = 1) -> int:
    w = lvalue_center(E, d).root_number
    r = round(w)
    if abs(w - r) > 1e-6 or r not in (-1, 1):
        raise NumericFailure(f"theta relation gives w={w}; the conductor is probably wrong")
    return r


def twist_search(
    E: CurveQ, sign_at_infinity: int, budget: int = 500, exclude: tuple = (), allow_trivial: bool = False
) -> int:
    """Smallest |d| with the given sign, predicted root number +1 and L(1, E^d) != 0.

    d = 1 is skipped unless allow_trivial is set."""
    if E.is_square_N:
        raise HypothesisViolated("conductor is a square")
    w_E = root_number_numeric(E)
    start = 1 if (sign_at_infinity > 0 and allow_trivial) else 2
    for a in range(start, budget + 1):
        d = sign_at_infinity * a
        if d in exclude or not is_fundamental(d) or math.gcd(d, E.conductor) != 1:
            continue
        if root_number_twist(w_E, d, E.conductor) != 1:
            continue
        if abs(lvalue_center(E, d).value) > 1e-6:
            return d
    raise SearchExhausted(f"no admissible twist with |d| <= {budget}")


# ---------------------------------------------------------------------------
# Rationality reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalityReport:
    name: str
    raw: float
    detected: Optional[Fraction]
    residual: Optional[float]
    max_denominator: int

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "raw": self.raw,
            "detected": None if self.detected is None else {"num": self.detected.numerator, "den": self.detected.denominator},
            "residual": self.residual,
        }


def detect(name: str, raw: float, max_den: int = 1000, tol: float = 1e-6) -> RationalityReport:
    q = rationalize(raw, max_den, tol)
    return RationalityReport(name, raw, q, None if q is None else abs(raw - float(q)), max_den)


def bsd_report(E: CurveQ, dplus: int = 1, max_den: int = 1000, tol: float = 1e-6, omega_scale: float = 1.0) -> RationalityReport:
    per = periods_agm(E)
    L = lvalue_center(E, dplus).value
    if abs(L) < 1e-6:
        raise DegenerateTwist(f"L(1, E^{dplus}) vanishes")
    return detect("bsd", L / (math.sqrt(dplus) * per.omega1 * omega_scale), max_den, tol)


def oda_raw(E: CurveQ, dplus: int, dminus: int, omega_scale: float = 1.0) -> float:
    per = periods_agm(E)
    Lp = lvalue_center(E, dplus).value
    Lm = lvalue_center(E, dminus).value
    if abs(Lp) < 1e-6 or abs(Lm) < 1e-6:
        raise DegenerateTwist("a twisted central value vanishes")
    return (Lp / math.sqrt(dplus)) * (math.sqrt(-dminus) / Lm) * (per.omega2_im / (per.omega1 * omega_scale))


def oda_bsd_report(
    E: CurveQ, dplus: int, dminus: int, max_den: int = 1000, tol: float = 1e-6, omega_scale: float = 1.0
) -> tuple[RationalityReport, RationalityReport]:
    if dplus <= 0 or dminus >= 0:
        raise ValueError("need dplus > 0 > dminus")
    w_E = root_number_numeric(E)
    for d in (dplus, dminus):
        if root_number_twist(w_E, d, E.conductor) != 1:
            raise DegenerateTwist(f"twist by {d} has root number -1")
    rep1 = bsd_report(E, dplus, max_den, tol, omega_scale)
    rep2 = detect("oda", oda_raw(E, dplus, dminus, omega_scale), max_den, tol)
    return rep1, rep2


# ---------------------------------------------------------------------------
# Determinant identities from the adjoint motive
# ---------------------------------------------------------------------------


def delta2_block(tau: complex, l1: complex, l2: complex) -> np.ndarray:
    """Closed form of conjugation by ((W1, l1 W1), (W2, l2 W2)) on (Hhat, N, N^t), tau = W1/W2."""
    D = l2 - l1
    return np.array(
        [
            [(l2 + l1) / D, -1 / D, l2 * l1 / D],
            [-2 * tau * l1 / D, tau / D, -tau * l1 ** 2 / D],
            [2 * l2 / (tau * D), -1 / (tau * D), l2 ** 2 / (tau * D)],
        ],
        dtype=complex,
    )


def adjoint_matrix(g: np.ndarray) -> np.ndarray:
    """Matrix of X -> g X g^-1 on trace-zero matrices in the basis (Hhat, N, N^t)."""
    gi = np.linalg.inv(g)
    basis = [np.array([[1, 0], [0, -1]]), np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])]
    cols = []
    for b in basis:
        m = g @ b @ gi
        cols.append([m[0, 0], m[0, 1], m[1, 0]])
    return np.array(cols, dtype=complex).T


def section_block(tau: complex, l1: complex, l2: complex) -> np.ndarray:
    D, Dc = l2 - l1, np.conj(l2 - l1)
    tc = np.conj(tau)
    re, im = tau.real, tau.imag
    return np.array(
        [
            [-0.5 / D, -0.5 / Dc, -re / im],
            [0.5 * tau / D, 0.5 * tc / Dc, abs(tau) ** 2 / im],
            [-0.5 / (tau * D), -0.5 / (tc * Dc), -1 / im],
        ],
        dtype=complex,
    )


def section_det_expected(tau: complex, l1: complex, l2: complex) -> complex:
    """-i |tau|^-2 Im(tau)^2 / |l2 - l1|^2; the unit -i is absent from the displayed identity."""
    D = l2 - l1
    return -1j * abs(tau) ** -2 * tau.imag ** 2 / (D * np.conj(D))


@dataclass
class DeterminantCheckResult:
    ok: bool
    det_delta2_max_err: float
    closed_vs_adjoint_max_err: float
    section_det_max_err: float
    conjugation_identities: bool
    hsigma_scalar: str

    def __bool__(self) -> bool:
        return self.ok


def conjugation_identities() -> tuple[bool, str]:
    """The three conjugation identities over Q(t, tau, taubar), tau and taubar independent.

    Returns the truth of the first two and the scalar c with delta Hhat delta^-1 = c H_sigma."""
    import sympy as sp

    t, T, Tb = sp.symbols("t tau taubar")
    d = sp.Matrix([[t * Tb, T], [t, 1]])
    di = d.inv()
    N = sp.Matrix([[0, 1], [0, 0]])
    Nt = sp.Matrix([[0, 0], [1, 0]])
    H = sp.Matrix([[1, 0], [0, -1]])
    ok1 = sp.simplify(d * N * di - (-t * Tb / (Tb - T)) * sp.Matrix([[1, -Tb], [1 / Tb, -1]])) == sp.zeros(2)
    ok2 = sp.simplify(d * Nt * di - (T / t / (Tb - T)) * sp.Matrix([[1, -T], [1 / T, -1]])) == sp.zeros(2)
    re = (T + Tb) / 2
    im = (T - Tb) / (2 * sp.I)
    Hs = sp.Matrix([[-re / im, T * Tb / im], [-1 / im, re / im]])
    conj = d * H * di
    ratio = sp.simplify(conj[0, 1] / Hs[0, 1])
    ok3 = sp.simplify(conj - ratio * Hs) == sp.zeros(2)
    return bool(ok1 and ok2 and ok3), str(ratio)


def appendixA_check(samples: int = 100, seed: int = 0, tol: float = 1e-10) -> DeterminantCheckResult:
    rng = np.random.default_rng(seed)
    det_err = closed_err = sec_err = 0.0
    drawn = 0
    while drawn < samples:
        taus = rng.normal(size=3) + 1j * rng.normal(size=3)
        if np.min(np.abs(taus.imag)) < 1e-3:
            continue  # real tau is excluded
        lam = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        blocks = []
        for tau, (l1, l2) in zip(taus, lam):
            W2 = complex(rng.normal() + 1j * rng.normal())
            W1 = tau * W2
            g = np.array([[W1, l1 * W1], [W2, l2 * W2]])
            adj = adjoint_matrix(g)
            closed = delta2_block(tau, l1, l2)
            closed_err = max(closed_err, float(np.max(np.abs(adj - closed))))
            blocks.append(closed)
            S = section_block(tau, l1, l2)
            sec_err = max(sec_err, float(abs(np.linalg.det(S) - section_det_expected(tau, l1, l2)) / abs(section_det_expected(tau, l1, l2))))
        big = np.zeros((9, 9), dtype=complex)
        for i, b in enumerate(blocks):
            big[3 * i:3 * i + 3, 3 * i:3 * i + 3] = b
        det_err = max(det_err, float(abs(np.linalg.det(big) - 1)))
        drawn += 1
    conj_ok, scalar = conjugation_identities()
    ok = det_err < tol and closed_err < tol * 1e3 and sec_err < tol and conj_ok
    return DeterminantCheckResult(ok, det_err, closed_err, sec_err, conj_ok, scalar)


def random_rank0_curves() -> list[CurveQ]:
    return [CurveQ(*a, conductor=N) for a, N in CONDUCTORS.items()]


