from __future__ import annotations

import cmath
import math
import random
import time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodlab.localarith import (
    KINDS,
    BadCharacter,
    BadConductorShift,
    BadIndex,
    LocalChar,
    PoleAtS,
    SatakeData,
    TruncationTooSmall,
    constants_CK,
    gauss_product_expected,
    gauss_sum,
    kirillov_newvector,
    local_L,
    quadratic_char,
    random_character,
    trivial_char,
    twisted_local_expected,
    twisted_local_integral,
    zeta_local,
)


def test_zeta_factors():
    assert zeta_local("finite", 1, 5) == pytest.approx(5 / 4)
    assert zeta_local("real", 2) == pytest.approx(1 / math.pi)
    assert zeta_local("complex", 1) == pytest.approx(1 / math.pi)
    with pytest.raises(PoleAtS):
        zeta_local("finite", 0, 5)
    with pytest.raises(PoleAtS):
        zeta_local("real", 0)


def test_characters_are_multiplicative():
    rng = random.Random(3)
    for p, n in [(5, 2), (7, 1), (2, 3), (2, 4), (3, 3)]:
        chi = random_character(p, n, rng)
        m = p ** n
        units = [u for u in range(1, m) if u % p]
        for u in units[:8]:
            for v in units[:8]:
                assert abs(chi.unit(u * v % m) - chi.unit(u) * chi.unit(v)) < 1e-12


def test_primitivity_is_enforced():
    with pytest.raises(BadCharacter):
        LocalChar(5, 2, (0,))  # trivial on units, not of conductor 25
    with pytest.raises(BadCharacter):
        LocalChar(6, 1, (1,))
    with pytest.raises(BadCharacter):
        random_character(2, 1, random.Random(0))


def test_quadratic_gauss_sums_against_classical_values():
    # classical sum over u mod p of (u/p) e^{2 pi i u/p} is sqrt(p) or i sqrt(p);
    # the unit average with psi = e^{-2 pi i .} is its conjugate over p - 1
    assert abs(gauss_sum(quadratic_char(5)) - math.sqrt(5) / 4) < 1e-12
    assert abs(gauss_sum(quadratic_char(7)) - (-1j) * math.sqrt(7) / 6) < 1e-12
    assert abs(gauss_sum(quadratic_char(13)) - math.sqrt(13) / 12) < 1e-12


def test_gauss_product_frozen_values():
    # p^-n zeta(1)^2 chi(-1): 5/16 for the quadratic character mod 5, -3/4 mod 3
    assert gauss_product_expected(quadratic_char(5)) == pytest.approx(5 / 16)
    assert gauss_product_expected(quadratic_char(3)) == pytest.approx(-3 / 4)
    q5 = quadratic_char(5)
    assert abs(gauss_sum(q5) * gauss_sum(q5.inverse()) - 5 / 16) < 1e-12


@given(st.sampled_from([3, 5, 7, 13]), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_gauss_identity(p, n, seed):
    chi = random_character(p, n, random.Random(seed))
    val = gauss_sum(chi) * gauss_sum(chi.inverse())
    assert abs(val - gauss_product_expected(chi)) < 1e-9


@given(st.sampled_from([3, 5, 7]), st.integers(1, 2), st.integers(0, 10 ** 6))
def test_gauss_sum_absolute_value(p, n, seed):
    chi = random_character(p, n, random.Random(seed))
    # |g|^2 = p^-n zeta(1)^2 for primitive ramified chi
    assert abs(abs(gauss_sum(chi)) ** 2 - p ** (-n) * (p / (p - 1)) ** 2) < 1e-9


def test_shifted_gauss_sum_warns_and_strict_raises():
    chi = trivial_char(7)
    with pytest.warns(BadConductorShift):
        val = gauss_sum(chi, -1)
    assert abs(val - (-1 / 6)) < 1e-12
    with pytest.raises(BadConductorShift):
        gauss_sum(chi, -1, strict=True)


def test_gauss_identity_runtime():
    rng = random.Random(0)
    t = time.perf_counter()
    for p in (3, 5, 7, 13):
        for n in (1, 2, 3):
            for _ in range(10):
                chi = random_character(p, n, rng)
                assert abs(gauss_sum(chi) * gauss_sum(chi.inverse()) - gauss_product_expected(chi)) < 1e-9
    assert time.perf_counter() - t < 5


def test_local_l_values():
    assert abs(local_L(SatakeData("spherical", 2, 1.0), None, 0.5) - 1 / (1 - 2 ** -0.5) ** 2) < 1e-12
    assert local_L(SatakeData("steinberg", 5, 1.0), None, 1) == pytest.approx(1 / (1 - 1 / 5))
    assert local_L(SatakeData("supercuspidal", 5), None, 0.5) == 1
    assert local_L(SatakeData("spherical", 5, 1.0), quadratic_char(5), 0.5) == 1
    with pytest.raises(PoleAtS):
        local_L(SatakeData("steinberg", 4, 2.0), None, 0.5)


def test_newvector_generating_function():
    # sum_n phi0(p^n) X^n equals the local L-factor at X = p^(1/2 - s)
    d = SatakeData("spherical", 5, cmath.exp(0.4j))
    s = 1.3
    series = sum(kirillov_newvector(d, n) * 5 ** (n / 2) * 5 ** (-n * s) for n in range(80))
    assert abs(series - local_L(d, None, s)) < 1e-12
    assert kirillov_newvector(d, -1) == 0


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("p", [5, 7])
def test_twisted_local_identity(kind, p):
    rng = random.Random(p)
    data = SatakeData(kind, p, cmath.exp(1.1j))
    for rho in (trivial_char(p, cmath.exp(0.7j)), quadratic_char(p), random_character(p, 2, rng)):
        lhs = twisted_local_integral(data, rho, 60)
        assert abs(lhs - twisted_local_expected(data, rho)) < 1e-10


def test_truncation_guard():
    data = SatakeData("spherical", 5, 1.0)
    with pytest.raises(TruncationTooSmall):
        twisted_local_integral(data, trivial_char(5), 5)


def test_archimedean_constants():
    C, K = constants_CK([2], [0], 1, 0, 0)
    assert C == pytest.approx(1 / math.pi ** 2)
    assert K == pytest.approx(2j / math.pi)
    with pytest.raises(BadIndex):
        constants_CK([4], [2], 1, 0, 0)
