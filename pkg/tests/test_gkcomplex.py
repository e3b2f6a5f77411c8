from __future__ import annotations

import random
import time
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodlab.exactalg import SU2_VARS, MultiPoly
from periodlab.gkcomplex import (
    K8,
    CharC,
    ComplexCocycles,
    PhiVec,
    PVCheckFailed,
    VPair,
    c1_cocycle_ok,
    c1_direct_matches,
    c1_first_principles,
    c2_cocycle_ok,
    casimir_eigen_ok,
    cup3_complex,
    delta_s_closed,
    delta_s_complex,
    discrete_levels_start,
    hatH_oracle,
    hatH_recurrence,
    integrate,
    kappa,
    low_levels,
    moment_su2,
    psi_intertwine_check,
    pv_check,
    rho_complex,
    section_complex,
    tensors_equal,
    vpair_basis,
)
from periodlab.repcore import VkDual

coeff = st.integers(-4, 4)


def _rand_mu(rng: random.Random, w: int) -> VkDual:
    return VkDual.from_values(K8, [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(w + 1)])


def _rand_pair(rng: random.Random, k_id: int, k_c: int) -> VPair:
    return VPair.build(k_id - 2, k_c - 2, [[rng.randint(-3, 3) for _ in range(k_c - 1)] for _ in range(k_id - 1)])


def _rotation() -> tuple:
    i = K8.gen() ** 2
    return kappa(K8(3) / 5, K8(4) * i / 5)


def test_haar_moments():
    # E|a|^2 = 1/2, E|a|^4 = 1/3, E|a|^2|b|^2 = 1/6 on SU(2)
    assert moment_su2(1, 0, 1, 0) == Fraction(1, 2)
    assert moment_su2(2, 0, 2, 0) == Fraction(1, 3)
    assert moment_su2(1, 1, 1, 1) == Fraction(1, 6)
    assert moment_su2(1, 0, 0, 0) == 0
    a = MultiPoly.var(K8, SU2_VARS, "a")
    ac = MultiPoly.var(K8, SU2_VARS, "ac")
    b = MultiPoly.var(K8, SU2_VARS, "b")
    bc = MultiPoly.var(K8, SU2_VARS, "bc")
    assert integrate(a * ac + b * bc) == 1


def test_weight_to_character():
    assert CharC.of_weight(4, 2) == CharC(3, 1)
    assert CharC(3, 1).hat() == CharC(2, 2)


@pytest.mark.parametrize("N,lam", [(2, 0), (3, 1), (4, 0), (4, 2), (3, -1)])
def test_recurrence_matches_oracle(N, lam):
    rng = random.Random(N * 10 + lam)
    chi = CharC(N, lam)
    for n in range(abs(lam), 5):
        v = PhiVec.build(chi, {n: _rand_mu(rng, 2 * n)})
        assert hatH_oracle(v.expand()) == hatH_recurrence(v).expand()


@given(st.lists(coeff, min_size=5, max_size=5))
def test_right_translation_is_an_action(vals):
    chi = CharC(3, 1)
    v = PhiVec.build(chi, {2: VkDual.from_values(K8, vals)})
    g = _rotation()
    assert v.act(g).act(g) == v.act(_mat_sq(g))


def _mat_sq(g):
    from periodlab.repcore import mat2_mul

    return mat2_mul(g, g)


@pytest.mark.parametrize("kw", [(2, 2), (4, 2), (2, 4), (4, 4)])
def test_rho_equivariance_kernel_and_section(kw):
    k_id, k_c = kw
    rng = random.Random(sum(kw))
    chi = CharC.of_weight(k_id, k_c)
    g = _rotation()
    n0 = discrete_levels_start(k_id, k_c)
    for n in (n0, n0 + 1):
        assert rho_complex(PhiVec.build(chi, {n: _rand_mu(rng, 2 * n)}), k_id, k_c).is_zero()
    v = PhiVec.build(chi, {n: _rand_mu(rng, 2 * n) for n in low_levels(k_id, k_c)})
    assert rho_complex(v.act(g), k_id, k_c) == rho_complex(v, k_id, k_c).act(g)
    mu = _rand_pair(rng, k_id, k_c)
    s = section_complex(mu, k_id, k_c)
    assert rho_complex(s, k_id, k_c) == mu
    assert section_complex(mu.act(g), k_id, k_c) == s.act(g)
    for n in s.levels():
        assert casimir_eigen_ok(s, n)


@pytest.mark.parametrize("kw", [(2, 2), (4, 2), (2, 4), (4, 4)])
def test_delta_s_closed_form(kw):
    for mu in vpair_basis(*kw):
        first = c1_first_principles(mu, *kw).scale(Fraction(1, 2))
        assert first == delta_s_closed(mu, *kw)
        assert delta_s_complex(mu, *kw) == first


@pytest.mark.parametrize("kw", [(2, 2), (4, 2)])
def test_cocycle_conditions(kw):
    cc = ComplexCocycles(*kw)
    assert c1_cocycle_ok(cc)
    assert c1_direct_matches(cc)
    assert c2_cocycle_ok(cc)


@pytest.mark.parametrize("kw", [(2, 2), (4, 2), (4, 4)])
def test_psi_intertwines(kw):
    N = CharC.of_weight(*kw).N
    assert psi_intertwine_check(*kw, N + 3)


def test_psi_with_shifted_coefficients_fails():
    assert not psi_intertwine_check(2, 2, 4, offset=1)


def test_pv_relation_and_control():
    res = pv_check(2, 2)
    assert res["difference_zero"]
    with pytest.raises(PVCheckFailed):
        pv_check(2, 2, Fraction(2))


def test_pv_borel_values_k22():
    # Phi c1(Hhat) = 0 and Phi c1(N1) = -(k_id - 1)(k_c - 1) on the top component
    res = pv_check(2, 2)
    assert all(x.is_zero() for x in res["c1_borel"]["Hhat"])
    assert [x for x in res["c1_borel"]["N1"] if not x.is_zero()] == [K8(-1)]


def test_triple_cup_k22():
    t = time.perf_counter()
    res = cup3_complex(2, 2)
    assert time.perf_counter() - t < 60
    assert tensors_equal(res["cup"], res["average_route"])
    assert res["three_term_agrees"]
    assert res["cup"]
