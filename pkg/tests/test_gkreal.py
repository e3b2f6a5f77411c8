from __future__ import annotations

import time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodlab.exactalg import QQzeta8, zeta8_i
from periodlab.gkreal import (
    BadGenerator,
    GKVecR,
    c1_closed_form,
    c1_first_principles,
    cocycle_c1_real,
    cocycle_check_real,
    cup2_real,
    cup_by_cocycles,
    cup_by_k_average,
    cup_closed_form,
    in_discrete_series,
    lie_act_oracle,
    lie_act_principal,
    rho_real,
    section_real,
    tensors_equal,
)
from periodlab.repcore import lie_act_findim, lie_element, mu_basis

K8 = QQzeta8
I = zeta8_i(K8)
weights = st.sampled_from([2, 4, 6, 8])
coeff = st.integers(-5, 5)


def _vec(k, cs):
    return GKVecR.build(k, {n: c for n, c in cs.items()})


@given(weights, st.dictionaries(st.integers(-6, 6), coeff, max_size=5), st.sampled_from(["Hhat", "Wtilde", "W"]))
def test_principal_action_matches_coordinate_oracle(k, cs, x):
    v = _vec(k, cs)
    assert lie_act_principal(x, v) == lie_act_oracle(x, v)


def test_unknown_generator():
    with pytest.raises(BadGenerator):
        lie_act_principal("Z", GKVecR.basis(2, 0))


@given(weights, st.dictionaries(st.integers(-6, 6), coeff, max_size=5))
def test_commutator_relation(k, cs):
    v = _vec(k, cs)
    H = lambda u: lie_act_principal("Hhat", u)
    Wt = lambda u: lie_act_principal("Wtilde", u)
    assert H(Wt(v)) - Wt(H(v)) == lie_act_principal("W", v).scale(2)


@pytest.mark.parametrize("k", [2, 4, 6])
def test_discrete_series_is_stable(k):
    for n in (k // 2, k // 2 + 1, -(k // 2), -(k // 2) - 2):
        for x in ("Hhat", "Wtilde", "W"):
            assert in_discrete_series(lie_act_principal(x, GKVecR.basis(k, n)))


@pytest.mark.parametrize("k", [2, 4, 6])
def test_rho_is_equivariant_and_split_by_section(k):
    h = (k - 2) // 2
    for x in ("Hhat", "Wtilde", "W"):
        X = lie_element(x, K8)
        for m in range(-h, h + 1):
            mu = mu_basis(k, m, K8)
            s = section_real(mu)
            assert rho_real(s) == mu
            f = GKVecR.basis(k, m)
            assert rho_real(lie_act_principal(x, f)) == lie_act_findim(X, rho_real(f))


def test_c1_frozen_values_k4():
    # c1(Hhat)(mu_m) = 3((-i)^(1+m) f_2 + sign i^(1+m) f_-2)
    c = cocycle_c1_real(4, 1)
    assert c.values[0] == GKVecR.build(4, {2: -3 * I, -2: 3 * I})
    assert c.values[1] == GKVecR.build(4, {2: -3, -2: -3})
    cm = cocycle_c1_real(4, -1)
    assert cm.values[-1] == GKVecR.build(4, {2: 3, -2: -3})


@pytest.mark.parametrize("k", [2, 4, 6, 8])
@pytest.mark.parametrize("sign", [1, -1])
def test_c1_closed_form_and_cocycle(k, sign):
    first = c1_first_principles(k, sign)
    closed = c1_closed_form(k, sign)
    assert all(first.values[m] == closed.values[m] for m in first.values)
    assert cocycle_check_real(first)


def test_cup_frozen_k2():
    assert cup_closed_form(2) == {(1, -1): -2 * I, (-1, 1): -2 * I}
    assert tensors_equal(cup_by_cocycles(2), cup_closed_form(2))


@pytest.mark.parametrize("k", [2, 4, 6])
def test_cup_routes_agree(k):
    cup = cup2_real(k)
    assert tensors_equal(cup, cup_by_k_average(k, "minus_ambient"))


def test_k_average_needs_ambient_coordinates():
    # with delta s_- read in D(k) coordinates the f_a (x) f_-a terms cancel
    assert not tensors_equal(cup_by_cocycles(4), cup_by_k_average(4, "minus_dk"))


def test_c1_runtime_budget():
    for k in (2, 4, 6, 8):
        t = time.perf_counter()
        cocycle_c1_real(k, 1)
        cocycle_c1_real(k, -1)
        assert time.perf_counter() - t < 1.0
