from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodlab.exactalg import kernel_basis
from periodlab.quat import (
    BadWeight,
    DegreeTooSmall,
    QuaternionAlgebra,
    Splitting,
    SymTensor,
    conjugate_tensor,
    delta_k,
    invariant_subspace_dim,
    invariant_vector,
    iota_embed,
    kappa_embed,
    quartic_invariant,
    torus_eval,
    torus_invariant,
    trace_pairing,
    vk_basis,
)
from periodlab.repcore import act_gl2, mat2_det, mat2_mul

ALGEBRAS = [(-1, -1), (-1, -11), (2, 5), (-3, 7)]
small = st.integers(-3, 3)
quat_coords = st.tuples(small, small, small, small).filter(lambda c: any(c))


def test_multiplication_table():
    B = QuaternionAlgebra.over_q(-1, -11)
    i, j, k = B.basis()
    assert i * i == B.elem(-1)
    assert j * j == B.elem(-11)
    assert i * j == k and j * i == k.scale(-1)
    assert k * k == B.elem(-11)  # k^2 = -ab


@given(quat_coords, quat_coords)
def test_norm_is_multiplicative(x, y):
    B = QuaternionAlgebra.over_q(-1, -11)
    a, b = B.elem(*x), B.elem(*y)
    assert (a * b).norm() == a.norm() * b.norm()


def test_trace_pairing_on_basis():
    B = QuaternionAlgebra.over_q(-1, -11)
    i, j, k = B.basis()
    assert trace_pairing(i, i) == 2 and trace_pairing(j, j) == 22 and trace_pairing(k, k) == 22
    assert trace_pairing(i, j) == 0


@pytest.mark.parametrize("a,b", ALGEBRAS)
def test_dimension_of_vk(a, b):
    B = QuaternionAlgebra.over_q(a, b)
    for k in range(0, 13, 2):
        assert len(vk_basis(B, k)) == k + 1
    with pytest.raises(BadWeight):
        vk_basis(B, 3)


@pytest.mark.parametrize("a,b", ALGEBRAS)
def test_v4_is_harmonic_and_torus_fixed(a, b):
    B = QuaternionAlgebra.over_q(a, b)
    v4 = quartic_invariant(B)
    assert delta_k(v4).is_zero()
    assert torus_invariant(v4)
    with pytest.raises(DegreeTooSmall):
        delta_k(SymTensor.build(B, 1, {(1, 0, 0): 1}))


@pytest.mark.parametrize("a,b", ALGEBRAS)
def test_torus_evaluations(a, b):
    B = QuaternionAlgebra.over_q(a, b)
    sp = Splitting.standard(B)
    v2 = SymTensor.build(B, 1, {(1, 0, 0): 1})
    f2 = torus_eval(v2, sp)
    assert f2.is_constant() and f2.constant() == sp.sqrt_a * 2
    f4 = torus_eval(quartic_invariant(B), sp)
    # the computed constant is -12b (a -4b value is not reproduced; see tests/test_acceptance.py)
    assert f4.is_constant() and f4.constant() == sp.lift(B.b) * -12


@pytest.mark.parametrize("a,b", [(-1, -1), (-1, -11)])
def test_invariant_vector_is_unique(a, b):
    B = QuaternionAlgebra.over_q(a, b)
    sp = Splitting.standard(B)
    for k in range(2, 13, 2):
        assert invariant_subspace_dim(B, k) == 1
        v = invariant_vector(B, k, sp)
        assert torus_eval(v, sp).is_constant()


@given(quat_coords)
def test_kappa_is_equivariant(c):
    B = QuaternionAlgebra.over_q(-1, -11)
    sp = Splitting.standard(B)
    g = B.elem(*c)
    G = iota_embed(g, sp)
    for v in vk_basis(B, 4):
        assert kappa_embed(conjugate_tensor(v, g), sp) == act_gl2(G, kappa_embed(v, sp))


@given(quat_coords)
def test_conjugation_commutes_with_contraction(c):
    B = QuaternionAlgebra.over_q(2, 5)
    g = B.elem(*c)
    for v in vk_basis(B, 6)[:3]:
        assert delta_k(conjugate_tensor(v, g)) == conjugate_tensor(delta_k(v), g)


@given(quat_coords, quat_coords)
def test_iota_is_multiplicative(x, y):
    B = QuaternionAlgebra.over_q(-1, -11)
    sp = Splitting.standard(B)
    g, h = B.elem(*x), B.elem(*y)
    assert iota_embed(g * h, sp) == mat2_mul(iota_embed(g, sp), iota_embed(h, sp))
    assert mat2_det(iota_embed(g, sp)) == sp.lift(g.norm())


def test_kappa_is_injective_on_vk():
    B = QuaternionAlgebra.over_q(-1, -11)
    sp = Splitting.standard(B)
    images = [kappa_embed(v, sp).coeffs for v in vk_basis(B, 6)]
    cols = [[images[c][r] for c in range(len(images))] for r in range(7)]
    assert kernel_basis(cols) == []
