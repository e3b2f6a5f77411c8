"""One test per acceptance criterion; each records a PASS/FAIL line."""
from __future__ import annotations

import cmath
import random
import time
from fractions import Fraction

import pytest
from conftest import record

from periodlab import gkcomplex as gc
from periodlab import gkreal as gr
from periodlab import localarith as la
from periodlab import periods as pe
from periodlab import quat as qt
from periodlab.exactalg import rationalize
from periodlab.repcore import VkDual


def test_criterion_01_real_c1_closed_form():
    ok, slowest = True, 0.0
    for k in (2, 4, 6, 8):
        t = time.perf_counter()
        for sign in (1, -1):
            first = gr.c1_first_principles(k, sign)
            closed = gr.c1_closed_form(k, sign)
            ok &= all(first.values[m] == closed.values[m] for m in first.values)
        elapsed = time.perf_counter() - t
        slowest = max(slowest, elapsed)
        ok &= elapsed < 1.0
    record(1, ok, f"k in 2..8, both signs, slowest weight {slowest:.2f}s")
    assert ok


def test_criterion_02_real_cup_product():
    ok = True
    for k in (2, 4, 6):
        cup = gr.cup_by_cocycles(k)
        ok &= gr.tensors_equal(cup, gr.cup_closed_form(k))
        ok &= gr.tensors_equal(cup, gr.cup_by_k_average(k, "minus_ambient"))
    record(2, ok, "closed form and -8i K-average, k in {2,4,6}")
    assert ok


def test_criterion_03_complex_recurrence():
    rng = random.Random(2024)
    t = time.perf_counter()
    ok, count = True, 0
    for N, lam in [(2, 0), (3, 1), (4, 0), (4, 2)]:
        chi = gc.CharC(N, lam)
        for n in range(abs(lam), 6):
            for _ in range(5):
                mu = VkDual.from_values(gc.K8, [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(2 * n + 1)])
                v = gc.PhiVec.build(chi, {n: mu})
                ok &= gc.hatH_oracle(v.expand()) == gc.hatH_recurrence(v).expand()
                count += 1
    elapsed = time.perf_counter() - t
    ok &= elapsed < 10
    record(3, ok, f"{count} vectors in {elapsed:.2f}s")
    assert ok


def test_criterion_04_psi_intertwines():
    ok = all(gc.psi_intertwine_check(a, b, gc.CharC.of_weight(a, b).N + 3) for a, b in [(2, 2), (4, 2), (4, 4)])
    record(4, ok, "k in {(2,2),(4,2),(4,4)}, n <= N+3")
    assert ok


def test_criterion_05_delta_s_closed_form():
    ok = True
    for kw in [(2, 2), (4, 2)]:
        for mu in gc.vpair_basis(*kw):
            ok &= gc.c1_first_principles(mu, *kw).scale(Fraction(1, 2)) == gc.delta_s_closed(mu, *kw)
    record(5, ok, "k in {(2,2),(4,2)}, all basis functionals")
    assert ok


def test_criterion_06_pv_relation():
    ok = True
    for kw in [(2, 2), (4, 4)]:
        try:
            gc.pv_check(*kw)
        except gc.PVCheckFailed:
            ok = False
        try:
            gc.pv_check(*kw, Fraction(2))
            ok = False
        except gc.PVCheckFailed:
            pass
    record(6, ok, "coboundary found for (2,2),(4,4); perturbed c2 rejected")
    assert ok


def test_criterion_07_triple_cup():
    t = time.perf_counter()
    try:
        res = gc.cup3_complex(2, 2)
        ok = gc.tensors_equal(res["cup"], res["average_route"]) and bool(res["cup"])
    except gc.FormulaMismatch:
        ok = False
    elapsed = time.perf_counter() - t
    ok &= elapsed < 60
    record(7, ok, f"cup vs SU(2) average for (2,2) in {elapsed:.2f}s")
    assert ok


def _quat_parts():
    parts = {"delta4": True, "v2": True, "v4_minus12b": True, "v4_minus4b": True, "unique": True, "dims": True}
    for a, b in [(-1, -1), (-1, -11)]:
        B = qt.QuaternionAlgebra.over_q(a, b)
        sp = qt.Splitting.standard(B)
        v4 = qt.quartic_invariant(B)
        parts["delta4"] &= qt.delta_k(v4).is_zero()
        f2 = qt.torus_eval(qt.SymTensor.build(B, 1, {(1, 0, 0): 1}), sp)
        parts["v2"] &= f2.is_constant() and f2.constant() == sp.sqrt_a * 2
        f4 = qt.torus_eval(v4, sp)
        parts["v4_minus12b"] &= f4.is_constant() and f4.constant() == sp.lift(B.b) * -12
        parts["v4_minus4b"] &= f4.is_constant() and f4.constant() == sp.lift(B.b) * -4
        for k in range(2, 13, 2):
            parts["unique"] &= qt.invariant_subspace_dim(B, k) == 1
            parts["dims"] &= len(qt.vk_basis(B, k)) == k + 1
    return parts


def test_criterion_08_reproducible_parts():
    parts = _quat_parts()
    assert all(v for key, v in parts.items() if key != "v4_minus4b")


@pytest.mark.xfail(strict=True, reason="torus_eval(v4) is -12b, not the stated -4b; see the decisions ledger")
def test_criterion_08_quaternion_invariants():
    parts = _quat_parts()
    ok = all(parts.values())
    failed = [key for key, v in parts.items() if not v]
    record(8, ok, "all parts hold" if ok else f"failing parts {failed}; torus_eval(v4) = -12b")
    assert ok


def test_criterion_09_gauss_identity():
    rng = random.Random(9)
    t = time.perf_counter()
    worst = 0.0
    for p in (3, 5, 7, 13):
        for n in (1, 2, 3):
            for _ in range(10):
                chi = la.random_character(p, n, rng)
                worst = max(worst, abs(la.gauss_sum(chi) * la.gauss_sum(chi.inverse()) - la.gauss_product_expected(chi)))
    elapsed = time.perf_counter() - t
    ok = worst < 1e-9 and elapsed < 5
    record(9, ok, f"120 characters, max error {worst:.1e}, {elapsed:.2f}s")
    assert ok


def test_criterion_10_whittaker_identity():
    rng = random.Random(10)
    worst = 0.0
    for p in (5, 7):
        for kind in la.KINDS:
            data = la.SatakeData(kind, p, cmath.exp(0.9j))
            for rho in (la.trivial_char(p, cmath.exp(-0.4j)), la.quadratic_char(p), la.random_character(p, 2, rng)):
                worst = max(worst, abs(la.twisted_local_integral(data, rho, 60) - la.twisted_local_expected(data, rho)))
    ok = worst < 1e-10
    record(10, ok, f"3 kinds, p in {{5,7}}, max error {worst:.1e}")
    assert ok


def test_criterion_11_periods_pipeline():
    t = time.perf_counter()
    E = pe.parse_curve("0,-1,1,-10,-20", 11)
    per = pe.periods_agm(E)
    rep = pe.detect("bsd", pe.lvalue_center(E).value / per.omega1, 25, 1e-6)
    elapsed = time.perf_counter() - t
    ok = rep.detected == Fraction(1, 5) and rep.residual < 1e-6 and per.legendre_residual < 1e-10 and elapsed < 5
    record(11, ok, f"L/Omega1 = {rep.detected}, Legendre {per.legendre_residual:.1e}, {elapsed:.2f}s")
    assert ok


def test_criterion_12_oda_ratio():
    E = pe.parse_curve("0,-1,1,-10,-20", 11)
    dp, dm = pe.twist_search(E, 1), pe.twist_search(E, -1)
    dp2, dm2 = pe.twist_search(E, 1, exclude=(dp,)), pe.twist_search(E, -1, exclude=(dm,))
    _, oda1 = pe.oda_bsd_report(E, dp, dm)
    _, oda2 = pe.oda_bsd_report(E, dp2, dm2)
    ratio = rationalize(oda1.raw / oda2.raw, 1000, 1e-6)
    ok = oda1.detected is not None and oda1.residual < 1e-6 and ratio is not None
    record(12, ok, f"pairs ({dp},{dm}) -> {oda1.detected}, ({dp2},{dm2}) -> {oda2.detected}, ratio {ratio}")
    assert ok


def test_criterion_13_root_numbers():
    ok, total = True, 0
    for a, N in [((0, -1, 1, -10, -20), 11), ((1, 1, 1, -10, -10), 15)]:
        E = pe.CurveQ(*a, conductor=N)
        w = pe.root_number_numeric(E)
        pos = pe.fundamental_discriminants(1, 60, N)[:10]
        neg = pe.fundamental_discriminants(-1, 60, N)[:10]
        for d in pos + neg:
            pred = pe.root_number_twist(w, d, N)
            ok &= (abs(pe.lvalue_center(E, d).value) < 1e-6) == (pred == -1)
            total += 1
    record(13, ok, f"{total} twists on 11a1 and 15a1")
    assert ok


def test_criterion_14_determinant_identities():
    results = [pe.appendixA_check(100, seed) for seed in (0, 1, 2)]
    ok = all(bool(r) for r in results)
    worst = max(max(r.det_delta2_max_err, r.section_det_max_err) for r in results)
    record(14, ok, f"3 seeds x 100 samples, worst error {worst:.1e}, symbolic identities hold")
    assert ok
