from __future__ import annotations

import cmath

import pytest
import sympy

from csrs.errors import EliminationOverflow, InputError, PreconditionFailed
from csrs.numerics import AppComplex, PrecisionPolicy, make_context
from csrs.presentations import GroupWord, KnotPresentation, builtin_5_2, twist_knot, two_bridge_presentation
from csrs.repfinder import (APoly, RepPoint, SurgerySpec, builtin_apoly_5_2, casson_count_check,
                            eliminate_apoly, find_representations, is_su2_point,
                            nondegeneracy_check, surgery_parameter_candidates, trivial_rep)
from csrs.riley import (LaurentPoly2, RileyData, alexander_specialization, evaluate_word, riley_polynomial,
                        second_derivative_at_one)

from conftest import TABLE

L, M = sympy.symbols("L M")

# the displayed polynomial, typed in by hand
DISPLAY = (-L**3 - M**14 + L**2 * (1 - 2 * M**2 - 2 * M**4 + M**8 - M**10)
           + L * M**4 * (-1 + M**2 - 2 * M**6 - 2 * M**8 + M**10))


def test_builtin_apoly_matches_display():
    A = builtin_apoly_5_2()
    assert sympy.expand(A.to_sympy(L, M) - DISPLAY) == 0
    assert A.coefficient(3, 0) == -1
    assert A.coefficient(0, 0) == 0
    assert len(A.terms) == len(sympy.Poly(DISPLAY, L, M).terms()) == 12


def test_apoly_rejects_zero():
    with pytest.raises(InputError):
        APoly({(1, 1): 0})


def test_eliminated_5_2_agrees_with_display():
    k = builtin_5_2()
    A = eliminate_apoly(riley_polynomial(k), k)
    assert A.source == "eliminated"
    q, r = sympy.div(sympy.Poly(A.to_sympy(L, M), L, M), sympy.Poly(DISPLAY, L, M))
    assert r.is_zero and q.is_ground and abs(q.LC()) == 1


def test_eliminated_trefoil_component():
    k = two_bridge_presentation(3, 1)
    rd = riley_polynomial(k)
    A = eliminate_apoly(rd, k)
    expr = A.to_sympy(L, M)
    assert sympy.rem(sympy.Poly(expr, L), sympy.Poly(L * M**6 + 1, L)).is_zero
    # independent check: (L, M) sampled from the Riley curve satisfy L M^6 + 1 = 0
    for tt in (0.3 + 0.4j, -1.2 + 0.5j):
        u = complex(sympy.solve(sympy.Symbol("u") - (tt + 1 / tt - 1), sympy.Symbol("u"))[0])
        lam = evaluate_word(k.longitude, tt, u, 1)
        Lv = complex(lam[0][0])
        Mv = cmath.sqrt(tt)
        assert abs(Lv * Mv**6 + 1) < 1e-12


def test_elimination_guards():
    with pytest.raises(InputError):
        KnotPresentation("empty", GroupWord(()), GroupWord.parse("x"), GroupWord(()))
    k = builtin_5_2()
    flat = RileyData(LaurentPoly2({(0, 0): 1}), 0, {}, ())
    with pytest.raises(EliminationOverflow):
        eliminate_apoly(flat, k)
    steep = RileyData(LaurentPoly2({(0, 13): 1, (0, 0): 1}), 13, {}, ())
    with pytest.raises(EliminationOverflow):
        eliminate_apoly(steep, k)


def test_surgery_spec():
    assert SurgerySpec.parse("-1/2").n == -2
    assert SurgerySpec.parse("1/3").n == 3
    assert SurgerySpec.parse("1/-1").n == -1
    for bad in ("0/1", "2/3", "1/0", "x"):
        with pytest.raises(InputError):
            SurgerySpec.parse(bad)
    with pytest.raises(InputError):
        SurgerySpec(0)


def test_candidates_contain_table_t(policy128, spec52):
    cands = [complex(t) for t in surgery_parameter_candidates(builtin_apoly_5_2(), spec52, policy128)]
    for t, *_ in TABLE:
        assert min(abs(t - c) for c in cands) < 1e-6


def test_toy_apoly_gives_no_candidates(policy128):
    for n in (-3, 1, 2):
        assert surgery_parameter_candidates(APoly({(1, 0): 1, (0, 0): -1}), SurgerySpec(n),
                                            policy128) == []


def test_eight_classes_match_table(reps52):
    assert len(reps52) == 8
    for rep, (t, u, eps, _) in zip(reps52, TABLE):
        # six printed digits: each component rounds to within half a unit
        assert abs(rep.t.real - t.real) <= 5e-7 and abs(rep.t.imag - t.imag) <= 5e-7
        assert abs(rep.u.real - u) <= 5e-6
        assert rep.eps == eps
        assert rep.is_su2 and rep.is_nondegenerate
    assert [r.class_id for r in reps52] == list(range(1, 9))


def test_rho2_entry(reps52):
    r = reps52[1]
    assert abs(complex(r.t) - (0.309017 + 0.951057j)) < 1e-6
    assert abs(complex(r.u) + 1) < 1e-12 and r.eps == -1


def test_rep_invariants(reps52, knot52, policy128):
    ctx = make_context(128)
    for r in reps52:
        t, u = complex(r.t), complex(r.u)
        assert abs(abs(t) - 1) < 1e-20 and abs(u.imag) < 1e-20
        assert (t + 1 / t - 2).real < u.real < 0
        assert r.residual_phi < 1e-20 and r.residual_surgery < 1e-20
        # the surgery relation mu lambda^n = I, recomputed from words
        w = GroupWord.parse("x") * knot52.longitude.inverse() * knot52.longitude.inverse()
        m = evaluate_word(w, r.t, r.u, r.eps, 128)
        assert abs(complex(m[0][0]) - 1) < 1e-12 and abs(complex(m[0][1])) < 1e-12
        assert is_su2_point(t, u, 1e-9) == is_su2_point(1 / t, u, 1e-9)


def test_precision_stability(reps52, knot52, spec52):
    pol = PrecisionPolicy(256)
    hi = find_representations(knot52, riley_polynomial(knot52, pol), builtin_apoly_5_2(), spec52, pol)
    for a, b in zip(reps52, hi):
        assert abs(complex(a.t) - complex(b.t)) <= max(a.t_error, 1e-25)


def test_trefoil_two_classes():
    k = twist_knot(1)
    pol = PrecisionPolicy(128)
    rd = riley_polynomial(k, pol)
    spec = SurgerySpec(-1)
    reps = find_representations(k, rd, eliminate_apoly(rd, k), spec, pol)
    assert len(reps) == 2
    d2 = second_derivative_at_one(alexander_specialization(rd))
    v = casson_count_check(d2, spec, len(reps))
    assert v.passed and v.casson_lambda == -1


def test_nondegeneracy_of_trivial_and_reducible(knot52, spec52):
    assert nondegeneracy_check(trivial_rep(), knot52, spec52)
    # an abelian point on the exterior curve is not a representation of the surgery
    one = AppComplex.from_value(0.6 + 0.8j, 128)
    zero = AppComplex.from_value(0, 128)
    bogus = RepPoint(one, zero, 1, 0.0, 1.0, False, False, 0)
    with pytest.raises(PreconditionFailed):
        nondegeneracy_check(bogus, knot52, spec52)


def test_casson_examples():
    v = casson_count_check(4, SurgerySpec(-2), 8)
    assert v.passed and v.casson_lambda == -4 and v.expected_classes == 8
    assert casson_count_check(2, SurgerySpec(-1), 2).passed
    v = casson_count_check(4, SurgerySpec(-2), 7)
    assert not v.passed and v.found_classes == 7
