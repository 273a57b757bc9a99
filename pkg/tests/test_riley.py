from __future__ import annotations

import random

import mpmath
import pytest
import sympy

from csrs.errors import ZeroT
from csrs.numerics import AppComplex, PrecisionPolicy, make_context
from csrs.presentations import GroupWord, builtin_5_2, twist_knot, two_bridge_presentation
from csrs.riley import (Laurent1, LaurentPoly2, RileyData, alexander_specialization,
                        evaluate_word, fiber_roots, holonomy_matrices, riley_polynomial,
                        second_derivative_at_one)

from conftest import TABLE

t, u = sympy.symbols("t u")


def _term_map_t(expr):
    """{(t power, u power): coeff} of a Laurent polynomial in t and u."""
    num, den = sympy.fraction(sympy.together(sympy.expand(expr)))
    k = sympy.degree(den, t)
    poly = sympy.Poly(sympy.expand(num), t, u)
    return {(sympy.Rational(a - k), b): int(c) for (a, b), c in poly.terms()}


def _ours(phi: LaurentPoly2):
    return {(sympy.Rational(a, 2), b): c for (a, b), c in phi.terms.items()}


PAPER_PHI = (-(t**-2 + t**2) * u + (t**-1 + t) * (2 + 3 * u + 2 * u**2)
             - (3 + 6 * u + 3 * u**2 + u**3))


def _oracle_phi(word: GroupWord):
    """w11 + (1 - t) w12 from the displayed matrices, with sympy doing the algebra."""
    s = sympy.sqrt(t)
    mats = {"x": sympy.Matrix([[s, 1 / s], [0, 1 / s]]),
            "y": sympy.Matrix([[s, 0], [-s * u, 1 / s]])}
    W = sympy.eye(2)
    for g, e in word.letters:
        m = mats[g] if e > 0 else mats[g].inv()
        W = W * m ** abs(e)
    return sympy.expand(sympy.simplify(W[0, 0] + (1 - t) * W[0, 1]))


def test_phi_matches_displayed_polynomial():
    rd = riley_polynomial(builtin_5_2())
    assert _ours(rd.phi) == _term_map_t(PAPER_PHI)
    assert rd.deg_u == 3


def test_trefoil_phi():
    rd = riley_polynomial(two_bridge_presentation(3, 1))
    assert _ours(rd.phi) == _term_map_t(t + 1 / t - 1 - u)
    assert _ours(rd.phi) == _term_map_t(_oracle_phi(two_bridge_presentation(3, 1).relator_w))


@pytest.mark.parametrize("p,q", [(5, 3), (7, 2), (7, 3)])
def test_phi_matches_symbolic_oracle(p, q):
    k = two_bridge_presentation(p, q)
    assert _ours(riley_polynomial(k).phi) == _term_map_t(_oracle_phi(k.relator_w))


def test_generated_7_2_equals_builtin():
    assert riley_polynomial(two_bridge_presentation(7, 2)).phi == riley_polynomial(builtin_5_2()).phi
    assert riley_polynomial(twist_knot(2)).phi == riley_polynomial(builtin_5_2()).phi


def test_holonomy_examples():
    x, y = holonomy_matrices(1, 0, 1)
    assert [[complex(e) for e in r] for r in x] == [[1, 1], [0, 1]]
    assert [[complex(e) for e in r] for r in y] == [[1, 0], [0, 1]]
    xn, yn = holonomy_matrices(1, 0, -1)
    assert [[complex(e) for e in r] for r in xn] == [[-1, -1], [0, -1]]
    xi, _ = holonomy_matrices(1j, 0.3, 1)
    assert abs(complex(xi[0][0]) - complex(mpmath.expjpi(0.25))) < 1e-15
    with pytest.raises(ZeroT):
        holonomy_matrices(0, 1, 1)


def test_evaluate_word_identity_cases():
    for w in (GroupWord(()), GroupWord.parse("x x^-1")):
        m = evaluate_word(w, 0.3 + 0.2j, 1.5, 1)
        assert [[complex(e) for e in r] for r in m] == [[1, 0], [0, 1]]


@pytest.mark.parametrize("row", TABLE)
def test_table_rows_are_near_the_curve(row):
    tt, uu, eps, _ = row
    w = builtin_5_2().relator_w
    W = evaluate_word(w, tt, uu, eps)
    val = complex(W[0][0]) + (1 - tt) * complex(W[0][1])
    assert abs(val) < 1e-4  # table entries carry six digits


def test_symbolic_numeric_consistency():
    rng = random.Random(7)
    k = builtin_5_2()
    rd = riley_polynomial(k)
    ctx = make_context(128)
    for _ in range(100):
        tt = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        uu = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        W = evaluate_word(k.relator_w, tt, uu, 1, 128)
        T = AppComplex.from_value(tt, 128).to_ctx(ctx)
        direct = W[0][0].to_ctx(ctx) + (1 - T) * W[0][1].to_ctx(ctx)
        sym = rd.phi.evaluate(ctx.sqrt(T), AppComplex.from_value(uu, 128).to_ctx(ctx))
        assert abs(direct - sym) <= 2.0 ** -64 * (1 + abs(sym))


def test_relation_holds_on_curve():
    # wx = yw at points of the curve, so the relation word evaluates to the identity
    k = builtin_5_2()
    rd = riley_polynomial(k)
    pol = PrecisionPolicy(128)
    tt = AppComplex.from_value(0.3 + 0.7j, 128)
    for uu, _ in fiber_roots(rd, tt, pol):
        R = [[complex(e) for e in r] for r in evaluate_word(k.relation_word(), tt, uu, 1, 128)]
        err = max(abs(R[0][0] - 1), abs(R[0][1]), abs(R[1][0]), abs(R[1][1] - 1))
        assert err < 1e-12


def test_branch_points_match_discriminant_oracle():
    rd = riley_polynomial(builtin_5_2())
    num = sympy.expand(PAPER_PHI * t**2)
    disc = sympy.discriminant(num, u)
    lead = sympy.Poly(num, u).LC()
    roots = set()
    for e in (disc, lead):
        q = sympy.Poly(sympy.expand(e), t)
        q = sympy.Poly(sympy.sqf_part(q.as_expr()), t)
        while q.degree() > 0 and q.eval(0) == 0:
            q = sympy.Poly(sympy.cancel(q.as_expr() / t), t)
        roots |= {complex(r) for r in q.nroots(n=30)}
    got = [complex(b) for b in rd.branch_points_t]
    assert len(got) == len(roots) == 8
    for r in roots:
        assert min(abs(r - g) for g in got) < 1e-20


def test_fibers_collide_at_branch_points():
    rd = riley_polynomial(builtin_5_2())
    pol = PrecisionPolicy(128)
    for b in rd.branch_points_t[:3]:
        us = [complex(r) for r, _ in fiber_roots(rd, b, pol)]
        gaps = [abs(a - c) for i, a in enumerate(us) for c in us[i + 1:]]
        assert min(gaps) < 1e-12


def test_alexander_specializations():
    d52 = alexander_specialization(riley_polynomial(builtin_5_2()))
    assert d52.terms == {-1: 2, 0: -3, 1: 2}
    d31 = alexander_specialization(riley_polynomial(two_bridge_presentation(3, 1)))
    assert d31.terms == {-1: 1, 0: -1, 1: 1}
    for d in (d52, d31):
        assert all(d.terms.get(-k) == c for k, c in d.terms.items())
    flat = RileyData(LaurentPoly2({(0, 0): 1, (0, 1): 1}), 1, {}, ())
    assert alexander_specialization(flat).terms == {0: 1}


def test_second_derivative():
    assert second_derivative_at_one(Laurent1({-1: 2, 0: -3, 1: 2})) == 4
    assert second_derivative_at_one(Laurent1({-1: 1, 0: -1, 1: 1})) == 2
    assert second_derivative_at_one(Laurent1({0: 1})) == 0
    # oracle: differentiate the polynomial symbolically
    d = 2 * t - 3 + 2 / t
    assert sympy.diff(d, t, 2).subs(t, 1) == 4
