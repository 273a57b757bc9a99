from __future__ import annotations

import json
import math
from fractions import Fraction
from importlib import resources

import pytest

from csrs.csintegrator import (Basepoint, CSPath, CSValue, alpha_function, beta_function,
                               cs_absolute, cs_difference, evaluate_path, orientation_flip,
                               plan_paths)
from csrs.errors import DisconnectedPlan, InputError
from csrs.numerics import AppComplex, PathBuilder, PrecisionPolicy, make_context
from csrs.numerics.paths import Arc, PlanePath
from csrs.presentations import twist_knot, two_bridge_presentation
from csrs.repfinder import SurgerySpec, eliminate_apoly, find_representations, trivial_rep
from csrs.riley import riley_polynomial

POL = PrecisionPolicy.for_target("1e-15")


def _hints():
    return json.loads(resources.files("csrs").joinpath("data/hints_5_2.json").read_text("utf-8"))


def _mod1_dist(a: float, b: float) -> float:
    d = (a - b) % 1.0
    return min(d, 1 - d)


def _cs(rep, plan, pol=POL, evs=None):
    return cs_absolute(rep, plan, pol, evaluations=evs)


@pytest.fixture(scope="module")
def setup52(knot52, spec52):
    rd = riley_polynomial(knot52, POL)
    from csrs.repfinder import builtin_apoly_5_2
    reps = find_representations(knot52, rd, builtin_apoly_5_2(), spec52, POL)
    return rd, reps


# --- values and orientation -------------------------------------------------

def _val(x, err=1e-20):
    ctx = make_context(128)
    return CSValue.from_real(ctx, ctx.mpf(x), err)


def test_csvalue_validation():
    with pytest.raises(InputError):
        CSValue(AppComplex.from_value(0.1, 128), 0.6)
    with pytest.raises(InputError):
        CSValue(AppComplex.from_value(0.1, 128), 1e-3, orientation="sideways")
    assert abs(_val(-0.25).value - 0.75) < 1e-30
    assert _val(2.5).value == 0.5


def test_orientation_flip():
    assert orientation_flip(_val(0)).value == 0
    ctx = make_context(128)
    v = orientation_flip(_val(ctx.mpf(5) / 6))
    assert abs(v.value - 1 / 6) < 1e-15 and v.orientation == "flipped"
    w = _val(0.3125)
    back = orientation_flip(orientation_flip(w))
    assert back.value == w.value and back.orientation == "as_computed"
    assert back.error_bound == w.error_bound


# --- alpha, beta and single legs ---------------------------------------------

def _abelian_leg(route: PlanePath, log_start, knot, rd, n=-2):
    zero = AppComplex.from_value(0, 128)
    return CSPath(route, zero, Basepoint("trivial"), None, AppComplex.from_value(log_start, 128),
                  zero, knot, rd.curve(), n, abelian=True)


def test_alpha_on_half_turn(knot52, rd52):
    ctx = make_context(128)
    i = AppComplex.from_value(1j, 128)
    arc = Arc(AppComplex.from_value(0, 128), i, AppComplex.from_ctx(ctx.pi, 128))
    route = PlanePath((arc,), domain=(0.5, 1.5))
    leg = _abelian_leg(route, 1j * math.pi / 2, knot52, rd52)
    for s, a, da in alpha_function(leg, PrecisionPolicy(128), samples=16):
        assert abs(a - s / 4) < 1e-14
        assert abs(da - 0.25) < 1e-14


def test_abelian_leg_contributes_nothing(knot52, rd52):
    route = PathBuilder(1, 128).arc_to_point(0, 1j).build()
    leg = _abelian_leg(route, 0, knot52, rd52)
    assert all(b == 0 for _, b in beta_function(leg, POL))
    assert cs_difference(leg, POL).value == 0


def test_trivial_rep_empty_plan():
    assert cs_absolute(trivial_rep(), [], POL).value == 0


def test_basepoint_validation():
    assert Basepoint("trivial").cs() == 0
    with pytest.raises(InputError):
        Basepoint("alexander_bifurcation", AppComplex.from_value(0.7, 128),
                  AppComplex.from_value(0.5, 128))
    with pytest.raises(InputError):
        Basepoint("known_rep")
    with pytest.raises(InputError):
        Basepoint("elsewhere")


def test_path_start_must_be_on_curve(knot52, rd52):
    route = PathBuilder(0.5 + 0.5j, 128).line_to(0.6 + 0.5j).build()
    one = AppComplex.from_value(1, 128)
    with pytest.raises(InputError):
        CSPath(route, one, Basepoint("trivial"), None, one, one, knot52, rd52.curve(), -2)


# --- plans -----------------------------------------------------------------

def test_hinted_plans_end_at_reps(setup52, knot52, spec52):
    rd, reps = setup52
    plans = plan_paths(rd, reps, knot52, spec52, POL, _hints())
    forbidden = rd.forbidden()
    for rep, plan in zip(reps, plans):
        assert plan[0].basepoint.kind == "alexander_bifurcation"
        assert abs(complex(plan[-1].t_route.end) - complex(rep.t)) < 1e-30
        for leg in plan:
            assert all(leg.t_route.min_distance(z) >= leg.t_route.clearance for z in forbidden)


def test_automatic_plan_is_direct_when_unobstructed(setup52, knot52, spec52):
    rd, reps = setup52
    (plan,) = plan_paths(rd, reps[:1], knot52, spec52, POL)
    assert len(plan) == 1 and len(plan[0].t_route.segments) == 1


def test_disconnected_plans(setup52, knot52, spec52):
    rd, reps = setup52
    (plan,) = plan_paths(rd, reps[:1], knot52, spec52, POL)
    with pytest.raises(DisconnectedPlan):
        cs_absolute(reps[1], plan, POL)
    with pytest.raises(DisconnectedPlan):
        cs_absolute(reps[0], [], POL)


# --- values ------------------------------------------------------------------

def test_rho1_reroutes_agree(setup52, knot52, spec52):
    rd, reps = setup52
    base = [[0.75, math.sqrt(7) / 4]]
    straight = {"paths": [{"class_id": 1, "waypoints": []}]}
    bent = {"paths": [{"class_id": 1, "waypoints": [[0.85, 0.8]]}]}
    (p1,) = plan_paths(rd, reps[:1], knot52, spec52, POL, straight)
    (p2,) = plan_paths(rd, reps[:1], knot52, spec52, POL, bent)
    assert abs(complex(p1[0].t_route.start) - complex(*base[0])) < 1e-30
    assert len(p2[0].t_route.segments) == 2
    v1, v2 = _cs(reps[0], p1), _cs(reps[0], p2)
    assert _mod1_dist(v1.value, v2.value) <= v1.error_bound + v2.error_bound
    assert abs(orientation_flip(v1).value - 0.00176489) < 5e-9


def test_rho1_alpha_endpoint(setup52, knot52, spec52):
    rd, reps = setup52
    (plan,) = plan_paths(rd, reps[:1], knot52, spec52, POL)
    samples = alpha_function(plan[-1], POL)
    a_end = samples[-1][1]
    t = complex(reps[0].t)
    import cmath
    assert abs(cmath.exp(4j * math.pi * a_end) - t) < 1e-12


def test_rho2_value_and_diagnostics(setup52, knot52, spec52):
    rd, reps = setup52
    (plan,) = plan_paths(rd, reps[1:2], knot52, spec52, POL, _hints())
    evs = []
    v = _cs(reps[1], plan, evs=evs)
    assert abs(v.value - 5 / 6) < 1e-13
    assert abs(orientation_flip(v).value - 1 / 6) < 1e-13
    rel = evs[-1].endpoint_relation
    assert abs(rel - round(rel.real)) < 1e-12
    assert evs[-1].imag_residue < 1e-12


def test_conjugate_partner_gives_same_value(setup52, knot52, spec52):
    rd, reps = setup52
    for rep in reps[:2]:
        (a,) = plan_paths(rd, [rep], knot52, spec52, POL)
        partner = rep.partner()
        (b,) = plan_paths(rd, [partner], knot52, spec52, POL)
        va, vb = _cs(rep, a), _cs(partner, b)
        assert _mod1_dist(va.value, vb.value) <= va.error_bound + vb.error_bound


def test_error_bound_shrinks_with_precision(setup52, knot52, spec52):
    rd, reps = setup52
    (plan,) = plan_paths(rd, reps[:1], knot52, spec52, POL)
    lo = _cs(reps[0], plan)
    hi_pol = PrecisionPolicy.for_target("1e-25")
    (plan_hi,) = plan_paths(rd, reps[:1], knot52, spec52, hi_pol)
    hi = _cs(reps[0], plan_hi, hi_pol)
    assert hi.error_bound <= lo.error_bound
    assert _mod1_dist(lo.value, hi.value) <= lo.error_bound + hi.error_bound


def _trefoil_values(knot, n):
    rd = riley_polynomial(knot, POL)
    spec = SurgerySpec(n)
    reps = find_representations(knot, rd, eliminate_apoly(rd, knot), spec, POL)
    plans = plan_paths(rd, reps, knot, spec, POL)
    return [_cs(r, p) for r, p in zip(reps, plans)]


@pytest.mark.parametrize("knot,n,expected", [
    # classical values for the Poincare sphere and Sigma(2,3,7), up to orientation
    (twist_knot(1), -1, {Fraction(-1, 120), Fraction(-49, 120)}),
    (two_bridge_presentation(3, 1), 1, {Fraction(1, 120), Fraction(49, 120)}),
    (two_bridge_presentation(3, 1), -1, {Fraction(-25, 168), Fraction(-121, 168)}),
])
def test_brieskorn_oracles(knot, n, expected):
    vals = _trefoil_values(knot, n)
    assert len(vals) == len(expected)
    for q in expected:
        assert any(_mod1_dist(v.value, float(q % 1)) <= max(v.error_bound, 1e-15) for v in vals)
