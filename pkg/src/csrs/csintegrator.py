"""Chern-Simons values of surgery representations by the Kirk-Klassen path formula."""

from __future__ import annotations

import cmath
import json
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Sequence

from .errors import (ClearanceViolation, DisconnectedPlan, EigenframeSwap, ImaginaryResidue,
                     InputError, NoRouteFound, CsrsError, SchemaError, StepTooCoarse)
from .numerics import (AppComplex, PathBuilder, PlaneCurve, PlanePath, PrecisionPolicy,
                       integrate_ctx, lift_branch, make_context)
from .numerics.continuation import LiftResult
from .presentations import KnotPresentation
from .repfinder import RepPoint, SurgerySpec
from .riley import RileyData, alexander_roots, numeric_generators, word_matrix

log = logging.getLogger(__name__)

KINDS = ("trivial", "alexander_bifurcation", "known_rep")


@dataclass(frozen=True)
class Basepoint:
    kind: str
    t: AppComplex | None = None
    u: AppComplex | None = None
    known_cs: Any = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown basepoint kind {self.kind!r}")
        if self.kind == "alexander_bifurcation":
            if self.t is None or self.u is None or abs(self.u) > 1e-12:
                raise InputError("an Alexander bifurcation basepoint has u = 0")
        if self.kind == "known_rep" and (self.t is None or self.known_cs is None):
            raise InputError("a known_rep basepoint needs a location and a cs value")

    def cs(self) -> Any:
        return 0 if self.kind != "known_rep" else self.known_cs


@dataclass(frozen=True)
class CSPath:
    """One leg of a plan. ``abelian`` legs run along the reducible locus u = 0."""

    t_route: PlanePath
    u_start: AppComplex
    basepoint: Basepoint
    target: RepPoint | None
    alpha_branch_init: AppComplex
    beta_branch_init: AppComplex
    knot: KnotPresentation
    curve: PlaneCurve
    n: int
    abelian: bool = False

    def __post_init__(self):
        if self.n == 0:
            raise InputError("surgery coefficient n must be nonzero")
        if not self.abelian:
            f = self.curve.bind(make_context(128))
            ctx = make_context(128)
            val = f(self.t_route.start.to_ctx(ctx), self.u_start.to_ctx(ctx))[0]
            if abs(val) > 1e-10 * (1 + abs(self.u_start)) ** self.curve.deg_u:
                raise InputError("u_start is not on the Riley curve above the route start")


@dataclass(frozen=True)
class CSValue:
    value_mod_1: AppComplex  # real
    error_bound: float
    orientation: str = "as_computed"
    digits_certified: int = 0
    wraps: bool = False

    def __post_init__(self):
        if not 0 < self.error_bound < 0.5:
            raise InputError("error bound must lie in (0, 1/2)")
        if self.orientation not in ("as_computed", "flipped"):
            raise InputError(f"bad orientation {self.orientation!r}")

    @classmethod
    def from_real(cls, ctx, x, err: float, orientation: str = "as_computed") -> CSValue:
        v = x - ctx.floor(x)
        if v >= 1:
            v -= 1
        err = min(max(err, 2.0 ** (-ctx.prec + 4)), 0.49)
        digits = max(0, int(math.floor(-math.log10(err))))
        wraps = bool(v < err or 1 - v < err)
        return cls(AppComplex.from_ctx(ctx.mpf(v), ctx.prec), err, orientation, digits, wraps)

    @property
    def value(self) -> float:
        return self.value_mod_1.real

    def mpf(self, ctx):
        return self.value_mod_1.to_ctx(ctx).real

    def to_str(self, digits: int | None = None) -> str:
        d = digits if digits is not None else max(6, self.digits_certified + 2)
        return self.value_mod_1.to_str(d)


def orientation_flip(v: CSValue) -> CSValue:
    """cs(-Y) = -cs(Y) mod 1."""
    bits = v.value_mod_1.precision_bits
    ctx = make_context(bits)
    x = v.mpf(ctx)
    y = ctx.mpf(0) if x == 0 else 1 - x
    flag = "flipped" if v.orientation == "as_computed" else "as_computed"
    return CSValue(AppComplex.from_ctx(y, bits), v.error_bound, flag, v.digits_certified, v.wraps)


# --- per-path evaluation ---------------------------------------------------

@dataclass(frozen=True)
class PathEvaluation:
    value: CSValue
    raw_real: float
    imag_residue: float
    alpha_end: AppComplex
    beta_end: AppComplex
    u_end: AppComplex
    endpoint_relation: complex
    quad_error: float
    trace: tuple = ()


def _lambda11(ctx, knot: KnotPresentation, logt, t, u):
    """(P^-1 rho(lambda) P)_11 with P diagonalizing rho(mu), using the continued sqrt."""
    s = ctx.exp(logt / 2)
    W = word_matrix(knot.longitude, numeric_generators(ctx, s, u, 1))
    return W[0][0] - W[1][0] / (1 - t)


class _Engine:
    """Skeleton of (s, t, u, log t, beta) plus node refinement for quadrature."""

    def __init__(self, path: CSPath, policy: PrecisionPolicy, lift: LiftResult | None = None):
        self.path = path
        self.policy = policy
        ctx = self.ctx = policy.context()
        self.two_pi_i = 2 * ctx.pi * ctx.mpc(0, 1)
        self.lift = lift or lift_branch(path.curve, path.t_route, path.u_start, policy)
        self.sampler = self.lift.sampler(ctx)
        self.ev = self.sampler.ev
        S, T, U = self.sampler.s, self.sampler.t, self.sampler.u
        logt0 = path.alpha_branch_init.to_ctx(ctx)
        beta0 = path.beta_branch_init.to_ctx(ctx)
        if abs(ctx.exp(logt0) - T[0]) > ctx.ldexp(1, -policy.working_bits // 2) * 16:
            raise InputError("alpha branch does not match the route start")
        self.S, self.T, self.U = S, T, U
        self.LT = [logt0]
        self.LAM = [_lambda11(ctx, path.knot, logt0, T[0], U[0])]
        self.B = [beta0]
        for k in range(1, len(S)):
            self._extend(k)
        self.beta0 = beta0

    def _check_frame(self, t):
        if abs(t - 1) < 1e-8:
            raise EigenframeSwap("meridian eigenvalues coincide (t near 1)")

    def _extend(self, k):
        ctx = self.ctx
        t = self.T[k]
        self._check_frame(t)
        q = t / self.T[k - 1]
        if q.real <= 0:
            raise StepTooCoarse("log t jumps between skeleton points")
        lt = self.LT[-1] + ctx.log(q)
        lam = _lambda11(ctx, self.path.knot, lt, t, self.U[k])
        r = lam / self.LAM[-1]
        if r.real <= 0:
            raise StepTooCoarse("longitude eigenvalue turns too fast between skeleton points")
        self.B.append(self.B[-1] + ctx.log(r) / self.two_pi_i)
        self.LT.append(lt)
        self.LAM.append(lam)

    def node(self, s, piece=None):
        """(t, u, log t, beta) at parameter s."""
        ctx = self.ctx
        t, u, k = self.sampler(s, piece)
        q = t / self.T[k]
        lt = self.LT[k] + ctx.log(q)
        lam = _lambda11(ctx, self.path.knot, lt, t, u)
        beta = self.B[k] + ctx.log(lam / self.LAM[k]) / self.two_pi_i
        return t, u, lt, beta

    def integrand(self, piece):
        ctx = self.ctx
        four_pi_i = 2 * self.two_pi_i

        def f(s):
            t, u, lt, beta = self.node(s, piece)
            return 2 * beta * self.ev.deriv(s, piece) / (t * four_pi_i)
        return f


def _abelian_evaluation(path: CSPath, policy: PrecisionPolicy) -> PathEvaluation:
    ctx = policy.context()
    ev = path.t_route.evaluator(ctx)
    lt = path.alpha_branch_init.to_ctx(ctx)
    prev = ev.point(ev.bps[0], 0)
    for k in range(len(ev.pieces)):
        for j in range(1, 65):
            s = ev.bps[k] + (ev.bps[k + 1] - ev.bps[k]) * j / 64
            t = ev.point(s, k)
            lt += ctx.log(t / prev)
            prev = t
    zero = AppComplex.from_value(0, policy.working_bits)
    val = CSValue.from_real(ctx, ctx.mpf(0), 2.0 ** (-policy.working_bits + 4))
    return PathEvaluation(val, 0.0, 0.0, AppComplex.from_ctx(lt / (4j * ctx.pi), ctx.prec), zero,
                          zero, complex(2 * lt / (4j * ctx.pi)), 0.0)


def evaluate_path(path: CSPath, policy: PrecisionPolicy, tolerance: float | None = None,
                  require_real: bool = True, with_trace: bool = False) -> PathEvaluation:
    """Kirk-Klassen sum 2 int beta alpha' ds + n (beta_1^2 - beta_0^2) along one leg."""
    if path.abelian:
        return _abelian_evaluation(path, policy)
    tol = tolerance if tolerance is not None else max(1e-6 * 2.0 ** ((128 - policy.working_bits) / 2),
                                                      10 * policy.target)
    eng = _Engine(path, policy)
    ctx = eng.ctx
    total = ctx.mpc(0)
    qerr = ctx.mpf(0)
    bps = eng.ev.bps
    target = policy.target_mpf(ctx) / 4
    for k in range(len(eng.ev.pieces)):
        a, b = bps[k], bps[k + 1]
        share = target * (b - a) / (bps[-1] - bps[0])
        val, err = integrate_ctx(ctx, eng.integrand(k), a, b, share, min_panels=4)
        total += val
        qerr += err
    beta1 = eng.B[-1]
    total += path.n * (beta1**2 - eng.beta0**2)
    imag = abs(total.imag)
    both_su2 = require_real and _is_su2_like(eng.T[0], eng.U[0]) and _is_su2_like(eng.T[-1], eng.U[-1])
    if both_su2 and imag > tol:
        raise ImaginaryResidue(f"imaginary part {float(imag):.3g} exceeds tolerance {tol:.3g}")
    lt1 = eng.LT[-1]
    alpha1 = lt1 / (2 * eng.two_pi_i)
    rel = 2 * alpha1 + 2 * path.n * beta1
    err = float(qerr) + 2.0 ** (-policy.working_bits + 24) * (1 + float(abs(total)))
    value = CSValue.from_real(ctx, total.real, err)
    trace = ()
    if with_trace:
        trace = tuple((float(s), complex(t), complex(u), complex(lt / (2 * eng.two_pi_i)),
                       complex(bv)) for s, t, u, lt, bv in zip(eng.S, eng.T, eng.U, eng.LT, eng.B))
    bits = policy.working_bits
    return PathEvaluation(value, float(total.real), float(imag), AppComplex.from_ctx(alpha1, bits),
                          AppComplex.from_ctx(beta1, bits), AppComplex.from_ctx(eng.U[-1], bits),
                          complex(rel), float(qerr), trace)


def _is_su2_like(t, u) -> bool:
    return abs(abs(t) - 1) < 1e-9 and abs(u.imag) < 1e-9


def alpha_function(path: CSPath, policy: PrecisionPolicy, samples: int = 32):
    """Samples (s, alpha, alpha') with alpha = (1/4 pi i) log gamma, continued."""
    ctx = policy.context()
    ev = path.t_route.evaluator(ctx)
    four_pi_i = 4 * ctx.pi * ctx.mpc(0, 1)
    lt = path.alpha_branch_init.to_ctx(ctx)
    prev = ev.point(ev.bps[0], 0)
    out = []
    for k in range(len(ev.pieces)):
        a, b = ev.bps[k], ev.bps[k + 1]
        for j in range(samples + 1):
            if k and not j:
                continue
            s = a + (b - a) * j / samples
            t = ev.point(s, k)
            q = t / prev
            if q.real <= 0:
                raise StepTooCoarse("increase alpha sampling")
            lt += ctx.log(q)
            prev = t
            out.append((float(s), complex(lt / four_pi_i), complex(ev.deriv(s, k) / (t * four_pi_i))))
    return out


def beta_function(path: CSPath, policy: PrecisionPolicy, lift: LiftResult | None = None):
    """Samples (s, beta) along the lift skeleton, continued from beta_branch_init."""
    if path.abelian:
        return [(0.0, 0j), (1.0, 0j)]
    eng = _Engine(path, policy, lift)
    return [(float(s), complex(b)) for s, b in zip(eng.S, eng.B)]


def cs_difference(path: CSPath, policy: PrecisionPolicy, tolerance: float | None = None) -> CSValue:
    """cs(end) - cs(start) mod 1 along one leg."""
    return evaluate_path(path, policy, tolerance).value


def cs_absolute(rep: RepPoint, plan: Sequence[CSPath], policy: PrecisionPolicy,
                tolerance: float | None = None,
                evaluations: list | None = None) -> CSValue:
    """Telescoped cs(rep) along a chain of legs starting at a basepoint.

    An Alexander bifurcation basepoint is normalized to the trivial
    representation: the abelian side has beta = 0 and contributes nothing.
    """
    ctx = policy.context()
    if not plan:
        if rep.trivial:
            return CSValue.from_real(ctx, ctx.mpf(0), 2.0 ** (-policy.working_bits + 4))
        raise DisconnectedPlan("empty plan for a non-trivial representation")
    base = plan[0].basepoint
    if base.kind == "known_rep":
        known = base.known_cs
        total = ctx.convert(known.value_mod_1.to_ctx(ctx).real if isinstance(known, CSValue)
                            else known)
        err = known.error_bound if isinstance(known, CSValue) else 0.0
    else:
        total = ctx.mpf(0)
        err = 0.0
    tol_join = 1e-8
    for prev, cur in zip(plan, plan[1:]):
        if abs(complex(prev.t_route.end) - complex(cur.t_route.start)) > tol_join:
            raise DisconnectedPlan("consecutive legs do not share an endpoint in t")
    for leg in plan:
        ev = evaluate_path(leg, policy, tolerance)
        if evaluations is not None:
            evaluations.append(ev)
        total += ev.value.mpf(ctx)
        err += ev.value.error_bound
        if not leg.abelian and leg is not plan[-1]:
            pass
    last = plan[-1]
    if not rep.trivial:
        if abs(complex(last.t_route.end) - complex(rep.t)) > tol_join:
            raise DisconnectedPlan("plan does not end at the representation's t")
        if evaluations is not None and abs(complex(evaluations[-1].u_end) - complex(rep.u)) > 1e-6:
            raise DisconnectedPlan("plan ends on the wrong branch of the Riley curve")
    return CSValue.from_real(ctx, total, err)


# --- planning --------------------------------------------------------------

def default_clearance(policy: PrecisionPolicy) -> float:
    return 1e-3 * 128 / policy.working_bits


@dataclass
class _PlanContext:
    rd: RileyData
    knot: KnotPresentation
    spec: SurgerySpec
    policy: PrecisionPolicy
    forbidden: list
    clearance: float
    bases: list


def _log_init(t: AppComplex) -> AppComplex:
    bits = t.precision_bits
    ctx = make_context(bits)
    return AppComplex.from_ctx(ctx.log(t.to_ctx(ctx)), bits)


def _build(pc: _PlanContext, start: AppComplex, ops) -> PlanePath | None:
    b = PathBuilder(start, pc.policy.working_bits)
    for op, *args in ops:
        getattr(b, op)(*args)
    try:
        return b.build(pc.clearance, pc.forbidden)
    except ClearanceViolation:
        return None


def _lasso_ops(pc: _PlanContext, t0: complex, bp: complex, turns: int):
    others = [abs(bp - z) for z in pc.forbidden if abs(bp - z) > 1e-9]
    radius = min(0.1, 0.4 * min(others)) if others else 0.1
    d = (t0 - bp) / abs(t0 - bp)
    p = bp + radius * d
    return [("line_to", p), ("arc_about", bp, 2 * math.pi * turns), ("line_to", t0)]


def _main_routes(pc: _PlanContext, t0: complex, t1: AppComplex):
    """Candidate op-lists from t0 to t1: unit arc, offset arcs, straight line."""
    routes = []
    tt1 = complex(t1)
    th1 = cmath.phase(tt1)
    on_circle = abs(abs(t0) - 1) < 1e-9 and abs(abs(tt1) - 1) < 1e-9
    if on_circle:
        routes.append([("arc_to_point", 0, t1), ("line_to", t1)])
    for r in (1.1, 0.9, 1.2, 0.8, 1.35, 0.7):
        p0 = r * t0 / abs(t0)
        p1 = r * tt1 / abs(tt1)
        routes.append([("line_to", p0), ("arc_to_angle", 0, cmath.phase(p1)), ("line_to", t1)])
    routes.append([("line_to", t1)])
    for side in (1, -1):
        routes.append(_detoured_line(pc, t0, tt1, side) + [("line_to", t1)])
    return routes


def _detoured_line(pc: _PlanContext, a: complex, b: complex, side: int):
    """Straight segment a->b with semicircular detours around forbidden points near it."""
    d = b - a
    L = abs(d)
    if L == 0:
        return []
    e = d / L
    radius = max(3 * pc.clearance, 0.05)
    hits = []
    for z in pc.forbidden:
        tau = ((z - a) * e.conjugate()).real
        if 0 < tau < L and abs(z - (a + tau * e)) < radius:
            hits.append((tau, z))
    ops = []
    for tau, z in sorted(hits):
        entry = z - radius * e
        ops.append(("line_to", entry))
        ops.append(("arc_about", z, -side * math.pi))
    return ops


def _quick_lift(pc: _PlanContext, path: PlanePath, u0) -> complex | None:
    quick = PrecisionPolicy(96, "1e-20", 0)
    try:
        return complex(lift_branch(pc.rd.curve(), path, u0, quick).endpoint)
    except CsrsError:
        return None


def _legs_for_route(pc, base: Basepoint, path: PlanePath, rep: RepPoint, prefix=()):
    bits = pc.policy.working_bits
    zero = AppComplex.from_value(0, bits)
    leg = CSPath(path, zero, base, rep, _log_init(base.t), zero, pc.knot, pc.rd.curve(),
                 pc.spec.n)
    return list(prefix) + [leg]


def _abelian_prefix(pc: _PlanContext, base: Basepoint) -> list[CSPath]:
    bits = pc.policy.working_bits
    one = AppComplex.from_value(1, bits)
    b = PathBuilder(one, bits).arc_to_point(0, base.t).line_to(base.t)
    route = b.build(pc.clearance, [z for z in pc.forbidden if abs(z - 1) > 1e-9 and abs(z) > 1e-9])
    zero = AppComplex.from_value(0, bits)
    triv = Basepoint("trivial")
    return [CSPath(route, zero, triv, None, zero, zero, pc.knot, pc.rd.curve(), pc.spec.n,
                   abelian=True)]


def _plan_one(pc: _PlanContext, rep: RepPoint, max_lassos: int = 6) -> list[CSPath]:
    target_u = complex(rep.u)
    tt1 = complex(rep.t)
    bases = sorted(pc.bases, key=lambda b: (abs(complex(b.t) - tt1)))
    zero = AppComplex.from_value(0, pc.policy.working_bits)
    for base in bases:
        t0 = complex(base.t)
        mains = _main_routes(pc, t0, rep.t)
        # plain routes first, then single lassos around nearby branch points
        bps = sorted((z for z in pc.forbidden if abs(z) > 1e-9 and abs(z - 1) > 1e-9),
                     key=lambda z: abs(z - t0))[:max_lassos]
        prefixes = [[]] + [_lasso_ops(pc, t0, z, k) for z in bps for k in (1, -1)]
        for pre in prefixes:
            for main in mains:
                path = _build(pc, base.t, pre + main)
                if path is None:
                    continue
                u1 = _quick_lift(pc, path, zero)
                if u1 is not None and abs(u1 - target_u) < 1e-6 * (1 + abs(target_u)):
                    return _legs_for_route(pc, base, path, rep)
    raise NoRouteFound(f"no admissible route reaches class {rep.class_id}")


def _plan_context(rd, knot, spec, policy) -> _PlanContext:
    forbidden = rd.forbidden()
    bases = [Basepoint("alexander_bifurcation", t, AppComplex.from_value(0, policy.working_bits))
             for t in alexander_roots(rd, policy) if abs(complex(t) - 1) > 1e-9]
    return _PlanContext(rd, knot, spec, policy, forbidden, default_clearance(policy), bases)


def plan_paths(rd: RileyData, reps: Sequence[RepPoint], knot: KnotPresentation,
               spec: SurgerySpec, policy: PrecisionPolicy,
               hints: dict | str | None = None) -> list[list[CSPath]]:
    """One chain of legs per representation, starting at an Alexander bifurcation point.

    Routes are accepted only when a low-precision lift of u = 0 along them
    lands on the representation's u. ``hints`` (waypoint schema) override
    the automatic search for the classes they mention.
    """
    pc = _plan_context(rd, knot, spec, policy)
    if not pc.bases:
        raise NoRouteFound("the Alexander specialization has no roots to start from")
    hinted = _parse_hints(hints) if hints is not None else {}
    plans = []
    for rep in reps:
        if rep.class_id in hinted:
            plans.append(_plan_from_hint(pc, rep, hinted[rep.class_id]))
        else:
            plans.append(_plan_one(pc, rep))
    return plans


def _parse_hints(hints) -> dict:
    if isinstance(hints, str):
        try:
            hints = json.loads(hints)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid hint JSON: {exc}") from exc
    if not isinstance(hints, dict) or not isinstance(hints.get("paths"), list):
        raise SchemaError("hint file needs a 'paths' list")
    out = {}
    for item in hints["paths"]:
        if not isinstance(item, dict) or "waypoints" not in item:
            raise SchemaError("each hint needs 'waypoints'")
        cid = item.get("class_id", "auto")
        if cid == "auto":
            continue
        if not isinstance(cid, int):
            raise SchemaError("class_id must be an integer or 'auto'")
        wps = item["waypoints"]
        if not all(isinstance(w, list) and len(w) == 2 for w in wps):
            raise SchemaError("waypoints must be [re, im] pairs")
        kind = item.get("basepoint", "alexander")
        if kind not in ("alexander", "trivial"):
            raise SchemaError("basepoint must be 'alexander' or 'trivial'")
        out[cid] = (tuple(complex(a, b) for a, b in wps), kind)
    return out


def _plan_from_hint(pc: _PlanContext, rep: RepPoint, hint) -> list[CSPath]:
    wps, kind = hint
    first = wps[0] if wps else complex(rep.t)
    base = min(pc.bases, key=lambda b: abs(complex(b.t) - first))
    ops = [("line_to", w) for w in wps] + [("line_to", rep.t)]
    path = _build(pc, base.t, ops)
    if path is None:
        raise NoRouteFound(f"hint route for class {rep.class_id} violates the clearance")
    u1 = _quick_lift(pc, path, AppComplex.from_value(0, pc.policy.working_bits))
    if u1 is None or abs(u1 - complex(rep.u)) > 1e-6 * (1 + abs(complex(rep.u))):
        raise NoRouteFound(f"hint route for class {rep.class_id} ends on the wrong branch")
    prefix = _abelian_prefix(pc, base) if kind == "trivial" else []
    if prefix:
        base = prefix[0].basepoint
    legs = _legs_for_route(pc, base, path, rep, prefix)
    return legs


def route_waypoints(path: PlanePath, arc_step: float = math.pi / 8) -> list[list[float]]:
    """Polyline approximation of a route (interior points only), for hint files."""
    pts = []
    for seg in path.segments:
        if hasattr(seg, "sweep"):
            c = complex(seg.center)
            v = complex(seg.start) - c
            sw = seg.sweep.real
            n = max(2, int(math.ceil(abs(sw) / arc_step)))
            for j in range(1, n + 1):
                pts.append(c + v * cmath.exp(1j * sw * j / n))
        else:
            pts.append(complex(seg.end))
    pts = pts[:-1]
    return [[round(z.real, 6), round(z.imag, 6)] for z in pts]
