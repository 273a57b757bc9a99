"""SU(2) representations of 1/n-surgeries from the A-polynomial and the Riley curve."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Mapping

import sympy

from .errors import (AmbiguousClass, EliminationOverflow, InputError, PreconditionFailed,
                     RankAmbiguous)
from .numerics import AppComplex, PolyC, PrecisionPolicy, make_context, poly_roots
from .presentations import GroupWord, KnotPresentation, X
from .riley import (RileyData, fiber_roots, numeric_generators, symbolic_word, word_matrix,
                    _mul2, _adj)

log = logging.getLogger(__name__)

MAX_ELIM_DEG_U = 12
MAX_ELIM_WORD = 400
MAX_ELIM_TERMS = 20000


@dataclass(frozen=True)
class APoly:
    terms: Mapping[tuple[int, int], int]
    source: str = "builtin"

    def __post_init__(self):
        clean = {(int(a), int(b)): int(c) for (a, b), c in self.terms.items() if c}
        if not clean:
            raise InputError("A-polynomial is identically zero")
        if self.source not in ("builtin", "user-supplied", "eliminated"):
            raise InputError(f"unknown A-polynomial source {self.source!r}")
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def coefficient(self, l_pow: int, m_pow: int) -> int:
        return self.terms.get((l_pow, m_pow), 0)

    def to_sympy(self, L: sympy.Symbol, M: sympy.Symbol) -> sympy.Expr:
        return sympy.Add(*[c * L**a * M**b for (a, b), c in self.terms.items()])


@dataclass(frozen=True)
class SurgerySpec:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n == 0:
            raise InputError("surgery coefficient 1/n needs a nonzero integer n")

    @classmethod
    def parse(cls, text: str) -> SurgerySpec:
        """Parse ``"p/q"`` with p = +-1 into 1/n surgery, n = q / p."""
        try:
            p, q = (int(v) for v in str(text).split("/"))
        except ValueError as exc:
            raise InputError(f"surgery must look like 1/n or -1/n, got {text!r}") from exc
        if p not in (1, -1) or q == 0:
            raise InputError(f"only 1/n surgeries are supported, got {text!r}")
        return cls(q * p)


@dataclass(frozen=True)
class RepPoint:
    t: AppComplex
    u: AppComplex
    eps: int
    residual_phi: float
    residual_surgery: float
    is_su2: bool
    is_nondegenerate: bool
    class_id: int
    t_error: float = 0.0
    u_error: float = 0.0
    trivial: bool = False

    def partner(self) -> RepPoint:
        """The conjugate class member (1/t, u, eps)."""
        bits = self.t.precision_bits
        ctx = make_context(bits)
        tinv = AppComplex.from_ctx(1 / self.t.to_ctx(ctx), bits)
        return replace(self, t=tinv)


def trivial_rep(bits: int = 128) -> RepPoint:
    one = AppComplex.from_value(1, bits)
    zero = AppComplex.from_value(0, bits)
    return RepPoint(one, zero, 1, 0.0, 0.0, True, True, 0, trivial=True)


def builtin_apoly_5_2() -> APoly:
    terms = {(3, 0): -1, (0, 14): -1}
    for m, c in ((0, 1), (2, -2), (4, -2), (8, 1), (10, -1)):
        terms[(2, m)] = c
    for m, c in ((0, -1), (2, 1), (6, -2), (8, -2), (10, 1)):
        terms[(1, m + 4)] = c
    return APoly(terms, "builtin")


_L, _M, _U = sympy.symbols("L M u")


def eliminate_apoly(rd: RileyData, presentation: KnotPresentation) -> APoly:
    """Eliminate u between phi and L = (rho(lambda))_11 with M = s = t^(1/2).

    On the Riley curve rho(lambda) is upper triangular in the Riley frame,
    so its (1,1) entry is the longitude eigenvalue. The resultant in u is
    reduced to its squarefree part with monomial factors removed.
    """
    if rd.deg_u < 1:
        raise EliminationOverflow("degenerate Riley polynomial (no u-dependence)")
    if rd.deg_u > MAX_ELIM_DEG_U or presentation.longitude.syllable_length() > MAX_ELIM_WORD:
        raise EliminationOverflow("presentation too large for exact elimination")
    lam11 = symbolic_word(presentation.longitude)[0][0]
    phi = rd.phi.to_sympy(_M, _U)
    lam = lam11.to_sympy(_M, _U)
    kp = -min(a for a, _ in rd.phi.terms)
    kl = -min((a for a, _ in lam11.terms), default=0)
    phi_p = sympy.Poly(sympy.expand(phi * _M**kp), _U)
    lam_p = sympy.Poly(sympy.expand(lam * _M**kl), _U)
    if phi_p.LC().is_number and abs(phi_p.LC()) == 1:
        lam_p = lam_p.rem(phi_p)
    cond = sympy.Poly(sympy.expand(_L * _M**kl - lam_p.as_expr()), _U)
    res = sympy.expand(sympy.resultant(phi_p.as_expr(), cond.as_expr(), _U))
    if res == 0:
        raise EliminationOverflow("resultant vanished identically")
    poly = sympy.Poly(res, _L, _M)
    if len(poly.terms()) > MAX_ELIM_TERMS:
        raise EliminationOverflow("elimination produced too many terms")
    sqf = sympy.Poly(sympy.sqf_part(poly.as_expr()), _L, _M)
    # strip monomial factors L^a M^b
    terms = sqf.terms()
    amin = min(m[0] for m, _ in terms)
    bmin = min(m[1] for m, _ in terms)
    out = {(m[0] - amin, m[1] - bmin): int(c) for m, c in terms}
    _, prim = sympy.Poly(sympy.Add(*[c * _L**a * _M**b for (a, b), c in out.items()]),
                         _L, _M).primitive()
    lc = prim.terms()[0][1]
    sign = -1 if lc < 0 else 1
    return APoly({m: sign * int(c) for m, c in prim.terms()}, "eliminated")


def default_tolerance(policy: PrecisionPolicy) -> float:
    """1e-6 at 128 bits, tightened as the working precision grows."""
    return max(1e-6 * 2.0 ** ((128 - policy.working_bits) / 2), 10 * policy.target)


def surgery_parameter_candidates(A: APoly, spec: SurgerySpec, policy: PrecisionPolicy,
                                 tolerance: float | None = None) -> list[AppComplex]:
    """Roots of A(L, L^-n) mapped to t = L^(-2n), deduplicated, without t = 0, 1."""
    tol = default_tolerance(policy) if tolerance is None else tolerance
    n = spec.n
    exps: dict[int, int] = {}
    for (a, b), c in A.terms.items():
        e = a - n * b
        exps[e] = exps.get(e, 0) + c
    exps = {e: c for e, c in exps.items() if c}
    if not exps:
        raise InputError("A(L, L^-n) vanishes identically")
    lo = min(exps)
    x = sympy.Symbol("x")
    expr = sympy.Add(*[c * x ** (e - lo) for e, c in exps.items()])
    poly = sympy.Poly(sympy.sqf_part(expr), x)
    while poly.degree() >= 1 and poly.eval(0) == 0:
        poly = sympy.Poly(sympy.cancel(poly.as_expr() / x), x)
    if poly.degree() < 1:
        return []
    asc = [int(c) for c in reversed(poly.all_coeffs())]
    roots = poly_roots(PolyC.from_values(asc, policy.working_bits), policy)
    bits = max(r.precision_bits for r, _ in roots)
    ctx = make_context(bits)
    out: list[AppComplex] = []
    for r, _ in roots:
        L = r.to_ctx(ctx)
        t = L ** (-2 * n)
        if abs(t) <= tol or abs(t - 1) <= tol:
            continue
        if any(abs(t - q.to_ctx(ctx)) <= tol * max(1, abs(t)) for q in out):
            continue
        out.append(AppComplex.from_ctx(t, bits))
    return out


def _surgery_matrix(ctx, pres: KnotPresentation, s, u, eps: int, n: int):
    gens = numeric_generators(ctx, s, u, eps)
    lam = word_matrix(pres.longitude, gens)
    lam_n = lam if n > 0 else _adj(lam)
    M = gens[("x", 1)]
    for _ in range(abs(n)):
        M = _mul2(M, lam_n)
    return M


def _residual_surgery(ctx, pres, s, u, eps, n):
    M = _surgery_matrix(ctx, pres, s, u, eps, n)
    return max(abs(M[0][0] - 1), abs(M[0][1]), abs(M[1][0]), abs(M[1][1] - 1))


def _phi_at(ctx, rd: RileyData, s, u):
    return sum(c * s**a * u**b for (a, b), c in rd.phi.terms.items())


def _dphi_du(ctx, rd: RileyData, s, u):
    return sum(b * c * s**a * u ** (b - 1) for (a, b), c in rd.phi.terms.items() if b)


def is_su2_point(t: complex, u: complex, tol: float) -> bool:
    if abs(abs(t) - 1) > tol or abs(t - 1) <= tol or abs(u.imag) > tol:
        return False
    lo = (t + 1 / t - 2).real
    return lo < u.real < 0


def find_representations(presentation: KnotPresentation, rd: RileyData, A: APoly,
                         spec: SurgerySpec, policy: PrecisionPolicy,
                         tolerance: float | None = None) -> list[RepPoint]:
    """One RepPoint per SU(2) conjugacy class, sorted by arg t, with Im t > 0 representatives."""
    tol = default_tolerance(policy) if tolerance is None else tolerance
    cands = surgery_parameter_candidates(A, spec, policy, tol)
    found: list[tuple] = []
    for t in cands:
        bits = t.precision_bits
        ctx = make_context(bits)
        tc = t.to_ctx(ctx)
        s = ctx.sqrt(tc)
        for u, uerr in fiber_roots(rd, t, PrecisionPolicy(bits, policy.target_abs_error,
                                                          policy.max_escalations)):
            uc = u.to_ctx(ctx)
            # Newton polish in u
            for _ in range(8):
                d = _dphi_du(ctx, rd, s, uc)
                if d == 0:
                    break
                step = _phi_at(ctx, rd, s, uc) / d
                uc -= step
                if abs(step) <= ctx.ldexp(1, -bits + 8) * (1 + abs(uc)):
                    break
            for eps in (1, -1):
                rs = _residual_surgery(ctx, presentation, s, uc, eps, spec.n)
                if rs > tol:
                    rm = _surgery_matrix(ctx, presentation, s, uc, eps, spec.n)
                    if abs(rm[0][0] + 1) <= tol and abs(rm[1][1] + 1) <= tol:
                        log.debug("point satisfies the -I relation only; not a representation")
                    continue
                rp = abs(_phi_at(ctx, rd, s, uc))
                found.append((tc, uc, eps, float(rp), float(rs), ctx, bits, uerr))
    reps: list[RepPoint] = []
    keys: list[tuple[complex, complex, int]] = []
    for tc, uc, eps, rp, rs, ctx, bits, uerr in found:
        tz, uz = complex(tc), complex(uc)
        if not is_su2_point(tz, uz, tol):
            continue
        if tz.imag < 0:
            continue  # represented by its partner 1/t
        dup = False
        for k, (t2, u2, e2) in enumerate(keys):
            dist = max(abs(tz - t2), abs(uz - u2))
            if e2 == eps and dist <= tol:
                dup = True
            elif e2 == eps and dist <= 1000 * tol:
                raise AmbiguousClass(f"points at t={tz:.6g} and t={t2:.6g} nearly coincide")
        if dup:
            continue
        keys.append((tz, uz, eps))
        reps.append(RepPoint(AppComplex.from_ctx(tc, bits), AppComplex.from_ctx(uc, bits), eps,
                             rp, rs, True, False, 0,
                             t_error=2.0 ** (-bits + 16), u_error=max(2.0 ** (-bits + 16),
                                                                      min(uerr, tol))))
    import cmath
    reps.sort(key=lambda r: (round(cmath.phase(complex(r.t)), 9), round(r.u.real, 9)))
    out = []
    for i, r in enumerate(reps, start=1):
        r = replace(r, class_id=i)
        try:
            nd = nondegeneracy_check(r, presentation, spec, PrecisionPolicy(
                r.t.precision_bits, policy.target_abs_error, policy.max_escalations), tol)
        except RankAmbiguous:
            nd = False
        out.append(replace(r, is_nondegenerate=nd))
    return out


# --- nondegeneracy -------------------------------------------------------

def _ad(ctx, g):
    """3x3 matrix of Ad(g) on sl2 in the basis H, E, F."""
    gi = _adj(g)
    basis = (((1, 0), (0, -1)), ((0, 1), (0, 0)), ((0, 0), (1, 0)))
    cols = []
    for B in basis:
        V = _mul2(_mul2(g, B), gi)
        cols.append((V[0][0], V[0][1], V[1][0]))
    return ctx.matrix([[cols[j][i] for j in range(3)] for i in range(3)])


def _fox_blocks(ctx, word: GroupWord, gens, ad_cache) -> dict[str, object]:
    """Fox derivatives of ``word`` under Ad, one 3x3 block per generator."""
    one = ((ctx.mpc(1), ctx.mpc(0)), (ctx.mpc(0), ctx.mpc(1)))
    prefix = one
    out = {"x": ctx.zeros(3, 3), "y": ctx.zeros(3, 3)}
    for g, e in word.unit_letters():
        G = gens[(g, e)]
        if e > 0:
            out[g] += _ad(ctx, prefix)
            prefix = _mul2(prefix, G)
        else:
            prefix = _mul2(prefix, G)
            out[g] -= _ad(ctx, prefix)
    return out


def _rank(ctx, M, zero_cut, tol):
    sv = ctx.svd_c(M, compute_uv=False)
    vals = [abs(v) for v in sv]
    scale = max(vals + [ctx.mpf(1)])
    rank = 0
    for v in vals:
        if v <= zero_cut * scale:
            continue
        if v < tol * scale:
            raise RankAmbiguous(f"singular value {ctx.nstr(v, 5)} is too close to the cut")
        rank += 1
    return rank


def twisted_h1_dimension(ctx, gens, presentation: KnotPresentation, n: int,
                         zero_cut, tol) -> int:
    w = presentation.relator_w
    r1 = w * X * w.inverse() * GroupWord((("y", -1),))
    r2 = X * presentation.longitude ** n
    blocks = [_fox_blocks(ctx, r, gens, None) for r in (r1, r2)]
    d1 = ctx.zeros(6, 6)
    for i, b in enumerate(blocks):
        for j, g in enumerate(("x", "y")):
            for p in range(3):
                for q in range(3):
                    d1[3 * i + p, 3 * j + q] = b[g][p, q]
    d0 = ctx.zeros(6, 3)
    for j, g in enumerate(("x", "y")):
        A = _ad(ctx, gens[(g, 1)])
        for p in range(3):
            for q in range(3):
                d0[3 * j + p, q] = A[p, q] - (1 if p == q else 0)
    return 6 - _rank(ctx, d1, zero_cut, tol) - _rank(ctx, d0, zero_cut, tol)


def nondegeneracy_check(rep: RepPoint, presentation: KnotPresentation, spec: SurgerySpec,
                        policy: PrecisionPolicy | None = None,
                        tolerance: float | None = None) -> bool:
    """True iff H^1 of the surgered manifold with Ad(rho) coefficients vanishes."""
    bits = policy.working_bits if policy else max(rep.t.precision_bits, 128)
    policy = policy or PrecisionPolicy(bits)
    tol = default_tolerance(policy) if tolerance is None else tolerance
    ctx = make_context(bits)
    zero_cut = ctx.ldexp(1, -bits // 2)
    if rep.trivial:
        I = ((ctx.mpc(1), ctx.mpc(0)), (ctx.mpc(0), ctx.mpc(1)))
        gens = {("x", 1): I, ("y", 1): I, ("x", -1): I, ("y", -1): I}
    else:
        tc, uc = rep.t.to_ctx(ctx), rep.u.to_ctx(ctx)
        if tc == 0:
            raise PreconditionFailed("t = 0")
        s = ctx.sqrt(tc)
        rs = _residual_surgery(ctx, presentation, s, uc, rep.eps, spec.n)
        if rs > tol:
            raise PreconditionFailed(
                f"surgery relation fails (residual {float(rs):.3g}); not a representation "
                "of the surgered manifold")
        gens = numeric_generators(ctx, s, uc, rep.eps)
    return twisted_h1_dimension(ctx, gens, presentation, spec.n, zero_cut, tol) == 0


@dataclass(frozen=True)
class CassonVerdict:
    passed: bool
    casson_lambda: object
    expected_classes: object
    found_classes: int


def casson_count_check(delta2_at_1, spec: SurgerySpec, found_classes: int) -> CassonVerdict:
    """Compare the class count with 2|lambda|, lambda = n * Delta''(1) / 2."""
    from fractions import Fraction
    lam = Fraction(spec.n) * Fraction(delta2_at_1) / 2
    lam_out = int(lam) if lam.denominator == 1 else lam
    expected = 2 * abs(lam)
    exp_out = int(expected) if expected.denominator == 1 else expected
    return CassonVerdict(expected == found_classes, lam_out, exp_out, found_classes)
