"""Riley matrices, the Riley polynomial and its discriminant."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import sympy

from .errors import NormalizationFailure, ZeroT
from .numerics import AppComplex, PlaneCurve, PolyC, PrecisionPolicy, make_context, poly_roots
from .presentations import GroupWord, KnotPresentation

Key = tuple[int, int]


@dataclass(frozen=True)
class LaurentPoly2:
    """Integer polynomial in s^(+-1) and u, where s^2 = t; keys are (s-power, u-power)."""

    terms: Mapping[Key, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (a, b), c in self.terms.items():
            if b < 0:
                raise ValueError("u-powers must be non-negative")
            if c:
                clean[(int(a), int(b))] = int(c)
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def const(cls, c: int) -> LaurentPoly2:
        return cls({(0, 0): c})

    def __add__(self, other: LaurentPoly2) -> LaurentPoly2:
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return LaurentPoly2(out)

    def __neg__(self) -> LaurentPoly2:
        return LaurentPoly2({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: LaurentPoly2) -> LaurentPoly2:
        return self + (-other)

    def __mul__(self, other: LaurentPoly2) -> LaurentPoly2:
        out: dict[Key, int] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                k = (a1 + a2, b1 + b2)
                out[k] = out.get(k, 0) + c1 * c2
        return LaurentPoly2(out)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LaurentPoly2) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    @property
    def deg_u(self) -> int:
        return max((b for _, b in self.terms), default=0)

    def is_even_in_s(self) -> bool:
        return all(a % 2 == 0 for a, _ in self.terms)

    def t_terms(self) -> dict[Key, int]:
        """Terms keyed by (t-power, u-power); needs even s-powers."""
        if not self.is_even_in_s():
            raise ValueError("polynomial has odd powers of s = t^(1/2)")
        return {(a // 2, b): c for (a, b), c in self.terms.items()}

    def to_sympy(self, s: sympy.Symbol, u: sympy.Symbol) -> sympy.Expr:
        return sympy.Add(*[c * s**a * u**b for (a, b), c in self.terms.items()])

    @classmethod
    def from_sympy(cls, expr: sympy.Expr, s: sympy.Symbol, u: sympy.Symbol) -> LaurentPoly2:
        expr = sympy.expand(expr)
        out: dict[Key, int] = {}
        for term in sympy.Add.make_args(expr):
            c, rest = term.as_coeff_Mul()
            pw = rest.as_powers_dict()
            a, b = int(pw.get(s, 0)), int(pw.get(u, 0))
            extra = set(pw) - {s, u, sympy.Integer(1)}
            if extra or not c.is_integer:
                raise ValueError(f"non-polynomial term {term}")
            out[(a, b)] = out.get((a, b), 0) + int(c)
        return cls(out)

    def evaluate(self, s, u):
        acc = 0
        for (a, b), c in self.terms.items():
            acc += c * s**a * u**b
        return acc

    def pretty_t(self) -> str:
        parts = []
        for (a, b), c in sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            mono = []
            if a:
                mono.append(f"t^({Fraction(a, 2)})" if a % 2 else f"t^{a // 2}")
            if b:
                mono.append("u" if b == 1 else f"u^{b}")
            parts.append(f"{c:+d}" + ("*" + "*".join(mono) if mono else ""))
        return " ".join(parts) if parts else "0"


Matrix2 = tuple


def _mul2(A, B):
    return ((A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
            (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]))


def _adj(A):
    """Inverse of a determinant-one matrix."""
    return ((A[1][1], -A[0][1]), (-A[1][0], A[0][0]))


def symbolic_generators() -> dict[tuple[str, int], Matrix2]:
    P = LaurentPoly2
    s, si = P({(1, 0): 1}), P({(-1, 0): 1})
    zero = P()
    x = ((s, si), (zero, si))
    y = ((s, zero), (P({(1, 1): -1}), si))
    return {("x", 1): x, ("y", 1): y, ("x", -1): _adj(x), ("y", -1): _adj(y)}


def symbolic_word(word: GroupWord) -> Matrix2:
    gens = symbolic_generators()
    one, zero = LaurentPoly2.const(1), LaurentPoly2()
    M = ((one, zero), (zero, one))
    for g, e in word.unit_letters():
        M = _mul2(M, gens[(g, e)])
    return M


def word_matrix(word: GroupWord, gens: Mapping) -> Matrix2:
    """Ordered product of numeric generator matrices keyed by (generator, +-1)."""
    M = None
    for g, e in word.unit_letters():
        G = gens[(g, e)]
        M = G if M is None else _mul2(M, G)
    if M is None:
        one = gens[("x", 1)][0][0] * 0 + 1
        return ((one, one * 0), (one * 0, one))
    return M


def numeric_generators(ctx, s, u, eps: int = 1):
    """Riley generator matrices in ``ctx`` from a chosen square root s of t."""
    si = 1 / s
    x = ((eps * s, eps * si), (ctx.mpc(0), eps * si))
    y = ((eps * s, ctx.mpc(0)), (-eps * s * u, eps * si))
    return {("x", 1): x, ("y", 1): y, ("x", -1): _adj(x), ("y", -1): _adj(y)}


def _to_app(M, bits):
    return tuple(tuple(AppComplex.from_ctx(v, bits) for v in row) for row in M)


def _bits_of(*vals, default: int = 128) -> int:
    bits = [v.precision_bits for v in vals if isinstance(v, AppComplex)]
    return max(bits) if bits else default


def holonomy_matrices(t: Any, u: Any, eps: int, bits: int | None = None):
    """rho(x), rho(y) with the principal square root of t (arg in (-pi, pi])."""
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    bits = bits or _bits_of(t, u)
    ctx = make_context(bits)
    tt = AppComplex.from_value(t, bits).to_ctx(ctx)
    uu = AppComplex.from_value(u, bits).to_ctx(ctx)
    if tt == 0:
        raise ZeroT("t must be nonzero")
    g = numeric_generators(ctx, ctx.sqrt(tt), uu, eps)
    return _to_app(g[("x", 1)], bits), _to_app(g[("y", 1)], bits)


def evaluate_word(word: GroupWord, t: Any, u: Any, eps: int, bits: int | None = None):
    bits = bits or _bits_of(t, u)
    ctx = make_context(bits)
    tt = AppComplex.from_value(t, bits).to_ctx(ctx)
    if tt == 0:
        raise ZeroT("t must be nonzero")
    uu = AppComplex.from_value(u, bits).to_ctx(ctx)
    gens = numeric_generators(ctx, ctx.sqrt(tt), uu, eps)
    return _to_app(word_matrix(word, gens), bits)


@dataclass(frozen=True)
class Laurent1:
    """Integer Laurent polynomial in t."""

    terms: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "terms", {int(k): int(v) for k, v in sorted(self.terms.items())
                                            if v})

    def __call__(self, t):
        return sum(c * t**k for k, c in self.terms.items())

    def pretty(self) -> str:
        if not self.terms:
            return "0"
        return " ".join(f"{c:+d}" + (f"*t^{k}" if k else "") for k, c in self.terms.items())


@dataclass(frozen=True)
class RileyData:
    phi: LaurentPoly2
    deg_u: int
    disc_u: dict
    branch_points_t: tuple
    excluded_t: tuple = (0, 1)
    relator_parity: int = 0
    bits: int = 128
    branch_errors: tuple = ()

    def curve(self) -> PlaneCurve:
        return PlaneCurve(self.phi.t_terms())

    def forbidden(self) -> list[complex]:
        return [complex(b) for b in self.branch_points_t] + [0j, 1 + 0j]


_S, _U, _T = sympy.symbols("s u t")


def _phi_from_word(w: GroupWord) -> LaurentPoly2:
    W = symbolic_word(w)
    one_minus_t = LaurentPoly2({(0, 0): 1, (2, 0): -1})
    return W[0][0] + one_minus_t * W[0][1]


def _univariate_roots(coeffs: list[int], policy: PrecisionPolicy,
                      with_bounds: bool = False) -> list:
    """Roots of an integer polynomial (ascending) after exact squarefree reduction."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x)
    if poly.degree() < 1:
        return []
    sqf = sympy.Poly(sympy.sqf_part(poly.as_expr()), x)
    while sqf.degree() >= 1 and sqf.eval(0) == 0:
        sqf = sympy.Poly(sympy.cancel(sqf.as_expr() / x), x)
    if sqf.degree() < 1:
        return []
    asc = [int(c) for c in reversed(sqf.all_coeffs())]
    pc = PolyC.from_values(asc, policy.working_bits)
    if with_bounds:
        return poly_roots(pc, policy)
    return [r for r, _ in poly_roots(pc, policy)]


def riley_polynomial(presentation: KnotPresentation,
                     policy: PrecisionPolicy | None = None) -> RileyData:
    """Exact Riley polynomial phi = w11 + (1 - t) w12 with discriminant and branch points."""
    policy = policy or PrecisionPolicy()
    phi = _phi_from_word(presentation.relator_w)
    deg_u = phi.deg_u
    expr = phi.to_sympy(_S, _U)
    smin = min((a for a, _ in phi.terms), default=0)
    pol = sympy.expand(expr * _S ** (-smin))
    if deg_u >= 1:
        disc = sympy.expand(sympy.resultant(pol, sympy.diff(pol, _U), _U))
        lead = sympy.expand(sympy.Poly(pol, _U).LC())
    else:
        disc, lead = sympy.Integer(0), sympy.expand(pol)
    disc_terms = {int(m[0]): int(c) for m, c in sympy.Poly(disc, _S).terms()} if disc != 0 else {}
    even = phi.is_even_in_s() and all(k % 2 == 0 for k in disc_terms)
    points: list[AppComplex] = []
    errors: list[float] = []
    if deg_u >= 1:
        for e in (disc, lead):
            pe = sympy.Poly(e, _S)
            if pe.degree() < 1:
                continue
            asc = [0] * (pe.degree() + 1)
            for (k,), c in pe.terms():
                asc[k] = int(c)
            if even and all(c == 0 for c in asc[1::2]):
                roots = _univariate_roots(asc[::2], policy, True)
            else:
                ctx = make_context(policy.working_bits)
                # squaring s -> t scales the error by about 2|s|
                roots = [(AppComplex.from_ctx(r.to_ctx(ctx) ** 2, policy.working_bits),
                          (2 * abs(r) + e) * e)
                         for r, e in _univariate_roots(asc, policy, True)]
            for r, e in roots:
                if not any(abs(complex(r) - complex(q)) < 1e-12 for q in points):
                    points.append(r)
                    errors.append(e)
    order = sorted(range(len(points)),
                   key=lambda i: (round(abs(points[i]), 9), round(points[i].imag, 9)))
    points = [points[i] for i in order]
    errors = [errors[i] for i in order]
    return RileyData(phi, deg_u, disc_terms, tuple(points), (0, 1),
                     presentation.relator_w.syllable_length() % 2, policy.working_bits,
                     tuple(errors))


def alexander_specialization(rd: RileyData) -> Laurent1:
    """phi(t, 0) multiplied by a unit +-t^(k/2) so that it is symmetric with value 1 at t = 1."""
    base = {a: c for (a, b), c in rd.phi.terms.items() if b == 0}
    if not base:
        raise NormalizationFailure("phi(t, 0) vanishes identically")
    lo, hi = min(base), max(base)
    shift = lo + hi
    if shift % 2:
        raise NormalizationFailure("phi(t, 0) cannot be centred")
    centred = {a - shift // 2: c for a, c in base.items()}
    if any(a % 2 for a in centred):
        raise NormalizationFailure("half-integer powers of t remain after centring")
    value = sum(centred.values())
    if value not in (1, -1):
        raise NormalizationFailure(f"phi(1, 0) = {value} is not a unit")
    return Laurent1({a // 2: value * c for a, c in centred.items()})


def second_derivative_at_one(delta: Laurent1) -> Fraction | int:
    val = Fraction(sum(c * k * (k - 1) for k, c in delta.terms.items()))
    return int(val) if val.denominator == 1 else val


def phi_numeric(rd: RileyData, t, u, ctx):
    """phi evaluated at (t, u) through the principal square root of t."""
    s = ctx.sqrt(t)
    return sum(c * s**a * u**b for (a, b), c in rd.phi.terms.items())


def fiber_roots(rd: RileyData, t: AppComplex, policy: PrecisionPolicy) -> list[tuple[AppComplex, float]]:
    """All u with phi(t, u) = 0."""
    ctx = make_context(policy.working_bits)
    tt = t.to_ctx(ctx)
    s = ctx.sqrt(tt)
    coeffs = [ctx.mpc(0)] * (rd.deg_u + 1)
    for (a, b), c in rd.phi.terms.items():
        coeffs[b] += c * s**a
    pc = PolyC(tuple(AppComplex.from_ctx(c, policy.working_bits) for c in coeffs))
    return poly_roots(pc, policy)


def alexander_roots(rd: RileyData, policy: PrecisionPolicy) -> list[AppComplex]:
    """Roots of the normalized Alexander specialization (bifurcation points with u = 0)."""
    delta = alexander_specialization(rd)
    lo = min(delta.terms)
    asc = [0] * (max(delta.terms) - lo + 1)
    for k, c in delta.terms.items():
        asc[k - lo] = c
    if len(asc) < 2:
        return []
    return _univariate_roots(asc, policy)
