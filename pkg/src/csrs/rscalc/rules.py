"""Deduction rules for r_s, s_infty and d_infty.

Value-level functions take and return RValue objects and never touch a store.
The Ledger applies them to a FactStore and records a replayable trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from ..errors import (
    HypothesisUnmet,
    InconsistentStore,
    IntervalOverlap,
    ParameterMismatch,
    SpectrumIncomplete,
    UnassertedRSign,
)
from .store import REPLAY, Fact, FactStore
from .values import (
    S3,
    ManifoldExpr,
    Provenance,
    RValue,
    Seifert,
    rmin,
)

INF = math.inf
ALL = "all"  # s-parameter tag for facts that hold at every s


# --- value-level rules -------------------------------------------------------

def in_builtin_family(a: Sequence[int]) -> bool:
    """Tuples (p, q, pqk - 1) with k >= 1, in any order."""
    a = tuple(a)
    if len(a) != 3:
        return False
    for i in range(3):
        p, q = (a[j] for j in range(3) if j != i)
        c = a[i]
        if c >= p * q - 1 and (c + 1) % (p * q) == 0:
            return True
    return False


def seifert_rs(a: Sequence[int], orientation: int, r_sign: int | None = None) -> RValue:
    """r_s of +-Sigma(a), for every s, when R(a) > 0."""
    g = Seifert(tuple(a))
    if r_sign is None:
        if not in_builtin_family(g.a):
            raise UnassertedRSign(f"R sign of {g} must be asserted")
        cite = "R(p,q,pqk-1) = 1"
    elif r_sign <= 0:
        raise HypothesisUnmet("R(a) > 0", f"asserted sign {r_sign} for {g}")
    else:
        cite = "R(a) > 0 asserted"
    prov = Provenance("published", rule="seifert_rs", citation=cite)
    if orientation > 0:
        return RValue.infinity(prov)
    return RValue.exact(Fraction(1, 4 * g.product()), prov)


def _add_shift(r: RValue, s: Fraction) -> RValue | None:
    """r + s, or None when the sum is not certifiably positive."""
    if r.is_infinite:
        return r
    lo, hi = r.lo + s, r.hi + s
    if lo <= 0:
        return None
    return RValue("exact", lo) if r.form == "exact" else RValue.interval(lo, hi, r.digits)


def connected_sum_bound(s: Any, s1: Any, s2: Any, r1: RValue, r2: RValue) -> RValue | None:
    """Lower bound min(r1 + s2, r2 + s1) for r_s of the connected sum.

    None means the bound is vacuous (not certifiably positive).
    """
    s, s1, s2 = Fraction(s), Fraction(s1), Fraction(s2)
    if s1 > 0 or s2 > 0 or s != s1 + s2:
        raise ParameterMismatch(f"need s1, s2 <= 0 and s = s1 + s2, got {s}, {s1}, {s2}")
    a = _add_shift(r1, s2)
    b = _add_shift(r2, s1)
    if a is None or b is None:
        return None
    return rmin(a, b).with_provenance(Provenance("deduced", rule="connected_sum_bound"))


def addition_rule(r1: RValue, r2: RValue, rneg1: RValue, rneg2: RValue) -> tuple[RValue, RValue]:
    """(r0(Y1#Y2), r0(-Y1#-Y2)) when both negated values are infinite."""
    for name, v in (("r0(-Y1) = inf", rneg1), ("r0(-Y2) = inf", rneg2)):
        if not v.is_infinite:
            raise HypothesisUnmet(name, f"stored value is {v}")
    prov = Provenance("deduced", rule="addition_rule")
    return rmin(r1, r2).with_provenance(prov), RValue.infinity(prov)


def subtraction_rule(r1: RValue, r2: RValue, rneg2: RValue) -> RValue:
    """r0(Y1 # -Y2) = r0(Y1) when r0(Y1) < min(r0(Y2), r0(-Y2))."""
    bound = rmin(r2, rneg2)
    lt = r1.definitely_lt(bound)
    if lt is None:
        raise IntervalOverlap(f"cannot separate {r1} from {bound}")
    if not lt:
        raise HypothesisUnmet("r0(Y1) < min{r0(Y2), r0(-Y2)}", f"{r1} vs {bound}")
    return r1.with_provenance(Provenance("deduced", rule="subtraction_rule"))


def combination_rule(terms: Sequence[tuple[int, RValue, RValue]]) -> RValue:
    """r0 of sum n_k Y_k; terms are (n_k, r0(Y_k), r0(-Y_k)) with Y_m last."""
    if not terms:
        raise HypothesisUnmet("m >= 1", "empty combination")
    n_m, r_m, rneg_m = terms[-1]
    if r_m.is_infinite:
        raise HypothesisUnmet("r0(Y_m) < inf", "r0(Y_m) is infinite")
    for n_k, r_k, rneg_k in terms[:-1]:
        lt = r_m.definitely_lt(rmin(r_k, rneg_k))
        if lt is None:
            raise IntervalOverlap(f"cannot separate {r_m} from min({r_k}, {rneg_k})")
        if not lt:
            raise HypothesisUnmet("r0(Y_m) < min_{k<m}{r0(Y_k), r0(-Y_k)}",
                                  f"{r_m} vs min({r_k}, {rneg_k})")
    if not rneg_m.is_infinite:
        raise HypothesisUnmet("r0(-Y_m) = inf", f"stored value is {rneg_m}")
    if n_m <= 0:
        raise HypothesisUnmet("n_m > 0", f"n_m = {n_m}")
    return r_m.with_provenance(Provenance("deduced", rule="combination_rule"))


@dataclass(frozen=True)
class Bounds:
    """Certified range lo <= r <= hi inside (0, inf]; hi may be inf."""

    lo: Any = Fraction(0)
    hi: Any = INF
    finite: bool = False  # known finite without a numeric upper bound

    @classmethod
    def of(cls, v: RValue) -> Bounds:
        if v.is_infinite:
            return cls(INF, INF)
        return cls(v.lo, v.hi, True)


UNDECIDABLE = "undecidable"


def filtration_member(r0_y: Bounds | RValue, r0_neg: Bounds | RValue, r: Any) -> bool | str:
    """Is min(r0(Y), r0(-Y)) >= r?  True, False or UNDECIDABLE."""
    r = Fraction(r)
    b1 = r0_y if isinstance(r0_y, Bounds) else Bounds.of(r0_y)
    b2 = r0_neg if isinstance(r0_neg, Bounds) else Bounds.of(r0_neg)
    if b1.lo >= r and b2.lo >= r:
        return True
    if b1.hi < r or b2.hi < r:
        return False
    return UNDECIDABLE


@dataclass(frozen=True)
class Undetermined:
    qualifying: tuple
    reason: str

    def __str__(self) -> str:
        return f"undetermined ({self.reason}; {len(self.qualifying)} candidates)"


def _to_interval(item: Any) -> tuple[Fraction, Fraction]:
    """CSValue or (value, error) pair to an exact rational interval."""
    if hasattr(item, "value_mod_1"):
        mid = _mpf_fraction(item.value_mod_1.re)
        err = Fraction(item.error_bound)
    else:
        v, e = item
        mid, err = Fraction(v), Fraction(e)
    return mid - err, mid + err


def _mpf_fraction(raw: tuple) -> Fraction:
    sign, man, exp, _ = raw
    if not man:
        return Fraction(0)
    q = Fraction(man) * (Fraction(2) ** exp)
    return -q if sign else q


def spectrum_to_rs(spectrum: Iterable[Any], upper_bound: RValue,
                   casson_passed: bool = True) -> RValue | Undetermined:
    """Pick the unique positive spectrum value strictly below upper_bound."""
    if not casson_passed:
        raise SpectrumIncomplete("Casson count did not pass; spectrum may be incomplete")
    if upper_bound.is_infinite:
        return Undetermined((), "upper bound is infinite")
    ivs = sorted(_to_interval(x) for x in spectrum)
    below, ambiguous = [], []
    for lo, hi in ivs:
        if hi <= 0 or lo >= upper_bound.hi:
            continue
        if lo > 0 and hi < upper_bound.lo:
            below.append((lo, hi))
        else:
            ambiguous.append((lo, hi))
    # merge overlapping intervals: equal values from different classes
    merged: list[tuple[Fraction, Fraction]] = []
    for lo, hi in below:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    if ambiguous:
        return Undetermined(tuple(merged + ambiguous), "value straddles a boundary")
    if len(merged) != 1:
        return Undetermined(tuple(merged), f"{len(merged)} values below the bound")
    lo, hi = merged[0]
    rad = (hi - lo) / 2
    digits = max(0, int(-math.log10(float(rad)))) if rad > 0 else 60
    return RValue.interval(lo, hi, digits,
                           Provenance("computed_spectrum", rule="spectrum_to_rs"))


# --- certificates ------------------------------------------------------------

@dataclass(frozen=True)
class IndependenceCertificate:
    """Evidence that the members are linearly independent in the cobordism group.

    members are ordered so that r0 strictly decreases along the list and every
    r0(-member) is infinite.
    """

    members: tuple[ManifoldExpr, ...]
    values: tuple[str, ...]
    premises: tuple[int, ...] = ()
    evidence: tuple[str, ...] = field(default=(), compare=False)

    def witness(self, coefficients: Sequence[int]) -> tuple[int, int]:
        """For a nonzero combination, return (sign, index m) such that
        r0(sign * combination) = r0(members[m]) < inf."""
        idx = [i for i, c in enumerate(coefficients) if c]
        if not idx:
            raise HypothesisUnmet("nonzero combination", "all coefficients are zero")
        m = idx[-1]
        return (1 if coefficients[m] > 0 else -1), m

    def to_dict(self) -> dict:
        return {"members": [str(m) for m in self.members], "r0_chain": list(self.values),
                "premises": list(self.premises), "evidence": list(self.evidence)}


# --- the ledger ---------------------------------------------------------------

def _s(s: Any) -> Any:
    if s in (ALL, "-inf"):
        return s
    return Fraction(s)


class Ledger:
    """FactStore plus rule application with proof traces."""

    def __init__(self, store: FactStore | None = None) -> None:
        self.store = store or FactStore()
        self.r_signs: dict[Seifert, int] = {}

    # lookups
    def r_fact(self, y: ManifoldExpr, s: Any = 0) -> Fact | None:
        s = _s(s)
        for f in reversed(self.store.facts):
            if f.kind == "r_value" and f.subject == y and (f.s == s or f.s == ALL):
                return f
        if y.is_s3:
            return self._insert(y, ALL, "r_value", RValue.infinity(Provenance("axiom")),
                                Provenance("axiom", citation="r_s(S3) = inf"))
        return None

    def bounds(self, y: ManifoldExpr, s: Any = 0) -> Bounds:
        f = self.r_fact(y, s)
        if f is not None:
            return Bounds.of(f.payload)
        s = _s(s)
        lo, hi, finite = Fraction(0), INF, False
        for f in self.store.facts:
            if f.subject != y or not (f.s == s or f.s == ALL):
                continue
            if f.kind == "r_lower" and f.payload.lo > lo:
                lo = f.payload.lo
            elif f.kind == "r_upper" and f.payload.is_finite and f.payload.hi < hi:
                hi, finite = f.payload.hi, True
            elif f.kind == "r_finite":
                finite = True
        return Bounds(lo, hi, finite)

    def _insert(self, subject, s, kind, payload, prov, params=()) -> Fact:
        return self.store.add(subject, s, kind, payload, prov, tuple(params))

    def _need_r(self, y: ManifoldExpr, s: Any = 0) -> Fact:
        f = self.r_fact(y, s) or self.seed(y)
        if f is None:
            raise HypothesisUnmet("stored r-value", f"no r_{s} fact for {y}")
        return f

    # axioms and assertions
    def assert_r_sign(self, a: Sequence[int], sign: int, citation: str = "") -> Fact:
        g = Seifert(tuple(a))
        self.r_signs[g] = sign
        return self._insert(ManifoldExpr.of(g), ALL, "r_sign", sign,
                            Provenance("axiom", citation=citation or "asserted"))

    def seifert(self, a: Sequence[int], orientation: int = 1) -> Fact:
        g = Seifert(tuple(a))
        v = seifert_rs(g.a, orientation, self.r_signs.get(g))
        return self._insert(ManifoldExpr.of(g, 1 if orientation > 0 else -1), ALL,
                            "r_value", v, v.provenance)

    def assert_r(self, y: ManifoldExpr, value: RValue, s: Any = 0, citation: str = "") -> Fact:
        kind = value.provenance.kind if value.provenance.kind != "deduced" else "axiom"
        prov = Provenance(kind, citation=citation or value.provenance.citation)
        return self._insert(y, _s(s), "r_value", value.with_provenance(prov), prov)

    def seed(self, y: ManifoldExpr) -> Fact | None:
        """Seifert axiom for a single +-Sigma generator, if applicable."""
        one = y.single()
        if one and abs(one[0]) == 1 and isinstance(one[1], Seifert):
            return self.seifert(one[1].a, one[0])
        return None

    # rules
    def connected_sum(self, y1: ManifoldExpr, y2: ManifoldExpr, s1: Any, s2: Any) -> Fact | None:
        f1, f2 = self._need_r(y1, s1), self._need_r(y2, s2)
        s1, s2 = Fraction(s1), Fraction(s2)
        v = connected_sum_bound(s1 + s2, s1, s2, f1.payload, f2.payload)
        if v is None:
            return None
        prov = Provenance("deduced", rule="connected_sum_bound", premises=(f1.id, f2.id))
        return self._insert(y1 + y2, s1 + s2, "r_lower", v.with_provenance(prov), prov,
                            (str(s1 + s2), str(s1), str(s2)))

    def addition(self, y1: ManifoldExpr, y2: ManifoldExpr) -> tuple[Fact, Fact]:
        fs = [self._need_r(y) for y in (y1, y2, -y1, -y2)]
        v, vneg = addition_rule(*(f.payload for f in fs))
        prem = tuple(f.id for f in fs)
        p1 = Provenance("deduced", rule="addition_rule", premises=prem)
        a = self._insert(y1 + y2, Fraction(0), "r_value", v.with_provenance(p1), p1, ("sum",))
        b = self._insert(-(y1 + y2), Fraction(0), "r_value", vneg.with_provenance(p1), p1, ("neg",))
        return a, b

    def multiple(self, y: ManifoldExpr, n: int) -> Fact:
        """r0(n[Y]) by repeated addition, n >= 1."""
        if n < 1:
            raise ParameterMismatch("multiplier must be positive")
        f = self._need_r(y)
        acc = y
        for _ in range(n - 1):
            f, _neg = self.addition(acc, y)
            acc = acc + y
        return f

    def subtraction(self, y1: ManifoldExpr, y2: ManifoldExpr) -> Fact:
        fs = [self._need_r(y) for y in (y1, y2, -y2)]
        v = subtraction_rule(*(f.payload for f in fs))
        prov = Provenance("deduced", rule="subtraction_rule", premises=tuple(f.id for f in fs))
        return self._insert(y1 - y2, Fraction(0), "r_value", v.with_provenance(prov), prov)

    def combination(self, expr: ManifoldExpr) -> Fact:
        """Apply the combination rule, choosing Y_m and orientations automatically.

        If the coefficient of Y_m is negative the rule is applied to -expr and
        the resulting fact is about -expr.
        """
        if expr.is_s3:
            return self._need_r(expr)
        oriented = []
        for c, g in expr.terms:
            y = ManifoldExpr.of(g)
            fy, fn = self._need_r(y), self._need_r(-y)
            oriented.append((c, y, fy, fn))
        # candidate Y_m: finite r0 with infinite r0 of the reverse orientation
        cands = []
        for c, y, fy, fn in oriented:
            if fy.payload.is_finite and fn.payload.is_infinite:
                cands.append((fy.payload, c, y, fy, fn, oriented))
            if fn.payload.is_finite and fy.payload.is_infinite:
                cands.append((fn.payload, -c, -y, fn, fy, oriented))
        if not cands:
            raise HypothesisUnmet("r0(-Y_m) = inf",
                                  "no generator has finite r0 with infinite reverse")
        cands.sort(key=lambda t: t[0].lo)
        val, n_m, y_m, f_m, f_mneg, _ = cands[0]
        terms, prem = [], []
        for c, y, fy, fn in oriented:
            if y == y_m or -y == y_m:
                continue
            terms.append((c, fy.payload, fn.payload))
            prem += [fy.id, fn.id]
        sign = 1
        if n_m < 0:
            sign, n_m = -1, -n_m
            terms = [(-c, a, b) for c, a, b in terms]
        terms.append((n_m, f_m.payload, f_mneg.payload))
        prem += [f_m.id, f_mneg.id]
        v = combination_rule(terms)
        prov = Provenance("deduced", rule="combination_rule", premises=tuple(prem))
        coeffs = tuple(t[0] for t in terms)
        return self._insert(expr.scale(sign), Fraction(0), "r_value",
                            v.with_provenance(prov), prov, coeffs)

    def r0(self, expr: ManifoldExpr) -> Fact:
        """Derive r0(expr) from stored facts and Seifert axioms."""
        f = self.r_fact(expr) or self.seed(expr)
        if f is not None:
            return f
        one = expr.single()
        if one:
            c, g = one
            y = ManifoldExpr.of(g, 1 if c > 0 else -1)
            fneg = self._need_r(-y)
            if fneg.payload.is_infinite:
                return self.multiple(y, abs(c))
            if self._need_r(y).payload.is_infinite:
                # n[Y] = -(n[-Y]); the addition rule on -Y also yields r0(nY) = inf
                self.multiple(-y, abs(c))
                hit = self.r_fact(expr)
                if hit is not None:
                    return hit
            raise HypothesisUnmet("r0(-Y) = inf", f"neither orientation of {g} qualifies")
        f = self.combination(expr)
        if f.subject != expr:
            raise HypothesisUnmet("n_m > 0",
                                  f"rule determines r0 of the negation ({f.subject}) only")
        return f

    def independence(self, family: Sequence[ManifoldExpr]) -> IndependenceCertificate:
        """Certify linear independence from a strictly decreasing finite r0 chain."""
        family = list(family)
        if len(set(family)) != len(family):
            raise HypothesisUnmet("strictly decreasing r0 chain", "repeated member")
        negs = []
        for y in family:
            fn = self._need_r(-y)
            if not fn.payload.is_infinite:
                raise HypothesisUnmet("r0(-Y_k) = inf", f"r0(-({y})) is {fn.payload}")
            negs.append(fn)
        known = {y: self.r_fact(y) or self.seed(y) for y in family}
        prem = [f.id for f in negs]
        evidence = []
        if all(f is not None for f in known.values()):
            order = sorted(family, key=lambda y: known[y].payload.lo or 0, reverse=True)
            for y in order:
                if known[y].payload.is_infinite:
                    raise HypothesisUnmet("r0(Y_1) < inf", f"r0({y}) is infinite")
            for a, b in zip(order, order[1:]):
                lt = known[b].payload.definitely_lt(known[a].payload)
                if lt is None:
                    raise IntervalOverlap(f"cannot separate r0({a}) and r0({b})")
                if not lt:
                    raise HypothesisUnmet("strictly decreasing r0 chain",
                                          f"r0({a}) = {known[a].payload}, r0({b}) = {known[b].payload}")
            prem += [known[y].id for y in order]
            values = tuple(str(known[y].payload) for y in order)
        else:
            order, chain_prem = self._strict_chain(family)
            prem += chain_prem
            values = tuple("finite" for _ in order)
            evidence.append("strict cobordism chain")
        cert = IndependenceCertificate(tuple(order), values, tuple(prem), tuple(evidence))
        prov = Provenance("deduced", rule="independence", premises=tuple(prem))
        self._insert(S3, Fraction(0), "independence", cert, prov, tuple(order))
        return cert

    def _strict_chain(self, family: list[ManifoldExpr]) -> tuple[list[ManifoldExpr], list[int]]:
        """Order the family by strict cobordism facts: each member strictly below the previous."""
        below: dict[ManifoldExpr, tuple[ManifoldExpr, int]] = {}
        for f in self.store.facts:
            if f.kind == "cobordism" and f.payload["strict"] and f.subject in family \
                    and f.payload["above"] in family:
                below[f.subject] = (f.payload["above"], f.id)
        tops = [y for y in family if y not in below]
        if len(tops) != 1:
            raise HypothesisUnmet("strictly decreasing r0 chain",
                                  "strict cobordism facts do not order the family")
        children = {v[0]: (k, v[1]) for k, v in below.items()}
        order, prem, y = [tops[0]], [], tops[0]
        fin = self._finiteness(y)
        if fin is None:
            raise HypothesisUnmet("r0(Y_1) < inf", f"no finiteness fact for {y}")
        prem.append(fin)
        while y in children:
            y, fid = children[y]
            order.append(y)
            prem.append(fid)
        if len(order) != len(family):
            raise HypothesisUnmet("strictly decreasing r0 chain", "chain is not connected")
        return order, prem

    def _finiteness(self, y: ManifoldExpr) -> int | None:
        for f in self.store.facts:
            if f.subject != y:
                continue
            if f.kind == "r_finite" or (f.kind in ("r_value", "r_upper") and f.payload.is_finite
                                        and f.s in (ALL, Fraction(0))):
                return f.id
        return None

    def cobordism(self, y1: ManifoldExpr, y2: ManifoldExpr, negative_definite: bool = True,
                  simply_connected: bool = False, citation: str = "") -> list[Fact]:
        """Record a negative definite W with boundary Y1 and -Y2: r_s(Y2) <= r_s(Y1)."""
        if not negative_definite:
            return []
        f1 = self.r_fact(y1) or self.seed(y1)
        # strictness needs r_s(Y1) < inf as well; consumers check that separately
        strict = bool(simply_connected)
        base = self._insert(y2, ALL, "cobordism",
                            {"above": y1, "strict": strict, "simply_connected": simply_connected},
                            Provenance("axiom", citation=citation or "cobordism asserted"))
        out = [base]
        if y2.is_s3:
            prov = Provenance("deduced", rule="cobordism_infinity", premises=(base.id,))
            out.append(self._insert(y1, ALL, "r_value", RValue.infinity(prov), prov))
        elif f1 is not None:
            prov = Provenance("deduced", rule="cobordism_bound", premises=(base.id, f1.id))
            out.append(self._insert(y2, f1.s, "r_upper", f1.payload.with_provenance(prov), prov))
            f2 = self.r_fact(y2, 0 if f1.s == ALL else f1.s) or self.seed(y2)
            if f2 is not None:
                lt = f1.payload.definitely_lt(f2.payload)
                if lt is True or (strict and f1.payload.same_value(f2.payload)
                                  and f1.payload.form == "exact"):
                    raise InconsistentStore(f"cobordism {y1} -> {y2} contradicts stored values")
        return out

    def froyshov(self, y: ManifoldExpr, h_sign: int, citation: str = "") -> list[Fact]:
        """h(Y) < 0 iff r_{-inf}(Y) < inf; h is a homomorphism so -Y gets -h."""
        out = []
        for subj, sg in ((y, h_sign), (-y, -h_sign)):
            base = self._insert(subj, ALL, "froyshov_sign", (sg > 0) - (sg < 0),
                                Provenance("axiom", citation=citation or "h sign asserted"))
            out.append(base)
            prov = Provenance("deduced", rule="froyshov_rule", premises=(base.id,))
            if sg < 0:
                out.append(self._insert(subj, ALL, "r_finite", True, prov))
            else:
                out.append(self._insert(subj, "-inf", "r_value", RValue.infinity(prov), prov))
        return out

    def froyshov_bounds(self, y: ManifoldExpr, lo: int, hi: int, citation: str = "") -> Fact:
        return self._insert(y, ALL, "froyshov_sign", ("range", lo, hi),
                            Provenance("axiom", citation=citation or "h range asserted"))

    # s_infty and d_infty
    def s_infty_upper(self, y: ManifoldExpr) -> tuple[Fraction, int] | None:
        best = None
        for f in self.store.facts:
            if f.subject == y and f.kind in ("s_infty_upper", "s_infty_value"):
                if best is None or f.payload < best[0]:
                    best = (f.payload, f.id)
        return best

    def s_infty_lower(self, y: ManifoldExpr) -> tuple[Fraction, int] | None:
        best = None
        for f in self.store.facts:
            if f.subject == y and f.kind in ("s_infty_lower", "s_infty_value"):
                if best is None or f.payload > best[0]:
                    best = (f.payload, f.id)
        return best

    def s_infty_from_r(self, y: ManifoldExpr) -> Fact | None:
        """r0(Y) = inf gives s_infty(Y) = 0."""
        f = self.r_fact(y) or self.seed(y)
        if f is None or not f.payload.is_infinite:
            return None
        prov = Provenance("deduced", rule="s_infty_from_r", premises=(f.id,))
        return self._insert(y, ALL, "s_infty_value", Fraction(0), prov)

    def r_from_s_infty(self, y: ManifoldExpr) -> Fact | None:
        """s_infty(Y) = 0 gives r0(Y) = inf."""
        lo = self.s_infty_lower(y)
        if lo is None or lo[0] < 0:
            return None
        prov = Provenance("deduced", rule="r_from_s_infty", premises=(lo[1],))
        return self._insert(y, Fraction(0), "r_value", RValue.infinity(prov), prov)

    def assert_s_infty(self, y: ManifoldExpr, value: Any, kind: str = "s_infty_value",
                       citation: str = "") -> Fact:
        v = Fraction(value)
        if v > 0:
            raise InconsistentStore("s_infty is at most 0")
        f = self._insert(y, ALL, kind, v, Provenance("axiom", citation=citation or "asserted"))
        self.check_consistency()
        return f

    def s_infty_sum_bound(self, z: ManifoldExpr, x: ManifoldExpr) -> Fact | None:
        """Upper bound on s_infty(Z) from r(Z#X) and r(X), both s-independent.

        With a = r(Z#X) and b = r0(X), b > a forces r_s(Z) < inf for s in (a-b, 0].
        """
        w = z + x
        fw = self.r_fact(w, ALL) or self.seed(w)
        fx = self.r_fact(x) or self.seed(x)
        if fw is None or fx is None or fw.s != ALL:
            return None
        a, b = fw.payload, fx.payload
        if a.is_infinite or b.is_infinite or a.form != "exact" or b.form != "exact":
            return None
        bound = _sum_bound(a, b)
        if bound is None:
            return None
        prov = Provenance("deduced", rule="s_infty_sum_bound", premises=(fw.id, fx.id))
        return self._insert(z, ALL, "s_infty_upper", bound, prov)

    def superadditivity(self, y1: ManifoldExpr, y2: ManifoldExpr) -> Fact | None:
        l1, l2 = self.s_infty_lower(y1), self.s_infty_lower(y2)
        if l1 is None or l2 is None:
            return None
        prov = Provenance("deduced", rule="superadditivity", premises=(l1[1], l2[1]))
        f = self._insert(y1 + y2, ALL, "s_infty_lower", l1[0] + l2[0], prov)
        self.check_consistency()
        return f

    def d_infty(self, y1: ManifoldExpr, y2: ManifoldExpr) -> Fact | None:
        """Lower bound (or the value 0 on the diagonal) for d_infty([Y1],[Y2])."""
        if y1 == y2:
            prov = Provenance("deduced", rule="d_infty_diagonal")
            return self._insert(y1, ALL, "d_infty_value", (y2, Fraction(0)), prov, (y2,))
        u, v = y1 - y2, y2 - y1
        for t in (u, v):
            if self.s_infty_upper(t) is None:
                self.s_infty_from_r(t)
            if self.s_infty_upper(t) is None:
                # try W = T # X with X a single generator term of -T
                for c, g in t.terms:
                    x = ManifoldExpr.of(g, -c)
                    if abs(c) == 1 and self.s_infty_sum_bound(t, x) is not None:
                        break
        bu, bv = self.s_infty_upper(u), self.s_infty_upper(v)
        if bu is None or bv is None:
            return None
        prov = Provenance("deduced", rule="d_infty_bound", premises=(bu[1], bv[1]))
        f = self._insert(y1, ALL, "d_infty_lower", (y2, -bu[0] - bv[0]), prov, (y2,))
        self.check_consistency()
        return f

    def prop_d_infty(self, n: int) -> Fact:
        """The lower bound on d_infty(S3, Sigma(2,3,6n-1) # -Sigma(2,3,6n+5))."""
        a, b = (2, 3, 6 * n - 1), (2, 3, 6 * n + 5)
        z = ManifoldExpr.of(Seifert(a)) - ManifoldExpr.of(Seifert(b))
        x = -ManifoldExpr.of(Seifert(a))
        self.seifert(b, -1)
        self.seifert(a, -1)
        if self.s_infty_sum_bound(z, x) is None:
            raise HypothesisUnmet("r0(X) > r(Z#X)", f"sum bound unavailable for n={n}")
        # -Z bounds a negative definite 4-manifold
        self.cobordism(-z, S3, citation="negative definite filling of -Z")
        f = self.d_infty(S3, z)
        if f is None:
            raise HypothesisUnmet("s_infty bounds", "missing s_infty facts")
        return f

    def d_infty_facts(self) -> list[Fact]:
        return [f for f in self.store.facts if f.kind in ("d_infty_lower", "d_infty_value")]

    def check_consistency(self) -> None:
        """s_infty bounds must not cross; d_infty must satisfy the triangle inequality."""
        subjects = {f.subject for f in self.store.facts if f.kind.startswith("s_infty")}
        for y in subjects:
            lo, hi = self.s_infty_lower(y), self.s_infty_upper(y)
            if lo and hi and lo[0] > hi[0]:
                raise InconsistentStore(f"s_infty({y}) bounds cross: {lo[0]} > {hi[0]}")
        exact: dict[tuple, Fraction] = {}
        lower: dict[tuple, Fraction] = {}
        for f in self.d_infty_facts():
            key = _pair(f.subject, f.payload[0])
            val = f.payload[1]
            if f.kind == "d_infty_value":
                if key in exact and exact[key] != val:
                    raise InconsistentStore(f"two d_infty values for {key}")
                exact[key] = val
            lower[key] = max(lower.get(key, Fraction(0)), val)
        for key, lb in lower.items():
            if key in exact and lb > exact[key]:
                raise InconsistentStore(f"d_infty lower bound {lb} exceeds value {exact[key]}")
            if key[0] == key[1] and lb > 0:
                raise InconsistentStore("d_infty(x, x) must vanish")
        points = sorted({p for k in lower for p in k}, key=str)
        for a in points:
            for b in points:
                for c in points:
                    ab, bc = exact.get(_pair(a, b)), exact.get(_pair(b, c))
                    if a == b:
                        ab = Fraction(0)
                    if b == c:
                        bc = Fraction(0)
                    ac = lower.get(_pair(a, c))
                    if ab is not None and bc is not None and ac is not None and ac > ab + bc:
                        raise InconsistentStore(
                            f"triangle inequality fails: d({a},{c}) >= {ac} > {ab} + {bc}")

    def assert_d_infty(self, y1: ManifoldExpr, y2: ManifoldExpr, value: Any,
                       citation: str = "") -> Fact:
        f = self._insert(y1, ALL, "d_infty_value", (y2, Fraction(value)),
                         Provenance("axiom", citation=citation or "asserted"))
        self.check_consistency()
        return f

    def member(self, y: ManifoldExpr, r: Any) -> bool | str:
        for t in (y, -y):
            if self.r_fact(t) is None:
                self.seed(t)
                if self.r_fact(t) is None:
                    try:
                        self.r0(t)
                    except Exception:
                        pass
        return filtration_member(self.bounds(y), self.bounds(-y), r)

    def trace(self, fact: Fact) -> list[str]:
        return self.store.trace(fact)

    def replay(self, fact: Fact) -> bool:
        return self.store.replay(fact)


def _pair(a: ManifoldExpr, b: ManifoldExpr) -> tuple:
    return tuple(sorted((a, b), key=str))


def _sum_bound(a: RValue, b: RValue) -> Fraction | None:
    d = a.lo - b.lo
    return d if d < 0 else None


# --- replay table -------------------------------------------------------------

def _replay_sum_bound(prem: list[Fact], params: tuple) -> Any:
    s, s1, s2 = (Fraction(p) for p in params)
    return connected_sum_bound(s, s1, s2, prem[0].payload, prem[1].payload)


def _replay_addition(prem: list[Fact], params: tuple) -> Any:
    v, vneg = addition_rule(*(p.payload for p in prem))
    return v if params == ("sum",) else vneg


def _replay_combination(prem: list[Fact], params: tuple) -> Any:
    pays = [p.payload for p in prem]
    terms = [(c, pays[2 * i], pays[2 * i + 1]) for i, c in enumerate(params)]
    return combination_rule(terms)


def _replay_independence(prem: list[Fact], params: tuple) -> Any:
    led = Ledger(FactStore())
    for f in prem:
        led.store.facts.append(Fact(len(led.store.facts), f.subject, f.s, f.kind, f.payload,
                                    Provenance("axiom")))
    cert = led.independence(list(params))
    return IndependenceCertificate(cert.members, cert.values,
                                   tuple(p.id for p in prem), cert.evidence)


REPLAY.update({
    "connected_sum_bound": _replay_sum_bound,
    "addition_rule": _replay_addition,
    "subtraction_rule": lambda p, _: subtraction_rule(*(f.payload for f in p)),
    "combination_rule": _replay_combination,
    "cobordism_infinity": lambda p, _: RValue.infinity(),
    "cobordism_bound": lambda p, _: p[1].payload,
    "froyshov_rule": lambda p, _: True if p[0].payload < 0 else RValue.infinity(),
    "s_infty_from_r": lambda p, _: Fraction(0) if p[0].payload.is_infinite else None,
    "r_from_s_infty": lambda p, _: RValue.infinity() if p[0].payload >= 0 else None,
    "s_infty_sum_bound": lambda p, _: _sum_bound(p[0].payload, p[1].payload),
    "superadditivity": lambda p, _: p[0].payload + p[1].payload,
    "d_infty_diagonal": lambda p, prm: (prm[0], Fraction(0)),
    "d_infty_bound": lambda p, prm: (prm[0], -p[0].payload - p[1].payload),
    "independence": _replay_independence,
})
