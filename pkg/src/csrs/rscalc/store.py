"""Fact store with s-monotonicity enforcement and proof-trace replay."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from ..errors import InconsistentStore
from .values import ManifoldExpr, Provenance, RValue

# s is a Fraction in (-inf, 0], or the string "-inf"
SValue = Any

FACT_KINDS = (
    "r_value",        # payload RValue: r_s(subject) equals it
    "r_upper",        # payload RValue: r_s(subject) <= it
    "s_infty_upper",  # payload Fraction: s_infty(subject) <= it
    "s_infty_lower",  # payload Fraction
    "s_infty_value",
    "d_infty_lower",  # payload (other ManifoldExpr, Fraction)
    "d_infty_value",
    "cobordism",      # payload dict: target, strict
    "froyshov_sign",  # payload int
    "r_sign",         # payload int
    "independence",   # payload IndependenceCertificate
    "r_lower",        # payload RValue: r_s(subject) >= it
    "r_finite",       # payload True: r_s(subject) < inf for every s
    "casson",         # payload int
)


ALL = "all"


def s_key(s: SValue):
    return float("-inf") if s == "-inf" else Fraction(s)


@dataclass(frozen=True)
class Fact:
    id: int
    subject: ManifoldExpr
    s: SValue
    kind: str
    payload: Any
    provenance: Provenance
    params: tuple = field(default=(), compare=False)

    def describe(self) -> str:
        p = self.payload
        if isinstance(p, RValue):
            p = str(p)
        return f"[{self.id}] {self.kind} s={self.s} {self.subject}: {p}"


class FactStore:
    def __init__(self) -> None:
        self.facts: list[Fact] = []

    def __len__(self) -> int:
        return len(self.facts)

    def __getitem__(self, i: int) -> Fact:
        return self.facts[i]

    def add(self, subject: ManifoldExpr, s: SValue, kind: str, payload: Any,
            provenance: Provenance, params: tuple = ()) -> Fact:
        if kind not in FACT_KINDS:
            raise ValueError(f"unknown fact kind {kind!r}")
        for pid in provenance.premises:
            if not 0 <= pid < len(self.facts):
                raise InconsistentStore(f"premise {pid} does not exist")
        # reuse an equal fact rather than duplicating it
        for f in self.facts:
            if f.subject == subject and f.s == s and f.kind == kind and _same(f.payload, payload):
                return f
        fact = Fact(len(self.facts), subject, s, kind, payload, provenance, params)
        if kind == "r_value":
            self._check_monotone(fact)
        self.facts.append(fact)
        return fact

    def _check_monotone(self, new: Fact) -> None:
        """r_s is non-increasing in s; exact values at the same s must agree."""
        v: RValue = new.payload
        for f in self.facts:
            if f.kind != "r_value" or f.subject != new.subject:
                continue
            w: RValue = f.payload
            # a fact tagged "all" holds at every s, so compare it as equal-s
            if ALL in (f.s, new.s):
                a = b = 0
            else:
                a, b = s_key(f.s), s_key(new.s)
            if a == b:
                if v.definitely_lt(w) is True or w.definitely_lt(v) is True:
                    raise InconsistentStore(
                        f"{new.subject} at s={new.s}: {v} conflicts with fact {f.id} ({w})")
            elif a < b and w.definitely_lt(v) is True:
                raise InconsistentStore(
                    f"{new.subject}: r at s={f.s} is {w} but r at larger s={new.s} is {v}")
            elif a > b and v.definitely_lt(w) is True:
                raise InconsistentStore(
                    f"{new.subject}: r at s={new.s} is {v} but r at larger s={f.s} is {w}")

    def find(self, subject: ManifoldExpr, kind: str, s: SValue | None = None) -> list[Fact]:
        return [f for f in self.facts if f.subject == subject and f.kind == kind
                and (s is None or f.s == s)]

    def r_value(self, subject: ManifoldExpr, s: SValue = Fraction(0)) -> Fact | None:
        hits = self.find(subject, "r_value", Fraction(s) if s != "-inf" else s)
        return hits[-1] if hits else None

    def trace(self, fact: Fact, depth: int = 0) -> list[str]:
        lines = ["  " * depth + fact.describe()
                 + f"  <{fact.provenance.kind}{':' + fact.provenance.rule if fact.provenance.rule else ''}>"]
        for pid in fact.provenance.premises:
            lines.extend(self.trace(self.facts[pid], depth + 1))
        return lines

    def replay(self, fact: Fact) -> bool:
        """Re-run the rule that produced fact from its premises and compare."""
        prov = fact.provenance
        if prov.kind != "deduced":
            return True
        if not all(self.replay(self.facts[p]) for p in prov.premises):
            return False
        fn = REPLAY.get(prov.rule or "")
        if fn is None:
            return False
        premises = [self.facts[p] for p in prov.premises]
        try:
            out = fn(premises, fact.params)
        except Exception:
            return False
        return _same(out, fact.payload)


def _same(a: Any, b: Any) -> bool:
    if isinstance(a, RValue) and isinstance(b, RValue):
        return a.same_value(b)
    return a == b


# rule name -> f(premise facts, params) -> payload; filled by rules.py
REPLAY: dict[str, Callable[[list[Fact], tuple], Any]] = {}
