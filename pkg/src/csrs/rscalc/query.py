"""Fact files and the small query language of the ledger command."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from ..errors import QuerySyntaxError, SchemaError
from .rules import ALL, IndependenceCertificate, Ledger, UNDECIDABLE
from .values import S3, ManifoldExpr, Named, RValue, Seifert, Surgery

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        pos = m.end()
        if m.group(1):
            out.append(("int", m.group(1)))
        elif m.group(2):
            out.append(("name", m.group(2)))
        elif m.group(3) and not m.group(3).isspace():
            ch = m.group(3)
            if ch not in "(){},+-#*=/":
                raise QuerySyntaxError(f"unexpected character {ch!r}")
            out.append(("op", ch))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, value: str | None = None, kind: str | None = None) -> str:
        t = self.peek()
        if t is None:
            raise QuerySyntaxError(f"unexpected end of query, expected {value or kind}")
        if (value is not None and t[1] != value) or (kind is not None and t[0] != kind):
            raise QuerySyntaxError(f"expected {value or kind}, found {t[1]!r}")
        self.i += 1
        return t[1]

    def at(self, value: str) -> bool:
        t = self.peek()
        return t is not None and t[1] == value

    def done(self) -> None:
        if self.peek() is not None:
            raise QuerySyntaxError(f"trailing input at {self.peek()[1]!r}")

    def expr(self) -> ManifoldExpr:
        acc = self.manifold(self.term())
        while self.at("+") or self.at("-") or self.at("#"):
            op = self.take()
            rhs = self.manifold(self.term())
            acc = acc - rhs if op == "-" else acc + rhs
        return acc

    @staticmethod
    def manifold(v: Any) -> ManifoldExpr:
        if not isinstance(v, ManifoldExpr):
            raise QuerySyntaxError("a bare integer is not a manifold")
        return v

    def term(self) -> Any:
        v = self.primary()
        while self.at("*"):
            self.take("*")
            w = self.primary()
            if isinstance(v, int) and isinstance(w, int):
                v = v * w
            elif isinstance(v, int):
                v = w.scale(v)
            elif isinstance(w, int):
                v = v.scale(w)
            else:
                raise QuerySyntaxError("cannot multiply two manifolds")
        return v

    def primary(self) -> Any:
        t = self.peek()
        if t is None:
            raise QuerySyntaxError("unexpected end of query")
        kind, val = t
        if kind == "int":
            self.i += 1
            return int(val)
        if val == "-":
            self.i += 1
            v = self.primary()
            return -v
        if val == "(":
            self.i += 1
            v = self.term_or_expr()
            self.take(")")
            return v
        if kind == "name":
            self.i += 1
            if val == "S3":
                return S3
            if val == "S" and self.at("("):
                self.take("(")
                nums = [int(self.take(kind="int"))]
                while self.at(","):
                    self.take(",")
                    nums.append(int(self.take(kind="int")))
                self.take(")")
                return ManifoldExpr.of(Seifert(tuple(nums)))
            if val == "Surg" and self.at("("):
                self.take("(")
                knot = ""
                while not self.at(","):
                    knot += self.take()
                self.take(",")
                if self.at("1") and self.toks[self.i + 1][1] == "/":
                    self.take("1")
                    self.take("/")
                sign = -1 if self.at("-") and self.take("-") else 1
                n = sign * int(self.take(kind="int"))
                self.take(")")
                return ManifoldExpr.of(Surgery(knot, n))
            return ManifoldExpr.of(Named(val))
        raise QuerySyntaxError(f"unexpected token {val!r}")

    def term_or_expr(self) -> Any:
        v = self.term()
        if isinstance(v, int) and self.at(")"):
            return v
        acc = self.manifold(v)
        while self.at("+") or self.at("-") or self.at("#"):
            op = self.take()
            rhs = self.manifold(self.term())
            acc = acc - rhs if op == "-" else acc + rhs
        return acc

    def rational(self) -> Fraction:
        sign = -1 if self.at("-") and self.take("-") else 1
        num = int(self.take(kind="int"))
        den = 1
        if self.at("/"):
            self.take("/")
            den = int(self.take(kind="int"))
        return sign * Fraction(num, den)


def parse_expr(text: str) -> ManifoldExpr:
    p = _Parser(text)
    e = p.expr()
    p.done()
    return e


@dataclass
class Query:
    kind: str
    args: tuple
    text: str = ""


def parse_query(text: str) -> Query:
    p = _Parser(text)
    head = p.take(kind="name")
    if head == "r0":
        p.take("(")
        e = p.expr()
        p.take(")")
        p.done()
        return Query("r0", (e,), text)
    if head == "independent":
        p.take("{")
        items = [p.expr()]
        while p.at(","):
            p.take(",")
            items.append(p.expr())
        p.take("}")
        p.done()
        return Query("independent", tuple(items), text)
    if head == "dinf":
        p.take("(")
        a = p.expr()
        p.take(",")
        b = p.expr()
        p.take(")")
        p.done()
        return Query("dinf", (a, b), text)
    if head == "member":
        p.take("(")
        e = p.expr()
        p.take(",")
        if p.at("r"):
            p.take("r")
            p.take("=")
        r = p.rational()
        p.take(")")
        p.done()
        return Query("member", (e, r), text)
    raise QuerySyntaxError(f"unknown query {head!r}")


@dataclass
class QueryResult:
    query: str
    kind: str
    value: Any
    trace: list[str] = field(default_factory=list)
    replayed: bool = True

    def value_str(self) -> str:
        v = self.value
        if isinstance(v, RValue):
            return str(v)
        if isinstance(v, IndependenceCertificate):
            return "independent: " + " > ".join(v.values)
        if isinstance(v, bool):
            return "true" if v else "false"
        return str(v)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"query": self.query, "kind": self.kind}
        v = self.value
        if isinstance(v, RValue):
            d["value"] = v.to_dict()
        elif isinstance(v, IndependenceCertificate):
            d["value"] = v.to_dict()
        elif isinstance(v, bool):
            d["value"] = v
        else:
            d["value"] = str(v)
        if self.kind == "dinf" and isinstance(v, Fraction):
            d["value_error"] = "0"
        d["trace"] = self.trace
        d["replayed"] = self.replayed
        return d


def run_query(ledger: Ledger, text: str) -> QueryResult:
    q = parse_query(text)
    if q.kind == "r0":
        f = ledger.r0(q.args[0])
        return QueryResult(text, "r0", f.payload, ledger.trace(f), ledger.replay(f))
    if q.kind == "independent":
        cert = ledger.independence(list(q.args))
        f = ledger.store.facts[-1]
        for g in reversed(ledger.store.facts):
            if g.kind == "independence" and g.payload == cert:
                f = g
                break
        return QueryResult(text, "independent", cert, ledger.trace(f), ledger.replay(f))
    if q.kind == "dinf":
        a, b = q.args
        f = ledger.d_infty(a, b)
        if f is None:
            return QueryResult(text, "dinf", "unknown", [])
        rel = "=" if f.kind == "d_infty_value" else ">="
        return QueryResult(text, "dinf", f"{rel} {f.payload[1]}", ledger.trace(f),
                           ledger.replay(f))
    e, r = q.args
    v = ledger.member(e, r)
    return QueryResult(text, "member", v if v != UNDECIDABLE else UNDECIDABLE, [])


# --- fact files -----------------------------------------------------------------

_FACT_FIELDS = {"subject", "s", "kind", "payload", "provenance", "citation",
                "target", "negative_definite", "simply_connected", "relation"}


def _parse_rvalue(v: Any, prov: str) -> RValue:
    from .values import Provenance
    p = Provenance(prov if prov in ("axiom", "published", "computed_spectrum") else "axiom")
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
        return RValue.infinity(p)
    if isinstance(v, dict):
        return RValue.interval(Fraction(v["lo"]), Fraction(v["hi"]), v.get("digits"), p)
    return RValue.exact(Fraction(str(v)), p)


def load_facts(ledger: Ledger, document: str | bytes | dict | Path) -> int:
    """Load a fact file into the ledger; returns the number of facts read."""
    if isinstance(document, Path):
        try:
            document = document.read_text(encoding="utf-8")
        except OSError as exc:
            raise SchemaError(f"cannot read fact file: {exc}") from exc
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"fact file is not JSON: {exc}") from exc
    if not isinstance(document, dict) or not isinstance(document.get("facts"), list):
        raise SchemaError("fact file needs a top-level 'facts' list")
    n = 0
    for raw in document["facts"]:
        if not isinstance(raw, dict):
            raise SchemaError("each fact must be an object")
        extra = set(raw) - _FACT_FIELDS
        if extra:
            raise SchemaError(f"unknown fact fields {sorted(extra)}")
        try:
            subject = parse_expr(raw["subject"])
            kind = raw["kind"]
        except KeyError as exc:
            raise SchemaError(f"fact missing field {exc}") from exc
        except QuerySyntaxError as exc:
            raise SchemaError(f"bad subject: {exc}") from exc
        prov = raw.get("provenance", "axiom")
        cite = raw.get("citation", "")
        s = raw.get("s", "0")
        s = s if s in (ALL, "-inf") else Fraction(str(s))
        payload = raw.get("payload")
        if kind == "r_value":
            ledger.assert_r(subject, _parse_rvalue(payload, prov), s, cite)
        elif kind == "R_sign":
            one = subject.single()
            if not one or not isinstance(one[1], Seifert):
                raise SchemaError("R_sign subject must be a Seifert sphere")
            ledger.assert_r_sign(one[1].a, int(payload), cite)
        elif kind == "froyshov_sign":
            ledger.froyshov(subject, int(payload), cite)
        elif kind == "cobordism_assertion":
            if "target" not in raw:
                raise SchemaError("cobordism_assertion needs 'target'")
            ledger.cobordism(subject, parse_expr(raw["target"]),
                             bool(raw.get("negative_definite", True)),
                             bool(raw.get("simply_connected", False)), cite)
        elif kind == "s_infty":
            rel = raw.get("relation", "=")
            k = {"=": "s_infty_value", "<=": "s_infty_upper", ">=": "s_infty_lower"}.get(rel)
            if k is None:
                raise SchemaError(f"bad s_infty relation {rel!r}")
            ledger.assert_s_infty(subject, Fraction(str(payload)), k, cite)
        elif kind == "casson":
            from .values import Provenance
            ledger.store.add(subject, ALL, "casson", int(payload), Provenance("axiom", citation=cite))
        else:
            raise SchemaError(f"unknown fact kind {kind!r}")
        n += 1
    return n
