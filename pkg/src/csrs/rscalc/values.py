"""Exact values in (0, inf] and formal sums of homology spheres."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Any, Union

from ..errors import InputError, NotCoprime

PROVENANCE_KINDS = ("axiom", "published", "computed_spectrum", "deduced")


@dataclass(frozen=True)
class Provenance:
    kind: str
    rule: str | None = None
    premises: tuple[int, ...] = ()
    citation: str = ""

    def __post_init__(self):
        if self.kind not in PROVENANCE_KINDS:
            raise InputError(f"unknown provenance {self.kind!r}")

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind}
        if self.rule:
            d["rule"] = self.rule
        if self.premises:
            d["premises"] = list(self.premises)
        if self.citation:
            d["citation"] = self.citation
        return d


AXIOM = Provenance("axiom")


def _frac(x: Any) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class RValue:
    """An element of (0, inf]: exact rational, certified interval, or infinity.

    infinity compares above every finite value and absorbs addition.
    """

    form: str
    lo: Fraction | None = None
    hi: Fraction | None = None
    digits: int | None = None
    provenance: Provenance = field(default=AXIOM, compare=False)

    def __post_init__(self):
        if self.form == "exact":
            object.__setattr__(self, "lo", _frac(self.lo))
            object.__setattr__(self, "hi", self.lo)
            if self.lo <= 0:
                raise InputError("r-values are positive")
        elif self.form == "interval":
            object.__setattr__(self, "lo", _frac(self.lo))
            object.__setattr__(self, "hi", _frac(self.hi))
            if self.lo > self.hi:
                raise InputError("interval with lo > hi")
            if self.lo <= 0:
                raise InputError("r-values are positive")
        elif self.form == "infinity":
            object.__setattr__(self, "lo", None)
            object.__setattr__(self, "hi", None)
        else:
            raise InputError(f"unknown RValue form {self.form!r}")

    @classmethod
    def exact(cls, q: Any, provenance: Provenance = AXIOM) -> RValue:
        return cls("exact", _frac(q), None, None, provenance)

    @classmethod
    def interval(cls, lo: Any, hi: Any, digits: int | None = None,
                 provenance: Provenance = AXIOM) -> RValue:
        return cls("interval", _frac(lo), _frac(hi), digits, provenance)

    @classmethod
    def infinity(cls, provenance: Provenance = AXIOM) -> RValue:
        return cls("infinity", provenance=provenance)

    @property
    def is_infinite(self) -> bool:
        return self.form == "infinity"

    @property
    def is_finite(self) -> bool:
        return self.form != "infinity"

    def with_provenance(self, provenance: Provenance) -> RValue:
        return RValue(self.form, self.lo, self.hi, self.digits, provenance)

    def lower(self) -> Fraction | None:
        """Lower end; None stands for infinity."""
        return self.lo

    def upper(self) -> Fraction | None:
        return self.hi

    def definitely_lt(self, other: RValue) -> bool | None:
        """True if self < other for certain, False if certainly not, None if undecided."""
        if self.is_infinite:
            return False
        if other.is_infinite:
            return True
        if self.hi < other.lo:
            return True
        if self.lo >= other.hi:
            return False
        return None

    def same_value(self, other: RValue) -> bool:
        return (self.form, self.lo, self.hi) == (other.form, other.lo, other.hi)

    def __str__(self) -> str:
        if self.form == "infinity":
            return "inf"
        if self.form == "exact":
            return str(self.lo)
        mid = (self.lo + self.hi) / 2
        rad = (self.hi - self.lo) / 2
        d = self.digits or 12
        return f"{_dec(mid, d + 2)} +- {float(rad):.2g}"

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"form": self.form, "provenance": self.provenance.to_dict()}
        if self.form == "exact":
            d["value"] = str(self.lo)
            d["value_error"] = "0"
        elif self.form == "interval":
            d["lo"], d["hi"] = str(self.lo), str(self.hi)
            d["value"] = _dec((self.lo + self.hi) / 2, (self.digits or 12) + 2)
            d["value_error"] = f"{float((self.hi - self.lo) / 2):.3g}"
        return d


def _dec(q: Fraction, digits: int) -> str:
    """Fixed-point decimal rendering of a rational."""
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = q.numerator * 10**digits // q.denominator
    ip, fp = divmod(scaled, 10**digits)
    return f"{sign}{ip}.{fp:0{digits}d}"


def rmin(a: RValue, b: RValue) -> RValue:
    if a.is_infinite:
        return b
    if b.is_infinite:
        return a
    lt = a.definitely_lt(b)
    if lt is True:
        return a
    if b.definitely_lt(a) is True:
        return b
    if a.same_value(b):
        return a
    return RValue.interval(min(a.lo, b.lo), min(a.hi, b.hi))


# --- generators ------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Seifert:
    a: tuple[int, ...]

    def __post_init__(self):
        a = tuple(sorted(int(x) for x in self.a))
        if len(a) < 3 or any(x < 2 for x in a):
            raise InputError("a Seifert sphere needs at least three integers >= 2")
        for i in range(len(a)):
            for j in range(i + 1, len(a)):
                if math.gcd(a[i], a[j]) != 1:
                    raise NotCoprime(f"{a[i]} and {a[j]} are not coprime")
        object.__setattr__(self, "a", a)

    def product(self) -> int:
        return reduce(lambda x, y: x * y, self.a, 1)

    def __str__(self) -> str:
        return "S(" + ",".join(map(str, self.a)) + ")"


@dataclass(frozen=True, order=True)
class Surgery:
    knot: str
    n: int

    def __str__(self) -> str:
        return f"Surg({self.knot},1/{self.n})"


@dataclass(frozen=True, order=True)
class Named:
    name: str

    def __str__(self) -> str:
        return self.name


Generator = Union[Seifert, Surgery, Named]


def _gen_key(g: Generator):
    return (type(g).__name__, str(g))


@dataclass(frozen=True)
class ManifoldExpr:
    """Formal integer combination of homology spheres; the empty sum is S^3."""

    terms: tuple[tuple[int, Generator], ...] = ()

    def __post_init__(self):
        acc: dict = {}
        for c, g in self.terms:
            acc[g] = acc.get(g, 0) + int(c)
        clean = tuple(sorted(((c, g) for g, c in acc.items() if c), key=lambda cg: _gen_key(cg[1])))
        object.__setattr__(self, "terms", clean)

    @classmethod
    def of(cls, g: Generator, c: int = 1) -> ManifoldExpr:
        return cls(((c, g),))

    def __add__(self, other: ManifoldExpr) -> ManifoldExpr:
        return ManifoldExpr(self.terms + other.terms)

    def __neg__(self) -> ManifoldExpr:
        return ManifoldExpr(tuple((-c, g) for c, g in self.terms))

    def __sub__(self, other: ManifoldExpr) -> ManifoldExpr:
        return self + (-other)

    def scale(self, k: int) -> ManifoldExpr:
        return ManifoldExpr(tuple((k * c, g) for c, g in self.terms))

    @property
    def is_s3(self) -> bool:
        return not self.terms

    def single(self) -> tuple[int, Generator] | None:
        return self.terms[0] if len(self.terms) == 1 else None

    def __str__(self) -> str:
        if not self.terms:
            return "S3"
        parts = []
        for c, g in self.terms:
            if c == 1:
                parts.append(str(g))
            elif c == -1:
                parts.append(f"-{g}")
            else:
                parts.append(f"{c}*{g}")
        return " # ".join(parts)


S3 = ManifoldExpr()


def seifert(*a: int, sign: int = 1) -> ManifoldExpr:
    return ManifoldExpr.of(Seifert(tuple(a)), sign)
