"""Two-generator knot group presentations <x, y | w x = y w>."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .errors import InvalidFraction, InvariantViolation, SchemaError

GENERATORS = ("x", "y")


def _reduce(letters: Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
    out: list[list] = []
    for g, e in letters:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            out[-1][1] += e
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([g, e])
    return tuple((g, e) for g, e in out)


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced word in x, y stored as (generator, exponent) syllables."""

    letters: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        for item in self.letters:
            if len(item) != 2 or item[0] not in GENERATORS or not isinstance(item[1], int):
                raise SchemaError(f"bad letter {item!r}")
        object.__setattr__(self, "letters", _reduce(tuple(tuple(x) for x in self.letters)))

    @classmethod
    def parse(cls, text: str) -> GroupWord:
        """Parse e.g. ``"y x^-1 y^-1 x"``; upper-case letters denote inverses."""
        letters = []
        for tok in text.replace("*", " ").split():
            base, _, exp = tok.partition("^")
            if base in ("X", "Y"):
                g, sign = base.lower(), -1
            else:
                g, sign = base, 1
            if g not in GENERATORS:
                raise SchemaError(f"unknown generator in {tok!r}")
            letters.append((g, sign * (int(exp) if exp else 1)))
        return cls(tuple(letters))

    def __mul__(self, other: GroupWord) -> GroupWord:
        return GroupWord(self.letters + other.letters)

    def __pow__(self, k: int) -> GroupWord:
        base = self if k >= 0 else self.inverse()
        return GroupWord(base.letters * abs(k))

    def inverse(self) -> GroupWord:
        return GroupWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def reversed(self) -> GroupWord:
        return GroupWord(tuple(reversed(self.letters)))

    def exponent_sum(self, generator: str | None = None) -> int:
        return sum(e for g, e in self.letters if generator is None or g == generator)

    def syllable_length(self) -> int:
        return sum(abs(e) for _, e in self.letters)

    def unit_letters(self) -> list[tuple[str, int]]:
        out = []
        for g, e in self.letters:
            out.extend([(g, 1 if e > 0 else -1)] * abs(e))
        return out

    def to_list(self) -> list[list]:
        return [[g, e] for g, e in self.letters]

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(g if e == 1 else f"{g}^{e}" for g, e in self.letters)


def commutator(a: GroupWord, b: GroupWord) -> GroupWord:
    """[a, b] = a b a^-1 b^-1."""
    return a * b * a.inverse() * b.inverse()


X = GroupWord((("x", 1),))
Y = GroupWord((("y", 1),))


@dataclass(frozen=True)
class KnotPresentation:
    name: str
    relator_w: GroupWord
    meridian: GroupWord
    longitude: GroupWord
    fraction: tuple[int, int] | None = None

    def __post_init__(self):
        if self.meridian != X:
            raise InvariantViolation("meridian", "meridian must be the single letter x")
        if self.longitude.exponent_sum() != 0:
            raise InvariantViolation(
                "longitude_exponent_sum",
                f"longitude exponent sum is {self.longitude.exponent_sum()}, expected 0")
        if not self.relator_w.letters:
            raise InvariantViolation("relator_length", "relator word is empty after reduction")

    def relation_word(self) -> GroupWord:
        """w x w^-1 y^-1, trivial in the knot group."""
        return self.relator_w * X * self.relator_w.inverse() * Y.inverse()

    def to_document(self) -> dict:
        doc = {"name": self.name, "relator": self.relator_w.to_list(),
               "longitude": self.longitude.to_list()}
        if self.fraction is not None:
            doc["fraction"] = list(self.fraction)
        return doc


def builtin_5_2() -> KnotPresentation:
    w = commutator(Y, X.inverse()) ** 2
    lam = commutator(X, Y.inverse()) ** 2 * commutator(Y, X.inverse()) ** 2
    return KnotPresentation("5_2", w, X, lam, (7, 2))


def _odd_representative(q: int, p: int) -> int:
    q %= p
    return q if q % 2 else q - p


def two_bridge_presentation(p: int, q: int) -> KnotPresentation:
    """Presentation of the two-bridge knot with fraction p/q.

    The word is x^e1 y^e2 x^e3 ... with e_i = (-1)^floor(i q'/p), where q'
    is the odd representative of q^-1 mod p in (-p, p); this choice makes
    (7, 2) reproduce the built-in 5_2 Riley polynomial exactly.
    """
    if not (isinstance(p, int) and isinstance(q, int)):
        raise InvalidFraction("p and q must be integers")
    if p < 3 or p % 2 == 0:
        raise InvalidFraction(f"p must be an odd integer >= 3, got {p}")
    if not 0 < q < p or math.gcd(p, q) != 1:
        raise InvalidFraction(f"need 0 < q < p with gcd(p, q) = 1, got {p}/{q}")
    qq = _odd_representative(pow(q, -1, p), p)
    eps = [1 if ((i * qq) // p) % 2 == 0 else -1 for i in range(1, p)]
    w = GroupWord(tuple(("x" if i % 2 == 0 else "y", e) for i, e in enumerate(eps)))
    e = sum(eps)
    lam = w.reversed() * w * GroupWord((("x", -2 * e),))
    return KnotPresentation(f"K({p}/{q})", w, X, lam, (p, q))


def twist_knot(k: int) -> KnotPresentation:
    """The twist knot K_k with fraction 2/(4k-1): K_1 is a trefoil, K_2 is 5_2."""
    if not isinstance(k, int) or k < 1:
        raise InvalidFraction(f"twist parameter must be a positive integer, got {k!r}")
    pres = two_bridge_presentation(4 * k - 1, 2)
    return KnotPresentation(f"K_{k}", pres.relator_w, pres.meridian, pres.longitude,
                            pres.fraction)


def _word_from_json(obj: Any, field: str) -> GroupWord:
    if isinstance(obj, str):
        return GroupWord.parse(obj)
    if not isinstance(obj, list):
        raise SchemaError(f"{field} must be a list of [generator, exponent] pairs")
    letters = []
    for item in obj:
        if (not isinstance(item, (list, tuple)) or len(item) != 2 or item[0] not in GENERATORS
                or not isinstance(item[1], int) or isinstance(item[1], bool)):
            raise SchemaError(f"{field}: bad letter {item!r}")
        letters.append((item[0], item[1]))
    return GroupWord(tuple(letters))


def parse_presentation(document: str | bytes | dict) -> KnotPresentation:
    """Build a presentation from the knot-file JSON schema.

    ``{"name": str, "relator": [["y", 1], ...], "longitude": [...],
    "fraction": [p, q]}``; ``fraction`` and ``meridian`` are optional.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SchemaError("knot file must be a JSON object")
    for key in ("name", "relator", "longitude"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
    unknown = set(doc) - {"name", "relator", "longitude", "fraction", "meridian"}
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)}")
    if not isinstance(doc["name"], str):
        raise SchemaError("name must be a string")
    frac = doc.get("fraction")
    if frac is not None:
        if (not isinstance(frac, list) or len(frac) != 2
                or not all(isinstance(v, int) for v in frac)):
            raise SchemaError("fraction must be [p, q]")
        frac = (frac[0], frac[1])
    meridian = _word_from_json(doc["meridian"], "meridian") if "meridian" in doc else X
    return KnotPresentation(doc["name"], _word_from_json(doc["relator"], "relator"), meridian,
                            _word_from_json(doc["longitude"], "longitude"), frac)


def resolve_knot(spec: str) -> KnotPresentation:
    """Resolve ``builtin:5_2``, ``twist:k``, ``two_bridge:p/q`` or ``file:path``."""
    kind, _, arg = spec.partition(":")
    if kind == "builtin":
        if arg in ("5_2", "52"):
            return builtin_5_2()
        raise SchemaError(f"unknown builtin knot {arg!r}")
    if kind == "twist":
        try:
            return twist_knot(int(arg))
        except ValueError as exc:
            raise InvalidFraction(f"bad twist parameter {arg!r}") from exc
    if kind == "two_bridge":
        try:
            p, q = (int(v) for v in arg.split("/"))
        except ValueError as exc:
            raise InvalidFraction(f"bad fraction {arg!r}") from exc
        return two_bridge_presentation(p, q)
    if kind == "file":
        try:
            with open(arg, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise SchemaError(f"cannot read knot file {arg!r}: {exc}") from exc
        return parse_presentation(text)
    raise SchemaError(f"unrecognized knot spec {spec!r}")
