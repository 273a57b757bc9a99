"""Precision-tracked complex values and the precision policy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import Decimal
from fractions import Fraction
from typing import Any

import mpmath
from mpmath import libmp

from ..errors import DegenerateInput, InputError

MIN_BITS = 64

_NONFINITE = (libmp.fnan, libmp.finf, libmp.fninf)


def parse_decimal(value: Any) -> Fraction:
    """Exact rational from a decimal string, int, Fraction or float."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(Decimal(repr(value)))
    try:
        return Fraction(Decimal(str(value).strip()))
    except Exception as exc:  # decimal.InvalidOperation and friends
        raise InputError(f"not a decimal number: {value!r}") from exc


def make_context(bits: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


@dataclass(frozen=True)
class AppComplex:
    """Complex number stored as raw mpmath mantissa/exponent tuples.

    Keeping the raw tuples means the value is independent of any mpmath
    context; ``to_ctx`` materializes it inside a caller-owned context.
    """

    re: tuple
    im: tuple
    precision_bits: int

    def __post_init__(self):
        if self.precision_bits < MIN_BITS:
            raise InputError(f"precision_bits must be >= {MIN_BITS}")
        if self.re in _NONFINITE or self.im in _NONFINITE:
            raise DegenerateInput("non-finite AppComplex")

    @classmethod
    def from_value(cls, value: Any, bits: int) -> AppComplex:
        ctx = make_context(bits)
        if isinstance(value, AppComplex):
            z = value.to_ctx(ctx)
        elif isinstance(value, Fraction):
            z = ctx.mpc(ctx.mpf(value.numerator) / value.denominator)
        elif isinstance(value, (tuple, list)) and len(value) == 2:
            z = ctx.mpc(ctx.convert(value[0]), ctx.convert(value[1]))
        else:
            z = ctx.mpc(ctx.convert(value))
        return cls.from_ctx(z, bits)

    @classmethod
    def from_ctx(cls, z: Any, bits: int) -> AppComplex:
        if hasattr(z, "_mpc_"):
            re, im = z._mpc_
        elif hasattr(z, "_mpf_"):
            re, im = z._mpf_, libmp.fzero
        else:
            return cls.from_value(z, bits)
        return cls(libmp.mpf_pos(re, bits, "n"), libmp.mpf_pos(im, bits, "n"), bits)

    def to_ctx(self, ctx) -> Any:
        return ctx.make_mpc((self.re, self.im))

    @property
    def real(self) -> float:
        return libmp.to_float(self.re, rnd="n")

    @property
    def imag(self) -> float:
        return libmp.to_float(self.im, rnd="n")

    def __complex__(self) -> complex:
        return complex(self.real, self.imag)

    def __abs__(self) -> float:
        return abs(complex(self))

    def conjugate(self) -> AppComplex:
        return AppComplex(self.re, libmp.mpf_neg(self.im), self.precision_bits)

    def to_str(self, digits: int | None = None) -> str:
        if digits is None:
            digits = max(6, int(self.precision_bits * math.log10(2)) - 2)
        re = libmp.to_str(self.re, digits)
        if self.im == libmp.fzero:
            return re
        im = libmp.to_str(libmp.mpf_abs(self.im), digits)
        sign = "-" if libmp.mpf_sign(self.im) < 0 else "+"
        return f"{re} {sign} {im}i"

    def __str__(self) -> str:
        return self.to_str(17)

    def __repr__(self) -> str:
        return f"AppComplex({self.to_str(20)}, bits={self.precision_bits})"


@dataclass(frozen=True)
class PrecisionPolicy:
    """Working precision, target absolute error and escalation budget.

    ``target_abs_error`` is kept as an exact rational so that values such
    as 1e-50 survive the round trip from the command line unchanged.
    """

    working_bits: int = 128
    target_abs_error: Fraction = field(default=Fraction(1, 10**25))
    max_escalations: int = 2

    def __post_init__(self):
        object.__setattr__(self, "target_abs_error", parse_decimal(self.target_abs_error))
        if self.working_bits < MIN_BITS:
            raise InputError(f"working_bits must be >= {MIN_BITS}")
        if self.max_escalations < 0:
            raise InputError("max_escalations must be non-negative")
        if self.target_abs_error <= 0:
            raise InputError("target_abs_error must be positive")
        if self.target_abs_error <= Fraction(1, 2**self.working_bits):
            raise InputError(
                f"target error {float(self.target_abs_error):.3g} is below 2^-{self.working_bits}"
            )

    @classmethod
    def for_target(cls, target: Any, bits: int = 128, guard_bits: int = 40,
                   max_escalations: int = 2) -> PrecisionPolicy:
        """Policy whose working precision comfortably resolves ``target``."""
        tgt = parse_decimal(target)
        need = math.ceil(-math.log2(tgt)) + guard_bits if tgt < 1 else MIN_BITS
        return cls(max(bits, need, MIN_BITS), tgt, max_escalations)

    def context(self):
        return make_context(self.working_bits)

    def escalated(self) -> PrecisionPolicy:
        if self.max_escalations <= 0:
            raise InputError("no escalations left")
        return replace(self, working_bits=2 * self.working_bits,
                       max_escalations=self.max_escalations - 1)

    @property
    def zero_threshold(self) -> float:
        return 2.0 ** (-self.working_bits / 2)

    @property
    def target(self) -> float:
        return float(self.target_abs_error)

    def target_mpf(self, ctx):
        t = self.target_abs_error
        return ctx.mpf(t.numerator) / t.denominator

    def roundoff(self, ctx):
        return ctx.ldexp(1, -self.working_bits + 4)
