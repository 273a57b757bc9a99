"""Piecewise line/arc paths in the complex plane."""

from __future__ import annotations

import bisect
import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

from ..errors import ClearanceViolation, InputError
from .precision import AppComplex, make_context


@dataclass(frozen=True)
class Line:
    start: AppComplex
    end: AppComplex

    def bind(self, ctx):
        a, b = self.start.to_ctx(ctx), self.end.to_ctx(ctx)
        d = b - a
        return (lambda tau: a + d * tau), (lambda tau: d)

    def length(self) -> float:
        return abs(complex(self.end) - complex(self.start))

    def distance_to(self, z: complex) -> float:
        a, b = complex(self.start), complex(self.end)
        d = b - a
        if d == 0:
            return abs(z - a)
        tau = min(1.0, max(0.0, ((z - a) * d.conjugate()).real / abs(d) ** 2))
        return abs(z - (a + tau * d))

    def reversed(self) -> Line:
        return Line(self.end, self.start)

    def conjugate(self) -> Line:
        return Line(self.start.conjugate(), self.end.conjugate())


@dataclass(frozen=True)
class Arc:
    """Circular arc about ``center`` starting at ``start``, turning by ``sweep`` radians.

    Positive sweep is counterclockwise. The end point is derived, so the
    start always coincides exactly with the previous piece's end.
    """

    center: AppComplex
    start: AppComplex
    sweep: AppComplex  # real part only; stored at full precision
    end: AppComplex = field(init=False)

    def __post_init__(self):
        bits = min(self.center.precision_bits, self.start.precision_bits)
        ctx = make_context(bits)
        c, s0 = self.center.to_ctx(ctx), self.start.to_ctx(ctx)
        e = c + (s0 - c) * ctx.expj(self.sweep.to_ctx(ctx).real)
        object.__setattr__(self, "end", AppComplex.from_ctx(e, bits))

    def bind(self, ctx):
        c, s0 = self.center.to_ctx(ctx), self.start.to_ctx(ctx)
        v = s0 - c
        th = self.sweep.to_ctx(ctx).real
        j = ctx.mpc(0, 1)
        return ((lambda tau: c + v * ctx.expj(th * tau)),
                (lambda tau: j * th * v * ctx.expj(th * tau)))

    @property
    def radius(self) -> float:
        return abs(complex(self.start) - complex(self.center))

    def length(self) -> float:
        return self.radius * abs(self.sweep.real)

    def distance_to(self, z: complex) -> float:
        c = complex(self.center)
        r = self.radius
        th0 = cmath.phase(complex(self.start) - c)
        sw = self.sweep.real
        if z == c:
            return r
        phi = cmath.phase(z - c)
        rel = (phi - th0) if sw >= 0 else (th0 - phi)
        rel %= 2 * math.pi
        if rel <= abs(sw) or abs(sw) >= 2 * math.pi:
            return abs(abs(z - c) - r)
        return min(abs(z - complex(self.start)), abs(z - complex(self.end)))

    def reversed(self) -> Arc:
        return Arc(self.center, self.end, AppComplex.from_ctx(-self.sweep.to_ctx(
            make_context(self.sweep.precision_bits)).real, self.sweep.precision_bits))

    def conjugate(self) -> Arc:
        ctx = make_context(self.sweep.precision_bits)
        return Arc(self.center.conjugate(), self.start.conjugate(),
                   AppComplex.from_ctx(-self.sweep.to_ctx(ctx).real, self.sweep.precision_bits))


Segment = Union[Line, Arc]


@dataclass(frozen=True)
class PlanePath:
    """Concatenation of segments parametrized over ``domain``.

    Each segment gets a share of the domain proportional to its arclength;
    the shares' boundaries are the path's breakpoints.
    """

    segments: tuple[Segment, ...]
    clearance: float = 1e-3
    forbidden: tuple[complex, ...] = ()
    domain: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "forbidden", tuple(complex(z) for z in self.forbidden))
        if not segs:
            raise InputError("a path needs at least one segment")
        if self.clearance <= 0:
            raise InputError("clearance must be positive")
        for a, b in zip(segs, segs[1:]):
            bits = min(a.end.precision_bits, b.start.precision_bits)
            ctx = make_context(bits)
            gap = abs(a.end.to_ctx(ctx) - b.start.to_ctx(ctx))
            if gap > ctx.ldexp(1, -bits + 20) * max(1, abs(a.end)):
                raise InputError(f"segments do not join (gap {float(gap):.3g})")
        for z in self.forbidden:
            dist = min(seg.distance_to(z) for seg in segs)
            if dist < self.clearance:
                raise ClearanceViolation(
                    f"path passes within {dist:.3g} of forbidden point {z:.6g}")

    @property
    def start(self) -> AppComplex:
        return self.segments[0].start

    @property
    def end(self) -> AppComplex:
        return self.segments[-1].end

    def length(self) -> float:
        return sum(seg.length() for seg in self.segments)

    def fractions(self) -> list[float]:
        lens = [max(seg.length(), 1e-300) for seg in self.segments]
        total = sum(lens)
        acc, out = 0.0, [0.0]
        for ell in lens[:-1]:
            acc += ell
            out.append(acc / total)
        out.append(1.0)
        return out

    def breakpoints(self) -> list[float]:
        s0, s1 = self.domain
        return [s0 + (s1 - s0) * f for f in self.fractions()]

    def min_distance(self, z: complex) -> float:
        return min(seg.distance_to(complex(z)) for seg in self.segments)

    def evaluator(self, ctx) -> PathEvaluator:
        return PathEvaluator(self, ctx)

    def reversed(self) -> PlanePath:
        return PlanePath(tuple(seg.reversed() for seg in reversed(self.segments)),
                         self.clearance, self.forbidden, self.domain)

    def conjugate(self) -> PlanePath:
        return PlanePath(tuple(seg.conjugate() for seg in self.segments), self.clearance,
                         tuple(z.conjugate() for z in self.forbidden), self.domain)

    def with_domain(self, s0: float, s1: float) -> PlanePath:
        return PlanePath(self.segments, self.clearance, self.forbidden, (s0, s1))


class PathEvaluator:
    """Evaluates a PlanePath and its derivative inside one mpmath context."""

    def __init__(self, path: PlanePath, ctx):
        self.ctx = ctx
        self.path = path
        s0, s1 = path.domain
        self.s0, self.s1 = ctx.convert(s0), ctx.convert(s1)
        fr = path.fractions()
        self.bps = [self.s0 + (self.s1 - self.s0) * ctx.convert(f) for f in fr]
        self.bps[-1] = self.s1
        self.pieces = [seg.bind(ctx) for seg in path.segments]

    def locate(self, s, piece: int | None = None):
        if piece is None:
            piece = bisect.bisect_right(self.bps, s) - 1
            piece = min(max(piece, 0), len(self.pieces) - 1)
        a, b = self.bps[piece], self.bps[piece + 1]
        return piece, (s - a) / (b - a), b - a

    def point(self, s, piece: int | None = None):
        k, tau, _ = self.locate(s, piece)
        return self.pieces[k][0](tau)

    def deriv(self, s, piece: int | None = None):
        k, tau, h = self.locate(s, piece)
        return self.pieces[k][1](tau) / h

    def piece_of_interval(self, a, b) -> int:
        return self.locate((a + b) / 2)[0]


def _ac(z: Any, bits: int) -> AppComplex:
    return z if isinstance(z, AppComplex) else AppComplex.from_value(z, bits)


class PathBuilder:
    """Incremental construction of a PlanePath with exact joins."""

    def __init__(self, start: Any, bits: int):
        self.bits = bits
        self.current = _ac(start, bits)
        self.segments: list[Segment] = []

    def line_to(self, z: Any) -> PathBuilder:
        z = _ac(z, self.bits)
        # joins closer than the working precision are snapped, not drawn
        ctx = make_context(self.bits)
        gap = abs(z.to_ctx(ctx) - self.current.to_ctx(ctx))
        if gap > ctx.ldexp(1, -self.bits + 16) * max(1, abs(z)):
            self.segments.append(Line(self.current, z))
            self.current = z
        return self

    def arc_about(self, center: Any, sweep: Any) -> PathBuilder:
        arc = Arc(_ac(center, self.bits), self.current, _ac(sweep, self.bits))
        self.segments.append(arc)
        self.current = arc.end
        return self

    def arc_to_angle(self, center: Any, angle: Any, turns: int = 0) -> PathBuilder:
        """Arc about ``center`` to polar angle ``angle``; direction by shortest turn plus ``turns`` full turns."""
        ctx = make_context(self.bits)
        c = _ac(center, self.bits).to_ctx(ctx)
        th0 = ctx.arg(self.current.to_ctx(ctx) - c)
        sweep = ctx.convert(angle) - th0
        sweep = sweep - 2 * ctx.pi * ctx.nint(sweep / (2 * ctx.pi)) + 2 * ctx.pi * turns
        return self.arc_about(center, sweep)

    def arc_to_point(self, center: Any, z: Any, turns: int = 0) -> PathBuilder:
        """Arc about ``center`` to the polar angle of ``z``, computed at full precision."""
        ctx = make_context(self.bits)
        c = _ac(center, self.bits).to_ctx(ctx)
        return self.arc_to_angle(center, ctx.arg(_ac(z, self.bits).to_ctx(ctx) - c), turns)

    def build(self, clearance: float = 1e-3, forbidden: Sequence[complex] = (),
              domain: tuple[float, float] = (0.0, 1.0)) -> PlanePath:
        return PlanePath(tuple(self.segments), clearance, tuple(forbidden), domain)
