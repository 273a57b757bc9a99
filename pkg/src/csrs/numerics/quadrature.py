"""Adaptive Gauss-Legendre quadrature over a real parameter interval."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

from ..errors import NoConvergence
from .precision import AppComplex, PrecisionPolicy, make_context

ORDER = 16


@lru_cache(maxsize=32)
def _nodes(order: int, bits: int):
    ctx = make_context(bits + 20)
    xs, ws = ctx.gauss_quadrature(order, "legendre")
    return tuple(x._mpf_ for x in xs), tuple(w._mpf_ for w in ws)


def gl_nodes(ctx, order: int = ORDER):
    xs, ws = _nodes(order, ctx.prec)
    return [ctx.make_mpf(x) for x in xs], [ctx.make_mpf(w) for w in ws]


def _panel(ctx, f, a, b, xs, ws):
    h = (b - a) / 2
    m = (a + b) / 2
    acc = ctx.mpc(0)
    for x, w in zip(xs, ws):
        acc += w * f(m + h * x)
    return acc * h


def integrate_ctx(ctx, f: Callable, a, b, tol, breakpoints: Sequence = (),
                  max_panels: int = 20000, min_panels: int = 1):
    """Core adaptive driver inside ``ctx``; returns (value, error_estimate)."""
    xs, ws = gl_nodes(ctx)
    pts = sorted({ctx.convert(a), ctx.convert(b), *[ctx.convert(p) for p in breakpoints
                                                   if a < p < b]})
    total_len = pts[-1] - pts[0]
    stack = []
    for lo, hi in zip(pts, pts[1:]):
        if hi <= lo:
            continue
        n = max(1, min_panels * (hi - lo) / total_len)
        n = int(ctx.ceil(n))
        for k in range(n):
            pa = lo + (hi - lo) * k / n
            pb = lo + (hi - lo) * (k + 1) / n if k + 1 < n else hi
            stack.append((pa, pb, _panel(ctx, f, pa, pb, xs, ws)))
    value = ctx.mpc(0)
    err = ctx.mpf(0)
    panels = 0
    floor = ctx.ldexp(1, -ctx.prec + 8)
    while stack:
        pa, pb, coarse = stack.pop()
        mid = (pa + pb) / 2
        left = _panel(ctx, f, pa, mid, xs, ws)
        right = _panel(ctx, f, mid, pb, xs, ws)
        fine = left + right
        diff = abs(fine - coarse)
        share = tol * (pb - pa) / total_len
        if diff <= share or diff <= floor * max(1, abs(fine)):
            value += fine
            err += diff
            continue
        panels += 1
        if panels > max_panels or (pb - pa) < floor * total_len:
            raise NoConvergence("adaptive quadrature exhausted its panel budget")
        stack.append((mid, pb, right))
        stack.append((pa, mid, left))
    return value, err


def integrate(domain: tuple, integrand: Callable, policy: PrecisionPolicy,
              breakpoints: Sequence = (), ctx=None) -> tuple[AppComplex, float]:
    """Integral of ``integrand`` over ``domain`` with an error estimate.

    ``integrand`` is called with mpf arguments from ``ctx`` (a fresh context
    at the policy's precision when omitted). A panel is accepted when its
    value agrees with the sum over its two halves within its share of the
    target; the error estimate is the sum of those disagreements.
    """
    if ctx is None:
        ctx = policy.context()
    s0, s1 = domain
    value, err = integrate_ctx(ctx, integrand, ctx.convert(s0), ctx.convert(s1),
                               policy.target_mpf(ctx), breakpoints)
    return AppComplex.from_ctx(value, ctx.prec), max(float(err), 1e-300)
