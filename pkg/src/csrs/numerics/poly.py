"""Univariate complex polynomials and a simultaneous root finder."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

from ..errors import DegenerateInput, NoConvergence
from .precision import AppComplex, PrecisionPolicy, make_context

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolyC:
    """Polynomial with AppComplex coefficients in ascending degree.

    Trailing (highest-degree) coefficients whose modulus is at most the
    zero threshold 2^(-bits/2) are trimmed on construction.
    """

    coefficients: tuple[AppComplex, ...]

    def __post_init__(self):
        coeffs = list(self.coefficients)
        if coeffs:
            bits = min(c.precision_bits for c in coeffs)
            thr = 2.0 ** (-bits / 2)
            while coeffs and abs(coeffs[-1]) <= thr:
                coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def from_values(cls, values: Sequence[Any], bits: int) -> PolyC:
        return cls(tuple(AppComplex.from_value(v, bits) for v in values))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, z, ctx):
        acc = ctx.mpc(0)
        for c in reversed(self.coefficients):
            acc = acc * z + c.to_ctx(ctx)
        return acc


def _horner2(coeffs, z):
    """p(z) and p'(z) by Horner's scheme."""
    p = coeffs[-1]
    dp = 0
    for c in reversed(coeffs[:-1]):
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _aberth(ctx, coeffs, max_iter):
    d = len(coeffs) - 1
    lead = coeffs[-1]
    mono = [c / lead for c in coeffs]
    # Fujiwara-type radius and centroid for the starting circle.
    radius = max(abs(mono[d - k]) ** (ctx.mpf(1) / k) for k in range(1, d + 1)) * 2
    if radius == 0:
        radius = ctx.mpf(1)
    centre = -mono[d - 1] / d
    zs = [centre + radius * ctx.expj(2 * ctx.pi * k / d + ctx.mpf("0.4")) for k in range(d)]
    eps = ctx.ldexp(1, -ctx.prec + 6)
    absc = [abs(c) for c in mono]
    for it in range(max_iter):
        worst = 0
        settled = True
        for k in range(d):
            z = zs[k]
            p, dp = _horner2(mono, z)
            az = abs(z)
            scale = 0
            for c in reversed(absc):
                scale = scale * az + c
            if abs(p) <= eps * scale:
                continue
            settled = False
            if dp == 0:
                dp = eps
            ratio = p / dp
            acc = 0
            for j in range(d):
                if j != k:
                    diff = z - zs[j]
                    if diff != 0:
                        acc += 1 / diff
            w = ratio / (1 - ratio * acc)
            zs[k] = z - w
            rel = abs(w) / max(1, abs(zs[k]))
            if rel > worst:
                worst = rel
        if settled or worst <= eps:
            return zs, True
    return zs, False


def _error_bound(ctx, coeffs, z):
    """Radius of a disk around ``z`` that provably holds a root.

    Two classical bounds are combined: d|p/p'| and (|p|/|a_d|)^(1/d); the
    evaluation is padded by a running-error term for roundoff.
    """
    d = len(coeffs) - 1
    p, dp = _horner2(coeffs, z)
    az = abs(z)
    scale = 0
    for c in reversed(coeffs):
        scale = scale * az + abs(c)
    pabs = abs(p) + 2 * d * ctx.ldexp(1, -ctx.prec) * scale
    bound = (pabs / abs(coeffs[-1])) ** (ctx.mpf(1) / d)
    if dp != 0:
        bound = min(bound, d * pabs / abs(dp))
    return bound, abs(p)


def poly_roots(p: PolyC, policy: PrecisionPolicy) -> list[tuple[AppComplex, float]]:
    """All roots of ``p`` with multiplicity, each with a certified error radius.

    Uses Aberth-Ehrlich iteration and doubles the working precision when the
    residual test fails, up to ``policy.max_escalations`` times.
    """
    if p.degree < 1:
        raise DegenerateInput("polynomial trims to a constant")
    pol = policy
    while True:
        ctx = make_context(pol.working_bits)
        coeffs = [c.to_ctx(ctx) for c in p.coefficients]
        d = len(coeffs) - 1
        zs, converged = _aberth(ctx, coeffs, 200 + 40 * d)
        maxc = max(abs(c) for c in coeffs)
        tol = pol.target_mpf(ctx) * maxc
        out = []
        ok = converged
        for z in zs:
            bound, res = _error_bound(ctx, coeffs, z)
            if res > tol:
                ok = False
                break
            out.append((AppComplex.from_ctx(z, pol.working_bits), max(float(bound), 1e-300)))
        if ok:
            out.sort(key=lambda r: (round(r[0].real, 12), round(r[0].imag, 12)))
            return out
        if pol.max_escalations <= 0:
            raise NoConvergence(f"root finder failed at {pol.working_bits} bits")
        log.debug("poly_roots escalating from %d bits", pol.working_bits)
        pol = pol.escalated()
