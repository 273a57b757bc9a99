"""Logarithm continuation and branch lifting along plane paths."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

from ..errors import BranchCollision, BranchLoss, NewtonDivergence, StepTooCoarse
from .paths import PlanePath
from .precision import AppComplex, PrecisionPolicy, make_context


@dataclass(frozen=True)
class LogContinuation:
    samples: tuple[tuple[float, AppComplex], ...]
    endpoint: AppComplex


def _step_log(ctx, prev_log, prev_val, val):
    """Continue a branch of log from prev_val to val, or None if the step is too coarse."""
    q = val / prev_val
    if q.real <= 0 and abs(q.imag) <= abs(q.real):  # within 45 degrees of the cut
        return None
    return prev_log + ctx.log(q)


def continue_log_values(ctx, values: Sequence, initial, threshold=None) -> list:
    """Continued logs of a sample sequence; raises StepTooCoarse on a jump of at least pi."""
    out = [initial]
    if threshold is None:
        threshold = ctx.ldexp(1, -ctx.prec // 2)
    for a, b in zip(values, values[1:]):
        if abs(b) <= threshold:
            raise BranchLoss("function vanishes along the path")
        q = b / a
        if q.real < 0 and abs(q.imag) <= ctx.ldexp(1, -ctx.prec // 2) * abs(q):
            raise StepTooCoarse("consecutive samples subtend an angle of pi")
        out.append(out[-1] + ctx.log(q))
    return out


def continue_log(path: PlanePath, f: Callable, initial_branch: Any, policy: PrecisionPolicy,
                 samples: int = 16, refine: bool = True) -> LogContinuation:
    """Continuous branch of log(f(t)) along ``path`` starting from ``initial_branch``.

    ``f`` receives path points as mpc values in the working context. Samples
    are uniform in each segment and are bisected while consecutive values
    turn by more than a right angle; with ``refine=False`` an overly coarse
    step raises StepTooCoarse instead.
    """
    ctx = policy.context()
    ev = path.evaluator(ctx)
    thr = ctx.ldexp(1, -policy.working_bits // 2)
    init = AppComplex.from_value(initial_branch, policy.working_bits).to_ctx(ctx)
    f0 = f(ev.point(ev.bps[0], 0))
    if abs(f0) <= thr:
        raise BranchLoss("function vanishes at the path start")
    if abs(ctx.exp(init) - f0) > ctx.sqrt(policy.target_mpf(ctx)) * max(1, abs(f0)):
        raise BranchLoss("initial branch does not match f at the path start")
    ss, vals = [], []
    for k in range(len(ev.pieces)):
        a, b = ev.bps[k], ev.bps[k + 1]
        for j in range(samples + (1 if k == len(ev.pieces) - 1 else 0)):
            s = a + (b - a) * j / samples
            ss.append((s, k))
            vals.append(f(ev.point(s, k)))
    for v in vals:
        if abs(v) <= thr:
            raise BranchLoss("function vanishes along the path")
    logs = [init + ctx.log(vals[0] / f0)]
    out_s = [ss[0][0]]
    depth_limit = 40
    for idx in range(1, len(vals)):
        (sa, ka), (sb, kb) = ss[idx - 1], ss[idx]
        k = kb if kb == ka else ka
        va, vb = vals[idx - 1], vals[idx]
        stack = [(sa, va, sb, vb, 0)]
        # depth-first subdivision keeps samples ordered
        while stack:
            a, fa, b, fb, depth = stack.pop()
            nxt = _step_log(ctx, logs[-1], fa, fb)
            if nxt is None:
                if not refine:
                    raise StepTooCoarse("consecutive samples subtend too large an angle")
                if depth >= depth_limit:
                    raise StepTooCoarse("refinement limit reached")
                m = (a + b) / 2
                fm = f(ev.point(m, k))
                if abs(fm) <= thr:
                    raise BranchLoss("function vanishes along the path")
                stack.append((m, fm, b, fb, depth + 1))
                stack.append((a, fa, m, fm, depth + 1))
                continue
            logs.append(nxt)
            out_s.append(b)
    bits = policy.working_bits
    samples_out = tuple((float(s), AppComplex.from_ctx(v, bits)) for s, v in zip(out_s, logs))
    return LogContinuation(samples_out, samples_out[-1][1])


class PlaneCurve:
    """Bivariate Laurent polynomial sum c_ab t^a u^b with a >= any integer, b >= 0."""

    def __init__(self, terms: Mapping[tuple[int, int], Any]):
        self.terms = {k: v for k, v in terms.items() if v != 0}
        if any(b < 0 for _, b in self.terms):
            raise ValueError("u-exponents must be non-negative")
        self.deg_u = max((b for _, b in self.terms), default=0)
        self.t_range = (min((a for a, _ in self.terms), default=0),
                        max((a for a, _ in self.terms), default=0))

    def bind(self, ctx) -> Callable:
        """Evaluator (t, u) -> (f, f_t, f_u, f_uu) inside ``ctx``."""
        by_u: dict[int, list] = {}
        for (a, b), c in sorted(self.terms.items()):
            by_u.setdefault(b, []).append((a, ctx.convert(c)))
        du = self.deg_u
        amin, amax = self.t_range

        def ev(t, u):
            tinv = 1 / t
            pw = {0: ctx.mpc(1)}
            for a in range(1, amax + 1):
                pw[a] = pw[a - 1] * t
            for a in range(-1, amin - 2, -1):
                pw[a] = pw[a + 1] * tinv
            cb = [ctx.mpc(0)] * (du + 1)
            cbt = [ctx.mpc(0)] * (du + 1)
            for b, lst in by_u.items():
                v = 0
                vt = 0
                for a, c in lst:
                    v += c * pw[a]
                    if a:
                        vt += a * c * pw[a - 1]
                cb[b] = v
                cbt[b] = vt
            f = ft = fu = fuu = ctx.mpc(0)
            for b in range(du, -1, -1):
                fuu = fuu * u + 2 * fu
                fu = fu * u + f
                f = f * u + cb[b]
                ft = ft * u + cbt[b]
            return f, ft, fu, fuu

        return ev

    def u_coefficients(self, t, ctx) -> list:
        """Coefficients of f(t, .) in ascending u-degree."""
        out = [ctx.mpc(0)] * (self.deg_u + 1)
        for (a, b), c in self.terms.items():
            out[b] += ctx.convert(c) * t ** a
        return out


@dataclass(frozen=True)
class LiftResult:
    """Accepted continuation steps; ``u_at`` refines to arbitrary parameters."""

    s: tuple
    t: tuple
    u: tuple
    du_left: tuple
    du_right: tuple
    endpoint: AppComplex
    bits: int
    path: PlanePath
    curve: PlaneCurve

    def samples(self) -> list[tuple[float, complex, complex]]:
        return [(s.real, complex(t), complex(u)) for s, t, u in zip(self.s, self.t, self.u)]

    def sampler(self, ctx) -> LiftSampler:
        return LiftSampler(self, ctx)


class LiftSampler:
    """Evaluates the lifted branch u(s) anywhere by Hermite prediction plus Newton."""

    def __init__(self, lift: LiftResult, ctx):
        self.ctx = ctx
        self.ev = lift.path.evaluator(ctx)
        self.f = lift.curve.bind(ctx)
        self.s = [x.to_ctx(ctx).real for x in lift.s]
        self.t = [x.to_ctx(ctx) for x in lift.t]
        self.u = [x.to_ctx(ctx) for x in lift.u]
        self.dl = [x.to_ctx(ctx) for x in lift.du_left]
        self.dr = [x.to_ctx(ctx) for x in lift.du_right]
        self.eps = ctx.ldexp(1, -ctx.prec + 10)

    def interval(self, s) -> int:
        k = bisect.bisect_right(self.s, s) - 1
        return min(max(k, 0), len(self.s) - 2)

    def __call__(self, s, piece: int | None = None):
        """(t, u, k) at parameter s, with k the skeleton interval index."""
        ctx = self.ctx
        k = self.interval(s)
        s0, s1 = self.s[k], self.s[k + 1]
        h = s1 - s0
        x = (s - s0) / h
        u0, u1 = self.u[k], self.u[k + 1]
        m0, m1 = self.dl[k] * h, self.dr[k] * h
        x2, x3 = x * x, x * x * x
        guess = ((2 * x3 - 3 * x2 + 1) * u0 + (x3 - 2 * x2 + x) * m0
                 + (-2 * x3 + 3 * x2) * u1 + (x3 - x2) * m1)
        if piece is None:
            piece = self.ev.piece_of_interval(s0, s1)
        t = self.ev.point(s, piece)
        u = guess
        scale = 1 + abs(u)
        for _ in range(12):
            f, _, fu, _ = self.f(t, u)
            if fu == 0:
                break
            du = f / fu
            u -= du
            if abs(du) <= self.eps * scale:
                break
        else:
            raise NewtonDivergence("node refinement did not converge")
        return t, u, k


def lift_branch(curve: PlaneCurve, path: PlanePath, u_start: Any, policy: PrecisionPolicy,
                max_step: float | None = None) -> LiftResult:
    """Track the root u(s) of curve(path(s), u) = 0 that starts at ``u_start``.

    Euler predictor, Newton corrector (at most four iterations per accepted
    step). A step is also rejected when the correction is large compared
    with |f_u/f_uu|, a proxy for the distance to the nearest other root.
    """
    bits = policy.working_bits
    ctx = make_context(bits)
    ev = path.evaluator(ctx)
    f = curve.bind(ctx)
    tol = ctx.ldexp(1, -bits + 12)
    target = policy.target_mpf(ctx)
    u = AppComplex.from_value(u_start, bits).to_ctx(ctx)
    t = ev.point(ev.bps[0], 0)
    fv, _, fu, _ = f(t, u)
    if abs(fv) > ctx.sqrt(target) * (1 + abs(fu)):
        raise NewtonDivergence("u_start is not on the curve above the path start")
    # polish the start onto the curve
    for _ in range(8):
        fv, _, fu, _ = f(t, u)
        if fu == 0:
            raise BranchCollision("start point is a branch point")
        du = fv / fu
        u -= du
        if abs(du) <= tol * (1 + abs(u)):
            break
    span = ev.s1 - ev.s0
    hmax = span / 8 if max_step is None else ctx.convert(max_step) * span
    hmin = span * ctx.ldexp(1, -40)
    S, T, U, DL, DR = [ev.s0], [t], [u], [], []

    def slope(s, t, u, piece):
        _, ft, fu, _ = f(t, u)
        if fu == 0:
            raise BranchCollision("f_u vanishes on the path")
        return -ft * ev.deriv(s, piece) / fu

    for k in range(len(ev.pieces)):
        a, b = ev.bps[k], ev.bps[k + 1]
        s = a
        h = min(hmax, (b - a) / 4)
        while s < b:
            if b - s <= h * ctx.mpf("1.01"):
                h = b - s
            s_new = s + h if h < b - s else b
            d0 = slope(s, t, u, k)
            t_new = ev.point(s_new, k)
            u_pred = u + d0 * (s_new - s)
            un = u_pred
            ok = False
            for it in range(4):
                fv, _, fu, fuu = f(t_new, un)
                if fu == 0:
                    break
                step = fv / fu
                un -= step
                if abs(step) <= tol * (1 + abs(un)):
                    ok = True
                    break
            if ok:
                _, _, fu, fuu = f(t_new, un)
                radius = abs(fu / fuu) if fuu != 0 else ctx.inf
                if abs(un - u_pred) > radius / 8 or abs(un - u) > radius / 2:
                    ok = False
            if not ok:
                h /= 2
                if h < hmin:
                    _, _, fu, fuu = f(t_new, u)
                    radius = abs(fu / fuu) if fuu != 0 else ctx.inf
                    if radius < ctx.sqrt(tol) * (1 + abs(u)):
                        raise BranchCollision(
                            f"fiber roots collide near t = {ctx.nstr(t_new, 8)}")
                    raise NewtonDivergence(f"step size underflow near s = {ctx.nstr(s, 8)}")
                continue
            DL.append(d0)
            DR.append(slope(s_new, t_new, un, k))
            s, t, u = s_new, t_new, un
            S.append(s)
            T.append(t)
            U.append(u)
            if it <= 1:
                h = min(h * ctx.mpf("1.5"), hmax)
    fv, _, _, _ = f(t, u)
    if abs(fv) > target:
        raise NewtonDivergence("final residual exceeds the target error")
    conv = lambda seq: tuple(AppComplex.from_ctx(x, bits) for x in seq)
    return LiftResult(tuple(AppComplex.from_ctx(ctx.mpc(x), bits) for x in S), conv(T), conv(U),
                      conv(DL), conv(DR), AppComplex.from_ctx(u, bits), bits, path, curve)
