"""Command-line front end: riley, reps, cs and ledger subcommands."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from .csintegrator import (
    cs_absolute,
    orientation_flip,
    plan_paths,
    route_waypoints,
)
from .errors import ComputationError, CsrsError, InputError, SchemaError
from .numerics import AppComplex, PrecisionPolicy, parse_decimal
from .presentations import KnotPresentation, resolve_knot
from .repfinder import (
    RepPoint,
    SurgerySpec,
    builtin_apoly_5_2,
    casson_count_check,
    default_tolerance,
    eliminate_apoly,
    find_representations,
)
from .riley import RileyData, alexander_specialization, riley_polynomial, second_derivative_at_one

log = logging.getLogger("csrs")

ENV_BITS = "CSRS_PRECISION_BITS"
FORMATS = ("json", "table", "svg")


@dataclass(frozen=True)
class RunConfig:
    precision_bits: int = 128
    target_error: str = "1e-12"
    tolerance: str | None = None
    threads: int = 1
    output_format: str = "json"

    def __post_init__(self):
        if self.precision_bits < 64:
            raise InputError("precision bits must be at least 64")
        if self.threads < 1:
            raise InputError("threads must be positive")
        if self.output_format not in FORMATS:
            raise InputError(f"output format must be one of {FORMATS}")
        if parse_decimal(self.target_error) >= 1 or parse_decimal(self.target_error) <= 0:
            raise InputError("target error must lie in (0, 1)")
        if self.tolerance is not None:
            tol = parse_decimal(self.tolerance)
            if tol < Fraction(1, 2 ** self.precision_bits):
                raise InputError("tolerance is below the machine floor at this precision")

    def policy(self) -> PrecisionPolicy:
        return PrecisionPolicy.for_target(self.target_error, self.precision_bits)

    def tolerance_value(self, policy: PrecisionPolicy) -> float:
        if self.tolerance is None:
            return default_tolerance(policy)
        return float(parse_decimal(self.tolerance))


# --- formatting helpers ---------------------------------------------------------

def _num(x: float) -> str:
    return f"{x:.3e}"


def _mp_str(z: AppComplex, part: str, digits: int) -> str:
    import mpmath
    ctx = mpmath.MPContext()
    ctx.prec = z.precision_bits
    v = z.to_ctx(ctx)
    x = v.real if part == "re" else v.imag
    return ctx.nstr(x, digits, min_fixed=-5, max_fixed=5, strip_zeros=False)


def _digits_for(err: float, cap: int = 60) -> int:
    if err <= 0:
        return cap
    return max(6, min(cap, int(-math.log10(err)) + 2))


def _complex_field(z: AppComplex, err: float) -> dict:
    d = _digits_for(err)
    return {"re": _mp_str(z, "re", d), "im": _mp_str(z, "im", d)}


def _short(text: str) -> str:
    return f"{float(text):.12g}"


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


# --- pipeline pieces --------------------------------------------------------------

def _apoly_for(pres: KnotPresentation, rd: RileyData):
    if pres.fraction == (7, 2) and pres.name == "5_2":
        return builtin_apoly_5_2()
    return eliminate_apoly(rd, pres)


def _knot(spec: str) -> KnotPresentation:
    return resolve_knot(spec)


def riley_report(pres: KnotPresentation, policy: PrecisionPolicy) -> dict:
    rd = riley_polynomial(pres, policy)
    terms = []
    for (a, b), c in sorted(rd.phi.terms.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        terms.append({"t_power": str(Fraction(a, 2)), "u_power": b, "coefficient": c})
    out: dict[str, Any] = {
        "knot": pres.name,
        "relator": str(pres.relator_w),
        "longitude": str(pres.longitude),
        "phi": {"terms": terms, "text": rd.phi.pretty_t()},
        "deg_u": rd.deg_u,
    }
    try:
        delta = alexander_specialization(rd)
        out["alexander"] = {
            "terms": [{"t_power": k, "coefficient": c} for k, c in delta.terms.items()],
            "text": delta.pretty(),
            "second_derivative_at_1": str(second_derivative_at_one(delta)),
        }
    except CsrsError as exc:
        out["alexander"] = {"error": str(exc)}
    out["branch_points"] = [
        {**_complex_field(z, e), "error": _num(e)}
        for z, e in zip(rd.branch_points_t, rd.branch_errors or [0.0] * len(rd.branch_points_t))
    ]
    out["excluded_t"] = [str(x) for x in rd.excluded_t]
    return out


def _rep_record(r: RepPoint) -> dict:
    return {
        "class_id": r.class_id,
        "t": _complex_field(r.t, r.t_error),
        "t_error": _num(r.t_error),
        "u": _complex_field(r.u, r.u_error),
        "u_error": _num(r.u_error),
        "eps": r.eps,
        "residual_phi": _num(r.residual_phi),
        "residual_surgery": _num(r.residual_surgery),
        "is_su2": r.is_su2,
        "nondegenerate": r.is_nondegenerate,
    }


def reps_pipeline(pres: KnotPresentation, spec: SurgerySpec, policy: PrecisionPolicy,
                  tol: float):
    rd = riley_polynomial(pres, policy)
    A = _apoly_for(pres, rd)
    reps = find_representations(pres, rd, A, spec, policy, tol)
    d2 = second_derivative_at_one(alexander_specialization(rd))
    verdict = casson_count_check(d2, spec, len(reps))
    return rd, A, reps, d2, verdict


def _casson_record(d2, verdict) -> dict:
    return {
        "delta_second_derivative_at_1": str(d2),
        "casson_lambda": str(verdict.casson_lambda),
        "expected_classes": str(verdict.expected_classes),
        "found_classes": verdict.found_classes,
        "passed": verdict.passed,
    }


def _route_points(path) -> list[list[float]]:
    ends = [complex(path.start), complex(path.end)]
    a, b = ([[round(z.real, 6), round(z.imag, 6)]] for z in ends)
    return a + route_waypoints(path) + b


def _cs_task(args) -> dict:
    rep, plan, policy, tol, mirror = args
    evs: list = []
    try:
        v = cs_absolute(rep, plan, policy, tol, evaluations=evs)
    except CsrsError as exc:
        return {"class_id": rep.class_id, "error": f"{type(exc).__name__}: {exc}"}
    if mirror:
        v = orientation_flip(v)
    last = evs[-1]
    rel = last.endpoint_relation
    defect = abs(rel - round(rel.real))
    return {
        "class_id": rep.class_id,
        "value": v.to_str(v.digits_certified + 2),
        "value_error": _num(v.error_bound),
        "digits_certified": v.digits_certified,
        "orientation": v.orientation,
        "wraps": v.wraps,
        "imag_residue": _num(max(e.imag_residue for e in evs)),
        "imag_residue_error": _num(v.error_bound),
        "endpoint_relation": str(round(rel.real)),
        "endpoint_relation_error": _num(defect),
        "routes": [_route_points(leg.t_route) for leg in plan],
    }


def cs_pipeline(pres: KnotPresentation, spec: SurgerySpec, config: RunConfig,
                hints: Any = None, mirror: bool = False,
                classes: Sequence[int] | None = None) -> dict:
    policy = config.policy()
    tol = config.tolerance_value(policy)
    rd, _A, reps, d2, verdict = reps_pipeline(pres, spec, policy, tol)
    chosen = [r for r in reps if classes is None or r.class_id in classes]
    out: dict[str, Any] = {
        "knot": pres.name,
        "surgery_n": spec.n,
        "precision_bits": policy.working_bits,
        "target_error": config.target_error,
        "mirror": mirror,
        "casson": _casson_record(d2, verdict),
        "reps": [_rep_record(r) for r in reps],
        "classes": [],
        "branch_points": [[round(complex(z).real, 6), round(complex(z).imag, 6)]
                          for z in rd.branch_points_t],
    }
    if not chosen:
        return out
    plans: list = []
    notes: dict[int, str] = {}
    try:
        plans = plan_paths(rd, chosen, pres, spec, policy, hints)
    except CsrsError:
        # fall back to planning class by class so one failure does not sink the rest
        for r in chosen:
            try:
                plans.append(plan_paths(rd, [r], pres, spec, policy, hints)[0])
            except CsrsError as exc:
                plans.append(None)
                notes[r.class_id] = f"{type(exc).__name__}: {exc}"
    tasks = [(r, p, policy, tol, mirror) for r, p in zip(chosen, plans) if p is not None]
    if config.threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(_cs_task, tasks))
    else:
        results = [_cs_task(t) for t in tasks]
    by_id = {r["class_id"]: r for r in results}
    for r in chosen:
        rec = by_id.get(r.class_id) or {"class_id": r.class_id, "error": notes.get(r.class_id)}
        out["classes"].append(rec)
    return out


# --- SVG -----------------------------------------------------------------------

def render_svg(report: dict, size: int = 640) -> str:
    """Unit circle with representation points, branch points and routes in the t-plane."""
    pts = [complex(float(r["t"]["re"]), float(r["t"]["im"])) for r in report.get("reps", [])]
    bps = [complex(a, b) for a, b in report.get("branch_points", [])]
    routes = [[complex(a, b) for a, b in leg] for c in report.get("classes", [])
              for leg in c.get("routes", [])]
    allpts = pts + [z for z in bps if abs(z) < 3] + [z for r in routes for z in r] + [2j, -2j]
    span = max(2.0, max(max(abs(z.real), abs(z.imag)) for z in allpts) * 1.1)
    scale = size / (2 * span)

    def xy(z: complex) -> tuple[float, float]:
        return (round(size / 2 + z.real * scale, 2), round(size / 2 - z.imag * scale, 2))

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    cx, cy = xy(0)
    parts.append(f'<line x1="0" y1="{cy}" x2="{size}" y2="{cy}" stroke="#ccc"/>')
    parts.append(f'<line x1="{cx}" y1="0" x2="{cx}" y2="{size}" stroke="#ccc"/>')
    parts.append(f'<circle cx="{cx}" cy="{cy}" r="{round(scale, 2)}" fill="none" stroke="#888"/>')
    for leg in routes:
        d = " ".join(f"{x},{y}" for x, y in map(xy, leg))
        parts.append(f'<polyline points="{d}" fill="none" stroke="#1f77b4" stroke-width="1.2"/>')
    for z in bps:
        x, y = xy(z)
        parts.append(f'<path d="M{x - 4},{y - 4} L{x + 4},{y + 4} M{x - 4},{y + 4} L{x + 4},{y - 4}" '
                     f'stroke="#d62728" stroke-width="1.5"/>')
    for r, z in zip(report.get("reps", []), pts):
        x, y = xy(z)
        parts.append(f'<circle cx="{x}" cy="{y}" r="4" fill="black"/>')
        parts.append(f'<text x="{x + 6}" y="{y - 6}" font-size="12">{r["class_id"]}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --- commands --------------------------------------------------------------------

def _bits_default() -> int:
    raw = os.environ.get(ENV_BITS)
    if raw is None:
        return 128
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"{ENV_BITS} must be an integer") from exc


def _config(args) -> RunConfig:
    bits = args.precision_bits if args.precision_bits is not None else _bits_default()
    return RunConfig(bits, args.target_error, args.tolerance, args.threads, args.out)


def cmd_riley(args) -> tuple[int, str]:
    cfg = _config(args)
    rep = riley_report(_knot(args.knot), cfg.policy())
    if cfg.output_format == "table":
        lines = [f"knot      {rep['knot']}", f"phi       {rep['phi']['text']}",
                 f"deg_u     {rep['deg_u']}"]
        if "text" in rep["alexander"]:
            lines.append(f"Delta     {rep['alexander']['text']}")
            lines.append(f"Delta''(1) {rep['alexander']['second_derivative_at_1']}")
        rows = [(_short(b["re"]), _short(b["im"]), b["error"]) for b in rep["branch_points"]]
        return 0, "\n".join(lines) + "\n" + _table(("Re t", "Im t", "error"), rows) + "\n"
    return 0, _dump(rep) + "\n"


def cmd_reps(args) -> tuple[int, str]:
    cfg = _config(args)
    spec = SurgerySpec.parse(args.surgery)
    pres = _knot(args.knot)
    policy = cfg.policy()
    _rd, A, reps, d2, verdict = reps_pipeline(pres, spec, policy, cfg.tolerance_value(policy))
    out = {"knot": pres.name, "surgery_n": spec.n, "precision_bits": policy.working_bits,
           "apoly_source": A.source, "casson": _casson_record(d2, verdict),
           "reps": [_rep_record(r) for r in reps]}
    code = 0 if verdict.passed else 1
    if cfg.output_format == "table":
        rows = [(r["class_id"], _short(r["t"]["re"]), _short(r["t"]["im"]), _short(r["u"]["re"]),
                 _short(r["u"]["im"]), r["eps"], r["residual_surgery"], r["nondegenerate"])
                for r in out["reps"]]
        text = _table(("class", "Re t", "Im t", "Re u", "Im u", "eps", "surgery res", "nondeg"),
                      rows)
        c = out["casson"]
        text += (f"\nCasson: lambda = {c['casson_lambda']}, Delta''(1) = "
                 f"{c['delta_second_derivative_at_1']}, expected {c['expected_classes']} "
                 f"classes, found {c['found_classes']}: {'pass' if c['passed'] else 'FAIL'}\n")
        return code, text
    return code, _dump(out) + "\n"


def _load_hints(arg: str | None, pres: KnotPresentation, spec: SurgerySpec):
    if arg == "none":
        return None
    if arg is None:
        if pres.name == "5_2" and pres.fraction == (7, 2) and spec.n == -2:
            return resources.files("csrs").joinpath("data/hints_5_2.json").read_text("utf-8")
        return None
    try:
        return Path(arg).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read hint file: {exc}") from exc


def cmd_cs(args) -> tuple[int, str]:
    cfg = _config(args)
    spec = SurgerySpec.parse(args.surgery)
    pres = _knot(args.knot)
    classes = None
    if args.classes:
        try:
            classes = [int(c) for c in args.classes.split(",")]
        except ValueError as exc:
            raise InputError("--classes takes a comma separated list of integers") from exc
    hints = _load_hints(args.hints, pres, spec)
    out = cs_pipeline(pres, spec, cfg, hints, args.mirror, classes)
    failed = any("error" in c for c in out["classes"])
    code = 1 if failed else 0
    if cfg.output_format == "svg":
        return code, render_svg(out)
    if cfg.output_format == "table":
        rows = []
        for c in out["classes"]:
            if "error" in c:
                rows.append((c["class_id"], "failed", c["error"], ""))
            else:
                rows.append((c["class_id"], c["value"], c["value_error"], c["imag_residue"]))
        head = "-cs" if args.mirror else "cs"
        return code, _table(("class", head, "error", "imag residue"), rows) + "\n"
    for c in out["classes"]:
        c.pop("routes", None)
    out.pop("branch_points", None)
    return code, _dump(out) + "\n"


def cmd_ledger(args) -> tuple[int, str]:
    from .rscalc import Ledger, load_facts, run_query

    ledger = Ledger()
    if args.facts:
        load_facts(ledger, Path(args.facts))
    queries = list(args.query or [])
    if not queries:
        raise InputError("give at least one --query")
    results = [run_query(ledger, q) for q in queries]
    if args.out == "table":
        blocks = []
        for r in results:
            blocks.append(f"{r.query}\n  = {r.value_str()}")
            blocks.extend("    " + line for line in r.trace)
        return 0, "\n".join(blocks) + "\n"
    return 0, _dump([r.to_dict() for r in results]) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=None,
                        help=f"working precision in bits (default ${ENV_BITS} or 128)")
    common.add_argument("--target-error", default="1e-12",
                        help="absolute target error as a decimal string")
    common.add_argument("--tolerance", default=None,
                        help="acceptance tolerance for residuals (decimal string)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", choices=FORMATS, default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="csrs", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("riley", parents=[common], help="Riley polynomial of a two-bridge knot")
    r.add_argument("--knot", default="builtin:5_2")
    r.set_defaults(func=cmd_riley)

    s = sub.add_parser("reps", parents=[common], help="SU(2) representations of 1/n surgery")
    s.add_argument("--knot", default="builtin:5_2")
    s.add_argument("--surgery", required=True, help="1/n or -1/n")
    s.set_defaults(func=cmd_reps)

    c = sub.add_parser("cs", parents=[common], help="Chern-Simons spectrum of 1/n surgery")
    c.add_argument("--knot", default="builtin:5_2")
    c.add_argument("--surgery", required=True)
    c.add_argument("--mirror", action="store_true", help="report values for the mirror")
    c.add_argument("--hints", default=None, help="waypoint hint file, or 'none'")
    c.add_argument("--classes", default=None, help="comma separated class ids")
    c.set_defaults(func=cmd_cs)

    g = sub.add_parser("ledger", parents=[common], help="query the r_s ledger")
    g.add_argument("--facts", default=None, help="fact file (JSON)")
    g.add_argument("--query", action="append", help="query string; may repeat")
    g.set_defaults(func=cmd_ledger)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # "--surgery -1/2" would otherwise be read as an option
    fixed: list[str] = []
    i = 0
    while i < len(argv):
        if argv[i] == "--surgery" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            fixed.append(f"--surgery={argv[i + 1]}")
            i += 2
            continue
        fixed.append(argv[i])
        i += 1
    args = parser.parse_args(fixed)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        code, text = args.func(args)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except CsrsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
