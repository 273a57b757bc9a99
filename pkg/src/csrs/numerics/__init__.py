"""Arbitrary-precision numerics: roots, quadrature, continuation."""

from .continuation import (LiftResult, LiftSampler, LogContinuation, PlaneCurve,
                           continue_log, continue_log_values, lift_branch)
from .paths import Arc, Line, PathBuilder, PlanePath
from .poly import PolyC, poly_roots
from .precision import AppComplex, PrecisionPolicy, make_context, parse_decimal
from .quadrature import integrate, integrate_ctx

__all__ = [
    "AppComplex", "PrecisionPolicy", "PolyC", "poly_roots", "Line", "Arc", "PlanePath",
    "PathBuilder", "continue_log", "continue_log_values", "integrate", "integrate_ctx",
    "PlaneCurve", "lift_branch", "LiftResult", "LiftSampler", "LogContinuation",
    "make_context", "parse_decimal",
]
