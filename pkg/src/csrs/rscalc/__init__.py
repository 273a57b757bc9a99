"""Exact ledger for r_s, s_infty and d_infty with proof-traced deductions."""

from .query import QueryResult, load_facts, parse_expr, parse_query, run_query
from .rules import (
    ALL,
    UNDECIDABLE,
    Bounds,
    IndependenceCertificate,
    Ledger,
    Undetermined,
    addition_rule,
    combination_rule,
    connected_sum_bound,
    filtration_member,
    in_builtin_family,
    seifert_rs,
    spectrum_to_rs,
    subtraction_rule,
)
from .store import Fact, FactStore
from .values import S3, ManifoldExpr, Named, Provenance, RValue, Seifert, Surgery, seifert

__all__ = [
    "ALL", "UNDECIDABLE", "Bounds", "IndependenceCertificate", "Ledger", "Undetermined",
    "addition_rule", "combination_rule", "connected_sum_bound", "filtration_member",
    "in_builtin_family", "seifert_rs", "spectrum_to_rs", "subtraction_rule", "Fact",
    "FactStore", "S3", "ManifoldExpr", "Named", "Provenance", "RValue", "Seifert", "Surgery",
    "seifert", "QueryResult", "load_facts", "parse_expr", "parse_query", "run_query",
]
