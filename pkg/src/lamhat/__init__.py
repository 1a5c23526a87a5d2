"""Interpreter, classifier, encodings and quantitative intersection types
for a lambda calculus with pattern matching and explicit matching closures."""

from .syntax import (
    Abs,
    App,
    Branch,
    Case,
    Data,
    Match,
    PData,
    PVar,
    Var,
    alpha_eq,
    decompose_list_context,
    free_vars,
    substitute,
    well_formed,
)
from .text import ParseError, parse, parse_program, pretty
from .reduction import all_paths_to_nf, apply_at, enumerate_redexes, evaluate, step_det
from .classify import closed_nf_shape, is_clash, is_clash_free_nf, nf_class
from .typesys import check_derivation, relevance_check, size
from .synthesis import synthesize

__all__ = [
    "Abs",
    "App",
    "Branch",
    "Case",
    "Data",
    "Match",
    "PData",
    "PVar",
    "ParseError",
    "Var",
    "all_paths_to_nf",
    "alpha_eq",
    "apply_at",
    "check_derivation",
    "closed_nf_shape",
    "decompose_list_context",
    "enumerate_redexes",
    "evaluate",
    "free_vars",
    "is_clash",
    "is_clash_free_nf",
    "nf_class",
    "parse",
    "parse_program",
    "pretty",
    "relevance_check",
    "size",
    "step_det",
    "substitute",
    "synthesize",
    "well_formed",
]
