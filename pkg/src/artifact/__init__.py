"""Output-size bounds, proof sequences and PANDA evaluation for conjunctive queries."""

from .bounds import compute_lambda, polymatroid_bound, size_bound
from .core import (
    ClassKind,
    DegreeConstraint,
    DisjunctiveRule,
    DomainError,
    FunctionClass,
    Hypergraph,
    make_rule,
)
from .engine import eval_boolean_fhtw, eval_boolean_subw, eval_full_wco, greedy_model
from .panda import panda_run
from .relalg import Relation
from .widths import classic_width, da_maximin_width, da_minimax_width, enumerate_tds

__all__ = [
    "ClassKind",
    "DegreeConstraint",
    "DisjunctiveRule",
    "DomainError",
    "FunctionClass",
    "Hypergraph",
    "Relation",
    "classic_width",
    "compute_lambda",
    "da_maximin_width",
    "da_minimax_width",
    "enumerate_tds",
    "eval_boolean_fhtw",
    "eval_boolean_subw",
    "eval_full_wco",
    "greedy_model",
    "make_rule",
    "panda_run",
    "polymatroid_bound",
    "size_bound",
]
