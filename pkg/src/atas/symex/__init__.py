"""Symbolic execution of MiniC over bounded integer inputs."""

from .explore import (
    ErrorOutcome, Exploration, ExploreBudget, Incomplete, IntExpr, PathOutcome,
    StrLiteral, explore_paths, lower, sym_eval,
)
from .expr import Const, Op, Sym, SymExpr, evaluate, evaluate_array, mk, negate, to_text, truth
from .solver import InputDomain, Sat, Unknown, Unsat, propagate, solve_constraint

__all__ = [
    "Const", "ErrorOutcome", "Exploration", "ExploreBudget", "Incomplete",
    "InputDomain", "IntExpr", "Op", "PathOutcome", "Sat", "StrLiteral", "Sym",
    "SymExpr", "Unknown", "Unsat", "evaluate", "evaluate_array",
    "explore_paths", "lower", "mk", "negate", "propagate", "solve_constraint",
    "sym_eval", "to_text", "truth",
]
