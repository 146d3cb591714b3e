"""MiniC: a small C-like language for single-answer judge tasks."""

from .ast import Program
from .interp import (
    DEFAULT_FUEL, ErrorKind, ExecutionResult, Outcome, run_concrete, same_output,
)
from .lexer import LexError, Token, TokenKind, tokenize
from .parser import ArityError, ParseError, PrintError, parse
from .render import render, render_expr

__all__ = [
    "ArityError", "DEFAULT_FUEL", "ErrorKind", "ExecutionResult", "LexError",
    "Outcome", "ParseError", "PrintError", "Program", "Token", "TokenKind",
    "parse", "render", "render_expr", "run_concrete", "same_output", "tokenize",
]
