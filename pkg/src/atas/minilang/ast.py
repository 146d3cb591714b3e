"""Immutable AST node types for MiniC.

Statement bodies (if/while/for/case) are tuples of statements; the parser
flattens a braced body into its statement list so rendering with braces is
a structural no-op.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class UnaryOp:
    op: str  # '-', '+', '!'
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, UnaryOp, BinOp]

ARITH_OPS = ("+", "-", "*", "/", "%")
COMPARE_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")


@dataclass(frozen=True)
class Decl:
    name: str
    init: Optional[Expr] = None


@dataclass(frozen=True)
class Assign:
    name: str
    op: str  # '=', '+=', '-=', '*=', '/=', '%='
    value: Expr


@dataclass(frozen=True)
class IncDec:
    name: str
    op: str  # '++' or '--'


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple
    orelse: Optional[tuple] = None


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple


@dataclass(frozen=True)
class For:
    init: Optional["Stmt"]
    cond: Optional[Expr]
    update: Optional["Stmt"]
    body: tuple


@dataclass(frozen=True)
class Case:
    value: Optional[int]  # None for `default`
    body: tuple


@dataclass(frozen=True)
class Switch:
    subject: Expr
    cases: tuple


@dataclass(frozen=True)
class Block:
    body: tuple


@dataclass(frozen=True)
class Break:
    pass


@dataclass(frozen=True)
class Read:
    name: str


@dataclass(frozen=True)
class Print:
    value: Expr


@dataclass(frozen=True)
class PrintStr:
    text: str


Stmt = Union[Decl, Assign, IncDec, If, While, For, Switch, Block, Break, Read, Print, PrintStr]


@dataclass(frozen=True)
class Program:
    inputs: tuple  # variable names in read order
    body: tuple
    # compiled interpreter closure, filled lazily by interp
    _compiled: object = field(default=None, compare=False, repr=False, hash=False)

    @property
    def arity(self) -> int:
        return len(self.inputs)


def children(stmt) -> tuple:
    """Nested statement tuples of a compound statement."""
    if isinstance(stmt, If):
        return (stmt.then,) if stmt.orelse is None else (stmt.then, stmt.orelse)
    if isinstance(stmt, (While, Block)):
        return (stmt.body,)
    if isinstance(stmt, For):
        return (stmt.body,)
    if isinstance(stmt, Switch):
        return tuple(c.body for c in stmt.cases)
    return ()


def walk_stmts(body):
    for stmt in body:
        yield stmt
        if isinstance(stmt, For):
            if stmt.init is not None:
                yield stmt.init
            if stmt.update is not None:
                yield stmt.update
        for sub in children(stmt):
            yield from walk_stmts(sub)


def stmt_exprs(stmt) -> tuple:
    """Expressions directly owned by a statement (not by nested statements)."""
    if isinstance(stmt, Decl):
        return () if stmt.init is None else (stmt.init,)
    if isinstance(stmt, (Assign,)):
        return (stmt.value,)
    if isinstance(stmt, (If, While)):
        return (stmt.cond,)
    if isinstance(stmt, For):
        return () if stmt.cond is None else (stmt.cond,)
    if isinstance(stmt, Switch):
        return (stmt.subject,)
    if isinstance(stmt, Print):
        return (stmt.value,)
    return ()


def walk_expr(expr):
    yield expr
    if isinstance(expr, UnaryOp):
        yield from walk_expr(expr.operand)
    elif isinstance(expr, BinOp):
        yield from walk_expr(expr.left)
        yield from walk_expr(expr.right)


def expr_vars(expr) -> set:
    return {e.name for e in walk_expr(expr) if isinstance(e, Var)}
