"""Canonical pretty-printer; parse(render(p)) == p."""

from __future__ import annotations

from .ast import (
    Assign, BinOp, Block, Break, Decl, For, If, IncDec, Num, Print, PrintStr,
    Program, Read, Switch, UnaryOp, Var, While,
)
from .lexer import encode_string

_PRECEDENCE = {
    "||": 1, "&&": 2, "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7
_INDENT = "    "


def _prec(expr) -> int:
    if isinstance(expr, BinOp):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, UnaryOp):
        return _UNARY_PREC
    return 8


def render_expr(expr) -> str:
    if isinstance(expr, Num):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, UnaryOp):
        inner = render_expr(expr.operand)
        operand = expr.operand
        if isinstance(operand, (BinOp, UnaryOp)) or (isinstance(operand, Num) and operand.value < 0):
            inner = f"({inner})"
        return f"{expr.op}{inner}"
    if isinstance(expr, BinOp):
        p = _PRECEDENCE[expr.op]
        left = render_expr(expr.left)
        right = render_expr(expr.right)
        if _prec(expr.left) < p:
            left = f"({left})"
        # operators are left-associative
        if _prec(expr.right) <= p:
            right = f"({right})"
        return f"{left} {expr.op} {right}"
    raise TypeError(f"not an expression: {expr!r}")


def _simple(stmt) -> str:
    if isinstance(stmt, Decl):
        if stmt.init is None:
            return f"int {stmt.name}"
        return f"int {stmt.name} = {render_expr(stmt.init)}"
    if isinstance(stmt, Assign):
        return f"{stmt.name} {stmt.op} {render_expr(stmt.value)}"
    if isinstance(stmt, IncDec):
        return f"{stmt.name}{stmt.op}"
    raise TypeError(f"not a simple statement: {stmt!r}")


def _body(body: tuple, depth: int, out: list) -> None:
    for stmt in body:
        _stmt(stmt, depth, out)


def _stmt(stmt, depth: int, out: list) -> None:
    pad = _INDENT * depth
    if isinstance(stmt, (Decl, Assign, IncDec)):
        out.append(f"{pad}{_simple(stmt)};")
    elif isinstance(stmt, Read):
        out.append(f"{pad}read({stmt.name});")
    elif isinstance(stmt, Print):
        out.append(f"{pad}print({render_expr(stmt.value)});")
    elif isinstance(stmt, PrintStr):
        out.append(f"{pad}print({encode_string(stmt.text)});")
    elif isinstance(stmt, Break):
        out.append(f"{pad}break;")
    elif isinstance(stmt, Block):
        out.append(f"{pad}{{")
        _body(stmt.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, If):
        _if(stmt, depth, out, pad)
    elif isinstance(stmt, While):
        out.append(f"{pad}while ({render_expr(stmt.cond)}) {{")
        _body(stmt.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, For):
        init = "" if stmt.init is None else _simple(stmt.init)
        cond = "" if stmt.cond is None else render_expr(stmt.cond)
        update = "" if stmt.update is None else _simple(stmt.update)
        out.append(f"{pad}for ({init}; {cond}; {update}) {{".replace("(; ", "(;").replace("; )", ";)"))
        _body(stmt.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, Switch):
        out.append(f"{pad}switch ({render_expr(stmt.subject)}) {{")
        for case in stmt.cases:
            label = "default" if case.value is None else f"case {case.value}"
            out.append(f"{pad}{label}:")
            _body(case.body, depth + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(f"not a statement: {stmt!r}")


def _if(stmt: If, depth: int, out: list, lead: str) -> None:
    pad = _INDENT * depth
    out.append(f"{lead}if ({render_expr(stmt.cond)}) {{")
    _body(stmt.then, depth + 1, out)
    if stmt.orelse is None:
        out.append(f"{pad}}}")
    elif len(stmt.orelse) == 1 and isinstance(stmt.orelse[0], If):
        # `else if` chain; the nested if line is appended to the closing brace
        _if(stmt.orelse[0], depth, out, f"{pad}}} else ")
    else:
        out.append(f"{pad}}} else {{")
        _body(stmt.orelse, depth + 1, out)
        out.append(f"{pad}}}")


def render(program: Program) -> str:
    out: list[str] = []
    _body(program.body, 0, out)
    return "\n".join(out) + "\n"
