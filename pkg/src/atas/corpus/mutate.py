"""AST mutations used to synthesize submission streams.

Each mutation takes (program, rng) and returns a new Program, or None when
the program has no site the mutation applies to. Sites are enumerated in a
fixed pre-order, so a given rng state always picks the same site.
"""

from __future__ import annotations

import random
from typing import Callable, Optional

from ..minilang.ast import (
    Assign, BinOp, Block, Case, Decl, For, If, IncDec, Num, Print,
    Program, Read, Switch, UnaryOp, Var, While, expr_vars,
)
from ..minilang.lexer import KEYWORDS
from ..minilang.parser import wrap64

NAME_POOL = (
    "a", "b", "c", "d", "x", "y", "z", "n", "m", "k", "t", "p", "q", "v", "w",
    "ans", "res", "num", "val", "tmp", "cnt", "sum", "total", "result", "acc",
    "inp", "cur", "best", "lim", "out", "step", "idx", "j", "i", "s", "r",
)


def _fallible(e) -> bool:
    """Could evaluating `e` raise a division or modulo error?"""
    if isinstance(e, BinOp):
        if e.op in ("/", "%") and not (isinstance(e.right, Num) and e.right.value != 0):
            return True
        return _fallible(e.left) or _fallible(e.right)
    if isinstance(e, UnaryOp):
        return _fallible(e.operand)
    return False


def _all_names(program: Program) -> set:
    names = set(program.inputs)
    for stmt in _walk_all(program.body):
        if isinstance(stmt, (Decl, Assign, IncDec, Read)):
            names.add(stmt.name)
        for e in _exprs_of(stmt):
            names |= expr_vars(e)
    return names


def _walk_all(body):
    for s in body:
        yield s
        if isinstance(s, For):
            if s.init is not None:
                yield s.init
            if s.update is not None:
                yield s.update
        for sub in _bodies(s):
            yield from _walk_all(sub)


def _bodies(s) -> tuple:
    if isinstance(s, If):
        return (s.then,) if s.orelse is None else (s.then, s.orelse)
    if isinstance(s, (While, For, Block)):
        return (s.body,)
    if isinstance(s, Switch):
        return tuple(c.body for c in s.cases)
    return ()


def _exprs_of(s) -> tuple:
    if isinstance(s, Decl):
        return () if s.init is None else (s.init,)
    if isinstance(s, Assign):
        return (s.value,)
    if isinstance(s, (If, While)):
        return (s.cond,)
    if isinstance(s, For):
        return () if s.cond is None else (s.cond,)
    if isinstance(s, Switch):
        return (s.subject,)
    if isinstance(s, Print):
        return (s.value,)
    return ()


def fresh_name(taken: set, rng: random.Random) -> str:
    pool = [n for n in NAME_POOL if n not in taken and n not in KEYWORDS]
    if pool:
        return rng.choice(pool)
    i = 0
    while f"v{i}" in taken:
        i += 1
    return f"v{i}"


class _Rewriter:
    """Rebuilds a program bottom-up, applying optional hooks."""

    def __init__(self, expr_fn=None, stmt_fn=None, body_fn=None, name_fn=None):
        self.expr_fn = expr_fn
        self.stmt_fn = stmt_fn
        self.body_fn = body_fn
        self.name_fn = name_fn or (lambda n: n)
        self.header = False  # true while rewriting a for-loop init/update

    def program(self, p: Program) -> Program:
        return Program(tuple(self.name_fn(n) for n in p.inputs), self.body(p.body))

    def body(self, stmts):
        if stmts is None:
            return None
        out = []
        for s in stmts:
            r = self.stmt(s)
            out.extend(r if isinstance(r, list) else [r])
        out = tuple(out)
        return self.body_fn(out) if self.body_fn else out

    def stmt(self, s):
        nm = self.name_fn
        if isinstance(s, Decl):
            s = Decl(nm(s.name), self.expr(s.init))
        elif isinstance(s, Assign):
            s = Assign(nm(s.name), s.op, self.expr(s.value))
        elif isinstance(s, IncDec):
            s = IncDec(nm(s.name), s.op)
        elif isinstance(s, Read):
            s = Read(nm(s.name))
        elif isinstance(s, Print):
            s = Print(self.expr(s.value))
        elif isinstance(s, If):
            s = If(self.expr(s.cond), self.body(s.then), self.body(s.orelse))
        elif isinstance(s, While):
            s = While(self.expr(s.cond), self.body(s.body))
        elif isinstance(s, For):
            self.header = True
            init = self.stmt(s.init) if s.init is not None else None
            update = self.stmt(s.update) if s.update is not None else None
            self.header = False
            s = For(init, self.expr(s.cond), update, self.body(s.body))
        elif isinstance(s, Switch):
            s = Switch(self.expr(s.subject), tuple(Case(c.value, self.body(c.body)) for c in s.cases))
        elif isinstance(s, Block):
            s = Block(self.body(s.body))
        return self.stmt_fn(s) if self.stmt_fn else s

    def expr(self, e):
        if e is None:
            return None
        if isinstance(e, Var):
            e = Var(self.name_fn(e.name))
        elif isinstance(e, UnaryOp):
            e = UnaryOp(e.op, self.expr(e.operand))
        elif isinstance(e, BinOp):
            e = BinOp(e.op, self.expr(e.left), self.expr(e.right))
        return self.expr_fn(e) if self.expr_fn else e


def _at_site(program, rng, pred, transform, kind: str, in_header: bool = True):
    """Apply `transform` at one randomly chosen site matching `pred`.

    Sites are numbered in rewrite order; `in_header=False` excludes
    statements sitting in a for-loop init/update slot.
    """
    def make(hook):
        rw = _Rewriter()
        def guarded(node):
            if pred(node) and (in_header or not rw.header):
                return hook(node)
            return node
        if kind == "expr":
            rw.expr_fn = guarded
        else:
            rw.stmt_fn = guarded
        return rw

    total = 0

    def count(node):
        nonlocal total
        total += 1
        return node

    make(count).program(program)
    if total == 0:
        return None
    target = rng.randrange(total)
    seen = -1

    def hit(node):
        nonlocal seen
        seen += 1
        return transform(node) if seen == target else node

    return make(hit).program(program)


# -- semantics-preserving -------------------------------------------------------

def rename_identifiers(program: Program, rng: random.Random) -> Program:
    names = sorted(_all_names(program))
    taken: set = set(names)
    mapping = {}
    for old in names:
        new = fresh_name(taken | set(mapping.values()), rng)
        mapping[old] = new
    return _Rewriter(name_fn=lambda n: mapping.get(n, n)).program(program)


def canonical_names(program: Program) -> Program:
    """Rename identifiers to v0, v1, ... in order of first appearance."""
    mapping: dict = {}

    def name(n):
        if n not in mapping:
            mapping[n] = f"v{len(mapping)}"
        return mapping[n]

    return _Rewriter(name_fn=name).program(program)


def _commutable(e) -> bool:
    return (isinstance(e, BinOp) and e.op in ("+", "*", "==", "!=")
            and e.left != e.right and not (_fallible(e.left) and _fallible(e.right)))


def commute_operands(program, rng):
    return _at_site(program, rng, _commutable, lambda e: BinOp(e.op, e.right, e.left), "expr")


_FLIP = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}


def flip_relation(program, rng):
    return _at_site(
        program, rng,
        lambda e: isinstance(e, BinOp) and e.op in _FLIP and not (_fallible(e.left) and _fallible(e.right)),
        lambda e: BinOp(_FLIP[e.op], e.right, e.left), "expr")


def negate_if(program, rng):
    return _at_site(
        program, rng,
        lambda s: isinstance(s, If) and s.orelse is not None,
        lambda s: If(UnaryOp("!", s.cond), s.orelse, s.then), "stmt")


def compound_assign(program, rng):
    """`x = x op e` -> `x op= e`, and `x += 1` -> `x++`."""
    def applies(s):
        if isinstance(s, Assign) and s.op == "=" and isinstance(s.value, BinOp):
            v = s.value
            return v.op in ("+", "-", "*", "/", "%") and v.left == Var(s.name)
        return isinstance(s, Assign) and s.op in ("+=", "-=") and s.value == Num(1)

    def transform(s):
        if s.op == "=":
            return Assign(s.name, s.value.op + "=", s.value.right)
        return IncDec(s.name, "++" if s.op == "+=" else "--")

    return _at_site(program, rng, applies, transform, "stmt")


def introduce_temp(program, rng):
    taken = _all_names(program)
    name = fresh_name(taken, rng)

    def applies(s):
        if isinstance(s, Print):
            return not isinstance(s.value, (Num, Var))
        return isinstance(s, Assign) and s.op == "=" and not isinstance(s.value, (Num, Var))

    def transform(s):
        if isinstance(s, Print):
            return [Decl(name, s.value), Print(Var(name))]
        return [Decl(name, s.value), Assign(s.name, "=", Var(name))]

    return _at_site(program, rng, applies, transform, "stmt", in_header=False)


def reorder_declarations(program, rng):
    """Swap two adjacent independent declarations."""
    def pairs(body):
        out = []
        for i in range(len(body) - 1):
            a, b = body[i], body[i + 1]
            if not (isinstance(a, Decl) and isinstance(b, Decl)):
                continue
            a_uses = expr_vars(a.init) if a.init is not None else set()
            b_uses = expr_vars(b.init) if b.init is not None else set()
            both_fail = (a.init is not None and _fallible(a.init)
                         and b.init is not None and _fallible(b.init))
            if a.name not in b_uses and b.name not in a_uses and not both_fail:
                out.append(i)
        return out

    total = 0

    def count(body):
        nonlocal total
        total += len(pairs(body))
        return body

    _Rewriter(body_fn=count).program(program)
    if total == 0:
        return None
    target = rng.randrange(total)
    seen = -1

    def swap(body):
        nonlocal seen
        for i in pairs(body):
            seen += 1
            if seen == target:
                body = body[:i] + (body[i + 1], body[i]) + body[i + 2:]
        return body

    return _Rewriter(body_fn=swap).program(program)


PRESERVING: dict[str, Callable] = {
    "rename": rename_identifiers,
    "commute": commute_operands,
    "flip_relation": flip_relation,
    "negate_if": negate_if,
    "compound_assign": compound_assign,
    "introduce_temp": introduce_temp,
    "reorder_decls": reorder_declarations,
}


# -- bug-injecting ----------------------------------------------------------------

def off_by_one(program, rng):
    delta = rng.choice((-1, 1))
    return _at_site(program, rng, lambda e: isinstance(e, Num),
                    lambda e: Num(wrap64(e.value + delta)), "expr")


_SWAP_OPS = {"+": "-", "-": "+", "*": "+", "<": "<=", "<=": "<", ">": ">=", ">=": ">"}


def swap_operator(program, rng):
    def applies(e):
        return isinstance(e, BinOp) and e.op in _SWAP_OPS
    return _at_site(program, rng, applies, lambda e: BinOp(_SWAP_OPS[e.op], e.left, e.right), "expr")


def wrong_power(program, rng):
    """`a * b` -> `a * b * b`, e.g. squaring becomes cubing."""
    return _at_site(program, rng, lambda e: isinstance(e, BinOp) and e.op == "*",
                    lambda e: BinOp("*", e, e.right), "expr")


def drop_else(program, rng):
    return _at_site(program, rng, lambda s: isinstance(s, If) and s.orelse is not None,
                    lambda s: If(s.cond, s.then, None), "stmt")


def swap_branches(program, rng):
    return _at_site(program, rng, lambda s: isinstance(s, If) and s.orelse is not None,
                    lambda s: If(s.cond, s.orelse, s.then), "stmt")


BUGS: dict[str, Callable] = {
    "off_by_one": off_by_one,
    "swap_operator": swap_operator,
    "wrong_power": wrong_power,
    "drop_else": drop_else,
    "swap_branches": swap_branches,
}


def apply(name: str, program: Program, rng: random.Random) -> Optional[Program]:
    fn = PRESERVING.get(name) or BUGS.get(name)
    if fn is None:
        raise KeyError(f"unknown mutation {name!r}")
    return fn(program, rng)
