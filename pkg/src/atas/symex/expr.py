"""Symbolic integer expressions over program inputs.

Nodes are hash-consed-lite: each caches its hash so long path conditions
can be used as dictionary keys cheaply. Boolean-valued nodes (comparisons
and logic) evaluate to 0/1 like C.
"""

from __future__ import annotations

import numpy as np

from ..minilang.interp import c_div, c_mod, wrap

ARITH = ("+", "-", "*", "/", "%")
COMPARE = ("<", "<=", ">", ">=", "==", "!=")
BOOLEAN = COMPARE + ("&&", "||", "!")

_NEGATE = {"<": ">=", ">=": "<", ">": "<=", "<=": ">", "==": "!=", "!=": "=="}
_MIRROR = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "==": "==", "!=": "!="}


class SymExpr:
    __slots__ = ()

    def __repr__(self) -> str:
        return to_text(self)


class Const(SymExpr):
    __slots__ = ("value", "_h")

    def __init__(self, value: int):
        self.value = value
        self._h = hash(("c", value))

    def __eq__(self, other):
        return type(other) is Const and other.value == self.value

    def __hash__(self):
        return self._h


class Sym(SymExpr):
    """Reference to the input at position `index`; `name` is cosmetic."""

    __slots__ = ("index", "name", "_h")

    def __init__(self, index: int, name: str = ""):
        self.index = index
        self.name = name or f"in{index}"
        self._h = hash(("s", index))

    def __eq__(self, other):
        return type(other) is Sym and other.index == self.index

    def __hash__(self):
        return self._h


class Op(SymExpr):
    __slots__ = ("op", "args", "_h")

    def __init__(self, op: str, args: tuple):
        self.op = op
        self.args = args
        self._h = hash((op, args))

    def __eq__(self, other):
        return self is other or (
            type(other) is Op and other._h == self._h
            and other.op == self.op and other.args == self.args
        )

    def __hash__(self):
        return self._h


TRUE = Const(1)
FALSE = Const(0)


def is_boolean(e: SymExpr) -> bool:
    return isinstance(e, Op) and e.op in BOOLEAN or (isinstance(e, Const) and e.value in (0, 1))


def _fold(op: str, vals: list) -> int:
    if op == "neg":
        return wrap(-vals[0])
    if op == "!":
        return int(not vals[0])
    a, b = vals
    if op == "+":
        return wrap(a + b)
    if op == "-":
        return wrap(a - b)
    if op == "*":
        return wrap(a * b)
    if op == "/":
        return c_div(a, b) if b else 0
    if op == "%":
        return c_mod(a, b) if b else 0
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "&&":
        return int(bool(a) and bool(b))
    if op == "||":
        return int(bool(a) or bool(b))
    raise ValueError(op)


def truth(e: SymExpr) -> SymExpr:
    """0/1 truthiness of `e`."""
    if is_boolean(e):
        return e
    if isinstance(e, Const):
        return Const(int(e.value != 0))
    return Op("!=", (e, Const(0)))


def mk(op: str, *args: SymExpr) -> SymExpr:
    """Build a node, folding constants and trivial identities."""
    if all(isinstance(a, Const) for a in args):
        return Const(_fold(op, [a.value for a in args]))
    if op == "!":
        (a,) = args
        if isinstance(a, Op):
            if a.op in _NEGATE:
                return Op(_NEGATE[a.op], a.args)
            if a.op == "!":
                return truth(a.args[0])
        return Op("!", (a,))
    if op == "neg":
        (a,) = args
        if isinstance(a, Op) and a.op == "neg":
            return a.args[0]
        return Op("neg", (a,))
    a, b = args
    if op == "+":
        if isinstance(a, Const) and a.value == 0:
            return b
        if isinstance(b, Const) and b.value == 0:
            return a
    elif op == "-":
        if isinstance(b, Const) and b.value == 0:
            return a
    elif op == "*":
        for x, y in ((a, b), (b, a)):
            if isinstance(x, Const):
                if x.value == 0:
                    return FALSE
                if x.value == 1:
                    return y
    elif op in ("&&", "||"):
        for x, y in ((a, b), (b, a)):
            if isinstance(x, Const):
                if op == "&&":
                    return truth(y) if x.value else FALSE
                return TRUE if x.value else truth(y)
    elif op in COMPARE:
        if a == b:
            return Const(int(op in ("<=", ">=", "==")))
        if isinstance(a, Const) and not isinstance(b, Const):
            return Op(_MIRROR[op], (b, a))
    return Op(op, (a, b))


def negate(e: SymExpr) -> SymExpr:
    return mk("!", e)


def free_indices(e: SymExpr, acc=None) -> set:
    acc = set() if acc is None else acc
    if isinstance(e, Sym):
        acc.add(e.index)
    elif isinstance(e, Op):
        for a in e.args:
            free_indices(a, acc)
    return acc


def evaluate(e: SymExpr, values) -> int:
    """Scalar evaluation with plain Python integers."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Sym):
        return values[e.index]
    return _fold(e.op, [evaluate(a, values) for a in e.args])


_I64_MIN = np.int64(-(1 << 63))


def _tdiv(a, b):
    zero = b == 0
    b = np.where(zero, 1, b)
    # MIN / -1 wraps back to MIN, which is what a / 1 yields
    b = np.where((a == _I64_MIN) & (b == -1), 1, b)
    q = a // b
    r = a - q * b
    q = q + ((r != 0) & ((a < 0) != (b < 0)))
    return np.where(zero, 0, q)


def _tmod(a, b):
    b = np.where(b == 0, 1, b)
    b = np.where((a == _I64_MIN) & (b == -1), 1, b)
    return a - _tdiv(a, b) * b


def evaluate_array(e: SymExpr, columns, memo=None):
    """Vectorized evaluation over int64 columns (one array per input)."""
    if memo is None:
        memo = {}
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = np.full(len(columns[0]), e.value, dtype=np.int64)
    elif isinstance(e, Sym):
        out = columns[e.index]
    else:
        vals = [evaluate_array(a, columns, memo) for a in e.args]
        op = e.op
        if op == "neg":
            out = np.negative(vals[0])
        elif op == "!":
            out = (vals[0] == 0).astype(np.int64)
        else:
            a, b = vals
            if op == "+":
                out = a + b
            elif op == "-":
                out = a - b
            elif op == "*":
                out = a * b
            elif op == "/":
                out = _tdiv(a, b)
            elif op == "%":
                out = _tmod(a, b)
            elif op == "<":
                out = (a < b).astype(np.int64)
            elif op == "<=":
                out = (a <= b).astype(np.int64)
            elif op == ">":
                out = (a > b).astype(np.int64)
            elif op == ">=":
                out = (a >= b).astype(np.int64)
            elif op == "==":
                out = (a == b).astype(np.int64)
            elif op == "!=":
                out = (a != b).astype(np.int64)
            elif op == "&&":
                out = ((a != 0) & (b != 0)).astype(np.int64)
            elif op == "||":
                out = ((a != 0) | (b != 0)).astype(np.int64)
            else:
                raise ValueError(op)
    memo[key] = out
    return out


def to_text(e: SymExpr) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Sym):
        return e.name
    if e.op == "neg":
        return f"-({to_text(e.args[0])})"
    if e.op == "!":
        return f"!({to_text(e.args[0])})"
    a, b = e.args
    return f"({to_text(a)} {e.op} {to_text(b)})"
