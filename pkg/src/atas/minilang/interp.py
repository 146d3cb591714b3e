"""Concrete interpreter.

Programs are compiled once into nested closures (cached on the Program) and
then run per test case. Arithmetic wraps at 64 bits; division truncates
toward zero as in C.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .ast import (
    Assign, BinOp, Block, Break, Decl, For, If, IncDec, Num, Print, PrintStr,
    Program, Read, Switch, UnaryOp, Var, While,
)

DEFAULT_FUEL = 1_000_000

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1
_HALF = 1 << 63
_MASK = (1 << 64) - 1


def wrap(x: int) -> int:
    return ((x + _HALF) & _MASK) - _HALF


def c_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return wrap(q)


def c_mod(a: int, b: int) -> int:
    return wrap(a - b * c_div(a, b))


class ErrorKind(str, enum.Enum):
    DIVIDE_BY_ZERO = "DivideByZero"
    MOD_BY_ZERO = "ModByZero"
    NO_PRINT_REACHED = "NoPrintReached"
    MULTIPLE_PRINTS = "MultiplePrints"

    def __str__(self) -> str:
        return self.value


class Outcome(str, enum.Enum):
    INT = "IntOutput"
    STR = "StrOutput"
    ERROR = "RuntimeError"
    FUEL = "FuelExhausted"


@dataclass(frozen=True)
class ExecutionResult:
    outcome: Outcome
    value: Union[int, str, ErrorKind, None] = None
    steps_used: int = field(default=0, compare=False)

    def __str__(self) -> str:
        if self.outcome is Outcome.INT:
            return str(self.value)
        if self.outcome is Outcome.STR:
            return repr(self.value)
        if self.outcome is Outcome.ERROR:
            return f"RuntimeError({self.value})"
        return "FuelExhausted"

    def to_text(self) -> str:
        """Single-token serialization used by failing-test records."""
        if self.outcome is Outcome.INT:
            return str(self.value)
        if self.outcome is Outcome.STR:
            from .lexer import encode_string
            return encode_string(self.value)
        if self.outcome is Outcome.ERROR:
            return f"!{self.value}"
        return "!FuelExhausted"

    @classmethod
    def from_text(cls, text: str) -> "ExecutionResult":
        if text.startswith('"'):
            from .lexer import decode_string
            return cls(Outcome.STR, decode_string(text))
        if text == "!FuelExhausted":
            return cls(Outcome.FUEL)
        if text.startswith("!"):
            return cls(Outcome.ERROR, ErrorKind(text[1:]))
        return cls(Outcome.INT, int(text))


class _Fault(Exception):
    def __init__(self, kind: ErrorKind):
        self.kind = kind


class _OutOfFuel(Exception):
    pass


class _Break(Exception):
    pass


class _Ctx:
    __slots__ = ("steps", "fuel", "out", "inputs", "nread")

    def __init__(self, inputs, fuel):
        self.steps = 0
        self.fuel = fuel
        self.out = None
        self.inputs = inputs
        self.nread = 0

    def tick(self):
        self.steps += 1
        if self.steps > self.fuel:
            raise _OutOfFuel()


def _div(a, b):
    if b == 0:
        raise _Fault(ErrorKind.DIVIDE_BY_ZERO)
    return c_div(a, b)


def _mod(a, b):
    if b == 0:
        raise _Fault(ErrorKind.MOD_BY_ZERO)
    return c_mod(a, b)


def _compile_expr(e):
    if isinstance(e, Num):
        v = e.value
        return lambda env: v
    if isinstance(e, Var):
        name = e.name
        return lambda env: env[name]
    if isinstance(e, UnaryOp):
        f = _compile_expr(e.operand)
        if e.op == "-":
            return lambda env: wrap(-f(env))
        if e.op == "!":
            return lambda env: 0 if f(env) else 1
        return f
    if isinstance(e, BinOp):
        lf, rf = _compile_expr(e.left), _compile_expr(e.right)
        op = e.op
        if op == "+":
            return lambda env: wrap(lf(env) + rf(env))
        if op == "-":
            return lambda env: wrap(lf(env) - rf(env))
        if op == "*":
            return lambda env: wrap(lf(env) * rf(env))
        if op == "/":
            return lambda env: _div(lf(env), rf(env))
        if op == "%":
            return lambda env: _mod(lf(env), rf(env))
        if op == "<":
            return lambda env: int(lf(env) < rf(env))
        if op == "<=":
            return lambda env: int(lf(env) <= rf(env))
        if op == ">":
            return lambda env: int(lf(env) > rf(env))
        if op == ">=":
            return lambda env: int(lf(env) >= rf(env))
        if op == "==":
            return lambda env: int(lf(env) == rf(env))
        if op == "!=":
            return lambda env: int(lf(env) != rf(env))
        if op == "&&":
            return lambda env: 1 if lf(env) and rf(env) else 0
        if op == "||":
            return lambda env: 1 if lf(env) or rf(env) else 0
    raise TypeError(f"cannot compile expression {e!r}")


_AUG = {
    "+=": lambda a, b: wrap(a + b),
    "-=": lambda a, b: wrap(a - b),
    "*=": lambda a, b: wrap(a * b),
    "/=": _div,
    "%=": _mod,
}


def _compile_block(body):
    fs = [_compile_stmt(s) for s in body]

    def run(env, ctx):
        for f in fs:
            f(env, ctx)
    return run


def _compile_stmt(s):
    if isinstance(s, Decl):
        name = s.name
        init = _compile_expr(s.init) if s.init is not None else (lambda env: 0)

        def run(env, ctx):
            ctx.tick()
            env[name] = init(env)
        return run
    if isinstance(s, Assign):
        name, value = s.name, _compile_expr(s.value)
        if s.op == "=":
            def run(env, ctx):
                ctx.tick()
                env[name] = value(env)
        else:
            combine = _AUG[s.op]

            def run(env, ctx):
                ctx.tick()
                env[name] = combine(env[name], value(env))
        return run
    if isinstance(s, IncDec):
        name, delta = s.name, (1 if s.op == "++" else -1)

        def run(env, ctx):
            ctx.tick()
            env[name] = wrap(env[name] + delta)
        return run
    if isinstance(s, Read):
        name = s.name

        def run(env, ctx):
            ctx.tick()
            env[name] = ctx.inputs[ctx.nread]
            ctx.nread += 1
        return run
    if isinstance(s, Print):
        value = _compile_expr(s.value)

        def run(env, ctx):
            ctx.tick()
            v = value(env)
            if ctx.out is not None:
                raise _Fault(ErrorKind.MULTIPLE_PRINTS)
            ctx.out = (Outcome.INT, v)
        return run
    if isinstance(s, PrintStr):
        text = s.text

        def run(env, ctx):
            ctx.tick()
            if ctx.out is not None:
                raise _Fault(ErrorKind.MULTIPLE_PRINTS)
            ctx.out = (Outcome.STR, text)
        return run
    if isinstance(s, Break):
        def run(env, ctx):
            ctx.tick()
            raise _Break()
        return run
    if isinstance(s, Block):
        inner = _compile_block(s.body)

        def run(env, ctx):
            ctx.tick()
            inner(env, ctx)
        return run
    if isinstance(s, If):
        cond = _compile_expr(s.cond)
        then = _compile_block(s.then)
        orelse = _compile_block(s.orelse) if s.orelse is not None else None

        def run(env, ctx):
            ctx.tick()
            if cond(env):
                then(env, ctx)
            elif orelse is not None:
                orelse(env, ctx)
        return run
    if isinstance(s, While):
        cond, body = _compile_expr(s.cond), _compile_block(s.body)

        def run(env, ctx):
            ctx.tick()
            try:
                while cond(env):
                    body(env, ctx)
                    ctx.tick()
            except _Break:
                pass
        return run
    if isinstance(s, For):
        init = _compile_stmt(s.init) if s.init is not None else None
        cond = _compile_expr(s.cond) if s.cond is not None else (lambda env: 1)
        update = _compile_stmt(s.update) if s.update is not None else None
        body = _compile_block(s.body)

        def run(env, ctx):
            ctx.tick()
            if init is not None:
                init(env, ctx)
            try:
                while cond(env):
                    body(env, ctx)
                    if update is not None:
                        update(env, ctx)
                    ctx.tick()
            except _Break:
                pass
        return run
    if isinstance(s, Switch):
        subject = _compile_expr(s.subject)
        labels = [c.value for c in s.cases]
        bodies = [_compile_block(c.body) for c in s.cases]
        default = labels.index(None) if None in labels else None

        def run(env, ctx):
            ctx.tick()
            v = subject(env)
            start = default
            for idx, label in enumerate(labels):
                if label is not None and label == v:
                    start = idx
                    break
            if start is None:
                return
            try:
                for body in bodies[start:]:
                    body(env, ctx)
            except _Break:
                pass
        return run
    raise TypeError(f"cannot compile statement {s!r}")


def _compiled(program: Program):
    fn = program._compiled
    if fn is None:
        fn = _compile_block(program.body)
        object.__setattr__(program, "_compiled", fn)
    return fn


def run_concrete(program: Program, test: Sequence[int], fuel: int = DEFAULT_FUEL) -> ExecutionResult:
    """Run `program` on the input values `test` with a statement budget."""
    if len(test) != program.arity:
        raise ValueError(f"test has {len(test)} values, program reads {program.arity}")
    body = _compiled(program)
    ctx = _Ctx(tuple(test), fuel)
    try:
        body({}, ctx)
    except _Fault as fault:
        return ExecutionResult(Outcome.ERROR, fault.kind, ctx.steps)
    except _OutOfFuel:
        return ExecutionResult(Outcome.FUEL, None, ctx.fuel)
    if ctx.out is None:
        return ExecutionResult(Outcome.ERROR, ErrorKind.NO_PRINT_REACHED, ctx.steps)
    kind, value = ctx.out
    return ExecutionResult(kind, value, ctx.steps)


def same_output(a: ExecutionResult, b: ExecutionResult) -> bool:
    return a.outcome is b.outcome and a.value == b.value
