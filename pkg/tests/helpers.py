"""Shared test helpers: an independent AST interpreter and random programs.

`walk_run` is a direct tree-walking evaluator written separately from the
closure compiler in atas.minilang.interp, so differential tests between
the two catch mistakes in either.
"""

from __future__ import annotations

import itertools

from hypothesis import strategies as st

from atas.minilang.ast import (
    Assign, BinOp, Block, Break, Decl, For, If, IncDec, Num, Print, PrintStr, Read,
    Switch, UnaryOp, Var, While,
)

M = 1 << 64


def w(x: int) -> int:
    x %= M
    return x - M if x >= 1 << 63 else x


class _Err(Exception):
    def __init__(self, kind):
        self.kind = kind


class _Brk(Exception):
    pass


class _Fuel(Exception):
    pass


def _ev(e, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, UnaryOp):
        v = _ev(e.operand, env)
        return {"-": lambda: w(-v), "!": lambda: int(v == 0), "+": lambda: v}[e.op]()
    if e.op == "&&":
        return int(_ev(e.left, env) != 0 and _ev(e.right, env) != 0)
    if e.op == "||":
        return int(_ev(e.left, env) != 0 or _ev(e.right, env) != 0)
    a, b = _ev(e.left, env), _ev(e.right, env)
    if e.op in ("/", "%"):
        if b == 0:
            raise _Err("DivideByZero" if e.op == "/" else "ModByZero")
        q = abs(a) // abs(b)
        q = q if (a < 0) == (b < 0) else -q
        return w(q) if e.op == "/" else w(a - b * q)
    return {
        "+": lambda: w(a + b), "-": lambda: w(a - b), "*": lambda: w(a * b),
        "==": lambda: int(a == b), "!=": lambda: int(a != b), "<": lambda: int(a < b),
        "<=": lambda: int(a <= b), ">": lambda: int(a > b), ">=": lambda: int(a >= b),
    }[e.op]()


_AUG = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}


class _Run:
    def __init__(self, inputs, fuel):
        self.inputs = list(inputs)
        self.fuel = fuel
        self.out = None

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise _Fuel()

    def block(self, body, env):
        for s in body:
            self.stmt(s, env)

    def stmt(self, s, env):
        self.tick()
        if isinstance(s, Decl):
            env[s.name] = 0 if s.init is None else _ev(s.init, env)
        elif isinstance(s, Read):
            env[s.name] = self.inputs.pop(0)
        elif isinstance(s, Assign):
            if s.op == "=":
                env[s.name] = _ev(s.value, env)
            else:
                env[s.name] = _ev(BinOp(_AUG[s.op], Var(s.name), s.value), env)
        elif isinstance(s, IncDec):
            env[s.name] = w(env[s.name] + (1 if s.op == "++" else -1))
        elif isinstance(s, (Print, PrintStr)):
            val = ("int", _ev(s.value, env)) if isinstance(s, Print) else ("str", s.text)
            if self.out is not None:
                raise _Err("MultiplePrints")
            self.out = val
        elif isinstance(s, If):
            if _ev(s.cond, env):
                self.block(s.then, env)
            elif s.orelse is not None:
                self.block(s.orelse, env)
        elif isinstance(s, While):
            try:
                while True:
                    self.tick()
                    if not _ev(s.cond, env):
                        break
                    self.block(s.body, env)
            except _Brk:
                pass
        elif isinstance(s, For):
            if s.init is not None:
                self.stmt(s.init, env)
            try:
                while True:
                    self.tick()
                    if s.cond is not None and not _ev(s.cond, env):
                        break
                    self.block(s.body, env)
                    if s.update is not None:
                        self.stmt(s.update, env)
            except _Brk:
                pass
        elif isinstance(s, Switch):
            v = _ev(s.subject, env)
            start = next((i for i, c in enumerate(s.cases) if c.value == v), None)
            if start is None:
                start = next((i for i, c in enumerate(s.cases) if c.value is None), None)
            if start is not None:
                try:
                    for c in s.cases[start:]:
                        self.block(c.body, env)
                except _Brk:
                    pass
        elif isinstance(s, Block):
            self.block(s.body, env)
        elif isinstance(s, Break):
            raise _Brk()


def walk_run(program, test, fuel=100_000):
    """Independent evaluation; returns a short tuple describing the outcome."""
    r = _Run(test, fuel)
    try:
        r.block(program.body, {})
    except _Err as e:
        return ("err", e.kind)
    except _Fuel:
        return ("fuel",)
    if r.out is None:
        return ("err", "NoPrintReached")
    return r.out


def result_key(res):
    """Map an ExecutionResult to walk_run's tuple shape."""
    o = res.outcome.value
    if o == "IntOutput":
        return ("int", res.value)
    if o == "StrOutput":
        return ("str", res.value)
    if o == "RuntimeError":
        return ("err", res.value.value)
    return ("fuel",)


def box_points(bounds):
    return itertools.product(*(range(lo, hi + 1) for lo, hi in bounds))


# -- random programs ------------------------------------------------------------

_BIN = ["+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "&&", "||"]


@st.composite
def expressions(draw, names, depth=2):
    if depth == 0 or draw(st.integers(0, 2)) == 0:
        if names and draw(st.booleans()):
            return draw(st.sampled_from(names))
        return str(draw(st.integers(-3, 3)))
    if draw(st.integers(0, 5)) == 0:
        op = draw(st.sampled_from(["-", "!"]))
        return f"{op}({draw(expressions(names, depth - 1))})"
    op = draw(st.sampled_from(_BIN))
    return f"({draw(expressions(names, depth - 1))} {op} {draw(expressions(names, depth - 1))})"


@st.composite
def programs(draw, arity=None, max_stmts=4):
    """Source text of a random terminating MiniC program.

    Loop counters are never assignment targets, so every loop is bounded.
    """
    arity = draw(st.integers(1, 2)) if arity is None else arity
    inputs = ["a", "b", "c", "d"][:arity]
    counter = itertools.count()

    def block(depth, scope, targets):
        out = []
        for _ in range(draw(st.integers(0 if depth else 1, max_stmts))):
            kind = draw(st.integers(0, 6 if depth < 2 else 2))
            if kind == 0:
                v = f"x{next(counter)}"
                out.append(f"int {v} = {draw(expressions(scope))};")
                scope, targets = scope + [v], targets + [v]
            elif kind in (1, 2):
                tgt = draw(st.sampled_from(targets))
                op = draw(st.sampled_from(["=", "+=", "-=", "*=", "=", "/="]))
                out.append(f"{tgt} {op} {draw(expressions(scope))};")
            elif kind == 3:
                cond = draw(expressions(scope))
                then = " ".join(block(depth + 1, scope, targets)[0])
                if draw(st.booleans()):
                    other = " ".join(block(depth + 1, scope, targets)[0])
                    out.append(f"if ({cond}) {{ {then} }} else {{ {other} }}")
                else:
                    out.append(f"if ({cond}) {{ {then} }}")
            elif kind == 4:
                i = f"i{next(counter)}"
                bound = draw(st.integers(0, 3))
                body = " ".join(block(depth + 1, scope + [i], targets)[0])
                out.append(f"for (int {i} = 0; {i} < {bound}; {i}++) {{ {body} }}")
            elif kind == 5:
                subj = draw(expressions(scope, 1))
                cases = []
                for val in sorted(set(draw(st.lists(st.integers(-2, 2), min_size=1, max_size=3)))):
                    body = " ".join(block(depth + 1, scope, targets)[0])
                    brk = " break;" if draw(st.booleans()) else ""
                    cases.append(f"case {val}: {{ {body} }}{brk}")
                if draw(st.booleans()):
                    cases.append(f"default: {{ {' '.join(block(depth + 1, scope, targets)[0])} }}")
                out.append(f"switch ({subj}) {{ {' '.join(cases)} }}")
            else:
                out.append(f"if ({draw(expressions(scope))}) {{ print(\"Y\"); }}")
        return out, scope

    body, scope = block(0, list(inputs), list(inputs))
    lines = [f"read({n});" for n in inputs] + body
    lines.append(f"print({draw(expressions(scope))});")
    return "\n".join(lines)
