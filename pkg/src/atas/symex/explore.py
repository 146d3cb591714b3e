"""Path enumeration for MiniC programs over a bounded input domain.

The AST is lowered to a flat jump IR; states are explored depth-first with
the then-branch first. Each state carries a concrete witness satisfying its
path condition, so a fork only calls the solver when the witness does not
already satisfy the new branch.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

from ..minilang.ast import (
    Assign, BinOp, Block, Break, Decl, For, If, IncDec, Num, Print, PrintStr,
    Program, Read, Switch, UnaryOp, Var, While,
)
from ..minilang.interp import ErrorKind
from .expr import FALSE, TRUE, Const, Op, Sym, SymExpr, mk, negate, to_text, truth
from .solver import (
    DEFAULT_CAP, InputDomain, Sat, Unsat, check_witness, solve_constraint,
)


@dataclass(frozen=True)
class ExploreBudget:
    max_paths: int = 4096
    max_unroll: int = 64
    wall_clock_ms: int = 15_000
    max_steps: int = 200_000  # per path; stands in for concrete fuel
    solver_cap: int = DEFAULT_CAP

    def __post_init__(self):
        for name in ("max_paths", "max_unroll", "wall_clock_ms", "max_steps", "solver_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class Incomplete(str, enum.Enum):
    TIMEOUT = "Timeout"
    PATH_BUDGET = "PathBudget"
    SOLVER_CAP = "SolverCap"
    UNROLL_BOUND = "UnrollBound"


@dataclass(frozen=True)
class IntExpr:
    expr: SymExpr


@dataclass(frozen=True)
class StrLiteral:
    text: str


@dataclass(frozen=True)
class ErrorOutcome:
    kind: ErrorKind


PathOutput = Union[IntExpr, StrLiteral, ErrorOutcome]


@dataclass(frozen=True)
class PathOutcome:
    condition: tuple  # conjuncts, each asserted nonzero
    output: PathOutput
    witness: tuple = field(compare=False)

    def describe(self) -> str:
        cond = " && ".join(to_text(c) for c in self.condition) or "true"
        out = self.output
        if isinstance(out, IntExpr):
            shown = to_text(out.expr)
        elif isinstance(out, StrLiteral):
            shown = repr(out.text)
        else:
            shown = f"error {out.kind.value}"
        return f"[{cond}] -> {shown}"


class Exploration(NamedTuple):
    outcomes: list
    complete: bool
    reasons: frozenset


# -- lowering to IR -----------------------------------------------------------

class _Lowerer:
    def __init__(self):
        self.code: list = []
        self.breaks: list[list[int]] = []
        self.loops = 0
        self.temps = 0

    def emit(self, ins) -> int:
        self.code.append(list(ins))
        return len(self.code) - 1

    def here(self) -> int:
        return len(self.code)

    def body(self, stmts) -> None:
        for s in stmts:
            self.stmt(s)

    def stmt(self, s) -> None:
        if isinstance(s, Decl):
            self.emit(("assign", s.name, s.init if s.init is not None else Num(0)))
        elif isinstance(s, Assign):
            value = s.value if s.op == "=" else BinOp(s.op[0], Var(s.name), s.value)
            self.emit(("assign", s.name, value))
        elif isinstance(s, IncDec):
            self.emit(("assign", s.name, BinOp(s.op[0], Var(s.name), Num(1))))
        elif isinstance(s, Read):
            self.emit(("read", s.name))
        elif isinstance(s, Print):
            self.emit(("print", s.value))
        elif isinstance(s, PrintStr):
            self.emit(("print_str", s.text))
        elif isinstance(s, Block):
            self.body(s.body)
        elif isinstance(s, Break):
            self.breaks[-1].append(self.emit(("jump", None)))
        elif isinstance(s, If):
            br = self.emit(("branch", s.cond, None, None, None))
            self.code[br][2] = self.here()
            self.body(s.then)
            if s.orelse is not None:
                skip = self.emit(("jump", None))
                self.code[br][3] = self.here()
                self.body(s.orelse)
                self.code[skip][1] = self.here()
            else:
                self.code[br][3] = self.here()
        elif isinstance(s, (While, For)):
            if isinstance(s, For) and s.init is not None:
                self.stmt(s.init)
            loop_id = self.loops
            self.loops += 1
            self.emit(("enter", loop_id))
            cond = s.cond if s.cond is not None else Num(1)
            head = self.emit(("branch", cond, None, None, loop_id))
            self.code[head][2] = self.here()
            self.breaks.append([])
            self.body(s.body)
            if isinstance(s, For) and s.update is not None:
                self.stmt(s.update)
            self.emit(("jump", head))
            end = self.here()
            self.code[head][3] = end
            for j in self.breaks.pop():
                self.code[j][1] = end
        elif isinstance(s, Switch):
            tmp = f"$sw{self.temps}"
            self.temps += 1
            self.emit(("assign", tmp, s.subject))
            dispatch = []
            for case in s.cases:
                if case.value is not None:
                    br = self.emit(("branch", BinOp("==", Var(tmp), Num(case.value)), None, None, None))
                    dispatch.append((case, br))
                    self.code[br][3] = self.here()
            fallback = self.emit(("jump", None))
            self.breaks.append([])
            targets = {}
            for case in s.cases:
                targets[id(case)] = self.here()
                self.body(case.body)
            end = self.here()
            for case, br in dispatch:
                self.code[br][2] = targets[id(case)]
            default = [c for c in s.cases if c.value is None]
            self.code[fallback][1] = targets[id(default[0])] if default else end
            for j in self.breaks.pop():
                self.code[j][1] = end
        else:
            raise TypeError(f"cannot lower {s!r}")


def lower(program: Program) -> list:
    lw = _Lowerer()
    lw.body(program.body)
    lw.emit(("halt",))
    return [tuple(ins) for ins in lw.code]


# -- symbolic expression evaluation with forks ----------------------------------

def _fallible(e) -> bool:
    if isinstance(e, BinOp):
        if e.op in ("/", "%") and not (isinstance(e.right, Num) and e.right.value != 0):
            return True
        return _fallible(e.left) or _fallible(e.right)
    if isinstance(e, UnaryOp):
        return _fallible(e.operand)
    return False


def sym_eval(e, env: dict) -> list:
    """Evaluate an AST expression symbolically.

    Returns (extra_conditions, value) forks where value is a SymExpr or an
    ErrorKind. Only division/modulo by a possibly-zero divisor and
    short-circuit operators guarding such divisions introduce forks.
    """
    if isinstance(e, Num):
        return [((), Const(e.value))]
    if isinstance(e, Var):
        return [((), env[e.name])]
    if isinstance(e, UnaryOp):
        out = []
        for conds, v in sym_eval(e.operand, env):
            if isinstance(v, ErrorKind):
                out.append((conds, v))
            elif e.op == "-":
                out.append((conds, mk("neg", v)))
            elif e.op == "!":
                out.append((conds, negate(v)))
            else:
                out.append((conds, v))
        return out
    op = e.op
    if op in ("&&", "||") and _fallible(e.right):
        out = []
        for conds, lv in sym_eval(e.left, env):
            if isinstance(lv, ErrorKind):
                out.append((conds, lv))
                continue
            lt = truth(lv)
            if op == "&&":
                out.append((conds + (negate(lt),), FALSE))
                for rconds, rv in sym_eval(e.right, env):
                    out.append((conds + (lt,) + rconds,
                                rv if isinstance(rv, ErrorKind) else truth(rv)))
            else:
                out.append((conds + (lt,), TRUE))
                for rconds, rv in sym_eval(e.right, env):
                    out.append((conds + (negate(lt),) + rconds,
                                rv if isinstance(rv, ErrorKind) else truth(rv)))
        return out
    out = []
    for lconds, lv in sym_eval(e.left, env):
        if isinstance(lv, ErrorKind):
            out.append((lconds, lv))
            continue
        for rconds, rv in sym_eval(e.right, env):
            conds = lconds + rconds
            if isinstance(rv, ErrorKind):
                out.append((conds, rv))
                continue
            if op in ("/", "%"):
                err = ErrorKind.DIVIDE_BY_ZERO if op == "/" else ErrorKind.MOD_BY_ZERO
                if isinstance(rv, Const):
                    out.append((conds, err) if rv.value == 0 else (conds, mk(op, lv, rv)))
                else:
                    out.append((conds + (mk("==", rv, Const(0)),), err))
                    out.append((conds + (mk("!=", rv, Const(0)),), mk(op, lv, rv)))
            else:
                out.append((conds, mk(op, lv, rv)))
    return out


# -- exploration ------------------------------------------------------------

class _State:
    __slots__ = ("pc", "env", "conds", "witness", "out", "loops", "steps", "nread")

    def __init__(self, pc, env, conds, witness, out, loops, steps, nread):
        self.pc = pc
        self.env = env
        self.conds = conds
        self.witness = witness
        self.out = out
        self.loops = loops
        self.steps = steps
        self.nread = nread

    def fork(self, extra, witness):
        return _State(self.pc, dict(self.env), self.conds + extra, witness,
                      self.out, dict(self.loops), self.steps, self.nread)


class _Explorer:
    def __init__(self, program: Program, domain: InputDomain, budget: ExploreBudget,
                 deadline: Optional[float]):
        if program.arity != domain.arity:
            raise ValueError(f"program reads {program.arity} inputs, domain has {domain.arity}")
        self.code = lower(program)
        self.program = program
        self.domain = domain
        self.budget = budget
        self.deadline = deadline
        self.reasons: set = set()
        self.outcomes: list = []
        self.solver_calls = 0

    def feasible(self, st: _State, extra: tuple):
        """Witness for st.conds + extra, or None when infeasible/unknown."""
        extra = tuple(c for c in extra if c != TRUE)
        if any(c == FALSE for c in extra):
            return None, extra
        if not extra or check_witness(extra, st.witness):
            return st.witness, extra
        self.solver_calls += 1
        res = solve_constraint(st.conds + extra, self.domain, self.budget.solver_cap)
        if isinstance(res, Sat):
            return res.test, extra
        if not isinstance(res, Unsat):
            self.reasons.add(Incomplete.SOLVER_CAP)
        return None, extra

    def emit(self, st: _State, output) -> None:
        self.outcomes.append(PathOutcome(st.conds, output, st.witness))

    def run(self) -> Exploration:
        start = tuple(lo for lo, _ in self.domain.bounds)
        stack = [_State(0, {}, (), start, None, {}, 0, 0)]
        while stack:
            if self.deadline is not None and time.monotonic() > self.deadline:
                self.reasons.add(Incomplete.TIMEOUT)
                break
            if len(self.outcomes) >= self.budget.max_paths:
                self.reasons.add(Incomplete.PATH_BUDGET)
                break
            st = stack.pop()
            successors = self.step_path(st)
            stack.extend(reversed(successors))
        return Exploration(self.outcomes, not self.reasons, frozenset(self.reasons))

    def forks_of(self, st: _State, expr):
        """Feasible (state, value) pairs for evaluating expr in st."""
        result = []
        for extra, value in sym_eval(expr, st.env):
            witness, extra = self.feasible(st, extra)
            if witness is not None:
                result.append((st.fork(extra, witness) if extra or len(result) else st, value))
        return result

    def step_path(self, st: _State) -> list:
        """Run one state until it forks or terminates; return successor states."""
        code = self.code
        while True:
            st.steps += 1
            if st.steps > self.budget.max_steps:
                self.reasons.add(Incomplete.UNROLL_BOUND)
                return []
            ins = code[st.pc]
            kind = ins[0]
            if kind == "halt":
                if st.out is None:
                    self.emit(st, ErrorOutcome(ErrorKind.NO_PRINT_REACHED))
                else:
                    self.emit(st, st.out)
                return []
            if kind == "jump":
                st.pc = ins[1]
                continue
            if kind == "enter":
                st.loops[ins[1]] = 0
                st.pc += 1
                continue
            if kind == "read":
                st.env[ins[1]] = Sym(st.nread, ins[1])
                st.nread += 1
                st.pc += 1
                continue
            if kind == "print_str":
                if st.out is not None:
                    self.emit(st, ErrorOutcome(ErrorKind.MULTIPLE_PRINTS))
                    return []
                st.out = StrLiteral(ins[1])
                st.pc += 1
                continue
            if kind in ("assign", "print"):
                forks = self.forks_of(st, ins[2] if kind == "assign" else ins[1])
                nxt = []
                for s, value in forks:
                    if isinstance(value, ErrorKind):
                        self.emit(s, ErrorOutcome(value))
                        continue
                    if kind == "assign":
                        s.env[ins[1]] = value
                    elif s.out is not None:
                        self.emit(s, ErrorOutcome(ErrorKind.MULTIPLE_PRINTS))
                        continue
                    else:
                        s.out = IntExpr(value)
                    s.pc += 1
                    nxt.append(s)
                if len(nxt) == 1 and nxt[0] is st:
                    continue
                return nxt
            if kind == "branch":
                return self.branch(st, ins)
            raise RuntimeError(f"bad instruction {ins!r}")

    def branch(self, st: _State, ins) -> list:
        _, cond, then_pc, else_pc, loop_id = ins
        nxt = []
        for s, value in self.forks_of(st, cond):
            if isinstance(value, ErrorKind):
                self.emit(s, ErrorOutcome(value))
                continue
            value = truth(value)
            if isinstance(value, Const):
                s.pc = then_pc if value.value else else_pc
                nxt.append(s)
                continue
            stay_allowed = True
            if loop_id is not None:
                count = s.loops.get(loop_id, 0) + 1
                s.loops[loop_id] = count
                if count > self.budget.max_unroll:
                    stay_allowed = False
                    self.reasons.add(Incomplete.UNROLL_BOUND)
            sides = ((value, then_pc), (negate(value), else_pc))
            for cond_side, target in sides:
                if target == then_pc and not stay_allowed:
                    continue
                witness, extra = self.feasible(s, (cond_side,))
                if witness is None:
                    continue
                child = s.fork(extra, witness)
                child.pc = target
                nxt.append(child)
        return nxt


def explore_paths(program: Program, domain: InputDomain, budget: ExploreBudget = ExploreBudget(),
                  deadline: Optional[float] = None) -> Exploration:
    """Enumerate feasible paths of `program` over `domain`.

    `deadline` is an absolute time.monotonic() value; when omitted the
    budget's wall clock starts now.
    """
    if deadline is None:
        deadline = time.monotonic() + budget.wall_clock_ms / 1000.0
    return _Explorer(program, domain, budget, deadline).run()
