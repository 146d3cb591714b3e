"""Bounded integer constraint solving.

Interval propagation (forward bounds plus backward narrowing over the
constraint tree) shrinks each input's range, then the remaining box is
enumerated in lexicographic order, vectorized in chunks. The first hit is
the lexicographically least witness within the pruned box, and it is
re-checked with the scalar evaluator before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .expr import Const, Op, Sym, SymExpr, evaluate, evaluate_array

I64_MIN = -(1 << 63)
I64_MAX = (1 << 63) - 1
TOP = (I64_MIN, I64_MAX)

DEFAULT_CAP = 1_000_000
_CHUNK = 1 << 16
_MAX_ROUNDS = 24


@dataclass(frozen=True)
class InputDomain:
    """Inclusive bounds per input, in read order."""

    bounds: tuple

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple((int(lo), int(hi)) for lo, hi in self.bounds))
        for lo, hi in self.bounds:
            if lo > hi:
                raise ValueError(f"empty input range [{lo}, {hi}]")
            if lo < I64_MIN or hi > I64_MAX:
                raise ValueError("bounds must fit in 64 bits")

    @property
    def arity(self) -> int:
        return len(self.bounds)

    @property
    def size(self) -> int:
        total = 1
        for lo, hi in self.bounds:
            total *= hi - lo + 1
        return total

    def contains(self, values) -> bool:
        return len(values) == self.arity and all(
            lo <= v <= hi for v, (lo, hi) in zip(values, self.bounds))

    def points(self):
        """All points in lexicographic order."""
        import itertools
        return itertools.product(*(range(lo, hi + 1) for lo, hi in self.bounds))


@dataclass(frozen=True)
class Sat:
    test: tuple


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Unknown:
    pass


SolveResult = Union[Sat, Unsat, Unknown]


class Infeasible(Exception):
    pass


def _clamp(lo: int, hi: int):
    if lo < I64_MIN or hi > I64_MAX:
        return None  # may wrap
    return (lo, hi)


def _forward(e: SymExpr, box: list, cache: dict):
    """Sound bounds of `e` over `box`; never narrower than the true range."""
    key = id(e)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = (e.value, e.value)
    elif isinstance(e, Sym):
        out = box[e.index]
    else:
        out = _forward_op(e, box, cache)
    cache[key] = out
    return out


def _forward_op(e: Op, box, cache):
    op = e.op
    if op == "neg":
        lo, hi = _forward(e.args[0], box, cache)
        return _clamp(-hi, -lo) or TOP
    if op == "!":
        lo, hi = _forward(e.args[0], box, cache)
        if lo == hi == 0:
            return (1, 1)
        if lo > 0 or hi < 0:
            return (0, 0)
        return (0, 1)
    (al, ah), (bl, bh) = (_forward(a, box, cache) for a in e.args)
    if op == "+":
        return _clamp(al + bl, ah + bh) or TOP
    if op == "-":
        return _clamp(al - bh, ah - bl) or TOP
    if op == "*":
        prods = (al * bl, al * bh, ah * bl, ah * bh)
        return _clamp(min(prods), max(prods)) or TOP
    if op == "/":
        return _div_bounds(al, ah, bl, bh)
    if op == "%":
        m = max(abs(bl), abs(bh))
        if m == 0:
            return (0, 0)
        if al >= 0:
            return (0, min(ah, m - 1))
        if ah <= 0:
            return (max(al, -(m - 1)), 0)
        return (max(al, -(m - 1)), min(ah, m - 1))
    if op in ("&&", "||"):
        ta = _truth_bounds(al, ah)
        tb = _truth_bounds(bl, bh)
        if op == "&&":
            return (ta[0] & tb[0], ta[1] & tb[1])
        return (ta[0] | tb[0], ta[1] | tb[1])
    # comparisons
    if op == "<":
        definite, impossible = ah < bl, al >= bh
    elif op == "<=":
        definite, impossible = ah <= bl, al > bh
    elif op == ">":
        definite, impossible = al > bh, ah <= bl
    elif op == ">=":
        definite, impossible = al >= bh, ah < bl
    elif op == "==":
        definite, impossible = al == ah == bl == bh, ah < bl or bh < al
    elif op == "!=":
        definite, impossible = ah < bl or bh < al, al == ah == bl == bh
    else:
        raise ValueError(op)
    if definite:
        return (1, 1)
    if impossible:
        return (0, 0)
    return (0, 1)


def _truth_bounds(lo, hi):
    if lo == hi == 0:
        return (0, 0)
    if lo > 0 or hi < 0:
        return (1, 1)
    return (0, 1)


def _tdiv(a, b):
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _div_bounds(al, ah, bl, bh):
    parts = []
    if bl <= -1:
        parts.append((bl, min(bh, -1)))
    if bh >= 1:
        parts.append((max(bl, 1), bh))
    if not parts:
        return (0, 0)  # x / 0 evaluates to 0 inside constraints
    vals = [0] if bl <= 0 <= bh else []
    for lo, hi in parts:
        for a in (al, ah):
            for b in (lo, hi):
                vals.append(_tdiv(a, b))
        # truncation toward zero peaks at |b| == 1 when the dividend spans 0
        if al < 0 < ah:
            vals.append(0)
    lo, hi = min(vals), max(vals)
    return _clamp(lo, hi) or TOP


def _narrow(box: list, idx: int, lo: int, hi: int) -> bool:
    cl, ch = box[idx]
    nl, nh = max(cl, lo), min(ch, hi)
    if nl > nh:
        raise Infeasible()
    if (nl, nh) != (cl, ch):
        box[idx] = (nl, nh)
        return True
    return False


def _backward(e: SymExpr, lo: int, hi: int, box: list, cache: dict) -> bool:
    """Narrow `box` so that `e` can take a value in [lo, hi]. Returns changed."""
    cur = _forward(e, box, cache)
    if cur[1] < lo or cur[0] > hi:
        raise Infeasible()
    lo, hi = max(lo, cur[0]), min(hi, cur[1])
    if isinstance(e, Const):
        return False
    if isinstance(e, Sym):
        return _narrow(box, e.index, lo, hi)
    op = e.op
    changed = False
    if op in ("<", "<=", ">", ">=", "==", "!="):
        if lo == hi:
            changed = _compare(e, bool(lo), box, cache)
        return changed
    if op == "!":
        if lo == hi == 1:
            return _backward_truth(e.args[0], False, box, cache)
        if lo == hi == 0:
            return _backward_truth(e.args[0], True, box, cache)
        return False
    if op == "&&" and lo >= 1:
        changed |= _backward_truth(e.args[0], True, box, cache)
        changed |= _backward_truth(e.args[1], True, box, cache)
        return changed
    if op == "||" and hi <= 0:
        changed |= _backward_truth(e.args[0], False, box, cache)
        changed |= _backward_truth(e.args[1], False, box, cache)
        return changed
    if op == "||" and lo >= 1:
        ta = _truth_bounds(*_forward(e.args[0], box, cache))
        tb = _truth_bounds(*_forward(e.args[1], box, cache))
        if ta == (0, 0):
            return _backward_truth(e.args[1], True, box, cache)
        if tb == (0, 0):
            return _backward_truth(e.args[0], True, box, cache)
        return False
    if op == "&&" and hi <= 0:
        ta = _truth_bounds(*_forward(e.args[0], box, cache))
        tb = _truth_bounds(*_forward(e.args[1], box, cache))
        if ta == (1, 1):
            return _backward_truth(e.args[1], False, box, cache)
        if tb == (1, 1):
            return _backward_truth(e.args[0], False, box, cache)
        return False
    if op == "neg":
        if _forward(e.args[0], box, cache) == TOP:
            return False
        return _backward(e.args[0], -hi, -lo, box, cache)
    if op in ("+", "-"):
        a, b = e.args
        (al, ah), (bl, bh) = _forward(a, box, cache), _forward(b, box, cache)
        exact = _clamp(al + bl, ah + bh) if op == "+" else _clamp(al - bh, ah - bl)
        if exact is None:
            return False  # the result may have wrapped
        if op == "+":
            changed |= _backward(a, lo - bh, hi - bl, box, cache)
            (al, ah) = _forward(a, box, _fresh(cache))
            changed |= _backward(b, lo - ah, hi - al, box, cache)
        else:
            changed |= _backward(a, lo + bl, hi + bh, box, cache)
            (al, ah) = _forward(a, box, _fresh(cache))
            changed |= _backward(b, al - hi, ah - lo, box, cache)
        return changed
    if op == "*":
        a, b = e.args
        for x, y in ((a, b), (b, a)):
            if isinstance(y, Const) and y.value != 0:
                c = y.value
                xl, xh = _forward(x, box, cache)
                if _clamp(min(xl * c, xh * c), max(xl * c, xh * c)) is None:
                    return False
                if c > 0:
                    return _backward(x, _ceil_div(lo, c), hi // c, box, cache)
                return _backward(x, _ceil_div(hi, c), lo // c, box, cache)
        return False
    return False


def _ceil_div(a, b):
    return -((-a) // b)


def _fresh(cache: dict) -> dict:
    cache.clear()
    return cache


def _backward_truth(e: SymExpr, value: bool, box, cache) -> bool:
    lo, hi = _forward(e, box, cache)
    if value:
        if lo == hi == 0:
            raise Infeasible()
        if lo == 0:
            return _backward(e, 1, hi, box, cache)
        if hi == 0:
            return _backward(e, lo, -1, box, cache)
        return False
    return _backward(e, 0, 0, box, cache)


def _compare(e: Op, value: bool, box, cache) -> bool:
    op = e.op
    if not value:
        op = {"<": ">=", ">=": "<", ">": "<=", "<=": ">", "==": "!=", "!=": "=="}[op]
    a, b = e.args
    (al, ah), (bl, bh) = _forward(a, box, cache), _forward(b, box, cache)
    if op in (">", ">="):
        op = "<" if op == ">" else "<="
        a, b = b, a
        (al, ah), (bl, bh) = (bl, bh), (al, ah)
    changed = False
    if op == "<":
        changed |= _backward(a, I64_MIN, bh - 1, box, cache)
        cache.clear()
        changed |= _backward(b, al + 1, I64_MAX, box, cache)
    elif op == "<=":
        changed |= _backward(a, I64_MIN, bh, box, cache)
        cache.clear()
        changed |= _backward(b, al, I64_MAX, box, cache)
    elif op == "==":
        lo, hi = max(al, bl), min(ah, bh)
        if lo > hi:
            raise Infeasible()
        changed |= _backward(a, lo, hi, box, cache)
        cache.clear()
        changed |= _backward(b, lo, hi, box, cache)
    elif op == "!=":
        if al == ah:
            changed |= _shave(b, al, box, cache)
        elif bl == bh:
            changed |= _shave(a, bl, box, cache)
    cache.clear()
    return changed


def _shave(e: SymExpr, value: int, box, cache) -> bool:
    lo, hi = _forward(e, box, cache)
    if lo == hi == value:
        raise Infeasible()
    if lo == value:
        return _backward(e, lo + 1, hi, box, cache)
    if hi == value:
        return _backward(e, lo, hi - 1, box, cache)
    return False


def propagate(conjuncts: Sequence[SymExpr], domain: InputDomain) -> Optional[list]:
    """Pruned box for the conjunction, or None if proven unsatisfiable."""
    box = list(domain.bounds)
    try:
        for _ in range(_MAX_ROUNDS):
            changed = False
            for c in conjuncts:
                cache: dict = {}
                changed |= _backward_truth(c, True, box, cache)
            if not changed:
                break
    except Infeasible:
        return None
    return box


def _as_conjuncts(constraint) -> tuple:
    if isinstance(constraint, SymExpr):
        return (constraint,)
    return tuple(constraint)


def check_witness(conjuncts, values) -> bool:
    return all(evaluate(c, values) != 0 for c in conjuncts)


def solve_constraint(constraint, domain: InputDomain, cap: int = DEFAULT_CAP) -> SolveResult:
    """Find an input in `domain` satisfying every conjunct of `constraint`."""
    conjuncts = tuple(c for c in _as_conjuncts(constraint) if not (isinstance(c, Const) and c.value))
    if any(isinstance(c, Const) for c in conjuncts):
        return Unsat()
    box = propagate(conjuncts, domain)
    if box is None:
        return Unsat()
    if not conjuncts:
        return Sat(tuple(lo for lo, _ in box))
    sizes = [hi - lo + 1 for lo, hi in box]
    total = 1
    for s in sizes:
        total *= s
    limit = min(total, cap)
    start = 0
    while start < limit:
        stop = min(start + _CHUNK, limit)
        flat = np.arange(start, stop, dtype=np.int64)
        columns = [None] * len(box)
        rem = flat
        for k in range(len(box) - 1, -1, -1):
            columns[k] = rem % sizes[k] + box[k][0]
            rem = rem // sizes[k]
        mask = None
        memo: dict = {}
        for c in conjuncts:
            hit = evaluate_array(c, columns, memo) != 0
            mask = hit if mask is None else mask & hit
            if not mask.any():
                break
        hits = np.flatnonzero(mask)
        if hits.size:
            j = int(hits[0])
            witness = tuple(int(col[j]) for col in columns)
            if not check_witness(conjuncts, witness):
                raise AssertionError(f"vectorized and scalar evaluation disagree at {witness}")
            return Sat(witness)
        start = stop
    return Unknown() if total > cap else Unsat()
