"""Equivalence checking of a candidate program against a reference.

Both programs' path sets are explored and every cross pair of paths is
tested for a common input on which the outputs differ. Any witness found is
replayed concretely before it is reported.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Union

from .minilang import ExecutionResult, Program, run_concrete, same_output
from .minilang.interp import DEFAULT_FUEL
from .symex.explore import (
    ErrorOutcome, ExploreBudget, Incomplete, IntExpr, PathOutcome, StrLiteral, explore_paths,
)
from .symex.expr import mk
from .symex.solver import InputDomain, Sat, Unsat, propagate, solve_constraint


@dataclass(frozen=True)
class Equivalent:
    pass


@dataclass(frozen=True)
class Counterexample:
    test: tuple
    candidate_out: ExecutionResult
    reference_out: ExecutionResult


@dataclass(frozen=True)
class Unknown:
    reason: Incomplete


EquivVerdict = Union[Equivalent, Counterexample, Unknown]

# reported when several limits were hit at once
_REASON_ORDER = (Incomplete.TIMEOUT, Incomplete.PATH_BUDGET, Incomplete.SOLVER_CAP, Incomplete.UNROLL_BOUND)


def validate_counterexample(candidate: Program, reference: Program, test, fuel: int = DEFAULT_FUEL) -> bool:
    """True iff the two programs observably differ on `test`."""
    return not same_output(run_concrete(candidate, test, fuel), run_concrete(reference, test, fuel))


def _outputs_identical(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, IntExpr):
        return a.expr == b.expr
    if isinstance(a, StrLiteral):
        return a.text == b.text
    return a.kind == b.kind


def _divergence(c: PathOutcome, r: PathOutcome) -> tuple:
    """Conjuncts under which the pair is jointly feasible with unequal outputs."""
    joint = c.condition + r.condition
    if isinstance(c.output, IntExpr) and isinstance(r.output, IntExpr):
        return joint + (mk("!=", c.output.expr, r.output.expr),)
    return joint


def _boxes_meet(a, b) -> bool:
    return all(max(al, bl) <= min(ah, bh) for (al, ah), (bl, bh) in zip(a, b))


def check_equivalence(candidate: Program, reference: Program, domain: InputDomain,
                      budget: ExploreBudget = ExploreBudget()) -> EquivVerdict:
    if candidate.arity != reference.arity or candidate.arity != domain.arity:
        raise ValueError("candidate, reference and domain must have equal arity")
    deadline = time.monotonic() + budget.wall_clock_ms / 1000.0
    ref = explore_paths(reference, domain, budget, deadline)
    cand = explore_paths(candidate, domain, budget, deadline)
    reasons = set(ref.reasons) | set(cand.reasons)

    ref_boxes = [propagate(r.condition, domain) for r in ref.outcomes]
    cand_boxes = [propagate(c.condition, domain) for c in cand.outcomes]

    timed_out = False
    for c, cbox in zip(cand.outcomes, cand_boxes):
        if cbox is None:
            continue
        for r, rbox in zip(ref.outcomes, ref_boxes):
            if rbox is None or _outputs_identical(c.output, r.output):
                continue
            if not _boxes_meet(cbox, rbox):
                continue
            if time.monotonic() > deadline:
                timed_out = True
                break
            res = solve_constraint(_divergence(c, r), domain, budget.solver_cap)
            if isinstance(res, Sat):
                test = res.test
                cand_out = run_concrete(candidate, test)
                ref_out = run_concrete(reference, test)
                if same_output(cand_out, ref_out):
                    raise AssertionError(
                        f"symbolic divergence at {test} not reproduced concretely: {cand_out}")
                return Counterexample(test, cand_out, ref_out)
            if not isinstance(res, Unsat):
                reasons.add(Incomplete.SOLVER_CAP)
        if timed_out:
            reasons.add(Incomplete.TIMEOUT)
            break

    if reasons:
        return Unknown(next(r for r in _REASON_ORDER if r in reasons))
    return Equivalent()
