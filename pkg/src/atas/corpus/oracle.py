"""Exhaustive differential oracle over a bounded input domain."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from ..labels import Label
from ..minilang import Program, parse, render, run_concrete, same_output
from .mutate import canonical_names
from .problem import ProblemSpec

DEFAULT_EXHAUSTIVE_CAP = 10**6


class DomainTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleVerdict:
    label: Label
    witness: Optional[tuple] = None  # least differing input when Incorrect


@lru_cache(maxsize=32)
def _reference_outputs(spec: ProblemSpec) -> tuple:
    return tuple(run_concrete(spec.reference, pt) for pt in spec.domain.points())


@lru_cache(maxsize=4096)
def _sweep(spec: ProblemSpec, source: str) -> OracleVerdict:
    # keyed on canonical source: renamed copies of one program share a sweep
    program = parse(source)
    for pt, expected in zip(spec.domain.points(), _reference_outputs(spec)):
        if not same_output(run_concrete(program, pt), expected):
            return OracleVerdict(Label.INCORRECT, pt)
    return OracleVerdict(Label.CORRECT)


def oracle_label(spec: ProblemSpec, program: Program, cap: int = DEFAULT_EXHAUSTIVE_CAP) -> OracleVerdict:
    """Run `program` on every domain point in lexicographic order."""
    size = spec.domain.size
    if size > cap:
        raise DomainTooLarge(f"domain has {size} points, cap is {cap}")
    return _sweep(spec, render(canonical_names(program)))
