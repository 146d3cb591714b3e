"""Synthetic submission streams built by mutating a reference solution.

Correct-intent submissions come from a handful of strategy clusters: each
cluster is the reference rewritten by a fixed recipe of semantics-preserving
mutations, and every member additionally gets fresh identifiers (plus an
occasional extra rewrite when `noise` > 0). Incorrect-intent submissions
take a cluster base and inject one bug. The intent is stored as the
submission's external verdict but is only advisory; `oracle_label` decides.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from ..labels import Label
from ..minilang import parse, render
from ..minilang.ast import Program
from . import mutate
from .problem import ProblemSpec, Submission

DEFAULT_BUG_WEIGHTS = {
    "off_by_one": 3.0,
    "swap_operator": 3.0,
    "wrong_power": 1.0,
    "drop_else": 1.0,
    "swap_branches": 1.0,
}

# rename is applied to every submission separately, so recipes skip it
_RECIPE_STEPS = tuple(k for k in mutate.PRESERVING if k != "rename")


class ProfileInfeasible(ValueError):
    pass


@dataclass(frozen=True)
class GenerationProfile:
    count: int
    correct_fraction: float = 0.5
    clusters: int = 3
    bug_weights: dict = field(default_factory=lambda: dict(DEFAULT_BUG_WEIGHTS))
    decile_correct: Optional[tuple] = None  # ten per-decile correct fractions
    noise: float = 0.0  # chance of one extra preserving rewrite per submission
    start_time: int = 1_600_000_000

    def validate(self) -> None:
        if self.count < 1:
            raise ProfileInfeasible("count must be at least 1")
        if not 0.0 <= self.correct_fraction <= 1.0:
            raise ProfileInfeasible("correct_fraction must lie in [0, 1]")
        if self.clusters < 1:
            raise ProfileInfeasible("need at least one strategy cluster")
        if not 0.0 <= self.noise <= 1.0:
            raise ProfileInfeasible("noise must lie in [0, 1]")
        if self.decile_correct is not None:
            if len(self.decile_correct) != 10 or any(not 0.0 <= f <= 1.0 for f in self.decile_correct):
                raise ProfileInfeasible("decile_correct needs ten fractions in [0, 1]")
        unknown = set(self.bug_weights) - set(mutate.BUGS)
        if unknown:
            raise ProfileInfeasible(f"unknown bug mutations: {sorted(unknown)}")
        if any(w < 0 for w in self.bug_weights.values()):
            raise ProfileInfeasible("bug weights must be non-negative")


def _intent_plan(profile: GenerationProfile, rng: random.Random) -> list:
    """Per-position correct/incorrect intent."""
    n = profile.count
    if profile.decile_correct is None:
        n_correct = round(n * profile.correct_fraction)
        plan = [True] * n_correct + [False] * (n - n_correct)
        rng.shuffle(plan)
        return plan
    plan = []
    for d in range(10):
        size = (d + 1) * n // 10 - d * n // 10
        k = round(size * profile.decile_correct[d])
        chunk = [True] * k + [False] * (size - k)
        rng.shuffle(chunk)
        plan += chunk
    return plan


def _roundtrip(program: Program) -> Optional[Program]:
    try:
        return parse(render(program))
    except Exception:
        return None


def _cluster_bases(reference: Program, k: int, rng: random.Random) -> list:
    """k distinct-looking rewrites of the reference (cluster 0 is the reference)."""
    bases = [reference]
    seen = {render(mutate.canonical_names(reference))}
    attempts = 0
    while len(bases) < k and attempts < 50 * k:
        attempts += 1
        prog = reference
        for _ in range(rng.randint(1, 4)):
            step = rng.choice(_RECIPE_STEPS)
            out = mutate.PRESERVING[step](prog, rng)
            if out is not None:
                prog = out
        prog = _roundtrip(prog)
        if prog is None:
            continue
        key = render(mutate.canonical_names(prog))
        if key in seen and attempts < 25 * k:
            continue
        seen.add(key)
        bases.append(prog)
    while len(bases) < k:
        bases.append(bases[len(bases) % max(1, len(bases))])
    return bases


def _inject_bug(base: Program, weights: dict, rng: random.Random) -> Optional[Program]:
    names = [b for b in sorted(weights) if weights[b] > 0]
    while names:
        pick = rng.choices(names, weights=[weights[b] for b in names])[0]
        out = mutate.BUGS[pick](base, rng)
        if out is not None and render(out) != render(base):
            out = _roundtrip(out)
            if out is not None:
                return out
        names.remove(pick)
    return None


def generate_corpus(spec: ProblemSpec, profile: GenerationProfile, rng_seed: int) -> list:
    """Generate a time-ordered submission stream for `spec`."""
    profile.validate()
    rng = random.Random(rng_seed)
    plan = _intent_plan(profile, rng)
    n_correct = sum(plan)
    if n_correct and profile.clusters > n_correct:
        raise ProfileInfeasible(f"{profile.clusters} clusters cannot be filled by {n_correct} correct submissions")
    bases = _cluster_bases(spec.reference, profile.clusters, rng)
    if n_correct < len(plan) and _inject_bug(spec.reference, profile.bug_weights, random.Random(0)) is None:
        raise ProfileInfeasible("no enabled bug mutation applies to this reference")

    subs = []
    ts = profile.start_time
    for pos, correct in enumerate(plan):
        base = bases[rng.randrange(len(bases))]
        if correct:
            prog = base
            label = Label.CORRECT
        else:
            prog = _inject_bug(base, profile.bug_weights, rng)
            if prog is None:
                prog = _inject_bug(spec.reference, profile.bug_weights, rng)
            label = Label.INCORRECT
        if profile.noise and rng.random() < profile.noise:
            extra = mutate.PRESERVING[rng.choice(_RECIPE_STEPS)](prog, rng)
            if extra is not None and _roundtrip(extra) is not None:
                prog = extra
        prog = mutate.rename_identifiers(prog, rng)
        source = render(prog)
        program = parse(source)
        ts += rng.randint(1, 120)
        subs.append(Submission(f"s{pos:05d}", ts, source, label, program))
    return subs
