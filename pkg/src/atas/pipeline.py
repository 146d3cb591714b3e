"""Online judging pipelines.

`run_baseline` labels every submission that survives failing-test replay
with the equivalence checker. `run_atas` does the same for a seed prefix,
then lets a calibrated classifier accept submissions it is confident about
and sends the rest to the checker, retraining every `r` submissions.
"""

from __future__ import annotations

import enum
import json
import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .equiv import Counterexample, Equivalent, Unknown, check_equivalence
from .features import EmptyVocab, FeatureVocab, build_vocab, encode
from .labels import Label
from .learn import (
    CalibratedModel, InsufficientData, LabeledSample, ModelConfig, predict_probability,
    train_and_get_thresh,
)
from .learn.calibrate import NEVER
from .minilang import ExecutionResult, Program, run_concrete, same_output
from .symex import ExploreBudget, InputDomain

log = logging.getLogger(__name__)


class Route(str, enum.Enum):
    REPLAY_FAIL = "ReplayFail"
    CLASSIFIER_ACCEPT = "ClassifierAccept"
    CHECKER_CORRECT = "CheckerCorrect"
    CHECKER_INCORRECT = "CheckerIncorrect"
    CHECKER_UNKNOWN = "CheckerUnknownAssumedCorrect"


CHECKER_ROUTES = (Route.CHECKER_CORRECT, Route.CHECKER_INCORRECT, Route.CHECKER_UNKNOWN)
INCORRECT_ROUTES = (Route.REPLAY_FAIL, Route.CHECKER_INCORRECT)


class SeedTooSmall(RuntimeError):
    pass


class MissingOracleLabel(KeyError):
    pass


# -- failing tests ---------------------------------------------------------------

@dataclass(frozen=True)
class FailingTest:
    test: tuple
    expected: ExecutionResult  # reference output on `test`

    def to_line(self) -> str:
        return ",".join(str(v) for v in self.test) + "," + self.expected.to_text()

    @classmethod
    def from_line(cls, line: str, arity: int) -> "FailingTest":
        parts = line.rstrip("\n").split(",", arity)
        if len(parts) != arity + 1:
            raise ValueError(f"expected {arity} inputs and an output in {line!r}")
        return cls(tuple(int(p) for p in parts[:arity]), ExecutionResult.from_text(parts[arity]))


@dataclass(frozen=True)
class Fails:
    test: FailingTest


@dataclass(frozen=True)
class PassesAll:
    pass


def replay_failing_tests(program: Program, T: Sequence[FailingTest]):
    """First stored test the program gets wrong, in insertion order."""
    for ft in T:
        if not same_output(run_concrete(program, ft.test), ft.expected):
            return Fails(ft)
    return PassesAll()


def save_failing_tests(path, T: Iterable[FailingTest]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ft in T:
            fh.write(ft.to_line() + "\n")


def load_failing_tests(path, arity: int) -> list:
    with open(path, encoding="utf-8") as fh:
        return [FailingTest.from_line(line, arity) for line in fh if line.strip()]


# -- state -----------------------------------------------------------------------

@dataclass(frozen=True)
class LogEntry:
    id: str
    route: Route
    seed: bool
    checker_called: bool
    elapsed_ms: float
    probability: Optional[float] = None
    held_out: bool = False

    @property
    def verdict(self) -> Label:
        return Label.INCORRECT if self.route in INCORRECT_ROUTES else Label.CORRECT

    def to_json(self, wall_clock: bool = True) -> dict:
        d = {"id": self.id, "route": self.route.value, "verdict": self.verdict.value,
             "checker_called": self.checker_called, "seed": self.seed}
        if self.probability is not None:
            d["probability"] = round(self.probability, 12)
        if self.held_out:
            d["held_out"] = True
        if wall_clock:
            d["elapsed_ms"] = round(self.elapsed_ms, 3)
        return d


@dataclass
class MetricsCounters:
    checker_calls_total: int = 0
    checker_calls_post_seed: int = 0
    tests_replayed: int = 0
    unknown_verdicts: int = 0
    wall_clock_ms: float = 0.0
    log: list = field(default_factory=list)

    def route_counts(self) -> dict:
        counts = {r.value: 0 for r in Route}
        for e in self.log:
            counts[e.route.value] += 1
        return counts

    def consistent(self) -> bool:
        calls = sum(e.checker_called for e in self.log)
        post = sum(e.checker_called and not e.seed for e in self.log)
        unknown = sum(e.route is Route.CHECKER_UNKNOWN for e in self.log)
        return (calls == self.checker_calls_total and post == self.checker_calls_post_seed
                and unknown == self.unknown_verdicts)

    def to_json(self, wall_clock: bool = True) -> dict:
        d = {"checker_calls_total": self.checker_calls_total,
             "checker_calls_seed": self.checker_calls_total - self.checker_calls_post_seed,
             "checker_calls_post_seed": self.checker_calls_post_seed,
             "tests_replayed": self.tests_replayed, "unknown_verdicts": self.unknown_verdicts,
             "routes": self.route_counts(), "processed": len(self.log)}
        if wall_clock:
            d["wall_clock_ms"] = round(self.wall_clock_ms, 3)
        return d


@dataclass
class JudgeState:
    A: set = field(default_factory=set)
    W: set = field(default_factory=set)
    A_klee: set = field(default_factory=set)
    T: list = field(default_factory=list)
    metrics: MetricsCounters = field(default_factory=MetricsCounters)
    model: Optional[CalibratedModel] = None
    processed: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)  # id in W -> FailingTest that convicts it
    retrains: list = field(default_factory=list)  # per training phase summaries
    seed_degraded: bool = False
    vocab: Optional[FeatureVocab] = None

    def labels(self) -> dict:
        return {sid: (Label.CORRECT if sid in self.A else Label.INCORRECT) for sid in self.processed}


@dataclass(frozen=True)
class AtasConfig:
    i: int = 50
    r: int = 50
    F: float = 0.3
    n: int = 3
    classifier: ModelConfig = ModelConfig()
    check_budget: ExploreBudget = ExploreBudget()
    rng_seed: int = 0
    retrain: bool = True
    seed_replay: bool = True  # replay T during the seed phase too
    thresh_override: Optional[float] = None
    degrade: bool = True  # on SeedTooSmall, fall back to the checker instead of raising
    holdout: bool = False  # keep 10% of each phase out for precision/recall

    def __post_init__(self):
        if self.i < 1 or self.r < 1:
            raise ValueError("i and r must be >= 1")
        if not 0.0 < self.F < 1.0:
            raise ValueError("F must lie in (0, 1)")
        if self.n < 1:
            raise ValueError("n must be >= 1")


# -- labeling steps ---------------------------------------------------------------

def _log(state: JudgeState, sid: str, route: Route, seed: bool, called: bool, t0: float, **kw) -> None:
    state.metrics.log.append(LogEntry(sid, route, seed, called, (time.perf_counter() - t0) * 1000.0, **kw))
    state.processed.append(sid)


def label_with_checker(sid: str, program: Program, reference: Program, domain: InputDomain,
                       state: JudgeState, budget: ExploreBudget = ExploreBudget(), seed: bool = False) -> Route:
    """Run the equivalence checker and file the submission accordingly."""
    verdict = check_equivalence(program, reference, domain, budget)
    state.metrics.checker_calls_total += 1
    if not seed:
        state.metrics.checker_calls_post_seed += 1
    if isinstance(verdict, Counterexample):
        ft = FailingTest(verdict.test, verdict.reference_out)
        if all(t.test != ft.test for t in state.T):
            state.T.append(ft)
        state.W.add(sid)
        state.witnesses[sid] = ft
        return Route.CHECKER_INCORRECT
    state.A.add(sid)
    state.A_klee.add(sid)
    if isinstance(verdict, Unknown):
        state.metrics.unknown_verdicts += 1
        return Route.CHECKER_UNKNOWN
    return Route.CHECKER_CORRECT


def _replay(sid: str, program: Program, state: JudgeState) -> bool:
    """Replay T; on failure file into W and return True."""
    for ft in state.T:
        state.metrics.tests_replayed += 1
        if not same_output(run_concrete(program, ft.test), ft.expected):
            state.W.add(sid)
            state.witnesses[sid] = ft
            return True
    return False


def _judge_by_checker(sub, reference, domain, state, budget, seed: bool, replay: bool = True, **kw) -> None:
    t0 = time.perf_counter()
    if replay and _replay(sub.id, sub.program, state):
        _log(state, sub.id, Route.REPLAY_FAIL, seed, False, t0, **kw)
        return
    route = label_with_checker(sub.id, sub.program, reference, domain, state, budget, seed)
    _log(state, sub.id, route, seed, True, t0, **kw)


def run_baseline(queue: Sequence, reference: Program, domain: InputDomain,
                 budget: ExploreBudget = ExploreBudget()) -> tuple:
    state = JudgeState()
    start = time.perf_counter()
    for sub in queue:
        _judge_by_checker(sub, reference, domain, state, budget, seed=False)
    state.metrics.wall_clock_ms = (time.perf_counter() - start) * 1000.0
    return state, state.metrics


# -- ATAS ---------------------------------------------------------------------------

class _Trainer:
    def __init__(self, config: AtasConfig):
        self.config = config
        self.vocab: Optional[FeatureVocab] = None
        self.vectors: dict = {}

    def vector(self, sub) -> np.ndarray:
        v = self.vectors.get(sub.id)
        if v is None:
            v = self.vectors[sub.id] = encode(sub.program, self.vocab)
        return v

    def fit(self, state: JudgeState, subs_by_id: dict, exclude: set, phase: int) -> Optional[CalibratedModel]:
        cfg = self.config
        correct = [LabeledSample(self.vector(subs_by_id[s]), Label.CORRECT)
                   for s in state.processed if s in state.A_klee and s not in exclude]
        incorrect = [LabeledSample(self.vector(subs_by_id[s]), Label.INCORRECT)
                     for s in state.processed if s in state.W and s not in exclude]
        try:
            cal = train_and_get_thresh(cfg.classifier, cfg.F, correct, incorrect, cfg.rng_seed + phase)
        except InsufficientData as exc:
            log.warning("training phase %d skipped: %s", phase, exc)
            state.retrains.append({"phase": phase, "trained": False, "n_correct": len(correct),
                                   "n_incorrect": len(incorrect)})
            return None
        if cfg.thresh_override is not None:
            cal = CalibratedModel(cal.model, cfg.thresh_override, cal.calibration_fpr, cal.degenerate,
                                  cal.val_probs, cal.val_labels)
        state.retrains.append({"phase": phase, "trained": True, "n_correct": len(correct),
                               "n_incorrect": len(incorrect), "thresh": round(cal.thresh, 12),
                               "calibration_fpr": None if cal.calibration_fpr is None
                               else round(cal.calibration_fpr, 12),
                               "degenerate_validation": cal.degenerate,
                               "at_processed": len(state.processed)})
        return cal


def _holdout_picks(start: int, length: int, rng: np.random.Generator) -> set:
    """Positions (absolute) held out in one phase: 10% of it, at least one."""
    k = max(1, int(round(0.1 * length)))
    return set((start + rng.choice(length, size=min(k, length), replace=False)).tolist())


def _pr(rows: list) -> dict:
    """Precision/recall of classifier acceptance against checker labels."""
    tp = sum(1 for pred, truth in rows if pred and truth)
    fp = sum(1 for pred, truth in rows if pred and not truth)
    fn = sum(1 for pred, truth in rows if not pred and truth)
    tn = len(rows) - tp - fp - fn
    prec = tp / (tp + fp) if tp + fp else None
    rec = tp / (tp + fn) if tp + fn else None
    return {"n": len(rows), "tp": tp, "fp": fp, "fn": fn, "tn": tn, "precision": prec, "recall": rec}


def run_atas(queue: Sequence, reference: Program, domain: InputDomain,
             config: AtasConfig = AtasConfig(), fixed_model: Optional[CalibratedModel] = None,
             vocab: Optional[FeatureVocab] = None) -> tuple:
    """ATAS over a time-ordered queue.

    `fixed_model` (with its `vocab`) replaces seed training and disables
    retraining; it is how a single seed model is reused across F values.
    """
    cfg = config
    state = JudgeState()
    budget = cfg.check_budget
    subs_by_id = {s.id: s for s in queue}
    trainer = _Trainer(cfg)
    rng = np.random.default_rng(cfg.rng_seed)
    start = time.perf_counter()
    n_seed = min(cfg.i, len(queue))

    for sub in queue[:n_seed]:
        _judge_by_checker(sub, reference, domain, state, budget, seed=True, replay=cfg.seed_replay)

    model: Optional[CalibratedModel] = None
    if fixed_model is not None:
        if vocab is None:
            raise ValueError("a fixed model needs its vocabulary")
        trainer.vocab, model = vocab, fixed_model
    else:
        try:
            trainer.vocab = build_vocab([s.program for s in queue[:n_seed]], cfg.n)
            model = trainer.fit(state, subs_by_id, set(), 0)
        except EmptyVocab as exc:
            log.warning("no vocabulary after seed: %s", exc)
        if model is None:
            if not cfg.degrade:
                raise SeedTooSmall("cannot train a classifier on the seed submissions")
            log.warning("seed too small; routing to the checker until a retrain succeeds")
            state.seed_degraded = True
    state.model = model
    retrain = cfg.retrain and fixed_model is None and trainer.vocab is not None

    held: set = set()
    held_rows: list = []
    phases: list = []
    if cfg.holdout and len(queue) > n_seed:
        held = _holdout_picks(n_seed, min(cfg.r, len(queue) - n_seed), rng)

    for pos in range(n_seed, len(queue)):
        sub = queue[pos]
        t0 = time.perf_counter()
        if _replay(sub.id, sub.program, state):
            _log(state, sub.id, Route.REPLAY_FAIL, False, False, t0)
        elif model is None:
            route = label_with_checker(sub.id, sub.program, reference, domain, state, budget)
            _log(state, sub.id, route, False, True, t0)
        else:
            prob = predict_probability(model.model, trainer.vector(sub))
            if pos in held:
                route = label_with_checker(sub.id, sub.program, reference, domain, state, budget)
                _log(state, sub.id, route, False, True, t0, probability=prob, held_out=True)
                held_rows.append((model.accepts(prob), route is not Route.CHECKER_INCORRECT))
            elif model.accepts(prob):
                state.A.add(sub.id)
                _log(state, sub.id, Route.CLASSIFIER_ACCEPT, False, False, t0, probability=prob)
            else:
                route = label_with_checker(sub.id, sub.program, reference, domain, state, budget)
                _log(state, sub.id, route, False, True, t0, probability=prob)

        done = pos + 1 - n_seed
        if done % cfg.r == 0 or pos == len(queue) - 1:
            if cfg.holdout:
                phases.append({"phase": len(phases), **_pr(held_rows)})
                held_rows = []
                nxt = pos + 1
                if nxt < len(queue):
                    held |= _holdout_picks(nxt, min(cfg.r, len(queue) - nxt), rng)
            if retrain and done % cfg.r == 0 and pos < len(queue) - 1:
                new = trainer.fit(state, subs_by_id, held, done // cfg.r)
                if new is not None:
                    model = state.model = new

    state.metrics.wall_clock_ms = (time.perf_counter() - start) * 1000.0
    if cfg.holdout:
        state.retrains.append({"holdout_phases": phases})
    state.vocab = trainer.vocab
    return state, state.metrics


# -- evaluation --------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorReport:
    error: int  # oracle-Incorrect ids placed in A
    incorrect_total: int  # oracle-Incorrect ids processed
    false_rejects: int  # oracle-Correct ids placed in W
    by_route: dict
    empty: bool

    @property
    def rate(self) -> float:
        return self.error / self.incorrect_total if self.incorrect_total else 0.0

    def to_json(self) -> dict:
        return {"error": self.error, "incorrect_total": self.incorrect_total,
                "error_rate": round(self.rate, 12), "false_rejects": self.false_rejects,
                "by_route": dict(sorted(self.by_route.items())), "no_incorrect": self.empty}


def evaluate_against_oracle(state: JudgeState, oracle_labels: dict) -> ErrorReport:
    missing = [s for s in state.processed if s not in oracle_labels]
    if missing:
        raise MissingOracleLabel(f"oracle has no label for {missing[:5]}")
    route_of = {e.id: e.route for e in state.metrics.log}
    by_route: dict = {}
    error = false_rejects = incorrect = 0
    for sid in state.processed:
        truth = oracle_labels[sid]
        if truth == Label.INCORRECT:
            incorrect += 1
            if sid in state.A:
                error += 1
                r = route_of.get(sid, Route.CHECKER_CORRECT).value
                by_route[r] = by_route.get(r, 0) + 1
        elif sid in state.W:
            false_rejects += 1
    return ErrorReport(error, incorrect, false_rejects, by_route, incorrect == 0)


def write_run_log(path, metrics: MetricsCounters, wall_clock: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in metrics.log:
            fh.write(json.dumps(e.to_json(wall_clock), sort_keys=True) + "\n")
