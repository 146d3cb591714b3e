"""Command-line interface: generate corpora, judge them, compare pipelines.

Exit codes: 0 success, 2 infeasible generation profile, 3 seed too small
(without --degrade), 4 corpus could not be loaded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .corpus import (
    DEFAULT_BUG_WEIGHTS, CorpusError, DomainTooLarge, GenerationProfile, ProfileInfeasible,
    builtin_problems, generate_corpus, load_corpus, load_problem, oracle_label, write_corpus,
)
from .learn import ModelConfig, config_to_json
from .minilang import render
from .pipeline import (
    AtasConfig, SeedTooSmall, evaluate_against_oracle, run_atas, run_baseline, save_failing_tests,
    write_run_log,
)
from .symex import ExploreBudget

REPORT_VERSION = 1

EXIT_OK = 0
EXIT_PROFILE = 2
EXIT_SEED = 3
EXIT_CORPUS = 4

log = logging.getLogger("atas")


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.split(","))


def _weights(text: str) -> dict:
    out = {}
    for item in text.split(","):
        name, _, w = item.partition("=")
        out[name.strip()] = float(w)
    return out


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--seed-count", "-i", type=int, default=50, help="seed submissions labeled by the checker (i)")
    g.add_argument("--retrain", "-r", type=int, default=50, help="retrain interval in labeled submissions (r)")
    g.add_argument("--no-retrain", action="store_true", help="keep the seed model for the whole stream")
    g.add_argument("--max-fpr", "-F", type=float, default=0.3, help="false-positive-rate budget F")
    g.add_argument("--classifier", choices=("knn", "tree", "gbt"), default="gbt")
    g.add_argument("--ngram", "-n", type=int, default=3, help="n-gram length")
    g.add_argument("--k", type=int, default=6, help="neighbors for knn")
    g.add_argument("--tree-trials", type=int, default=10, help="random-search trials for tree")
    g.add_argument("--max-depth", type=int, default=7, help="gbt tree depth")
    g.add_argument("--n-estimators", type=int, default=100, help="gbt boosting rounds")
    g.add_argument("--learning-rate", type=float, default=0.1, help="gbt shrinkage")
    g.add_argument("--thresh-override", type=float, default=None, help="use this threshold instead of calibrating")
    g.add_argument("--no-seed-replay", action="store_true", help="send every seed submission to the checker")
    g.add_argument("--degrade", action="store_true",
                   help="if the seed cannot train a classifier, continue with checker-only routing")
    g.add_argument("--holdout", action="store_true", help="hold out 10%% per phase for precision/recall")
    c = p.add_argument_group("checker")
    c.add_argument("--check-timeout-ms", type=int, default=15000, help="wall-clock budget per checker call")
    c.add_argument("--max-paths", type=int, default=4096)
    c.add_argument("--max-unroll", type=int, default=64)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--no-oracle", action="store_true", help="skip the brute-force error report")
    p.add_argument("--no-timing", action="store_true", help="omit wall-clock fields from the report")
    p.add_argument("--out", type=Path, default=None, help="write the JSON report here")
    p.add_argument("--log", type=Path, default=None, help="write the run log (JSON lines) here")
    p.add_argument("--tests-out", type=Path, default=None, help="write the failing-test set here")


def _budget(args) -> ExploreBudget:
    return ExploreBudget(max_paths=args.max_paths, max_unroll=args.max_unroll,
                         wall_clock_ms=args.check_timeout_ms)


def _atas_config(args) -> AtasConfig:
    model = ModelConfig(family=args.classifier, k=args.k, search_trials=args.tree_trials,
                        max_depth=args.max_depth, n_estimators=args.n_estimators,
                        learning_rate=args.learning_rate)
    return AtasConfig(i=args.seed_count, r=args.retrain, F=args.max_fpr, n=args.ngram, classifier=model,
                      check_budget=_budget(args), rng_seed=args.rng_seed, retrain=not args.no_retrain,
                      seed_replay=not args.no_seed_replay, thresh_override=args.thresh_override,
                      degrade=args.degrade, holdout=args.holdout)


def _config_echo(args, mode: str) -> dict:
    cfg = _atas_config(args)
    d = {"mode": mode, "rng_seed": args.rng_seed,
         "check_budget": {"wall_clock_ms": cfg.check_budget.wall_clock_ms,
                          "max_paths": cfg.check_budget.max_paths,
                          "max_unroll": cfg.check_budget.max_unroll}}
    if mode != "baseline":
        d.update({"i": cfg.i, "r": cfg.r, "F": cfg.F, "n": cfg.n, "retrain": cfg.retrain,
                  "seed_replay": cfg.seed_replay, "thresh_override": cfg.thresh_override,
                  "degrade": cfg.degrade, "holdout": cfg.holdout,
                  "classifier": config_to_json(cfg.classifier)})
    return d


def _oracle(spec, subs, args) -> Optional[dict]:
    if args.no_oracle:
        return None
    try:
        return {s.id: oracle_label(spec, s.program).label for s in subs}
    except DomainTooLarge as exc:
        log.warning("error report skipped: %s", exc)
        return None


def _pipeline_section(state, metrics, oracle) -> dict:
    d = {"metrics": metrics.to_json(wall_clock=False), "failing_tests": len(state.T)}
    if oracle is not None:
        d["error_report"] = evaluate_against_oracle(state, oracle).to_json()
    if state.retrains:
        d["training"] = state.retrains
    if state.seed_degraded:
        d["seed_degraded"] = True
    return d


def _load(path) -> tuple:
    prune: list = []
    spec, subs = load_corpus(path, prune)
    return spec, subs, prune


def _emit(report: dict, args, timing: dict) -> None:
    if not args.no_timing:
        report["timing"] = timing
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    print(format_table(report))


def format_table(report: dict) -> str:
    rows = [("pipeline", "checker total", "checker post-seed", "replay fails", "accepted", "error")]
    for name in ("baseline", "atas"):
        sec = report.get(name)
        if sec is None:
            continue
        m = sec["metrics"]
        err = sec.get("error_report")
        err_s = "-" if err is None else f"{err['error']}/{err['incorrect_total']}"
        rows.append((name, str(m["checker_calls_total"]), str(m["checker_calls_post_seed"]),
                     str(m["routes"]["ReplayFail"]), str(m["routes"]["ClassifierAccept"]), err_s))
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    extra = []
    if "reduction_post_seed" in report:
        red = report["reduction_post_seed"]
        extra.append("post-seed checker-call reduction: " + ("n/a" if red is None else f"{100 * red:.1f}%"))
    if "timing" in report and report["timing"].get("speedup") is not None:
        extra.append(f"speedup: {report['timing']['speedup']:.2f}x")
    if report.get("insufficient_post_seed"):
        extra.append("note: no submissions after the seed phase; nothing to compare")
    return "\n".join(lines + extra)


def _run_atas(spec, subs, args):
    return run_atas(subs, spec.reference, spec.domain, _atas_config(args))


def cmd_generate(args) -> int:
    try:
        if args.problem in builtin_problems():
            spec = builtin_problems()[args.problem]
            ref_src = render(spec.reference)
        else:
            spec = load_problem(args.problem)
            ref_src = (Path(args.problem) / "reference.mc").read_text(encoding="utf-8")
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    weights = dict(DEFAULT_BUG_WEIGHTS)
    if args.bug_weights:
        weights.update(_weights(args.bug_weights))
    try:
        profile = GenerationProfile(count=args.count, correct_fraction=args.correct_fraction,
                                    clusters=args.clusters, bug_weights=weights,
                                    decile_correct=_floats(args.decile_correct) if args.decile_correct else None,
                                    noise=args.noise)
        subs = generate_corpus(spec, profile, args.seed)
    except ProfileInfeasible as exc:
        print(f"error: infeasible profile: {exc}", file=sys.stderr)
        return EXIT_PROFILE
    write_corpus(args.out, spec, subs, ref_src)
    print(f"wrote {len(subs)} submissions to {args.out}")
    return EXIT_OK


def cmd_judge(args) -> int:
    try:
        spec, subs, prune = _load(args.corpus)
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    oracle = _oracle(spec, subs, args)
    report = {"report_version": REPORT_VERSION, "tool_version": __version__, "problem": spec.name,
              "submissions": len(subs), "pruned": [list(p) for p in prune],
              "config": _config_echo(args, args.mode)}
    try:
        if args.mode == "baseline":
            state, metrics = run_baseline(subs, spec.reference, spec.domain, _budget(args))
        else:
            state, metrics = _run_atas(spec, subs, args)
            report["insufficient_post_seed"] = len(subs) <= args.seed_count
    except SeedTooSmall as exc:
        print(f"error: {exc} (rerun with --degrade to continue checker-only)", file=sys.stderr)
        return EXIT_SEED
    report[args.mode] = _pipeline_section(state, metrics, oracle)
    if args.log:
        write_run_log(args.log, metrics, wall_clock=not args.no_timing)
    if args.tests_out:
        save_failing_tests(args.tests_out, state.T)
    _emit(report, args, {f"{args.mode}_wall_clock_ms": round(metrics.wall_clock_ms, 3)})
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        spec, subs, prune = _load(args.corpus)
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    oracle = _oracle(spec, subs, args)
    base_state, base_m = run_baseline(subs, spec.reference, spec.domain, _budget(args))
    try:
        atas_state, atas_m = _run_atas(spec, subs, args)
    except SeedTooSmall as exc:
        print(f"error: {exc} (rerun with --degrade to continue checker-only)", file=sys.stderr)
        return EXIT_SEED
    # baseline checker calls on the same post-seed positions, for the post-seed column
    post_ids = {e.id for e in atas_m.log if not e.seed}
    base_post = sum(1 for e in base_m.log if e.checker_called and e.id in post_ids)
    report = {"report_version": REPORT_VERSION, "tool_version": __version__, "problem": spec.name,
              "submissions": len(subs), "pruned": [list(p) for p in prune],
              "config": _config_echo(args, "compare"),
              "baseline": _pipeline_section(base_state, base_m, oracle),
              "atas": _pipeline_section(atas_state, atas_m, oracle),
              "insufficient_post_seed": not post_ids}
    report["baseline"]["metrics"]["checker_calls_post_seed"] = base_post
    report["baseline"]["metrics"]["checker_calls_seed"] = base_m.checker_calls_total - base_post
    report["reduction_post_seed"] = (None if base_post == 0
                                     else round(1.0 - atas_m.checker_calls_post_seed / base_post, 12))
    if args.log:
        write_run_log(args.log, atas_m, wall_clock=not args.no_timing)
    if args.tests_out:
        save_failing_tests(args.tests_out, atas_state.T)
    speedup = base_m.wall_clock_ms / atas_m.wall_clock_ms if atas_m.wall_clock_ms > 0 else None
    _emit(report, args, {"baseline_wall_clock_ms": round(base_m.wall_clock_ms, 3),
                         "atas_wall_clock_ms": round(atas_m.wall_clock_ms, 3),
                         "speedup": None if speedup is None else round(speedup, 6)})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic corpus for a problem")
    g.add_argument("problem", help="built-in problem name or a directory with problem.spec and reference.mc")
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--count", type=int, default=100)
    g.add_argument("--correct-fraction", type=float, default=0.5)
    g.add_argument("--clusters", type=int, default=3)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--decile-correct", default=None, help="ten comma-separated correct fractions")
    g.add_argument("--bug-weights", default=None, help="comma-separated name=weight overrides")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_generate)

    j = sub.add_parser("judge", help="run one pipeline over a corpus")
    j.add_argument("corpus", type=Path)
    j.add_argument("--mode", choices=("baseline", "atas"), default="atas")
    _add_pipeline_flags(j)
    j.set_defaults(func=cmd_judge)

    c = sub.add_parser("compare", help="run baseline then ATAS on the same stream")
    c.add_argument("corpus", type=Path)
    _add_pipeline_flags(c)
    c.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        # bad flag values (profile fields, F outside (0,1), ...) are usage errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROFILE


if __name__ == "__main__":
    sys.exit(main())
