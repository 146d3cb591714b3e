"""Problem specs, submissions, and on-disk corpus layout.

A corpus directory holds::

    problem.spec    name / output kind / input bounds
    reference.mc    reference solution
    manifest.txt    one submission per line: id<TAB>timestamp<TAB>file[<TAB>verdict]
    <files>.mc      submission sources named by the manifest
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from ..labels import Label
from ..minilang import LexError, ParseError, Program, parse
from ..minilang.ast import Print, PrintStr, walk_stmts
from ..symex.solver import InputDomain

log = logging.getLogger(__name__)


class CorpusError(Exception):
    pass


class MissingManifest(CorpusError):
    pass


class SpecParseError(CorpusError):
    pass


class DuplicateId(CorpusError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    inputs: tuple  # ((name, lo, hi), ...)
    output: str  # "int" or "str"
    reference: Program

    def __post_init__(self):
        if self.output not in ("int", "str"):
            raise SpecParseError(f"output kind must be int or str, got {self.output!r}")
        if not 1 <= len(self.inputs) <= 4:
            raise SpecParseError("a problem takes 1 to 4 inputs")
        if self.reference.arity != len(self.inputs):
            raise SpecParseError(
                f"reference reads {self.reference.arity} inputs, spec declares {len(self.inputs)}")
        prints = [s for s in walk_stmts(self.reference.body) if isinstance(s, (Print, PrintStr))]
        wanted = Print if self.output == "int" else PrintStr
        if any(not isinstance(s, wanted) for s in prints):
            raise SpecParseError(f"reference prints a value that is not of kind {self.output}")
        InputDomain(tuple((lo, hi) for _, lo, hi in self.inputs))

    @property
    def domain(self) -> InputDomain:
        return InputDomain(tuple((lo, hi) for _, lo, hi in self.inputs))


@dataclass(frozen=True)
class Submission:
    id: str
    timestamp: int
    source: str
    external_verdict: Optional[Label] = None
    program: Optional[Program] = field(default=None, compare=False, repr=False)


def parse_spec_text(text: str, reference: Program) -> ProblemSpec:
    name = output = None
    inputs = []
    in_inputs = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        key = fields[0]
        if key == "name" and len(fields) == 2:
            name, in_inputs = fields[1], False
        elif key == "output" and len(fields) == 2:
            output, in_inputs = fields[1], False
        elif key == "inputs" and len(fields) == 1:
            in_inputs = True
        elif in_inputs and len(fields) == 3:
            try:
                inputs.append((fields[0], int(fields[1]), int(fields[2])))
            except ValueError:
                raise SpecParseError(f"line {lineno}: bounds must be integers") from None
        else:
            raise SpecParseError(f"line {lineno}: cannot parse {raw!r}")
    if name is None or output is None or not inputs:
        raise SpecParseError("problem.spec needs name, output and inputs")
    try:
        return ProblemSpec(name, tuple(inputs), output, reference)
    except ValueError as exc:
        raise SpecParseError(str(exc)) from None


def format_spec(spec: ProblemSpec) -> str:
    lines = [f"name {spec.name}", f"output {spec.output}", "inputs"]
    lines += [f"{n} {lo} {hi}" for n, lo, hi in spec.inputs]
    return "\n".join(lines) + "\n"


def load_problem(path) -> ProblemSpec:
    """Read problem.spec and reference.mc from a directory."""
    path = Path(path)
    spec_file, ref_file = path / "problem.spec", path / "reference.mc"
    if not spec_file.is_file() or not ref_file.is_file():
        raise SpecParseError(f"{path} lacks problem.spec or reference.mc")
    try:
        reference = parse(ref_file.read_text(encoding="utf-8"))
    except (LexError, ParseError) as exc:
        raise SpecParseError(f"reference does not parse: {exc}") from None
    return parse_spec_text(spec_file.read_text(encoding="utf-8"), reference)


def builtin_problems() -> dict:
    """The bundled problem set, keyed by name."""
    root = resources.files("atas") / "data" / "problems"
    out = {}
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.is_dir():
            with resources.as_file(entry) as p:
                spec = load_problem(p)
            out[spec.name] = spec
    return out


def _parse_verdict(text: str) -> Optional[Label]:
    if text in ("", "-"):
        return None
    try:
        return Label(text.lower())
    except ValueError:
        raise CorpusError(f"unknown verdict {text!r}") from None


def read_manifest(path) -> list:
    path = Path(path)
    if not path.is_file():
        raise MissingManifest(f"no manifest at {path}")
    rows, seen = [], set()
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip() or raw.startswith("#"):
            continue
        fields = raw.split("\t")
        if len(fields) not in (3, 4):
            raise CorpusError(f"manifest line {lineno}: expected 3 or 4 tab-separated fields")
        sid, ts, fname = fields[:3]
        if sid in seen:
            raise DuplicateId(f"manifest line {lineno}: duplicate id {sid!r}")
        seen.add(sid)
        try:
            ts = int(ts)
        except ValueError:
            raise CorpusError(f"manifest line {lineno}: bad timestamp {ts!r}") from None
        verdict = _parse_verdict(fields[3].strip() if len(fields) == 4 else "")
        rows.append((sid, ts, fname, verdict))
    return rows


def load_corpus(path, prune_log: Optional[list] = None):
    """Load (ProblemSpec, time-ordered submissions) from a corpus directory.

    Submissions that fail to lex or parse are dropped; a record
    (id, reason) for each is appended to `prune_log` when given.
    """
    path = Path(path)
    spec = load_problem(path)
    rows = read_manifest(path / "manifest.txt")
    subs = []
    for sid, ts, fname, verdict in rows:
        src_path = path / fname
        if not src_path.is_file():
            raise CorpusError(f"submission file {fname} listed in manifest is missing")
        source = src_path.read_text(encoding="utf-8")
        try:
            program = parse(source)
        except (LexError, ParseError) as exc:
            log.info("pruned %s: %s", sid, exc)
            if prune_log is not None:
                prune_log.append((sid, str(exc)))
            continue
        if program.arity != len(spec.inputs):
            reason = f"reads {program.arity} inputs, problem has {len(spec.inputs)}"
            log.info("pruned %s: %s", sid, reason)
            if prune_log is not None:
                prune_log.append((sid, reason))
            continue
        subs.append(Submission(sid, ts, source, verdict, program))
    subs.sort(key=lambda s: (s.timestamp, s.id))
    return spec, subs


def write_corpus(path, spec: ProblemSpec, submissions, reference_source: str) -> None:
    path = Path(path)
    (path / "submissions").mkdir(parents=True, exist_ok=True)
    (path / "problem.spec").write_text(format_spec(spec), encoding="utf-8")
    (path / "reference.mc").write_text(reference_source, encoding="utf-8")
    lines = []
    for sub in submissions:
        fname = f"submissions/{sub.id}.mc"
        (path / fname).write_text(sub.source, encoding="utf-8")
        verdict = "" if sub.external_verdict is None else f"\t{sub.external_verdict.value}"
        lines.append(f"{sub.id}\t{sub.timestamp}\t{fname}{verdict}")
    (path / "manifest.txt").write_text("".join(l + "\n" for l in lines), encoding="utf-8")
