from .generate import DEFAULT_BUG_WEIGHTS, GenerationProfile, ProfileInfeasible, generate_corpus
from .oracle import DEFAULT_EXHAUSTIVE_CAP, DomainTooLarge, OracleVerdict, oracle_label
from .problem import (
    CorpusError, DuplicateId, MissingManifest, ProblemSpec, SpecParseError, Submission,
    builtin_problems, format_spec, load_corpus, load_problem, parse_spec_text, read_manifest,
    write_corpus,
)

__all__ = [
    "DEFAULT_BUG_WEIGHTS", "GenerationProfile", "ProfileInfeasible", "generate_corpus",
    "DEFAULT_EXHAUSTIVE_CAP", "DomainTooLarge", "OracleVerdict", "oracle_label",
    "CorpusError", "DuplicateId", "MissingManifest", "ProblemSpec", "SpecParseError",
    "Submission", "builtin_problems", "format_spec", "load_corpus", "load_problem",
    "parse_spec_text", "read_manifest", "write_corpus",
]
