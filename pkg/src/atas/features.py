"""Anonymized token n-gram features.

A program is rendered canonically, tokenized, and every identifier is
replaced by the single text ``ID``. Literals are kept. The vocabulary is the
ordered set of n-grams seen while it was built; a program's vector holds one
presence bit per vocabulary gram.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .minilang import Program, render
from .minilang.lexer import Token, TokenKind, tokenize

ANON = "ID"


class EmptyVocab(ValueError):
    pass


def anonymize(tokens: Sequence[Token]) -> list:
    return [Token(t.kind, ANON, t.position) if t.kind is TokenKind.IDENT else t for t in tokens]


def program_tokens(program: Program) -> list:
    """Anonymized token texts of the canonical rendering."""
    return [t.text for t in anonymize(tokenize(render(program)))]


def ngrams(seq: Sequence[str], n: int) -> Iterable[tuple]:
    return (tuple(seq[i:i + n]) for i in range(len(seq) - n + 1))


@dataclass(frozen=True)
class FeatureVocab:
    n: int
    grams: tuple
    index: dict = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("gram length must be at least 1")
        if len(set(self.grams)) != len(self.grams):
            raise ValueError("duplicate n-grams in vocabulary")
        object.__setattr__(self, "index", {g: i for i, g in enumerate(self.grams)})

    def __len__(self) -> int:
        return len(self.grams)

    def save(self, path) -> None:
        lines = [f"# n={self.n}"] + ["\t".join(g) for g in self.grams]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "FeatureVocab":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if not lines or not lines[0].startswith("# n="):
            raise ValueError("vocabulary file must start with '# n=<int>'")
        n = int(lines[0][4:])
        grams = tuple(tuple(line.split("\t")) for line in lines[1:] if line)
        if any(len(g) != n for g in grams):
            raise ValueError(f"every gram must have {n} tokens")
        return cls(n, grams)


def vocab_from_sequences(seqs: Iterable[Sequence[str]], n: int) -> FeatureVocab:
    grams: dict = {}
    for seq in seqs:
        for g in ngrams(seq, n):
            grams.setdefault(g, None)
    if not grams:
        raise EmptyVocab(f"no sequence has {n} or more tokens")
    return FeatureVocab(n, tuple(grams))


def build_vocab(programs: Sequence[Program], n: int = 3) -> FeatureVocab:
    if not programs:
        raise EmptyVocab("no programs to build a vocabulary from")
    return vocab_from_sequences((program_tokens(p) for p in programs), n)


def encode_sequence(seq: Sequence[str], vocab: FeatureVocab) -> np.ndarray:
    bits = np.zeros(len(vocab), dtype=np.uint8)
    for g in ngrams(seq, vocab.n):
        i = vocab.index.get(g)
        if i is not None:
            bits[i] = 1
    return bits


def encode(program: Program, vocab: FeatureVocab) -> np.ndarray:
    return encode_sequence(program_tokens(program), vocab)
