"""Tokenizer for MiniC."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class TokenKind(enum.Enum):
    KEYWORD = "KEYWORD"
    IDENT = "IDENT"
    INT_LITERAL = "INT_LITERAL"
    STR_LITERAL = "STR_LITERAL"
    OPERATOR = "OPERATOR"
    PUNCT = "PUNCT"


KEYWORDS = frozenset(
    ["int", "if", "else", "while", "for", "switch", "case", "default",
     "break", "read", "print"]
)

# longest match first
OPERATORS = (
    "++", "--", "+=", "-=", "*=", "/=", "%=",
    "<=", ">=", "==", "!=", "&&", "||",
    "+", "-", "*", "/", "%", "<", ">", "=", "!",
)
PUNCTUATION = frozenset("();{},:")

_U64_MAX = (1 << 64) - 1
_STR_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class LexError(Exception):
    def __init__(self, position: tuple[int, int], character: str, message: str = ""):
        self.position = position
        self.character = character
        detail = message or f"unexpected character {character!r}"
        super().__init__(f"{position[0]}:{position[1]}: {detail}")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    position: tuple[int, int] = (0, 0)

    def __repr__(self) -> str:
        return f"{self.kind.value}({self.text!r})"


def decode_string(text: str) -> str:
    """Turn the raw text of a string literal (quotes included) into its value."""
    out = []
    i = 1
    while i < len(text) - 1:
        ch = text[i]
        if ch == "\\":
            out.append(_STR_ESCAPES[text[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def encode_string(value: str) -> str:
    body = (
        value.replace("\\", "\\\\").replace('"', '\\"')
        .replace("\n", "\\n").replace("\t", "\\t")
    )
    return f'"{body}"'


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(source)
    line, col = 1, 1

    def advance(count: int) -> None:
        nonlocal i, line, col
        for ch in source[i:i + count]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += count

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if source.startswith("//", i):
            end = source.find("\n", i)
            advance((n if end < 0 else end) - i)
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise LexError((line, col), "/", "unterminated comment")
            advance(end + 2 - i)
            continue

        pos = (line, col)
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and (source[j].isalpha() or source[j] == "_"):
                raise LexError((line, col + j - i), source[j], "malformed number")
            text = source[i:j]
            if int(text) > _U64_MAX:
                raise LexError(pos, ch, f"integer literal {text} exceeds 64 bits")
            tokens.append(Token(TokenKind.INT_LITERAL, text, pos))
            advance(j - i)
        elif ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i
            while j < n and source[j].isascii() and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, text, pos))
            advance(j - i)
        elif ch == '"':
            j = i + 1
            while True:
                if j >= n or source[j] == "\n":
                    raise LexError(pos, ch, "unterminated string literal")
                c = source[j]
                if c == '"':
                    break
                if c == "\\":
                    if j + 1 >= n or source[j + 1] not in _STR_ESCAPES:
                        raise LexError(pos, c, "bad escape in string literal")
                    j += 2
                    continue
                if not c.isprintable():
                    raise LexError(pos, c, "control character in string literal")
                j += 1
            tokens.append(Token(TokenKind.STR_LITERAL, source[i:j + 1], pos))
            advance(j + 1 - i)
        else:
            for op in OPERATORS:
                if source.startswith(op, i):
                    tokens.append(Token(TokenKind.OPERATOR, op, pos))
                    advance(len(op))
                    break
            else:
                if ch in PUNCTUATION:
                    tokens.append(Token(TokenKind.PUNCT, ch, pos))
                    advance(1)
                else:
                    raise LexError(pos, ch)
    return tokens
