"""Recursive-descent parser for MiniC with static checks.

Static checks: declare-before-use with block scoping, no shadowing,
top-level reads only, 1..4 inputs, at least one print, `break` only inside
a loop or switch.
"""

from __future__ import annotations

from .ast import (
    Assign, BinOp, Block, Break, Case, Decl, For, If, IncDec, Num, Print,
    PrintStr, Program, Read, Switch, UnaryOp, Var, While,
)
from .lexer import Token, TokenKind, decode_string, tokenize

MAX_INPUTS = 4

_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)
_ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=")


def wrap64(value: int) -> int:
    return ((value + (1 << 63)) & ((1 << 64) - 1)) - (1 << 63)


class ParseError(Exception):
    def __init__(self, position, expected: str, found: str):
        self.position = position
        self.expected = expected
        self.found = found
        where = f"{position[0]}:{position[1]}" if position else "<eof>"
        super().__init__(f"{where}: expected {expected}, found {found}")


class ArityError(ParseError):
    pass


class PrintError(ParseError):
    pass


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.scopes: list[set] = [set()]
        self.inputs: list[str] = []
        self.prints = 0
        self.breakable = 0

    # -- token helpers
    def peek(self, offset: int = 0):
        idx = self.pos + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.text == text and tok.kind not in (
            TokenKind.STR_LITERAL, TokenKind.IDENT)

    def error(self, expected: str) -> ParseError:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1].position if self.tokens else (1, 1)
            return ParseError(last, expected, "end of input")
        return ParseError(tok.position, expected, repr(tok.text))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(repr(text))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def ident(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            raise self.error("identifier")
        self.pos += 1
        return tok

    # -- scopes
    def visible(self, name: str) -> bool:
        return any(name in s for s in self.scopes)

    def declare(self, tok: Token) -> None:
        if self.visible(tok.text):
            raise ParseError(tok.position, "fresh identifier", f"redeclared {tok.text!r}")
        self.scopes[-1].add(tok.text)

    def use(self, tok: Token) -> None:
        if not self.visible(tok.text):
            raise ParseError(tok.position, "declared variable", f"undeclared {tok.text!r}")

    # -- program
    def program(self) -> Program:
        body = []
        while self.peek() is not None:
            body.extend(self.statement(top=True))
        if not self.inputs or len(self.inputs) > MAX_INPUTS:
            raise ArityError(None, f"1 to {MAX_INPUTS} read statements",
                             f"{len(self.inputs)} reads")
        if self.prints == 0:
            raise PrintError(None, "at least one print statement", "none")
        return Program(inputs=tuple(self.inputs), body=tuple(body))

    def scoped_body(self) -> tuple:
        self.scopes.append(set())
        try:
            if self.at("{"):
                self.expect("{")
                stmts = []
                while not self.at("}"):
                    if self.peek() is None:
                        raise self.error("'}'")
                    stmts.extend(self.statement())
                self.expect("}")
                return tuple(stmts)
            return tuple(self.statement())
        finally:
            self.scopes.pop()

    def statement(self, top: bool = False) -> list:
        tok = self.peek()
        if tok is None:
            raise self.error("statement")
        if tok.kind is TokenKind.KEYWORD:
            kw = tok.text
            if kw == "int":
                self.pos += 1
                decls = [self.declarator()]
                while self.at(","):
                    self.expect(",")
                    decls.append(self.declarator())
                self.expect(";")
                return decls
            if kw == "read":
                if not top:
                    raise ParseError(tok.position, "read at top level", "nested read")
                self.pos += 1
                self.expect("(")
                name = self.ident()
                self.expect(")")
                self.expect(";")
                if not self.visible(name.text):
                    self.scopes[0].add(name.text)
                self.inputs.append(name.text)
                if len(self.inputs) > MAX_INPUTS:
                    raise ArityError(tok.position, f"at most {MAX_INPUTS} reads",
                                     f"read #{len(self.inputs)}")
                return [Read(name.text)]
            if kw == "print":
                self.pos += 1
                self.expect("(")
                nxt = self.peek()
                if nxt is not None and nxt.kind is TokenKind.STR_LITERAL:
                    self.pos += 1
                    stmt = PrintStr(decode_string(nxt.text))
                else:
                    stmt = Print(self.expr())
                self.expect(")")
                self.expect(";")
                self.prints += 1
                return [stmt]
            if kw == "if":
                self.pos += 1
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                then = self.scoped_body()
                orelse = None
                if self.at("else"):
                    self.pos += 1
                    orelse = self.scoped_body()
                return [If(cond, then, orelse)]
            if kw == "while":
                self.pos += 1
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                return [While(cond, self.loop_body())]
            if kw == "for":
                return [self.for_stmt()]
            if kw == "switch":
                return [self.switch_stmt()]
            if kw == "break":
                if not self.breakable:
                    raise ParseError(tok.position, "break inside loop or switch", "break")
                self.pos += 1
                self.expect(";")
                return [Break()]
            raise self.error("statement")
        if self.at("{"):
            return [Block(self.scoped_body())]
        if self.at(";"):
            self.pos += 1
            return []
        stmt = self.simple()
        self.expect(";")
        return [stmt]

    def declarator(self) -> Decl:
        name = self.ident()
        init = None
        if self.at("="):
            self.pos += 1
            init = self.expr()
        self.declare(name)
        return Decl(name.text, init)

    def simple(self):
        """Assignment or increment/decrement, without the trailing ';'."""
        if self.at("++") or self.at("--"):
            op = self.tokens[self.pos].text
            self.pos += 1
            name = self.ident()
            self.use(name)
            return IncDec(name.text, op)
        name = self.ident()
        self.use(name)
        if self.at("++") or self.at("--"):
            op = self.tokens[self.pos].text
            self.pos += 1
            return IncDec(name.text, op)
        for op in _ASSIGN_OPS:
            if self.at(op):
                self.pos += 1
                return Assign(name.text, op, self.expr())
        raise self.error("assignment operator")

    def loop_body(self) -> tuple:
        self.breakable += 1
        try:
            return self.scoped_body()
        finally:
            self.breakable -= 1

    def for_stmt(self) -> For:
        self.expect("for")
        self.expect("(")
        self.scopes.append(set())
        try:
            init = None
            if self.at("int"):
                self.pos += 1
                init = self.declarator()
            elif not self.at(";"):
                init = self.simple()
            self.expect(";")
            cond = None if self.at(";") else self.expr()
            self.expect(";")
            update = None if self.at(")") else self.simple()
            self.expect(")")
            body = self.loop_body()
        finally:
            self.scopes.pop()
        return For(init, cond, update, body)

    def switch_stmt(self) -> Switch:
        self.expect("switch")
        self.expect("(")
        subject = self.expr()
        self.expect(")")
        self.expect("{")
        cases = []
        seen = set()
        self.breakable += 1
        try:
            while not self.at("}"):
                tok = self.peek()
                if self.at("case"):
                    self.pos += 1
                    value = self.case_label()
                elif self.at("default"):
                    self.pos += 1
                    value = None
                else:
                    raise self.error("'case' or 'default'")
                if value in seen:
                    raise ParseError(tok.position, "distinct case label", "duplicate label")
                seen.add(value)
                self.expect(":")
                self.scopes.append(set())
                stmts = []
                try:
                    while not (self.at("case") or self.at("default") or self.at("}")):
                        if self.peek() is None:
                            raise self.error("'}'")
                        stmts.extend(self.statement())
                finally:
                    self.scopes.pop()
                cases.append(Case(value, tuple(stmts)))
        finally:
            self.breakable -= 1
        self.expect("}")
        return Switch(subject, tuple(cases))

    def case_label(self) -> int:
        negate = False
        while self.at("-") or self.at("+"):
            negate ^= self.tokens[self.pos].text == "-"
            self.pos += 1
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.INT_LITERAL:
            raise self.error("integer case label")
        self.pos += 1
        value = wrap64(int(tok.text))
        return wrap64(-value) if negate else value

    # -- expressions
    def expr(self, level: int = 0):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        ops = _BINARY_LEVELS[level]
        while True:
            tok = self.peek()
            if tok is None or tok.kind is not TokenKind.OPERATOR or tok.text not in ops:
                return left
            self.pos += 1
            right = self.expr(level + 1)
            left = BinOp(tok.text, left, right)

    def unary(self):
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.OPERATOR and tok.text in ("-", "+", "!"):
            self.pos += 1
            operand = self.unary()
            if tok.text == "-" and isinstance(operand, Num):
                return Num(wrap64(-operand.value))
            return UnaryOp(tok.text, operand)
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok is None:
            raise self.error("expression")
        if tok.kind is TokenKind.INT_LITERAL:
            self.pos += 1
            return Num(wrap64(int(tok.text)))
        if tok.kind is TokenKind.IDENT:
            self.pos += 1
            self.use(tok)
            return Var(tok.text)
        if self.at("("):
            self.pos += 1
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error("expression")


def parse(source: str) -> Program:
    return _Parser(tokenize(source)).program()
