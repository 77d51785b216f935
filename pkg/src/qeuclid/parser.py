"""Tokenizer and recursive-descent parser shared by the scalar and algebra grammars.

The parser only builds a small tuple AST; turning it into a ``FieldElem`` or an
``NCExpr`` is done by the evaluators in :mod:`qeuclid.coeff` and
:mod:`qeuclid.ncalg`.

AST nodes::

    ("num", int)                      integer literal
    ("sym", "i" | "s" | "q")          scalar symbols
    ("gen", "x" | "xi" | "d", idx, line, col)    indexed generators
    ("gen", "L", 0, line, col)                   dilatation
    ("add" | "sub" | "mul" | "div", a, b)
    ("neg", a)
    ("pow", a, k)                     integer power
    ("apply", op, arg)                ``op(arg)`` written without whitespace
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = ["ParseError", "Token", "tokenize", "parse_ast"]


class ParseError(ValueError):
    """Syntax error carrying a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "name", "op", "end"
    text: str
    line: int
    column: int
    spaced: bool  # whitespace immediately before this token


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")
_SCALAR_SYMBOLS = {"i", "s", "q"}
_INDEXED = {"x", "xi", "d"}


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        start = m.start(m.lastindex)
        skipped = text[pos:start]
        line += skipped.count("\n")
        if "\n" in skipped:
            line_start = pos + skipped.rfind("\n") + 1
        col = start - line_start + 1
        spaced = bool(skipped) or not tokens
        if m.group(1) is not None:
            tokens.append(Token("int", m.group(1), line, col, spaced))
        elif m.group(2) is not None:
            tokens.append(Token("name", m.group(2), line, col, spaced))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()[]":
                raise ParseError(f"unexpected character {ch!r}", line, col)
            tokens.append(Token("op", ch, line, col, spaced))
        pos = m.end()
    tokens.append(Token("end", "", line, len(text) - line_start + 1, True))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("op",):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def signed_int(self) -> int:
        sign = 1
        while self.tok.kind == "op" and self.tok.text in "+-":
            if self.advance().text == "-":
                sign = -sign
        if self.tok.kind != "int":
            raise self.error("expected an integer")
        return sign * int(self.advance().text)

    # expr := term (('+'|'-') term)*
    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def _starts_factor(self) -> bool:
        tok = self.tok
        return tok.kind in ("int", "name") or (tok.kind == "op" and tok.text == "(")

    # term := unary (('*'|'/') unary | unary)*
    def term(self):
        node = self.unary()
        while True:
            tok = self.tok
            if tok.kind == "op" and tok.text in "*/":
                self.advance()
                node = ("mul" if tok.text == "*" else "div", node, self.unary())
            elif self._starts_factor():
                node = ("mul", node, self.unary())
            else:
                return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            inner = self.unary()
            return ("neg", inner) if op == "-" else inner
        return self.power()

    def power(self):
        node = self.postfix()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                self.advance()
                k = self.signed_int()
                self.expect(")")
            else:
                k = self.signed_int()
            node = ("pow", node, k)
        return node

    def postfix(self):
        node = self.atom()
        while self.tok.kind == "op" and self.tok.text == "(" and not self.tok.spaced:
            self.advance()
            arg = self.expr()
            self.expect(")")
            node = ("apply", node, arg)
        return node

    def atom(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return ("num", int(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text in _SCALAR_SYMBOLS:
                return ("sym", tok.text)
            if tok.text == "L":
                return ("gen", "L", 0, tok.line, tok.column)
            if tok.text in _INDEXED:
                self.expect("[")
                idx = self.signed_int()
                self.expect("]")
                return ("gen", tok.text, idx, tok.line, tok.column)
            raise self.error(f"unknown symbol {tok.text!r}", tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse_ast(text: str):
    """Parse ``text`` into the tuple AST described in the module docstring."""
    p = _Parser(text)
    if p.tok.kind == "end":
        raise p.error("empty expression")
    node = p.expr()
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.tok.text!r}")
    return node
