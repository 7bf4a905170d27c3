"""C# source tokenizer.

Produces a flat token stream with trivia removed: whitespace, line and block
comments, attribute sections in declaration position, and preprocessor
directive lines are consumed without emitting anything. Both branches of
conditional-compilation regions are kept; only the directive lines vanish.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class TokenKind(Enum):
    KEYWORD = "Keyword"
    IDENTIFIER = "Identifier"
    INT_LITERAL = "IntLiteral"
    REAL_LITERAL = "RealLiteral"
    STRING_LITERAL = "StringLiteral"
    CHAR_LITERAL = "CharLiteral"
    PUNCTUATOR = "Punctuator"
    OPERATOR = "Operator"


# C# 1.0 keyword table. Later contextual words (partial, where, get, set,
# add, remove) deliberately lex as plain identifiers.
KEYWORDS = frozenset(
    """
    abstract as base bool break byte case catch char checked class const
    continue decimal default delegate do double else enum event explicit
    extern false finally fixed float for foreach goto if implicit in int
    interface internal is lock long namespace new null object operator out
    override params private protected public readonly ref return sbyte
    sealed short sizeof stackalloc static string struct switch this throw
    true try typeof uint ulong unchecked unsafe ushort using virtual void
    volatile while
    """.split()
)

CONTEXTUAL_IDENTIFIERS = frozenset({"partial", "where", "get", "set", "add", "remove"})

PUNCTUATORS = frozenset("{}[]().,;:")

# Multi-character operators, longest first. '<' and '>' always lex as single
# characters so the parser can reassemble generic argument groups without
# splitting shift operators.
_MULTI_OPS = (
    "&&", "||", "++", "--", "==", "!=", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "=>", "->", "??",
)

_OP_CHARS = frozenset("+-*/%&|^!~=<>?")

# A '[' opening directly after one of these (or at the start of the stream)
# can only be an attribute section, never array indexing.
_ATTRIBUTE_PREDECESSORS = frozenset({"{", "}", ";", "(", ","})

_INT_SUFFIX = frozenset("uUlL")
_REAL_SUFFIX = frozenset("fFdDmM")


@dataclass(frozen=True)
class SourcePosition:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    pos: SourcePosition


class LexError(Exception):
    """Base for lexical failures; aborts the current file only."""

    def __init__(self, message: str, pos: SourcePosition):
        super().__init__(f"{pos}: {message}")
        self.message = message
        self.pos = pos


class UnterminatedString(LexError):
    pass


class UnterminatedComment(LexError):
    """Unterminated block comment or attribute section."""


class IllegalCharacter(LexError):
    pass


class _Scanner:
    def __init__(self, source: str, file: str):
        self.src = source
        self.file = file
        self.i = 0
        self.line = 1
        self.col = 1
        self.line_has_content = False

    def pos(self) -> SourcePosition:
        return SourcePosition(self.file, self.line, self.col)

    def peek(self, offset: int = 0) -> str:
        j = self.i + offset
        return self.src[j] if j < len(self.src) else ""

    def advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.i >= len(self.src):
                return
            if self.src[self.i] == "\n":
                self.line += 1
                self.col = 1
                self.line_has_content = False
            else:
                self.col += 1
            self.i += 1

    def at_end(self) -> bool:
        return self.i >= len(self.src)


def tokenize(source: str, file: str) -> list[Token]:
    """Lex C# source text into non-trivia tokens.

    Raises UnterminatedString, UnterminatedComment or IllegalCharacter with
    the offending position; callers processing many files catch these and
    continue with the remaining files.
    """
    sc = _Scanner(source, file)
    tokens: list[Token] = []
    while True:
        _skip_trivia(sc, tokens)
        if sc.at_end():
            return tokens
        tokens.append(_scan_token(sc))


def _skip_trivia(sc: _Scanner, emitted: list[Token]) -> None:
    """Consume whitespace, comments, directive lines and attribute sections."""
    while not sc.at_end():
        ch = sc.peek()
        if ch == "﻿" or ch.isspace():
            sc.advance()
            continue
        if ch == "/" and sc.peek(1) == "/":
            while not sc.at_end() and sc.peek() != "\n":
                sc.advance()
            continue
        if ch == "/" and sc.peek(1) == "*":
            start = sc.pos()
            sc.advance(2)
            while not (sc.peek() == "*" and sc.peek(1) == "/"):
                if sc.at_end():
                    raise UnterminatedComment("unterminated block comment", start)
                sc.advance()
            sc.advance(2)
            continue
        if ch == "#" and not sc.line_has_content:
            while not sc.at_end() and sc.peek() != "\n":
                sc.advance()
            continue
        if ch == "[" and _at_attribute_position(emitted):
            _skip_attribute_section(sc)
            continue
        return


def _at_attribute_position(emitted: list[Token]) -> bool:
    if not emitted:
        return True
    return emitted[-1].text in _ATTRIBUTE_PREDECESSORS


def _skip_attribute_section(sc: _Scanner) -> None:
    start = sc.pos()
    sc.line_has_content = True
    sc.advance()  # the opening '['
    depth = 1
    while depth > 0:
        _skip_trivia(sc, [Token(TokenKind.PUNCTUATOR, "[", start)])
        if sc.at_end():
            raise UnterminatedComment("unterminated attribute section", start)
        tok = _scan_token(sc)
        if tok.text == "[":
            depth += 1
        elif tok.text == "]":
            depth -= 1


def _scan_token(sc: _Scanner) -> Token:
    sc.line_has_content = True
    start = sc.pos()
    ch = sc.peek()

    if ch == "@":
        if sc.peek(1) == '"':
            return _scan_verbatim_string(sc, start)
        if sc.peek(1).isalpha() or sc.peek(1) == "_":
            sc.advance()
            text = "@" + _scan_identifier_text(sc)
            return Token(TokenKind.IDENTIFIER, text, start)
        raise IllegalCharacter("stray '@'", start)

    if ch.isalpha() or ch == "_":
        text = _scan_identifier_text(sc)
        kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENTIFIER
        return Token(kind, text, start)

    if ch.isdigit() or (ch == "." and sc.peek(1).isdigit()):
        return _scan_number(sc, start)

    if ch == '"':
        return _scan_string(sc, start)

    if ch == "'":
        return _scan_char(sc, start)

    if ch in PUNCTUATORS:
        sc.advance()
        return Token(TokenKind.PUNCTUATOR, ch, start)

    if ch in _OP_CHARS:
        if ch in "<>":
            sc.advance()
            return Token(TokenKind.OPERATOR, ch, start)
        rest = sc.src[sc.i : sc.i + 2]
        for op in _MULTI_OPS:
            if rest == op:
                sc.advance(2)
                return Token(TokenKind.OPERATOR, op, start)
        sc.advance()
        return Token(TokenKind.OPERATOR, ch, start)

    if ch == "#":
        raise IllegalCharacter("'#' outside a directive line", start)
    raise IllegalCharacter(f"illegal character {ch!r}", start)


def _scan_identifier_text(sc: _Scanner) -> str:
    begin = sc.i
    while not sc.at_end() and (sc.peek().isalnum() or sc.peek() == "_"):
        sc.advance()
    return sc.src[begin : sc.i]


def _scan_number(sc: _Scanner, start: SourcePosition) -> Token:
    begin = sc.i
    is_real = False
    if sc.peek() == "0" and sc.peek(1) in ("x", "X"):
        sc.advance(2)
        while sc.peek() and sc.peek() in "0123456789abcdefABCDEF":
            sc.advance()
    else:
        while sc.peek().isdigit():
            sc.advance()
        if sc.peek() == "." and sc.peek(1).isdigit():
            is_real = True
            sc.advance()
            while sc.peek().isdigit():
                sc.advance()
        if sc.peek() in ("e", "E") and (
            sc.peek(1).isdigit() or (sc.peek(1) in "+-" and sc.peek(2).isdigit())
        ):
            is_real = True
            sc.advance()
            if sc.peek() in "+-":
                sc.advance()
            while sc.peek().isdigit():
                sc.advance()
    if sc.peek() and sc.peek() in _REAL_SUFFIX:
        is_real = True
        sc.advance()
    else:
        while sc.peek() and sc.peek() in _INT_SUFFIX:
            sc.advance()
    kind = TokenKind.REAL_LITERAL if is_real else TokenKind.INT_LITERAL
    return Token(kind, sc.src[begin : sc.i], start)


def _scan_string(sc: _Scanner, start: SourcePosition) -> Token:
    begin = sc.i
    sc.advance()  # opening quote
    while True:
        ch = sc.peek()
        if sc.at_end() or ch == "\n":
            raise UnterminatedString("unterminated string literal", start)
        if ch == "\\":
            sc.advance(2)
            continue
        sc.advance()
        if ch == '"':
            return Token(TokenKind.STRING_LITERAL, sc.src[begin : sc.i], start)


def _scan_verbatim_string(sc: _Scanner, start: SourcePosition) -> Token:
    begin = sc.i
    sc.advance(2)  # @"
    while True:
        if sc.at_end():
            raise UnterminatedString("unterminated verbatim string literal", start)
        ch = sc.peek()
        sc.advance()
        if ch == '"':
            if sc.peek() == '"':
                sc.advance()  # doubled quote stays inside the literal
                continue
            return Token(TokenKind.STRING_LITERAL, sc.src[begin : sc.i], start)


def _scan_char(sc: _Scanner, start: SourcePosition) -> Token:
    begin = sc.i
    sc.advance()  # opening quote
    while True:
        ch = sc.peek()
        if sc.at_end() or ch == "\n":
            raise UnterminatedString("unterminated character literal", start)
        if ch == "\\":
            sc.advance(2)
            continue
        sc.advance()
        if ch == "'":
            return Token(TokenKind.CHAR_LITERAL, sc.src[begin : sc.i], start)
