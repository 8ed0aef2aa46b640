"""Tokenizer shared by the MiniLang, MiniAspect, COOL, and audit front-ends."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Loc, ParseError

NAME = "name"
INT = "int"
FLOAT = "float"
STRING = "string"
PUNCT = "punct"
EOF = "eof"

_TWO_CHAR = ("&&", "||", "==", "!=", "<=", ">=")
_ONE_CHAR = set("{}()[];,.=<>+-*/%!@:&|")

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int

    def loc(self, path: str) -> Loc:
        return Loc(path, self.line, self.col)


def tokenize(src: str, path: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(src)

    def err(msg: str) -> ParseError:
        return ParseError(msg, Loc(path, line, col))

    while i < n:
        ch = src[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("//", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(Token(NAME, src[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            # digits '.' digit is a float literal; member access never follows an int
            if j + 1 < n and src[j] == "." and src[j + 1].isdigit():
                j += 1
                while j < n and src[j].isdigit():
                    j += 1
                tokens.append(Token(FLOAT, src[i:j], line, start_col))
            else:
                tokens.append(Token(INT, src[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while True:
                if j >= n or src[j] == "\n":
                    raise err("unterminated string literal")
                c = src[j]
                if c == '"':
                    j += 1
                    break
                if c == "\\":
                    if j + 1 >= n or src[j + 1] not in _ESCAPES:
                        raise err("bad string escape")
                    buf.append(_ESCAPES[src[j + 1]])
                    j += 2
                    continue
                buf.append(c)
                j += 1
            tokens.append(Token(STRING, "".join(buf), line, start_col))
            col += j - i
            i = j
            continue
        two = src[i : i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token(PUNCT, two, line, start_col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR:
            tokens.append(Token(PUNCT, ch, line, start_col))
            i += 1
            col += 1
            continue
        raise err(f"unexpected character {ch!r}")

    tokens.append(Token(EOF, "", line, col))
    return tokens


class TokenStream:
    """Cursor over a token list with the usual expect/accept helpers."""

    def __init__(self, tokens: list[Token], path: str):
        self.tokens = tokens
        self.path = path
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def loc(self) -> Loc:
        return self.cur.loc(self.path)

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.cur
        return tok.kind == kind and (text is None or tok.text == text)

    def at_punct(self, text: str) -> bool:
        return self.at(PUNCT, text)

    def at_name(self, text: str | None = None) -> bool:
        return self.at(NAME, text)

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.advance()
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        if self.at(kind, text):
            return self.advance()
        want = text if text is not None else kind
        got = self.cur.text or self.cur.kind
        raise ParseError(f"expected {want!r}, found {got!r}", self.loc())

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.loc())
