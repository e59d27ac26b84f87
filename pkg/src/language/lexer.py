"""Tokenizer for Scene Language source text."""

import re
from dataclasses import dataclass
from typing import List, Union

from src.core.errors import LexError

LPAREN, RPAREN, SYMBOL, NUMBER, STRING = "(", ")", "symbol", "number", "string"

_NUMBER_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_DELIMITERS = set('();"') | set(" \t\r\n\f\v")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Span:
    """Half-open character range with the 1-based line/column of its start."""

    start: int
    end: int
    line: int
    column: int

    def merge(self, other: "Span") -> "Span":
        return Span(self.start, other.end, self.line, self.column)


@dataclass(frozen=True)
class Token:
    kind: str
    value: Union[str, int, float, None]
    span: Span

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.value!r})"


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self) -> str:
        c = self.text[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def span_from(self, start: int, line: int, col: int) -> Span:
        return Span(start, self.pos, line, col)


def _number(word: str) -> Union[int, float, None]:
    if not _NUMBER_RE.fullmatch(word):
        return None
    if any(c in word for c in ".eE"):
        return float(word)
    return int(word)


def tokenize(text: str) -> List[Token]:
    """Split source into parenthesis, symbol, number and string tokens.

    ``;`` starts a comment running to the end of the line.
    """
    cur = _Cursor(text)
    tokens: List[Token] = []
    while cur.pos < len(text):
        c = cur.peek()
        start, line, col = cur.pos, cur.line, cur.col
        if c.isspace():
            cur.advance()
        elif c == ";":
            while cur.pos < len(text) and cur.peek() != "\n":
                cur.advance()
        elif c in "()":
            cur.advance()
            tokens.append(Token(c, c, cur.span_from(start, line, col)))
        elif c == '"':
            cur.advance()
            chars = []
            while True:
                if cur.pos >= len(text):
                    raise LexError("unterminated string literal", Span(start, cur.pos, line, col))
                ch = cur.advance()
                if ch == '"':
                    break
                if ch == "\\" and cur.pos < len(text):
                    nxt = cur.advance()
                    chars.append(_ESCAPES.get(nxt, "\\" + nxt))
                else:
                    chars.append(ch)
            tokens.append(Token(STRING, "".join(chars), cur.span_from(start, line, col)))
        else:
            while cur.pos < len(text) and cur.peek() not in _DELIMITERS:
                cur.advance()
            word = text[start:cur.pos]
            number = _number(word)
            span = cur.span_from(start, line, col)
            if number is not None:
                tokens.append(Token(NUMBER, number, span))
            else:
                tokens.append(Token(SYMBOL, word, span))
    return tokens
