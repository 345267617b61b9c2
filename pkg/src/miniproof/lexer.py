"""Tokenizer for .ccl sources.

Line comments start with -- and run to end of line. Newlines are not
tokens; the grammar is keyword-delimited.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

KEYWORDS = {
    "class",
    "create",
    "feature",
    "note",
    "require",
    "modify",
    "do",
    "ensure",
    "invariant",
    "end",
    "if",
    "then",
    "else",
    "check",
    "old",
    "not",
    "and",
    "or",
    "implies",
    "true",
    "false",
    "Void",
}

# longest match first
SYMBOLS = [
    ":=",
    "/=",
    "<=",
    ">=",
    "(",
    ")",
    "{",
    "}",
    ",",
    ";",
    ":",
    ".",
    "=",
    "<",
    ">",
    "+",
    "-",
    "*",
]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | STRING | KEYWORD | SYMBOL | EOF
    value: str
    line: int
    col: int

    def __repr__(self):
        return f"Token({self.kind}, {self.value!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if ch == '"':
            start_line, start_col = line, col
            j = i + 1
            while j < n and text[j] not in ('"', "\n"):
                j += 1
            if j >= n or text[j] == "\n":
                raise ParseError("unterminated string literal", start_line, start_col)
            value = text[i + 1 : j]
            advance(j + 1 - i)
            tokens.append(Token("STRING", value, start_line, start_col))
            continue
        if ch.isdigit():
            start_line, start_col = line, col
            j = i
            while j < n and text[j].isdigit():
                j += 1
            value = text[i:j]
            advance(j - i)
            tokens.append(Token("INT", value, start_line, start_col))
            continue
        if ch.isalpha() or ch == "_":
            start_line, start_col = line, col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            value = text[i:j]
            advance(j - i)
            kind = "KEYWORD" if value in KEYWORDS else "IDENT"
            tokens.append(Token(kind, value, start_line, start_col))
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("SYMBOL", sym, line, col))
                advance(len(sym))
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens
