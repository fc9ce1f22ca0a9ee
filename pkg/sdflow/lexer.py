# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Tokenizer for `.sdm` model files.
"""

from dataclasses import dataclass, field
import enum
import re
from typing import Tuple

from .diagnostics import Diagnostic, Position
from . import util


class TokenKind(enum.Enum):
    keyword = "kw"
    ident = "ident"
    number = "num"
    string = "string"
    lbrace = "lbrace"
    rbrace = "rbrace"
    lbracket = "lbracket"
    rbracket = "rbracket"
    lparen = "lparen"
    rparen = "rparen"
    comma = "comma"
    colon = "colon"
    semi = "semi"
    eq = "eq"
    plus = "plus"
    minus = "minus"
    star = "star"
    slash = "slash"
    caret = "caret"
    lt = "lt"
    le = "le"
    gt = "gt"
    ge = "ge"
    eqeq = "eqeq"
    ne = "ne"
    eof = "eof"


KEYWORDS = frozenset(
    [
        "dimension",
        "parameter",
        "lookup",
        "aux",
        "flow",
        "stock",
        "scenario",
        "equilibrium",
        "initial",
        "inflows",
        "outflows",
        "nonneg",
        "upper",
        "units",
        "if",
        "then",
        "else",
    ]
)


PUNCTUATION = {
    "{": TokenKind.lbrace,
    "}": TokenKind.rbrace,
    "[": TokenKind.lbracket,
    "]": TokenKind.rbracket,
    "(": TokenKind.lparen,
    ")": TokenKind.rparen,
    ",": TokenKind.comma,
    ":": TokenKind.colon,
    ";": TokenKind.semi,
    "=": TokenKind.eq,
    "+": TokenKind.plus,
    "-": TokenKind.minus,
    "*": TokenKind.star,
    "/": TokenKind.slash,
    "^": TokenKind.caret,
    "<": TokenKind.lt,
    "<=": TokenKind.le,
    ">": TokenKind.gt,
    ">=": TokenKind.ge,
    "==": TokenKind.eqeq,
    "!=": TokenKind.ne,
}


_TOKEN_RE = re.compile(
    r"""
    (?P<newline>\n)
    |(?P<space>[ \t\r]+)
    |(?P<comment>//[^\n]*)
    |(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    |(?P<string>"[^"\n]*")
    |(?P<punct><=|>=|==|!=|[{}\[\](),:;=+\-*/^<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int
    value: object = None
    # Whole-line comments directly above this token.
    comments: Tuple[str, ...] = field(default=(), compare=False)

    def is_keyword(self, *words):
        return self.kind is TokenKind.keyword and self.text in words

    def __str__(self):
        if self.kind in (TokenKind.keyword, TokenKind.ident):
            return f"{self.kind.value} {self.text}"
        if self.kind is TokenKind.number:
            return f"{self.kind.value} {self.value!r}"
        return self.kind.value


def _describe(char):
    if char == '"':
        return "unterminated string literal"
    return f"illegal character {char!r}"


@util.keep_value
def tokenize(text, source="<string>"):
    """
    Split `text` into tokens.

    Illegal characters are reported as `LexError` diagnostics and skipped, so
    a single pass reports every one of them.  The list of tokens, always
    ending with an `eof` token, is available on `.value`.
    """
    tokens = []
    pending_comments = []
    line = 1
    line_start = 0
    line_has_code = False
    pos = 0

    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if match is None:
            yield Diagnostic.error(
                "LexError", _describe(text[pos]), Position(source, line, column)
            )
            pos += 1
            continue

        group = match.lastgroup
        lexeme = match.group()
        pos = match.end()

        if group == "newline":
            line += 1
            line_start = pos
            line_has_code = False
            continue
        if group == "space":
            continue
        if group == "comment":
            if not line_has_code:
                pending_comments.append(lexeme[2:].strip())
            continue

        line_has_code = True
        if group == "number":
            kind, value = TokenKind.number, float(lexeme)
        elif group == "ident":
            kind = TokenKind.keyword if lexeme in KEYWORDS else TokenKind.ident
            value = None
        elif group == "string":
            kind, value = TokenKind.string, lexeme[1:-1]
        else:
            kind, value = PUNCTUATION[lexeme], None

        tokens.append(
            Token(kind, lexeme, line, column, value, tuple(pending_comments))
        )
        pending_comments = []

    tokens.append(
        Token(
            TokenKind.eof,
            "",
            line,
            pos - line_start + 1,
            None,
            tuple(pending_comments),
        )
    )
    return tokens
