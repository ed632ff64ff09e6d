from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORD = "keyword"
IDENTIFIER = "identifier"
INTEGER = "integer"
STRING = "string"
OPERATOR = "operator"
PUNCTUATION = "punctuation"
NEWLINE = "newline"
INDENT = "indent"
DEDENT = "dedent"

KEYWORDS = frozenset({
    "def", "return", "if", "elif", "else", "while", "for", "in", "range",
    "pass", "and", "or", "not", "True", "False", "None", "print", "input",
})

# longest first so that "//" wins over "/" and "<=" over "<"
OPERATORS = ("//", "==", "!=", "<=", ">=", "+=", "-=", "*=",
             "+", "-", "*", "%", "<", ">", "=")
PUNCTUATIONS = ("(", ")", ",", ":", ".")

INT_MAX = 2**63 - 1

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ ]+)
  | (?P<comment>\#.*)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*(?:\.[A-Za-z_][A-Za-z_0-9]*)?)
  | (?P<int>[0-9]+)
  | (?P<str>"[^"\n]*"|'[^'\n]*')
  | (?P<op>//|==|!=|<=|>=|\+=|-=|\*=|[+\-*%<>=])
  | (?P<punct>[(),:.])
    """,
    re.VERBOSE,
)


class LexError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    line: int

    @property
    def is_layout(self) -> bool:
        return self.kind in (NEWLINE, INDENT, DEDENT)


def tokenize(source: str) -> list[Token]:
    """Split MiniPy source into tokens, turning indentation into INDENT/DEDENT.

    Blank and comment-only lines are skipped. Each logical line ends with a
    NEWLINE token even when the source lacks a trailing line feed.
    """
    tokens: list[Token] = []
    indents = [0]
    for lineno, raw in enumerate(source.split("\n"), start=1):
        if "\t" in raw:
            raise LexError(lineno, "tab character (use 4 spaces)")
        if "\r" in raw:
            raise LexError(lineno, "carriage return (use LF line endings)")
        stripped = raw.lstrip(" ")
        if not stripped or stripped.startswith("#"):
            continue
        width = len(raw) - len(stripped)
        if width > indents[-1]:
            if len(tokens) == 0 or tokens[-1].kind != NEWLINE or not _opens_block(tokens):
                raise LexError(lineno, "unexpected indent")
            indents.append(width)
            tokens.append(Token(INDENT, "", lineno))
        elif width < indents[-1]:
            while width < indents[-1]:
                indents.pop()
                tokens.append(Token(DEDENT, "", lineno))
            if width != indents[-1]:
                raise LexError(lineno, "inconsistent indentation")
        _lex_line(stripped, lineno, tokens)
        tokens.append(Token(NEWLINE, "\n", lineno))
    last = tokens[-1].line if tokens else 1
    for _ in indents[1:]:
        tokens.append(Token(DEDENT, "", last))
    return tokens


def _opens_block(tokens: list[Token]) -> bool:
    # token before the trailing NEWLINE must be the ':' of a compound header
    return len(tokens) >= 2 and tokens[-2].lexeme == ":" and tokens[-2].kind == PUNCTUATION


def _lex_line(text: str, lineno: int, out: list[Token]) -> None:
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LexError(lineno, f"illegal character {text[pos]!r}")
        kind = m.lastgroup
        lexeme = m.group()
        pos = m.end()
        if kind == "ws" or kind == "comment":
            continue
        if kind == "name":
            if "." in lexeme:
                head = lexeme.split(".", 1)[0]
                if head in KEYWORDS:
                    raise LexError(lineno, f"keyword {head!r} used as namespace")
                out.append(Token(IDENTIFIER, lexeme, lineno))
            elif lexeme in KEYWORDS:
                out.append(Token(KEYWORD, lexeme, lineno))
            else:
                out.append(Token(IDENTIFIER, lexeme, lineno))
        elif kind == "int":
            if int(lexeme) > INT_MAX:
                raise LexError(lineno, f"integer literal {lexeme} out of 64-bit range")
            out.append(Token(INTEGER, lexeme, lineno))
        elif kind == "str":
            out.append(Token(STRING, lexeme, lineno))
        elif kind == "op":
            out.append(Token(OPERATOR, lexeme, lineno))
        else:
            out.append(Token(PUNCTUATION, lexeme, lineno))
