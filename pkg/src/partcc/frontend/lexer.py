from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import CSyntaxError, UnsupportedFeature

KEYWORDS = {
    "int", "char", "short", "long", "float", "double", "void", "signed", "unsigned",
    "struct", "union", "typedef", "extern", "static", "const", "volatile", "register",
    "auto", "inline", "restrict", "if", "else", "while", "for", "do", "switch", "case",
    "default", "break", "continue", "return", "goto", "sizeof", "enum", "_Bool",
}

TOKEN_SPEC = [
    ("WS", r"[ \t\r\n\f\v]+"),
    ("COMMENT", r"//[^\n]*|/\*.*?\*/"),
    ("PP", r"\#[^\n]*"),
    ("FLOAT", r"(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?[fFlL]?|\d+[eE][+-]?\d+[fFlL]?"),
    ("INT", r"0[xX][0-9a-fA-F]+[uUlL]*|\d+[uUlL]*"),
    ("CHAR", r"'(?:\\.|[^'\\\n])+'"),
    ("STRING", r'"(?:\\.|[^"\\\n])*"'),
    ("ID", r"[A-Za-z_]\w*"),
    ("OP", r"<<=|>>=|\.\.\.|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^]=|"
           r"[-+*/%&|^!~<>=?:;,.(){}\[\]]"),
    ("BAD", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in TOKEN_SPEC), re.DOTALL)

_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34, "a": 7,
            "b": 8, "f": 12, "v": 11, "?": 63}


@dataclass
class Token:
    kind: str   # INT FLOAT CHAR ID KW OP EOF
    text: str
    start: int
    end: int

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.start})"


def char_value(text: str, pos: int) -> int:
    body = text[1:-1]
    if not body.startswith("\\"):
        if len(body) != 1:
            raise UnsupportedFeature((pos, pos + len(text)), "multi-character constant")
        return ord(body)
    esc = body[1:]
    if esc in _ESCAPES:
        return _ESCAPES[esc]
    if esc.startswith("x"):
        return int(esc[1:], 16)
    if esc.isdigit():
        return int(esc, 8)
    raise CSyntaxError(pos, ["escape sequence"], text)


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    for m in _TOKEN_RE.finditer(src):
        kind = m.lastgroup
        text = m.group()
        if kind in ("WS", "COMMENT", "PP"):
            continue
        if kind == "BAD":
            raise CSyntaxError(m.start(), ["token"], text)
        if kind == "STRING":
            raise UnsupportedFeature((m.start(), m.end()), "string literal")
        if kind == "ID" and text in KEYWORDS:
            kind = "KW"
        toks.append(Token(kind, text, m.start(), m.end()))
    toks.append(Token("EOF", "", len(src), len(src)))
    return toks


def lexeme_count(text: str) -> int:
    """Whitespace-delimited lexemes (the token-estimate proxy counts these)."""
    return len(text.split())
