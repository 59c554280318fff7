"""
Tokenizer for behavior and manifest files.

Built with ``ply.lex``. Keywords are reserved; comments run from
``--`` to the end of the line. Every token carries a 1-based source
span so parse errors can point at the offending text.
"""

from dataclasses import dataclass
from typing import List, Tuple

import ply.lex as lex

RESERVED = frozenset((
    "behavior", "attributes", "init", "service", "callable", "seq", "conc", "both",
    "locals", "states", "initial", "exclusions", "trans", "when", "from", "pre",
    "post", "out", "ret", "havoc", "true", "false", "and", "or", "not", "self",
    "int", "bool", "enum", "id", "pending", "manifest", "load", "object", "pool",
    "select", "inject", "at", "scheduler", "seed", "policy", "bound", "steps",
    "invariant", "terminal",
))

tokens = (
    "NAME", "NUMBER", "STRING", "KEYWORD",
    "ARROW", "IMPLIES", "LE", "GE", "NE", "DOTDOT",
    "EQ", "LT", "GT", "PLUS", "MINUS", "STAR",
    "LBRACE", "RBRACE", "LPAREN", "RPAREN", "LBRACKET", "RBRACKET",
    "COMMA", "COLON", "SEMI", "DOT", "PRIME", "ATSIGN",
)


def t_COMMENT(t):
    r'--[^\n]*'
    pass


def t_newline(t):
    r'\n+'
    t.lexer.lineno += len(t.value)


def t_NAME(t):
    r'[A-Za-z_][A-Za-z0-9_]*'
    if t.value in RESERVED:
        t.type = "KEYWORD"
    return t


def t_NUMBER(t):
    r'\d+'
    return t


def t_STRING(t):
    r'"[^"\n]*"'
    return t


t_ARROW = r'->'
t_IMPLIES = r'=>'
t_LE = r'<='
t_GE = r'>='
t_NE = r'!='
t_DOTDOT = r'\.\.'
t_EQ = r'='
t_LT = r'<'
t_GT = r'>'
t_PLUS = r'\+'
t_MINUS = r'-'
t_STAR = r'\*'
t_LBRACE = r'\{'
t_RBRACE = r'\}'
t_LPAREN = r'\('
t_RPAREN = r'\)'
t_LBRACKET = r'\['
t_RBRACKET = r'\]'
t_COMMA = r','
t_COLON = r':'
t_SEMI = r';'
t_DOT = r'\.'
t_PRIME = r"'"
t_ATSIGN = r'@'

t_ignore = ' \t\r'


def t_error(t):
    t.lexer.bad.append((t.lexpos, t.value[0]))
    t.lexer.skip(1)


_LEXER = lex.lex()


@dataclass(frozen=True)
class SourceSpan:
    """
    Location of a piece of source text (1-based, end inclusive).

    Attributes:
        file: File name, or ``<input>``
        line: Start line
        col: Start column
        end_line: End line
        end_col: End column
    """
    file: str
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True)
class ParseError:
    """
    One syntax or resolution error.

    Attributes:
        span: Where the error was detected
        expected: Description of what would have been accepted
        found: Offending token text (or ``end of input``)
    """
    span: SourceSpan
    expected: str
    found: str

    def __str__(self) -> str:
        return f"{self.span}: expected {self.expected}, found {self.found}"


@dataclass(frozen=True)
class Token:
    """
    Lexed token.

    Attributes:
        kind: ply token type (``NAME``, ``KEYWORD``, ``NUMBER``, ``EOF``, ...)
        text: Source text of the token
        value: Converted value (int for numbers, unquoted text for strings)
        span: Source location
    """
    kind: str
    text: str
    value: object
    span: SourceSpan


END_OF_INPUT = "end of input"


def _position(text: str, offset: int) -> Tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _span(text: str, file: str, offset: int, length: int) -> SourceSpan:
    line, col = _position(text, offset)
    return SourceSpan(file, line, col, line, col + max(length, 1) - 1)


def tokenize(text: str, file: str = "<input>") -> Tuple[List[Token], List[ParseError]]:
    """
    Split source text into tokens.

    Args:
        text: Source text
        file: Name used in spans

    Returns:
        (tokens ending with an ``EOF`` token, errors for illegal characters)
    """
    lexer = _LEXER.clone()
    lexer.bad = []
    lexer.lineno = 1
    lexer.input(text)

    result: List[Token] = []
    for tok in iter(lexer.token, None):
        raw = tok.value
        span = _span(text, file, tok.lexpos, len(raw))
        if tok.type == "NUMBER":
            value = int(raw)
        elif tok.type == "STRING":
            value = raw[1:-1]
        else:
            value = raw
        result.append(Token(tok.type, raw, value, span))

    errors = [ParseError(_span(text, file, offset, 1), "a token", repr(char))
              for offset, char in lexer.bad]
    result.append(Token("EOF", "", None, _span(text, file, len(text), 1)))
    return result, errors
