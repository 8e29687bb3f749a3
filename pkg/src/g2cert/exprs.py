"""Parser for polynomial expressions in catalog files and tests.

Grammar (whitespace insensitive):

  expr    := term (('+' | '-') term)*
  term    := unary (('*' | '/') unary)*
  unary   := '-' unary | primary
  primary := atom ('^' INT)?
  atom    := INT | NAME | '(' expr ')'

Division is only allowed by subexpressions that evaluate to a nonzero
rational constant, so "2/3*e15" and "-a/2" parse while "1/x" is rejected.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DslSyntaxError
from .poly import Polynomial

_TOKEN_CHARS = set("+-*/^(),")


def tokenize(text: str):
    """Yield (kind, value, position) triples; kinds: int, name, punct, end."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if ch in _TOKEN_CHARS:
            tokens.append(("punct", ch, i))
            i += 1
            continue
        raise DslSyntaxError(text, i, "a number, name, or operator")
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, name_map=None):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.name_map = name_map or (lambda name: Polynomial.var(name))

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_punct(self, ch):
        kind, value, pos = self.peek()
        if kind != "punct" or value != ch:
            raise DslSyntaxError(self.text, pos, f"{ch!r}")
        return self.advance()

    def parse_expr(self) -> Polynomial:
        value = self.parse_term()
        while True:
            kind, tok, _ = self.peek()
            if kind == "punct" and tok in "+-":
                self.advance()
                rhs = self.parse_term()
                value = value + rhs if tok == "+" else value - rhs
            else:
                return value

    def parse_term(self) -> Polynomial:
        value = self.parse_unary()
        while True:
            kind, tok, pos = self.peek()
            if kind == "punct" and tok in "*/":
                self.advance()
                rhs = self.parse_unary()
                if tok == "*":
                    value = value * rhs
                else:
                    if not rhs.is_constant() or rhs.is_zero():
                        raise DslSyntaxError(self.text, pos, "division by a nonzero rational constant")
                    value = value * (1 / rhs.constant_value())
            else:
                return value

    def parse_unary(self) -> Polynomial:
        kind, tok, _ = self.peek()
        if kind == "punct" and tok == "-":
            self.advance()
            return -self.parse_unary()
        return self.parse_primary()

    def parse_primary(self) -> Polynomial:
        value = self.parse_atom()
        kind, tok, _ = self.peek()
        if kind == "punct" and tok == "^":
            self.advance()
            kind, tok, pos = self.peek()
            if kind != "int":
                raise DslSyntaxError(self.text, pos, "an integer exponent")
            self.advance()
            value = value ** int(tok)
        return value

    def parse_atom(self) -> Polynomial:
        kind, tok, pos = self.advance()
        if kind == "int":
            return Polynomial.const(Fraction(int(tok)))
        if kind == "name":
            return self.name_map(tok)
        if kind == "punct" and tok == "(":
            value = self.parse_expr()
            self.expect_punct(")")
            return value
        raise DslSyntaxError(self.text, pos, "a number, name, or '('")


def parse_polynomial(text: str, name_map=None) -> Polynomial:
    """Parse an expression into a Polynomial.

    `name_map` may translate bare identifiers (e.g. family parameters in
    structure equations get the fam_ prefix).
    """
    parser = _Parser(text, name_map=name_map)
    value = parser.parse_expr()
    kind, _, pos = parser.peek()
    if kind != "end":
        raise DslSyntaxError(text, pos, "end of expression")
    return value
