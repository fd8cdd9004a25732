"""Recursive-descent parser for the expression text format.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := number | var | ident | ident '(' expr (',' expr)* ')'
            | '(' expr ')' | '-' base
"""
from __future__ import annotations

import math
import re

from .nodes import BUILTIN_ARITY, Add, Const, Div, Expr, Fn, Mul, Neg, Param, Pow, Sub, Var

NAMED_CONSTANTS = {"pi": math.pi}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    """Syntax or name error; ``offset`` is the byte offset into the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


def _byte_offset(source: str, char_pos: int) -> int:
    return len(source[:char_pos].encode("utf-8"))


class _Parser:
    def __init__(self, source: str, variables: tuple[str, ...]):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, _byte_offset(self.source, tok[2]))

    def expect(self, text):
        tok = self.peek()
        if tok[1] != text or tok[0] == "end":
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise self.error(f"expected {text!r}, found {found}")
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.term()
            left = Add((left, right)) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.factor()
            left = Mul((left, right)) if op == "*" else Div(left, right)
        return left

    def factor(self) -> Expr:
        b = self.base()
        if self.peek()[1] == "^":
            self.take()
            return Pow(b, self.factor())
        return b

    def base(self) -> Expr:
        tok = self.peek()
        kind, text, _ = tok
        if kind == "num":
            self.take()
            value = float(text)
            if not math.isfinite(value):
                raise self.error(f"number {text!r} is not finite", tok)
            return Const(value)
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.base())
        if kind == "op" and text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if kind == "ident":
            self.take()
            if self.peek()[1] == "(":
                return self.call(tok)
            if text in BUILTIN_ARITY:
                raise self.error(f"function {text!r} needs arguments", tok)
            if text in self.variables:
                return Var(text)
            if text in NAMED_CONSTANTS:
                return Const(NAMED_CONSTANTS[text])
            return Param(text)
        if kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {text!r}")

    def call(self, name_tok) -> Expr:
        name = name_tok[1]
        if name not in BUILTIN_ARITY:
            raise self.error(f"unknown function {name!r}", name_tok)
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        arity = BUILTIN_ARITY[name]
        if len(args) != arity:
            raise self.error(f"{name} takes {arity} argument(s), got {len(args)}", name_tok)
        return Fn(name, tuple(args))


def parse(source: str, variables: tuple[str, ...] = ("x", "t")) -> Expr:
    """Parse expression text into an :class:`Expr`.

    Identifiers listed in ``variables`` become :class:`Var` nodes, ``pi`` is
    the usual constant, and every other bare identifier is a named parameter.
    """
    return _Parser(source, tuple(variables)).parse()
