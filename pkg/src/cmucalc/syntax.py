"""Concrete ASCII syntax: parser and minimal-parenthesis printer.

Grammar (tightest binding first: ``~ [] <>``, then ``/\\``, ``\\/``, then
right-associative ``->``; a binder's scope extends as far right as possible)::

    phi ::= top | bot | IDENT | ~ phi | phi /\\ phi | phi \\/ phi | phi -> phi
          | [] phi | <> phi | mu IDENT . phi | nu IDENT . phi | ( phi )

An identifier is a variable when an enclosing binder binds it, otherwise a
proposition.  Identifiers may carry trailing primes (``X'``) so that
alpha-renamed formulas print and parse back.
"""
from __future__ import annotations

import re

from .formula import (
    And,
    Bot,
    Box,
    Dia,
    Fixpoint,
    Formula,
    FormulaError,
    Imp,
    Neg,
    Or,
    PositivityError,
    Prop,
    Top,
    Var,
    binder,
    BOT,
    TOP,
)

KEYWORDS = {"top", "bot", "mu", "nu"}

_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z][A-Za-z0-9_]*'*)|(?P<op>/\\|\\/|->|\[\]|<>|[~().]))"
)


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start("ident") if m.group("ident") else m.start("op")
        if m.group("ident"):
            word = m.group("ident")
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append((kind, word, start))
        else:
            tokens.append(("op", m.group("op"), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.bound: list[str] = []

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "eof":
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek()[1] == "->":
            self.take()
            return Imp(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek()[1] == "\\/":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek()[1] == "/\\":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "op" and val in ("~", "[]", "<>"):
            self.take()
            arg = self.unary()
            return {"~": Neg, "[]": Box, "<>": Dia}[val](arg)
        return self.primary()

    def primary(self) -> Formula:
        kind, val, pos = self.take()
        if kind == "kw" and val == "top":
            return TOP
        if kind == "kw" and val == "bot":
            return BOT
        if kind == "ident":
            return Var(val) if val in self.bound else Prop(val)
        if kind == "op" and val == "(":
            inner = self.formula()
            self.expect(")")
            return inner
        if kind == "kw" and val in ("mu", "nu"):
            vkind, var, vpos = self.take()
            if vkind != "ident":
                raise ParseError(f"expected variable after {val!r}", vpos)
            self.expect(".")
            self.bound.append(var)
            try:
                body = self.formula()
            finally:
                self.bound.pop()
            try:
                return binder(val, var, body)
            except PositivityError as exc:
                raise PositivityError(f"{exc} (binder at position {pos})") from None
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str) -> Formula:
    """Parse a formula; raises :class:`ParseError` or :class:`PositivityError`."""
    p = _Parser(text)
    f = p.formula()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {val!r}", pos)
    return f


# Precedence levels used by the printer.
_IMP, _OR, _AND, _UNARY = 1, 2, 3, 4


def to_text(f: Formula) -> str:
    """Render ``f`` with the fewest parentheses that still parse back to ``f``."""
    return _show(f, 0, True)


def _show(f: Formula, prec: int, tail: bool) -> str:
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, (Prop, Var)):
        return f.name
    if isinstance(f, Neg):
        return "~" + _show(f.arg, _UNARY, tail)
    if isinstance(f, Box):
        return "[] " + _show(f.arg, _UNARY, tail)
    if isinstance(f, Dia):
        return "<> " + _show(f.arg, _UNARY, tail)
    if isinstance(f, Fixpoint):
        if not tail:
            return "(" + _show(f, 0, True) + ")"
        return f"{f.kind} {f.var}. {_show(f.body, 0, True)}"
    if isinstance(f, Imp):
        level, lp, rp, op = _IMP, _OR, _IMP, "->"
    elif isinstance(f, Or):
        level, lp, rp, op = _OR, _OR, _AND, "\\/"
    elif isinstance(f, And):
        level, lp, rp, op = _AND, _AND, _UNARY, "/\\"
    else:
        raise TypeError(f"not a formula: {f!r}")
    if prec > level:
        return "(" + _show(f, 0, True) + ")"
    return f"{_show(f.left, lp, False)} {op} {_show(f.right, rp, tail)}"
