"""Recursive-descent parser for the ASCII formula syntax.

Grammar (lowest precedence first)::

    formula := iff
    iff     := imp ('<->' imp)*                 left associative
    imp     := or ('->' imp)?                   right associative
    or      := and ('|' and)*
    and     := unary ('&' unary)*
    unary   := '~' unary | ('E'|'A') name '.' formula | '(' formula ')' | atom
    atom    := 'Atl' '[' int ']' '(' term ')' | term '=' term
    term    := mul (('+'|'-') mul)*             a - b is read as a + (-b)
    mul     := neg ('*' neg)*
    neg     := '-' neg | pow
    pow     := prim ('^' int)?
    prim    := name | int | name '(' term (',' term)* ')' | '(' term ')'

A parenthesis at formula level may open either a subformula or a term; the
parser tries the formula reading first and falls back to the term reading.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formula import (
    BOOLEAN,
    RING,
    And,
    Apply,
    Atomic,
    Const,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    Signature,
    Var,
)


class ParseError(ValueError):
    """Syntax or signature error; ``position`` is a character offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        pointer = ""
        if text:
            pointer = f"\n  {text}\n  {' ' * position}^"
        super().__init__(f"{message} at position {position}{pointer}")


@dataclass
class _Tok:
    kind: str  # name, int, op, quant, end
    value: str
    pos: int


_TOKEN = re.compile(
    r"\s*(?:(?P<arrow><->|->)|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>[()\[\],.=~&|+\-*^]))"
)

_BOOL_FUNCS = {"meet": 2, "join": 2, "comp": 1}


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        value = m.group(m.lastgroup)
        kind = m.lastgroup
        if kind == "arrow":
            kind = "op"
        elif kind == "name" and value in ("E", "A"):
            kind = "quant"
        toks.append(_Tok(kind, value, start))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.text = text
        self.sig = sig
        self.toks = _tokenize(text)
        self.i = 0

    # -- helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.pos, self.text)

    def accept(self, value: str) -> bool:
        if self.tok.kind == "op" and self.tok.value == value:
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.accept(value):
            got = self.tok.value or "end of input"
            raise self.error(f"expected {value!r}, got {got!r}")

    # -- formulas
    def parse(self):
        f = self.formula()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.value!r}")
        return f

    def formula(self):
        left = self.implication()
        while self.accept("<->"):
            left = Iff(left, self.implication())
        return left

    def implication(self):
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.accept("|"):
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.accept("&"):
            left = And(left, self.unary())
        return left

    def unary(self):
        tok = self.tok
        if self.accept("~"):
            return Not(self.unary())
        if tok.kind == "quant":
            self.i += 1
            name = self.tok
            if name.kind != "name":
                raise self.error("expected a variable after quantifier")
            self._check_variable(name)
            self.i += 1
            self.expect(".")
            body = self.formula()
            return (Exists if tok.value == "E" else Forall)(name.value, body)
        if tok.kind == "op" and tok.value == "(":
            saved = self.i
            try:
                self.i += 1
                f = self.formula()
                self.expect(")")
                if self.tok.kind == "op" and self.tok.value in ("=", "+", "-", "*", "^"):
                    raise self.error("term continues")
                return f
            except ParseError:
                self.i = saved
        return self.atom()

    def atom(self):
        tok = self.tok
        if tok.kind == "name" and tok.value == "Atl":
            if self.sig.flavor == "ring":
                raise self.error("unknown symbol 'Atl' in ring signature")
            self.i += 1
            self.expect("[")
            k = self.tok
            if k.kind != "int" or int(k.value) < 1:
                raise self.error("expected a positive index in Atl[k]")
            self.i += 1
            self.expect("]")
            self.expect("(")
            t = self.term()
            self.expect(")")
            return Atomic(f"A_{int(k.value)}", (t,))
        left = self.term()
        if not self.accept("="):
            raise self.error("expected '=' in atomic formula")
        right = self.term()
        return Atomic("=", (left, right))

    # -- terms
    def term(self):
        left = self.product()
        while True:
            tok = self.tok
            if self.accept("+"):
                self._check_ring(tok)
                left = Apply("+", (left, self.product()))
            elif self.accept("-"):
                self._check_ring(tok)
                left = Apply("+", (left, Apply("-", (self.product(),))))
            else:
                return left

    def product(self):
        left = self.negation()
        while True:
            tok = self.tok
            if not self.accept("*"):
                return left
            self._check_ring(tok)
            left = Apply("*", (left, self.negation()))

    def negation(self):
        tok = self.tok
        if self.accept("-"):
            self._check_ring(tok)
            return Apply("-", (self.negation(),))
        return self.power()

    def power(self):
        base = self.primary()
        tok = self.tok
        if self.accept("^"):
            self._check_ring(tok)
            e = self.tok
            if e.kind != "int":
                raise self.error("expected an integer exponent")
            self.i += 1
            return Apply("^", (base, Const(str(int(e.value)))))
        return base

    def primary(self):
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            value = str(int(tok.value))
            if value not in ("0", "1") and self.sig.flavor != "ring":
                raise self.error(f"unknown constant {value!r} in Boolean signature", tok)
            return Const(value)
        if tok.kind == "name":
            self.i += 1
            if tok.value in _BOOL_FUNCS:
                if self.sig.flavor == "ring":
                    raise self.error(f"unknown symbol {tok.value!r} in ring signature", tok)
                self.expect("(")
                args = [self.term()]
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
                if len(args) != _BOOL_FUNCS[tok.value]:
                    raise self.error(
                        f"arity mismatch: {tok.value} takes {_BOOL_FUNCS[tok.value]} argument(s)", tok
                    )
                return Apply(tok.value, tuple(args))
            if self.tok.kind == "op" and self.tok.value == "(":
                raise self.error(f"unknown function symbol {tok.value!r}", tok)
            self._check_variable(tok)
            return Var(tok.value)
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        got = tok.value or "end of input"
        raise self.error(f"expected a term, got {got!r}")

    def _check_ring(self, tok):
        if self.sig.flavor != "ring":
            raise self.error(f"unknown symbol {tok.value!r} in Boolean signature", tok)

    def _check_variable(self, tok):
        if tok.value in ("Atl", "E", "A") or tok.value in _BOOL_FUNCS or not tok.value[0].islower():
            raise self.error(f"invalid variable name {tok.value!r}", tok)


def parse_formula(text: str, sig: Signature = RING):
    """Parse ``text`` against a signature (``RING`` or ``BOOLEAN``)."""
    if isinstance(sig, str):
        sig = {"ring": RING, "boolean": BOOLEAN, "atomcount": BOOLEAN}[sig]
    return _Parser(text, sig).parse()


def parse_term(text: str, sig: Signature = RING):
    p = _Parser(text, sig)
    t = p.term()
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.tok.value!r}")
    return t


def parse_boolean(text: str):
    return parse_formula(text, BOOLEAN)
