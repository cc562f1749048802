"""Concrete ASCII syntax for terms and formulas.

The output always reparses to a structurally identical tree: binary
connectives are parenthesised whenever precedence or associativity would
otherwise change the parse, quantifier bodies that are binary get their own
parentheses, and negations always wrap their operand.
"""

from __future__ import annotations

from .formula import (
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
    Var,
    atl_index,
)

# term precedence levels
_ADD, _MUL, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


def _term_level(t) -> int:
    if isinstance(t, (Var, Const)):
        return _ATOM
    s = t.symbol
    if s == "+":
        return _ADD
    if s == "*":
        return _MUL
    if s == "-":
        return _UNARY
    if s == "^":
        return _POW
    return _ATOM  # meet/join/comp use call syntax


def render_term(t, need: int = 0) -> str:
    text = _render_term(t)
    if _term_level(t) < need:
        return f"({text})"
    return text


def _render_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.symbol
    s, args = t.symbol, t.args
    if s == "+":
        left = render_term(args[0], _ADD)
        right = args[1]
        if isinstance(right, Apply) and right.symbol == "-":
            return f"{left} - {render_term(right.args[0], _MUL)}"
        return f"{left} + {render_term(right, _MUL)}"
    if s == "*":
        return f"{render_term(args[0], _MUL)}*{render_term(args[1], _UNARY)}"
    if s == "-":
        return f"-{render_term(args[0], _UNARY)}"
    if s == "^":
        return f"{render_term(args[0], _ATOM)}^{args[1].symbol}"
    inner = ", ".join(_render_term(a) for a in args)
    return f"{s}({inner})"


# formula precedence levels
_IFF, _IMP, _OR, _AND, _UNIT = 1, 2, 3, 4, 5
_BIN = {Iff: (_IFF, " <-> "), Implies: (_IMP, " -> "), Or: (_OR, " | "), And: (_AND, " & ")}


def _formula_level(f) -> int:
    if isinstance(f, (Exists, Forall)):
        return 0  # a quantifier swallows everything to its right
    entry = _BIN.get(type(f))
    return entry[0] if entry else _UNIT


def render_formula(f) -> str:
    return _render(f)


def _wrap(f, ok: bool) -> str:
    text = _render(f)
    return text if ok else f"({text})"


def _render(f) -> str:
    if isinstance(f, Atomic):
        k = atl_index(f.relation)
        if k is not None:
            return f"Atl[{k}]({render_term(f.terms[0])})"
        return f"{render_term(f.terms[0])} {f.relation} {render_term(f.terms[1])}"
    if isinstance(f, Not):
        if isinstance(f.body, Not):
            return "~" + _render(f.body)
        return f"~({_render(f.body)})"
    if isinstance(f, (Exists, Forall)):
        q = "E" if isinstance(f, Exists) else "A"
        body = f.body
        text = _render(body)
        if type(body) in _BIN:
            text = f"({text})"
        return f"{q} {f.var}. {text}"
    level, op = _BIN[type(f)]
    left_level = _formula_level(f.left)
    right_level = _formula_level(f.right)
    if isinstance(f, Implies):
        # right associative
        left_ok = left_level > level
        right_ok = right_level >= level
    else:
        left_ok = left_level >= level
        right_ok = right_level > level
    return _wrap(f.left, left_ok) + op + _wrap(f.right, right_ok)


def render(x) -> str:
    """Render a term, a polynomial or a formula."""
    if isinstance(x, (Var, Const, Apply)):
        return render_term(x)
    from .polynomial import Polynomial, polynomial_to_term

    if isinstance(x, Polynomial):
        return render_term(polynomial_to_term(x))
    return render_formula(x)
