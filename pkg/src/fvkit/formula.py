"""Abstract syntax for first-order terms and formulas.

Terms and formulas are immutable trees with cached hashes, so they can be
used freely as dictionary keys (the evaluators memoise on them).  The module
also hosts the purely syntactic utilities: free variables, capture-avoiding
substitution, bound-variable normalisation and a few builders that keep large
conjunctions balanced.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence


class _Node:
    """Mixin giving frozen dataclasses a cached structural hash."""

    __slots__ = ()

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self._keys))
            object.__setattr__(self, "_h", h)
        return h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return all(getattr(self, f) == getattr(other, f) for f in self._keys)

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def __repr__(self) -> str:
        from .render import render

        return f"{type(self).__name__}<{render(self)}>"


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True, eq=False, repr=False)
class Var(_Node):
    name: str
    _keys = ("name",)


@dataclass(frozen=True, eq=False, repr=False)
class Const(_Node):
    """A constant symbol.  Ring numerals ``"2"``, ``"3"``, ... denote n·1."""

    symbol: str
    _keys = ("symbol",)


@dataclass(frozen=True, eq=False, repr=False)
class Apply(_Node):
    symbol: str
    args: tuple
    _keys = ("symbol", "args")


Term = (Var, Const, Apply)

# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True, eq=False, repr=False)
class Atomic(_Node):
    """``relation`` is ``"="`` or ``"A_k"`` (the cardinality predicate A_k)."""

    relation: str
    terms: tuple
    _keys = ("relation", "terms")


@dataclass(frozen=True, eq=False, repr=False)
class Not(_Node):
    body: object
    _keys = ("body",)


@dataclass(frozen=True, eq=False, repr=False)
class And(_Node):
    left: object
    right: object
    _keys = ("left", "right")


@dataclass(frozen=True, eq=False, repr=False)
class Or(_Node):
    left: object
    right: object
    _keys = ("left", "right")


@dataclass(frozen=True, eq=False, repr=False)
class Implies(_Node):
    left: object
    right: object
    _keys = ("left", "right")


@dataclass(frozen=True, eq=False, repr=False)
class Iff(_Node):
    left: object
    right: object
    _keys = ("left", "right")


@dataclass(frozen=True, eq=False, repr=False)
class Exists(_Node):
    var: str
    body: object
    _keys = ("var", "body")


@dataclass(frozen=True, eq=False, repr=False)
class Forall(_Node):
    var: str
    body: object
    _keys = ("var", "body")


BINARY = (And, Or, Implies, Iff)
QUANTIFIERS = (Exists, Forall)


@dataclass(frozen=True)
class Signature:
    name: str
    constants: tuple
    functions: tuple
    relations: tuple
    flavor: str

    def function_arity(self, symbol: str):
        for s, a in self.functions:
            if s == symbol:
                return a
        return None


RING = Signature("ring", ("0", "1"), (("+", 2), ("*", 2), ("-", 1)), (("=", 2),), "ring")
BOOLEAN = Signature(
    "boolean", ("0", "1"), (("meet", 2), ("join", 2), ("comp", 1)), (("=", 2), ("A_k", 1)), "boolean"
)

# ---------------------------------------------------------------------------
# small constructors

ZERO = Const("0")
ONE = Const("1")
TRUE = Atomic("=", (ZERO, ZERO))
FALSE = Not(TRUE)


def var(name: str) -> Var:
    return Var(name)


def eq(s, t) -> Atomic:
    return Atomic("=", (s, t))


def atl(k: int, t) -> Atomic:
    if k < 1:
        raise ValueError("A_k needs k >= 1")
    return Atomic(f"A_{k}", (t,))


def atl_index(relation: str):
    """Return k for ``"A_k"`` and None for any other relation."""
    if relation.startswith("A_"):
        return int(relation[2:])
    return None


def add(s, t):
    return Apply("+", (s, t))


def mul(s, t):
    return Apply("*", (s, t))


def neg_term(s):
    return Apply("-", (s,))


def sub(s, t):
    return Apply("+", (s, Apply("-", (t,))))


def power(s, n: int):
    return Apply("^", (s, Const(str(n))))


def meet(s, t):
    return Apply("meet", (s, t))


def join(s, t):
    return Apply("join", (s, t))


def comp(s):
    return Apply("comp", (s,))


def _balanced(items: Sequence, op):
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return op(_balanced(items[:mid], op), _balanced(items[mid:], op))


def conj(items: Iterable, empty=TRUE):
    """Balanced conjunction; the empty conjunction is ``0 = 0``."""
    items = list(items)
    if not items:
        return empty
    return _balanced(items, And)


def disj(items: Iterable, empty=FALSE):
    """Balanced disjunction; the empty disjunction is ``~(0 = 0)``."""
    items = list(items)
    if not items:
        return empty
    return _balanced(items, Or)


def meet_all(terms: Sequence, empty=ONE):
    terms = list(terms)
    return _balanced(terms, meet) if terms else empty


def join_all(terms: Sequence, empty=ZERO):
    terms = list(terms)
    return _balanced(terms, join) if terms else empty


def exists_many(names: Sequence[str], body):
    for n in reversed(list(names)):
        body = Exists(n, body)
    return body


def forall_many(names: Sequence[str], body):
    for n in reversed(list(names)):
        body = Forall(n, body)
    return body


# ---------------------------------------------------------------------------
# traversal


def is_term(x) -> bool:
    return isinstance(x, Term)


def term_variables(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Const):
        return frozenset()
    out = frozenset()
    for a in t.args:
        out |= term_variables(a)
    return out


def free_variables(f) -> frozenset:
    """Variables with a free occurrence in a formula (or term)."""
    if isinstance(f, Term):
        return term_variables(f)
    # cached on the node itself, like the hash
    hit = f.__dict__.get("_fv") if hasattr(f, "__dict__") else None
    if hit is not None:
        return hit
    if isinstance(f, Atomic):
        out = frozenset()
        for t in f.terms:
            out |= term_variables(t)
    elif isinstance(f, Not):
        out = free_variables(f.body)
    elif isinstance(f, BINARY):
        out = free_variables(f.left) | free_variables(f.right)
    elif isinstance(f, QUANTIFIERS):
        out = free_variables(f.body) - {f.var}
    else:
        raise TypeError(f"not a formula: {f!r}")
    object.__setattr__(f, "_fv", out)
    return out


def all_variables(f) -> set:
    """Every variable name occurring in f, free or bound."""
    out = set()
    for node in walk(f):
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, QUANTIFIERS):
            out.add(node.var)
    return out


def children(node) -> tuple:
    if isinstance(node, Apply):
        return node.args
    if isinstance(node, Atomic):
        return node.terms
    if isinstance(node, Not):
        return (node.body,)
    if isinstance(node, BINARY):
        return (node.left, node.right)
    if isinstance(node, QUANTIFIERS):
        return (node.body,)
    return ()


def walk(node) -> Iterator:
    """Pre-order traversal over formula and term nodes (iterative)."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def atoms(f) -> list:
    """Atomic subformulas in left-to-right order (with repetitions)."""
    return [n for n in walk(f) if isinstance(n, Atomic)]


def is_quantifier_free(f) -> bool:
    return not any(isinstance(n, QUANTIFIERS) for n in walk(f))


def quantifier_count(f) -> int:
    return sum(1 for n in walk(f) if isinstance(n, QUANTIFIERS))


def depth(f) -> int:
    """Formula depth counting atoms as depth 1 (terms are not counted)."""
    if isinstance(f, Atomic):
        return 1
    return 1 + max(depth(c) for c in children(f))


def size(f) -> int:
    return sum(1 for _ in walk(f))


def function_symbols(f) -> set:
    return {n.symbol for n in walk(f) if isinstance(n, Apply)}


def constant_symbols(f) -> set:
    return {n.symbol for n in walk(f) if isinstance(n, Const)}


def relation_symbols(f) -> set:
    return {n.relation for n in walk(f) if isinstance(n, Atomic)}


# ---------------------------------------------------------------------------
# substitution

_PRIME = re.compile(r"'+$")


def fresh_name(base: str, taken) -> str:
    """Prime ``base`` until it avoids ``taken`` (t, t', t'', ...)."""
    name = base
    while name in taken:
        name += "'"
    return name


class NameSupply:
    """Hands out names ``prefix1, prefix2, ...`` avoiding a reserved set."""

    def __init__(self, taken=()):
        self.taken = set(taken)
        self._counters: dict = {}

    def reserve(self, names):
        self.taken.update(names)

    def __call__(self, prefix: str) -> str:
        n = self._counters.get(prefix, 0)
        while True:
            n += 1
            name = f"{prefix}{n}"
            if name not in self.taken:
                self._counters[prefix] = n
                self.taken.add(name)
                return name


def substitute_term(t, subst: Mapping):
    if isinstance(t, Var):
        return subst.get(t.name, t)
    if isinstance(t, Const):
        return t
    args = tuple(substitute_term(a, subst) for a in t.args)
    if all(a is b for a, b in zip(args, t.args)):
        return t
    return Apply(t.symbol, args)


def substitute(f, subst: Mapping):
    """Capture-avoiding simultaneous substitution of terms for free variables.

    Bound variables that would capture a variable of a substituted term are
    renamed by priming (``t`` becomes ``t'``).
    """
    subst = {k: v for k, v in subst.items() if not (isinstance(v, Var) and v.name == k)}
    if not subst:
        return f
    if isinstance(f, Term):
        return substitute_term(f, subst)
    return _subst(f, subst)


def _subst(f, subst):
    fv = free_variables(f)
    live = {k: v for k, v in subst.items() if k in fv}
    if not live:
        return f
    if isinstance(f, Atomic):
        return Atomic(f.relation, tuple(substitute_term(t, live) for t in f.terms))
    if isinstance(f, Not):
        return Not(_subst(f.body, live))
    if isinstance(f, BINARY):
        return type(f)(_subst(f.left, live), _subst(f.right, live))
    # quantifier
    incoming = set()
    for t in live.values():
        incoming |= term_variables(t)
    v = f.var
    body = f.body
    if v in incoming:
        taken = incoming | free_variables(body) | set(live)
        new = fresh_name(v, taken)
        body = _subst(body, {v: Var(new)})
        v = new
    return type(f)(v, _subst(body, live))


def rename_free(f, mapping: Mapping[str, str]):
    return substitute(f, {k: Var(v) for k, v in mapping.items()})


def normalize_bound(f, prefix: str = "v"):
    """Rename bound variables to v0, v1, ... in pre-order traversal order.

    Names already used by free variables are skipped so the result is
    capture-free and every binder gets a distinct name.
    """
    free = free_variables(f)
    counter = itertools.count()

    def next_name():
        while True:
            name = f"{prefix}{next(counter)}"
            if name not in free:
                return name

    def go(g, env):
        if isinstance(g, Atomic):
            return Atomic(g.relation, tuple(substitute_term(t, env) for t in g.terms))
        if isinstance(g, Not):
            return Not(go(g.body, env))
        if isinstance(g, BINARY):
            left = go(g.left, env)
            return type(g)(left, go(g.right, env))
        new = next_name()
        inner = dict(env)
        inner[g.var] = Var(new)
        return type(g)(new, go(g.body, inner))

    return go(f, {})


def alpha_equal(f, g) -> bool:
    return normalize_bound(f) == normalize_bound(g)


def strip_double_negation(f):
    while isinstance(f, Not) and isinstance(f.body, Not):
        f = f.body.body
    return f


def map_atoms(f, fn):
    """Rebuild f with every atomic subformula replaced by fn(atom)."""
    if isinstance(f, Atomic):
        return fn(f)
    if isinstance(f, Not):
        return Not(map_atoms(f.body, fn))
    if isinstance(f, BINARY):
        return type(f)(map_atoms(f.left, fn), map_atoms(f.right, fn))
    return type(f)(f.var, map_atoms(f.body, fn))


def uniquify_bound(f):
    """Rename (by priming) binders that repeat or clash with free variables.

    Unlike :func:`normalize_bound` this keeps the original names wherever
    they are already unambiguous.
    """
    used = set(free_variables(f))

    def go(g, env):
        if isinstance(g, Atomic):
            return Atomic(g.relation, tuple(substitute_term(t, env) for t in g.terms)) if env else g
        if isinstance(g, Not):
            return Not(go(g.body, env))
        if isinstance(g, BINARY):
            left = go(g.left, env)
            return type(g)(left, go(g.right, env))
        v = g.var
        inner = env
        if v in used:
            new = fresh_name(v, used)
            inner = dict(env)
            inner[v] = Var(new)
            v = new
        elif v in env:
            inner = dict(env)
            del inner[v]
        used.add(v)
        return type(g)(v, go(g.body, inner))

    return go(f, {})
