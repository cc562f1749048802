"""Seeded random formula corpora for the differential test harness.

Every generator takes a ``random.Random`` so that one 64-bit seed fixes a
whole corpus.  Ring formulas use the free variables x, y and the bound
variables s, t, u; Boolean-algebra formulas use y1..y3.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .formula import (
    ONE,
    ZERO,
    And,
    Const,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    Var,
    add,
    atl,
    comp,
    depth,
    eq,
    free_variables,
    join,
    meet,
    mul,
    neg_term,
    quantifier_count,
    walk,
)

RING_FREE = ("x", "y")
RING_BOUND = ("s", "t", "u")


@dataclass(frozen=True)
class RingShape:
    """Size limits for random ring formulas."""

    max_depth: int = 4
    max_quantifiers: int = 2
    arity: int = 2
    scope_atoms: int = 2  # atom occurrences allowed under one quantifier
    max_atoms: int = 4


def random_ring_term(rng: random.Random, names, depth: int = 2):
    """A small ring term over ``names`` and the constants 0, 1, 2."""
    if depth <= 0 or rng.random() < 0.4:
        r = rng.random()
        if r < 0.75 and names:
            return Var(rng.choice(names))
        return rng.choice([ZERO, ONE, Const("2")])
    op = rng.choice(["*", "*", "+", "-"])
    if op == "-":
        return neg_term(random_ring_term(rng, names, depth - 1))
    a = random_ring_term(rng, names, depth - 1)
    b = random_ring_term(rng, names, depth - 1)
    return mul(a, b) if op == "*" else add(a, b)


def random_ring_atom(rng: random.Random, names, prefer=None):
    """An equation s = t; ``prefer`` (a bound variable) is made to occur when given."""
    lhs = random_ring_term(rng, names, 2)
    rhs = random_ring_term(rng, names, 1)
    if prefer is not None and prefer not in _term_names(lhs) | _term_names(rhs):
        lhs = mul(Var(prefer), lhs) if rng.random() < 0.6 else add(Var(prefer), lhs)
    return eq(lhs, rhs)


def _term_names(t) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Const):
        return set()
    out: set = set()
    for a in t.args:
        out |= _term_names(a)
    return out


def random_ring_formula(rng: random.Random, shape: RingShape = RingShape()):
    """A random ring formula within ``shape`` (depth counts atoms as 1)."""
    free = list(RING_FREE[: shape.arity])

    def gen(d, quants, atoms, scope, bound, prefer):
        # returns (formula, quantifiers used, atoms used)
        if d <= 1 or atoms <= 1 and quants == 0:
            return random_ring_atom(rng, free + bound, prefer), 0, 1
        choices = ["atom", "not", "and", "or", "imp", "iff"]
        if quants > 0 and d >= 2:
            choices += ["E", "A", "E"]
        if atoms < 2:
            choices = [c for c in choices if c not in ("and", "or", "imp", "iff")]
        c = rng.choice(choices)
        if c == "atom":
            return random_ring_atom(rng, free + bound, prefer), 0, 1
        if c == "not":
            f, q, a = gen(d - 1, quants, atoms, scope, bound, prefer)
            return Not(f), q, a
        if c in ("E", "A"):
            v = RING_BOUND[len(bound)]
            f, q, a = gen(d - 1, quants - 1, min(atoms, shape.scope_atoms), True, bound + [v], v)
            return (Exists if c == "E" else Forall)(v, f), q + 1, a
        left_atoms = rng.randint(1, atoms - 1)
        f1, q1, a1 = gen(d - 1, quants, left_atoms, scope, bound, prefer)
        f2, q2, a2 = gen(d - 1, quants - q1, atoms - a1, scope, bound, None if prefer in _names(f1) else prefer)
        node = {"and": And, "or": Or, "imp": Implies, "iff": Iff}[c]
        return node(f1, f2), q1 + q2, a1 + a2

    while True:
        f, _, _ = gen(shape.max_depth, shape.max_quantifiers, shape.max_atoms, False, [], None)
        if free_variables(f) and depth(f) <= shape.max_depth and quantifier_count(f) <= shape.max_quantifiers:
            return f


def _names(f) -> set:
    out: set = set()
    for node in walk(f):
        if isinstance(node, Var):
            out.add(node.name)
    return out


def ring_corpus(seed: int, count: int, shape: RingShape = RingShape()) -> list:
    rng = random.Random(seed)
    return [random_ring_formula(rng, shape) for _ in range(count)]


# ---------------------------------------------------------------------------
# Boolean-algebra formulas


def random_bool_term(rng: random.Random, names, depth: int = 2):
    if depth <= 0 or rng.random() < 0.45:
        r = rng.random()
        if r < 0.85:
            return Var(rng.choice(names))
        return rng.choice([ZERO, ONE])
    op = rng.choice(["meet", "join", "comp"])
    if op == "comp":
        return comp(random_bool_term(rng, names, depth - 1))
    a = random_bool_term(rng, names, depth - 1)
    b = random_bool_term(rng, names, depth - 1)
    return meet(a, b) if op == "meet" else join(a, b)


def random_bool_atom(rng: random.Random, names, max_k: int = 3):
    if rng.random() < 0.35:
        return eq(random_bool_term(rng, names), random_bool_term(rng, names, 1))
    return atl(rng.randint(1, max_k), random_bool_term(rng, names))


def random_bool_formula(
    rng: random.Random, variables: int = 3, max_quantifiers: int = 2, max_k: int = 3, max_depth: int = 4
):
    """A Boolean-algebra formula using at most ``variables`` distinct variables.

    Some of the variables y1..y_n are bound by up to ``max_quantifiers``
    quantifiers; the rest stay free.
    """
    names = [f"y{i + 1}" for i in range(variables)]
    n_quant = rng.randint(0, min(max_quantifiers, variables - 1))
    bound_names = names[variables - n_quant :]
    free = names[: variables - n_quant]

    def gen(d, pending, scope):
        if pending:
            v = pending[0]
            body = gen(max(d - 1, 1), pending[1:], scope + [v])
            return (Exists if rng.random() < 0.6 else Forall)(v, body)
        if d <= 1:
            return random_bool_atom(rng, scope, max_k)
        c = rng.choice(["atom", "not", "and", "or", "and", "or"])
        if c == "atom":
            return random_bool_atom(rng, scope, max_k)
        if c == "not":
            return Not(gen(d - 1, [], scope))
        node = And if c == "and" else Or
        return node(gen(d - 1, [], scope), gen(d - 1, [], scope))

    # quantifiers may sit under a connective: build (qf) op (quantified) sometimes
    if n_quant and rng.random() < 0.4:
        left = gen(2, [], free)
        right = gen(max_depth - 1, bound_names, free)
        return (And if rng.random() < 0.5 else Or)(left, right)
    return gen(max_depth, bound_names, free)


def bool_corpus(seed: int, count: int, **kw) -> list:
    rng = random.Random(seed)
    return [random_bool_formula(rng, **kw) for _ in range(count)]


# ---------------------------------------------------------------------------
# products


FIELD_POOL = (2, 3, 4, 5, 7)


def random_field_product(rng: random.Random, pool=FIELD_POOL, max_factors: int = 4) -> tuple:
    """Field orders for a product: 1..max_factors distinct fields from ``pool``, sorted."""
    n = rng.randint(1, min(max_factors, len(pool)))
    return tuple(sorted(rng.sample(list(pool), n)))


def product_spec(orders) -> str:
    return "x".join(f"F{q}" for q in orders)
