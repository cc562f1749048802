"""Naive reference semantics used as test oracles.

Everything here is written from the definitions, without the package's
tables or evaluators: field arithmetic comes from polynomial arithmetic
over F_p, products are tuples of coordinates, quantifiers are plain loops.
It is slow and only meant for small structures.

Element encoding matches the package's: in F_{p^n} the element with id
e = Σ c_i p^i is the residue class of Σ c_i g^i modulo a fixed monic
irreducible polynomial.
"""

import itertools
from functools import lru_cache

from fvkit.formula import And, Apply, Atomic, Const, Exists, Forall, Iff, Implies, Not, Or, Var

# Lexicographically least monic irreducibles (coefficients c_0..c_{n-1}).
MODULI = {
    4: (2, [1, 1]),  # x^2 + x + 1
    8: (2, [1, 1, 0]),  # x^3 + x + 1
    9: (3, [1, 0]),  # x^2 + 1
    16: (2, [1, 1, 0, 0]),  # x^4 + x + 1
    25: (5, [2, 0]),  # x^2 + 2
    27: (3, [1, 2, 0]),  # x^3 + 2x + 1
    32: (2, [1, 0, 1, 0, 0]),  # x^5 + x^2 + 1
    49: (7, [1, 0]),  # x^2 + 1
    64: (2, [1, 1, 0, 0, 0, 0]),  # x^6 + x + 1
}
PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61)
PRIME_POWERS = tuple(sorted(PRIMES + tuple(MODULI)))


class RefField:
    """F_q with arithmetic on coefficient vectors."""

    def __init__(self, q):
        if q in PRIMES:
            self.p, self.low = q, []
        else:
            self.p, self.low = MODULI[q]
        self.n = len(self.low) or 1
        self.q = q

    def digits(self, e):
        return [(e // self.p**i) % self.p for i in range(self.n)]

    def element(self, digits):
        return sum((d % self.p) * self.p**i for i, d in enumerate(digits))

    def add(self, a, b):
        return self.element([x + y for x, y in zip(self.digits(a), self.digits(b))])

    def neg(self, a):
        return self.element([-x for x in self.digits(a)])

    def mul(self, a, b):
        if self.n == 1:
            return a * b % self.p
        da, db = self.digits(a), self.digits(b)
        prod = [0] * (2 * self.n - 1)
        for i, x in enumerate(da):
            for j, y in enumerate(db):
                prod[i + j] += x * y
        # reduce with g^n = -(low)
        for k in range(len(prod) - 1, self.n - 1, -1):
            c = prod[k]
            prod[k] = 0
            for i, l in enumerate(self.low):
                prod[k - self.n + i] -= c * l
        return self.element(prod[: self.n])

    def numeral(self, k):
        return k % self.p  # the element k·1 has digits (k mod p, 0, ...)


@lru_cache(maxsize=None)
def ref_field(q):
    return RefField(q)


def term_value(F, t, env):
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return F.numeral(int(t.symbol))
    if isinstance(t, Apply):
        if t.symbol == "^":
            base = term_value(F, t.args[0], env)
            out = 1
            for _ in range(int(t.args[1].symbol)):
                out = F.mul(out, base)
            return out
        vals = [term_value(F, a, env) for a in t.args]
        if t.symbol == "+":
            return F.add(*vals)
        if t.symbol == "*":
            return F.mul(*vals)
        if t.symbol == "-":
            return F.neg(vals[0]) if len(vals) == 1 else F.add(vals[0], F.neg(vals[1]))
    raise TypeError(f"unknown term {t!r}")


def holds_in_field(F, f, env):
    """Truth of a ring formula in one field (quantifiers range over F)."""
    if isinstance(f, Atomic):
        a, b = (term_value(F, t, env) for t in f.terms)
        return a == b
    if isinstance(f, Not):
        return not holds_in_field(F, f.body, env)
    if isinstance(f, And):
        return holds_in_field(F, f.left, env) and holds_in_field(F, f.right, env)
    if isinstance(f, Or):
        return holds_in_field(F, f.left, env) or holds_in_field(F, f.right, env)
    if isinstance(f, Implies):
        return (not holds_in_field(F, f.left, env)) or holds_in_field(F, f.right, env)
    if isinstance(f, Iff):
        return holds_in_field(F, f.left, env) == holds_in_field(F, f.right, env)
    if isinstance(f, (Exists, Forall)):
        vals = (holds_in_field(F, f.body, {**env, f.var: c}) for c in range(F.q))
        return any(vals) if isinstance(f, Exists) else all(vals)
    raise TypeError(f"unknown formula {f!r}")


class RefProduct:
    """A product of fields; elements are coordinate tuples."""

    def __init__(self, orders):
        self.fields = [ref_field(q) for q in orders]

    def elements(self):
        return itertools.product(*(range(F.q) for F in self.fields))


def holds_in_product(P, f, env):
    """Truth of a ring formula in a product; env maps names to coordinate tuples."""
    if isinstance(f, Atomic):
        return all(
            term_value(F, f.terms[0], {k: v[i] for k, v in env.items()})
            == term_value(F, f.terms[1], {k: v[i] for k, v in env.items()})
            for i, F in enumerate(P.fields)
        )
    if isinstance(f, Not):
        return not holds_in_product(P, f.body, env)
    if isinstance(f, And):
        return holds_in_product(P, f.left, env) and holds_in_product(P, f.right, env)
    if isinstance(f, Or):
        return holds_in_product(P, f.left, env) or holds_in_product(P, f.right, env)
    if isinstance(f, Implies):
        return (not holds_in_product(P, f.left, env)) or holds_in_product(P, f.right, env)
    if isinstance(f, Iff):
        return holds_in_product(P, f.left, env) == holds_in_product(P, f.right, env)
    if isinstance(f, (Exists, Forall)):
        vals = (holds_in_product(P, f.body, {**env, f.var: c}) for c in P.elements())
        return any(vals) if isinstance(f, Exists) else all(vals)
    raise TypeError(f"unknown formula {f!r}")


def ref_k_set(P, theta, env):
    """{i : F_i ⊨ θ(ā(i))} as a frozenset of factor positions."""
    return frozenset(
        i for i, F in enumerate(P.fields) if holds_in_field(F, theta, {k: v[i] for k, v in env.items()})
    )


# ---------------------------------------------------------------------------
# the power-set algebra P(Λ), Λ = {0, ..., n-1}


def set_value(n, t, env):
    full = frozenset(range(n))
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return full if t.symbol == "1" else frozenset()
    if isinstance(t, Apply):
        vals = [set_value(n, a, env) for a in t.args]
        if t.symbol == "meet":
            return vals[0] & vals[1]
        if t.symbol == "join":
            return vals[0] | vals[1]
        if t.symbol == "comp":
            return full - vals[0]
    raise TypeError(f"unknown Boolean term {t!r}")


def holds_in_powerset(n, f, env):
    """Truth of a Boolean/atom-count formula in P({0..n-1})."""
    if isinstance(f, Atomic):
        if f.relation == "=":
            return set_value(n, f.terms[0], env) == set_value(n, f.terms[1], env)
        k = int(f.relation[2:])
        return len(set_value(n, f.terms[0], env)) >= k
    if isinstance(f, Not):
        return not holds_in_powerset(n, f.body, env)
    if isinstance(f, And):
        return holds_in_powerset(n, f.left, env) and holds_in_powerset(n, f.right, env)
    if isinstance(f, Or):
        return holds_in_powerset(n, f.left, env) or holds_in_powerset(n, f.right, env)
    if isinstance(f, Implies):
        return (not holds_in_powerset(n, f.left, env)) or holds_in_powerset(n, f.right, env)
    if isinstance(f, Iff):
        return holds_in_powerset(n, f.left, env) == holds_in_powerset(n, f.right, env)
    if isinstance(f, (Exists, Forall)):
        subsets = [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(n), r)]
        vals = (holds_in_powerset(n, f.body, {**env, f.var: s}) for s in subsets)
        return any(vals) if isinstance(f, Exists) else all(vals)
    raise TypeError(f"unknown formula {f!r}")


def holds_acceptable(P, xi, env):
    """⟨Φ; θ_1..θ_m⟩ at ā: P(Λ) ⊨ Φ(K_θ1(ā), ..., K_θm(ā))."""
    sets = {f"y{i + 1}": ref_k_set(P, th, env) for i, th in enumerate(xi.components)}
    return holds_in_powerset(len(P.fields), xi.bool_formula, sets)


# ---------------------------------------------------------------------------
# infinite atomic Boolean algebras by cell counts
#
# An assignment to variables v_1..v_r is described by the number of atoms
# in each cell (minterm) of v_1..v_r; at least one cell is infinite.  An
# existential quantifier splits every cell in two.  With q quantifiers and
# thresholds ≤ k, finite counts ≥ k·2^q behave like infinite ones, so counts
# range over 0..C-1 and INF with C = k·2^q; below a quantifier the cap
# halves.

INF = float("inf")


def _max_threshold(f):
    if isinstance(f, Atomic):
        return int(f.relation[2:]) if f.relation.startswith("A_") else 1
    kids = [f.body] if isinstance(f, (Not, Exists, Forall)) else [f.left, f.right]
    return max(_max_threshold(g) for g in kids)


def _quantifier_depth(f):
    if isinstance(f, Atomic):
        return 0
    if isinstance(f, (Exists, Forall)):
        return 1 + _quantifier_depth(f.body)
    if isinstance(f, Not):
        return _quantifier_depth(f.body)
    return max(_quantifier_depth(f.left), _quantifier_depth(f.right))


def _cell_value(t, bits, pos):
    if isinstance(t, Var):
        return bits >> pos[t.name] & 1
    if isinstance(t, Const):
        return 1 if t.symbol == "1" else 0
    a = [_cell_value(s, bits, pos) for s in t.args]
    return {"meet": lambda: a[0] & a[1], "join": lambda: a[0] | a[1], "comp": lambda: 1 - a[0]}[t.symbol]()


def _holds_counts(f, counts, pos, C):
    """counts[m] = atoms in cell m (bit j of m is variable j); pos: name -> bit."""
    if isinstance(f, Atomic):
        if f.relation == "=":
            return all(
                counts[m] == 0
                for m in range(len(counts))
                if _cell_value(f.terms[0], m, pos) != _cell_value(f.terms[1], m, pos)
            )
        k = int(f.relation[2:])
        return sum(counts[m] for m in range(len(counts)) if _cell_value(f.terms[0], m, pos)) >= k
    if isinstance(f, Not):
        return not _holds_counts(f.body, counts, pos, C)
    if isinstance(f, And):
        return _holds_counts(f.left, counts, pos, C) and _holds_counts(f.right, counts, pos, C)
    if isinstance(f, Or):
        return _holds_counts(f.left, counts, pos, C) or _holds_counts(f.right, counts, pos, C)
    if isinstance(f, Implies):
        return (not _holds_counts(f.left, counts, pos, C)) or _holds_counts(f.right, counts, pos, C)
    if isinstance(f, Iff):
        return _holds_counts(f.left, counts, pos, C) == _holds_counts(f.right, counts, pos, C)
    if isinstance(f, (Exists, Forall)):
        j = len(counts).bit_length() - 1  # new variable's bit
        pos2 = {**pos, f.var: j}

        def splits(c):
            if c == INF:
                return [(INF, INF)] + [(INF, i) for i in range(C)] + [(i, INF) for i in range(C)]
            return [(a, c - a) for a in range(c + 1)]

        results = (
            _holds_counts(f.body, [p[0] for p in choice] + [p[1] for p in choice], pos2, max(C // 2, 1))
            for choice in itertools.product(*(splits(c) for c in counts))
        )
        return any(results) if isinstance(f, Exists) else all(results)
    raise TypeError(f"unknown formula {f!r}")


def ref_infinite_valid(f, variables):
    """Truth of f under every assignment in every infinite atomic BA."""
    r = len(variables)
    C = _max_threshold(f) * 2 ** _quantifier_depth(f)
    pos = {v: j for j, v in enumerate(variables)}
    values = list(range(C)) + [INF]
    for counts in itertools.product(values, repeat=1 << r):
        if INF not in counts:
            continue
        if not _holds_counts(f, list(counts), pos, C):
            return False
    return True
