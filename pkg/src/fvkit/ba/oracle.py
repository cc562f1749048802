"""Exact validity oracle for the theory of infinite atomic Boolean algebras.

A formula over {0, 1, meet, join, comp, =, A_k} with free variables
y_1..y_r only sees the cardinalities of the 2^r minterms, and A_k cannot
tell apart cardinalities above its threshold.  Counts are therefore kept
exactly below a cap C and collapsed to BIG (meaning "≥ C or infinite")
above it.

Caps are chosen per node: an atom A_k needs cap k (an equality needs 1), a
connective needs the maximum of its children and a quantifier needs twice
its body's cap.  Two counts that are both ≥ 2N cannot be told apart by any
way of splitting them into two parts each compared against caps ≤ N, which
makes the abstraction exact rather than merely sound.  (A single global
cutoff B = max k is not enough: with B = 2 a minterm with 3 atoms would be
treated like an infinite one, and ∃y (A_2(y) ∧ A_2(x ∧ comp y)) would hold
at |x| = 3.)

Top-level states must contain at least one BIG minterm, since an infinite
algebra has infinitely many atoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import BoundExceeded
from ..formula import (
    And,
    Atomic,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    atl_index,
    free_variables,
)
from .terms import term_mask

BIG = 1 << 40
MAX_MINTERM_VARS = 16
DEFAULT_BUDGET = 20_000_000


@dataclass(frozen=True)
class CardinalityState:
    """Minterm cardinalities over ``variables``; entries ≥ cap are stored as None (BIG)."""

    variables: tuple
    counts: tuple
    cap: int

    def __str__(self):
        def show(c):
            return f"≥{self.cap}" if c is None else str(c)

        parts = []
        for i, c in enumerate(self.counts):
            label = "".join(("" if i >> j & 1 else "~") + v for j, v in enumerate(self.variables)) or "1"
            parts.append(f"{label}:{show(c)}")
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class OracleVerdict:
    valid: bool
    counterexample: CardinalityState | None
    states: int
    cap: int

    def __bool__(self):
        return self.valid


def need(f) -> int:
    """The cap required to evaluate f exactly."""
    if isinstance(f, Atomic):
        k = atl_index(f.relation)
        return 1 if k is None else max(k, 1)
    if isinstance(f, Not):
        return need(f.body)
    if isinstance(f, (And, Or, Implies, Iff)):
        return max(need(f.left), need(f.right))
    if isinstance(f, (Exists, Forall)):
        return 2 * need(f.body)
    raise TypeError(f"not a formula: {f!r}")


class _Evaluator:
    def __init__(self, budget: int):
        self.budget = budget
        self.work = 0
        self.memo: dict = {}
        self.masks: dict = {}
        self.needs: dict = {}

    def _need(self, f):
        n = self.needs.get(f)
        if n is None:
            n = self.needs[f] = need(f)
        return n

    def _indices(self, t, order):
        key = (t, order)
        hit = self.masks.get(key)
        if hit is None:
            mask = term_mask(t, order)
            hit = np.array([i for i in range(1 << len(order)) if mask >> i & 1], dtype=np.int64)
            self.masks[key] = hit
        return hit

    def _sum(self, states, idx):
        if idx.size == 0:
            return np.zeros(states.shape[0], dtype=np.int64)
        return states[:, idx].sum(axis=1)

    def eval(self, f, states: np.ndarray, order: tuple, cap: int) -> np.ndarray:
        """Truth of f on each row of ``states`` (counts per minterm of ``order``)."""
        if isinstance(f, Atomic):
            if f.relation == "=":
                a = term_mask(f.terms[0], order)
                b = term_mask(f.terms[1], order)
                idx = np.array([i for i in range(1 << len(order)) if (a ^ b) >> i & 1], dtype=np.int64)
                return self._sum(states, idx) == 0
            k = atl_index(f.relation)
            if k is None:
                raise ValueError(f"unknown relation {f.relation!r}")
            return self._sum(states, self._indices(f.terms[0], order)) >= k
        if isinstance(f, Not):
            return ~self.eval(f.body, states, order, cap)
        if isinstance(f, And):
            left = self.eval(f.left, states, order, cap)
            if not left.any():
                return left
            return left & self.eval(f.right, states, order, cap)
        if isinstance(f, Or):
            left = self.eval(f.left, states, order, cap)
            if left.all():
                return left
            return left | self.eval(f.right, states, order, cap)
        if isinstance(f, Implies):
            return ~self.eval(f.left, states, order, cap) | self.eval(f.right, states, order, cap)
        if isinstance(f, Iff):
            return self.eval(f.left, states, order, cap) == self.eval(f.right, states, order, cap)
        if isinstance(f, (Exists, Forall)):
            out = np.empty(states.shape[0], dtype=bool)
            for i, row in enumerate(states):
                out[i] = self._quantifier(f, row, order, cap)
            return out
        raise TypeError(f"not a formula: {f!r}")

    def _quantifier(self, f, row, order, cap) -> bool:
        key = (f, order, cap, row.tobytes())
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        inner = self._need(f.body)
        if f.var in order:
            # the quantified variable shadows a free one: drop it from the order
            j = order.index(f.var)
            row, order = _forget(row, order, j)
        options = [_splits(int(c), cap, inner) for c in row]
        total = 1
        for o in options:
            total *= len(o)
        self.work += total
        if self.work > self.budget:
            raise BoundExceeded("cardinality-state enumeration exceeded its budget", bound="states")
        r = len(row)
        new_order = order + (f.var,)
        want = isinstance(f, Exists)
        result = not want
        for chunk in _product_chunks(options, r):
            truth = self.eval(f.body, chunk, new_order, inner)
            if want and truth.any():
                result = True
                break
            if not want and not truth.all():
                result = False
                break
        self.memo[key] = result
        return result


def _forget(row, order, j):
    """Merge minterms that differ only in variable j."""
    r = len(order)
    new = np.zeros(1 << (r - 1), dtype=np.int64)
    for i, c in enumerate(row):
        low = i & ((1 << j) - 1)
        high = i >> (j + 1)
        k = low | (high << j)
        new[k] = min(BIG, new[k] + c)
    return new, order[:j] + order[j + 1 :]


def _cap(x, cap):
    return BIG if x >= cap else x


def _splits(c: int, cap: int, inner: int) -> list:
    """Ways to split a count (exact below ``cap``, BIG above) into (outside, inside)."""
    if c >= BIG:
        small = list(range(inner))
        return [(a, BIG) for a in small] + [(BIG, a) for a in small] + [(BIG, BIG)]
    return sorted({(_cap(a, inner), _cap(c - a, inner)) for a in range(c + 1)})


def _product_chunks(options, r, chunk=65536):
    """Yield arrays of split combinations; column i is minterm i outside the new variable, i + r inside."""
    it = itertools.product(*options)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        arr = np.array(block, dtype=np.int64)  # (n, r, 2)
        out = np.empty((arr.shape[0], 2 * r), dtype=np.int64)
        out[:, :r] = arr[:, :, 0]
        out[:, r:] = arr[:, :, 1]
        yield out


def top_states(r: int, cap: int):
    """All admissible states over 2^r minterms (at least one BIG entry), in chunks."""
    values = list(range(cap)) + [BIG]
    it = itertools.product(values, repeat=1 << r)
    while True:
        block = list(itertools.islice(it, 65536))
        if not block:
            return
        arr = np.array(block, dtype=np.int64).reshape(len(block), 1 << r)
        arr = arr[(arr >= BIG).any(axis=1)]
        if arr.size:
            yield arr


def infinite_ba_valid(phi, budget: int = DEFAULT_BUDGET, variables=None) -> OracleVerdict:
    """Is φ true under every assignment in every infinite atomic Boolean algebra?"""
    order = tuple(sorted(free_variables(phi))) if variables is None else tuple(variables)
    r = len(order)
    if r > MAX_MINTERM_VARS:
        raise BoundExceeded(f"{r} free variables exceed the minterm bound {MAX_MINTERM_VARS}", bound="minterms")
    cap = need(phi)
    n_states = (cap + 1) ** (1 << r)
    if n_states > budget:
        raise BoundExceeded(f"{n_states} top-level states exceed the oracle budget", bound="states")
    ev = _Evaluator(budget)
    checked = 0
    for states in top_states(r, cap):
        truth = ev.eval(phi, states, order, cap)
        checked += states.shape[0]
        if not truth.all():
            row = states[int(np.argmin(truth))]
            counts = tuple(None if c >= BIG else int(c) for c in row)
            return OracleVerdict(False, CardinalityState(order, counts, cap), checked, cap)
    return OracleVerdict(True, None, checked, cap)


def infinite_ba_satisfiable(phi, budget: int = DEFAULT_BUDGET) -> bool:
    return not infinite_ba_valid(Not(phi), budget).valid


def infinite_ba_equivalent(phi, psi, budget: int = DEFAULT_BUDGET) -> OracleVerdict:
    return infinite_ba_valid(Iff(phi, psi), budget)
