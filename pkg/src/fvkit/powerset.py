"""Exact evaluation of Boolean-algebra formulas in the power-set algebra P(Λ).

Elements are bitmasks over the label positions.  Quantifier blocks are
searched by backtracking: each conjunct of the block body is checked as
soon as all of its block variables are assigned, and conjuncts that mention
a single block variable prune that variable's domain up front.  Results of
subformulas are memoised on the values of their free variables.
"""

from __future__ import annotations

from .engine import conjuncts, negated_conjuncts
from .errors import BoundExceeded
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
    free_variables,
)

DEFAULT_MAX_LABELS = 16


def _popcount(x: int) -> int:
    return bin(x).count("1")


class PowersetEvaluator:
    def __init__(self, n_labels: int, max_labels: int = DEFAULT_MAX_LABELS, max_steps: int = 50_000_000):
        self.n = n_labels
        self.full = (1 << n_labels) - 1
        self.max_labels = max_labels
        self.max_steps = max_steps
        self.steps = 0
        self.memo: dict = {}
        self._fv: dict = {}

    def _free(self, f):
        fv = self._fv.get(f)
        if fv is None:
            fv = tuple(sorted(free_variables(f)))
            self._fv[f] = fv
        return fv

    def term(self, t, env) -> int:
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, Const):
            if t.symbol == "0":
                return 0
            if t.symbol == "1":
                return self.full
            raise ValueError(f"unknown Boolean constant {t.symbol!r}")
        s = t.symbol
        if s == "meet":
            return self.term(t.args[0], env) & self.term(t.args[1], env)
        if s == "join":
            return self.term(t.args[0], env) | self.term(t.args[1], env)
        if s == "comp":
            return self.full ^ self.term(t.args[0], env)
        raise ValueError(f"unknown Boolean function {s!r}")

    def holds(self, f, env) -> bool:
        fv = self._free(f)
        try:
            key = (f, tuple(env[v] for v in fv))
        except KeyError as exc:
            raise KeyError(f"unassigned free variable {exc.args[0]!r}") from None
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._holds(f, env)
        self.memo[key] = out
        return out

    def _holds(self, f, env) -> bool:
        if isinstance(f, Atomic):
            if f.relation == "=":
                return self.term(f.terms[0], env) == self.term(f.terms[1], env)
            k = atl_index(f.relation)
            if k is None:
                raise ValueError(f"unknown relation {f.relation!r}")
            return _popcount(self.term(f.terms[0], env)) >= k
        if isinstance(f, Not):
            return not self.holds(f.body, env)
        if isinstance(f, And):
            return self.holds(f.left, env) and self.holds(f.right, env)
        if isinstance(f, Or):
            return self.holds(f.left, env) or self.holds(f.right, env)
        if isinstance(f, Implies):
            return (not self.holds(f.left, env)) or self.holds(f.right, env)
        if isinstance(f, Iff):
            return self.holds(f.left, env) == self.holds(f.right, env)
        if isinstance(f, (Exists, Forall)):
            if self.n > self.max_labels:
                raise BoundExceeded(
                    f"|Λ| = {self.n} exceeds the enumeration bound {self.max_labels}", bound="labels"
                )
            kind = type(f)
            names = []
            body = f
            while isinstance(body, kind):
                names.append(body.var)
                body = body.body
            block = []
            for n in reversed(names):
                if n not in block:
                    block.append(n)
            block.reverse()
            if kind is Exists:
                return self._search(block, conjuncts(body), env)
            return not self._search(block, negated_conjuncts(body), env)
        raise TypeError(f"not a formula: {f!r}")

    def _search(self, block, parts, env) -> bool:
        block_set = set(block)
        env = dict(env)
        for v in block:
            env.pop(v, None)
        uses = []
        for c in parts:
            uses.append(frozenset(v for v in self._free(c) if v in block_set))
        # conjuncts without block variables decide the whole block
        for c, u in zip(parts, uses):
            if not u and not self.holds(c, env):
                return False
        domains = {}
        for v in block:
            unary = [c for c, u in zip(parts, uses) if u == {v}]
            dom = []
            for value in range(self.full + 1):
                env[v] = value
                if all(self.holds(c, env) for c in unary):
                    dom.append(value)
            del env[v]
            if not dom:
                return False
            domains[v] = dom
        order = sorted(block, key=lambda v: (len(domains[v]), block.index(v)))
        position = {v: i for i, v in enumerate(order)}
        checks = [[] for _ in order]
        for c, u in zip(parts, uses):
            if len(u) >= 2:
                checks[max(position[v] for v in u)].append(c)
        return self._dfs(0, order, domains, checks, env)

    def _dfs(self, i, order, domains, checks, env) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for value in domains[v]:
            self.steps += 1
            if self.steps > self.max_steps:
                raise BoundExceeded("power-set search exceeded its step budget", bound="steps")
            env[v] = value
            if all(self.holds(c, env) for c in checks[i]) and self._dfs(i + 1, order, domains, checks, env):
                del env[v]
                return True
        env.pop(v, None)
        return False


def evaluate_powerset_masks(n_labels: int, f, env: dict, evaluator: PowersetEvaluator | None = None) -> bool:
    ev = evaluator or PowersetEvaluator(n_labels)
    return ev.holds(f, env)
