"""Vectorised exhaustive model checker for finite (product) structures.

A formula is evaluated to a dense boolean table over its free variables.
Free variables of the top-level query are bound to a *batch* of tuples,
sharing one leading axis; every quantified variable gets its own axis over
its domain.  Quantifier blocks are eliminated variable by variable
(bucket elimination over the conjuncts of the block body), and a block
variable whose body contains a conjunct mentioning only that variable has
its domain restricted to the elements satisfying that guard.  The result is
exactly Tarskian semantics: every quantifier still ranges over the whole
universe, the guards only skip elements at which the body is false anyway.

Elements of a product are coordinate vectors; terms are evaluated per
coordinate with the factor tables, atomic formulas hold iff they hold at
every coordinate (the product semantics).
"""

from __future__ import annotations

import numpy as np

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
    free_variables,
    term_variables,
)

DEFAULT_MAX_CELLS = 1 << 24


class _Binding:
    """What a variable currently denotes: a batch column or an axis domain."""

    __slots__ = ("kind", "ids", "key")

    def __init__(self, kind, ids, key):
        self.kind = kind
        self.ids = ids
        self.key = key


class _Table:
    """Dense value: ``data`` has shape (batch or 1, len(dom(v)) for v in vars)."""

    __slots__ = ("vars", "data")

    def __init__(self, vars_, data):
        self.vars = vars_
        self.data = data


def _union(a, b):
    if a == b:
        return a
    return tuple(sorted(set(a) | set(b)))


def conjuncts(f) -> list:
    """Flatten f into a list of formulas whose conjunction is f."""
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    if isinstance(f, Not):
        return negated_conjuncts(f.body)
    return [f]


def negated_conjuncts(f) -> list:
    """Flatten ¬f into a list of formulas whose conjunction is ¬f."""
    if isinstance(f, Or):
        return negated_conjuncts(f.left) + negated_conjuncts(f.right)
    if isinstance(f, Implies):
        return conjuncts(f.left) + negated_conjuncts(f.right)
    if isinstance(f, Not):
        return conjuncts(f.body)
    return [Not(f)]


class Evaluator:
    """Exhaustive evaluator over a product of finite structures.

    ``factors`` are FiniteStructures; ``coords[i]`` maps a universe id to the
    element id in factor i.  A single structure is the one-factor case.
    """

    def __init__(self, factors, coords=None, max_cells: int = DEFAULT_MAX_CELLS):
        self.factors = list(factors)
        if coords is None:
            if len(self.factors) != 1:
                raise ValueError("coords are required for several factors")
            coords = [np.arange(self.factors[0].size, dtype=np.int64)]
        self.coords = [np.asarray(c, dtype=np.int64) for c in coords]
        self.size = len(self.coords[0])
        self.max_cells = max_cells
        self._full = _Binding("axis", np.arange(self.size, dtype=np.int64), ("axis", "full"))
        self._domains: dict = {}
        self._const_cache: dict = {}
        self._power_cache: dict = {}
        self.memo: dict = {}

    # -- public API
    def evaluate_batch(self, f, batch: dict) -> np.ndarray:
        """Truth of f for each row of the batch (var -> array of universe ids)."""
        free = free_variables(f)
        missing = free - set(batch)
        if missing:
            raise KeyError(f"unassigned free variable(s): {sorted(missing)}")
        lengths = {len(np.atleast_1d(v)) for v in batch.values()}
        n = max(lengths) if lengths else 1
        self.memo = {}
        env = {}
        for name, ids in batch.items():
            ids = np.atleast_1d(np.asarray(ids, dtype=np.int64))
            if len(ids) != n:
                ids = np.broadcast_to(ids, (n,))
            env[name] = _Binding("batch", ids, ("batch", name, id(batch)))
        out = self._formula(f, env)
        data = out.data
        if out.vars:
            raise AssertionError("free axis left after evaluation")
        return np.broadcast_to(data.reshape(-1), (n,)).copy()

    def evaluate(self, f, assignment: dict) -> bool:
        batch = {k: [v] for k, v in assignment.items()}
        return bool(self.evaluate_batch(f, batch)[0])

    def table(self, f, variables, domains: dict | None = None) -> np.ndarray:
        """Full truth table of f with one axis per listed variable (in order).

        ``domains`` optionally restricts some variables to given universe ids;
        their axes then run over those ids only, in increasing order.
        """
        variables = list(variables)
        missing = free_variables(f) - set(variables)
        if missing:
            raise KeyError(f"unassigned free variable(s): {sorted(missing)}")
        self.memo = {}
        env = {v: self._full for v in variables}
        for v, ids in (domains or {}).items():
            env[v] = self._domain(np.unique(np.asarray(ids, dtype=np.int64)))
        sizes = {v: len(env[v].ids) for v in variables}
        out = self._formula(f, env)
        data = out.data[0]
        present = list(out.vars)
        # add missing axes, then order as requested
        shape = [sizes[v] if v in present else 1 for v in sorted(variables)]
        full_vars = sorted(variables)
        data = data.reshape(shape)
        perm = [full_vars.index(v) for v in variables]
        data = np.transpose(data, perm)
        return np.broadcast_to(data, tuple(sizes[v] for v in variables)).copy()

    # -- bindings
    def _domain(self, ids: np.ndarray) -> _Binding:
        if len(ids) == self.size:
            return self._full
        key = ids.tobytes()
        b = self._domains.get(key)
        if b is None:
            b = _Binding("axis", ids, ("axis", len(self._domains)))
            self._domains[key] = b
        return b

    def _key(self, node, env):
        fv = term_variables(node) if isinstance(node, (Var, Const, Apply)) else free_variables(node)
        try:
            return (node, tuple(sorted((v, env[v].key) for v in fv)))
        except KeyError as exc:
            raise KeyError(f"unassigned free variable {exc.args[0]!r}") from None

    def _check(self, cells):
        if cells > self.max_cells:
            raise BoundExceeded(
                f"enumeration needs {cells} cells, bound is {self.max_cells}", bound="enumeration"
            )

    def _shape(self, vars_, env, batch):
        return (batch,) + tuple(len(env[v].ids) for v in vars_)

    def _align(self, table_vars, data, target, env):
        if table_vars == target:
            return data
        shape = [data.shape[0]]
        i = 0
        for v in target:
            if i < len(table_vars) and table_vars[i] == v:
                shape.append(data.shape[1 + i])
                i += 1
            else:
                shape.append(1)
        return data.reshape(shape)

    # -- terms
    def _term(self, t, env):
        key = self._key(t, env)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if isinstance(t, Var):
            b = env[t.name]
            if b.kind == "batch":
                out = (), [c[b.ids] for c in self.coords]
            else:
                out = (t.name,), [c[b.ids][None, :] for c in self.coords]
        elif isinstance(t, Const):
            vals = self._const_cache.get(t.symbol)
            if vals is None:
                vals = [np.array([f.constant(t.symbol)], dtype=np.int64) for f in self.factors]
                self._const_cache[t.symbol] = vals
            out = (), vals
        else:
            out = self._apply(t, env)
        self.memo[key] = out
        return out

    def _apply(self, t, env):
        if t.symbol == "^":
            k = int(t.args[0 + 1].symbol)
            vars_, vals = self._term(t.args[0], env)
            tables = self._power_cache.get(k)
            if tables is None:
                tables = [f.power_table(k) for f in self.factors]
                self._power_cache[k] = tables
            return vars_, [tab[v] for tab, v in zip(tables, vals)]
        args = [self._term(a, env) for a in t.args]
        target = args[0][0]
        for a in args[1:]:
            target = _union(target, a[0])
        aligned = [[self._align(a[0], v, target, env) for v in a[1]] for a in args]
        out = []
        for i, f in enumerate(self.factors):
            table = f.functions[t.symbol]
            out.append(table[tuple(arg[i] for arg in aligned)])
        return target, out

    # -- formulas
    def _formula(self, f, env) -> _Table:
        key = self._key(f, env)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._formula_uncached(f, env)
        self.memo[key] = out
        return out

    def _formula_uncached(self, f, env) -> _Table:
        if isinstance(f, Atomic):
            return self._atomic(f, env)
        if isinstance(f, Not):
            inner = self._formula(f.body, env)
            return _Table(inner.vars, ~inner.data)
        if isinstance(f, (And, Or, Implies, Iff)):
            a = self._formula(f.left, env)
            if isinstance(f, And) and not a.data.any():
                return _Table((), np.zeros((1,), dtype=bool))
            if isinstance(f, Or) and a.data.all() and not a.vars:
                return _Table((), np.ones((1,), dtype=bool))
            b = self._formula(f.right, env)
            target = _union(a.vars, b.vars)
            x = self._align(a.vars, a.data, target, env)
            y = self._align(b.vars, b.data, target, env)
            if isinstance(f, And):
                data = x & y
            elif isinstance(f, Or):
                data = x | y
            elif isinstance(f, Implies):
                data = ~x | y
            else:
                data = x == y
            return _Table(target, data)
        if isinstance(f, (Exists, Forall)):
            kind = type(f)
            names = []
            body = f
            while isinstance(body, kind):
                names.append(body.var)
                body = body.body
            # innermost binder of a repeated name wins; earlier duplicates are vacuous
            block = []
            for n in reversed(names):
                if n not in block:
                    block.append(n)
            block.reverse()
            if kind is Exists:
                return self._exists(block, conjuncts(body), env)
            res = self._exists(block, negated_conjuncts(body), env)
            return _Table(res.vars, ~res.data)
        raise TypeError(f"not a formula: {f!r}")

    def _atomic(self, f, env) -> _Table:
        args = [self._term(t, env) for t in f.terms]
        target = ()
        for a in args:
            target = _union(target, a[0])
        aligned = [[self._align(a[0], v, target, env) for v in a[1]] for a in args]
        result = None
        for i, fac in enumerate(self.factors):
            if f.relation == "=":
                r = aligned[0][i] == aligned[1][i]
            else:
                table = fac.relation_table(f.relation)
                r = table[tuple(arg[i] for arg in aligned)]
            result = r if result is None else (result & r)
        if result.ndim == 0:
            result = result.reshape(1)
        return _Table(target, np.asarray(result, dtype=bool))

    def _exists(self, block, parts, env) -> _Table:
        inner = dict(env)
        for v in block:
            inner[v] = self._full
        block_set = set(block)
        # guards: conjuncts whose only free variable is a single block variable
        remaining = []
        guards: dict = {}
        for c in parts:
            fv = free_variables(c)
            if len(fv) == 1 and next(iter(fv)) in block_set:
                guards.setdefault(next(iter(fv)), []).append(c)
            else:
                remaining.append(c)
        for v, gs in guards.items():
            mask = np.ones(self.size, dtype=bool)
            for g in gs:
                t = self._formula(g, inner)
                if t.vars:
                    mask &= t.data.reshape(-1)
                elif not t.data.all():
                    mask[:] = False
            ids = np.nonzero(mask)[0]
            if len(ids) == 0:
                return _Table((), np.zeros((1,), dtype=bool))
            inner[v] = self._domain(ids)
        factors = []
        for c in remaining:
            t = self._formula(c, inner)
            if not t.data.any():
                return _Table((), np.zeros((1,), dtype=bool))
            factors.append(t)
        todo = [v for v in block]
        while todo:
            best = None
            for v in todo:
                involved = [t for t in factors if v in t.vars]
                vars_ = ()
                batch = 1
                for t in involved:
                    vars_ = _union(vars_, t.vars)
                    batch = max(batch, t.data.shape[0])
                cells = batch
                for u in vars_:
                    cells *= len(inner[u].ids)
                if best is None or cells < best[0]:
                    best = (cells, v, involved, vars_)
            cells, v, involved, vars_ = best
            todo.remove(v)
            if not involved:
                continue
            self._check(cells)
            data = None
            for t in involved:
                x = self._align(t.vars, t.data, vars_, inner)
                data = x if data is None else (data & x)
            axis = 1 + vars_.index(v)
            data = data.any(axis=axis)
            new_vars = tuple(u for u in vars_ if u != v)
            factors = [t for t in factors if t not in involved]
            factors.append(_Table(new_vars, data))
        if not factors:
            return _Table((), np.ones((1,), dtype=bool))
        vars_ = ()
        for t in factors:
            vars_ = _union(vars_, t.vars)
        data = None
        for t in factors:
            x = self._align(t.vars, t.data, vars_, inner)
            data = x if data is None else (data & x)
        return _Table(vars_, data)
