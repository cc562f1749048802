"""Feferman–Vaught decomposition of base-language formulas.

Every formula φ(x̄) over the ring signature is turned into an acceptable
sequence ⟨Φ; θ₁, …, θ_m⟩ such that, in every direct product, φ(ā) holds
iff Φ holds in P(Λ) at the index sets K_{θ₁}(ā), …, K_{θ_m}(ā).

The quantifier step is the partition construction: an ∃t over components
θ₁..θ_m chooses, index by index, which θᵢ the witness satisfies.  For every
S ⊆ {1..m} the new component θ_S says "some t realises exactly S", and the
Boolean side guesses a partition (w_S) of Λ with w_S ⊆ K_{θ_S}.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

from .errors import BoundExceeded
from .formula import (
    ONE,
    ZERO,
    And,
    Atomic,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    Var,
    all_variables,
    conj,
    eq,
    exists_many,
    free_variables,
    join,
    join_all,
    meet,
    NameSupply,
    normalize_bound,
    substitute,
)
from .parser import parse_formula
from .render import render

DEFAULT_COMPONENT_BOUND = 12
PAIRWISE_LIMIT = 64


def bool_var(i: int) -> str:
    """Name of the i-th (0-based) Boolean-side variable: y1, y2, ..."""
    return f"y{i + 1}"


@dataclass(frozen=True)
class AcceptableSequence:
    """ξ = ⟨Φ; θ₁..θ_m⟩; Φ's free variables are among y1..ym."""

    bool_formula: object
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        allowed = {bool_var(i) for i in range(len(self.components))}
        extra = free_variables(self.bool_formula) - allowed
        if extra:
            raise ValueError(f"Boolean formula has free variables {sorted(extra)} outside y1..y{len(self.components)}")

    def var(self, i: int) -> str:
        return bool_var(i)

    @property
    def m(self) -> int:
        return len(self.components)

    def free_variables(self) -> frozenset:
        out = frozenset()
        for c in self.components:
            out |= free_variables(c)
        return out

    def to_json(self) -> dict:
        return {"bool": render(self.bool_formula), "components": [render(c) for c in self.components]}

    @classmethod
    def from_json(cls, obj) -> "AcceptableSequence":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(parse_formula(obj["bool"], "boolean"), tuple(parse_formula(c) for c in obj["components"]))

    def __str__(self):
        return "<" + render(self.bool_formula) + "; " + ", ".join(render(c) for c in self.components) + ">"


def _key(f):
    return normalize_bound(f)


def decompose_atomic(phi) -> AcceptableSequence:
    """⟨y1 = 1; φ⟩ for an atomic φ."""
    if not isinstance(phi, Atomic):
        raise TypeError("decompose_atomic expects an atomic formula")
    return AcceptableSequence(eq(Var(bool_var(0)), ONE), (phi,))


def _rename_bool(phi, mapping: dict):
    return substitute(phi, {bool_var(i): Var(bool_var(j)) for i, j in mapping.items() if i != j})


def _merge_components(first: Sequence, second: Sequence):
    """Concatenate component lists, dropping duplicates of the second list.

    Returns the merged list and the index map for the second list.
    """
    merged = list(first)
    index = {}
    for i, c in enumerate(merged):
        index.setdefault(_key(c), i)
    remap = {}
    for j, c in enumerate(second):
        k = _key(c)
        if k not in index:
            index[k] = len(merged)
            merged.append(c)
        remap[j] = index[k]
    return merged, remap


def combine(op: str, xi1: AcceptableSequence, xi2: AcceptableSequence | None = None) -> AcceptableSequence:
    """Boolean combination of acceptable sequences; op is "not", "and" or "or"."""
    if op in ("not", "~"):
        return AcceptableSequence(Not(xi1.bool_formula), xi1.components)
    if xi2 is None:
        raise ValueError(f"combine({op!r}) needs two sequences")
    merged, remap = _merge_components(xi1.components, xi2.components)
    phi2 = _rename_bool(xi2.bool_formula, remap)
    if op in ("and", "&"):
        body = And(xi1.bool_formula, phi2)
    elif op in ("or", "|"):
        body = Or(xi1.bool_formula, phi2)
    else:
        raise ValueError(f"unknown connective {op!r}")
    return AcceptableSequence(body, tuple(merged))


def partition_formula(w: Sequence[str], z: Sequence[str], phi):
    """∃w̄ [⋀ (w_S △ z_S = w_S) ∧ disjoint(w̄) ∧ ⋁w̄ = 1 ∧ φ].

    ``phi`` is already expressed in terms of the w variables.
    """
    ws = [Var(n) for n in w]
    parts = [eq(meet(a, Var(b)), a) for a, b in zip(ws, z)]
    if len(ws) <= PAIRWISE_LIMIT:
        parts += [eq(meet(a, b), ZERO) for a, b in itertools.combinations(ws, 2)]
    else:
        prefix = ws[0]
        for a in ws[1:]:
            parts.append(eq(meet(a, prefix), ZERO))
            prefix = join(prefix, a)
    parts.append(eq(join_all(ws), ONE))
    parts.append(phi)
    return exists_many(list(w), conj(parts))


def _negate(f):
    return f.body if isinstance(f, Not) else Not(f)


def exists_step(xi: AcceptableSequence, t: str, bound: int = DEFAULT_COMPONENT_BOUND) -> AcceptableSequence:
    """Acceptable sequence for ∃t ψ from one for ψ (the partition construction)."""
    m = xi.m
    if m > bound:
        raise BoundExceeded(
            f"exists_step over {m} components exceeds the component bound {bound} (2^{m} new components)",
            bound="components",
        )
    subsets = [frozenset(i for i in range(m) if mask >> i & 1) for mask in range(1 << m)]
    components = []
    for S in subsets:
        lits = [xi.components[i] if i in S else _negate(xi.components[i]) for i in range(m)]
        components.append(Exists(t, conj(lits)))
    names = NameSupply(all_variables(xi.bool_formula) | {bool_var(i) for i in range(len(subsets))})
    w = [names("w") for _ in subsets]
    z = [bool_var(j) for j in range(len(subsets))]
    # y_i := join of the w_S with i ∈ S
    temps = {}
    for i in range(m):
        temps[bool_var(i)] = join_all([Var(w[j]) for j, S in enumerate(subsets) if i in S])
    phi = substitute(xi.bool_formula, temps)
    return AcceptableSequence(normalize_bound(partition_formula(w, z, phi), prefix="w"), tuple(components))


def exists_block_step(
    xi: AcceptableSequence, block: Sequence[str], bound: int = DEFAULT_COMPONENT_BOUND
) -> tuple:
    """The partition construction for ∃t̄ ψ with a block t̄ of variables.

    Components that mention no variable of the block do not depend on the
    witness, so they are passed through unchanged; the partition runs over
    the d components that do.  Returns ``(sequence, k)`` where the first k
    components are the passed-through ones and the remaining 2^d are the
    θ_S := ∃t̄ (⋀_{i∈S} θᵢ ∧ ⋀_{i∉S} ¬θᵢ).
    """
    block = list(block)
    bset = set(block)
    keep = [i for i, th in enumerate(xi.components) if not free_variables(th) & bset]
    dep = [i for i, th in enumerate(xi.components) if free_variables(th) & bset]
    if len(dep) > bound:
        raise BoundExceeded(
            f"exists step over {len(dep)} components exceeds the component bound {bound} (2^{len(dep)} new components)",
            bound="components",
        )
    k = len(keep)
    if not dep:
        renaming = {bool_var(i): Var(bool_var(j)) for j, i in enumerate(keep)}
        return AcceptableSequence(substitute(xi.bool_formula, renaming), tuple(xi.components[i] for i in keep)), k
    subsets = [frozenset(dep[j] for j in range(len(dep)) if mask >> j & 1) for mask in range(1 << len(dep))]
    components = [xi.components[i] for i in keep]
    for S in subsets:
        lits = [xi.components[i] if i in S else _negate(xi.components[i]) for i in dep]
        components.append(exists_many(block, conj(lits)))
    names = NameSupply(all_variables(xi.bool_formula) | {bool_var(i) for i in range(len(components))})
    w = [names("w") for _ in subsets]
    z = [bool_var(k + j) for j in range(len(subsets))]
    temps = {bool_var(i): Var(bool_var(j)) for j, i in enumerate(keep)}
    for i in dep:
        temps[bool_var(i)] = join_all([Var(w[j]) for j, S in enumerate(subsets) if i in S])
    phi = substitute(xi.bool_formula, temps)
    return AcceptableSequence(normalize_bound(partition_formula(w, z, phi), prefix="w"), tuple(components)), k


def _to_basic(f):
    """Rewrite → and ↔ into ¬, ∧, ∨ (∀ is left for decompose)."""
    if isinstance(f, Implies):
        return Or(Not(f.left), f.right)
    if isinstance(f, Iff):
        return Or(And(f.left, f.right), And(Not(f.left), Not(f.right)))
    return f


def decompose(phi, bound: int = DEFAULT_COMPONENT_BOUND) -> AcceptableSequence:
    """An acceptable sequence equivalent to φ in every product."""
    memo: dict = {}

    def go(f):
        hit = memo.get(f)
        if hit is not None:
            return hit
        g = _to_basic(f)
        if isinstance(g, Atomic):
            out = decompose_atomic(g)
        elif isinstance(g, Not):
            out = combine("not", go(g.body))
        elif isinstance(g, And):
            out = combine("and", go(g.left), go(g.right))
        elif isinstance(g, Or):
            out = combine("or", go(g.left), go(g.right))
        elif isinstance(g, Exists):
            out = exists_step(go(g.body), g.var, bound)
        elif isinstance(g, Forall):
            inner = exists_step(combine("not", go(g.body)), g.var, bound)
            out = combine("not", inner)
        else:
            raise TypeError(f"cannot decompose {f!r}")
        memo[f] = out
        return out

    return go(phi)
