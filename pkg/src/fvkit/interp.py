"""The Boolean algebra of idempotents and representation formulas.

In a product of integral domains the idempotents are exactly the 0/1-valued
elements, and they form a Boolean algebra isomorphic to P(Λ): an idempotent
b stands for F(b) = {λ : b(λ) = 1}.  This module builds

* the interpretation kit Θ_B, Θ_=, Θ_0, Θ_1, Θ_△, Θ_▽, Θ_C;
* formulas Υ_φ(x̄, y) saying "y is the idempotent of K_φ(x̄)", for atomic
  φ and then through ¬/∧/∨ and ∃;
* a single ring formula δ_ξ defining the predicate of an acceptable
  sequence ξ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formula import (
    ONE,
    ZERO,
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
    add,
    all_variables,
    atl_index,
    conj,
    eq,
    exists_many,
    free_variables,
    mul,
    NameSupply,
    sub,
    substitute,
)
from .engine import conjuncts
from .polynomial import as_polynomial, polynomial_to_term
from .structures import IndexSet, ProductStructure


def _v(name):
    return Var(name) if isinstance(name, str) else name


# ---------------------------------------------------------------------------
# the interpretation kit


@dataclass(frozen=True)
class InterpretationKit:
    """Ring formulas interpreting P(Λ) in the idempotents of a product.

    Every formula is written over fixed parameter names; :meth:`apply`
    substitutes actual terms for them.
    """

    formulas: dict
    params: dict

    def apply(self, name: str, *args):
        f = self.formulas[name]
        ps = self.params[name]
        if len(args) != len(ps):
            raise ValueError(f"{name} takes {len(ps)} arguments")
        return substitute(f, {p: _v(a) for p, a in zip(ps, args)})

    def names(self) -> list:
        return list(self.formulas)

    @staticmethod
    def decode(P: ProductStructure, element) -> IndexSet:
        """F(b) = {λ : b(λ) = 1} for a product element (id or coordinate tuple)."""
        coords = element if isinstance(element, (tuple, list)) else P.coordinates(element)
        mask = 0
        for i, (f, c) in enumerate(zip(P.factors, coords)):
            if int(c) == f.constant("1"):
                mask |= 1 << i
        return P.index_set(mask)


def idempotent_kit() -> InterpretationKit:
    """Θ_B: x²=x, Θ_=: x=y, Θ_0: x=0, Θ_1: x=1, Θ_△: x·y=z, Θ_▽: (1−x)(1−y)=1−z, Θ_C: 1−x=y."""
    x, y, z = Var("x"), Var("y"), Var("z")
    formulas = {
        "B": eq(mul(x, x), x),
        "=": eq(x, y),
        "0": eq(x, ZERO),
        "1": eq(x, ONE),
        "meet": eq(mul(x, y), z),
        "join": eq(mul(sub(ONE, x), sub(ONE, y)), sub(ONE, z)),
        "comp": eq(sub(ONE, x), y),
    }
    params = {"B": ("x",), "=": ("x", "y"), "0": ("x",), "1": ("x",), "meet": ("x", "y", "z"),
              "join": ("x", "y", "z"), "comp": ("x", "y")}
    return InterpretationKit(formulas, params)


KIT = idempotent_kit()


def is_positive_primitive(f) -> bool:
    """∃-prefixed conjunction of atomic formulas (an empty prefix is allowed)."""
    while isinstance(f, Exists):
        f = f.body
    return all(isinstance(c, Atomic) for c in conjuncts(f))


def _sqsubseteq(a, b):
    """a ⊑ b for idempotents: a·b = a."""
    return eq(mul(_v(a), _v(b)), _v(a))


def _supply(*formulas, extra=()) -> NameSupply:
    taken = set(extra)
    for f in formulas:
        taken |= all_variables(f)
    return NameSupply(taken)


# ---------------------------------------------------------------------------
# representation formulas


def upsilon_atomic(F, y: str = "y"):
    """Υ_φ(x̄, y) for φ: F(x̄) = 0 over a product of integral domains.

    Θ_B(y) ∧ F·y = 0 ∧ ∀z((Θ_B(z) ∧ F·z = 0) → z·y = z): y is the largest
    idempotent killed by F, i.e. the indicator of K_φ.
    """
    poly = as_polynomial(F)
    term = polynomial_to_term(poly)
    z = _supply(eq(term, ZERO), extra={y})("z")
    body = Implies(And(KIT.apply("B", z), eq(mul(term, Var(z)), ZERO)), _sqsubseteq(z, y))
    return conj([KIT.apply("B", y), eq(mul(term, Var(y)), ZERO), Forall(z, body)])


def _rename_target(ups, old: str, new: str):
    return substitute(ups, {old: Var(new)})


def upsilon_boolean(op: str, ups_phi, ups_psi=None, y: str = "y", target: str = "y"):
    """Representation of a Boolean combination (instantiated with the idempotent kit).

    ``ups_phi`` / ``ups_psi`` represent their K-sets through the variable
    ``target``.  ``op`` is one of "and_not" (the φ ∧ ¬ψ schema),
    "not", "and", "or".
    """
    names = _supply(ups_phi, *(() if ups_psi is None else (ups_psi,)), extra={y, target})
    u = names("u")
    a = _rename_target(ups_phi, target, u)
    if op == "not":
        return Exists(u, And(a, KIT.apply("comp", u, y)))
    if ups_psi is None:
        raise ValueError(f"{op} needs two representations")
    v = names("u")
    b = _rename_target(ups_psi, target, v)
    if op == "and_not":
        w = names("u")
        return exists_many([u, v, w], conj([a, b, KIT.apply("comp", v, w), KIT.apply("meet", u, w, y)]))
    if op == "and":
        return exists_many([u, v], conj([a, b, KIT.apply("meet", u, v, y)]))
    if op == "or":
        return exists_many([u, v], conj([a, b, KIT.apply("join", u, v, y)]))
    raise ValueError(f"unknown Boolean operation {op!r}")


def xi_formula(ups_phi, z: str, y: str = "y", target: str = "y"):
    """Ξ_φ(x̄, y) := ∀z ∃w (Υ_φ(x̄, z, w) ∧ w·y = w): y contains every K_φ(x̄, z)."""
    names = _supply(ups_phi, extra={y, z, target})
    w = names("w")
    return Forall(z, Exists(w, And(_rename_target(ups_phi, target, w), _sqsubseteq(w, y))))


def upsilon_exists(ups_phi, z: str, y: str = "y", target: str = "y"):
    """Υ_{∃zφ}(x̄, y) := Ξ_φ(x̄, y) ∧ ∀v (Ξ_φ(x̄, v) → y·v = y): the least such y."""
    names = _supply(ups_phi, extra={y, z, target})
    v = names("v")
    xi_y = xi_formula(ups_phi, z, y, target)
    xi_v = xi_formula(ups_phi, z, v, target)
    return And(xi_y, Forall(v, Implies(xi_v, _sqsubseteq(y, v))))


def represent(theta, y: str = "y"):
    """Υ_θ(x̄, y) built through the atomic / Boolean / ∃ constructors.

    → and ↔ are rewritten first, ∀ is read as ¬∃¬.
    """
    if y in free_variables(theta):
        raise ValueError(f"target variable {y!r} is free in the formula")
    if isinstance(theta, Atomic):
        return upsilon_atomic(theta, y)
    if isinstance(theta, Not):
        return upsilon_boolean("not", represent(theta.body, y), y=y, target=y)
    if isinstance(theta, And):
        if isinstance(theta.right, Not):
            return upsilon_boolean("and_not", represent(theta.left, y), represent(theta.right.body, y), y, y)
        return upsilon_boolean("and", represent(theta.left, y), represent(theta.right, y), y, y)
    if isinstance(theta, Or):
        return upsilon_boolean("or", represent(theta.left, y), represent(theta.right, y), y, y)
    if isinstance(theta, Implies):
        return represent(Or(Not(theta.left), theta.right), y)
    if isinstance(theta, Iff):
        return represent(Or(And(theta.left, theta.right), And(Not(theta.left), Not(theta.right))), y)
    if isinstance(theta, Exists):
        z = theta.var
        body = theta.body
        if z == y:
            raise ValueError("bound variable clashes with the target")
        return upsilon_exists(represent(body, y), z, y, y)
    if isinstance(theta, Forall):
        return represent(Not(Exists(theta.var, Not(theta.body))), y)
    raise TypeError(f"cannot represent {theta!r}")


# ---------------------------------------------------------------------------
# atoms and acceptable sequences


def atom_formula(x: str = "x"):
    """At(x) := Θ_B(x) ∧ ¬Θ_0(x) ∧ ∀y (Θ_B(y) → (x·y = x ∨ x·y = 0)).

    The ¬Θ_0(x) conjunct excludes 0, which otherwise satisfies the formula.
    """
    y = "y" if x != "y" else "y'"
    body = Implies(KIT.apply("B", y), Or(_sqsubseteq(x, y), eq(mul(Var(x), Var(y)), ZERO)))
    return conj([KIT.apply("B", x), Not(KIT.apply("0", x)), Forall(y, body)])


def translate_term(t, rename: dict):
    """A Boolean term as a ring term on idempotents: meet ↦ ·, join ↦ a+b−ab, comp ↦ 1−a.

    These are the functions whose graphs are Θ_△, Θ_▽ and Θ_C.
    """
    if isinstance(t, Var):
        return Var(rename.get(t.name, t.name))
    if isinstance(t, Const):
        return ONE if t.symbol == "1" else ZERO
    if isinstance(t, Apply):
        args = [translate_term(a, rename) for a in t.args]
        if t.symbol == "meet":
            return mul(args[0], args[1])
        if t.symbol == "join":
            return sub(add(args[0], args[1]), mul(args[0], args[1]))
        if t.symbol == "comp":
            return sub(ONE, args[0])
    raise ValueError(f"unsupported Boolean symbol in {t!r}")


def at_least_k_atoms(k: int, t, names: NameSupply, atom=atom_formula):
    """∃z_1..z_k (⋀ At(z_i) ∧ ⋀_{i<j} z_i ≠ z_j ∧ ⋀ z_i ⊑ t) for a ring term t."""
    zs = [names("a") for _ in range(k)]
    parts = [atom(z) for z in zs]
    parts += [Not(eq(Var(a), Var(b))) for i, a in enumerate(zs) for b in zs[i + 1 :]]
    parts += [eq(mul(Var(z), t), Var(z)) for z in zs]
    return exists_many(zs, conj(parts))


def translate_boolean(phi, rename: dict, names: NameSupply, atom=atom_formula):
    """Relativise a Boolean-side formula to the idempotents of a ring."""
    if isinstance(phi, Atomic):
        if phi.relation == "=":
            s, t = phi.terms
            return eq(translate_term(s, rename), translate_term(t, rename))
        k = atl_index(phi.relation)
        if k is None:
            raise ValueError(f"unsupported relation {phi.relation!r}")
        return at_least_k_atoms(k, translate_term(phi.terms[0], rename), names, atom)
    if isinstance(phi, Not):
        return Not(translate_boolean(phi.body, rename, names, atom))
    if isinstance(phi, (And, Or, Implies, Iff)):
        return type(phi)(translate_boolean(phi.left, rename, names, atom),
                         translate_boolean(phi.right, rename, names, atom))
    if isinstance(phi, (Exists, Forall)):
        v = names("b")
        inner = dict(rename)
        inner[phi.var] = v
        body = translate_boolean(phi.body, inner, names, atom)
        guard = KIT.apply("B", v)
        if isinstance(phi, Exists):
            return Exists(v, And(guard, body))
        return Forall(v, Implies(guard, body))
    raise TypeError(f"not a Boolean-side formula: {phi!r}")


def define_acceptable(xi, kit: InterpretationKit = KIT, atom=atom_formula, represent_fn=represent):
    """δ_ξ(x̄): one ring formula defining the predicate of an acceptable sequence.

    δ_ξ := ∃b_1..b_m (⋀ Υ_{θ_i}(x̄, b_i) ∧ Φ*(b̄)) where Φ* relativises the
    Boolean formula to the idempotents and reads A_k through ``atom``.
    """
    from .fv import bool_var

    comps = list(xi.components)
    taken = set()
    for c in comps:
        taken |= all_variables(c)
    taken |= all_variables(xi.bool_formula)
    names = NameSupply(taken)
    bs = [names("b") for _ in comps]
    rename = {bool_var(i): b for i, b in enumerate(bs)}
    parts = []
    for b, theta in zip(bs, comps):
        parts.append(kit.apply("B", b))
        parts.append(represent_fn(theta, b))
    parts.append(translate_boolean(xi.bool_formula, rename, names, atom))
    return exists_many(bs, conj(parts))


def representation_table(
    P: ProductStructure, ups, variables, y: str, max_cells: int | None = None, domains: dict | None = None
) -> np.ndarray:
    """Truth of Υ over all (x̄, y) in P, axes in the order ``variables`` + [y].

    ``domains`` restricts some of the variables to the listed elements.
    """
    from .model import structure_evaluator

    ev = structure_evaluator(P) if max_cells is None else structure_evaluator(P, max_cells)
    return ev.table(ups, list(variables) + [y], domains)
