"""Tight decompositions: σ over the A_k predicates alone, plus components.

``absorb_and_strip`` removes equality and the Boolean function symbols from
a quantifier-free σ₂ by turning every Boolean term under an A_k into a fresh
variable.  The term's component is the matching Boolean combination of the
old components (meet ↦ ∧, join ↦ ∨, comp ↦ ¬).

``tighten`` builds a tight decomposition of a ring formula bottom-up.  Each
quantifier step applies the partition construction of :func:`fv.exists_step`
to an already tight sequence.  It then eliminates the new block of Boolean
quantifiers and absorbs the result.  Every elimination step carries an
exact certificate from :func:`certify.certify_block`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import BoundExceeded, CertificateFailure
from ..formula import (
    FALSE,
    TRUE,
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
    atl,
    atl_index,
    comp,
    eq,
    free_variables,
    join,
    join_all,
    meet,
    is_quantifier_free,
    walk,
    ONE,
)
from ..fv import DEFAULT_COMPONENT_BOUND, AcceptableSequence, bool_var, combine, exists_block_step, _to_basic
from ..parser import parse_formula
from ..render import render
from .certify import certify_block
from .partition import eliminate_partition
from .qe import MAX_MINTERM_VARS
from .terms import mask_to_term, term_mask


@dataclass(frozen=True)
class StepCertificate:
    """Certificate for one elimination step ∃w̄ body ↔ result."""

    quantifier: str
    components: int
    result: str
    valid: bool
    detail: str = ""


@dataclass(frozen=True)
class TightDecomposition:
    """⟨σ; θ₁..θ_m⟩ with σ quantifier-free and built from A_k(y_i) atoms only."""

    sigma: object
    components: tuple
    certificates: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def m(self) -> int:
        return len(self.components)

    def as_sequence(self) -> AcceptableSequence:
        return AcceptableSequence(self.sigma, self.components)

    def to_json(self) -> dict:
        return {"sigma": render(self.sigma), "components": [render(c) for c in self.components]}

    @classmethod
    def from_json(cls, obj) -> "TightDecomposition":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(parse_formula(obj["sigma"], "boolean"), tuple(parse_formula(c) for c in obj["components"]))

    def __str__(self):
        return "<" + render(self.sigma) + "; " + ", ".join(render(c) for c in self.components) + ">"


def tight_violations(sigma) -> list:
    """Syntactic scan: quantifiers, equality or Boolean function symbols in σ."""
    bad = []
    for node in walk(sigma):
        if isinstance(node, (Exists, Forall)):
            bad.append(f"quantifier over {node.var}")
        elif isinstance(node, Atomic):
            if atl_index(node.relation) is None:
                bad.append(f"relation {node.relation}")
            for t in node.terms:
                if not isinstance(t, Var):
                    bad.append(f"term {render(t)}")
    return bad


def is_tight(sigma) -> bool:
    return not tight_violations(sigma)


def _eq_free(f):
    """Rewrite s = t as ¬A_1((s △ t^C) ▽ (t △ s^C))."""
    if isinstance(f, Atomic):
        if f.relation == "=":
            s, t = f.terms
            return Not(atl(1, join(meet(s, comp(t)), meet(t, comp(s)))))
        return f
    if isinstance(f, Not):
        return Not(_eq_free(f.body))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_eq_free(f.left), _eq_free(f.right))
    raise TypeError("absorb_and_strip expects a quantifier-free formula")


def component_of_term(t, thetas):
    """The base-language formula whose K-set is the value of t at the K_{θ_i}."""
    if isinstance(t, Var):
        name = t.name
        if not name.startswith("y") or not name[1:].isdigit():
            raise ValueError(f"unexpected Boolean variable {name!r}")
        return thetas[int(name[1:]) - 1]
    if isinstance(t, Const):
        return TRUE if t.symbol == "1" else FALSE
    if isinstance(t, Apply):
        if t.symbol == "meet":
            return And(component_of_term(t.args[0], thetas), component_of_term(t.args[1], thetas))
        if t.symbol == "join":
            return Or(component_of_term(t.args[0], thetas), component_of_term(t.args[1], thetas))
        if t.symbol == "comp":
            return _negate(component_of_term(t.args[0], thetas))
    raise ValueError(f"not a Boolean term: {t!r}")


def absorb_and_strip(sigma2, thetas, dont_care: int = 0) -> TightDecomposition:
    """Replace each term under A_k by a fresh component variable.

    Minterms of the y_i in ``dont_care`` are known to be empty, so terms are
    compared and simplified modulo them.
    """
    if not is_quantifier_free(sigma2):
        raise ValueError("absorb_and_strip expects a quantifier-free formula")
    thetas = tuple(thetas)
    order = [bool_var(i) for i in range(len(thetas))]
    new_components: list = []
    index: dict = {}

    def go(f):
        if isinstance(f, Atomic):
            k = atl_index(f.relation)
            mask = term_mask(f.terms[0], order) & ~dont_care
            if mask not in index:
                index[mask] = len(new_components)
                new_components.append(component_of_term(mask_to_term(mask, order, dont_care), thetas))
            return atl(k, Var(bool_var(index[mask])))
        if isinstance(f, Not):
            return Not(go(f.body))
        return type(f)(go(f.left), go(f.right))

    sigma = go(_eq_free(sigma2))
    return TightDecomposition(sigma, tuple(new_components))


def _negate(f):
    return f.body if isinstance(f, Not) else Not(f)


def _peel_block(f):
    block = []
    while isinstance(f, Exists):
        block.append(f.var)
        f = f.body
    return block, f


def tighten(phi, certify: bool = True, bound: int = DEFAULT_COMPONENT_BOUND) -> TightDecomposition:
    """A tight decomposition of a ring formula φ.

    With ``certify`` set, every elimination step is checked by the exact DP
    certificate, and CertificateFailure is raised if a step fails.
    """
    certificates: list = []
    memo: dict = {}

    def go(f) -> TightDecomposition:
        hit = memo.get(f)
        if hit is not None:
            return hit
        g = _to_basic(f)
        if isinstance(g, Atomic):
            out = absorb_and_strip(eq(Var(bool_var(0)), ONE), (g,))
        elif isinstance(g, Not):
            inner = go(g.body)
            out = TightDecomposition(_negate(inner.sigma), inner.components)
        elif isinstance(g, (And, Or)):
            a, b = go(g.left), go(g.right)
            xi = combine("and" if isinstance(g, And) else "or", a.as_sequence(), b.as_sequence())
            out = TightDecomposition(xi.bool_formula, xi.components)
        elif isinstance(g, (Exists, Forall)):
            # a run of quantifiers of one kind is one quantifier over a tuple
            kind = type(g)
            block = []
            body = g
            while isinstance(body, kind):
                block.append(body.var)
                body = body.body
            inner = go(body)
            if kind is Exists:
                out = _exists(inner, block)
            else:
                out = _exists(TightDecomposition(_negate(inner.sigma), inner.components), block)
                out = TightDecomposition(_negate(out.sigma), out.components)
        else:
            raise TypeError(f"cannot tighten {f!r}")
        memo[f] = out
        return out

    def _exists(td: TightDecomposition, block) -> TightDecomposition:
        xi, k = exists_block_step(td.as_sequence(), block, bound)
        if xi.m > MAX_MINTERM_VARS:
            raise BoundExceeded(
                f"the ∃{''.join(block)} step has {xi.m} components, beyond the minterm bound {MAX_MINTERM_VARS}",
                bound="minterms",
            )
        if k == xi.m:
            return TightDecomposition(xi.bool_formula, xi.components)
        wblock, body = _peel_block(xi.bool_formula)
        order = [bool_var(i) for i in range(xi.m)]
        # Every index has some witness, so the K-sets of the θ_S cover the
        # index set: the minterms outside all of them are empty in every
        # product.  With the k passed-through components first, these are
        # the minterms whose index is below 2^k.
        empty = (1 << (1 << k)) - 1
        bset = set(block)
        keep = [i for i, th in enumerate(td.components) if not free_variables(th) & bset]
        dep = [i for i, th in enumerate(td.components) if free_variables(th) & bset]
        order_y = [bool_var(i) for i in keep + dep]
        result = eliminate_partition(td.sigma, k, len(dep), order_y, order)
        if certify:
            cover = eq(join_all([Var(v) for v in order[k:]]), ONE)
            verdict = certify_block(order, wblock, body, And(result, cover))
            certificates.append(
                StepCertificate(
                    quantifier=" ".join(block),
                    components=xi.m,
                    result=render(result),
                    valid=verdict.valid,
                    detail="" if verdict.valid else str(verdict.counterexample),
                )
            )
            if not verdict.valid:
                label = "".join(block)
                raise CertificateFailure(f"elimination step for ∃{label} failed its certificate: {verdict.counterexample}")
        return absorb_and_strip(result, xi.components, dont_care=empty)

    td = go(phi)
    return TightDecomposition(td.sigma, td.components, tuple(certificates))


# ---------------------------------------------------------------------------
# E-set normal form


@dataclass(frozen=True)
class ESetForm:
    """σ read as a Boolean combination of atoms E_{θ_i,k} ("θ_i holds at ≥ k indices")."""

    sigma: object
    components: tuple

    def atoms(self) -> list:
        out = []
        for node in walk(self.sigma):
            if isinstance(node, Atomic):
                pair = (int(node.terms[0].name[1:]) - 1, atl_index(node.relation))
                if pair not in out:
                    out.append(pair)
        return [(self.components[i], k) for i, k in out]

    def render(self) -> str:
        def go(f, level=0):
            if isinstance(f, Atomic):
                i = int(f.terms[0].name[1:]) - 1
                return f"E[{atl_index(f.relation)}]({render(self.components[i])})"
            if isinstance(f, Not):
                return "~(" + go(f.body) + ")"
            op = {And: " & ", Or: " | ", Implies: " -> ", Iff: " <-> "}[type(f)]
            return "(" + go(f.left) + op + go(f.right) + ")"

        return go(self.sigma)

    def holds(self, P, asg) -> bool:
        """Count semantics on a finite product: E_{θ,k} holds iff |K_θ(ā)| ≥ k."""
        from ..model import k_set
        from ..powerset import PowersetEvaluator

        env = {bool_var(i): k_set(P, th, asg).mask for i, th in enumerate(self.components)}
        return PowersetEvaluator(len(P.labels)).holds(self.sigma, env)

    def holds_batch(self, P, batch) -> np.ndarray:
        from ..model import evaluate_acceptable_batch

        return evaluate_acceptable_batch(P, AcceptableSequence(self.sigma, self.components), batch)


def e_set_form(td: TightDecomposition) -> ESetForm:
    bad = tight_violations(td.sigma)
    if bad:
        raise ValueError(f"not a tight decomposition: {bad}")
    return ESetForm(td.sigma, td.components)
