"""Products of finite fields: Kiefe formulas, small-field patching, ∃∀∃ reduction.

A *Kiefe formula* is a Boolean combination of formulas ∃t P(x̄, t) = 0 with
P an integer polynomial (a quantifier-free equation counts as the case where
t does not occur).  This module provides

* irreducible polynomials and the field-characterising sentences Ψ_q;
* isolating polynomial systems and the quantifier-free θ_q(φ) that agrees
  with φ in F_q;
* ``kiefe_patch``: glue the θ_q for the fields below a threshold N to a
  caller-supplied Kiefe formula ψ′ that is asserted correct for fields of
  size ≥ N (the pseudo-finite elimination itself is not implemented);
* the representation formulas Υ′, At and E_{ψ,k} over products of fields;
* ``reduce_to_eae``: tighten → E-set form → patch → E_{ψ,k}, giving a
  Boolean combination of ∃∀∃ formulas.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import gf
from .errors import BoundExceeded, CertificateFailure, ProviderError
from .formula import (
    FALSE,
    ONE,
    TRUE,
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
    add,
    all_variables,
    atl_index,
    conj,
    disj,
    eq,
    exists_many,
    forall_many,
    free_variables,
    mul,
    NameSupply,
    sub,
    substitute,
)
from .interp import atom_formula
from .model import structure_evaluator
from .polynomial import Polynomial, as_polynomial, polynomial_equation, polynomial_to_term
from .render import render
from .structures import MAX_FIELD_ORDER, finite_field

ISOLATION_BOUND = 4096  # q^n limit for the linear algebra on reduced polynomials
DEFAULT_N = 3
DEFAULT_M = 64

__all__ = [
    "KiefeFormula",
    "IsolatingSystem",
    "PatchReport",
    "EaeReduction",
    "is_kiefe",
    "kiefe_leaves",
    "irreducible_polynomial",
    "field_sentence",
    "isolating_polynomials",
    "isolating_system",
    "theta_q",
    "kiefe_patch",
    "table_provider",
    "upsilon_field_atomic",
    "atom_formula",
    "e_formula",
    "reduce_to_eae",
    "eae_reduction",
]


# ---------------------------------------------------------------------------
# Kiefe formulas


def _is_equation(f) -> bool:
    return isinstance(f, Atomic) and f.relation == "=" and atl_index(f.relation) is None


def _is_leaf(f) -> bool:
    if _is_equation(f):
        return True
    return isinstance(f, Exists) and _is_equation(f.body)


def kiefe_leaves(f) -> list:
    """The leaves ∃t P = 0 (or P = 0) of a Kiefe formula, in order, without repeats."""
    out: list = []

    def go(g):
        if _is_leaf(g):
            if g not in out:
                out.append(g)
        elif isinstance(g, Not):
            go(g.body)
        elif isinstance(g, (And, Or, Implies, Iff)):
            go(g.left)
            go(g.right)
        else:
            raise ValueError(f"not a Kiefe formula: {render(g)}")

    go(f)
    return out


def is_kiefe(f) -> bool:
    """Syntactic check: a Boolean combination of ring equations and ∃t (P = 0)."""
    try:
        kiefe_leaves(f)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class KiefeFormula:
    """A formula certified (syntactically) to be a Kiefe formula."""

    formula: object
    report: object = field(default=None, compare=False)

    def __post_init__(self):
        if not is_kiefe(self.formula):
            raise ValueError(f"not a Kiefe formula: {render(self.formula)}")

    def leaves(self) -> list:
        return kiefe_leaves(self.formula)

    def __str__(self):
        return render(self.formula)


def _formula_of(x):
    return x.formula if isinstance(x, KiefeFormula) else x


# ---------------------------------------------------------------------------
# irreducible polynomials and field sentences


def irreducible_polynomial(p: int, n: int, var: str = "x", bound: int = MAX_FIELD_ORDER) -> Polynomial:
    """The lexicographically least monic irreducible polynomial of degree n over F_p."""
    if p**n > bound:
        raise BoundExceeded(f"{p}^{n} exceeds the field bound {bound}", bound="field order")
    return gf.coefficients_to_polynomial(_irreducible(p, n), var)


@lru_cache(maxsize=None)
def _irreducible(p: int, n: int) -> list:
    return gf.irreducible_coefficients(p, n)


def _char_term(p: int):
    """p·1 written as 1 + 1 + ... + 1."""
    out = ONE
    for _ in range(p - 1):
        out = add(out, ONE)
    return out


def _root_exists(coeffs: list, p: int, t: str = "t"):
    poly = gf.coefficients_to_polynomial([c % p for c in coeffs], t)
    return Exists(t, polynomial_equation(poly))


def field_sentence(q: int, M: int = DEFAULT_M, literal: bool = False) -> KiefeFormula:
    """Ψ_q, the Kiefe sentence singling out F_q among the finite fields of order ≤ M.

    The literal form of the sentence is ``p·1 = 0 ∧ ¬∃t (t^q − t − 1 = 0)
    ∧ ∃t P_q(t) = 0``; it is also true in F_{q^ℓ} for some ℓ (F_8 ⊨ Ψ_2).  The
    default strengthened form conjoins ¬∃t P_{q^j}(t) = 0 for every j ≥ 2 with
    q^j ≤ M, which is exact among fields of order ≤ M.  ``literal=True`` returns
    the literal form.
    """
    pp = gf.prime_power(q)
    if pp is None:
        raise ValueError(f"{q} is not a prime power")
    p, n = pp
    artin = [-1, -1] + [0] * (q - 2) + [1]  # t^q - t - 1
    parts = [
        eq(_char_term(p), ZERO),
        Not(_root_exists(artin, p)),
        _root_exists(_irreducible(p, n), p),
    ]
    if not literal:
        j = 2
        while q**j <= M:
            parts.append(Not(_root_exists(_irreducible(p, n * j), p)))
            j += 1
    return KiefeFormula(conj(parts))


# ---------------------------------------------------------------------------
# isolating polynomials


def _field_ops(F):
    add_t = np.asarray(F.functions["+"], dtype=np.int64)
    mul_t = np.asarray(F.functions["*"], dtype=np.int64)
    q = F.size
    power = np.zeros((q, q), dtype=np.int64)  # power[a, e] = a^e
    power[:, 0] = 1
    for e in range(1, q):
        power[:, e] = mul_t[power[:, e - 1], np.arange(q)]
    scal = np.zeros((F.p, q), dtype=np.int64)  # scal[c, a] = c·a
    for c in range(1, F.p):
        scal[c] = add_t[scal[c - 1], np.arange(q)]
    return add_t, mul_t, power, scal


def _points(q: int, n: int) -> np.ndarray:
    return np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64).reshape(-1, n)


def _values(F, poly: Polynomial, names, points: np.ndarray) -> np.ndarray:
    """Values of an integer polynomial at the given points of F_q^n (element ids)."""
    add_t, mul_t, power, scal = _field_ops(F)
    out = np.zeros(len(points), dtype=np.int64)
    col = {v: i for i, v in enumerate(names)}
    for mono, c in poly.terms.items():
        val = np.ones(len(points), dtype=np.int64)
        for v, e in mono:
            val = mul_t[val, power[points[:, col[v]], e % (F.size - 1) or (F.size - 1)]]
        out = add_t[out, scal[c % F.p, val]]
    return out


def _frobenius_orbit(F, point) -> list:
    frob = F.power_table(F.p)
    orbit = [tuple(point)]
    while True:
        nxt = tuple(int(frob[a]) for a in orbit[-1])
        if nxt == orbit[0]:
            return orbit
        orbit.append(nxt)


def _default_names(n: int) -> list:
    return ["x"] if n == 1 else [f"x{i + 1}" for i in range(n)]


def isolating_polynomials(q: int, point, names=None, minimal: bool = False) -> list:
    """Polynomials over F_p whose common zero set in F_q^n is the Frobenius orbit of ``point``.

    The full list is a basis of the kernel of evaluation at the point on
    polynomials of degree ≤ q−1 in each variable.  Monomials are scanned in
    graded order; each one either extends the span of the values seen so far
    or yields the kernel element m − Σ c_j b_j.  With ``minimal`` set, only a
    greedy subset that already cuts out the orbit is returned.
    """
    point = tuple(int(a) for a in point)
    n = len(point)
    if q**n > ISOLATION_BOUND:
        raise BoundExceeded(f"q^n = {q}^{n} exceeds the isolation bound {ISOLATION_BOUND}", bound="isolation")
    names = list(names) if names is not None else _default_names(n)
    F = finite_field(q)
    p, deg = F.p, F.n
    exps = sorted(itertools.product(range(q), repeat=n), key=lambda e: (sum(e), tuple(-x for x in e)))
    rows: list = []  # (vector over F_p, pivot column, combination over pivot monomials)
    kernel: list = []
    _, mul_t, power, _ = _field_ops(F)
    for e in exps:
        val = 1
        for a, k in zip(point, e):
            val = int(mul_t[val, power[a, k]])
        vec = gf.element_coefficients(val, p, deg)
        combo = {e: 1}
        for rvec, piv, rcombo in rows:
            c = vec[piv]
            if c:
                vec = [(x - c * y) % p for x, y in zip(vec, rvec)]
                for m, k in rcombo.items():
                    combo[m] = (combo.get(m, 0) - c * k) % p
        nz = [i for i, x in enumerate(vec) if x]
        if not nz:
            kernel.append(_poly_from_exps(combo, names, p))
            continue
        piv = nz[0]
        inv = pow(vec[piv], p - 2, p)
        rows.append(([(x * inv) % p for x in vec], piv, {m: (k * inv) % p for m, k in combo.items()}))
    if not minimal:
        return kernel
    pts = _points(q, n)
    orbit = set(_frobenius_orbit(F, point))
    current = np.ones(len(pts), dtype=bool)
    chosen = []
    for poly in kernel:
        zeros = _values(F, poly, names, pts) == 0
        new = current & zeros
        if new.sum() < current.sum():
            chosen.append(poly)
            current = new
            if current.sum() == len(orbit):
                break
    return chosen


def _poly_from_exps(combo: dict, names, p: int) -> Polynomial:
    terms = {}
    for e, c in combo.items():
        if c % p:
            terms[tuple((v, k) for v, k in zip(names, e) if k)] = c % p
    return Polynomial(terms)


def zero_set(q: int, polys, names) -> set:
    """Common zeros in F_q^n, as tuples of element ids."""
    F = finite_field(q)
    pts = _points(q, len(names))
    mask = np.ones(len(pts), dtype=bool)
    for poly in polys:
        mask &= _values(F, poly, names, pts) == 0
    return {tuple(int(a) for a in row) for row in pts[mask]}


@dataclass(frozen=True)
class IsolatingSystem:
    """Orbit representatives of a solution set with their isolating polynomials."""

    q: int
    names: tuple
    systems: tuple  # ((representative, (polynomials...)), ...)

    @property
    def arity(self) -> int:
        return len(self.names)

    def verify(self) -> bool:
        """Each list cuts out exactly its orbit; orbits are pairwise disjoint."""
        F = finite_field(self.q)
        seen: set = set()
        for rep, polys in self.systems:
            orbit = set(_frobenius_orbit(F, rep))
            if zero_set(self.q, polys, self.names) != orbit or orbit & seen:
                return False
            seen |= orbit
        return True

    def solution_set(self) -> set:
        F = finite_field(self.q)
        out: set = set()
        for rep, _ in self.systems:
            out |= set(_frobenius_orbit(F, rep))
        return out


def _solution_table(phi, q: int, names) -> np.ndarray:
    ev = structure_evaluator(finite_field(q))
    if not names:
        return np.array(ev.evaluate(phi, {}), dtype=bool).reshape(())
    return ev.table(phi, names)


def isolating_system(phi, q: int, names=None, minimal: bool = True) -> IsolatingSystem:
    """Pol_{φ,q}: one isolating list per Frobenius orbit of φ^{F_q}."""
    names = tuple(names) if names is not None else tuple(sorted(free_variables(phi)))
    n = len(names)
    if q**n > ISOLATION_BOUND:
        raise BoundExceeded(f"q^n = {q}^{n} exceeds the isolation bound {ISOLATION_BOUND}", bound="isolation")
    F = finite_field(q)
    table = _solution_table(phi, q, names)
    systems = []
    covered: set = set()
    for point in itertools.product(range(q), repeat=n):
        if not table[point] or point in covered:
            continue
        covered |= set(_frobenius_orbit(F, point))
        systems.append((point, tuple(isolating_polynomials(q, point, names, minimal=minimal))))
    return IsolatingSystem(q, names, tuple(systems))


def theta_q(phi, q: int, names=None, minimal: bool = True):
    """A quantifier-free formula equivalent to φ in F_q.

    The disjunction over orbit representatives of φ^{F_q} of the
    conjunction of their isolating equations; the empty disjunction is
    ¬(0 = 0).  When φ holds everywhere the result is simply 0 = 0.  The
    equivalence is checked over every tuple before returning.
    """
    names = tuple(names) if names is not None else tuple(sorted(free_variables(phi)))
    table = _solution_table(phi, q, names)
    if table.all():
        out = TRUE
    elif not table.any():
        out = FALSE
    else:
        system = isolating_system(phi, q, names, minimal=minimal)
        out = disj([conj([polynomial_equation(P) for P in polys]) for _, polys in system.systems])
    if not np.array_equal(_solution_table(out, q, names) if names else table, table):
        raise CertificateFailure(f"θ_{q} disagrees with φ in F_{q}")
    return out


# ---------------------------------------------------------------------------
# patching


@dataclass(frozen=True)
class PatchReport:
    """Per-field outcome of the checks made by ``kiefe_patch``."""

    N: int
    M: int
    fields: tuple  # (q, "patched" | "provider", agrees with φ)
    provider_failures: tuple = ()
    skipped: tuple = ()

    @property
    def ok(self) -> bool:
        return all(ok for _, _, ok in self.fields) and not self.provider_failures

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "fields": [{"q": q, "branch": b, "agrees": ok} for q, b, ok in self.fields],
            "provider_failures": list(self.provider_failures),
            "skipped": list(self.skipped),
        }


def _field_names(phi, psi) -> tuple:
    return tuple(sorted(free_variables(phi) | free_variables(psi)))


def kiefe_patch(phi, psi_prime, N: int = DEFAULT_N, M: int = DEFAULT_M, check: bool = True) -> KiefeFormula:
    """θ := ⋀_{q<N} (Ψ_q → θ_q) ∧ ((⋀_{q<N} ¬Ψ_q) → ψ′).

    ψ′ is the caller's Kiefe formula, asserted equivalent to φ in every
    finite field of order ≥ N.  With ``check`` set, that assertion and the
    equivalence θ ↔ φ are tested by exhaustive evaluation in every field of
    order ≤ M; a failing assertion raises ProviderError.
    """
    psi = _formula_of(psi_prime)
    if not is_kiefe(psi):
        raise ProviderError(f"the supplied formula is not a Kiefe formula: {render(psi)}")
    if M < N:
        raise ValueError("the margin M must be at least N")
    if not free_variables(psi) <= free_variables(phi):
        raise ProviderError("the supplied formula has free variables that φ lacks")
    small = [q for q in gf.prime_powers_upto(N - 1)]
    names = tuple(sorted(free_variables(phi)))
    sentences = {q: field_sentence(q, M).formula for q in small}
    parts = [Implies(sentences[q], theta_q(phi, q, names)) for q in small]
    guard = conj([Not(sentences[q]) for q in small])
    parts.append(psi if not small else Implies(guard, psi))
    theta = conj(parts)
    report = None
    if check:
        fields = []
        failures = []
        skipped = []
        for q in gf.prime_powers_upto(M):
            if q ** len(names) > ISOLATION_BOUND:
                skipped.append(q)
                continue
            want = _solution_table(phi, q, names)
            if q >= N and not np.array_equal(_solution_table(psi, q, names), want):
                failures.append(q)
            got = _solution_table(theta, q, names)
            fields.append((q, "patched" if q < N else "provider", bool(np.array_equal(got, want))))
        report = PatchReport(N, M, tuple(fields), tuple(failures), tuple(skipped))
        if failures:
            raise ProviderError(
                f"the supplied Kiefe formula disagrees with φ in F_q for q in {failures}: {render(psi)}"
            )
        if not report.ok:
            bad = [q for q, _, ok in fields if not ok]
            raise CertificateFailure(f"patched formula disagrees with φ in F_q for q in {bad}")
    return KiefeFormula(theta, report)


def table_provider(N: int = DEFAULT_N, M: int = DEFAULT_M):
    """A provider that tabulates φ field by field: ψ′ := ⋁_{N ≤ q ≤ M} (Ψ_q ∧ θ_q(φ)).

    Correct in every field of order ≤ M and false above M; a stand-in for a
    genuine pseudo-finite elimination, usable when only fields ≤ M matter.
    Components that are already Kiefe formulas are returned unchanged.
    """

    def provide(phi):
        if is_kiefe(phi):
            return phi
        names = tuple(sorted(free_variables(phi)))
        parts = []
        for q in gf.prime_powers_upto(M):
            if q < N:
                continue
            th = theta_q(phi, q, names)
            if th == FALSE:
                continue
            sentence = field_sentence(q, M).formula
            parts.append(sentence if th == TRUE else And(sentence, th))
        return disj(parts)

    return provide


def identity_provider(phi):
    """The default provider: a component that is already Kiefe is its own ψ′."""
    if is_kiefe(phi):
        return phi
    raise ProviderError(f"no Kiefe formula supplied for the component {render(phi)}")


# ---------------------------------------------------------------------------
# representation formulas over products of fields


def _idem(z):
    return eq(mul(Var(z), Var(z)), Var(z))


def _sq(a, b):
    """a ⊑ b for idempotents: a·b = a."""
    return eq(mul(Var(a), Var(b)), Var(a))


def _supply(*formulas, extra=()) -> NameSupply:
    taken = set(extra)
    for f in formulas:
        taken |= all_variables(f)
    return NameSupply(taken)


def upsilon_field_atomic(F, y: str = "y", names: NameSupply | None = None):
    """Υ′_{F=0}(x̄, y) := ∃z∃u∃v (Id(z) ∧ u·v = 1 ∧ u·F = z ∧ y = 1 − z).

    In a product of fields z is the idempotent associate of F(x̄), so y is
    the indicator of the indices where F vanishes.
    """
    term = polynomial_to_term(as_polynomial(F))
    names = names or _supply(eq(term, ZERO), extra={y})
    z, u, v = names("z"), names("u"), names("v")
    body = conj([_idem(z), eq(mul(Var(u), Var(v)), ONE), eq(mul(Var(u), term), Var(z)), eq(Var(y), sub(ONE, Var(z)))])
    return exists_many([z, u, v], body)


def _upsilon_parts(F, w: str, names: NameSupply):
    """(bound variables, matrix) of Υ′_{F=0}(x̄, w)."""
    term = polynomial_to_term(as_polynomial(F))
    z, u, v = names("z"), names("u"), names("v")
    body = conj([_idem(z), eq(mul(Var(u), Var(v)), ONE), eq(mul(Var(u), term), Var(z)), eq(Var(w), sub(ONE, Var(z)))])
    return [z, u, v], body


def _k_below(F, y: str, names: NameSupply, positive: bool):
    """"K_{F=0} ⊑ y" with K expanded through Υ′.

    Positive occurrences use ∃w (Υ′(w) ∧ w ⊑ y); negative ones the
    equivalent ∀w (Υ′(w) → w ⊑ y), so that negating it gives an ∃-formula.
    """
    w = names("w")
    bound, matrix = _upsilon_parts(F, w, names)
    if positive:
        return exists_many([w] + bound, And(matrix, _sq(w, y)))
    return forall_many([w] + bound, Implies(matrix, _sq(w, y)))


def _xi(leaf, y: str, names: NameSupply, positive: bool):
    """Ξ(x̄, y) := Id(y) ∧ ∀s (K_{G(x̄,s)=0} ⊑ y) for the leaf ∃s G = 0."""
    s = names(leaf.var)
    G = as_polynomial(substitute(leaf.body, {leaf.var: Var(s)}))
    return And(_idem(y), Forall(s, _k_below(G, y, names, positive)))


def _upsilon_leaf(leaf, y: str, names: NameSupply):
    """A ∀∃ (or ∃) formula saying y is the indicator of K_leaf."""
    if _is_equation(leaf):
        bound, matrix = _upsilon_parts(as_polynomial(leaf), y, names)
        return exists_many(bound, matrix)
    # y is the least idempotent above every K_{G(x̄,s)=0}
    v = names("v")
    least = Forall(v, Implies(_xi(leaf, v, names, positive=False), _sq(y, v)))
    return And(_xi(leaf, y, names, positive=True), least)


def _bool_term(f, value: dict, names: NameSupply, defs: list):
    """A variable holding the idempotent of K_f, given the leaf indicators.

    Each connective gets its own variable, defined by a small equation in
    idempotent arithmetic (1 − a, a·b, a + b − a·b) appended to ``defs``;
    this keeps every atom down to three variables.
    """
    if f in value:
        return value[f]
    if isinstance(f, Implies):
        return _bool_term(Or(Not(f.left), f.right), value, names, defs)
    if isinstance(f, Iff):
        return _bool_term(Or(And(f.left, f.right), And(Not(f.left), Not(f.right))), value, names, defs)
    if isinstance(f, Not):
        a = Var(_bool_term(f.body, value, names, defs))
        rhs = sub(ONE, a)
    elif isinstance(f, (And, Or)):
        a = Var(_bool_term(f.left, value, names, defs))
        b = Var(_bool_term(f.right, value, names, defs))
        rhs = mul(a, b) if isinstance(f, And) else sub(add(a, b), mul(a, b))
    else:
        raise ValueError(f"not a Kiefe formula: {render(f)}")
    r = names("r")
    defs.append((r, eq(Var(r), rhs)))
    value[f] = r
    return r


def upsilon_kiefe(psi, y: str = "y", names: NameSupply | None = None):
    """Υ_ψ(x̄, y): y is the indicator of K_ψ(x̄), for a Kiefe formula ψ.

    ∃t̄ (⋀_j Υ_j(x̄, t_j) ∧ y = B(t̄)), where Υ_j represents the j-th leaf
    (an ∃-formula for an equation, a ∀∃-formula for ∃s G = 0) and B is ψ's
    Boolean structure in idempotent arithmetic, one connective at a time.
    """
    psi = _formula_of(psi)
    names = names or _supply(psi, extra={y})
    leaves = kiefe_leaves(psi)
    ts = [names("t") for _ in leaves]
    parts = [_upsilon_leaf(leaf, t, names) for leaf, t in zip(leaves, ts)]
    defs: list = []
    top = _bool_term(psi, dict(zip(leaves, ts)), names, defs)
    parts += [d for _, d in defs]
    # redundant Id guards: they let an evaluator range t̄ and the connective
    # variables over idempotents only
    parts += [_idem(v) for v in ts + [r for r, _ in defs]]
    parts.append(eq(Var(y), Var(top)))
    return exists_many(ts + [r for r, _ in defs], conj(parts))


def e_formula(psi, k: int, names: NameSupply | None = None):
    """E_{ψ,k}(x̄): ψ holds at at least k indices.

    ∃z₁…∃z_k ∃z (⋀ At(z_i) ∧ ⋀_{i<j} z_i ≠ z_j ∧ ⋀ z_i ⊑ z ∧ Υ_ψ(x̄, z)).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    psi = _formula_of(psi)
    names = names or _supply(psi)
    zs = [names("z") for _ in range(k)]
    z = names("z")
    parts = []
    for zi in zs:
        y = names("y")
        parts.append(_rename_free(atom_formula("x"), {"x": zi}, {"y": y}))
    parts += [Not(eq(Var(a), Var(b))) for a, b in itertools.combinations(zs, 2)]
    parts += [_sq(zi, z) for zi in zs]
    parts.append(upsilon_kiefe(psi, z, names))
    return exists_many(zs + [z], conj(parts))


def _rename_free(f, free: dict, bound: dict):
    """Rename the free variable(s) and the bound variable(s) of a small template."""
    def go(g):
        if isinstance(g, (Exists, Forall)):
            new = bound.get(g.var, g.var)
            return type(g)(new, go(substitute(g.body, {g.var: Var(new)}) if new != g.var else g.body))
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, (And, Or, Implies, Iff)):
            return type(g)(go(g.left), go(g.right))
        return g

    renamed = go(f)
    return substitute(renamed, {a: Var(b) for a, b in free.items()})


# ---------------------------------------------------------------------------
# the ∃∀∃ reduction


@dataclass(frozen=True)
class EaeReduction:
    """Output of ``eae_reduction``: the formula and what went into it."""

    formula: object
    tight: object
    patched: tuple  # KiefeFormula per component
    atoms: tuple  # (component index, k) pairs used

    def reports(self) -> list:
        return [p.report.as_dict() if p.report is not None else None for p in self.patched]


def eae_reduction(phi, provider=None, N: int = DEFAULT_N, M: int = DEFAULT_M, check: bool = True) -> EaeReduction:
    """tighten → E-set form → per-component kiefe_patch → E_{ψ,k} per atom."""
    from .ba.tight import e_set_form, tighten

    provider = provider or identity_provider
    td = tighten(phi)
    es = e_set_form(td)
    patched = []
    for theta in td.components:
        psi = _formula_of(provider(theta))
        patched.append(kiefe_patch(theta, psi, N, M, check=check))
    used = []
    names = _supply(phi, *[p.formula for p in patched])

    def go(f):
        if isinstance(f, Atomic):
            i = int(f.terms[0].name[1:]) - 1
            k = atl_index(f.relation)
            used.append((i, k))
            return e_formula(patched[i], k, names)
        if isinstance(f, Not):
            return Not(go(f.body))
        return type(f)(go(f.left), go(f.right))

    out = go(es.sigma)
    return EaeReduction(out, td, tuple(patched), tuple(used))


def reduce_to_eae(phi, provider=None, N: int = DEFAULT_N, M: int = DEFAULT_M, check: bool = True):
    """A Boolean combination of ∃∀∃ formulas equivalent to φ over products of fields ≤ M."""
    return eae_reduction(phi, provider, N, M, check).formula
