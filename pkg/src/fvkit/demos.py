"""Demonstration scenarios: mixing witnesses and the Ψ₂ anomaly.

A definable subset X of a product of fields is a finite Boolean
combination of sets that, away from finitely many indices, are unions of
basic open sets.  Its contrapositive is used to show
nondefinability: if for every finite Λ₀ and every value c̄ on Λ₀ the
cylinder {ā : ā[Λ₀] = c̄} contains points both inside and outside X, X is
not definable.

The infinite product ∏_p F_p is modelled by a finite *window*: one factor
per index of interest plus one extra factor standing for the tail (all the
remaining indices).  Membership in X is decided from the window
coordinates by the rule the example gives for the full product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .gf import prime_powers_upto
from .kiefe import field_sentence
from .model import CylinderSpec, evaluate, mixing_witness
from .render import render
from .structures import direct_product, finite_field

LAMBDA = (2, 3, 5, 7, 11)  # indices the cylinders may fix
TAIL = 13  # factor standing for the indices outside the window


def window_product(primes=LAMBDA, tail: int = TAIL):
    factors = [finite_field(p) for p in primes] + [finite_field(tail)]
    labels = [f"F{p}" for p in primes] + ["tail"]
    return direct_product(factors, labels)


def _crt(residues: dict, moduli) -> int:
    """The least n ≥ 0 with n ≡ residues[m] (mod m) for every listed modulus."""
    n, step = 0, 1
    for m in moduli:
        r = residues.get(m, 0)
        while n % m != r:
            n += step
        step *= m
    return n


@dataclass(frozen=True)
class DemoCase:
    fixed: tuple  # labels in Λ₀
    values: tuple  # c̄, one element id per fixed label
    inside: tuple | None
    outside: tuple | None

    @property
    def found(self) -> bool:
        return self.inside is not None and self.outside is not None

    def as_dict(self, P) -> dict:
        def coords(t):
            return None if t is None else [list(P.coordinates(e)) for e in t]

        return {
            "fixed": list(self.fixed),
            "values": list(self.values),
            "inside": coords(self.inside),
            "outside": coords(self.outside),
            "found": self.found,
        }


def _cylinders(P, primes):
    labels = [f"F{p}" for p in primes]
    for r in range(len(labels) + 1):
        for fixed in itertools.combinations(labels, r):
            ranges = [range(P.sizes[P.labels.index(lab)]) for lab in fixed]
            for values in itertools.product(*ranges):
                yield fixed, values


def copyz(primes=LAMBDA, tail: int = TAIL) -> tuple:
    """Mixing witnesses for the image of ℤ in ∏_p F_p .

    A window point is the image of an integer n when every coordinate is
    n mod its index, where n ∈ [0, ∏ primes) is fixed by the coordinates at
    ``primes`` (Chinese remaindering); the tail factor carries n mod ``tail``.
    For a cylinder fixing c̄ on Λ₀ the inside witness is the image of the
    least n with n ≡ c̄ on Λ₀; the outside witness resets the tail
    coordinate (to 0, or to 1 when n ≡ 0 there), which no integer agreeing
    with n on the window can match.
    """
    P = window_product(primes, tail)
    k = len(primes)

    def integer_of(point) -> int:
        coords = P.coordinates(point)
        return _crt({p: int(P.factors[i].names[coords[i]]) for i, p in enumerate(primes)}, primes)

    def member(tup) -> bool:
        (a,) = tup
        n = integer_of(a)
        return P.coordinates(a)[k] == n % tail

    def image(n: int) -> int:
        return P.element([n % p for p in primes] + [n % tail])

    cases = []
    for fixed, values in _cylinders(P, primes):
        residues = {int(lab[1:]): v for lab, v in zip(fixed, values)}
        n = _crt(residues, sorted(residues))
        a = image(n)
        coords = list(P.coordinates(a))
        coords[k] = 0 if coords[k] else 1  # a fresh tail coordinate off Λ₀
        b = P.element(coords)
        cyl = CylinderSpec(fixed, {lab: (v,) for lab, v in zip(fixed, values)})
        w = mixing_witness(P, member, cyl, budget=0, candidates=[(a,), (b,)])
        cases.append(DemoCase(fixed, values, w.inside, w.outside))
    return P, cases


def direct_sum(primes=LAMBDA, tail: int = TAIL) -> tuple:
    """Mixing witnesses for the finite-support set ⊕_p F_p .

    An element lies in the direct sum when all but finitely many of its
    coordinates are 0.  In the window the tail factor stands for the
    cofinite remainder, so a point is a member iff its tail coordinate is 0.
    Witnesses pad c̄ with a zero tail (inside) and a non-zero tail (outside).
    """
    P = window_product(primes, tail)
    k = len(primes)

    def member(tup) -> bool:
        (a,) = tup
        return P.coordinates(a)[k] == 0

    cases = []
    for fixed, values in _cylinders(P, primes):
        base = [0] * (k + 1)
        for lab, v in zip(fixed, values):
            base[P.labels.index(lab)] = v
        padded = list(base)
        padded[k] = 1
        cyl = CylinderSpec(fixed, {lab: (v,) for lab, v in zip(fixed, values)})
        w = mixing_witness(P, member, cyl, budget=0, candidates=[(P.element(base),), (P.element(padded),)])
        cases.append(DemoCase(fixed, values, w.inside, w.outside))
    return P, cases


def psi2_anomaly(fields=(2, 4, 8), M: int = 64) -> list:
    """Truth of the literal Ψ₂ and of the strengthened Ψ₂ in the listed fields."""
    literal = field_sentence(2, literal=True).formula
    strong = field_sentence(2, M).formula
    rows = []
    for q in fields:
        F = finite_field(q)
        rows.append({"field": f"F{q}", "literal": evaluate(F, literal, {}), "strengthened": evaluate(F, strong, {})})
    return rows


def psi_exactness(M: int = 64) -> list:
    """Pairs (q, q′) of prime powers ≤ M with F_{q′} ⊨ Ψ_q but q ≠ q′ (expected: none)."""
    qs = prime_powers_upto(M)
    bad = []
    for q in qs:
        sentence = field_sentence(q, M).formula
        for q2 in qs:
            if evaluate(finite_field(q2), sentence, {}) != (q == q2):
                bad.append((q, q2))
    return bad


def literal_psi_text(q: int = 2) -> str:
    return render(field_sentence(q, literal=True).formula)
