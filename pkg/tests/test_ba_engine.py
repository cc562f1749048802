"""Boolean algebras with atom-count predicates: validity, elimination, tight decompositions."""

import itertools

import pytest

from fvkit.ba.oracle import infinite_ba_valid
from fvkit.ba.qe import ba_eliminate_quantifiers
from fvkit.ba.tight import absorb_and_strip, e_set_form, is_tight, tight_violations, tighten
from fvkit.formula import Iff, Implies, free_variables, is_quantifier_free
from fvkit.generate import bool_corpus
from fvkit.model import evaluate_powerset, k_set
from fvkit.parser import parse_formula
from fvkit.render import render
from fvkit.structures import IndexSet, parse_products

from oracles import RefProduct, holds_in_powerset, holds_in_product, ref_infinite_valid


def B(text):
    return parse_formula(text, "boolean")


def test_divergence_witness():
    phi = B("E y. (Atl[2](y) & Atl[2](comp(y)))")
    assert infinite_ba_valid(phi).valid
    assert ref_infinite_valid(phi, [])
    assert not holds_in_powerset(3, phi, {})
    assert not evaluate_powerset(("a", "b", "c"), phi, {})


def test_validity_examples():
    assert infinite_ba_valid(B("Atl[1](1)")).valid
    assert infinite_ba_valid(B("y = y")).valid
    verdict = infinite_ba_valid(B("Atl[2](y)"))
    assert not verdict.valid and verdict.counterexample is not None


@pytest.mark.parametrize("seed", range(4))
def test_oracle_matches_reference_counts(seed):
    for phi in bool_corpus(seed, 25, variables=2, max_quantifiers=1, max_k=3, max_depth=3):
        variables = sorted(free_variables(phi))
        assert infinite_ba_valid(phi).valid == ref_infinite_valid(phi, variables), render(phi)


def test_oracle_matches_reference_on_sentences():
    for phi in bool_corpus(7, 30, variables=2, max_quantifiers=2, max_k=3, max_depth=3):
        if free_variables(phi):
            continue
        assert infinite_ba_valid(phi).valid == ref_infinite_valid(phi, []), render(phi)


def test_qe_examples():
    out = ba_eliminate_quantifiers(B("E y. (Atl[2](y) & meet(y, z) = y)"))
    assert is_quantifier_free(out)
    assert infinite_ba_valid(Iff(out, B("Atl[2](z)"))).valid
    qf = B("Atl[1](meet(y, z)) | y = 0")
    assert ba_eliminate_quantifiers(qf) == qf
    assert infinite_ba_valid(ba_eliminate_quantifiers(B("E y. y = z"))).valid


@pytest.mark.parametrize("seed", range(3))
def test_qe_certified_by_reference(seed):
    for phi in bool_corpus(50 + seed, 15, variables=2, max_quantifiers=1, max_k=3, max_depth=3):
        out = ba_eliminate_quantifiers(phi)
        assert is_quantifier_free(out)
        assert ref_infinite_valid(Iff(phi, out), sorted(free_variables(phi))), render(phi)


def test_absorb_and_strip_triangle():
    phi, psi = parse_formula("x = 0"), parse_formula("x*x = x")
    td = absorb_and_strip(B("Atl[1](meet(y1, comp(y2)))"), (phi, psi))
    assert is_tight(td.sigma)
    assert td.m == 1
    # the one component is φ ∧ ¬ψ
    R = RefProduct((2, 3, 5))
    for a in R.elements():
        comp_truth = [holds_in_product(RefProduct((q,)), td.components[0], {"x": (c,)}) for q, c in zip((2, 3, 5), a)]
        want = [
            holds_in_product(RefProduct((q,)), phi, {"x": (c,)}) and not holds_in_product(RefProduct((q,)), psi, {"x": (c,)})
            for q, c in zip((2, 3, 5), a)
        ]
        assert comp_truth == want


def test_absorb_and_strip_equality():
    phi, psi = parse_formula("x = 0"), parse_formula("x = 1")
    td = absorb_and_strip(B("y1 = y2"), (phi, psi))
    assert not tight_violations(td.sigma)
    assert render(td.sigma).startswith("~(Atl[1]")
    P = parse_products("F2xF3xF5")
    for e in range(P.size):
        same = k_set(P, phi, {"x": e}) == k_set(P, psi, {"x": e})
        assert e_set_form(td).holds(P, {"x": e}) == same


def test_absorb_and_strip_constant():
    td = absorb_and_strip(B("Atl[3](1)"), ())
    assert render(td.sigma) == "Atl[3](y1)"
    P = parse_products("F2xF3")
    assert k_set(P, td.components[0], {}).members() == list(P.labels)


def test_tighten_atomic():
    td = tighten(parse_formula("x = 0"))
    assert not tight_violations(td.sigma)
    P = parse_products("F2xF3xF5")
    for e in range(P.size):
        assert e_set_form(td).holds(P, {"x": e}) == (P.coordinates(e) == (0, 0, 0))


def test_tighten_units():
    phi = parse_formula("E t. x*t = 1")
    td = tighten(phi)
    assert is_tight(td.sigma)
    assert all(c.valid for c in td.certificates)
    P = parse_products("F2xF3xF5")
    R = RefProduct((2, 3, 5))
    for e in range(P.size):
        assert e_set_form(td).holds(P, {"x": e}) == holds_in_product(R, phi, {"x": P.coordinates(e)})


def test_tighten_tautology():
    td = tighten(parse_formula("A t. t = t"))
    # the only component, E t. ~(t = t), has empty K everywhere; under that
    # constraint sigma is valid in every state
    assert render(td.components[0]) == "E t. ~(t = t)"
    assert infinite_ba_valid(Implies(B("y1 = 0"), td.sigma)).valid
    for spec in ["F2", "F2xF3", "F4xF5xF7"]:
        assert e_set_form(td).holds(parse_products(spec), {})


def test_e_set_form_examples():
    th = parse_formula("x = 0")
    es = e_set_form(absorb_and_strip(B("Atl[2](y1)"), (th,)))
    assert es.atoms() == [(th, 2)]
    P = parse_products("F2xF3xF5")
    assert es.holds(P, {"x": P.integer_image(6)})
    th2 = parse_formula("x = 1")
    es2 = e_set_form(absorb_and_strip(B("Atl[1](y1) & ~(Atl[3](y2))"), (th, th2)))
    assert es2.render() == "(E[1](x = 0) & ~(E[3](x = 1)))"


def test_tight_scan_rejects():
    assert tight_violations(B("y1 = y2"))
    assert tight_violations(B("E y. Atl[1](y)"))
    assert tight_violations(B("Atl[1](meet(y1, y2))"))
    assert not tight_violations(B("Atl[1](y1) | ~(Atl[2](y2))"))
