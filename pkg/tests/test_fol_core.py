"""Syntax: parsing, rendering, free variables, substitution, prenex forms, polynomials."""

import random

import pytest

from fvkit.formula import Atomic, Exists, Var, free_variables, mul, quantifier_count, substitute
from fvkit.generate import RingShape, ring_corpus
from fvkit.parser import ParseError, parse_formula, parse_term
from fvkit.polynomial import Polynomial, atomic_polynomial, polynomial_to_term, term_to_polynomial
from fvkit.prenex import quantifier_shape, to_prenex
from fvkit.render import render, render_formula

from oracles import RefProduct, holds_in_product


def test_parse_atomic():
    x = Var("x")
    assert parse_formula("x*x = x") == Atomic("=", (mul(x, x), x))


def test_parse_exists():
    assert parse_formula("E t. t*t = x") == Exists("t", Atomic("=", (mul(Var("t"), Var("t")), Var("x"))))


def test_render_parse_round_trip():
    f = parse_formula("x*x = y")
    assert parse_formula(render_formula(f)) == f


def test_render_examples():
    assert render(parse_formula("x = x")) == "x = x"
    assert render(parse_formula("~(x = 0)")) == "~(x = 0)"


def test_nested_quantifiers_round_trip():
    f = parse_formula("A x. (E y. (x*y = 1 | A z. z = x) -> ~(E t. t + t = x))")
    assert parse_formula(render(f)) == f


@pytest.mark.parametrize("seed", range(5))
def test_random_round_trip(seed):
    for f in ring_corpus(seed, 40, RingShape()):
        assert parse_formula(render(f)) == f


@pytest.mark.parametrize("text", ["x = = 1", "E . x = 1", "x = 1 &", "(x = 1", "x ? y"])
def test_parse_errors_carry_positions(text):
    with pytest.raises(ParseError) as info:
        parse_formula(text)
    assert info.value.position >= 0
    assert "^" in str(info.value)


def test_free_variables():
    assert free_variables(parse_formula("x = 0")) == {"x"}
    assert free_variables(parse_formula("E t. t*x = 1")) == {"x"}
    assert free_variables(parse_formula("A y. y = y")) == set()


def test_substitute_constant():
    f = substitute(parse_formula("x = 0"), {"x": parse_term("1")})
    assert render(f) == "1 = 0"


def test_substitute_avoids_capture():
    f = substitute(parse_formula("E t. t = x"), {"x": Var("t")})
    assert isinstance(f, Exists) and f.var != "t"
    assert free_variables(f) == {"t"}
    # the bound variable is still the one the body equates with the free t
    assert f.body.terms[0] == Var(f.var) and f.body.terms[1] == Var("t")


def test_substitute_identity():
    f = parse_formula("E t. (t*x = 1 & y = x)")
    assert substitute(f, {"x": Var("x")}) == f


def test_prenex_examples():
    assert render(to_prenex(parse_formula("(E t. t = x) & x = 0"))) == "E t. (t = x & x = 0)"
    qf = parse_formula("x = 0 | ~(x*y = 1)")
    assert to_prenex(qf) == qf
    assert render(to_prenex(parse_formula("~(A t. t = x)"))) == "E t. ~(t = x)"


def test_prenex_preserves_meaning():
    P = RefProduct((2, 3))
    elems = list(P.elements())
    for f in ring_corpus(11, 30, RingShape(arity=1)):
        g = to_prenex(f)
        assert len(quantifier_shape(g).word) == quantifier_count(g)
        for a in elems:
            env = {v: a for v in free_variables(f)}
            assert holds_in_product(P, f, env) == holds_in_product(P, g, env), render(f)


def test_quantifier_shape_examples():
    s = quantifier_shape(parse_formula("E x. A y. E z. x*y = z"))
    assert s.word == "∃∀∃" and s.eae
    s = quantifier_shape(parse_formula("x = 0"))
    assert s.word == "" and s.eae
    assert not quantifier_shape(parse_formula("A x. E y. A z. x = y")).eae


def test_polynomial_normal_form():
    p = term_to_polynomial(parse_term("(x + 1)*(x - 1)"))
    assert p == term_to_polynomial(parse_term("x*x - 1"))
    assert term_to_polynomial(parse_term("x - x")) == Polynomial({})
    assert atomic_polynomial(parse_formula("x*x = x")) == term_to_polynomial(parse_term("x*x - x"))


def test_polynomial_term_round_trip():
    rng = random.Random(3)
    for _ in range(50):
        a, b = rng.randrange(-3, 4), rng.randrange(-3, 4)
        t = parse_term(f"({a})*x*y + ({b})*y - x*x")
        p = term_to_polynomial(t)
        assert term_to_polynomial(polynomial_to_term(p)) == p
