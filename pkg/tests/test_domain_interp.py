"""Idempotent interpretation of P(Λ), representation formulas, definitions of sequences."""

import itertools

import numpy as np
import pytest

from fvkit.formula import free_variables
from fvkit.fv import AcceptableSequence, decompose
from fvkit.interp import (
    KIT,
    define_acceptable,
    idempotent_kit,
    is_positive_primitive,
    represent,
    representation_table,
    upsilon_atomic,
    upsilon_boolean,
    upsilon_exists,
)
from fvkit.kiefe import upsilon_field_atomic
from fvkit.model import evaluate_product, evaluate_product_batch
from fvkit.parser import parse_formula, parse_term
from fvkit.structures import parse_products

from oracles import RefProduct, holds_in_product, ref_k_set


def indicator(P, positions):
    return P.element([1 if i in positions else 0 for i in range(len(P.factors))])


def check_representation(spec, theta, ups, y="y"):
    """Υ(ā, b) holds iff b is the indicator of K_θ(ā), for every ā and b."""
    P = parse_products(spec)
    R = RefProduct(tuple(f.size for f in P.factors))
    variables = sorted(free_variables(theta))
    table = representation_table(P, ups, variables, y)
    for point in itertools.product(range(P.size), repeat=len(variables)):
        env = {v: P.coordinates(e) for v, e in zip(variables, point)}
        want = indicator(P, ref_k_set(R, theta, env))
        row = table[point] if variables else table
        assert list(np.nonzero(row)[0]) == [want], (spec, point)


def test_kit_idempotents():
    P = parse_products("F2xF3")
    idem = {P.coordinates(e) for e in range(P.size) if evaluate_product(P, KIT.apply("B", "x"), {"x": e})}
    assert idem == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert KIT.decode(P, (1, 0)).members() == ["F2"]


def test_kit_is_positive_primitive():
    kit = idempotent_kit()
    assert len(kit.names()) == 7
    assert all(is_positive_primitive(kit.formulas[n]) for n in kit.names())


def test_kit_operations_match_sets():
    P = parse_products("F2xF3xF5")
    idems = [indicator(P, set(s)) for r in range(4) for s in itertools.combinations(range(3), r)]
    for a, b in itertools.product(idems, repeat=2):
        A, B = set(KIT.decode(P, a).members()), set(KIT.decode(P, b).members())
        for c in idems:
            C = set(KIT.decode(P, c).members())
            asg = {"a": a, "b": b, "c": c}
            assert evaluate_product(P, KIT.apply("meet", "a", "b", "c"), asg) == (C == A & B)
            assert evaluate_product(P, KIT.apply("join", "a", "b", "c"), asg) == (C == A | B)
        assert evaluate_product(P, KIT.apply("comp", "a", "b"), {"a": a, "b": b}) == (B == set(P.labels) - A)


def test_upsilon_atomic_example():
    P = parse_products("F2xF3")
    ups = upsilon_atomic(parse_term("x"))
    a = P.element((1, 0))
    ys = [b for b in range(P.size) if evaluate_product(P, ups, {"x": a, "y": b})]
    assert [P.coordinates(b) for b in ys] == [(0, 1)]
    assert KIT.decode(P, ys[0]).members() == ["F3"]


def test_upsilon_atomic_constants():
    P = parse_products("F2xF3")
    one, zero = P.element((1, 1)), P.element((0, 0))
    for F, want in [(parse_term("0"), one), (parse_term("1"), zero)]:
        ups = upsilon_atomic(F)
        assert [b for b in range(P.size) if evaluate_product(P, ups, {"y": b})] == [want]


def test_upsilon_atomic_reference_evaluation():
    # one case evaluated entirely with the reference semantics
    R = RefProduct((2, 3))
    ups = upsilon_atomic(parse_term("x*x - x"))
    for a in R.elements():
        for b in R.elements():
            want = tuple(1 if (c * c - c) % q == 0 else 0 for c, q in zip(a, (2, 3))) == b
            assert holds_in_product(R, ups, {"x": a, "y": b}) == want


def test_upsilon_boolean_examples():
    x0 = upsilon_atomic(parse_term("x"))
    never = upsilon_atomic(parse_term("1"))
    P = parse_products("F2xF3")
    ups = upsilon_boolean("and_not", x0, x0)
    for a in range(P.size):
        assert [b for b in range(P.size) if evaluate_product(P, ups, {"x": a, "y": b})] == [P.element((0, 0))]
    check_representation("F2xF3", parse_formula("x = 0"), upsilon_boolean("and_not", x0, never))
    x1 = upsilon_atomic(parse_term("x - 1"))
    for op, text in [("and", "x = 0 & x = 1"), ("or", "x = 0 | x = 1"), ("and_not", "x = 0 & ~(x = 1)")]:
        check_representation("F2xF3", parse_formula(text), upsilon_boolean(op, x0, x1))
    check_representation("F2xF3", parse_formula("~(x = 0)"), upsilon_boolean("not", x0))


def test_upsilon_exists_units():
    theta = parse_formula("E z. x*z = 1")
    ups = upsilon_exists(upsilon_atomic(parse_term("x*z - 1")), "z")
    check_representation("F2xF3", theta, ups)


def test_upsilon_exists_unused_variable():
    theta = parse_formula("E z. x = 0")
    check_representation("F2xF3", theta, upsilon_exists(upsilon_atomic(parse_term("x")), "z"))


def test_upsilon_exists_tautology():
    P = parse_products("F2xF3")
    ups = upsilon_exists(upsilon_atomic(parse_term("z - z")), "z")
    assert [b for b in range(P.size) if evaluate_product(P, ups, {"y": b})] == [P.element((1, 1))]


@pytest.mark.parametrize(
    "text",
    [
        "x = 0",
        "x*x = x",
        "~(x*y = 1)",
        "x = 0 | y = 1",
        "x = 1 -> y = 0",
        "E t. t*t = x",
        "A t. (t*t = t -> t*x = t)",
        "E t. (x*t = 1 & ~(t = y))",
    ],
)
@pytest.mark.parametrize("spec", ["F2xF3", "F4xF3", "F2xF5"])
def test_represent_constructor_corpus(text, spec):
    theta = parse_formula(text)
    check_representation(spec, theta, represent(theta, "b"), "b")


@pytest.mark.parametrize("spec", ["F2xF3", "F3xF5", "F2xF3xF4"])
def test_field_atomic_agrees_with_general(spec):
    P = parse_products(spec)
    for text in ["x", "x*x - x", "x*y - 1", "x + y + 1", "2*x"]:
        F = parse_term(text)
        variables = sorted(set("xy") & set(text))
        a = representation_table(P, upsilon_atomic(F, "y0"), variables, "y0")
        b = representation_table(P, upsilon_field_atomic(F, "y0"), variables, "y0")
        assert np.array_equal(a, b), (spec, text)


def test_define_acceptable_atomic():
    phi = parse_formula("x*x = x")
    xi = AcceptableSequence(parse_formula("y1 = 1", "boolean"), (phi,))
    delta = define_acceptable(xi)
    P = parse_products("F2xF3")
    for e in range(P.size):
        assert evaluate_product(P, delta, {"x": e}) == evaluate_product(P, phi, {"x": e})


def test_define_acceptable_count():
    xi = AcceptableSequence(parse_formula("Atl[2](y1)", "boolean"), (parse_formula("x = 0"),))
    delta = define_acceptable(xi)
    P = parse_products("F2xF3xF5")
    got = evaluate_product_batch(P, delta, {"x": np.arange(P.size)})
    want = [sum(c == 0 for c in P.coordinates(e)) >= 2 for e in range(P.size)]
    assert list(got) == want


def test_define_acceptable_tautology():
    xi = AcceptableSequence(parse_formula("0 = 0", "boolean"), (parse_formula("x = 1"),))
    delta = define_acceptable(xi)
    P = parse_products("F2xF3")
    assert all(evaluate_product(P, delta, {"x": e}) for e in range(P.size))


@pytest.mark.parametrize("text", ["E t. x*t = 1", "x = 0 | ~(x*x = x)", "A t. (x*t = 0 -> t = 0)"])
def test_define_acceptable_round_trip(text):
    phi = parse_formula(text)
    delta = define_acceptable(decompose(phi))
    for spec in ["F2xF3", "F2xF3xF5"]:
        P = parse_products(spec)
        got = evaluate_product_batch(P, delta, {"x": np.arange(P.size)})
        want = evaluate_product_batch(P, phi, {"x": np.arange(P.size)})
        assert np.array_equal(got, want)
