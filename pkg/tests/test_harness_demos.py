"""Differential harness and demonstration scenarios."""

import random

from fvkit import fv
from fvkit.demos import LAMBDA, copyz, direct_sum, psi2_anomaly, psi_exactness, window_product
from fvkit.fv import AcceptableSequence, decompose
from fvkit.formula import Not
from fvkit.harness import check_sequence, fuzz_decompose, sample_rows, shrink
from fvkit.parser import parse_formula
from fvkit.structures import parse_products


def test_check_sequence_exhaustive_summary():
    P = parse_products("F2xF3")
    phi = parse_formula("E t. x*t = 1")
    res = check_sequence(P, phi, decompose(phi))
    assert res.passed and res.exhaustive
    assert res.summary() == "PASS (6/6 tuples)"


def test_check_sequence_reports_counterexample():
    P = parse_products("F2xF3")
    phi = parse_formula("x = 0")
    xi = decompose(phi)
    wrong = AcceptableSequence(Not(xi.bool_formula), xi.components)
    res = check_sequence(P, phi, wrong)
    assert not res.passed and res.mismatches == 6
    assert set(res.counterexample) == {"tuple", "direct", "predicted"}


def test_sampling_is_seeded():
    P = parse_products("F5xF7")
    a, ex = sample_rows(P, 2, random.Random(4))
    b, _ = sample_rows(P, 2, random.Random(4))
    assert a == b and len(a) == 200 and not ex


def test_shrink_finds_failing_subformula():
    phi = parse_formula("x = 1 | (E t. x*t = 0)")
    small = shrink(phi, lambda g: g == parse_formula("x = 1"))
    assert small == parse_formula("x = 1")


def test_fuzz_small_run_passes_and_is_deterministic():
    a = fuzz_decompose(seed=5, count=30)
    b = fuzz_decompose(seed=5, count=30)
    assert a.passed == 30
    assert a.as_dict() == b.as_dict()


def test_fuzz_detects_injected_bug(monkeypatch):
    orig = fv.combine

    def negated(op, x, y=None):
        out = orig(op, x, y)
        return AcceptableSequence(Not(out.bool_formula), out.components) if op in ("and", "&") else out

    monkeypatch.setattr(fv, "combine", negated)
    rep = fuzz_decompose(seed=0, count=30)
    assert rep.failed
    bad = rep.failed[0]
    assert bad.result.counterexample is not None and bad.minimized


def test_window():
    P = window_product()
    assert P.labels == ("F2", "F3", "F5", "F7", "F11", "tail")
    assert LAMBDA == (2, 3, 5, 7, 11)


def test_copyz_example_case():
    P, cases = copyz()
    case = next(c for c in cases if c.fixed == ("F2", "F3") and c.values == (1, 2))
    inside = P.coordinates(case.inside[0])
    assert inside == (1, 2, 0, 5, 5, 5)  # the image of 5 (tail F13)
    outside = P.coordinates(case.outside[0])
    assert outside[:2] == (1, 2) and outside[-1] != 5
    assert all(c.found for c in cases)
    assert len(cases) == 3 * 4 * 6 * 8 * 12


def test_direct_sum_witnesses():
    P, cases = direct_sum()
    assert all(c.found for c in cases)
    for c in cases[:50]:
        assert P.coordinates(c.inside[0])[-1] == 0
        assert P.coordinates(c.outside[0])[-1] != 0


def test_psi2_anomaly_rows():
    rows = psi2_anomaly()
    assert [(r["field"], r["literal"]) for r in rows] == [("F2", True), ("F4", False), ("F8", True)]
    assert [r["strengthened"] for r in rows] == [True, False, False]


def test_psi_exactness_small_margin():
    assert psi_exactness(16) == []
