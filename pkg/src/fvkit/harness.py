"""Seeded differential checks: transformed objects against direct evaluation.

A check evaluates φ directly on a product and compares it, tuple by tuple,
with the value predicted by a transformed object (an acceptable sequence,
a tight decomposition, an ∃∀∃ formula).  Tuples are enumerated exhaustively
when there are at most ``limit`` of them, otherwise ``limit`` tuples are
drawn from the seeded generator.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import FvkitError
from .formula import Exists, Forall, Not, free_variables
from .fv import decompose
from .generate import FIELD_POOL, RingShape, product_spec, random_field_product, ring_corpus
from .model import evaluate_acceptable_batch, evaluate_product_batch
from .render import render
from .structures import parse_products

DEFAULT_LIMIT = 200


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one differential check."""

    passed: bool
    checked: int
    exhaustive: bool
    counterexample: dict | None = None
    mismatches: int = 0

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} ({self.checked - self.mismatches}/{self.checked} tuples)"

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "exhaustive": self.exhaustive,
            "mismatches": self.mismatches,
            "counterexample": self.counterexample,
        }


def sample_rows(P, arity: int, rng: random.Random, limit: int = DEFAULT_LIMIT):
    """(rows, exhaustive): all tuples if there are ≤ limit, else ``limit`` seeded samples."""
    if P.size**arity <= limit:
        return list(itertools.product(range(P.size), repeat=arity)), True
    return [tuple(rng.randrange(P.size) for _ in range(arity)) for _ in range(limit)], False


def _batch(variables, rows) -> dict:
    return {v: np.array([r[j] for r in rows], dtype=np.int64) for j, v in enumerate(variables)}


def compare(P, phi, predicted, variables=None, rng=None, limit: int = DEFAULT_LIMIT) -> CheckResult:
    """Compare φ with ``predicted(P, batch) -> bool array`` on sampled tuples."""
    variables = sorted(free_variables(phi)) if variables is None else list(variables)
    rng = rng or random.Random(0)
    rows, exhaustive = sample_rows(P, len(variables), rng, limit)
    batch = _batch(variables, rows)
    want = evaluate_product_batch(P, phi, batch)
    got = np.asarray(predicted(P, batch), dtype=bool)
    bad = np.nonzero(want != got)[0]
    if len(bad):
        r = rows[int(bad[0])]
        cex = {
            "tuple": {v: list(P.coordinates(e)) for v, e in zip(variables, r)},
            "direct": bool(want[bad[0]]),
            "predicted": bool(got[bad[0]]),
        }
        return CheckResult(False, len(rows), exhaustive, cex, int(len(bad)))
    return CheckResult(True, len(rows), exhaustive)


def check_sequence(P, phi, xi, rng=None, limit: int = DEFAULT_LIMIT) -> CheckResult:
    """evaluate_acceptable(ξ) against evaluate_product(φ)."""
    return compare(P, phi, lambda P_, batch: evaluate_acceptable_batch(P_, xi, batch), rng=rng, limit=limit)


def check_formula(P, phi, psi, rng=None, limit: int = DEFAULT_LIMIT) -> CheckResult:
    """Two base-language formulas with the same free variables."""
    return compare(P, phi, lambda P_, batch: evaluate_product_batch(P_, psi, batch), rng=rng, limit=limit)


# ---------------------------------------------------------------------------
# the decomposition fuzz harness


@dataclass(frozen=True)
class FuzzCase:
    case: int
    formula: str
    products: str
    result: CheckResult | None
    error: str | None = None
    minimized: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.result is not None and self.result.passed

    def as_dict(self) -> dict:
        out = {"case": self.case, "formula": self.formula, "products": self.products, "passed": self.passed}
        if self.result is not None:
            out["checked"] = self.result.checked
            out["exhaustive"] = self.result.exhaustive
            if self.result.counterexample is not None:
                out["counterexample"] = self.result.counterexample
        if self.error is not None:
            out["error"] = self.error
        if self.minimized is not None:
            out["minimized"] = self.minimized
        return out


@dataclass
class FuzzReport:
    seed: int
    cases: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(1 for c in self.cases if c.passed)

    @property
    def failed(self) -> list:
        return [c for c in self.cases if not c.passed]

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "cases": len(self.cases),
            "passed": self.passed,
            "failed": [c.as_dict() for c in self.failed],
            "tuples_checked": sum(c.result.checked for c in self.cases if c.result is not None),
        }


def _subformulas(f):
    """Proper subformulas, largest first (candidates for shrinking)."""
    out = []
    stack = [f]
    while stack:
        g = stack.pop(0)
        kids = []
        if isinstance(g, Not):
            kids = [g.body]
        elif isinstance(g, (Exists, Forall)):
            kids = [g.body]
        elif hasattr(g, "left"):
            kids = [g.left, g.right]
        out += kids
        stack += kids
    return out


def shrink(phi, fails) -> object:
    """Greedy shrinking: replace φ by a failing proper subformula while one exists."""
    current = phi
    progress = True
    while progress:
        progress = False
        for g in _subformulas(current):
            if free_variables(g) and fails(g):
                current = g
                progress = True
                break
    return current


def fuzz_decompose(
    seed: int = 0,
    count: int = 500,
    shape: RingShape = RingShape(),
    pool=FIELD_POOL,
    max_factors: int = 4,
    limit: int = DEFAULT_LIMIT,
    decomposer=decompose,
) -> FuzzReport:
    """Decompose ``count`` seeded random formulas and check each on a random product.

    The corpus comes from ``seed``; products and samples from ``seed + 1``.
    Failing cases are shrunk to a smaller failing subformula.
    """
    corpus = ring_corpus(seed, count, shape)
    rng = random.Random(seed + 1)
    report = FuzzReport(seed)
    for i, phi in enumerate(corpus):
        orders = random_field_product(rng, pool, max_factors)
        spec = product_spec(orders)
        P = parse_products(spec)
        sample_seed = rng.randrange(2**63)
        try:
            res = check_sequence(P, phi, decomposer(phi), rng=random.Random(sample_seed), limit=limit)
        except FvkitError as exc:
            report.cases.append(FuzzCase(i, render(phi), spec, None, f"{type(exc).__name__}: {exc}"))
            continue
        minimized = None
        if not res.passed:

            def fails(g):
                try:
                    return not check_sequence(P, g, decomposer(g), rng=random.Random(sample_seed), limit=limit).passed
                except FvkitError:
                    return False

            minimized = render(shrink(phi, fails))
        report.cases.append(FuzzCase(i, render(phi), spec, res, minimized=minimized))
    return report
