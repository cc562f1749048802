"""Command-line drivers and JSON run reports.

Subcommands: parse, eval, decompose, tighten, eae, interp, demo, fuzz.
Every run assembles a report (schema ``fvkit-report/1``).  With ``--json``
it is written to a file, or to stdout when the path is ``-``.  Reports
contain no timings unless ``--timing`` is given, so the same inputs and
seed give byte-identical reports.

Exit codes: 0 success, 2 parse error, 3 resource bound, 4 certificate
failure, 5 provider contract failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from contextlib import contextmanager
from unittest import mock

from . import __version__
from .errors import BoundExceeded, CertificateFailure, FvkitError, ProviderError
from .formula import Not, free_variables
from .parser import ParseError, parse_formula
from .prenex import quantifier_shape
from .render import render
from .structures import parse_products, structure_from_json

SCHEMA = "fvkit-report/1"
EXIT_OK, EXIT_PARSE, EXIT_BOUND, EXIT_CERT, EXIT_PROVIDER = 0, 2, 3, 4, 5


class Report:
    """Single-writer report assembly."""

    def __init__(self, command: str, timing: bool = False):
        self.data = {"schema": SCHEMA, "version": __version__, "command": command, "inputs": {}, "outputs": {}}
        self.certificates: list = []
        self.timing = {} if timing else None
        self.lines: list = []

    def say(self, line: str = ""):
        self.lines.append(line)

    def certificate(self, name: str, passed: bool, **detail):
        self.certificates.append({"name": name, "passed": bool(passed), **detail})

    @contextmanager
    def timed(self, label: str):
        start = time.perf_counter()
        yield
        if self.timing is not None:
            self.timing[label] = round(time.perf_counter() - start, 6)

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.certificates)

    def finish(self, exit_code: int, error: str | None = None) -> dict:
        out = dict(self.data)
        out["certificates"] = self.certificates
        out["exit_code"] = exit_code
        if error is not None:
            out["error"] = error
        if self.timing is not None:
            out["timing"] = self.timing
        return out


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# inputs


def _products(specs) -> list:
    """Product specs: "F2xF3", inline JSON, or a path to a JSON file."""
    out = []
    for spec in specs:
        spec = spec.strip()
        if spec.startswith("{"):
            P = structure_from_json(json.loads(spec))
        elif spec.endswith(".json"):
            with open(spec, encoding="utf-8") as fh:
                P = structure_from_json(json.load(fh))
        else:
            P = parse_products(spec)
        out.append((spec, P))
    return out


def _product_label(P) -> str:
    return "x".join(P.labels)


def _formula(args, report: Report, flavor="ring"):
    if args.formula is None:
        raise ParseError("no formula given (use --formula)", 0)
    report.data["inputs"]["formula"] = args.formula
    return parse_formula(args.formula, flavor)


def _parse_value(P, text: str) -> int:
    """An element of P: "(1,2,0)" gives coordinates, an integer n gives n·1."""
    text = text.strip()
    if text.startswith("("):
        coords = [int(c) for c in text.strip("()").split(",") if c.strip()]
        if len(coords) != len(P.factors):
            raise ValueError(f"{text} has {len(coords)} coordinates, the product has {len(P.factors)} factors")
        return P.element(coords)
    return P.integer_image(int(text))


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args, report: Report) -> int:
    flavor = "boolean" if args.boolean else "ring"
    phi = _formula(args, report, flavor)
    shape = quantifier_shape(phi)
    report.data["outputs"] = {
        "formula": render(phi),
        "free_variables": sorted(free_variables(phi)),
        "shape": shape.as_dict(),
    }
    report.say(render(phi))
    report.say(f"free variables: {', '.join(sorted(free_variables(phi))) or '(none)'}")
    report.say(f"prefix: {shape.word or '(quantifier-free)'}")
    return EXIT_OK


def cmd_eval(args, report: Report) -> int:
    from .model import evaluate_product_batch

    phi = _formula(args, report)
    variables = sorted(free_variables(phi))
    results = []
    for spec, P in _products(args.products):
        asg = {}
        for item in args.assign or []:
            name, _, value = item.partition("=")
            asg[name.strip()] = _parse_value(P, value)
        missing = [v for v in variables if v not in asg]
        if missing:
            # tabulate all tuples over the missing variables
            import itertools

            import numpy as np

            if P.size ** len(missing) > args.limit:
                raise BoundExceeded(f"{P.size}^{len(missing)} tuples exceed --limit {args.limit}", bound="tuples")
            rows = list(itertools.product(range(P.size), repeat=len(missing)))
            batch = {v: np.array([r[j] for r in rows]) for j, v in enumerate(missing)}
            batch.update({v: np.full(len(rows), e) for v, e in asg.items()})
            truth = evaluate_product_batch(P, phi, batch)
            sat = [
                {v: list(P.coordinates(e)) for v, e in zip(missing, r)} for r, t in zip(rows, truth) if t
            ]
            results.append({"products": spec, "satisfying": len(sat), "of": len(rows), "tuples": sat})
            report.say(f"{_product_label(P)}: {len(sat)}/{len(rows)} tuples satisfy the formula")
        else:
            truth = bool(evaluate_product_batch(P, phi, {v: [asg[v]] for v in variables})[0])
            results.append({"products": spec, "value": truth})
            report.say(f"{_product_label(P)}: {'true' if truth else 'false'}")
    report.data["outputs"]["results"] = results
    return EXIT_OK


def _check_on_products(report: Report, name: str, args, check) -> bool:
    ok = True
    rng = random.Random(args.seed)
    for spec, P in _products(args.products):
        res = check(P, rng)
        detail = res.as_dict()
        del detail["passed"]
        report.certificate(name, res.passed, products=spec, **detail)
        report.say(f"certificate: {res.summary()} on {_product_label(P)}")
        if not res.passed:
            report.say(f"  counterexample: {json.dumps(res.counterexample, sort_keys=True)}")
        ok = ok and res.passed
    return ok


def cmd_decompose(args, report: Report) -> int:
    from .fv import decompose
    from .harness import check_sequence

    phi = _formula(args, report)
    with report.timed("decompose"):
        xi = decompose(phi, args.bound)
    report.data["outputs"]["sequence"] = xi.to_json()
    report.say(json.dumps(xi.to_json(), ensure_ascii=False))
    with report.timed("certificate"):
        ok = _check_on_products(report, "differential", args, lambda P, rng: check_sequence(P, phi, xi, rng, args.limit))
    return EXIT_OK if ok else EXIT_CERT


def cmd_tighten(args, report: Report) -> int:
    from .ba.tight import tight_violations, tighten
    from .harness import check_sequence

    phi = _formula(args, report)
    with report.timed("tighten"):
        td = tighten(phi, certify=True, bound=args.bound)
    report.data["outputs"]["tight"] = td.to_json()
    report.say(json.dumps(td.to_json(), ensure_ascii=False))
    bad = tight_violations(td.sigma)
    report.certificate("syntactic-scan", not bad, violations=bad)
    report.say(f"syntactic scan: {'PASS' if not bad else 'FAIL ' + '; '.join(bad)}")
    steps = [
        {"quantifier": c.quantifier, "components": c.components, "valid": c.valid, "detail": c.detail}
        for c in td.certificates
    ]
    n_ok = sum(1 for c in td.certificates if c.valid)
    report.certificate("elimination-steps", n_ok == len(steps), steps=steps)
    report.say(f"elimination certificates: {'PASS' if n_ok == len(steps) else 'FAIL'} ({n_ok}/{len(steps)} steps)")
    with report.timed("certificate"):
        ok = _check_on_products(
            report, "differential", args, lambda P, rng: check_sequence(P, phi, td.as_sequence(), rng, args.limit)
        )
    return EXIT_OK if ok and report.ok else EXIT_CERT


def cmd_eae(args, report: Report) -> int:
    from .harness import compare
    from .kiefe import eae_reduction, identity_provider, table_provider
    from .model import evaluate_product_batch

    phi = _formula(args, report)
    report.data["inputs"].update({"N": args.N, "M": args.M, "provider": args.provider})
    provider = identity_provider if args.provider == "identity" else table_provider(args.N, args.M)
    with report.timed("reduce"):
        red = eae_reduction(phi, provider, args.N, args.M)
    f = red.formula
    shape = quantifier_shape(f)
    report.data["outputs"].update(
        {
            "formula": render(f),
            "shape": shape.as_dict(),
            "tight": red.tight.to_json(),
            "patched": [render(p.formula) for p in red.patched],
            "patch_reports": red.reports(),
        }
    )
    report.say(render(f) if len(render(f)) <= args.max_print else f"(formula of {len(render(f))} characters)")
    report.certificate("shape", shape.eae, leaf_words=list(shape.leaves))
    report.say(f"shape: {'PASS' if shape.eae else 'FAIL'} (Boolean combination of ∃*∀*∃*)")
    es = red.tight.as_sequence()
    with report.timed("certificate"):
        ok = _check_on_products(
            report, "e-set-agreement", args, lambda P, rng: _eae_check(P, phi, f, es, rng, args.limit)
        )
    return EXIT_OK if ok and report.ok else EXIT_CERT


def _eae_check(P, phi, f, es, rng, limit):
    """The ∃∀∃ formula against the E-set combination (and hence against φ)."""
    from .harness import compare
    from .model import evaluate_acceptable_batch

    variables = sorted(free_variables(phi))
    return compare(P, f, lambda P_, batch: evaluate_acceptable_batch(P_, es, batch), variables, rng, limit)


def cmd_interp(args, report: Report) -> int:
    from .fv import decompose
    from .harness import check_formula
    from .interp import define_acceptable

    phi = _formula(args, report)
    xi = decompose(phi, args.bound)
    delta = define_acceptable(xi)
    report.data["outputs"].update({"sequence": xi.to_json(), "definition": render(delta)})
    report.say(render(delta) if len(render(delta)) <= args.max_print else f"(formula of {len(render(delta))} characters)")
    ok = _check_on_products(report, "definition", args, lambda P, rng: check_formula(P, phi, delta, rng, args.limit))
    return EXIT_OK if ok else EXIT_CERT


def cmd_demo(args, report: Report) -> int:
    from . import demos

    report.data["inputs"]["demo"] = args.name
    if args.name in ("copyz", "direct_sum"):
        with report.timed("search"):
            P, cases = (demos.copyz if args.name == "copyz" else demos.direct_sum)()
        found = sum(1 for c in cases if c.found)
        report.data["outputs"] = {
            "window": list(P.labels),
            "cylinders": len(cases),
            "witnesses_found": found,
            "cases": [c.as_dict(P) for c in cases] if args.verbose else [c.as_dict(P) for c in cases[:8]],
        }
        report.certificate("mixing-witnesses", found == len(cases), found=found, cylinders=len(cases))
        report.say(f"{args.name}: witnesses found for {found}/{len(cases)} cylinders over {', '.join(P.labels)}")
        for c in cases[:8]:
            d = c.as_dict(P)
            report.say(f"  fix {d['fixed']}={d['values']}: in {d['inside']}  out {d['outside']}")
        return EXIT_OK if found == len(cases) else EXIT_CERT
    rows = demos.psi2_anomaly()
    report.data["outputs"] = {"literal_psi2": demos.literal_psi_text(2), "table": rows}
    report.say(f"literal Ψ₂: {demos.literal_psi_text(2)}")
    report.say("field  literal-Ψ₂  strengthened-Ψ₂")
    for r in rows:
        report.say(f"{r['field']:<6} {str(r['literal']):<11} {r['strengthened']}")
    anomaly = [r["field"] for r in rows if r["literal"] and r["field"] != "F2"]
    report.certificate("psi2-anomaly-reproduced", anomaly == ["F8"], fields=anomaly)
    return EXIT_OK


def _buggy_combine(orig):
    from .fv import AcceptableSequence

    def combine(op, a, b=None):
        out = orig(op, a, b)
        if op in ("and", "&"):
            return AcceptableSequence(Not(out.bool_formula), out.components)
        return out

    return combine


def cmd_fuzz(args, report: Report) -> int:
    from . import fv
    from .harness import fuzz_decompose

    report.data["inputs"].update({"seed": args.seed, "count": args.count, "limit": args.limit})
    if args.inject_bug:
        report.data["inputs"]["inject_bug"] = "negated-combine"
    patch = mock.patch.object(fv, "combine", _buggy_combine(fv.combine)) if args.inject_bug else _null()
    with patch, report.timed("fuzz"):
        res = fuzz_decompose(args.seed, args.count, limit=args.limit)
    summary = res.as_dict()
    report.data["outputs"] = summary
    report.certificate("decompose-differential", not res.failed, passed_cases=res.passed, cases=len(res.cases))
    report.say(f"decompose certificates: {res.passed}/{len(res.cases)} PASS ({summary['tuples_checked']} tuples)")
    for c in res.failed[:5]:
        report.say(f"  FAIL case {c.case}: {c.formula} on {c.products}")
        if c.minimized:
            report.say(f"    minimized: {c.minimized}")
        if c.result is not None and c.result.counterexample:
            report.say(f"    counterexample: {json.dumps(c.result.counterexample, sort_keys=True)}")
        if c.error:
            report.say(f"    error: {c.error}")
    return EXIT_OK if not res.failed else EXIT_CERT


@contextmanager
def _null():
    yield


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    from .fv import DEFAULT_COMPONENT_BOUND
    from .kiefe import DEFAULT_M, DEFAULT_N

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--formula", help="formula text")
    common.add_argument(
        "--products", action="append", help="product spec such as F2xF3xF5, inline JSON or a .json path (repeatable)"
    )
    common.add_argument("--seed", type=int, default=0, help="64-bit seed for all sampling")
    common.add_argument("--N", type=int, default=DEFAULT_N, help="patching threshold for small fields")
    common.add_argument("--M", type=int, default=DEFAULT_M, help="field-size margin for checks")
    common.add_argument("--bound", type=int, default=DEFAULT_COMPONENT_BOUND, help="component bound")
    common.add_argument("--limit", type=int, default=200, help="tuples checked exhaustively up to this many")
    common.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    common.add_argument("--timing", action="store_true", help="record timings in the report")
    common.add_argument("--max-print", type=int, default=4000, help="longest formula printed in full")

    parser = argparse.ArgumentParser(prog="fvkit", description="Feferman–Vaught decompositions for finite products")
    parser.add_argument("--version", action="version", version=f"fvkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("parse", parents=[common], help="parse and pretty-print a formula")
    p.add_argument("--boolean", action="store_true", help="parse in the Boolean-algebra signature")
    p = sub.add_parser("eval", parents=[common], help="evaluate a formula on products")
    p.add_argument("--assign", action="append", help="x=(1,2,0) or x=5 (repeatable)")
    sub.add_parser("decompose", parents=[common], help="acceptable sequence + differential certificate")
    sub.add_parser("tighten", parents=[common], help="tight decomposition + certificates")
    p = sub.add_parser("eae", parents=[common], help="∃∀∃ reduction over products of fields")
    p.add_argument("--provider", choices=["table", "identity"], default="table")
    sub.add_parser("interp", parents=[common], help="single ring formula defining the decomposition")
    p = sub.add_parser("demo", parents=[common], help="demonstration scenarios")
    p.add_argument("name", choices=["copyz", "direct_sum", "psi2_anomaly"])
    p.add_argument("--verbose", action="store_true", help="list every cylinder in the report")
    p = sub.add_parser("fuzz", parents=[common], help="seeded differential harness")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    return parser


COMMANDS = {
    "parse": cmd_parse,
    "eval": cmd_eval,
    "decompose": cmd_decompose,
    "tighten": cmd_tighten,
    "eae": cmd_eae,
    "interp": cmd_interp,
    "demo": cmd_demo,
    "fuzz": cmd_fuzz,
}


def run(argv=None) -> tuple:
    """(exit code, report dict, printed lines) for a command line."""
    args = build_parser().parse_args(argv)
    if not args.products:
        args.products = ["F2xF3xF5"]
    report = Report(args.command, timing=args.timing)
    report.data["inputs"]["seed"] = args.seed
    report.data["inputs"]["products"] = list(args.products)
    error = None
    try:
        code = COMMANDS[args.command](args, report)
    except ParseError as exc:
        code, error = EXIT_PARSE, f"parse error: {exc}"
    except BoundExceeded as exc:
        code, error = EXIT_BOUND, f"bound exceeded ({exc.bound or 'resource'}): {exc}"
    except CertificateFailure as exc:
        code, error = EXIT_CERT, f"certificate failure: {exc}"
    except ProviderError as exc:
        code, error = EXIT_PROVIDER, f"provider contract failure: {exc}"
    except FvkitError as exc:
        code, error = exc.exit_code, str(exc)
    except ValueError as exc:
        code, error = EXIT_PARSE, f"invalid input: {exc}"
    return code, report.finish(code, error), report.lines


def main(argv=None) -> int:
    code, data, lines = run(argv)
    args = build_parser().parse_args(argv)
    to_stdout = args.json == "-"
    if not to_stdout:
        for line in lines:
            print(line)
    if data.get("error"):
        print(data["error"], file=sys.stderr)
    if args.json:
        text = dumps(data)
        if to_stdout:
            sys.stdout.write(text)
        else:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
