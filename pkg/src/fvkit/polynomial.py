"""Integer polynomials in named variables and their canonical term form.

A :class:`Polynomial` is a mapping from monomials to non-zero integer
coefficients.  A monomial is a tuple of ``(variable, exponent)`` pairs sorted
by variable name.  Monomials are ordered graded-lexicographically: higher
total degree first, ties broken by comparing exponent vectors over the sorted
variable names.
"""

from __future__ import annotations

from typing import Mapping

from .formula import Apply, Atomic, Const, Var, add, mul, neg_term, power, sub

Monomial = tuple


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


class Polynomial:
    __slots__ = ("terms", "_h")

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        for m, c in (terms or {}).items():
            m = tuple(sorted((v, e) for v, e in m if e))
            c = clean.get(m, 0) + int(c)
            if c:
                clean[m] = c
            else:
                clean.pop(m, None)
        self.terms = clean
        self._h = None

    # -- constructors
    @classmethod
    def const(cls, c: int) -> "Polynomial":
        return cls({(): c})

    @classmethod
    def variable(cls, name: str) -> "Polynomial":
        return cls({((name, 1),): 1})

    # -- arithmetic
    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = Polynomial.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = Polynomial.const(other)
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self.terms.items()))
        return self._h

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        from .render import render_term

        return f"Polynomial<{render_term(polynomial_to_term(self))}>"

    # -- inspection
    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        return max((dict(m).get(name, 0) for m in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self) -> list:
        names = sorted(self.variables())
        return sorted(self.terms.items(), key=lambda mc: _grlex_key(mc[0], names))

    def reduce_mod(self, p: int) -> "Polynomial":
        """Coefficients reduced into {0..p-1}."""
        return Polynomial({m: c % p for m, c in self.terms.items()})

    def evaluate(self, values: Mapping[str, int]) -> int:
        total = 0
        for m, c in self.terms.items():
            v = c
            for name, e in m:
                v *= values[name] ** e
            total += v
        return total


def _grlex_key(m: Monomial, names: list):
    exps = dict(m)
    return (-mono_degree(m), tuple(-exps.get(n, 0) for n in names))


def _coerce(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, int):
        return Polynomial.const(x)
    raise TypeError(f"cannot coerce {x!r} to Polynomial")


def term_to_polynomial(t) -> Polynomial:
    """Expand a ring term into its canonical polynomial."""
    if isinstance(t, Var):
        return Polynomial.variable(t.name)
    if isinstance(t, Const):
        return Polynomial.const(int(t.symbol))
    s = t.symbol
    if s == "+":
        return term_to_polynomial(t.args[0]) + term_to_polynomial(t.args[1])
    if s == "*":
        return term_to_polynomial(t.args[0]) * term_to_polynomial(t.args[1])
    if s == "-":
        return -term_to_polynomial(t.args[0])
    if s == "^":
        return term_to_polynomial(t.args[0]) ** int(t.args[1].symbol)
    raise ValueError(f"not a ring term: symbol {s!r}")


def _monomial_term(m: Monomial):
    factors = []
    for v, e in m:
        factors.append(Var(v) if e == 1 else power(Var(v), e))
    out = factors[0]
    for f in factors[1:]:
        out = mul(out, f)
    return out


def polynomial_to_term(p: Polynomial):
    """Canonical ring term: monomials in graded-lex order, ``c*m`` products.

    Negative coefficients are written with binary minus, so ``x^2 - 1``
    renders the way one would expect.
    """
    items = p.sorted_terms()
    if not items:
        return Const("0")
    out = None
    for m, c in items:
        mag = abs(c)
        if not m:
            piece = Const(str(mag))
        elif mag == 1:
            piece = _monomial_term(m)
        else:
            piece = mul(Const(str(mag)), _monomial_term(m))
        if out is None:
            out = piece if c > 0 else neg_term(piece)
        else:
            out = add(out, piece) if c > 0 else sub(out, piece)
    return out


def atomic_polynomial(f: Atomic) -> Polynomial:
    """Normalise a ring equation ``s = t`` to the polynomial s - t (read as = 0)."""
    if not isinstance(f, Atomic) or f.relation != "=":
        raise ValueError("expected a ring equation")
    s, t = f.terms
    return term_to_polynomial(s) - term_to_polynomial(t)


def polynomial_equation(p: Polynomial) -> Atomic:
    """The atomic formula ``p = 0``."""
    return Atomic("=", (polynomial_to_term(p), Const("0")))


def as_polynomial(x) -> Polynomial:
    """Accept a Polynomial, an int, a ring term or a ring equation."""
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, int):
        return Polynomial.const(x)
    if isinstance(x, Atomic):
        return atomic_polynomial(x)
    if isinstance(x, (Var, Const, Apply)):
        return term_to_polynomial(x)
    raise TypeError(f"cannot read {x!r} as a polynomial")
